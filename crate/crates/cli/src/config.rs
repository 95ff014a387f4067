//! Run configuration: a flat JSON file overlaid by command-line flags, then
//! validated into a [`RunConfig`] before anything is computed.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use kellyclock::mc::{SimConfig, SimMode};
use kellyclock::{BetModel, ClockKind, ClockModel, Outcome};
use serde::{Deserialize, Deserializer};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Curve,
    Solve,
    Table1,
    Simulate,
    Accept,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[value(name = "clock_only", alias = "clock-only")]
    ClockOnly,
    Full,
}

/// Outcome list given as `r:prob,r:prob,...` on the command line or as
/// `[[r, prob], ...]` in the config file.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeList(pub Vec<Outcome>);

impl FromStr for OutcomeList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|item| {
                let (r, p) = item
                    .split_once(':')
                    .ok_or_else(|| format!("outcome '{item}' is not of the form r:prob"))?;
                let r = r.trim().parse::<f64>().map_err(|e| format!("outcome return '{r}': {e}"))?;
                let prob = p.trim().parse::<f64>().map_err(|e| format!("outcome probability '{p}': {e}"))?;
                Ok(Outcome { r, prob })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(OutcomeList)
    }
}

impl<'de> Deserialize<'de> for OutcomeList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Pairs(Vec<(f64, f64)>),
        }
        match Repr::deserialize(d)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Pairs(v) => Ok(OutcomeList(v.into_iter().map(|(r, prob)| Outcome { r, prob }).collect())),
        }
    }
}

/// Every setting, all optional. The same struct is parsed from flags and
/// from the JSON config file.
#[derive(Debug, Clone, Default, Parser, Deserialize)]
#[command(name = "kellyclock", version, about = "Kelly growth, ruin thresholds and acceptability under stochastic clocks")]
#[command(allow_negative_numbers = true)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    /// curve | solve | table1 | simulate | accept
    #[arg(value_enum)]
    pub command: Option<CommandName>,

    /// Flat JSON config file; flags override its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Clock kind(s): degenerate, gamma, inverse_gaussian. `curve` accepts a
    /// comma-separated list.
    #[arg(long)]
    pub clock: Option<String>,
    /// Clock variance (ignored by the degenerate clock).
    #[arg(long)]
    pub theta: Option<f64>,

    /// Bet kind: bernoulli, uniform, discrete (inferred from --p/--lb/--outcomes if absent).
    #[arg(long)]
    pub bet: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub lb: Option<f64>,
    #[arg(long)]
    pub ub: Option<f64>,
    /// Discrete outcomes as r:prob,r:prob,...
    #[arg(long)]
    pub outcomes: Option<OutcomeList>,

    #[arg(long)]
    pub f: Option<f64>,
    #[arg(long)]
    pub f_min: Option<f64>,
    #[arg(long)]
    pub f_max: Option<f64>,
    #[arg(long)]
    pub f_step: Option<f64>,
    /// Search bound for bets with unbounded admissible fraction (solve).
    #[arg(long)]
    pub search_upper: Option<f64>,

    #[arg(long)]
    pub periods: Option<usize>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,
    /// Fixed drift for clock_only simulations.
    #[arg(long)]
    pub s_bar: Option<f64>,
    #[arg(long)]
    pub ruin_floor: Option<f64>,
    #[arg(long)]
    pub growth_ceiling: Option<f64>,
    /// Write per-path terminal states to this CSV file (simulate).
    #[arg(long)]
    pub dump_paths: Option<PathBuf>,

    #[arg(long)]
    pub hurdle: Option<f64>,
    /// Stress level at which the distorted growth is reported (accept).
    #[arg(long)]
    pub x: Option<f64>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),+) => {
        RawConfig { $($field: $top.$field.or($base.$field)),+ }
    };
}

impl RawConfig {
    pub fn load_file(path: &Path) -> Result<RawConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    /// `self` overridden by every field set in `top`.
    pub fn overlay(self, top: RawConfig) -> RawConfig {
        overlay!(
            self, top, command, config, clock, theta, bet, p, lb, ub, outcomes, f, f_min, f_max,
            f_step, search_upper, periods, paths, seed, mode, s_bar, ruin_floor, growth_ceiling,
            dump_paths, hurdle, x, format, out
        )
    }

    /// Flags layered over the config file named by `--config`, if any.
    pub fn resolve(flags: RawConfig) -> Result<RawConfig, CliError> {
        match &flags.config {
            Some(path) => Ok(RawConfig::load_file(path)?.overlay(flags)),
            None => Ok(flags),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandName,
    pub clocks: Vec<ClockModel>,
    pub bet: Option<BetModel>,
    pub fractions: Vec<f64>,
    pub search_upper: Option<f64>,
    pub sim: Option<SimConfig>,
    pub hurdle: f64,
    pub x: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub dump_paths: Option<PathBuf>,
}

fn cfg_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn parse_clocks(raw: &RawConfig) -> Result<Vec<ClockModel>, CliError> {
    let spec = raw.clock.as_deref().ok_or_else(|| cfg_err("--clock is required"))?;
    spec.split(',')
        .map(|k| {
            let kind: ClockKind = k.parse().map_err(cfg_err)?;
            match kind {
                ClockKind::Degenerate => Ok(ClockModel::degenerate()),
                _ => {
                    let theta = raw
                        .theta
                        .ok_or_else(|| cfg_err(format!("--theta is required for the {} clock", kind.as_str())))?;
                    ClockModel::new(kind, theta).map_err(cfg_err)
                }
            }
        })
        .collect()
}

fn parse_bet(raw: &RawConfig) -> Result<BetModel, CliError> {
    let kind = match raw.bet.as_deref() {
        Some(k) => k.trim().to_ascii_lowercase(),
        None if raw.p.is_some() => "bernoulli".into(),
        None if raw.lb.is_some() || raw.ub.is_some() => "uniform".into(),
        None if raw.outcomes.is_some() => "discrete".into(),
        None => return Err(cfg_err("--bet is required (bernoulli, uniform or discrete)")),
    };
    match kind.as_str() {
        "bernoulli" => BetModel::bernoulli(raw.p.ok_or_else(|| cfg_err("--p is required for a bernoulli bet"))?),
        "uniform" => match (raw.lb, raw.ub) {
            (Some(lb), Some(ub)) => BetModel::uniform(lb, ub),
            _ => return Err(cfg_err("--lb and --ub are required for a uniform bet")),
        },
        "discrete" => BetModel::discrete(
            raw.outcomes.clone().ok_or_else(|| cfg_err("--outcomes is required for a discrete bet"))?.0,
        ),
        other => return Err(cfg_err(format!("unknown bet kind '{other}'"))),
    }
    .map_err(cfg_err)
}

fn parse_fractions(raw: &RawConfig, bet: &BetModel) -> Result<Vec<f64>, CliError> {
    let grid = if raw.f_max.is_some() || raw.f_step.is_some() {
        let f_max = raw.f_max.ok_or_else(|| cfg_err("--f-max is required for a grid"))?;
        let step = raw.f_step.ok_or_else(|| cfg_err("--f-step is required for a grid"))?;
        kellyclock::growth::linear_grid(raw.f_min.unwrap_or(0.0), f_max, step).map_err(cfg_err)?
    } else if let Some(f) = raw.f {
        vec![f]
    } else {
        return Err(cfg_err("give --f or a grid (--f-min/--f-max/--f-step)"));
    };
    for &f in &grid {
        bet.check_fraction(f).map_err(cfg_err)?;
    }
    Ok(grid)
}

fn single_clock(clocks: Vec<ClockModel>) -> Result<Vec<ClockModel>, CliError> {
    if clocks.len() != 1 {
        return Err(cfg_err("this command takes exactly one clock"));
    }
    Ok(clocks)
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<RunConfig, CliError> {
        let command = raw.command.ok_or_else(|| cfg_err("no command given"))?;
        let mut cfg = RunConfig {
            command,
            clocks: vec![],
            bet: None,
            fractions: vec![],
            search_upper: raw.search_upper,
            sim: None,
            hurdle: raw.hurdle.unwrap_or(1.0),
            x: raw.x.unwrap_or(0.0),
            format: raw.format.unwrap_or(match command {
                CommandName::Curve | CommandName::Table1 => Format::Csv,
                _ => Format::Json,
            }),
            out: raw.out.clone(),
            dump_paths: raw.dump_paths.clone(),
        };
        if let Some(u) = cfg.search_upper {
            if !(u > 0.0 && u.is_finite()) {
                return Err(cfg_err(format!("--search-upper must be positive, got {u}")));
            }
        }
        if cfg.dump_paths.is_some() && command != CommandName::Simulate {
            return Err(cfg_err("--dump-paths only applies to simulate"));
        }
        match command {
            CommandName::Table1 => {}
            CommandName::Curve => {
                cfg.clocks = parse_clocks(raw)?;
                let bet = parse_bet(raw)?;
                cfg.fractions = parse_fractions(raw, &bet)?;
                cfg.bet = Some(bet);
            }
            CommandName::Solve => {
                cfg.clocks = single_clock(parse_clocks(raw)?)?;
                cfg.bet = Some(parse_bet(raw)?);
            }
            CommandName::Accept => {
                cfg.clocks = single_clock(parse_clocks(raw)?)?;
                let bet = parse_bet(raw)?;
                cfg.fractions = parse_fractions(raw, &bet)?;
                cfg.bet = Some(bet);
                if !(cfg.hurdle >= 1.0 && cfg.hurdle.is_finite()) {
                    return Err(cfg_err(format!("--hurdle must be >= 1, got {}", cfg.hurdle)));
                }
                if !(cfg.x >= 0.0 && cfg.x.is_finite()) {
                    return Err(cfg_err(format!("--x must be >= 0, got {}", cfg.x)));
                }
            }
            CommandName::Simulate => {
                cfg.clocks = single_clock(parse_clocks(raw)?)?;
                if cfg.format != Format::Json {
                    return Err(cfg_err("simulate writes JSON only (use --dump-paths for per-path CSV)"));
                }
                let defaults = SimConfig::default();
                let mode = match raw.mode.unwrap_or(ModeName::Full) {
                    ModeName::Full => {
                        let bet = parse_bet(raw)?;
                        let f = raw.f.ok_or_else(|| cfg_err("--f is required in full mode"))?;
                        bet.check_fraction(f).map_err(cfg_err)?;
                        cfg.fractions = vec![f];
                        cfg.bet = Some(bet);
                        SimMode::Full
                    }
                    ModeName::ClockOnly => SimMode::ClockOnly {
                        s_bar: raw.s_bar.ok_or_else(|| cfg_err("--s-bar is required in clock_only mode"))?,
                    },
                };
                let sim = SimConfig {
                    periods: raw.periods.unwrap_or(defaults.periods),
                    paths: raw.paths.unwrap_or(defaults.paths),
                    seed: raw.seed.unwrap_or(defaults.seed),
                    mode,
                    ruin_floor: raw.ruin_floor.unwrap_or(defaults.ruin_floor),
                    growth_ceiling: raw.growth_ceiling.unwrap_or(defaults.growth_ceiling),
                };
                sim.validate(&cfg.clocks[0]).map_err(cfg_err)?;
                cfg.sim = Some(sim);
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RawConfig {
        RawConfig::try_parse_from(std::iter::once("kellyclock").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_parse_with_negative_numbers() {
        let raw = parse(&["solve", "--clock", "gamma", "--theta", "0.5", "--lb", "-0.7", "--ub", "1.0"]);
        let cfg = RunConfig::from_raw(&raw).unwrap();
        assert_eq!(cfg.bet, Some(BetModel::Uniform { lb: -0.7, ub: 1.0 }));
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn flags_override_file_values() {
        let file: RawConfig =
            serde_json::from_str(r#"{"command":"solve","clock":"gamma","theta":0.5,"p":0.53}"#).unwrap();
        let flags = parse(&["--theta", "1.0"]);
        let merged = file.overlay(flags);
        let cfg = RunConfig::from_raw(&merged).unwrap();
        assert_eq!(cfg.clocks, vec![ClockModel::gamma(1.0).unwrap()]);
        assert_eq!(cfg.command, CommandName::Solve);
    }

    #[test]
    fn unknown_config_keys_rejected() {
        assert!(serde_json::from_str::<RawConfig>(r#"{"thetta":0.5}"#).is_err());
    }

    #[test]
    fn outcome_list_forms() {
        let a: OutcomeList = "-0.5:0.5, 0.8:0.5".parse().unwrap();
        let b: OutcomeList = serde_json::from_str("[[-0.5,0.5],[0.8,0.5]]").unwrap();
        assert_eq!(a, b);
        assert!("0.5".parse::<OutcomeList>().is_err());
    }

    #[test]
    fn curve_accepts_clock_lists_and_grids() {
        let raw = parse(&[
            "curve", "--clock", "degenerate,gamma,inverse_gaussian", "--theta", "0.5", "--p", "0.53",
            "--f-max", "0.14", "--f-step", "0.002",
        ]);
        let cfg = RunConfig::from_raw(&raw).unwrap();
        assert_eq!(cfg.clocks.len(), 3);
        assert_eq!(cfg.fractions.len(), 71);
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn validation_messages() {
        let cases: &[&[&str]] = &[
            &["solve", "--p", "0.53"],
            &["solve", "--clock", "gamma", "--p", "0.53"],
            &["solve", "--clock", "gamma,degenerate", "--theta", "0.5", "--p", "0.53"],
            &["curve", "--clock", "gamma", "--theta", "0.5", "--p", "0.53"],
            &["curve", "--clock", "gamma", "--theta", "0.5", "--p", "0.53", "--f", "1.2"],
            &["simulate", "--clock", "gamma", "--theta", "0.5", "--mode", "clock_only"],
            &["simulate", "--clock", "gamma", "--theta", "0.5", "--mode", "clock_only", "--s-bar", "3"],
            &["simulate", "--clock", "gamma", "--theta", "0.5", "--p", "0.53"],
            &["accept", "--clock", "gamma", "--theta", "0.5", "--p", "0.53", "--f", "0.06", "--hurdle", "0.5"],
            &["solve", "--clock", "warp", "--p", "0.53"],
            &["solve", "--clock", "degenerate", "--bet", "bernoulli"],
            &["solve", "--clock", "degenerate", "--p", "1.5"],
            &["table1", "--dump-paths", "x.csv"],
        ];
        for args in cases {
            let e = RunConfig::from_raw(&parse(args)).unwrap_err();
            assert!(matches!(e, CliError::Config(_)), "{args:?}: {e:?}");
        }
        assert!(matches!(RunConfig::from_raw(&RawConfig::default()), Err(CliError::Config(_))));
    }
}
