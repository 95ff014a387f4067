use kellyclock::accept::{acceptability_index, distorted_growth, DistortionFamily};
use kellyclock::growth::{growth_cc, growth_curve, GrowthCurve};
use kellyclock::mc::{simulate_paths, summarize, SimConfig, SimMode, SimResult};
use kellyclock::solve::{ruin_threshold, SolveOptions, SolveResult};
use kellyclock::table::{reference_rows, reproduce, TableReport, COLUMNS};
use kellyclock::{AcceptabilityIndex, BetModel, ClockModel};
use serde::Serialize;

use crate::config::{CommandName, Format, RunConfig};
use crate::{CliError, Output};

pub fn execute(cfg: &RunConfig) -> Result<Output, CliError> {
    let main = match cfg.command {
        CommandName::Curve => curve(cfg)?,
        CommandName::Solve => solve(cfg)?,
        CommandName::Table1 => table1(cfg)?,
        CommandName::Accept => accept(cfg)?,
        CommandName::Simulate => return simulate(cfg),
    };
    Ok(Output { main, paths_csv: None })
}

fn bet(cfg: &RunConfig) -> &BetModel {
    cfg.bet.as_ref().expect("validated config carries a bet")
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_text<F>(fill: F) -> Result<String, CliError>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    fill(&mut w).map_err(|e| CliError::Io(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn curve(cfg: &RunConfig) -> Result<String, CliError> {
    let curves: Vec<GrowthCurve> = cfg
        .clocks
        .iter()
        .map(|c| growth_curve(c, bet(cfg), &cfg.fractions))
        .collect::<Result<_, _>>()?;
    match cfg.format {
        Format::Json => json(&curves),
        Format::Csv => csv_text(|w| {
            w.write_record(["f", "G", "model_label"])?;
            for c in &curves {
                for p in &c.points {
                    w.write_record([p.f.to_string(), p.g.to_string(), c.model_label.clone()])?;
                }
            }
            Ok(())
        }),
    }
}

#[derive(Serialize)]
struct SolveReport<'a> {
    model_label: String,
    clock: &'a ClockModel,
    bet: &'a BetModel,
    #[serde(flatten)]
    result: SolveResult,
}

fn solve(cfg: &RunConfig) -> Result<String, CliError> {
    let clock = &cfg.clocks[0];
    let mut opts = SolveOptions::default();
    if cfg.search_upper.is_some() {
        opts.search_upper = cfg.search_upper;
    }
    let result = ruin_threshold(clock, bet(cfg), &opts)?;
    let report = SolveReport { model_label: clock.label(), clock, bet: bet(cfg), result };
    match cfg.format {
        Format::Json => json(&report),
        Format::Csv => csv_text(|w| {
            w.write_record(["model_label", "f_star", "g_at_f_star", "f_c", "iterations"])?;
            w.write_record([
                report.model_label.clone(),
                report.result.f_star.to_string(),
                report.result.g_at_f_star.to_string(),
                report.result.f_c.map(|x| x.to_string()).unwrap_or_default(),
                report.result.iterations.to_string(),
            ])
        }),
    }
}

fn table1(cfg: &RunConfig) -> Result<String, CliError> {
    let report: TableReport = reproduce(&reference_rows()?)?;
    match cfg.format {
        Format::Json => json(&report),
        Format::Csv => {
            let body = csv_text(|w| {
                let mut header = vec!["market".to_string(), "sample".into(), "theta".into()];
                for c in COLUMNS {
                    header.extend([c.to_string(), format!("{c}_ref"), format!("{c}_delta")]);
                }
                w.write_record(&header)?;
                for r in &report.rows {
                    let mut rec = vec![r.market.clone(), r.sample.clone(), r.theta.to_string()];
                    for ((c, rf), d) in r.computed.iter().zip(&r.reference).zip(r.deltas()) {
                        rec.extend([c.to_string(), rf.to_string(), d.to_string()]);
                    }
                    w.write_record(&rec)?;
                }
                Ok(())
            })?;
            Ok(format!(
                "# calibrated uniform bounds lb={} ub={}\n{body}",
                report.calibration.lb, report.calibration.ub
            ))
        }
    }
}

#[derive(Serialize)]
struct AcceptRecord {
    f: f64,
    x: AcceptabilityIndex,
    hurdle: f64,
    distorted_growth: f64,
    x_eval: f64,
    growth_cc: f64,
}

fn accept(cfg: &RunConfig) -> Result<String, CliError> {
    let clock = &cfg.clocks[0];
    let fam = DistortionFamily::Power;
    let records: Vec<AcceptRecord> = cfg
        .fractions
        .iter()
        .map(|&f| {
            Ok(AcceptRecord {
                f,
                x: acceptability_index(clock, fam, bet(cfg), f, cfg.hurdle)?,
                hurdle: cfg.hurdle,
                distorted_growth: distorted_growth(clock, fam, cfg.x, bet(cfg), f)?,
                x_eval: cfg.x,
                growth_cc: growth_cc(clock, bet(cfg), f)?,
            })
        })
        .collect::<Result<_, kellyclock::Error>>()?;
    match cfg.format {
        Format::Json => json(&records),
        Format::Csv => csv_text(|w| {
            w.write_record(["f", "x", "hurdle", "distorted_growth", "x_eval", "growth_cc"])?;
            for r in &records {
                let x = match r.x {
                    AcceptabilityIndex::Finite(v) => v.to_string(),
                    AcceptabilityIndex::Infinite => "inf".into(),
                };
                w.write_record([
                    r.f.to_string(),
                    x,
                    r.hurdle.to_string(),
                    r.distorted_growth.to_string(),
                    r.x_eval.to_string(),
                    r.growth_cc.to_string(),
                ])?;
            }
            Ok(())
        }),
    }
}

#[derive(Serialize)]
struct SimReport<'a> {
    model_label: String,
    clock: &'a ClockModel,
    #[serde(skip_serializing_if = "Option::is_none")]
    bet: Option<&'a BetModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f: Option<f64>,
    config: &'a SimConfig,
    result: SimResult,
}

fn simulate(cfg: &RunConfig) -> Result<Output, CliError> {
    let clock = &cfg.clocks[0];
    let sim = cfg.sim.as_ref().expect("validated simulate config");
    // clock-only runs ignore the bet entirely
    let placeholder = BetModel::bernoulli(0.5)?;
    let (b, f) = match sim.mode {
        SimMode::Full => (bet(cfg), cfg.fractions[0]),
        SimMode::ClockOnly { .. } => (&placeholder, 0.0),
    };
    let paths = simulate_paths(clock, b, f, sim)?;
    let result = summarize(&paths, sim);
    let full = matches!(sim.mode, SimMode::Full);
    let report = SimReport {
        model_label: clock.label(),
        clock,
        bet: full.then_some(b),
        f: full.then_some(f),
        config: sim,
        result,
    };
    let paths_csv = match cfg.dump_paths {
        Some(_) => Some(csv_text(|w| {
            w.write_record(["path", "log_wealth", "tau", "cov", "s_mean"])?;
            for (j, p) in paths.iter().enumerate() {
                w.write_record([
                    j.to_string(),
                    p.log_wealth.to_string(),
                    p.tau.to_string(),
                    p.cov.to_string(),
                    p.s_mean.to_string(),
                ])?;
            }
            Ok(())
        })?),
        None => None,
    };
    Ok(Output { main: json(&report)?, paths_csv })
}
