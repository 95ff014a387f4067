//! Optimal fraction, ruin threshold and calibration of uniform bets.

use serde::{Deserialize, Serialize};

use crate::bet::BetModel;
use crate::clock::ClockModel;
use crate::error::{Error, Result};
use crate::growth::{growth_cc, growth_cc_derivative, growth_kt};
use crate::roots::{bisect_sign, brent, golden_max};

/// Default search bound for bets whose fraction is unbounded.
pub const DEFAULT_SEARCH_UPPER: f64 = 10.0;

const BRACKET_GROWTH: f64 = 1.6;
// Distance kept from a finite max_fraction, relative to it.
const EDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaximizeMethod {
    /// Bisection on the sign of `G'`.
    DerivativeBisection,
    GoldenSection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Upper end of the search when `max_fraction` is infinite; `None`
    /// makes such bets a configuration error.
    pub search_upper: Option<f64>,
    pub xtol: f64,
    pub max_iter: usize,
    pub method: MaximizeMethod,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            search_upper: Some(DEFAULT_SEARCH_UPPER),
            xtol: 1e-13,
            max_iter: 500,
            method: MaximizeMethod::DerivativeBisection,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub f_star: f64,
    pub g_at_f_star: f64,
    /// Ruin threshold; `None` when `G` stays nonnegative up to the search
    /// bound.
    pub f_c: Option<f64>,
    pub iterations: usize,
    /// `G'(f_star)` and, when a threshold was found, `G(f_c)`.
    pub residuals: Vec<f64>,
    /// Final bracket of each root search, in the same order.
    pub brackets: Vec<(f64, f64)>,
    pub method: MaximizeMethod,
}

fn search_upper(bet: &BetModel, opts: &SolveOptions) -> Result<f64> {
    let max = bet.max_fraction();
    let upper = match (max.is_finite(), opts.search_upper) {
        (true, Some(u)) => (max * (1.0 - EDGE)).min(u),
        (true, None) => max * (1.0 - EDGE),
        (false, Some(u)) => u,
        (false, None) => {
            return Err(Error::Config(format!(
                "{} has no finite maximum fraction; an upper search bound is required",
                bet.label()
            )))
        }
    };
    if !(upper > 0.0) || !upper.is_finite() {
        return Err(Error::Config(format!("search upper bound must be positive, got {upper}")));
    }
    Ok(upper)
}

/// Fraction maximizing `growth_cc` on `[0, max_fraction)`.
pub fn optimal_fraction(clock: &ClockModel, bet: &BetModel, opts: &SolveOptions) -> Result<SolveResult> {
    let upper = search_upper(bet, opts)?;
    let g = |f: f64| growth_cc(clock, bet, f);
    let dg = |f: f64| {
        growth_cc_derivative(clock, bet, f).and_then(|d| {
            if d.is_finite() {
                Ok(d)
            } else {
                Err(Error::Root(format!("non-finite derivative at f = {f}")))
            }
        })
    };

    let slope0 = dg(0.0)?;
    if slope0 <= 0.0 {
        // concave with nonpositive initial slope: staying out is optimal
        return Ok(SolveResult {
            f_star: 0.0,
            g_at_f_star: 0.0,
            f_c: None,
            iterations: 0,
            residuals: vec![slope0],
            brackets: vec![(0.0, 0.0)],
            method: opts.method,
        });
    }

    let by_derivative = || -> Result<SolveResult> {
        let top = dg(upper)?;
        let (f_star, it, bracket) = if top > 0.0 {
            (upper, 0, (upper, upper))
        } else {
            let r = bisect_sign(dg, 0.0, upper, opts.xtol, opts.max_iter)?;
            (r.x, r.iterations, r.bracket)
        };
        Ok(SolveResult {
            f_star,
            g_at_f_star: g(f_star)?,
            f_c: None,
            iterations: it,
            residuals: vec![dg(f_star)?],
            brackets: vec![bracket],
            method: MaximizeMethod::DerivativeBisection,
        })
    };
    let by_golden = || -> Result<SolveResult> {
        let r = golden_max(g, 0.0, upper, opts.xtol.max(1e-10), opts.max_iter)?;
        Ok(SolveResult {
            f_star: r.x,
            g_at_f_star: r.fx,
            f_c: None,
            iterations: r.iterations,
            residuals: vec![dg(r.x).unwrap_or(f64::NAN)],
            brackets: vec![r.bracket],
            method: MaximizeMethod::GoldenSection,
        })
    };

    match opts.method {
        MaximizeMethod::GoldenSection => by_golden(),
        MaximizeMethod::DerivativeBisection => match by_derivative() {
            Ok(r) => Ok(r),
            Err(e) if e.is_config() => Err(e),
            Err(_) => by_golden(),
        },
    }
}

/// Optimum followed by the ruin threshold: the root of `G` above `f_star`.
/// The bracket grows geometrically from `f_star` toward the search bound;
/// if `G` never turns negative the result has `f_c = None`.
pub fn ruin_threshold(clock: &ClockModel, bet: &BetModel, opts: &SolveOptions) -> Result<SolveResult> {
    let mut res = optimal_fraction(clock, bet, opts)?;
    let upper = search_upper(bet, opts)?;
    let g = |f: f64| growth_cc(clock, bet, f);

    if res.g_at_f_star <= 0.0 {
        // no favorable region: every positive stake is on the ruin side
        res.f_c = Some(res.f_star);
        res.residuals.push(res.g_at_f_star);
        res.brackets.push((res.f_star, res.f_star));
        return Ok(res);
    }

    let mut lo = res.f_star;
    let mut step = 0.25 * res.f_star.max(1e-6);
    let mut hi;
    let mut expansions = 0;
    loop {
        hi = (lo + step).min(upper);
        let ghi = g(hi)?;
        expansions += 1;
        if ghi <= 0.0 {
            break;
        }
        if hi >= upper {
            res.iterations += expansions;
            return Ok(res);
        }
        lo = hi;
        step *= BRACKET_GROWTH;
    }
    let root = brent(g, lo, hi, opts.xtol, opts.max_iter)?;
    res.f_c = Some(root.x);
    res.iterations += expansions + root.iterations;
    res.residuals.push(root.fx);
    res.brackets.push(root.bracket);
    Ok(res)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMethod {
    /// Damped Newton, with nested bisection if Newton fails.
    Auto,
    Newton,
    NestedBisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub lb: f64,
    pub ub: f64,
    pub iterations: usize,
    /// Kelly-Thorp `G'(target_f)` and `G(target_f) - target_g` at the solution.
    pub residuals: [f64; 2],
    pub method: CalibrationMethod,
}

impl Calibration {
    pub fn bet(&self) -> BetModel {
        BetModel::Uniform { lb: self.lb, ub: self.ub }
    }
}

const CALIBRATION_TOL: f64 = 1e-13;

/// Uniform bounds `(LB, UB)` whose Kelly-Thorp optimum sits at `target_f`
/// with growth `target_g` there.
///
/// Solves `G'_KT(target_f) = 0` and `G_KT(target_f) = target_g`. Since
/// `G_KT` is concave, the first equation pins the optimum.
pub fn calibrate_uniform_bounds(target_f: f64, target_g: f64) -> Result<Calibration> {
    calibrate_uniform_bounds_with(target_f, target_g, CalibrationMethod::Auto)
}

pub fn calibrate_uniform_bounds_with(
    target_f: f64,
    target_g: f64,
    method: CalibrationMethod,
) -> Result<Calibration> {
    if !(target_f > 0.0) || !target_f.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "target optimal fraction must be positive (interior optimum), got {target_f}"
        )));
    }
    if !(target_g > 0.0) || !target_g.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "target growth must be positive, got {target_g}"
        )));
    }
    let cal = match method {
        CalibrationMethod::Newton => newton_calibration(target_f, target_g)?,
        CalibrationMethod::NestedBisection => bisection_calibration(target_f, target_g)?,
        CalibrationMethod::Auto => match newton_calibration(target_f, target_g) {
            Ok(c) => c,
            Err(_) => bisection_calibration(target_f, target_g)?,
        },
    };
    Ok(Calibration { method: if method == CalibrationMethod::Auto { cal.method } else { method }, ..cal })
}

fn calibration_residuals(f: f64, g: f64, lb: f64, ub: f64) -> Result<[f64; 2]> {
    let bet = BetModel::uniform(lb, ub)?;
    let d = growth_cc_derivative(&ClockModel::degenerate(), &bet, f)?;
    let v = growth_kt(&bet, f)?;
    Ok([d, v - g])
}

fn feasible(f: f64, lb: f64, ub: f64) -> bool {
    lb < ub && 1.0 + f * lb > 0.0 && lb.is_finite() && ub.is_finite()
}

/// Start from the quadratic approximation `G ~ f m - f^2 (m^2 + h^2/3)/2`
/// with mean `m` and half-width `h`.
fn initial_guess(f: f64, g: f64) -> (f64, f64) {
    let m = 2.0 * g / f;
    let h = (3.0 * (m / f - m * m)).max(1e-4).sqrt();
    let lb = (m - h).max(-0.95 / f);
    (lb, (m + h).max(lb + 1e-3))
}

fn newton_calibration(f: f64, g: f64) -> Result<Calibration> {
    const MAX_ITER: usize = 100;
    let (mut lb, mut ub) = initial_guess(f, g);
    let mut r = calibration_residuals(f, g, lb, ub)?;
    let norm = |r: &[f64; 2]| r[0].hypot(r[1]);
    for it in 1..=MAX_ITER {
        if norm(&r) < CALIBRATION_TOL {
            return Ok(Calibration { lb, ub, iterations: it - 1, residuals: r, method: CalibrationMethod::Newton });
        }
        let h = 1e-7;
        let rl = calibration_residuals(f, g, lb + h, ub)?;
        let rl2 = calibration_residuals(f, g, lb - h, ub)?;
        let ru = calibration_residuals(f, g, lb, ub + h)?;
        let ru2 = calibration_residuals(f, g, lb, ub - h)?;
        let j = [
            [(rl[0] - rl2[0]) / (2.0 * h), (ru[0] - ru2[0]) / (2.0 * h)],
            [(rl[1] - rl2[1]) / (2.0 * h), (ru[1] - ru2[1]) / (2.0 * h)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !det.is_finite() || det == 0.0 {
            break;
        }
        let dlb = (r[0] * j[1][1] - r[1] * j[0][1]) / det;
        let dub = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let (nl, nu) = (lb - t * dlb, ub - t * dub);
            if feasible(f, nl, nu) {
                if let Ok(nr) = calibration_residuals(f, g, nl, nu) {
                    if norm(&nr) < norm(&r) {
                        lb = nl;
                        ub = nu;
                        r = nr;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            if norm(&r) < 1e3 * CALIBRATION_TOL {
                return Ok(Calibration { lb, ub, iterations: it, residuals: r, method: CalibrationMethod::Newton });
            }
            break;
        }
    }
    if norm(&r) < CALIBRATION_TOL {
        return Ok(Calibration { lb, ub, iterations: MAX_ITER, residuals: r, method: CalibrationMethod::Newton });
    }
    Err(Error::Calibration { iterations: MAX_ITER, residuals: r })
}

/// For a half-width `h`, the center `m` solving the first-order condition
/// (the derivative is increasing in `m`).
fn center_for_width(f: f64, h: f64) -> Result<f64> {
    let dg = |m: f64| calibration_residuals(f, 0.0, m - h, m + h).map(|r| r[0]);
    // lb = m - h must exceed -1/f
    let lo = -1.0 / f + h + 1e-12 * (1.0 + h);
    let mut hi = h.max(1.0);
    let mut n = 0;
    while dg(hi)? <= 0.0 {
        hi *= 2.0;
        n += 1;
        if n > 60 {
            return Err(Error::Root("no center bracket".into()));
        }
    }
    let r = brent(dg, lo, hi, 1e-15, 300)?;
    Ok(r.x)
}

fn bisection_calibration(f: f64, g: f64) -> Result<Calibration> {
    let growth_at = |h: f64| -> Result<f64> {
        let m = center_for_width(f, h)?;
        Ok(calibration_residuals(f, g, m - h, m + h)?[1])
    };
    // G at the optimum grows with the dispersion that supports it
    let mut lo = 1e-6;
    let mut hi = 0.5;
    let mut n = 0;
    while growth_at(hi)? < 0.0 {
        lo = hi;
        hi *= 1.6;
        n += 1;
        if n > 80 {
            return Err(Error::Calibration { iterations: n, residuals: [f64::NAN; 2] });
        }
    }
    if growth_at(lo)? > 0.0 {
        return Err(Error::Calibration { iterations: n, residuals: [f64::NAN; 2] });
    }
    let r = brent(growth_at, lo, hi, 1e-15, 300)?;
    let m = center_for_width(f, r.x)?;
    let (lb, ub) = (m - r.x, m + r.x);
    let residuals = calibration_residuals(f, g, lb, ub)?;
    if residuals[0].hypot(residuals[1]) > 1e3 * CALIBRATION_TOL {
        return Err(Error::Calibration { iterations: n + r.iterations, residuals });
    }
    Ok(Calibration {
        lb,
        ub,
        iterations: n + r.iterations,
        residuals,
        method: CalibrationMethod::NestedBisection,
    })
}
