//! Long-run growth functionals.
//!
//! `growth_cc(clock, bet, f) = E[psi^-1(1 + f u)]` is the growth rate of a
//! fixed-fraction strategy when returns run on `clock`; with the degenerate
//! clock `psi^-1 = log` and it reduces to the Kelly-Thorp functional
//! `growth_kt(bet, f) = E[log(1 + f u)]`.
//!
//! Bernoulli and discrete bets are finite sums. Uniform bets use the
//! antiderivative of `(1 + f u)^gamma` for the degenerate and gamma clocks,
//! and adaptive quadrature for the inverse-Gaussian clock.

use serde::{Deserialize, Serialize};

use crate::bet::BetModel;
use crate::clock::{tsallis_log, ClockKind, ClockModel};
use crate::error::{Error, Result};
use crate::quad;

const QUAD_ABS_TOL: f64 = 1e-14;
const QUAD_REL_TOL: f64 = 1e-13;

/// Kelly-Thorp growth `E[log R]`.
pub fn growth_kt(bet: &BetModel, f: f64) -> Result<f64> {
    growth_cc(&ClockModel::degenerate(), bet, f)
}

/// Growth under a stochastic clock, `E[psi^-1(R)]`.
pub fn growth_cc(clock: &ClockModel, bet: &BetModel, f: f64) -> Result<f64> {
    bet.check_fraction(f)?;
    if f == 0.0 {
        return Ok(0.0);
    }
    match bet {
        BetModel::Uniform { lb, ub } => match clock.kind() {
            ClockKind::Degenerate | ClockKind::Gamma => {
                Ok(uniform_power_growth(clock.gamma_exponent(), *lb, *ub, f))
            }
            ClockKind::InverseGaussian => uniform_growth_quadrature(clock, *lb, *ub, f),
        },
        _ => atom_sum(bet, f, |r| clock.inv_mgf(r)),
    }
}

/// Same functional, with every uniform case integrated numerically. Used to
/// cross-check the closed forms.
pub fn growth_cc_quadrature(clock: &ClockModel, bet: &BetModel, f: f64) -> Result<f64> {
    bet.check_fraction(f)?;
    match bet {
        BetModel::Uniform { lb, ub } if f > 0.0 => uniform_growth_quadrature(clock, *lb, *ub, f),
        _ => growth_cc(clock, bet, f),
    }
}

/// `dG/df`. At `f = 0` this is the one-sided limit `E[u]`, since
/// `(psi^-1)'(1) = 1` for every unit-mean clock.
pub fn growth_cc_derivative(clock: &ClockModel, bet: &BetModel, f: f64) -> Result<f64> {
    bet.check_fraction(f)?;
    if f == 0.0 {
        return Ok(bet.mean_return());
    }
    match bet {
        BetModel::Uniform { lb, ub } => {
            let small = f * lb.abs().max(ub.abs()) < 1e-3;
            match clock.kind() {
                ClockKind::Degenerate | ClockKind::Gamma if !small => {
                    Ok(uniform_power_derivative(clock.gamma_exponent(), *lb, *ub, f))
                }
                _ => {
                    check_uniform_branch(clock, *ub, f)?;
                    let w = ub - lb;
                    let r = quad::integrate(
                        |u| u * clock.inv_mgf_derivative(1.0 + f * u).unwrap_or(f64::NAN),
                        *lb,
                        *ub,
                        QUAD_ABS_TOL,
                        QUAD_REL_TOL,
                    )?;
                    Ok(r.value / w)
                }
            }
        }
        _ => {
            let atoms = bet.atoms().unwrap();
            let mut acc = 0.0;
            for (r, p) in atoms {
                acc += p * r * clock.inv_mgf_derivative(1.0 + f * r)?;
            }
            Ok(acc)
        }
    }
}

/// First-order condition residual for the uniform bet under a power clock
/// (`gamma = 0` gives the Kelly-Thorp condition):
///
/// `[(1+UB f)^(g+1) - (1+LB f)^(g+1)]/(g+1) - [(1+UB f)^g - (1+LB f)^g]/g`,
///
/// divided by `(UB - LB) f`. Equals `f * G'(f)`.
pub fn uniform_foc_residual(gamma_exp: f64, lb: f64, ub: f64, f: f64) -> f64 {
    let (ll, lu) = ((f * lb).ln_1p(), (f * ub).ln_1p());
    let lhs = tsallis_log(lu, gamma_exp + 1.0) - tsallis_log(ll, gamma_exp + 1.0);
    let rhs = tsallis_log(lu, gamma_exp) - tsallis_log(ll, gamma_exp);
    (lhs - rhs) / ((ub - lb) * f)
}

/// Mean and standard deviation of the per-period drift `s = psi^-1(R)`.
pub fn drift_moments(clock: &ClockModel, bet: &BetModel, f: f64) -> Result<(f64, f64)> {
    let mean = growth_cc(clock, bet, f)?;
    let second = match bet {
        BetModel::Uniform { lb, ub } if f > 0.0 => {
            check_uniform_branch(clock, *ub, f)?;
            let r = quad::integrate(
                |u| clock.inv_mgf(1.0 + f * u).map(|s| s * s).unwrap_or(f64::NAN),
                *lb,
                *ub,
                QUAD_ABS_TOL,
                QUAD_REL_TOL,
            )?;
            r.value / (ub - lb)
        }
        _ => atom_sum(bet, f, |r| clock.inv_mgf(r).map(|s| s * s))?,
    };
    Ok((mean, (second - mean * mean).max(0.0).sqrt()))
}

fn atom_sum<F>(bet: &BetModel, f: f64, g: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let atoms = bet.atoms().unwrap_or_else(|| vec![(0.0, 1.0)]);
    let mut acc = 0.0;
    for (r, p) in atoms {
        acc += p * g(1.0 + f * r)?;
    }
    Ok(acc)
}

fn check_uniform_branch(clock: &ClockModel, ub: f64, f: f64) -> Result<()> {
    clock.inv_mgf(1.0 + f * ub).map(|_| ())
}

fn uniform_growth_quadrature(clock: &ClockModel, lb: f64, ub: f64, f: f64) -> Result<f64> {
    check_uniform_branch(clock, ub, f)?;
    let r = quad::integrate(
        |u| clock.inv_mgf(1.0 + f * u).unwrap_or(f64::NAN),
        lb,
        ub,
        QUAD_ABS_TOL,
        QUAD_REL_TOL,
    )?;
    Ok(r.value / (ub - lb))
}

/// `(1/(UB-LB)) * int (a^g - 1)/g du` with `a = 1 + f u`, `g = gamma_exp`.
fn uniform_power_growth(g: f64, lb: f64, ub: f64, f: f64) -> f64 {
    let (al, au) = (1.0 + f * lb, 1.0 + f * ub);
    let (ll, lu) = ((f * lb).ln_1p(), (f * ub).ln_1p());
    let w = ub - lb;
    if g.abs() < 0.5 {
        // Antiderivative a (phi_g(a) - 1) / (g + 1), phi_g(a) = (a^g - 1)/g,
        // free of the 1/g cancellation as g -> 0.
        let h = |a: f64, l: f64| a * (tsallis_log(l, g) - 1.0) / (g + 1.0);
        (h(au, lu) - h(al, ll)) / (f * w)
    } else {
        // Stable through g = -1, where the first form is 0/0.
        ((tsallis_log(lu, g + 1.0) - tsallis_log(ll, g + 1.0)) / (f * w) - 1.0) / g
    }
}

fn uniform_power_derivative(g: f64, lb: f64, ub: f64, f: f64) -> f64 {
    uniform_foc_residual(g, lb, ub, f) / f
}

/// A sampled growth curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub f: f64,
    #[serde(rename = "G")]
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCurve {
    pub model_label: String,
    pub clock: ClockModel,
    pub bet: BetModel,
    pub points: Vec<CurvePoint>,
}

pub fn growth_curve(clock: &ClockModel, bet: &BetModel, f_grid: &[f64]) -> Result<GrowthCurve> {
    let mut points = Vec::with_capacity(f_grid.len());
    for (i, &f) in f_grid.iter().enumerate() {
        if i > 0 && !(f > f_grid[i - 1]) {
            return Err(Error::InvalidParameter(format!(
                "f grid must be strictly increasing (f[{}] = {} after {})",
                i,
                f,
                f_grid[i - 1]
            ))
            .at(f));
        }
        let g = growth_cc(clock, bet, f).map_err(|e| e.at(f))?;
        points.push(CurvePoint { f, g });
    }
    Ok(GrowthCurve { model_label: clock.label(), clock: *clock, bet: bet.clone(), points })
}

/// Evenly spaced grid `f_min, f_min + step, ...` up to and including `f_max`
/// (within half a step of rounding).
pub fn linear_grid(f_min: f64, f_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(f_max >= f_min) || !f_min.is_finite() || !f_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "grid needs f_min <= f_max and step > 0, got [{f_min}, {f_max}] step {step}"
        )));
    }
    let n = ((f_max - f_min) / step + 1e-9).floor() as usize;
    if n > 10_000_000 {
        return Err(Error::InvalidParameter(format!("grid has {n} points")));
    }
    Ok((0..=n).map(|i| f_min + step * i as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bet::Outcome;
    use proptest::prelude::*;

    fn bern() -> BetModel {
        BetModel::bernoulli(0.53).unwrap()
    }

    fn vg(theta: f64) -> ClockModel {
        ClockModel::gamma(theta).unwrap()
    }

    fn ig(theta: f64) -> ClockModel {
        ClockModel::inverse_gaussian(theta).unwrap()
    }

    #[test]
    fn kelly_thorp_bernoulli_values() {
        assert_eq!(growth_kt(&bern(), 0.0).unwrap(), 0.0);
        // 0.53 ln 1.06 + 0.47 ln 0.94, 30-digit reference
        assert!((growth_kt(&bern(), 0.06).unwrap() - 0.001_801_081_558_206_049).abs() < 1e-16);
        assert!(growth_kt(&bern(), 0.12).unwrap().abs() < 5e-5);
    }

    #[test]
    fn vg_bernoulli_values() {
        assert!(growth_cc(&vg(0.5), &bern(), 0.08).unwrap().abs() < 5e-5);
        assert!(growth_cc(&vg(1.0), &bern(), 0.06).unwrap().abs() < 1e-16);
        let g = growth_cc(&vg(0.5), &bern(), 0.06).unwrap();
        assert!((g - 0.000_901_014_418_034_165_6).abs() < 1e-16, "{g}");
        // closed form [p(1+f)^g + q(1-f)^g - 1]/g
        let gam = -0.5;
        let direct = (0.53 * 1.06f64.powf(gam) + 0.47 * 0.94f64.powf(gam) - 1.0) / gam;
        assert!((g - direct).abs() < 1e-15);
    }

    #[test]
    fn ig_bernoulli_value() {
        let g = growth_cc(&ig(0.5), &bern(), 0.06).unwrap();
        // log-growth minus (theta/2)[p log^2(1.06) + q log^2(0.94)], 30-digit reference
        assert!((g - 0.000_901_352_402_786_338_8).abs() < 1e-16, "{g}");
    }

    #[test]
    fn degenerate_reduction_is_exact() {
        let bets = [bern(), BetModel::uniform(-0.7, 1.0).unwrap()];
        for bet in &bets {
            for i in 0..50 {
                let f = 0.02 * i as f64 * bet.max_fraction().min(1.0);
                let a = growth_cc(&ClockModel::degenerate(), bet, f).unwrap();
                let b = growth_kt(bet, f).unwrap();
                assert!((a - b).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn uniform_kt_closed_form() {
        let (lb, ub, f) = (-0.5, 1.0, 0.8);
        let anti = |u: f64| ((1.0 + f * u) * (1.0 + f * u).ln() - (1.0 + f * u)) / f;
        let want = (anti(ub) - anti(lb)) / (ub - lb);
        let got = growth_kt(&BetModel::uniform(lb, ub).unwrap(), f).unwrap();
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn uniform_closed_form_matches_quadrature() {
        for theta in [0.0, 1e-7, 1e-3, 0.2, 0.382, 0.636, 0.99, 1.0, 1.3] {
            let clock = if theta == 0.0 { ClockModel::degenerate() } else { vg(theta) };
            for (lb, ub) in [(-0.7, 1.0), (-0.2, 0.3), (0.1, 0.4)] {
                let bet = BetModel::uniform(lb, ub).unwrap();
                for f in [1e-3, 0.05, 0.4, 0.635, 1.2] {
                    if f >= bet.max_fraction() {
                        continue;
                    }
                    let a = growth_cc(&clock, &bet, f).unwrap();
                    let b = growth_cc_quadrature(&clock, &bet, f).unwrap();
                    assert!((a - b).abs() < 1e-9, "theta {theta} [{lb},{ub}] f {f}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn uniform_closed_form_literal_expression() {
        // ((1+f UB)^(g+1) - (1+f LB)^(g+1)) / (f (g+1) (UB-LB)), minus 1, over g
        let (lb, ub, f, g): (f64, f64, f64, f64) = (-0.7, 1.0, 0.4, -0.636);
        let lit = (((1.0 + f * ub).powf(g + 1.0) - (1.0 + f * lb).powf(g + 1.0))
            / (f * (g + 1.0) * (ub - lb))
            - 1.0)
            / g;
        let got = growth_cc(&vg(0.636), &BetModel::uniform(lb, ub).unwrap(), f).unwrap();
        assert!((got - lit).abs() < 1e-13);
    }

    #[test]
    fn kelly_point_derivatives() {
        let d = growth_cc_derivative(&ClockModel::degenerate(), &bern(), 0.06).unwrap();
        assert!(d.abs() < 1e-15, "{d}");
        assert!(growth_cc_derivative(&vg(0.5), &bern(), 0.06).unwrap() < 0.0);
        assert_eq!(growth_cc_derivative(&vg(0.5), &bern(), 0.0).unwrap(), 0.53 - 0.47);
    }

    fn fd(clock: &ClockModel, bet: &BetModel, f: f64) -> f64 {
        let h = 1e-6;
        (growth_cc(clock, bet, f + h).unwrap() - growth_cc(clock, bet, f - h).unwrap()) / (2.0 * h)
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let d = growth_cc_derivative(&vg(0.5), &bern(), 0.03).unwrap();
        let oracle = fd(&vg(0.5), &bern(), 0.03);
        assert!(((d - oracle) / oracle).abs() < 1e-6, "{d} vs {oracle}");

        let bets = [
            bern(),
            BetModel::uniform(-0.7, 1.0).unwrap(),
            BetModel::discrete(vec![
                Outcome { r: -0.5, prob: 0.3 },
                Outcome { r: 0.2, prob: 0.4 },
                Outcome { r: 0.9, prob: 0.3 },
            ])
            .unwrap(),
        ];
        let clocks = [ClockModel::degenerate(), vg(0.3), vg(1.0), ig(0.5)];
        for bet in &bets {
            for clock in &clocks {
                for t in [0.05, 0.2, 0.45, 0.7] {
                    let f = t * bet.max_fraction().min(2.0);
                    let d = growth_cc_derivative(clock, bet, f).unwrap();
                    let oracle = fd(clock, bet, f);
                    assert!(
                        (d - oracle).abs() <= 1e-6 * oracle.abs().max(1e-3),
                        "{clock:?} {bet:?} f={f}: {d} vs {oracle}"
                    );
                }
            }
        }
    }

    #[test]
    fn foc_residual_shares_sign_with_derivative() {
        let (lb, ub) = (-0.7, 1.0);
        let bet = BetModel::uniform(lb, ub).unwrap();
        for theta in [0.382, 0.636] {
            for i in 1..40 {
                let f = 0.035 * i as f64;
                let d = growth_cc_derivative(&vg(theta), &bet, f).unwrap();
                let r = uniform_foc_residual(-theta, lb, ub, f);
                assert!((r - f * d).abs() < 1e-13);
                assert_eq!(r > 0.0, d > 0.0);
            }
        }
    }

    #[test]
    fn small_gamma_limit() {
        let c = vg(1e-6);
        let mut sup = 0.0f64;
        for i in 0..=110 {
            let f = i as f64 * 1e-3;
            let d = (growth_cc(&c, &bern(), f).unwrap() - growth_kt(&bern(), f).unwrap()).abs();
            sup = sup.max(d);
        }
        assert!(sup <= 1e-5, "{sup}");
    }

    #[test]
    fn concavity_bernoulli() {
        for clock in [vg(0.5), vg(1.0), ig(0.5), ig(2.0)] {
            let g: Vec<f64> =
                (0..=200).map(|i| growth_cc(&clock, &bern(), i as f64 * 0.003).unwrap()).collect();
            for w in g.windows(3) {
                assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-15, "{clock:?}");
            }
        }
    }

    #[test]
    fn ig_branch_error_for_large_returns() {
        // lambda = 0.1: R must stay below e^0.1
        let c = ig(10.0);
        assert!(matches!(growth_cc(&c, &bern(), 0.2), Err(Error::InvMgfBranch { .. })));
        let u = BetModel::uniform(-0.1, 1.0).unwrap();
        assert!(matches!(growth_cc(&c, &u, 0.2), Err(Error::InvMgfBranch { .. })));
    }

    #[test]
    fn curve_examples() {
        let c = growth_curve(&ClockModel::degenerate(), &bern(), &[0.0]).unwrap();
        assert_eq!(c.points, vec![CurvePoint { f: 0.0, g: 0.0 }]);
        assert_eq!(c.model_label, "KT");

        let grid: Vec<f64> = (0..=12).map(|i| i as f64 * 0.01).collect();
        let kt = growth_curve(&ClockModel::degenerate(), &bern(), &grid).unwrap();
        let v = growth_curve(&vg(0.5), &bern(), &grid).unwrap();
        for (a, b) in kt.points.iter().zip(&v.points) {
            assert!(b.g <= a.g);
        }
        // sign change between the neighbours of 0.08
        let g = growth_curve(&vg(0.5), &bern(), &[0.079, 0.08, 0.081]).unwrap();
        assert!(g.points[0].g > 0.0 && g.points[2].g < 0.0);
    }

    #[test]
    fn curve_errors_name_the_fraction() {
        let e = growth_curve(&vg(0.5), &bern(), &[0.5, 1.0]).unwrap_err();
        assert!(matches!(e, Error::AtFraction { f, .. } if f == 1.0));
        let e = growth_curve(&vg(0.5), &bern(), &[0.5, 0.4]).unwrap_err();
        assert!(matches!(e, Error::AtFraction { f, .. } if f == 0.4));
    }

    #[test]
    fn grid_construction() {
        let g = linear_grid(0.0, 0.14, 0.002).unwrap();
        assert_eq!(g.len(), 71);
        assert!((g[70] - 0.14).abs() < 1e-12);
        assert!(linear_grid(0.0, 1.0, 0.0).is_err());
        assert!(linear_grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn drift_moments_bernoulli() {
        let c = vg(0.5);
        let (m, s) = drift_moments(&c, &bern(), 0.06).unwrap();
        let up = c.inv_mgf(1.06).unwrap();
        let dn = c.inv_mgf(0.94).unwrap();
        assert!((m - (0.53 * up + 0.47 * dn)).abs() < 1e-16);
        let var = 0.53 * 0.47 * (up - dn) * (up - dn);
        assert!((s * s - var).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn clock_growth_below_kelly(theta in 0.01f64..2.0, p in 0.05f64..0.95, t in 0.0f64..0.99, lb in -1.5f64..0.5, w in 0.05f64..2.0) {
            let clocks = [vg(theta), ig(theta)];
            let bets = [BetModel::bernoulli(p).unwrap(), BetModel::uniform(lb, lb + w).unwrap()];
            for bet in &bets {
                let f = t * bet.max_fraction().min(3.0);
                let kt = growth_kt(bet, f).unwrap();
                for c in &clocks {
                    if let Ok(g) = growth_cc(c, bet, f) {
                        prop_assert!(g <= kt + 1e-12);
                    }
                }
            }
        }
    }
}
