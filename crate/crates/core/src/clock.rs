//! Unit-mean stochastic clocks.
//!
//! A clock is the per-period business-time increment `Z > 0` with `E[Z] = 1`
//! and `Var[Z] = theta`. Each kind exposes its moment generating function
//! `psi(s) = E[exp(s Z)]`, the inverse `psi^-1`, and a sampler.

use rand::Rng;
use rand_distr::{Distribution, Gamma, InverseGaussian};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockKind {
    Degenerate,
    Gamma,
    InverseGaussian,
}

impl ClockKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClockKind::Degenerate => "degenerate",
            ClockKind::Gamma => "gamma",
            ClockKind::InverseGaussian => "inverse_gaussian",
        }
    }
}

impl std::str::FromStr for ClockKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "degenerate" | "kt" | "none" => Ok(ClockKind::Degenerate),
            "gamma" | "vg" => Ok(ClockKind::Gamma),
            "inverse_gaussian" | "inverse-gaussian" | "ig" => Ok(ClockKind::InverseGaussian),
            other => Err(Error::InvalidClock(format!(
                "unknown clock kind '{other}' (expected degenerate, gamma or inverse_gaussian)"
            ))),
        }
    }
}

/// Flat `{kind, theta}` record used for (de)serialization.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct ClockSpec {
    kind: ClockKind,
    #[serde(default)]
    theta: f64,
}

/// A mean-one clock. `theta == 0` exactly when the kind is degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClockSpec", into = "ClockSpec")]
pub struct ClockModel {
    kind: ClockKind,
    theta: f64,
}

impl TryFrom<ClockSpec> for ClockModel {
    type Error = Error;

    fn try_from(spec: ClockSpec) -> Result<Self> {
        ClockModel::new(spec.kind, spec.theta)
    }
}

impl From<ClockModel> for ClockSpec {
    fn from(c: ClockModel) -> Self {
        ClockSpec { kind: c.kind, theta: c.theta }
    }
}

impl ClockModel {
    pub fn new(kind: ClockKind, theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta < 0.0 {
            return Err(Error::InvalidClock(format!(
                "theta must be finite and nonnegative, got {theta}"
            )));
        }
        match (kind, theta == 0.0) {
            (ClockKind::Degenerate, false) => Err(Error::InvalidClock(format!(
                "degenerate clock has theta = 0, got {theta}"
            ))),
            (ClockKind::Gamma | ClockKind::InverseGaussian, true) => Err(Error::InvalidClock(
                format!("{} clock needs theta > 0; use the degenerate clock for theta = 0", kind.as_str()),
            )),
            _ => Ok(ClockModel { kind, theta }),
        }
    }

    pub fn degenerate() -> Self {
        ClockModel { kind: ClockKind::Degenerate, theta: 0.0 }
    }

    pub fn gamma(theta: f64) -> Result<Self> {
        Self::new(ClockKind::Gamma, theta)
    }

    pub fn inverse_gaussian(theta: f64) -> Result<Self> {
        Self::new(ClockKind::InverseGaussian, theta)
    }

    pub fn kind(&self) -> ClockKind {
        self.kind
    }

    /// Variance of the unit-time increment.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Tsallis exponent of the gamma clock, `gamma = -theta`.
    pub fn gamma_exponent(&self) -> f64 {
        -self.theta
    }

    /// Shape of the inverse-Gaussian clock, `lambda = 1 / theta`
    /// (`+inf` for the degenerate clock).
    pub fn lambda(&self) -> f64 {
        if self.theta == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.theta
        }
    }

    /// Short label for tables and curve files.
    pub fn label(&self) -> String {
        match self.kind {
            ClockKind::Degenerate => "KT".to_string(),
            ClockKind::Gamma => format!("VG(theta={})", self.theta),
            ClockKind::InverseGaussian => format!("IG(theta={})", self.theta),
        }
    }

    /// Supremum of the mgf domain. Gamma excludes it, inverse Gaussian
    /// includes it.
    pub fn mgf_domain_sup(&self) -> f64 {
        match self.kind {
            ClockKind::Degenerate => f64::INFINITY,
            ClockKind::Gamma => 1.0 / self.theta,
            ClockKind::InverseGaussian => 0.5 / self.theta,
        }
    }

    fn check_mgf_domain(&self, s: f64) -> Result<()> {
        let bound = self.mgf_domain_sup();
        let ok = match self.kind {
            ClockKind::Degenerate => s.is_finite(),
            ClockKind::Gamma => s < bound,
            ClockKind::InverseGaussian => s <= bound,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::MgfDomain {
                s,
                bound,
                inclusive: self.kind == ClockKind::InverseGaussian,
            })
        }
    }

    /// `psi(s) = E[exp(s Z)]`.
    pub fn mgf(&self, s: f64) -> Result<f64> {
        self.check_mgf_domain(s)?;
        Ok(match self.kind {
            ClockKind::Degenerate => s.exp(),
            // (1 + gamma s)^(1/gamma) with gamma = -theta
            ClockKind::Gamma => (-(-self.theta * s).ln_1p() / self.theta).exp(),
            ClockKind::InverseGaussian => {
                // lambda (1 - sqrt(1 - x)) with x = 2 s / lambda, rewritten
                // as lambda x / (1 + sqrt(1 - x)) to keep small s accurate.
                let lambda = self.lambda();
                let x = 2.0 * s / lambda;
                (lambda * x / (1.0 + (1.0 - x).max(0.0).sqrt())).exp()
            }
        })
    }

    fn check_inv_domain(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvMgfDomain { r });
        }
        let log_r = r.ln();
        if self.kind == ClockKind::InverseGaussian && log_r > self.lambda() {
            return Err(Error::InvMgfBranch { r, max: self.lambda().exp() });
        }
        Ok(log_r)
    }

    /// `psi^-1(R)`, the clock's generalized logarithm.
    pub fn inv_mgf(&self, r: f64) -> Result<f64> {
        let log_r = self.check_inv_domain(r)?;
        Ok(match self.kind {
            ClockKind::Degenerate => log_r,
            ClockKind::Gamma => tsallis_log(log_r, -self.theta),
            ClockKind::InverseGaussian => log_r - log_r * log_r * (0.5 * self.theta),
        })
    }

    /// Derivative of `psi^-1` at `R`.
    pub fn inv_mgf_derivative(&self, r: f64) -> Result<f64> {
        let log_r = self.check_inv_domain(r)?;
        Ok(match self.kind {
            ClockKind::Degenerate => 1.0 / r,
            ClockKind::Gamma => ((-self.theta - 1.0) * log_r).exp(),
            ClockKind::InverseGaussian => (1.0 - log_r * self.theta) / r,
        })
    }

    /// Prepared sampler for repeated draws of the increment.
    pub fn sampler(&self) -> ClockSampler {
        match self.kind {
            ClockKind::Degenerate => ClockSampler::Unit,
            ClockKind::Gamma => ClockSampler::Gamma(
                Gamma::new(1.0 / self.theta, self.theta).expect("theta > 0 checked at construction"),
            ),
            ClockKind::InverseGaussian => ClockSampler::InverseGaussian(
                InverseGaussian::new(1.0, 1.0 / self.theta)
                    .expect("theta > 0 checked at construction"),
            ),
        }
    }

    /// One draw of the unit-time increment `Z`.
    pub fn sample_increment<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sampler().sample(rng)
    }
}

/// `(exp(k * log_r) - 1) / k`, i.e. `(R^k - 1) / k`, continuous at `k = 0`
/// where it equals `log R`.
pub(crate) fn tsallis_log(log_r: f64, k: f64) -> f64 {
    if k == 0.0 {
        log_r
    } else {
        (k * log_r).exp_m1() / k
    }
}

/// Clock increment sampler. Gamma draws use shape `1/theta`, scale `theta`;
/// inverse-Gaussian draws use mean 1 and shape `1/theta` via the
/// transformation-with-acceptance method.
#[derive(Debug, Clone, Copy)]
pub enum ClockSampler {
    Unit,
    Gamma(Gamma<f64>),
    InverseGaussian(InverseGaussian<f64>),
}

impl Distribution<f64> for ClockSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ClockSampler::Unit => 1.0,
            ClockSampler::Gamma(d) => d.sample(rng),
            ClockSampler::InverseGaussian(d) => d.sample(rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_clocks(theta: f64) -> [ClockModel; 3] {
        [
            ClockModel::degenerate(),
            ClockModel::gamma(theta).unwrap(),
            ClockModel::inverse_gaussian(theta).unwrap(),
        ]
    }

    #[test]
    fn construction_enforces_degenerate_iff_zero_theta() {
        assert!(ClockModel::new(ClockKind::Degenerate, 0.1).is_err());
        assert!(ClockModel::new(ClockKind::Gamma, 0.0).is_err());
        assert!(ClockModel::new(ClockKind::InverseGaussian, 0.0).is_err());
        assert!(ClockModel::new(ClockKind::Gamma, -0.5).is_err());
        assert!(ClockModel::new(ClockKind::Gamma, f64::NAN).is_err());
        let ig = ClockModel::inverse_gaussian(0.5).unwrap();
        assert_eq!(ig.lambda(), 2.0);
        assert_eq!(ClockModel::gamma(0.5).unwrap().gamma_exponent(), -0.5);
    }

    #[test]
    fn mgf_examples() {
        let d = ClockModel::degenerate();
        assert!((d.mgf(0.3).unwrap() - 0.3f64.exp()).abs() < 1e-15);
        let g = ClockModel::gamma(0.5).unwrap();
        assert_eq!(g.mgf(0.0).unwrap(), 1.0);
        // 0.95^-2 at 30 digits
        assert!((g.mgf(0.1).unwrap() - 1.108_033_240_997_229_9).abs() < 1e-14);
        let ig = ClockModel::inverse_gaussian(0.5).unwrap();
        // exp(2 - sqrt 2) at 30 digits
        assert!((ig.mgf(0.5).unwrap() - 1.796_403_189_323_233_7).abs() < 1e-14);
        assert_eq!(ig.mgf(0.0).unwrap(), 1.0);
    }

    #[test]
    fn mgf_domain_errors_name_the_bound() {
        let g = ClockModel::gamma(0.5).unwrap();
        assert_eq!(
            g.mgf(2.0),
            Err(Error::MgfDomain { s: 2.0, bound: 2.0, inclusive: false })
        );
        let ig = ClockModel::inverse_gaussian(0.5).unwrap();
        assert!(ig.mgf(1.0).is_ok());
        assert!(matches!(ig.mgf(1.0 + 1e-12), Err(Error::MgfDomain { .. })));
        assert!(ClockModel::degenerate().mgf(f64::NAN).is_err());
    }

    #[test]
    fn domain_sup_values() {
        assert_eq!(ClockModel::degenerate().mgf_domain_sup(), f64::INFINITY);
        assert_eq!(ClockModel::gamma(0.5).unwrap().mgf_domain_sup(), 2.0);
        assert_eq!(ClockModel::inverse_gaussian(0.5).unwrap().mgf_domain_sup(), 1.0);
    }

    #[test]
    fn inv_mgf_examples() {
        for c in all_clocks(0.5) {
            assert_eq!(c.inv_mgf(1.0).unwrap(), 0.0);
        }
        let g = ClockModel::gamma(0.5).unwrap();
        assert!((g.inv_mgf(1.1).unwrap() - 0.093_074_821_508_815_37).abs() < 1e-15);
        let ig = ClockModel::inverse_gaussian(0.5).unwrap();
        assert!((ig.inv_mgf(1.1).unwrap() - 0.093_039_172_210_741_68).abs() < 1e-15);
    }

    #[test]
    fn inv_mgf_errors() {
        let g = ClockModel::gamma(0.5).unwrap();
        assert_eq!(g.inv_mgf(0.0), Err(Error::InvMgfDomain { r: 0.0 }));
        assert!(g.inv_mgf(-1.0).is_err());
        let ig = ClockModel::inverse_gaussian(0.5).unwrap();
        assert!(ig.inv_mgf(2f64.exp() * 0.999_999).is_ok());
        assert!(matches!(ig.inv_mgf(2f64.exp() * 1.000_001), Err(Error::InvMgfBranch { .. })));
    }

    #[test]
    fn round_trip_on_grid() {
        for theta in [0.1, 0.5, 1.0, 2.0] {
            for c in all_clocks(theta) {
                let hi = c.mgf_domain_sup().min(5.0);
                for i in 0..100 {
                    let s = -5.0 + (hi - 1e-3 + 5.0) * i as f64 / 99.0;
                    let r = c.mgf(s).unwrap();
                    let back = c.inv_mgf(r).unwrap();
                    assert!((back - s).abs() < 1e-10, "{c:?} s={s} back={back}");
                    let rr = c.mgf(back).unwrap();
                    assert!(((rr - r) / r).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn jensen_ordering() {
        for theta in [0.05, 0.5, 1.5] {
            for c in all_clocks(theta) {
                let hi = c.mgf_domain_sup().min(3.0);
                for i in 0..60 {
                    let s = -3.0 + (hi - 1e-3 + 3.0) * i as f64 / 59.0;
                    let m = c.mgf(s).unwrap();
                    if c.kind() == ClockKind::Degenerate || s == 0.0 {
                        assert!((m - s.exp()).abs() <= 1e-15 * m);
                    } else {
                        assert!(m > s.exp(), "{c:?} s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn unit_mean_by_finite_difference() {
        let h = 1e-6;
        for theta in [0.1, 0.5, 1.0] {
            for c in all_clocks(theta) {
                let d = (c.mgf(h).unwrap() - c.mgf(-h).unwrap()) / (2.0 * h);
                assert!((d - 1.0).abs() < 1e-6, "{c:?} {d}");
            }
        }
    }

    #[test]
    fn small_gamma_approaches_log() {
        for theta in [1e-4, 1e-6] {
            let c = ClockModel::gamma(theta).unwrap();
            let mut sup = 0.0f64;
            for i in 0..=300 {
                let r = 0.5 + 1.5 * i as f64 / 300.0;
                sup = sup.max((c.inv_mgf(r).unwrap() - r.ln()).abs());
            }
            assert!(sup <= 5.0 * theta, "theta={theta} sup={sup}");
        }
    }

    #[test]
    fn inverse_derivative_matches_difference_quotient() {
        for c in all_clocks(0.5) {
            for r in [0.6, 0.9, 1.0, 1.3, 2.5] {
                let h = 1e-6;
                let fd = (c.inv_mgf(r + h).unwrap() - c.inv_mgf(r - h).unwrap()) / (2.0 * h);
                let d = c.inv_mgf_derivative(r).unwrap();
                assert!((fd - d).abs() < 1e-8 * d.abs().max(1.0));
            }
            assert!((c.inv_mgf_derivative(1.0).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    fn moments(c: &ClockModel, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = c.sampler();
        let (mut m, mut m2) = (0.0, 0.0);
        for k in 1..=n {
            let z = s.sample(&mut rng);
            assert!(z > 0.0);
            let d = z - m;
            m += d / k as f64;
            m2 += d * (z - m);
        }
        (m, m2 / (n - 1) as f64)
    }

    #[test]
    fn degenerate_sampler_returns_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(ClockModel::degenerate().sample_increment(&mut rng), 1.0);
        }
    }

    #[test]
    fn gamma_and_ig_sample_moments() {
        for c in [ClockModel::gamma(0.5).unwrap(), ClockModel::inverse_gaussian(0.5).unwrap()] {
            let (m, v) = moments(&c, 1_000_000, 2024);
            assert!((m - 1.0).abs() < 0.003, "{c:?} mean {m}");
            assert!((v - 0.5).abs() < 0.01, "{c:?} var {v}");
        }
    }

    #[test]
    fn serde_flat_record() {
        let c = ClockModel::gamma(0.5).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(s, r#"{"kind":"gamma","theta":0.5}"#);
        let back: ClockModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<ClockModel>(r#"{"kind":"gamma","theta":0}"#).is_err());
        let d: ClockModel = serde_json::from_str(r#"{"kind":"degenerate"}"#).unwrap();
        assert_eq!(d, ClockModel::degenerate());
    }

    proptest! {
        #[test]
        fn inv_mgf_is_increasing(theta in 0.01f64..3.0, a in 0.05f64..3.0, b in 0.05f64..3.0) {
            prop_assume!((a - b).abs() > 1e-9);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            for c in all_clocks(theta) {
                if let (Ok(x), Ok(y)) = (c.inv_mgf(lo), c.inv_mgf(hi)) {
                    prop_assert!(x < y);
                }
            }
        }
    }
}
