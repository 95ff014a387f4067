//! Distortion-based acceptability of long-run growth.
//!
//! A distortion `g_x` on `[0, inf]` fixes 0 and 1 and dominates the identity
//! above 1. Applying `g_x^-1` to the clock's mgf gives the pseudo-mgf of the
//! least favorable clock law in the stress set indexed by `x`; the
//! acceptability index is the largest stress at which the distorted
//! geometric mean growth still clears a hurdle.

use serde::{Deserialize, Serialize, Serializer};

use crate::bet::BetModel;
use crate::clock::ClockModel;
use crate::error::{Error, Result};
use crate::growth::growth_cc;

/// Upper end of the stress range searched by [`acceptability_index`].
pub const MAX_STRESS: f64 = 1e3;
const INDEX_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionFamily {
    /// `g_x(y) = y^(1 + x)`.
    #[default]
    Power,
}

impl DistortionFamily {
    pub fn forward(&self, x: f64, y: f64) -> f64 {
        match self {
            DistortionFamily::Power => y.powf(1.0 + x),
        }
    }

    pub fn inverse(&self, x: f64, y: f64) -> f64 {
        match self {
            DistortionFamily::Power => y.powf(1.0 / (1.0 + x)),
        }
    }
}

/// Which way the distortion acts on the geometric mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistortionDirection {
    /// `g_x^-1`: the infimum over the stress set.
    #[default]
    Pessimistic,
    /// The raw forward map `g_x`.
    Forward,
}

fn check_stress(x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("stress level x must be finite and >= 0, got {x}")))
    }
}

/// `g_x^-1(psi(s))`.
pub fn distorted_mgf(clock: &ClockModel, fam: DistortionFamily, x: f64, s: f64) -> Result<f64> {
    check_stress(x)?;
    Ok(fam.inverse(x, clock.mgf(s)?))
}

/// `psi^-1(g_x^-1(psi(G_CC(f))))`: the undistorted geometric mean
/// `psi(G_CC)` passed through the pseudo-mgf and mapped back to a rate.
pub fn distorted_growth(clock: &ClockModel, fam: DistortionFamily, x: f64, bet: &BetModel, f: f64) -> Result<f64> {
    distorted_growth_with(clock, fam, DistortionDirection::Pessimistic, x, bet, f)
}

pub fn distorted_growth_with(
    clock: &ClockModel,
    fam: DistortionFamily,
    direction: DistortionDirection,
    x: f64,
    bet: &BetModel,
    f: f64,
) -> Result<f64> {
    check_stress(x)?;
    let g = growth_cc(clock, bet, f)?;
    let m = clock.mgf(g)?;
    let d = match direction {
        DistortionDirection::Pessimistic => fam.inverse(x, m),
        DistortionDirection::Forward => fam.forward(x, m),
    };
    clock.inv_mgf(d).map_err(|e| {
        Error::InvalidParameter(format!("distorted geometric mean {d} (from psi(G) = {m}): {e}"))
    })
}

/// `sup{x >= 0 : g_x^-1(psi(G_CC(f))) >= hurdle}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AcceptabilityIndex {
    Finite(f64),
    /// Acceptable at every stress level.
    Infinite,
}

impl AcceptabilityIndex {
    pub fn value(&self) -> f64 {
        match self {
            AcceptabilityIndex::Finite(x) => *x,
            AcceptabilityIndex::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for AcceptabilityIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AcceptabilityIndex::Finite(x) => s.serialize_f64(*x),
            AcceptabilityIndex::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Largest stress `x` at which the pessimistic geometric mean still reaches
/// `hurdle`. Returns `Finite(0.0)` when even `x = 0` fails, and `Infinite`
/// when the test holds across the whole search range `[0, MAX_STRESS]`;
/// otherwise bisects on `x`.
///
/// With `hurdle = 1` the fixed point `g_x(1) = 1` makes the test independent
/// of `x`, so the index is `Infinite` for `G_CC(f) >= 0` and `0` otherwise.
pub fn acceptability_index(
    clock: &ClockModel,
    fam: DistortionFamily,
    bet: &BetModel,
    f: f64,
    hurdle: f64,
) -> Result<AcceptabilityIndex> {
    if !(hurdle >= 1.0) || !hurdle.is_finite() {
        return Err(Error::InvalidParameter(format!("hurdle must be finite and >= 1, got {hurdle}")));
    }
    let m = clock.mgf(growth_cc(clock, bet, f)?)?;
    let ok = |x: f64| fam.inverse(x, m) >= hurdle;
    if !ok(0.0) {
        return Ok(AcceptabilityIndex::Finite(0.0));
    }
    if ok(MAX_STRESS) {
        return Ok(AcceptabilityIndex::Infinite);
    }
    let (mut lo, mut hi) = (0.0, MAX_STRESS);
    while hi - lo > INDEX_TOL {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(AcceptabilityIndex::Finite(lo))
}
