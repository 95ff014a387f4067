//! Long-run growth analysis for fixed-fraction betting when returns run on a
//! stochastic clock.
//!
//! A unit-mean clock `Z` with moment generating function `psi` replaces the
//! logarithm of classical Kelly analysis by `psi^-1`: the long-run growth of a
//! fraction `f` is `E[psi^-1(R(f))]` rather than `E[log R(f)]`. This crate
//! provides the clock models ([`clock`]), one-period bets ([`bet`]), growth
//! functionals ([`growth`]), optimal fractions and ruin thresholds
//! ([`solve`]), a Monte Carlo engine for subordinated wealth paths ([`mc`]),
//! and distortion-based acceptability indices ([`accept`]).

pub mod accept;
pub mod bet;
pub mod clock;
pub mod error;
pub mod growth;
pub mod mc;
pub mod quad;
pub mod roots;
pub mod solve;
pub mod table;

pub use accept::{AcceptabilityIndex, DistortionDirection, DistortionFamily};
pub use bet::{BetModel, Outcome, ReturnDistribution};
pub use clock::{ClockKind, ClockModel, ClockSampler};
pub use error::{Error, Result};
pub use growth::{CurvePoint, GrowthCurve};
pub use mc::{SimConfig, SimMode, SimResult};
pub use solve::{Calibration, SolveOptions, SolveResult};
