//! One-period bets: a fraction `f` of wealth is staked and the gross return
//! is `1 + f * u` for a random per-unit return `u`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One outcome of a discrete bet: per-unit return `r` with probability `prob`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub r: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum BetSpec {
    Bernoulli { p: f64 },
    Uniform { lb: f64, ub: f64 },
    Discrete { outcomes: Vec<Outcome> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BetSpec", into = "BetSpec")]
pub enum BetModel {
    /// Win `+1` per unit with probability `p`, lose `-1` otherwise.
    Bernoulli { p: f64 },
    /// Per-unit return uniform on `[lb, ub]`.
    Uniform { lb: f64, ub: f64 },
    Discrete { outcomes: Vec<Outcome> },
}

impl TryFrom<BetSpec> for BetModel {
    type Error = Error;

    fn try_from(spec: BetSpec) -> Result<Self> {
        match spec {
            BetSpec::Bernoulli { p } => BetModel::bernoulli(p),
            BetSpec::Uniform { lb, ub } => BetModel::uniform(lb, ub),
            BetSpec::Discrete { outcomes } => BetModel::discrete(outcomes),
        }
    }
}

impl From<BetModel> for BetSpec {
    fn from(b: BetModel) -> Self {
        match b {
            BetModel::Bernoulli { p } => BetSpec::Bernoulli { p },
            BetModel::Uniform { lb, ub } => BetSpec::Uniform { lb, ub },
            BetModel::Discrete { outcomes } => BetSpec::Discrete { outcomes },
        }
    }
}

/// Law of the gross return `R = 1 + f u` at a given fraction.
#[derive(Debug, Clone, PartialEq)]
pub enum ReturnDistribution {
    /// Finite support of `(R, probability)` pairs.
    Atoms(Vec<(f64, f64)>),
    /// `R` uniform on `[lo, hi]` with `lo < hi`.
    Uniform { lo: f64, hi: f64 },
}

impl ReturnDistribution {
    pub fn min_return(&self) -> f64 {
        match self {
            ReturnDistribution::Atoms(a) => a.iter().map(|&(r, _)| r).fold(f64::INFINITY, f64::min),
            ReturnDistribution::Uniform { lo, .. } => *lo,
        }
    }

    pub fn max_return(&self) -> f64 {
        match self {
            ReturnDistribution::Atoms(a) => {
                a.iter().map(|&(r, _)| r).fold(f64::NEG_INFINITY, f64::max)
            }
            ReturnDistribution::Uniform { hi, .. } => *hi,
        }
    }
}

impl BetModel {
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidBet(format!("Bernoulli p must lie in (0, 1), got {p}")));
        }
        Ok(BetModel::Bernoulli { p })
    }

    pub fn uniform(lb: f64, ub: f64) -> Result<Self> {
        if !(lb.is_finite() && ub.is_finite() && lb < ub) {
            return Err(Error::InvalidBet(format!(
                "uniform bounds need finite lb < ub, got [{lb}, {ub}]"
            )));
        }
        Ok(BetModel::Uniform { lb, ub })
    }

    pub fn discrete(outcomes: Vec<Outcome>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidBet("discrete bet needs at least one outcome".into()));
        }
        let mut total = 0.0;
        for (i, o) in outcomes.iter().enumerate() {
            if !o.r.is_finite() {
                return Err(Error::InvalidBet(format!("outcome {i} has non-finite return")));
            }
            if !(o.prob > 0.0 && o.prob <= 1.0) {
                return Err(Error::InvalidBet(format!(
                    "outcome {i} probability must lie in (0, 1], got {}",
                    o.prob
                )));
            }
            if outcomes[..i].iter().any(|p| p.r == o.r) {
                return Err(Error::InvalidBet(format!("duplicate return {} in outcomes", o.r)));
            }
            total += o.prob;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidBet(format!("probabilities sum to {total}, not 1")));
        }
        Ok(BetModel::Discrete { outcomes })
    }

    /// Supremum of admissible fractions: wealth stays strictly positive for
    /// every `f` below it.
    pub fn max_fraction(&self) -> f64 {
        match self {
            BetModel::Bernoulli { .. } => 1.0,
            BetModel::Uniform { lb, .. } => {
                if *lb < 0.0 {
                    -1.0 / lb
                } else {
                    f64::INFINITY
                }
            }
            BetModel::Discrete { outcomes } => outcomes
                .iter()
                .filter(|o| o.r < 0.0)
                .map(|o| -1.0 / o.r)
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn check_fraction(&self, f: f64) -> Result<()> {
        let max = self.max_fraction();
        if f >= 0.0 && f < max {
            Ok(())
        } else {
            Err(Error::FractionOutOfRange { f, max })
        }
    }

    /// Per-unit outcomes `(r, prob)` of the finite-support variants.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            BetModel::Bernoulli { p } => Some(vec![(1.0, *p), (-1.0, 1.0 - p)]),
            BetModel::Uniform { .. } => None,
            BetModel::Discrete { outcomes } => Some(outcomes.iter().map(|o| (o.r, o.prob)).collect()),
        }
    }

    /// Expected per-unit return `E[u]`.
    pub fn mean_return(&self) -> f64 {
        match self {
            BetModel::Uniform { lb, ub } => 0.5 * (lb + ub),
            _ => self.atoms().unwrap().iter().map(|&(r, p)| r * p).sum(),
        }
    }

    pub fn gross_returns(&self, f: f64) -> Result<ReturnDistribution> {
        self.check_fraction(f)?;
        if f == 0.0 {
            return Ok(ReturnDistribution::Atoms(vec![(1.0, 1.0)]));
        }
        Ok(match self {
            BetModel::Uniform { lb, ub } => ReturnDistribution::Uniform {
                lo: 1.0 + f * lb,
                hi: 1.0 + f * ub,
            },
            _ => ReturnDistribution::Atoms(
                self.atoms().unwrap().into_iter().map(|(r, p)| (1.0 + f * r, p)).collect(),
            ),
        })
    }

    pub fn label(&self) -> String {
        match self {
            BetModel::Bernoulli { p } => format!("bernoulli(p={p})"),
            BetModel::Uniform { lb, ub } => format!("uniform(lb={lb},ub={ub})"),
            BetModel::Discrete { outcomes } => format!("discrete({} outcomes)", outcomes.len()),
        }
    }
}
