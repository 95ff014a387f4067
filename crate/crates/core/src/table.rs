//! Model- and estimation-risk table for the uniform stock-market bet.
//!
//! The uniform bounds are calibrated once so that the Kelly-Thorp optimum
//! and growth match the `theta = 0` reference row; every other row then
//! evaluates the gamma clock with its `theta` on the same bet.

use serde::{Deserialize, Serialize};

use crate::clock::ClockModel;
use crate::error::{Error, Result};
use crate::growth::growth_cc;
use crate::solve::{calibrate_uniform_bounds, ruin_threshold, Calibration, SolveOptions};

pub const TABLE1_REFERENCE_CSV: &str = include_str!("../data/table1_reference.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub market: String,
    pub sample: String,
    pub theta: f64,
    pub f_c: f64,
    pub f_star: f64,
    pub g_at_kelly: f64,
    pub g_at_optimum: f64,
}

pub fn parse_reference(text: &str) -> Result<Vec<ReferenceRow>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let rows: std::result::Result<Vec<ReferenceRow>, _> = rdr.deserialize().collect();
    let rows = rows.map_err(|e| Error::Config(format!("reference table: {e}")))?;
    if !rows.iter().any(|r| r.theta == 0.0) {
        return Err(Error::Config("reference table has no theta = 0 calibration row".into()));
    }
    Ok(rows)
}

pub fn reference_rows() -> Result<Vec<ReferenceRow>> {
    parse_reference(TABLE1_REFERENCE_CSV)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub market: String,
    pub sample: String,
    pub theta: f64,
    /// Computed `(f_c, f_star, g_at_kelly, g_at_optimum)`.
    pub computed: [f64; 4],
    pub reference: [f64; 4],
}

impl TableRow {
    pub fn deltas(&self) -> [f64; 4] {
        std::array::from_fn(|i| self.computed[i] - self.reference[i])
    }

    pub fn max_abs_delta(&self) -> f64 {
        self.deltas().iter().fold(0.0f64, |m, d| m.max(d.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub calibration: Calibration,
    /// Kelly-Thorp optimum on the calibrated bet.
    pub kelly_f_star: f64,
    pub kelly_growth: f64,
    pub rows: Vec<TableRow>,
}

pub const COLUMNS: [&str; 4] = ["f_c", "f_star", "g_at_kelly", "g_at_optimum"];

pub fn reproduce(reference: &[ReferenceRow]) -> Result<TableReport> {
    let target = reference
        .iter()
        .find(|r| r.theta == 0.0)
        .ok_or_else(|| Error::Config("no theta = 0 row".into()))?;
    let calibration = calibrate_uniform_bounds(target.f_star, target.g_at_optimum)?;
    let bet = calibration.bet();
    let opts = SolveOptions::default();

    let kelly = ruin_threshold(&ClockModel::degenerate(), &bet, &opts)?;
    let mut rows = Vec::with_capacity(reference.len());
    for r in reference {
        let clock = if r.theta == 0.0 { ClockModel::degenerate() } else { ClockModel::gamma(r.theta)? };
        let sol = ruin_threshold(&clock, &bet, &opts)?;
        let computed = [
            sol.f_c.unwrap_or(f64::NAN),
            sol.f_star,
            growth_cc(&clock, &bet, kelly.f_star)?,
            sol.g_at_f_star,
        ];
        rows.push(TableRow {
            market: r.market.clone(),
            sample: r.sample.clone(),
            theta: r.theta,
            computed,
            reference: [r.f_c, r.f_star, r.g_at_kelly, r.g_at_optimum],
        });
    }
    Ok(TableReport { calibration, kelly_f_star: kelly.f_star, kelly_growth: kelly.g_at_f_star, rows })
}
