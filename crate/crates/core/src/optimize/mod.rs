//! Box-constrained optimizers for the variational loop.

mod cg;
mod de;

pub use cg::{conjugate_gradient_fd, CgConfig};
pub use de::{de_convergence, differential_evolution, DeConfig};

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Every parameter lives in `[-THETA_BOUND, THETA_BOUND]`.
pub const THETA_BOUND: f64 = 2.0 * PI;

#[derive(Debug, Error, PartialEq)]
pub enum OptError {
    #[error("population of {0} is too small; best2bin needs at least 5 members")]
    PopulationTooSmall(usize),
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationEntry {
    pub generation: usize,
    pub mean_cost: f64,
    pub min_cost: f64,
    pub population_costs: Vec<f64>,
    /// Objective calls made so far, this generation included.
    pub evals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptLog {
    Generations { entries: Vec<GenerationEntry> },
    /// Cost of every objective call, in call order.
    Evaluations { costs: Vec<f64> },
}

impl OptLog {
    /// Writes `generation,mean_cost,min_cost,evals` or `evaluation,cost`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        match self {
            OptLog::Generations { entries } => {
                writeln!(out, "generation,mean_cost,min_cost,evals")?;
                for e in entries {
                    writeln!(
                        out,
                        "{},{},{},{}",
                        e.generation, e.mean_cost, e.min_cost, e.evals
                    )?;
                }
            }
            OptLog::Evaluations { costs } => {
                writeln!(out, "evaluation,cost")?;
                for (i, c) in costs.iter().enumerate() {
                    writeln!(out, "{},{}", i + 1, c)?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_params: Vec<f64>,
    pub best_cost: f64,
    pub converged: bool,
    pub log: OptLog,
    pub evaluations: usize,
    /// Generations run (DE) or line-search iterations (CG).
    pub iterations: usize,
}

/// True when the trailing `window` values span at most `tol` of the last
/// value's magnitude.
pub(crate) fn relative_span_within(values: &[f64], window: usize, tol: f64, strict: bool) -> bool {
    if window == 0 || values.len() < window {
        return false;
    }
    let tail = &values[values.len() - window..];
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let span = max - min;
    let last = tail[window - 1].abs();
    if last < 1e-15 {
        return span == 0.0;
    }
    if strict {
        span / last < tol
    } else {
        span / last <= tol
    }
}

pub(crate) fn clamp(x: f64, (lo, hi): (f64, f64)) -> f64 {
    x.clamp(lo, hi)
}

pub(crate) fn check_bounds(bounds: (f64, f64)) -> Result<(), OptError> {
    if !(bounds.0 < bounds.1) || !bounds.0.is_finite() || !bounds.1.is_finite() {
        return Err(OptError::InvalidConfig(format!(
            "bounds {:?} are not a finite interval",
            bounds
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn span_rule() {
        assert!(relative_span_within(&[1.0, 1.01, 1.02], 3, 0.025, false));
        assert!(!relative_span_within(&[1.0, 1.1], 2, 0.025, false));
        assert!(!relative_span_within(&[1.0], 2, 0.025, false));
        assert!(relative_span_within(&[0.0, 0.0], 2, 0.025, true));
        assert!(!relative_span_within(&[1e-3, 0.0], 2, 0.025, true));
    }

    #[test]
    fn csv_headers() {
        let mut buf = Vec::new();
        OptLog::Evaluations { costs: vec![2.0] }
            .write_csv(&mut buf)
            .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "evaluation,cost\n1,2\n");
    }
}
