//! Reference solvers: exhaustive enumeration, simulated annealing and
//! simulated adiabatic evolution.

mod adiabatic;
mod annealing;
mod exhaustive;

pub use adiabatic::{sae_run, sae_step_circuit, SaeConfig, SaeTrace};
pub use annealing::{default_beta_range, simulated_annealing, SaConfig, SaResult};
pub use exhaustive::{exhaustive_search, exhaustive_search_naive, ExhaustiveResult};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::problem::ProblemError;
use crate::sim::SimError;
use crate::vqe::{CostDistribution, ProblemContext, RunReport, VqeError};
use crate::Bitstring;

pub const MAX_EXHAUSTIVE_QUBITS: usize = 24;
pub const MAX_TABLE_QUBITS: usize = 16;

/// Costs closer than this count as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("{n_qubits} qubits is too many for exhaustive search (limit {limit})")]
    TooLarge { n_qubits: usize, limit: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// Key ordering basis indices like their bitstrings (qubit 0 most significant).
pub(crate) fn lex_key(index: usize, n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        (index as u64).reverse_bits() >> (64 - n)
    }
}

/// Whether `(cost, key)` beats the incumbent under the tie rule.
pub(crate) fn better(cost: f64, key: u64, best_cost: f64, best_key: u64) -> bool {
    cost < best_cost - TIE_TOLERANCE
        || ((cost - best_cost).abs() <= TIE_TOLERANCE && key < best_key)
}

/// Report for a solver that returns a single bitstring.
pub fn point_report(
    method: &str,
    seed: u64,
    problem: &ProblemContext<'_>,
    bitstring: &Bitstring,
) -> Result<RunReport, VqeError> {
    let probs = BTreeMap::from([(bitstring.clone(), 1.0)]);
    let dist = CostDistribution::from_probabilities(&probs, problem.hamiltonian)?;
    RunReport::from_distribution(method, seed, problem, dist, None, None)
}
