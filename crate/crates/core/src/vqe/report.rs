use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{pct_below_offset, CostDistribution, ProblemContext, VqeError};
use crate::optimize::OptLog;
use crate::problem::{decode_bitstring, sharpe_ratio, IsingHamiltonian, ProblemError, Trajectory};
use crate::{seed, Bitstring};

/// Run facts that vary between identical invocations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: String,
    pub n_qubits: usize,
    pub seed: u64,
    pub min_cost: f64,
    pub best_bitstring: Bitstring,
    pub best_trajectory: Option<Trajectory>,
    /// Absent when the problem is not a portfolio or the risk is zero.
    pub sharpe: Option<f64>,
    pub offset: f64,
    pub pct_below_offset: f64,
    /// `⟨H⟩` of the final state, when a state exists.
    pub expectation: Option<f64>,
    pub distribution: CostDistribution,
    pub convergence: Option<OptLog>,
    #[serde(default)]
    pub metadata: RunMetadata,
}

impl RunReport {
    pub fn from_distribution(
        method: &str,
        seed: u64,
        problem: &ProblemContext<'_>,
        distribution: CostDistribution,
        expectation: Option<f64>,
        convergence: Option<OptLog>,
    ) -> Result<Self, VqeError> {
        let h = problem.hamiltonian;
        let best = distribution
            .min_entry()
            .ok_or_else(|| VqeError::Invalid("empty distribution".into()))?
            .clone();
        let (best_trajectory, sharpe) = match problem.portfolio {
            Some((config, model)) => {
                let traj = decode_bitstring(&best.bitstring, config)?;
                let sharpe = match sharpe_ratio(&traj, model) {
                    Ok(s) => Some(s),
                    Err(ProblemError::ZeroRisk) => None,
                    Err(e) => return Err(e.into()),
                };
                (Some(traj), sharpe)
            }
            None => (None, None),
        };
        Ok(Self {
            method: method.to_string(),
            n_qubits: h.n_qubits(),
            seed,
            min_cost: best.cost,
            best_bitstring: best.bitstring,
            best_trajectory,
            sharpe,
            offset: h.offset(),
            pct_below_offset: pct_below_offset(&distribution, h.offset()),
            expectation,
            distribution,
            convergence,
            metadata: RunMetadata::default(),
        })
    }

    /// JSON with the metadata block removed, for reproducibility checks.
    pub fn deterministic_json(&self) -> serde_json::Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("metadata");
        }
        serde_json::to_string(&v)
    }
}

/// Uniform random bitstrings: the reference for a fully noisy device.
pub fn random_baseline(
    problem: &ProblemContext<'_>,
    shots: usize,
    seed: u64,
) -> Result<RunReport, VqeError> {
    let h = problem.hamiltonian;
    let mut rng = seed::rng(seed::derive(seed, seed::streams::SAMPLER));
    let mut counts: BTreeMap<Bitstring, usize> = BTreeMap::new();
    for _ in 0..shots {
        let b = Bitstring::new((0..h.n_qubits()).map(|_| rng.random::<bool>()).collect());
        *counts.entry(b).or_insert(0) += 1;
    }
    let dist = CostDistribution::from_counts(&counts, h)?;
    RunReport::from_distribution("random", seed, problem, dist, Some(h.offset()), None)
}

/// Exact uniform distribution over every bitstring.
pub fn random_baseline_exact(problem: &ProblemContext<'_>) -> Result<RunReport, VqeError> {
    let h: &IsingHamiltonian = problem.hamiltonian;
    let n = h.n_qubits();
    if n > crate::sim::DEFAULT_QUBIT_CAP {
        return Err(crate::sim::SimError::QubitCapExceeded {
            n_qubits: n,
            cap: crate::sim::DEFAULT_QUBIT_CAP,
        }
        .into());
    }
    let p = 1.0 / (1u64 << n) as f64;
    let probs: BTreeMap<Bitstring, f64> = (0..1usize << n)
        .map(|i| (Bitstring::from_index(i, n), p))
        .collect();
    let dist = CostDistribution::from_probabilities(&probs, h)?;
    RunReport::from_distribution("random", 0, problem, dist, Some(h.offset()), None)
}
