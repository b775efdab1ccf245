//! The variational loop: ansatz, optimizer, final sampling and reporting.

mod distribution;
mod report;

pub use distribution::{
    pct_below_offset, round_to_hundredths, CostBin, CostDistribution, CostEntry,
    DistributionSource,
};
pub use report::{random_baseline, random_baseline_exact, RunMetadata, RunReport};

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{
    build_cyclic, build_ora, build_real_amplitudes, build_tailored, Circuit, CircuitError,
    DEFAULT_CYCLIC_RANGES, DEFAULT_ORA_REPS,
};
use crate::market::MarketModel;
use crate::optimize::{
    conjugate_gradient_fd, differential_evolution, CgConfig, DeConfig, OptError, OptLog,
    THETA_BOUND,
};
use crate::problem::{DpoConfig, IsingHamiltonian, ProblemError};
use crate::seed::{self, streams};
use crate::sim::{
    cost_table, exact_distribution, expectation_with_table, sample, sample_indices, simulate_with_cap,
    SimError, DEFAULT_QUBIT_CAP,
};

#[derive(Debug, Error, PartialEq)]
pub enum VqeError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Optimizer(#[from] OptError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("{0}")]
    Invalid(String),
}

/// The Hamiltonian plus, for portfolio problems, what is needed to decode
/// bitstrings into trajectories.
#[derive(Debug, Clone, Copy)]
pub struct ProblemContext<'a> {
    pub hamiltonian: &'a IsingHamiltonian,
    pub portfolio: Option<(&'a DpoConfig, &'a MarketModel)>,
}

impl<'a> ProblemContext<'a> {
    pub fn ising_only(hamiltonian: &'a IsingHamiltonian) -> Self {
        Self {
            hamiltonian,
            portfolio: None,
        }
    }

    pub fn portfolio(
        hamiltonian: &'a IsingHamiltonian,
        config: &'a DpoConfig,
        model: &'a MarketModel,
    ) -> Self {
        Self {
            hamiltonian,
            portfolio: Some((config, model)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum AnsatzSpec {
    Cyclic { ranges: Vec<usize> },
    RealAmplitudes { reps: usize },
    Ora { reps: usize },
    Tailored,
}

impl AnsatzSpec {
    pub fn cyclic() -> Self {
        AnsatzSpec::Cyclic {
            ranges: DEFAULT_CYCLIC_RANGES.to_vec(),
        }
    }

    pub fn ora() -> Self {
        AnsatzSpec::Ora {
            reps: DEFAULT_ORA_REPS,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AnsatzSpec::Cyclic { .. } => "cyclic",
            AnsatzSpec::RealAmplitudes { .. } => "real_amplitudes",
            AnsatzSpec::Ora { .. } => "ora",
            AnsatzSpec::Tailored => "tailored",
        }
    }

    /// ORA and tailored need the portfolio layout; the others only `n_q`.
    pub fn build(&self, n_q: usize, layout: Option<&DpoConfig>) -> Result<Circuit, VqeError> {
        let need_layout = || {
            layout.ok_or_else(|| {
                VqeError::Invalid(format!("{} ansatz needs a portfolio layout", self.name()))
            })
        };
        let circuit = match self {
            AnsatzSpec::Cyclic { ranges } => build_cyclic(n_q, ranges)?,
            AnsatzSpec::RealAmplitudes { reps } => build_real_amplitudes(n_q, *reps),
            AnsatzSpec::Ora { reps } => build_ora(need_layout()?, *reps)?,
            AnsatzSpec::Tailored => build_tailored(need_layout()?),
        };
        if circuit.n_qubits() != n_q {
            return Err(VqeError::Invalid(format!(
                "ansatz acts on {} qubits, Hamiltonian on {n_q}",
                circuit.n_qubits()
            )));
        }
        Ok(circuit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerSpec {
    De {
        pop_size: usize,
        generations: usize,
        /// `None` picks 0 for at most 6 qubits, otherwise the default pool.
        elitist_pool: Option<usize>,
    },
    Cg {
        max_iter: usize,
        fd_step: f64,
    },
}

impl OptimizerSpec {
    pub fn cg() -> Self {
        let d = CgConfig::default();
        OptimizerSpec::Cg {
            max_iter: d.max_iter,
            fd_step: d.fd_step,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    Exact,
    Shots,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeRunConfig {
    pub ansatz: AnsatzSpec,
    pub optimizer: OptimizerSpec,
    pub estimator: EstimatorMode,
    pub estimator_shots: Option<usize>,
    pub sampler_shots: Option<usize>,
    pub seed: u64,
    pub qubit_cap: usize,
}

impl VqeRunConfig {
    pub fn new(ansatz: AnsatzSpec, optimizer: OptimizerSpec, seed: u64) -> Self {
        Self {
            ansatz,
            optimizer,
            estimator: EstimatorMode::Exact,
            estimator_shots: None,
            sampler_shots: None,
            seed,
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }
}

pub fn default_estimator_shots(n_q: usize) -> usize {
    if n_q <= 6 {
        2_500
    } else {
        25_000
    }
}

pub fn default_sampler_shots(n_q: usize) -> usize {
    if n_q <= 6 {
        10_000
    } else {
        100_000
    }
}

pub fn default_elitist_pool(n_q: usize) -> usize {
    if n_q <= 6 {
        0
    } else {
        DeConfig::DEFAULT_ELITIST_POOL
    }
}

/// Builds the ansatz, then runs [`run_vqe_with_circuit`].
pub fn run_vqe(problem: &ProblemContext<'_>, run: &VqeRunConfig) -> Result<RunReport, VqeError> {
    let n_q = problem.hamiltonian.n_qubits();
    let layout = problem.portfolio.map(|(c, _)| c);
    let circuit = run.ansatz.build(n_q, layout)?;
    run_vqe_with_circuit(problem, &circuit, run)
}

/// Shot-estimated mean cost: sample `shots` outcomes and average the table.
fn shot_estimate(probs: &[f64], table: &[f64], shots: usize, seed: u64) -> f64 {
    let sum: f64 = sample_indices(probs, shots, seed)
        .into_iter()
        .map(|(i, n)| table[i] * n as f64)
        .sum();
    sum / shots as f64
}

pub fn run_vqe_with_circuit(
    problem: &ProblemContext<'_>,
    circuit: &Circuit,
    run: &VqeRunConfig,
) -> Result<RunReport, VqeError> {
    let started = Instant::now();
    let h = problem.hamiltonian;
    let n_q = h.n_qubits();
    if circuit.n_qubits() != n_q {
        return Err(VqeError::Invalid(format!(
            "circuit acts on {} qubits, Hamiltonian on {n_q}",
            circuit.n_qubits()
        )));
    }
    if n_q > run.qubit_cap {
        return Err(SimError::QubitCapExceeded {
            n_qubits: n_q,
            cap: run.qubit_cap,
        }
        .into());
    }
    let table = cost_table(h, run.qubit_cap)?;
    let estimator_shots = run.estimator_shots.unwrap_or(default_estimator_shots(n_q));
    let estimator_seed = seed::derive(run.seed, streams::ESTIMATOR);

    let objective = |theta: &[f64]| -> f64 {
        let state = simulate_with_cap(circuit, theta, run.qubit_cap)
            .expect("parameter count and cap checked before optimization");
        match run.estimator {
            EstimatorMode::Exact => {
                expectation_with_table(&state, &table).expect("table matches state")
            }
            EstimatorMode::Shots => shot_estimate(
                &state.probabilities(),
                &table,
                estimator_shots,
                seed::derive_from_reals(estimator_seed, theta),
            ),
        }
    };

    let dim = circuit.n_params();
    let (theta, log) = if dim == 0 {
        let cost = objective(&[]);
        (Vec::new(), OptLog::Evaluations { costs: vec![cost] })
    } else {
        let result = match &run.optimizer {
            OptimizerSpec::De {
                pop_size,
                generations,
                elitist_pool,
            } => {
                let cfg = DeConfig::new(*pop_size, *generations, run.seed)
                    .with_elitist_pool(elitist_pool.unwrap_or(default_elitist_pool(n_q)));
                differential_evolution(objective, dim, &cfg)?
            }
            OptimizerSpec::Cg { max_iter, fd_step } => {
                use rand::Rng;
                let mut rng = seed::rng(seed::derive(run.seed, streams::OPTIMIZER));
                let start: Vec<f64> = (0..dim)
                    .map(|_| rng.random_range(-THETA_BOUND..THETA_BOUND))
                    .collect();
                let cfg = CgConfig {
                    max_iter: *max_iter,
                    fd_step: *fd_step,
                    ..CgConfig::default()
                };
                conjugate_gradient_fd(objective, &start, &cfg)?
            }
        };
        (result.best_params, result.log)
    };

    let state = simulate_with_cap(circuit, &theta, run.qubit_cap)?;
    let expectation = expectation_with_table(&state, &table)?;
    let shots = run.sampler_shots.unwrap_or(default_sampler_shots(n_q));
    let samples = sample(&state, shots, seed::derive(run.seed, streams::SAMPLER));
    let dist = CostDistribution::from_counts(&samples.counts, h)?;
    let mut report = RunReport::from_distribution(
        &format!("vqe:{}", run.ansatz.name()),
        run.seed,
        problem,
        dist,
        Some(expectation),
        Some(log),
    )?;
    report.metadata.wall_time_s = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Exact output distribution of a circuit at fixed parameters.
pub fn exact_cost_distribution(
    circuit: &Circuit,
    theta: &[f64],
    h: &IsingHamiltonian,
) -> Result<CostDistribution, VqeError> {
    let state = simulate_with_cap(circuit, theta, DEFAULT_QUBIT_CAP)?;
    Ok(CostDistribution::from_probabilities(&exact_distribution(&state), h)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> IsingHamiltonian {
        IsingHamiltonian::new(2, 0.0, [(0, -0.5)], [(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn toy_ground_state() {
        let h = toy();
        let run = VqeRunConfig::new(
            AnsatzSpec::RealAmplitudes { reps: 1 },
            OptimizerSpec::De {
                pop_size: 10,
                generations: 60,
                elitist_pool: None,
            },
            3,
        );
        let r = run_vqe(&ProblemContext::ising_only(&h), &run).unwrap();
        assert_eq!(r.best_bitstring.to_string(), "01");
        assert_eq!(r.min_cost, -1.5);
        assert!(r.min_cost <= r.expectation.unwrap() + 1e-12);
    }

    #[test]
    fn empty_circuit_reports_zero_state() {
        let h = toy();
        let run = VqeRunConfig::new(AnsatzSpec::Tailored, OptimizerSpec::cg(), 0);
        let r = run_vqe_with_circuit(&ProblemContext::ising_only(&h), &Circuit::new(2), &run)
            .unwrap();
        assert_eq!(r.best_bitstring.to_string(), "00");
        assert_eq!(r.min_cost, 0.5);
        assert_eq!(r.distribution.entries.len(), 1);
    }

    #[test]
    fn cap_is_enforced() {
        let h = IsingHamiltonian::new(30, 0.0, [], []).unwrap();
        let run = VqeRunConfig::new(
            AnsatzSpec::RealAmplitudes { reps: 1 },
            OptimizerSpec::cg(),
            0,
        );
        assert!(matches!(
            run_vqe(&ProblemContext::ising_only(&h), &run),
            Err(VqeError::Sim(SimError::QubitCapExceeded { .. }))
        ));
    }

    #[test]
    fn layout_families_need_portfolio() {
        assert!(AnsatzSpec::Tailored.build(4, None).is_err());
        assert!(AnsatzSpec::cyclic().build(4, None).is_ok());
    }

    #[test]
    fn shot_estimator_is_reproducible() {
        let h = toy();
        let mut run = VqeRunConfig::new(
            AnsatzSpec::RealAmplitudes { reps: 1 },
            OptimizerSpec::De {
                pop_size: 6,
                generations: 5,
                elitist_pool: None,
            },
            8,
        );
        run.estimator = EstimatorMode::Shots;
        let ctx = ProblemContext::ising_only(&h);
        let a = run_vqe(&ctx, &run).unwrap();
        let b = run_vqe(&ctx, &run).unwrap();
        assert_eq!(a.deterministic_json().unwrap(), b.deterministic_json().unwrap());
    }
}
