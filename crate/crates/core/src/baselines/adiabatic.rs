use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::BaselineError;
use crate::circuit::{Angle, Circuit, Gate};
use crate::problem::IsingHamiltonian;
use crate::seed::{self, streams};
use crate::sim::{cost_table, expectation_with_table, sample, SimError, StateVector, DEFAULT_QUBIT_CAP};
use crate::vqe::{default_sampler_shots, CostDistribution, ProblemContext, RunReport, VqeError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaeConfig {
    pub total_time: f64,
    pub trotter_steps: usize,
    pub checkpoints: usize,
    pub shots: Option<usize>,
    pub seed: u64,
    pub qubit_cap: usize,
}

impl SaeConfig {
    /// `100·T` Trotter steps and 11 checkpoints.
    pub fn new(total_time: f64, seed: u64) -> Self {
        Self {
            total_time,
            trotter_steps: (100.0 * total_time).round().max(1.0) as usize,
            checkpoints: 11,
            shots: None,
            seed,
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }

    fn validate(&self) -> Result<(), BaselineError> {
        if !(self.total_time > 0.0 && self.total_time.is_finite()) {
            return Err(BaselineError::InvalidConfig(format!(
                "evolution time {} must be positive",
                self.total_time
            )));
        }
        if self.checkpoints < 2 || self.trotter_steps < self.checkpoints {
            return Err(BaselineError::InvalidConfig(format!(
                "need checkpoints >= 2 and trotter_steps >= checkpoints (got {} and {})",
                self.checkpoints, self.trotter_steps
            )));
        }
        Ok(())
    }

    /// Step index after which checkpoint `c` is recorded.
    fn checkpoint_step(&self, c: usize) -> usize {
        (c * self.trotter_steps + (self.checkpoints - 1) / 2) / (self.checkpoints - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaeTrace {
    pub times: Vec<f64>,
    pub expectations: Vec<f64>,
    pub final_distribution: CostDistribution,
    #[serde(skip)]
    pub final_state: Option<StateVector>,
}

impl SaeTrace {
    /// Writes `tau,expectation`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "tau,expectation")?;
        for (t, e) in self.times.iter().zip(&self.expectations) {
            writeln!(out, "{t},{e}")?;
        }
        Ok(())
    }

    pub fn final_expectation(&self) -> f64 {
        *self.expectations.last().expect("at least two checkpoints")
    }

    pub fn to_report(
        &self,
        seed: u64,
        problem: &ProblemContext<'_>,
    ) -> Result<RunReport, VqeError> {
        RunReport::from_distribution(
            "sae",
            seed,
            problem,
            self.final_distribution.clone(),
            Some(self.final_expectation()),
            None,
        )
    }
}

/// Gate-level Trotter step `k` of `steps` (1-based) with step size `dt`:
/// the problem part as RZ/RZZ rotations, then the mixer `-ΣX` as RX.
/// The schedule is evaluated at the step midpoint `s = (k - 1/2)/steps`.
pub fn sae_step_circuit(h: &IsingHamiltonian, k: usize, steps: usize, dt: f64) -> Circuit {
    let s = (k as f64 - 0.5) / steps as f64;
    let mut c = Circuit::new(h.n_qubits());
    for &(q, coeff) in h.h() {
        c.push(Gate::rz(q, Angle::Fixed(2.0 * dt * s * coeff)));
    }
    for &(p, q, coeff) in h.j() {
        c.push(Gate::rzz(p, q, Angle::Fixed(2.0 * dt * s * coeff)));
    }
    for q in 0..h.n_qubits() {
        c.push(Gate::rx(q, Angle::Fixed(-2.0 * dt * (1.0 - s))));
    }
    c
}

/// Trotterized evolution under `H(τ) = (1 - τ/T)·(-ΣX) + (τ/T)·H` from the
/// uniform superposition.
///
/// The RZ/RZZ layer of each step is applied as one diagonal phase
/// `exp(-i·dt·s·(E(x) - c))` from the cost table, which equals the product
/// of those commuting rotations exactly.
pub fn sae_run(h: &IsingHamiltonian, config: &SaeConfig) -> Result<SaeTrace, BaselineError> {
    config.validate()?;
    let n = h.n_qubits();
    if n > config.qubit_cap {
        return Err(SimError::QubitCapExceeded {
            n_qubits: n,
            cap: config.qubit_cap,
        }
        .into());
    }
    let table = cost_table(h, config.qubit_cap)?;
    let identity = h.identity_coeff();
    let steps = config.trotter_steps;
    let dt = config.total_time / steps as f64;

    let mut state = StateVector::zero_state(n, config.qubit_cap)?;
    for q in 0..n {
        state.apply(&Gate::ry(q, Angle::Fixed(FRAC_PI_2)), &[]);
    }

    let mut times = vec![0.0];
    let mut expectations = vec![expectation_with_table(&state, &table)?];
    let mut next = 1;
    for k in 1..=steps {
        let s = (k as f64 - 0.5) / steps as f64;
        for (a, &e) in state.amplitudes_mut().iter_mut().zip(&table) {
            *a *= Complex64::from_polar(1.0, -dt * s * (e - identity));
        }
        let mixer = Angle::Fixed(-2.0 * dt * (1.0 - s));
        for q in 0..n {
            state.apply(&Gate::rx(q, mixer), &[]);
        }
        if next < config.checkpoints && k == config.checkpoint_step(next) {
            times.push(k as f64 * dt);
            expectations.push(expectation_with_table(&state, &table)?);
            next += 1;
        }
    }

    let shots = config.shots.unwrap_or(default_sampler_shots(n));
    let samples = sample(&state, shots, seed::derive(config.seed, streams::SAMPLER));
    let final_distribution = CostDistribution::from_counts(&samples.counts, h)?;
    Ok(SaeTrace {
        times,
        expectations,
        final_distribution,
        final_state: Some(state),
    })
}
