//! The dynamic portfolio objective as a QUBO and as a diagonal Ising
//! Hamiltonian.
//!
//! Investments are normalized by the budget `K` and encoded over `n_r`
//! resolution bits per (time, asset) cell:
//! `w̃[t][a] = (1/K) Σ_r 2^r x[t,a,r]`. The objective is
//!
//! ```text
//! Q = Σ_t  -μ_tᵀ w̃_t + (γ/2) w̃_tᵀ Σ_t w̃_t + νλ |w̃_t - w̃_{t-1}|² + ρ (Σ_a w̃[t][a] - 1)²
//! ```
//!
//! with `λ = ∛2 · K / K'`, `K' = 2^n_r - 1` and `w̃_{-1}` the normalized
//! initial holdings.

mod ising;
mod qubo;
mod trajectory;

pub use ising::{qubo_to_ising, IsingHamiltonian};
pub use qubo::QuboProblem;
pub use trajectory::{
    decode_bitstring, encode_trajectory, objective_terms, sharpe_ratio, ObjectiveTerms,
    Trajectory,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market::MarketModel;

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("index out of range: (t={t}, a={a}, r={r}) for shape ({n_t}, {n_a}, {n_r})")]
    IndexOutOfRange {
        t: usize,
        a: usize,
        r: usize,
        n_t: usize,
        n_a: usize,
        n_r: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bitstring has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("risk is zero; the Sharpe ratio is undefined")]
    ZeroRisk,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Named problem sizes: `(n_t, n_a, n_r, K)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Xs,
    S,
    M,
    L,
    Xl,
    Xxl,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Xs,
        Preset::S,
        Preset::M,
        Preset::L,
        Preset::Xl,
        Preset::Xxl,
    ];

    pub fn shape(self) -> (usize, usize, usize, f64) {
        match self {
            Preset::Xs => (2, 3, 1, 2.0),
            Preset::S => (5, 4, 1, 3.0),
            Preset::M => (7, 4, 1, 3.0),
            Preset::L => (4, 7, 2, 5.0),
            Preset::Xl => (4, 7, 3, 12.0),
            Preset::Xxl => (4, 7, 4, 25.0),
        }
    }

    /// Evolution time used by the adiabatic baseline for this size.
    pub fn adiabatic_time(self) -> f64 {
        match self {
            Preset::Xs => 7.0,
            Preset::S => 19.5,
            Preset::M => 20.0,
            Preset::L => 7.0,
            Preset::Xl => 11.0,
            Preset::Xxl => 12.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Xs => "xs",
            Preset::S => "s",
            Preset::M => "m",
            Preset::L => "l",
            Preset::Xl => "xl",
            Preset::Xxl => "xxl",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(name))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpoConfig {
    pub n_t: usize,
    pub n_a: usize,
    pub n_r: usize,
    /// Budget `K` in currency units.
    pub k_budget: f64,
    /// Risk aversion.
    pub gamma: f64,
    /// Transaction fee as a fraction.
    pub nu: f64,
    /// Budget-constraint penalty weight.
    pub rho: f64,
    /// Holdings before the first rebalance, in currency units.
    pub initial_holdings: Vec<f64>,
}

impl DpoConfig {
    pub const DEFAULT_GAMMA: f64 = 1000.0;
    pub const DEFAULT_NU: f64 = 0.01;
    pub const DEFAULT_RHO: f64 = 1.0;

    pub fn new(n_t: usize, n_a: usize, n_r: usize, k_budget: f64) -> Result<Self, ProblemError> {
        let config = Self {
            n_t,
            n_a,
            n_r,
            k_budget,
            gamma: Self::DEFAULT_GAMMA,
            nu: Self::DEFAULT_NU,
            rho: Self::DEFAULT_RHO,
            initial_holdings: vec![0.0; n_a],
        };
        config.validate()?;
        Ok(config)
    }

    pub fn preset(preset: Preset) -> Self {
        let (n_t, n_a, n_r, k) = preset.shape();
        Self::new(n_t, n_a, n_r, k).expect("presets are valid")
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.n_t == 0 || self.n_a == 0 || self.n_r == 0 {
            return Err(ProblemError::InvalidConfig(
                "n_t, n_a and n_r must be positive".into(),
            ));
        }
        if self.n_r >= 53 {
            return Err(ProblemError::InvalidConfig(
                "n_r must be below 53 for exact bit weights".into(),
            ));
        }
        if !(self.k_budget > 0.0) || !self.k_budget.is_finite() {
            return Err(ProblemError::InvalidConfig(
                "k_budget must be positive and finite".into(),
            ));
        }
        for (name, v) in [("gamma", self.gamma), ("nu", self.nu), ("rho", self.rho)] {
            if !v.is_finite() {
                return Err(ProblemError::InvalidConfig(format!("{name} must be finite")));
            }
        }
        if self.initial_holdings.len() != self.n_a {
            return Err(ProblemError::InvalidConfig(format!(
                "initial_holdings has {} entries, expected {}",
                self.initial_holdings.len(),
                self.n_a
            )));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_t * self.n_a * self.n_r
    }

    /// Largest per-asset investment, `2^n_r - 1`.
    pub fn k_prime(&self) -> f64 {
        ((1u64 << self.n_r) - 1) as f64
    }

    pub fn qubit_index(&self, t: usize, a: usize, r: usize) -> Result<usize, ProblemError> {
        if t >= self.n_t || a >= self.n_a || r >= self.n_r {
            return Err(ProblemError::IndexOutOfRange {
                t,
                a,
                r,
                n_t: self.n_t,
                n_a: self.n_a,
                n_r: self.n_r,
            });
        }
        Ok(r + self.n_r * a + t * (self.n_a * self.n_r))
    }

    /// Contiguous logical qubits of the (t, a) cell, lowest bit first.
    pub fn cell_qubits(&self, t: usize, a: usize) -> std::ops::Range<usize> {
        let start = t * self.n_a * self.n_r + a * self.n_r;
        start..start + self.n_r
    }

    fn check_model(&self, model: &MarketModel) -> Result<(), ProblemError> {
        if model.n_t() != self.n_t || model.n_a() != self.n_a {
            return Err(ProblemError::DimensionMismatch(format!(
                "model is {}x{}, config expects {}x{}",
                model.n_t(),
                model.n_a(),
                self.n_t,
                self.n_a
            )));
        }
        Ok(())
    }
}

/// Transaction-cost scale of the quadratic approximation, `∛2 · K / K'`.
pub fn lambda_coefficient(config: &DpoConfig) -> f64 {
    2f64.cbrt() * config.k_budget / config.k_prime()
}

/// Expands the objective into QUBO coefficients.
pub fn build_qubo(config: &DpoConfig, model: &MarketModel) -> Result<QuboProblem, ProblemError> {
    config.validate()?;
    config.check_model(model)?;

    let k = config.k_budget;
    let lambda = lambda_coefficient(config);
    let mut qubo = QuboProblem::new(config.n_qubits());

    // normalized investment of cell (t, a) as a linear form over its bits
    let cell = |t: usize, a: usize| -> Vec<(usize, f64)> {
        config
            .cell_qubits(t, a)
            .enumerate()
            .map(|(r, q)| (q, (1u64 << r) as f64 / k))
            .collect()
    };

    for t in 0..config.n_t {
        let cells: Vec<Vec<(usize, f64)>> = (0..config.n_a).map(|a| cell(t, a)).collect();

        // return
        for (a, terms) in cells.iter().enumerate() {
            for &(q, w) in terms {
                qubo.add_linear(q, -model.mu[t][a] * w);
            }
        }

        // risk
        let half_gamma = 0.5 * config.gamma;
        for a in 0..config.n_a {
            for b in 0..config.n_a {
                let s = model.sigma[t][a][b];
                if s == 0.0 {
                    continue;
                }
                for &(p, wp) in &cells[a] {
                    for &(q, wq) in &cells[b] {
                        qubo.add_quadratic(p, q, half_gamma * s * wp * wq);
                    }
                }
            }
        }

        // transactions against the previous step
        let fee = config.nu * lambda;
        for a in 0..config.n_a {
            let mut form = cells[a].clone();
            let constant = if t == 0 {
                -config.initial_holdings[a] / k
            } else {
                form.extend(cell(t - 1, a).into_iter().map(|(q, w)| (q, -w)));
                0.0
            };
            qubo.add_squared_form(&form, constant, fee);
        }

        // budget penalty
        let all: Vec<(usize, f64)> = cells.into_iter().flatten().collect();
        qubo.add_squared_form(&all, -1.0, config.rho);
    }
    Ok(qubo)
}
