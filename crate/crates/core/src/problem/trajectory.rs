use serde::{Deserialize, Serialize};

use super::{lambda_coefficient, DpoConfig, ProblemError};
use crate::market::MarketModel;
use crate::Bitstring;

/// Investments per (time, asset), in currency units and normalized by `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub omega: Vec<Vec<f64>>,
    pub normalized: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Builds a trajectory from money amounts.
    pub fn from_omega(omega: Vec<Vec<f64>>, k_budget: f64) -> Self {
        let normalized = omega
            .iter()
            .map(|row| row.iter().map(|w| w / k_budget).collect())
            .collect();
        Self { omega, normalized }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let scale = |m: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            m.iter()
                .map(|row| row.iter().map(|w| w * factor).collect())
                .collect()
        };
        Self {
            omega: scale(&self.omega),
            normalized: scale(&self.normalized),
        }
    }
}

pub fn decode_bitstring(b: &Bitstring, config: &DpoConfig) -> Result<Trajectory, ProblemError> {
    if b.len() != config.n_qubits() {
        return Err(ProblemError::LengthMismatch {
            expected: config.n_qubits(),
            got: b.len(),
        });
    }
    let omega = (0..config.n_t)
        .map(|t| {
            (0..config.n_a)
                .map(|a| {
                    config
                        .cell_qubits(t, a)
                        .enumerate()
                        .filter(|&(_, q)| b.bit(q))
                        .map(|(r, _)| (1u64 << r) as f64)
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(Trajectory::from_omega(omega, config.k_budget))
}

/// Inverse of [`decode_bitstring`] for integer investments in `[0, K']`.
pub fn encode_trajectory(traj: &Trajectory, config: &DpoConfig) -> Result<Bitstring, ProblemError> {
    check_shape(&traj.omega, config)?;
    let mut bits = Bitstring::zeros(config.n_qubits());
    for t in 0..config.n_t {
        for a in 0..config.n_a {
            let w = traj.omega[t][a];
            if w < 0.0 || w > config.k_prime() || w.fract() != 0.0 {
                return Err(ProblemError::DimensionMismatch(format!(
                    "investment {w} at ({t},{a}) is not an integer in [0, {}]",
                    config.k_prime()
                )));
            }
            let w = w as u64;
            for (r, q) in config.cell_qubits(t, a).enumerate() {
                bits.set(q, (w >> r) & 1 == 1);
            }
        }
    }
    Ok(bits)
}

fn check_shape(m: &[Vec<f64>], config: &DpoConfig) -> Result<(), ProblemError> {
    if m.len() != config.n_t || m.iter().any(|row| row.len() != config.n_a) {
        return Err(ProblemError::DimensionMismatch(format!(
            "trajectory is not {}x{}",
            config.n_t, config.n_a
        )));
    }
    Ok(())
}

/// Objective components evaluated directly on a trajectory.
///
/// `f`, `r`, `c_exact`, `c_quadratic` and `penalty` are on the normalized
/// scale; the `_money` fields use unnormalized investments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    pub f: f64,
    pub r: f64,
    pub c_exact: f64,
    pub c_quadratic: f64,
    pub penalty: f64,
    pub f_money: f64,
    pub r_money: f64,
    pub c_exact_money: f64,
}

impl ObjectiveTerms {
    /// The QUBO cost reassembled from its parts.
    pub fn qubo_cost(&self, gamma: f64) -> f64 {
        -self.f + 0.5 * gamma * self.r + self.c_quadratic + self.penalty
    }
}

fn expected_return(w: &[Vec<f64>], model: &MarketModel) -> f64 {
    w.iter()
        .zip(&model.mu)
        .map(|(wt, mt)| wt.iter().zip(mt).map(|(x, m)| x * m).sum::<f64>())
        .sum()
}

fn risk(w: &[Vec<f64>], model: &MarketModel) -> f64 {
    w.iter()
        .zip(&model.sigma)
        .map(|(wt, st)| {
            st.iter()
                .enumerate()
                .map(|(a, row)| row.iter().zip(wt).map(|(s, x)| wt[a] * s * x).sum::<f64>())
                .sum::<f64>()
        })
        .sum()
}

pub fn objective_terms(
    traj: &Trajectory,
    model: &MarketModel,
    config: &DpoConfig,
) -> Result<ObjectiveTerms, ProblemError> {
    check_shape(&traj.normalized, config)?;
    check_shape(&traj.omega, config)?;
    if model.n_t() != config.n_t || model.n_a() != config.n_a {
        return Err(ProblemError::DimensionMismatch(
            "market model does not match config".into(),
        ));
    }
    let w = &traj.normalized;
    let k = config.k_budget;
    let lambda = lambda_coefficient(config);

    let mut l1 = 0.0;
    let mut l2 = 0.0;
    let mut penalty = 0.0;
    for t in 0..config.n_t {
        for a in 0..config.n_a {
            let prev = if t == 0 {
                config.initial_holdings[a] / k
            } else {
                w[t - 1][a]
            };
            let d = w[t][a] - prev;
            l1 += d.abs();
            l2 += d * d;
        }
        let excess = w[t].iter().sum::<f64>() - 1.0;
        penalty += config.rho * excess * excess;
    }

    let f = expected_return(w, model);
    let r = risk(w, model);
    Ok(ObjectiveTerms {
        f,
        r,
        c_exact: config.nu * l1,
        c_quadratic: config.nu * lambda * l2,
        penalty,
        f_money: expected_return(&traj.omega, model),
        r_money: risk(&traj.omega, model),
        c_exact_money: config.nu * l1 * k,
    })
}

/// `F(Ω) / √R(Ω)` on the money-scale trajectory.
pub fn sharpe_ratio(traj: &Trajectory, model: &MarketModel) -> Result<f64, ProblemError> {
    if traj.omega.len() != model.n_t() || traj.omega.iter().any(|r| r.len() != model.n_a()) {
        return Err(ProblemError::DimensionMismatch(
            "trajectory does not match market model".into(),
        ));
    }
    let r = risk(&traj.omega, model);
    if r <= 1e-15 {
        return Err(ProblemError::ZeroRisk);
    }
    Ok(expected_return(&traj.omega, model) / r.sqrt())
}
