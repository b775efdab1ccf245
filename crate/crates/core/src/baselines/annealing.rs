use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BaselineError, TIE_TOLERANCE};
use crate::problem::IsingHamiltonian;
use crate::seed::{self, streams};
use crate::Bitstring;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaConfig {
    pub sweeps: usize,
    pub restarts: usize,
    /// Inverse temperatures at the first and last sweep; `None` derives them
    /// from the Hamiltonian's energy scales.
    pub beta_range: Option<(f64, f64)>,
    pub seed: u64,
}

impl SaConfig {
    pub fn new(sweeps: usize, restarts: usize, seed: u64) -> Self {
        Self {
            sweeps,
            restarts,
            beta_range: None,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaResult {
    pub min_cost: f64,
    pub argmin: Bitstring,
    pub restart_costs: Vec<f64>,
}

/// Hot end accepts the largest single-flip uphill move with probability 1/2,
/// cold end accepts the smallest with probability 1/100.
pub fn default_beta_range(h: &IsingHamiltonian) -> (f64, f64) {
    let adjacency = h.adjacency();
    let fields = h.field_vector();
    let max_delta = (0..h.n_qubits())
        .map(|q| 2.0 * (fields[q].abs() + adjacency[q].iter().map(|(_, j)| j.abs()).sum::<f64>()))
        .fold(0.0, f64::max);
    let min_delta = h
        .h()
        .iter()
        .map(|&(_, c)| c.abs())
        .chain(h.j().iter().map(|&(_, _, c)| c.abs()))
        .filter(|&c| c > 0.0)
        .fold(f64::INFINITY, f64::min)
        * 2.0;
    if max_delta == 0.0 || !min_delta.is_finite() {
        return (1.0, 1.0);
    }
    let hot = 2f64.ln() / max_delta;
    let cold = 100f64.ln() / min_delta;
    (hot, cold.max(hot))
}

fn anneal_once(
    h: &IsingHamiltonian,
    adjacency: &[Vec<(usize, f64)>],
    fields: &[f64],
    betas: &[f64],
    seed: u64,
) -> Vec<bool> {
    let n = h.n_qubits();
    let mut rng = seed::rng(seed);
    let mut z: Vec<f64> = (0..n)
        .map(|_| if rng.random::<bool>() { -1.0 } else { 1.0 })
        .collect();
    let mut local: Vec<f64> = (0..n)
        .map(|q| fields[q] + adjacency[q].iter().map(|&(p, j)| j * z[p]).sum::<f64>())
        .collect();
    let mut energy = 0.0;
    let mut best_energy = 0.0;
    let mut best = z.clone();
    for &beta in betas {
        for q in 0..n {
            let delta = -2.0 * z[q] * local[q];
            if delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp() {
                z[q] = -z[q];
                energy += delta;
                for &(p, j) in &adjacency[q] {
                    local[p] += 2.0 * j * z[q];
                }
                if energy < best_energy {
                    best_energy = energy;
                    best.copy_from_slice(&z);
                }
            }
        }
    }
    best.iter().map(|&s| s < 0.0).collect()
}

/// Single-flip Metropolis with a geometric inverse-temperature schedule;
/// restarts run in parallel, each on its own derived seed.
pub fn simulated_annealing(
    h: &IsingHamiltonian,
    config: &SaConfig,
) -> Result<SaResult, BaselineError> {
    if config.sweeps == 0 || config.restarts == 0 {
        return Err(BaselineError::InvalidConfig(
            "sweeps and restarts must be >= 1".into(),
        ));
    }
    let (b0, b1) = config.beta_range.unwrap_or_else(|| default_beta_range(h));
    if !(b0 > 0.0 && b1 > 0.0) {
        return Err(BaselineError::InvalidConfig(format!(
            "beta range ({b0}, {b1}) must be positive"
        )));
    }
    let betas: Vec<f64> = (0..config.sweeps)
        .map(|s| {
            if config.sweeps == 1 {
                b1
            } else {
                b0 * (b1 / b0).powf(s as f64 / (config.sweeps - 1) as f64)
            }
        })
        .collect();
    let adjacency = h.adjacency();
    let fields = h.field_vector();

    let finals: Vec<(Bitstring, f64)> = (0..config.restarts as u64)
        .into_par_iter()
        .map(|k| {
            let s = seed::derive(config.seed, streams::RESTART + k);
            let b = Bitstring::new(anneal_once(h, &adjacency, &fields, &betas, s));
            let c = h.cost_of_bitstring(&b).expect("length matches");
            (b, c)
        })
        .collect();

    let best = finals.iter().enumerate().fold(0, |best, (i, (b, c))| {
        let (bb, bc) = &finals[best];
        let wins = *c < bc - TIE_TOLERANCE || ((c - bc).abs() <= TIE_TOLERANCE && b < bb);
        if wins {
            i
        } else {
            best
        }
    });
    Ok(SaResult {
        min_cost: finals[best].1,
        argmin: finals[best].0.clone(),
        restart_costs: finals.iter().map(|(_, c)| *c).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::exhaustive_search;

    #[test]
    fn independent_spins_all_ones() {
        let h = IsingHamiltonian::new(6, 0.0, (0..6).map(|q| (q, 0.5 + q as f64)), []).unwrap();
        let r = simulated_annealing(&h, &SaConfig::new(50, 2, 1)).unwrap();
        assert_eq!(r.argmin, Bitstring::ones(6));
    }

    #[test]
    fn reproducible_and_never_below_ground() {
        let h = IsingHamiltonian::new(
            8,
            0.0,
            (0..8).map(|q| (q, (q as f64 - 3.5) * 0.2)),
            (0..7).map(|q| (q, q + 1, 0.6)),
        )
        .unwrap();
        let cfg = SaConfig::new(100, 4, 9);
        let a = simulated_annealing(&h, &cfg).unwrap();
        assert_eq!(a, simulated_annealing(&h, &cfg).unwrap());
        let ground = exhaustive_search(&h).unwrap().min_cost;
        assert!(a.min_cost >= ground - 1e-12);
        assert!((a.min_cost - ground).abs() < 1e-9);
    }

    #[test]
    fn beta_range_defaults() {
        let h = IsingHamiltonian::new(2, 0.0, [(0, 1.0)], [(0, 1, 0.5)]).unwrap();
        let (hot, cold) = default_beta_range(&h);
        assert!((hot - 2f64.ln() / 3.0).abs() < 1e-12);
        assert!((cold - 100f64.ln() / 1.0).abs() < 1e-12);
        let flat = IsingHamiltonian::new(2, 1.0, [], []).unwrap();
        assert_eq!(default_beta_range(&flat), (1.0, 1.0));
    }
}
