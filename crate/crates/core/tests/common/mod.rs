#![allow(dead_code)]

use dpo_vqe::market::{build_market_model, generate_synthetic_prices, MarketModel, RebalanceGrid};
use dpo_vqe::problem::{build_qubo, qubo_to_ising, DpoConfig, IsingHamiltonian, Preset, QuboProblem};
use dpo_vqe::Bitstring;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub config: DpoConfig,
    pub model: MarketModel,
    pub qubo: QuboProblem,
    pub ising: IsingHamiltonian,
}

/// The 6-qubit instance: 3 of 7 synthetic assets, two 30-day windows.
pub fn standard_xs() -> Instance {
    let prices = generate_synthetic_prices(7, 210, 42)
        .unwrap()
        .select_assets(3)
        .unwrap();
    let grid = RebalanceGrid::new(30, 2).unwrap();
    let model = build_market_model(&prices, &grid).unwrap();
    let config = DpoConfig::preset(Preset::Xs);
    let qubo = build_qubo(&config, &model).unwrap();
    let ising = qubo_to_ising(&qubo);
    Instance {
        config,
        model,
        qubo,
        ising,
    }
}

/// A random portfolio instance with at most `max_qubits` variables.
pub fn random_instance(seed: u64, max_qubits: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n_t, n_a, n_r) = loop {
        let s = (
            rng.random_range(1..=3),
            rng.random_range(1..=3),
            rng.random_range(1..=2),
        );
        if s.0 * s.1 * s.2 <= max_qubits {
            break s;
        }
    };
    let mut config = DpoConfig::new(n_t, n_a, n_r, rng.random_range(1.0..6.0)).unwrap();
    config.gamma = [1.0, 10.0, 1000.0][rng.random_range(0..3)];
    config.nu = rng.random_range(0.0..0.05);
    config.rho = rng.random_range(0.5..2.0);
    config.initial_holdings = (0..n_a)
        .map(|_| rng.random_range(0..=config.k_prime() as u32) as f64)
        .collect();

    let mu = (0..n_t)
        .map(|_| (0..n_a).map(|_| rng.random_range(-0.1..0.1)).collect())
        .collect();
    let sigma = (0..n_t)
        .map(|_| {
            let f: Vec<Vec<f64>> = (0..n_a)
                .map(|_| (0..n_a).map(|_| rng.random_range(-0.03..0.03)).collect())
                .collect();
            (0..n_a)
                .map(|a| {
                    (0..n_a)
                        .map(|b| (0..n_a).map(|k| f[a][k] * f[b][k]).sum())
                        .collect()
                })
                .collect()
        })
        .collect();
    let model = MarketModel::new(mu, sigma).unwrap();
    let qubo = build_qubo(&config, &model).unwrap();
    let ising = qubo_to_ising(&qubo);
    Instance {
        config,
        model,
        qubo,
        ising,
    }
}

/// Objective evaluated straight from its definition: decode each cell's
/// binary stake, then sum return, risk, quadratic fees and budget penalty.
pub fn termwise_cost(config: &DpoConfig, model: &MarketModel, b: &Bitstring) -> f64 {
    let k = config.k_budget;
    let lambda = 2f64.cbrt() * k / ((1u64 << config.n_r) - 1) as f64;
    let w = |t: usize, a: usize| -> f64 {
        let mut amount = 0.0;
        for r in 0..config.n_r {
            let q = r + config.n_r * a + t * config.n_a * config.n_r;
            if b.bit(q) {
                amount += 2f64.powi(r as i32);
            }
        }
        amount / k
    };
    let mut cost = 0.0;
    for t in 0..config.n_t {
        let mut total = 0.0;
        for a in 0..config.n_a {
            cost -= model.mu[t][a] * w(t, a);
            for c in 0..config.n_a {
                cost += 0.5 * config.gamma * model.sigma[t][a][c] * w(t, a) * w(t, c);
            }
            let prev = if t == 0 {
                config.initial_holdings[a] / k
            } else {
                w(t - 1, a)
            };
            cost += config.nu * lambda * (w(t, a) - prev).powi(2);
            total += w(t, a);
        }
        cost += config.rho * (total - 1.0).powi(2);
    }
    cost
}

pub fn all_bitstrings(n: usize) -> impl Iterator<Item = Bitstring> {
    (0..1usize << n).map(move |i| Bitstring::from_index(i, n))
}
