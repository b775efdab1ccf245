use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    check_bounds, clamp, relative_span_within, GenerationEntry, OptError, OptLog, OptResult,
    THETA_BOUND,
};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    pub pop_size: usize,
    pub generations: usize,
    /// `F` is drawn uniformly from this range once per generation.
    pub mutation_range: (f64, f64),
    pub recombination: f64,
    pub bounds: (f64, f64),
    /// Random candidates scored before generation 0; the best `pop_size`
    /// seed the population. Zero means a plain random start.
    pub elitist_pool: usize,
    pub seed: u64,
    pub convergence_window: usize,
    pub convergence_tol: f64,
}

impl DeConfig {
    pub const DEFAULT_ELITIST_POOL: usize = 3000;

    pub fn new(pop_size: usize, generations: usize, seed: u64) -> Self {
        Self {
            pop_size,
            generations,
            mutation_range: (0.0, 0.25),
            recombination: 0.4,
            bounds: (-THETA_BOUND, THETA_BOUND),
            elitist_pool: 0,
            seed,
            convergence_window: 10,
            convergence_tol: 0.025,
        }
    }

    pub fn with_elitist_pool(mut self, pool: usize) -> Self {
        self.elitist_pool = pool;
        self
    }

    fn validate(&self) -> Result<(), OptError> {
        if self.pop_size < 5 {
            return Err(OptError::PopulationTooSmall(self.pop_size));
        }
        check_bounds(self.bounds)?;
        let (lo, hi) = self.mutation_range;
        if !(0.0..=2.0).contains(&lo) || !(lo..=2.0).contains(&hi) {
            return Err(OptError::InvalidConfig(format!(
                "mutation range {:?}",
                self.mutation_range
            )));
        }
        if !(0.0..=1.0).contains(&self.recombination) {
            return Err(OptError::InvalidConfig(format!(
                "recombination {}",
                self.recombination
            )));
        }
        if self.elitist_pool != 0 && self.elitist_pool < self.pop_size {
            return Err(OptError::InvalidConfig(format!(
                "elitist pool {} smaller than population {}",
                self.elitist_pool, self.pop_size
            )));
        }
        Ok(())
    }
}

/// Convergence on per-generation mean costs: the trailing `window` means
/// span at most `tol` of the last mean's magnitude.
pub fn de_convergence(means: &[f64], window: usize, tol: f64) -> bool {
    relative_span_within(means, window, tol, false)
}

fn entry(generation: usize, costs: &[f64], evals: usize) -> GenerationEntry {
    GenerationEntry {
        generation,
        mean_cost: costs.iter().sum::<f64>() / costs.len() as f64,
        min_cost: costs.iter().copied().fold(f64::INFINITY, f64::min),
        population_costs: costs.to_vec(),
        evals,
    }
}

fn argmin(costs: &[f64]) -> usize {
    costs
        .iter()
        .enumerate()
        .fold(0, |best, (i, &c)| if c < costs[best] { i } else { best })
}

fn random_point(rng: &mut impl Rng, dim: usize, (lo, hi): (f64, f64)) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(lo..hi)).collect()
}

/// `best2bin` differential evolution with per-generation dithering.
///
/// All random draws of a generation happen before its trials are scored, so
/// the objective may be evaluated in parallel without affecting results.
pub fn differential_evolution<F>(
    objective: F,
    dim: usize,
    config: &DeConfig,
) -> Result<OptResult, OptError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    if dim == 0 {
        return Err(OptError::InvalidConfig("dimension must be >= 1".into()));
    }
    let mut rng = seed::rng(seed::derive(config.seed, seed::streams::OPTIMIZER));
    let eval_all = |points: &[Vec<f64>]| -> Vec<f64> {
        points.par_iter().map(|p| objective(p)).collect()
    };

    let (mut pop, mut costs, mut evals) = if config.elitist_pool == 0 {
        let pop: Vec<Vec<f64>> = (0..config.pop_size)
            .map(|_| random_point(&mut rng, dim, config.bounds))
            .collect();
        let costs = eval_all(&pop);
        (pop, costs, config.pop_size)
    } else {
        let pool: Vec<Vec<f64>> = (0..config.elitist_pool)
            .map(|_| random_point(&mut rng, dim, config.bounds))
            .collect();
        let pool_costs = eval_all(&pool);
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.sort_by(|&a, &b| pool_costs[a].total_cmp(&pool_costs[b]).then(a.cmp(&b)));
        order.truncate(config.pop_size);
        let pop = order.iter().map(|&i| pool[i].clone()).collect();
        let costs = order.iter().map(|&i| pool_costs[i]).collect();
        (pop, costs, config.elitist_pool)
    };

    let mut entries = vec![entry(0, &costs, evals)];
    let mut means = vec![entries[0].mean_cost];
    let mut converged = de_convergence(&means, config.convergence_window, config.convergence_tol);
    let n = config.pop_size;

    for generation in 1..=config.generations {
        if converged {
            break;
        }
        let (lo, hi) = config.mutation_range;
        let f = if hi > lo { rng.random_range(lo..hi) } else { lo };
        let best = pop[argmin(&costs)].clone();

        let trials: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut picks = [0usize; 4];
                let mut k = 0;
                while k < 4 {
                    let r = rng.random_range(0..n);
                    if r != i && !picks[..k].contains(&r) {
                        picks[k] = r;
                        k += 1;
                    }
                }
                let [r1, r2, r3, r4] = picks.map(|r| &pop[r]);
                let forced = rng.random_range(0..dim);
                (0..dim)
                    .map(|d| {
                        let take = rng.random::<f64>() < config.recombination || d == forced;
                        if take {
                            let m = best[d] + f * (r1[d] - r2[d]) + f * (r3[d] - r4[d]);
                            clamp(m, config.bounds)
                        } else {
                            pop[i][d]
                        }
                    })
                    .collect()
            })
            .collect();

        let trial_costs = eval_all(&trials);
        evals += n;
        for (i, (trial, cost)) in trials.into_iter().zip(trial_costs).enumerate() {
            if cost <= costs[i] {
                pop[i] = trial;
                costs[i] = cost;
            }
        }
        let e = entry(generation, &costs, evals);
        means.push(e.mean_cost);
        entries.push(e);
        converged = de_convergence(&means, config.convergence_window, config.convergence_tol);
    }

    let b = argmin(&costs);
    Ok(OptResult {
        best_params: pop[b].clone(),
        best_cost: costs[b],
        converged,
        iterations: entries.len() - 1,
        log: OptLog::Generations { entries },
        evaluations: evals,
    })
}

/// One best2bin mutant.
#[cfg(test)]
fn mutant(best: &[f64], r: [&[f64]; 4], f: f64) -> Vec<f64> {
    (0..best.len())
        .map(|d| best[d] + f * (r[0][d] - r[1][d]) + f * (r[2][d] - r[3][d]))
        .collect()
}
