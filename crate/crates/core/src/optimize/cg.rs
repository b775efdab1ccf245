use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_bounds, clamp, relative_span_within, OptError, OptLog, OptResult, THETA_BOUND};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CgConfig {
    pub max_iter: usize,
    pub fd_step: f64,
    pub bounds: (f64, f64),
    /// Stop once the trailing `window` evaluations span less than `tol`
    /// of the last one.
    pub window: usize,
    pub tol: f64,
    pub armijo_c: f64,
    pub max_halvings: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            max_iter: 500,
            fd_step: 1e-3,
            bounds: (-THETA_BOUND, THETA_BOUND),
            window: 100,
            tol: 0.025,
            armijo_c: 1e-4,
            max_halvings: 30,
        }
    }
}

struct Tracker<'a, F> {
    objective: &'a F,
    costs: Vec<f64>,
    best_cost: f64,
    best_params: Vec<f64>,
}

impl<'a, F: Fn(&[f64]) -> f64 + Sync> Tracker<'a, F> {
    fn record(&mut self, x: &[f64], cost: f64) {
        self.costs.push(cost);
        if cost < self.best_cost {
            self.best_cost = cost;
            self.best_params = x.to_vec();
        }
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        let c = (self.objective)(x);
        self.record(x, c);
        c
    }

    /// Central differences, one-sided where a bound cuts the stencil.
    fn gradient(&mut self, x: &[f64], h: f64, bounds: (f64, f64)) -> Vec<f64> {
        let probes: Vec<(Vec<f64>, Vec<f64>)> = (0..x.len())
            .map(|i| {
                let mut plus = x.to_vec();
                let mut minus = x.to_vec();
                plus[i] = clamp(x[i] + h, bounds);
                minus[i] = clamp(x[i] - h, bounds);
                (plus, minus)
            })
            .collect();
        let values: Vec<(f64, f64)> = probes
            .par_iter()
            .map(|(p, m)| ((self.objective)(p), (self.objective)(m)))
            .collect();
        probes
            .iter()
            .zip(values)
            .enumerate()
            .map(|(i, ((p, m), (fp, fm)))| {
                self.record(p, fp);
                self.record(m, fm);
                let width = p[i] - m[i];
                if width > 0.0 {
                    (fp - fm) / width
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn window_done(&self, config: &CgConfig) -> bool {
        relative_span_within(&self.costs, config.window, config.tol, true)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Polak–Ribière nonlinear conjugate gradient on finite-difference
/// gradients with backtracking Armijo line search, projected onto the box.
pub fn conjugate_gradient_fd<F>(
    objective: F,
    start: &[f64],
    config: &CgConfig,
) -> Result<OptResult, OptError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if start.is_empty() {
        return Err(OptError::InvalidConfig("start vector is empty".into()));
    }
    check_bounds(config.bounds)?;
    if !(config.fd_step > 0.0) {
        return Err(OptError::InvalidConfig(format!("fd_step {}", config.fd_step)));
    }
    let mut t = Tracker {
        objective: &objective,
        costs: Vec::new(),
        best_cost: f64::INFINITY,
        best_params: Vec::new(),
    };
    let mut x: Vec<f64> = start.iter().map(|&v| clamp(v, config.bounds)).collect();
    let mut fx = t.eval(&x);
    let mut g = t.gradient(&x, config.fd_step, config.bounds);
    let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut converged = t.window_done(config);

    let mut iterations = 0;
    while iterations < config.max_iter && !converged {
        iterations += 1;
        let mut slope = dot(&g, &d);
        if slope > 0.0 {
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let mut alpha = 1.0;
        for _ in 0..=config.max_halvings {
            let trial: Vec<f64> = x
                .iter()
                .zip(&d)
                .map(|(xi, di)| clamp(xi + alpha * di, config.bounds))
                .collect();
            let ft = t.eval(&trial);
            if ft <= fx + config.armijo_c * alpha * slope {
                x = trial;
                fx = ft;
                break;
            }
            alpha *= 0.5;
        }
        let g_new = t.gradient(&x, config.fd_step, config.bounds);
        let gg = dot(&g, &g);
        let beta = if gg > 0.0 {
            let pr = g_new.iter().zip(&g).map(|(n, o)| n * (n - o)).sum::<f64>() / gg;
            pr.max(0.0)
        } else {
            0.0
        };
        d = g_new.iter().zip(&d).map(|(gn, di)| -gn + beta * di).collect();
        g = g_new;
        converged = t.window_done(config);
    }

    Ok(OptResult {
        best_params: t.best_params,
        best_cost: t.best_cost,
        converged,
        evaluations: t.costs.len(),
        iterations,
        log: OptLog::Evaluations { costs: t.costs },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2);
        let r = conjugate_gradient_fd(f, &[0.0, 0.0], &CgConfig::default()).unwrap();
        assert!((r.best_params[0] - 1.0).abs() < 1e-3);
        assert!((r.best_params[1] + 2.0).abs() < 1e-3);
    }

    #[test]
    fn constant_objective_stops_by_window() {
        let r = conjugate_gradient_fd(|_| 2.0, &[0.5, 0.5], &CgConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.best_cost, 2.0);
        assert!(r.evaluations >= 100 && r.evaluations < 120);
    }

    #[test]
    fn evaluations_stay_in_bounds() {
        let f = |x: &[f64]| {
            assert!(x.iter().all(|v| v.abs() <= THETA_BOUND));
            -x[0]
        };
        let r = conjugate_gradient_fd(f, &[6.0], &CgConfig::default()).unwrap();
        assert!((r.best_params[0] - THETA_BOUND).abs() < 1e-12);
    }

    #[test]
    fn noisy_objective_terminates() {
        let f = |x: &[f64]| 100.0 + ((x[0] * 1e6).sin() * 1e3).fract();
        let r = conjugate_gradient_fd(f, &[0.1], &CgConfig::default()).unwrap();
        assert!(r.evaluations > 0);
    }
}
