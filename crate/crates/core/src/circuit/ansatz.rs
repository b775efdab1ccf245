use super::{Circuit, CircuitError, Gate};
use crate::problem::DpoConfig;

pub const DEFAULT_CYCLIC_RANGES: [usize; 2] = [1, 3];
pub const DEFAULT_ORA_REPS: usize = 3;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Cyclic ansatz: per range `d`, an RY layer then `n/gcd(n,d)` CNOTs with
/// control `d(n-j) mod n` and target `d(n-j-1) mod n`.
pub fn build_cyclic(n_q: usize, ranges: &[usize]) -> Result<Circuit, CircuitError> {
    if n_q < 2 {
        return Err(CircuitError::Invalid(format!(
            "cyclic ansatz needs at least 2 qubits, got {n_q}"
        )));
    }
    let mut c = Circuit::new(n_q);
    for &d in ranges {
        if d == 0 {
            return Err(CircuitError::Invalid("cyclic range must be >= 1".into()));
        }
        if d % n_q == 0 {
            return Err(CircuitError::DegenerateBlock { n_q, d });
        }
        for q in 0..n_q {
            c.ry_fresh(q);
        }
        let n = n_q as i64;
        let d = d as i64;
        for j in 1..=(n_q / gcd(n_q, d as usize)) as i64 {
            let control = (d * (n - j)).rem_euclid(n) as usize;
            let target = (d * (n - j - 1)).rem_euclid(n) as usize;
            c.push(Gate::cnot(control, target));
        }
    }
    Ok(c)
}

/// Reverse-linear Real-Amplitudes block over an ordered qubit list.
fn real_amplitudes_block(c: &mut Circuit, qubits: &[usize], reps: usize) {
    for _ in 0..reps {
        for &q in qubits {
            c.ry_fresh(q);
        }
        for i in (0..qubits.len().saturating_sub(1)).rev() {
            c.push(Gate::cnot(qubits[i], qubits[i + 1]));
        }
    }
    for &q in qubits {
        c.ry_fresh(q);
    }
}

pub fn build_real_amplitudes(n_q: usize, reps: usize) -> Circuit {
    let mut c = Circuit::new(n_q);
    let qubits: Vec<usize> = (0..n_q).collect();
    real_amplitudes_block(&mut c, &qubits, reps);
    c
}

/// Real-Amplitudes blocks linking each asset's register at `t` and `t+1`.
pub fn build_ora(config: &DpoConfig, reps_per_block: usize) -> Result<Circuit, CircuitError> {
    if config.n_t < 2 {
        return Err(CircuitError::TooFewTimeSteps(config.n_t));
    }
    let mut c = Circuit::new(config.n_qubits());
    for t in 0..config.n_t - 1 {
        for a in 0..config.n_a {
            let qubits: Vec<usize> = config
                .cell_qubits(t, a)
                .chain(config.cell_qubits(t + 1, a))
                .collect();
            real_amplitudes_block(&mut c, &qubits, reps_per_block);
        }
    }
    Ok(c)
}

/// Block-structured ansatz: three single-repetition Real-Amplitudes layers on
/// every `(t, a)` register, separated by inter-asset and inter-time CNOTs.
///
/// Inter-asset links join the last qubit of `(t, a)` to the first of
/// `(t, a+1)`. Inter-time links join the `r = 0` qubits of `(t, a)` and
/// `(t+1, a)`, controlled on the earlier time step.
pub fn build_tailored(config: &DpoConfig) -> Circuit {
    let mut c = Circuit::new(config.n_qubits());
    let intra = |c: &mut Circuit| {
        for t in 0..config.n_t {
            for a in 0..config.n_a {
                let qubits: Vec<usize> = config.cell_qubits(t, a).collect();
                real_amplitudes_block(c, &qubits, 1);
            }
        }
    };
    intra(&mut c);
    for t in 0..config.n_t {
        for a in 0..config.n_a.saturating_sub(1) {
            let last = config.cell_qubits(t, a).end - 1;
            let first = config.cell_qubits(t, a + 1).start;
            c.push(Gate::cnot(last, first));
        }
    }
    intra(&mut c);
    for t in 0..config.n_t.saturating_sub(1) {
        for a in 0..config.n_a {
            let lo = config.cell_qubits(t, a).start;
            let hi = config.cell_qubits(t + 1, a).start;
            c.push(Gate::cnot(lo, hi));
        }
    }
    intra(&mut c);
    c
}

/// Layout placing qubit `(t, a, r)` at row `a·n_r + r`, column `t` of a
/// `(n_a·n_r) × n_t` grid, matching [`super::CouplingMap::grid`] indexing.
pub fn tailored_grid_layout(config: &DpoConfig) -> Vec<usize> {
    let cols = config.n_t;
    let mut layout = vec![0; config.n_qubits()];
    for t in 0..config.n_t {
        for a in 0..config.n_a {
            for (r, q) in config.cell_qubits(t, a).enumerate() {
                layout[q] = (a * config.n_r + r) * cols + t;
            }
        }
    }
    layout
}
