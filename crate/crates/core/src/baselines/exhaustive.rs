use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{better, lex_key, BaselineError, MAX_EXHAUSTIVE_QUBITS, MAX_TABLE_QUBITS};
use crate::problem::IsingHamiltonian;
use crate::Bitstring;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveResult {
    pub min_cost: f64,
    pub argmin: Bitstring,
    /// Cost of every basis index, only for at most 16 qubits.
    pub table: Option<Vec<f64>>,
}

const CHUNK_BITS: usize = 12;

fn check_size(h: &IsingHamiltonian) -> Result<(), BaselineError> {
    if h.n_qubits() > MAX_EXHAUSTIVE_QUBITS {
        return Err(BaselineError::TooLarge {
            n_qubits: h.n_qubits(),
            limit: MAX_EXHAUSTIVE_QUBITS,
        });
    }
    Ok(())
}

fn finish(h: &IsingHamiltonian, index: usize) -> ExhaustiveResult {
    let n = h.n_qubits();
    ExhaustiveResult {
        min_cost: h.cost_of_index(index),
        argmin: Bitstring::from_index(index, n),
        table: (n <= MAX_TABLE_QUBITS).then(|| (0..1usize << n).map(|i| h.cost_of_index(i)).collect()),
    }
}

/// Evaluates every basis state directly.
pub fn exhaustive_search_naive(h: &IsingHamiltonian) -> Result<ExhaustiveResult, BaselineError> {
    check_size(h)?;
    let n = h.n_qubits();
    let mut best = (f64::INFINITY, u64::MAX, 0usize);
    for i in 0..1usize << n {
        let (c, k) = (h.cost_of_index(i), lex_key(i, n));
        if better(c, k, best.0, best.1) {
            best = (c, k, i);
        }
    }
    Ok(finish(h, best.2))
}

/// Enumerates in parallel chunks; inside a chunk the low bits follow a Gray
/// code so each step flips one spin and updates the energy from local fields.
pub fn exhaustive_search(h: &IsingHamiltonian) -> Result<ExhaustiveResult, BaselineError> {
    check_size(h)?;
    let n = h.n_qubits();
    let low = n.min(CHUNK_BITS);
    let adjacency = h.adjacency();
    let fields = h.field_vector();

    let chunk_best: Vec<(f64, u64, usize)> = (0..1usize << (n - low))
        .into_par_iter()
        .map(|chunk| {
            let base = chunk << low;
            let mut z: Vec<f64> = (0..n)
                .map(|q| if (base >> q) & 1 == 0 { 1.0 } else { -1.0 })
                .collect();
            let mut local: Vec<f64> = (0..n)
                .map(|q| fields[q] + adjacency[q].iter().map(|&(p, j)| j * z[p]).sum::<f64>())
                .collect();
            let mut energy = h.cost_of_index(base);
            let mut index = base;
            let mut best = (energy, lex_key(index, n), index);
            for step in 1..1usize << low {
                let q = step.trailing_zeros() as usize;
                energy -= 2.0 * z[q] * local[q];
                z[q] = -z[q];
                for &(p, j) in &adjacency[q] {
                    local[p] += 2.0 * j * z[q];
                }
                index ^= 1 << q;
                let key = lex_key(index, n);
                if better(energy, key, best.0, best.1) {
                    best = (energy, key, index);
                }
            }
            best
        })
        .collect();

    let best = chunk_best
        .into_iter()
        .fold((f64::INFINITY, u64::MAX, 0usize), |acc, c| {
            if better(c.0, c.1, acc.0, acc.1) {
                c
            } else {
                acc
            }
        });
    Ok(finish(h, best.2))
}
