//! Dense statevector simulation with diagonal expectation values and
//! seeded sampling.
//!
//! Amplitude index `i` holds the basis state whose qubit `q` is `(i >> q) & 1`.
//! Sampling draws from a ChaCha8 generator seeded through [`crate::seed::rng`]:
//! one uniform `f64` per shot, located in the cumulative distribution by
//! binary search.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::problem::IsingHamiltonian;
use crate::Bitstring;

pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Amplitudes per block in reductions. Fixed so sums do not depend on the
/// thread count.
const REDUCE_BLOCK: usize = 1 << 12;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("circuit has {expected} parameters, got {got}")]
    ParamCountMismatch { expected: usize, got: usize },
    #[error("qubit cap exceeded: {n_qubits} qubits > cap {cap}")]
    QubitCapExceeded { n_qubits: usize, cap: usize },
    #[error("dimension mismatch: state has {state} qubits, operator has {operator}")]
    DimensionMismatch { state: usize, operator: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn zero_state(n_qubits: usize, cap: usize) -> Result<Self, SimError> {
        if n_qubits > cap {
            return Err(SimError::QubitCapExceeded { n_qubits, cap });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps raw amplitudes; the length must be `2^n_qubits`.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Option<Self> {
        (amps.len() == 1 << n_qubits).then_some(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn amplitude(&self, b: &Bitstring) -> Complex64 {
        self.amps[b.to_index()]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        block_sum(&self.amps, |_, a| a.norm_sqr()).sqrt()
    }

    pub fn apply(&mut self, gate: &Gate, params: &[f64]) {
        let qs = gate.qubits();
        let theta = gate.angle().map(|a| a.resolve(params)).unwrap_or(0.0);
        let (s, c) = (0.5 * theta).sin_cos();
        match gate.kind() {
            GateKind::Ry => self.apply_ry(qs[0], c, s),
            GateKind::Rx => {
                let ms = Complex64::new(0.0, -s);
                let cc = Complex64::new(c, 0.0);
                self.apply_1q(qs[0], [[cc, ms], [ms, cc]]);
            }
            GateKind::Rz => {
                let lo = Complex64::new(c, -s);
                let hi = Complex64::new(c, s);
                let mask = 1 << qs[0];
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= if i & mask == 0 { lo } else { hi };
                }
            }
            GateKind::Rzz => {
                let same = Complex64::new(c, -s);
                let diff = Complex64::new(c, s);
                let (p, q) = (qs[0], qs[1]);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    *a *= if ((i >> p) ^ (i >> q)) & 1 == 0 { same } else { diff };
                }
            }
            GateKind::Cnot => {
                let (cm, tm) = (1 << qs[0], 1 << qs[1]);
                for i in 0..self.amps.len() {
                    if i & cm != 0 && i & tm == 0 {
                        self.amps.swap(i, i | tm);
                    }
                }
            }
            GateKind::Swap => {
                let (am, bm) = (1 << qs[0], 1 << qs[1]);
                for i in 0..self.amps.len() {
                    if i & am != 0 && i & bm == 0 {
                        self.amps.swap(i, (i ^ am) | bm);
                    }
                }
            }
        }
    }

    fn apply_ry(&mut self, q: usize, c: f64, s: f64) {
        let half = 1 << q;
        for block in self.amps.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a0, a1) in lo.iter_mut().zip(hi) {
                let (x, y) = (*a0, *a1);
                *a0 = x * c - y * s;
                *a1 = x * s + y * c;
            }
        }
    }

    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let half = 1 << q;
        for block in self.amps.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a0, a1) in lo.iter_mut().zip(hi) {
                let (x, y) = (*a0, *a1);
                *a0 = m[0][0] * x + m[0][1] * y;
                *a1 = m[1][0] * x + m[1][1] * y;
            }
        }
    }
}

/// Deterministic blocked sum of `f(index, amplitude)`.
fn block_sum(amps: &[Complex64], f: impl Fn(usize, &Complex64) -> f64 + Sync) -> f64 {
    let partials: Vec<f64> = amps
        .par_chunks(REDUCE_BLOCK)
        .enumerate()
        .map(|(b, chunk)| {
            let base = b * REDUCE_BLOCK;
            chunk
                .iter()
                .enumerate()
                .map(|(i, a)| f(base + i, a))
                .sum()
        })
        .collect();
    partials.iter().sum()
}

pub fn simulate(circuit: &Circuit, params: &[f64]) -> Result<StateVector, SimError> {
    simulate_with_cap(circuit, params, DEFAULT_QUBIT_CAP)
}

pub fn simulate_with_cap(
    circuit: &Circuit,
    params: &[f64],
    cap: usize,
) -> Result<StateVector, SimError> {
    if params.len() != circuit.n_params() {
        return Err(SimError::ParamCountMismatch {
            expected: circuit.n_params(),
            got: params.len(),
        });
    }
    let mut state = StateVector::zero_state(circuit.n_qubits(), cap)?;
    for gate in circuit.gates() {
        state.apply(gate, params);
    }
    Ok(state)
}

/// `Σ_i |a_i|² · cost(i)`, evaluating the Hamiltonian per amplitude.
pub fn expectation_diagonal(state: &StateVector, h: &IsingHamiltonian) -> Result<f64, SimError> {
    if state.n_qubits != h.n_qubits() {
        return Err(SimError::DimensionMismatch {
            state: state.n_qubits,
            operator: h.n_qubits(),
        });
    }
    Ok(block_sum(&state.amps, |i, a| {
        let p = a.norm_sqr();
        if p == 0.0 {
            0.0
        } else {
            p * h.cost_of_index(i)
        }
    }))
}

/// Expectation against a precomputed per-index cost table.
pub fn expectation_with_table(state: &StateVector, costs: &[f64]) -> Result<f64, SimError> {
    if costs.len() != state.amps.len() {
        return Err(SimError::DimensionMismatch {
            state: state.n_qubits,
            operator: costs.len().trailing_zeros() as usize,
        });
    }
    Ok(block_sum(&state.amps, |i, a| a.norm_sqr() * costs[i]))
}

/// Cost of every basis index.
pub fn cost_table(h: &IsingHamiltonian, cap: usize) -> Result<Vec<f64>, SimError> {
    if h.n_qubits() > cap {
        return Err(SimError::QubitCapExceeded {
            n_qubits: h.n_qubits(),
            cap,
        });
    }
    Ok((0..1usize << h.n_qubits())
        .into_par_iter()
        .map(|i| h.cost_of_index(i))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResult {
    pub shots: usize,
    pub counts: BTreeMap<Bitstring, usize>,
    pub seed: u64,
}

/// Multinomial sampling of basis-index outcomes, as `(index, count)` in
/// ascending index order.
pub fn sample_indices(probs: &[f64], shots: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cumulative.push(acc);
    }
    let total = acc;
    let last_nonzero = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut rng = crate::seed::rng(seed);
    let mut hits: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let i = cumulative.partition_point(|&c| c <= u).min(last_nonzero);
        *hits.entry(i).or_insert(0) += 1;
    }
    hits.into_iter().collect()
}

pub fn sample(state: &StateVector, shots: usize, seed: u64) -> SampleResult {
    let counts = sample_indices(&state.probabilities(), shots, seed)
        .into_iter()
        .map(|(i, n)| (Bitstring::from_index(i, state.n_qubits), n))
        .collect();
    SampleResult {
        shots,
        counts,
        seed,
    }
}

pub const PRUNE_BELOW: f64 = 1e-15;

pub fn exact_distribution(state: &StateVector) -> BTreeMap<Bitstring, f64> {
    state
        .amps
        .iter()
        .enumerate()
        .filter_map(|(i, a)| {
            let p = a.norm_sqr();
            (p >= PRUNE_BELOW).then(|| (Bitstring::from_index(i, state.n_qubits), p))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Angle;
    use std::f64::consts::PI;

    fn bits(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    fn fixed(gates: &[Gate], n: usize) -> StateVector {
        let mut c = Circuit::new(n);
        for &g in gates {
            c.push(g);
        }
        simulate(&c, &[]).unwrap()
    }

    #[test]
    fn empty_circuit_is_all_zeros() {
        let s = simulate(&Circuit::new(3), &[]).unwrap();
        assert_eq!(s.amplitude(&bits("000")), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn ry_pi_flips() {
        let s = fixed(&[Gate::ry(0, Angle::Fixed(PI))], 1);
        assert!((s.amplitude(&bits("1")).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bell_state() {
        let s = fixed(&[Gate::ry(0, Angle::Fixed(PI / 2.0)), Gate::cnot(0, 1)], 2);
        let d = exact_distribution(&s);
        assert_eq!(d.len(), 2);
        assert!((d[&bits("00")] - 0.5).abs() < 1e-12);
        assert!((d[&bits("11")] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cnot_direction() {
        let s = fixed(&[Gate::ry(1, Angle::Fixed(PI)), Gate::cnot(1, 0)], 2);
        assert!((s.amplitude(&bits("11")).norm() - 1.0).abs() < 1e-15);
        let s = fixed(&[Gate::ry(0, Angle::Fixed(PI)), Gate::cnot(1, 0)], 2);
        assert!((s.amplitude(&bits("10")).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn swap_moves_excitation() {
        let s = fixed(&[Gate::ry(0, Angle::Fixed(PI)), Gate::swap(0, 2)], 3);
        assert!((s.amplitude(&bits("001")).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_phases() {
        let t = 0.7;
        let s = fixed(&[Gate::rz(0, Angle::Fixed(t))], 1);
        let a = s.amplitude(&bits("0"));
        assert!((a - Complex64::from_polar(1.0, -t / 2.0)).norm() < 1e-15);

        let s = fixed(&[Gate::rx(0, Angle::Fixed(t))], 1);
        assert!((s.amplitude(&bits("1")) - Complex64::new(0.0, -(t / 2.0).sin())).norm() < 1e-15);

        let s = fixed(
            &[
                Gate::ry(0, Angle::Fixed(PI)),
                Gate::rzz(0, 1, Angle::Fixed(t)),
            ],
            2,
        );
        let a = s.amplitude(&bits("10"));
        assert!((a - Complex64::from_polar(1.0, t / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn errors() {
        let mut c = Circuit::new(1);
        c.ry_fresh(0);
        assert_eq!(
            simulate(&c, &[]),
            Err(SimError::ParamCountMismatch {
                expected: 1,
                got: 0
            })
        );
        assert!(matches!(
            simulate(&Circuit::new(25), &[]),
            Err(SimError::QubitCapExceeded { .. })
        ));
        let h = IsingHamiltonian::new(2, 0.0, [], []).unwrap();
        let s = simulate(&Circuit::new(1), &[]).unwrap();
        assert!(matches!(
            expectation_diagonal(&s, &h),
            Err(SimError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn basis_state_expectation() {
        let h = IsingHamiltonian::new(2, 0.0, [(0, -0.5)], [(0, 1, 1.0)]).unwrap();
        let s = fixed(&[Gate::ry(1, Angle::Fixed(PI))], 2);
        assert!((expectation_diagonal(&s, &h).unwrap() - (-1.5)).abs() < 1e-12);
        let table = cost_table(&h, 24).unwrap();
        assert_eq!(table, [0.5, -0.5, -1.5, 1.5]);
        assert!((expectation_with_table(&s, &table).unwrap() + 1.5).abs() < 1e-12);
    }

    #[test]
    fn sampling_basis_and_determinism() {
        let s = fixed(&[Gate::ry(0, Angle::Fixed(PI))], 2);
        let r = sample(&s, 100, 3);
        assert_eq!(r.counts.len(), 1);
        assert_eq!(r.counts[&bits("10")], 100);

        let bell = fixed(&[Gate::ry(0, Angle::Fixed(PI / 2.0)), Gate::cnot(0, 1)], 2);
        assert_eq!(sample(&bell, 1000, 9), sample(&bell, 1000, 9));
    }
}
