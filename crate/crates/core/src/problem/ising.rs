use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ProblemError, QuboProblem};
use crate::Bitstring;

/// Diagonal Ising Hamiltonian `c·I + Σ h_q Z_q + Σ J_pq Z_p Z_q`.
///
/// Bit value 1 is the `Z = -1` eigenstate, matching `x = (1 - Z)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "IsingWire", try_from = "IsingWire")]
pub struct IsingHamiltonian {
    n_qubits: usize,
    identity_coeff: f64,
    /// Sorted by qubit, zero coefficients dropped.
    h: Vec<(usize, f64)>,
    /// Sorted by `(p, q)` with `p < q`, zero coefficients dropped.
    j: Vec<(usize, usize, f64)>,
}

impl IsingHamiltonian {
    /// Builds a Hamiltonian, summing repeated terms. Pairs may be given in
    /// either order; self-pairs are rejected.
    pub fn new(
        n_qubits: usize,
        identity_coeff: f64,
        h: impl IntoIterator<Item = (usize, f64)>,
        j: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, ProblemError> {
        let mut hm: BTreeMap<usize, f64> = BTreeMap::new();
        for (q, c) in h {
            if q >= n_qubits {
                return Err(ProblemError::DimensionMismatch(format!(
                    "Z term on qubit {q} of {n_qubits}"
                )));
            }
            *hm.entry(q).or_insert(0.0) += c;
        }
        let mut jm: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (p, q, c) in j {
            if p == q || p >= n_qubits || q >= n_qubits {
                return Err(ProblemError::DimensionMismatch(format!(
                    "invalid ZZ pair ({p},{q}) on {n_qubits} qubits"
                )));
            }
            *jm.entry((p.min(q), p.max(q))).or_insert(0.0) += c;
        }
        Ok(Self {
            n_qubits,
            identity_coeff,
            h: hm.into_iter().filter(|&(_, c)| c != 0.0).collect(),
            j: jm
                .into_iter()
                .filter(|&(_, c)| c != 0.0)
                .map(|((p, q), c)| (p, q, c))
                .collect(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn identity_coeff(&self) -> f64 {
        self.identity_coeff
    }

    pub fn h(&self) -> &[(usize, f64)] {
        &self.h
    }

    pub fn j(&self) -> &[(usize, usize, f64)] {
        &self.j
    }

    pub fn n_terms(&self) -> usize {
        self.h.len() + self.j.len()
    }

    /// Mean cost under independent uniform bits, which is the identity
    /// coefficient since every Z and ZZ term averages to zero.
    pub fn offset(&self) -> f64 {
        self.identity_coeff
    }

    pub fn cost_of_bitstring(&self, b: &Bitstring) -> Result<f64, ProblemError> {
        if b.len() != self.n_qubits {
            return Err(ProblemError::LengthMismatch {
                expected: self.n_qubits,
                got: b.len(),
            });
        }
        let z = |q: usize| if b.bit(q) { -1.0 } else { 1.0 };
        let lin: f64 = self.h.iter().map(|&(q, c)| c * z(q)).sum();
        let quad: f64 = self.j.iter().map(|&(p, q, c)| c * z(p) * z(q)).sum();
        Ok(self.identity_coeff + lin + quad)
    }

    /// Cost of the basis state with amplitude index `index`.
    #[inline]
    pub fn cost_of_index(&self, index: usize) -> f64 {
        let mut e = self.identity_coeff;
        for &(q, c) in &self.h {
            e += if (index >> q) & 1 == 0 { c } else { -c };
        }
        for &(p, q, c) in &self.j {
            e += if ((index >> p) ^ (index >> q)) & 1 == 0 { c } else { -c };
        }
        e
    }

    /// Per-qubit coupling lists `(neighbor, J)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n_qubits];
        for &(p, q, c) in &self.j {
            adj[p].push((q, c));
            adj[q].push((p, c));
        }
        adj
    }

    /// Dense per-qubit field vector.
    pub fn field_vector(&self) -> Vec<f64> {
        let mut f = vec![0.0; self.n_qubits];
        for &(q, c) in &self.h {
            f[q] = c;
        }
        f
    }
}

/// Exact rewrite under `x = (1 - Z)/2`.
pub fn qubo_to_ising(qubo: &QuboProblem) -> IsingHamiltonian {
    let mut identity = qubo.constant();
    let mut h: Vec<(usize, f64)> = Vec::new();
    let mut j: Vec<(usize, usize, f64)> = Vec::new();
    for (&q, &a) in qubo.linear() {
        identity += 0.5 * a;
        h.push((q, -0.5 * a));
    }
    for (&(p, q), &b) in qubo.quadratic() {
        identity += 0.25 * b;
        h.push((p, -0.25 * b));
        h.push((q, -0.25 * b));
        j.push((p, q, 0.25 * b));
    }
    IsingHamiltonian::new(qubo.n_vars(), identity, h, j)
        .expect("canonical qubo has valid indices")
}

#[derive(Serialize, Deserialize)]
struct IsingWire {
    n_qubits: usize,
    identity: f64,
    h: Vec<(usize, f64)>,
    j: Vec<(usize, usize, f64)>,
}

impl From<IsingHamiltonian> for IsingWire {
    fn from(h: IsingHamiltonian) -> Self {
        Self {
            n_qubits: h.n_qubits,
            identity: h.identity_coeff,
            h: h.h,
            j: h.j,
        }
    }
}

impl TryFrom<IsingWire> for IsingHamiltonian {
    type Error = ProblemError;

    fn try_from(w: IsingWire) -> Result<Self, Self::Error> {
        IsingHamiltonian::new(w.n_qubits, w.identity, w.h, w.j)
    }
}
