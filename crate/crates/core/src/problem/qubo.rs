use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ProblemError;
use crate::Bitstring;

/// Quadratic polynomial over binary variables.
///
/// Kept canonical: `x² = x` is folded into the linear part on insertion and
/// pairs are stored as `(low, high)`, so the quadratic map never holds a
/// self-pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "QuboWire", try_from = "QuboWire")]
pub struct QuboProblem {
    n_vars: usize,
    constant: f64,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
}

impl QuboProblem {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            constant: 0.0,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn linear(&self) -> &BTreeMap<usize, f64> {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quadratic
    }

    pub fn add_constant(&mut self, value: f64) {
        self.constant += value;
    }

    pub fn add_linear(&mut self, q: usize, value: f64) {
        assert!(q < self.n_vars, "variable {q} out of range");
        *self.linear.entry(q).or_insert(0.0) += value;
    }

    /// Adds `value · x_p · x_q`; `p == q` lands in the linear part.
    pub fn add_quadratic(&mut self, p: usize, q: usize, value: f64) {
        assert!(p < self.n_vars && q < self.n_vars, "pair ({p},{q}) out of range");
        if p == q {
            self.add_linear(p, value);
        } else {
            *self.quadratic.entry((p.min(q), p.max(q))).or_insert(0.0) += value;
        }
    }

    /// Adds `weight · (Σ c_i x_i + constant)²`.
    pub fn add_squared_form(&mut self, terms: &[(usize, f64)], constant: f64, weight: f64) {
        if weight == 0.0 {
            return;
        }
        self.add_constant(weight * constant * constant);
        for (i, &(p, cp)) in terms.iter().enumerate() {
            self.add_linear(p, weight * 2.0 * constant * cp);
            self.add_quadratic(p, p, weight * cp * cp);
            for &(q, cq) in &terms[i + 1..] {
                self.add_quadratic(p, q, weight * 2.0 * cp * cq);
            }
        }
    }

    pub fn evaluate(&self, bits: &Bitstring) -> Result<f64, ProblemError> {
        if bits.len() != self.n_vars {
            return Err(ProblemError::LengthMismatch {
                expected: self.n_vars,
                got: bits.len(),
            });
        }
        let x = bits.bits();
        let lin: f64 = self
            .linear
            .iter()
            .filter(|(&q, _)| x[q])
            .map(|(_, v)| v)
            .sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .filter(|(&(p, q), _)| x[p] && x[q])
            .map(|(_, v)| v)
            .sum();
        Ok(self.constant + lin + quad)
    }
}

/// JSON shape: `{n_vars, constant, linear: [[q, c]], quadratic: [[p, q, c]]}`.
#[derive(Serialize, Deserialize)]
struct QuboWire {
    n_vars: usize,
    constant: f64,
    linear: Vec<(usize, f64)>,
    quadratic: Vec<(usize, usize, f64)>,
}

impl From<QuboProblem> for QuboWire {
    fn from(q: QuboProblem) -> Self {
        Self {
            n_vars: q.n_vars,
            constant: q.constant,
            linear: q.linear.into_iter().collect(),
            quadratic: q
                .quadratic
                .into_iter()
                .map(|((p, r), c)| (p, r, c))
                .collect(),
        }
    }
}

impl TryFrom<QuboWire> for QuboProblem {
    type Error = String;

    fn try_from(w: QuboWire) -> Result<Self, Self::Error> {
        let mut q = QuboProblem::new(w.n_vars);
        q.constant = w.constant;
        for (v, c) in w.linear {
            if v >= w.n_vars {
                return Err(format!("linear index {v} out of range"));
            }
            q.add_linear(v, c);
        }
        for (a, b, c) in w.quadratic {
            if a >= w.n_vars || b >= w.n_vars {
                return Err(format!("quadratic pair ({a},{b}) out of range"));
            }
            q.add_quadratic(a, b, c);
        }
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_pairs_fold_into_linear() {
        let mut q = QuboProblem::new(2);
        q.add_quadratic(1, 1, 3.0);
        q.add_quadratic(1, 0, 2.0);
        assert!(q.quadratic().keys().all(|(p, r)| p < r));
        assert_eq!(q.linear()[&1], 3.0);
        assert_eq!(q.quadratic()[&(0, 1)], 2.0);
    }

    #[test]
    fn squared_form_matches_direct_evaluation() {
        let mut q = QuboProblem::new(3);
        let terms = [(0, 0.5), (1, -1.5), (2, 2.0)];
        q.add_squared_form(&terms, -0.25, 1.7);
        for i in 0..8 {
            let b = Bitstring::from_index(i, 3);
            let lin: f64 = terms
                .iter()
                .map(|&(v, c)| if b.bit(v) { c } else { 0.0 })
                .sum::<f64>()
                - 0.25;
            let direct = 1.7 * lin * lin;
            assert!((q.evaluate(&b).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn json_shape() {
        let mut q = QuboProblem::new(2);
        q.add_constant(1.5);
        q.add_linear(0, -1.0);
        q.add_quadratic(0, 1, 0.25);
        let text = serde_json::to_string(&q).unwrap();
        assert_eq!(
            text,
            r#"{"n_vars":2,"constant":1.5,"linear":[[0,-1.0]],"quadratic":[[0,1,0.25]]}"#
        );
        let back: QuboProblem = serde_json::from_str(&text).unwrap();
        assert_eq!(back, q);
        assert!(serde_json::from_str::<QuboProblem>(
            r#"{"n_vars":1,"constant":0,"linear":[[3,1.0]],"quadratic":[]}"#
        )
        .is_err());
    }

    #[test]
    fn evaluate_checks_length() {
        let q = QuboProblem::new(3);
        assert_eq!(
            q.evaluate(&Bitstring::zeros(2)),
            Err(ProblemError::LengthMismatch {
                expected: 3,
                got: 2
            })
        );
    }
}
