use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A left-to-right bitstring: character `q` is the value of logical variable
/// (qubit) `q`.
///
/// Statevector amplitude index `i` holds the basis state whose qubit `q` is
/// `(i >> q) & 1`, so the conversion to and from indices reverses the usual
/// binary reading order. Ordering is lexicographic on the string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring(Vec<bool>);

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid bitstring character {0:?} (expected '0' or '1')")]
pub struct ParseBitstringError(pub char);

impl Bitstring {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![true; n])
    }

    /// Bitstring of basis index `index` over `n` qubits.
    pub fn from_index(index: usize, n: usize) -> Self {
        Self((0..n).map(|q| (index >> q) & 1 == 1).collect())
    }

    /// Inverse of [`Bitstring::from_index`]. Only meaningful for `len() < 64`.
    pub fn to_index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .fold(0usize, |acc, (q, &b)| acc | (usize::from(b) << q))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, q: usize) -> bool {
        self.0[q]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn set(&mut self, q: usize, value: bool) {
        self.0[q] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|&b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl FromStr for Bitstring {
    type Err = ParseBitstringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ParseBitstringError(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

impl From<Vec<bool>> for Bitstring {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl Serialize for Bitstring {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
