use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::problem::{IsingHamiltonian, ProblemError};
use crate::Bitstring;

/// Rounds to hundredths, half away from zero, judged on the shortest decimal
/// representation of `x` (so `1.005` becomes `1.01`). Returns hundredths.
pub fn round_to_hundredths(x: f64) -> i64 {
    let text = format!("{}", x.abs());
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    let digits: Vec<i64> = frac_part
        .bytes()
        .take(3)
        .map(|b| i64::from(b - b'0'))
        .chain(std::iter::repeat(0))
        .take(3)
        .collect();
    let magnitude = int_part
        .parse::<i64>()
        .ok()
        .and_then(|i| i.checked_mul(100))
        .map(|h| h + digits[0] * 10 + digits[1] + i64::from(digits[2] >= 5));
    let magnitude = magnitude.unwrap_or_else(|| (x.abs() * 100.0).round() as i64);
    if x < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionSource {
    Sampled,
    ExactWeighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEntry {
    pub bitstring: Bitstring,
    pub cost: f64,
    /// Shot count, or probability for exact distributions.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBin {
    pub cost: f64,
    pub count: f64,
}

/// Weighted costs of measured bitstrings, with 2-decimal histogram bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostDistribution {
    pub source: DistributionSource,
    pub total: f64,
    pub bins: Vec<CostBin>,
    /// Unrounded costs, in bitstring order.
    pub entries: Vec<CostEntry>,
}

impl CostDistribution {
    fn from_weights<'a>(
        source: DistributionSource,
        weights: impl Iterator<Item = (&'a Bitstring, f64)>,
        h: &IsingHamiltonian,
    ) -> Result<Self, ProblemError> {
        let mut entries = Vec::new();
        let mut bins: BTreeMap<i64, f64> = BTreeMap::new();
        let mut total = 0.0;
        for (b, w) in weights {
            let cost = h.cost_of_bitstring(b)?;
            *bins.entry(round_to_hundredths(cost)).or_insert(0.0) += w;
            total += w;
            entries.push(CostEntry {
                bitstring: b.clone(),
                cost,
                weight: w,
            });
        }
        Ok(Self {
            source,
            total,
            bins: bins
                .into_iter()
                .map(|(k, count)| CostBin {
                    cost: k as f64 / 100.0,
                    count,
                })
                .collect(),
            entries,
        })
    }

    pub fn from_counts(
        counts: &BTreeMap<Bitstring, usize>,
        h: &IsingHamiltonian,
    ) -> Result<Self, ProblemError> {
        Self::from_weights(
            DistributionSource::Sampled,
            counts.iter().map(|(b, &n)| (b, n as f64)),
            h,
        )
    }

    pub fn from_probabilities(
        probs: &BTreeMap<Bitstring, f64>,
        h: &IsingHamiltonian,
    ) -> Result<Self, ProblemError> {
        Self::from_weights(
            DistributionSource::ExactWeighted,
            probs.iter().map(|(b, &p)| (b, p)),
            h,
        )
    }

    /// Lowest cost with its bitstring; exact ties go to the
    /// lexicographically smallest bitstring.
    pub fn min_entry(&self) -> Option<&CostEntry> {
        self.entries
            .iter()
            .fold(None, |best: Option<&CostEntry>, e| match best {
                Some(b) if b.cost <= e.cost => Some(b),
                _ => Some(e),
            })
    }

    pub fn mean_cost(&self) -> f64 {
        self.entries.iter().map(|e| e.cost * e.weight).sum::<f64>() / self.total
    }

    /// Writes `cost_bin,count`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "cost_bin,count")?;
        for bin in &self.bins {
            writeln!(out, "{:.2},{}", bin.cost, bin.count)?;
        }
        Ok(())
    }
}

/// Percentage of mass whose unrounded cost is strictly below `offset`.
pub fn pct_below_offset(dist: &CostDistribution, offset: f64) -> f64 {
    if dist.total <= 0.0 {
        return 0.0;
    }
    let below: f64 = dist
        .entries
        .iter()
        .filter(|e| e.cost < offset)
        .map(|e| e.weight)
        .sum();
    100.0 * below / dist.total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> IsingHamiltonian {
        IsingHamiltonian::new(2, 0.0, [], [(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn rounding_rule() {
        assert_eq!(round_to_hundredths(1.234), 123);
        assert_eq!(round_to_hundredths(1.005), 101);
        assert_eq!(round_to_hundredths(1.004), 100);
        assert_eq!(round_to_hundredths(-1.005), -101);
        assert_eq!(round_to_hundredths(-0.004), 0);
        assert_eq!(round_to_hundredths(2.0), 200);
        assert_eq!(round_to_hundredths(0.125), 13);
        assert_eq!(round_to_hundredths(1e-20), 0);
    }

    #[test]
    fn single_bitstring_bin() {
        let h = IsingHamiltonian::new(1, 1.234, [], []).unwrap();
        let counts = BTreeMap::from([(Bitstring::zeros(1), 50)]);
        let d = CostDistribution::from_counts(&counts, &h).unwrap();
        assert_eq!(d.bins, [CostBin { cost: 1.23, count: 50.0 }]);
        assert_eq!(d.total, 50.0);
    }

    #[test]
    fn uniform_two_qubit_zz() {
        let probs: BTreeMap<Bitstring, f64> = (0..4)
            .map(|i| (Bitstring::from_index(i, 2), 0.25))
            .collect();
        let d = CostDistribution::from_probabilities(&probs, &toy()).unwrap();
        assert_eq!(
            d.bins,
            [
                CostBin { cost: -1.0, count: 0.5 },
                CostBin { cost: 1.0, count: 0.5 }
            ]
        );
        assert_eq!(pct_below_offset(&d, 0.0), 50.0);
        assert_eq!(d.min_entry().unwrap().bitstring.to_string(), "01");
    }

    #[test]
    fn mass_at_offset_is_not_below() {
        let h = IsingHamiltonian::new(1, 2.0, [], []).unwrap();
        let counts = BTreeMap::from([(Bitstring::zeros(1), 7)]);
        let d = CostDistribution::from_counts(&counts, &h).unwrap();
        assert_eq!(pct_below_offset(&d, h.offset()), 0.0);
    }

    #[test]
    fn length_mismatch() {
        let counts = BTreeMap::from([(Bitstring::zeros(3), 1)]);
        assert!(matches!(
            CostDistribution::from_counts(&counts, &toy()),
            Err(ProblemError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn csv_export() {
        let counts = BTreeMap::from([(Bitstring::zeros(2), 3)]);
        let d = CostDistribution::from_counts(&counts, &toy()).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "cost_bin,count\n1.00,3\n");
    }
}
