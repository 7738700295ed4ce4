use std::collections::HashMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::dataset::Dataset;
use crate::error::Result;
use crate::geometry::star_area;
use crate::labels::Assignment;
use crate::model::{cyclic_arrangements, reorder_row};
use crate::stats::{column, covariance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub instances: usize,
    pub features: usize,
    pub labels: usize,
    pub cardinality: f64,
    pub density: f64,
    /// `1 - 1/MaxIR`, where MaxIR is the most over the least frequent
    /// label count; 1 when some label never occurs.
    pub imbalance: f64,
    pub labelsets: usize,
    /// Labelsets that occur exactly once.
    pub single_labelsets: usize,
    pub max_labels: usize,
}

pub fn assignment_stats(y: &Assignment, features: usize) -> DatasetStats {
    let presence = y.presence();
    let m = presence.len();
    let n = y.n_labels();
    let per_row: Vec<usize> = presence.iter().map(|r| r.iter().filter(|&&b| b).count()).collect();
    let cardinality = per_row.iter().sum::<usize>() as f64 / m.max(1) as f64;
    let counts: Vec<usize> = (0..n).map(|j| presence.iter().filter(|r| r[j]).count()).collect();
    let max = counts.iter().copied().max().unwrap_or(0);
    let min = counts.iter().copied().min().unwrap_or(0);
    let imbalance = if max == 0 { 0.0 } else { 1.0 - min as f64 / max as f64 };
    let mut sets: HashMap<&Vec<bool>, usize> = HashMap::new();
    for r in &presence {
        *sets.entry(r).or_default() += 1;
    }
    DatasetStats {
        instances: m,
        features,
        labels: n,
        cardinality,
        density: if n == 0 { 0.0 } else { cardinality / n as f64 },
        imbalance,
        labelsets: sets.len(),
        single_labelsets: sets.values().filter(|&&c| c == 1).count(),
        max_labels: per_row.iter().copied().max().unwrap_or(0),
    }
}

pub fn dataset_stats(ds: &Dataset) -> Result<DatasetStats> {
    Ok(assignment_stats(ds.assignment()?, ds.n_domains()))
}

/// Sample covariance matrix of the columns.
pub fn covariance_matrix(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = x.first().map_or(0, Vec::len);
    let cols: Vec<Vec<f64>> = (0..d).map(|k| column(x, k)).collect();
    (0..d)
        .map(|a| (0..d).map(|b| covariance(&cols[a], &cols[b])).collect())
        .collect()
}

pub fn all_covariances_positive(x: &[Vec<f64>]) -> bool {
    covariance_matrix(x).iter().flatten().all(|&c| c > 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arrangements {
    All,
    Sample { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrangementResult {
    pub arrangement: Vec<usize>,
    pub pairs: usize,
    pub discarded: usize,
    pub violations: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub arrangements: Vec<ArrangementResult>,
    pub total_pairs: usize,
    pub total_violations: usize,
    /// Violation rate averaged over arrangements, weighted by tested pairs.
    pub weighted_rate: f64,
}

/// A pair violates the sum/area relation when the area order disagrees
/// with the sum order. Pairs with equal sums are not tested.
pub fn pair_violates(sum_a: f64, sum_b: f64, area_a: f64, area_b: f64) -> bool {
    let ds = sum_a - sum_b;
    let da = area_a - area_b;
    ds.signum() != da.signum() || da == 0.0
}

const SUM_TIE: f64 = 1e-12;

/// Checks, for each cyclic arrangement of the domains, whether ordering
/// subjects by polygon area agrees with ordering them by sum-score. Uses
/// the unit-scaled scores for both.
pub fn sum_area_violation_test(x: &[Vec<f64>], arrangements: Arrangements) -> ViolationReport {
    let d = x.first().map_or(0, Vec::len);
    let mut all = cyclic_arrangements(d);
    if let Arrangements::Sample { count, seed } = arrangements {
        if count < all.len() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pick = sample(&mut rng, all.len(), count).into_vec();
            pick.sort_unstable();
            all = pick.into_iter().map(|i| all[i].clone()).collect();
        }
    }
    let sums: Vec<f64> = x.iter().map(|r| r.iter().sum()).collect();
    let mut results = Vec::with_capacity(all.len());
    for arr in all {
        let areas: Vec<f64> = x.iter().map(|r| star_area(&reorder_row(r, &arr))).collect();
        let (mut pairs, mut discarded, mut violations) = (0, 0, 0);
        for a in 0..x.len() {
            for b in a + 1..x.len() {
                if (sums[a] - sums[b]).abs() <= SUM_TIE {
                    discarded += 1;
                    continue;
                }
                pairs += 1;
                if pair_violates(sums[a], sums[b], areas[a], areas[b]) {
                    violations += 1;
                }
            }
        }
        results.push(ArrangementResult {
            arrangement: arr,
            pairs,
            discarded,
            violations,
            rate: if pairs == 0 { 0.0 } else { violations as f64 / pairs as f64 },
        });
    }
    let total_pairs: usize = results.iter().map(|r| r.pairs).sum();
    let total_violations: usize = results.iter().map(|r| r.violations).sum();
    ViolationReport {
        weighted_rate: if total_pairs == 0 {
            0.0
        } else {
            total_violations as f64 / total_pairs as f64
        },
        arrangements: results,
        total_pairs,
        total_violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn imbalance_of_41_59_split() {
        let classes: Vec<usize> = (0..100).map(|i| usize::from(i >= 41)).collect();
        let s = assignment_stats(&Assignment::multiclass(2, classes).unwrap(), 4);
        assert!((s.imbalance - (1.0 - 41.0 / 59.0)).abs() < 1e-12);
        assert_eq!(s.cardinality, 1.0);
        assert_eq!(s.labelsets, 2);
        assert_eq!(s.single_labelsets, 0);
    }

    #[test]
    fn identical_labelsets() {
        let rows = vec![vec![true, false, true]; 5];
        let s = assignment_stats(&Assignment::multilabel(3, rows).unwrap(), 2);
        assert_eq!(s.labelsets, 1);
        assert_eq!(s.single_labelsets, 0);
        assert_eq!(s.max_labels, 2);
        assert_eq!(s.imbalance, 1.0);
    }

    #[test]
    fn published_violation_pair_is_flagged() {
        assert!(pair_violates(4.042, 4.067, 1.548, 1.543));
        assert!(!pair_violates(4.042, 4.067, 1.543, 1.548));
    }
}
