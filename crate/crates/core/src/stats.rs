//! Kernel two-sample test for equal means in feature space, and a
//! nearest-class-mean classifier, both working from a Gram matrix alone.

use std::collections::{BTreeMap, HashSet};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::statistics::{Data, OrderStatistics};

use crate::error::{Error, Result};

/// Permutation count used when none is given.
pub const DEFAULT_PERMUTATIONS: usize = 10_000;

/// Permuted statistics within this relative distance of the observed squared
/// statistic count as ties (and thus as "at least as extreme").
const TIE_TOLERANCE: f64 = 1e-10;

const QUANTILES: [(&str, f64); 5] = [("q05", 0.05), ("q25", 0.25), ("q50", 0.5), ("q75", 0.75), ("q95", 0.95)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSizes {
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub quantiles: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSampleResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_permutations: usize,
    pub seed: u64,
    pub sample_sizes: SampleSizes,
    pub permutation_summary: PermutationSummary,
}

fn validate(g: &DMatrix<f64>, groups: &[(&str, &[usize])]) -> Result<()> {
    if !g.is_square() {
        return Err(Error::GramFormat(format!("matrix is {}x{}", g.nrows(), g.ncols())));
    }
    let mut seen = HashSet::new();
    for (name, idx) in groups {
        if idx.is_empty() {
            return Err(Error::InvalidSample(format!("sample {name} is empty")));
        }
        for &i in *idx {
            if i >= g.nrows() {
                return Err(Error::InvalidSample(format!("index {i} in {name} outside a {0}x{0} matrix", g.nrows())));
            }
            if !seen.insert(i) {
                return Err(Error::InvalidSample(format!("index {i} appears more than once")));
            }
        }
    }
    Ok(())
}

fn block_sum(g: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    rows.iter().map(|&i| cols.iter().map(|&j| g[(i, j)]).sum::<f64>()).sum()
}

/// `‖μ̂_A − μ̂_B‖²` from kernel values, not clamped.
fn squared_distance(g: &DMatrix<f64>, a: &[usize], b: &[usize]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    block_sum(g, a, a) / (na * na) - 2.0 * block_sum(g, a, b) / (na * nb) + block_sum(g, b, b) / (nb * nb)
}

/// Distance between the feature-space means of samples `a` and `b`. Negative
/// squared values from round-off are clamped to 0.
pub fn mean_distance_statistic(g: &DMatrix<f64>, a: &[usize], b: &[usize]) -> Result<f64> {
    validate(g, &[("A", a), ("B", b)])?;
    Ok(squared_distance(g, a, b).max(0.0).sqrt())
}

fn sorted(idx: &[usize]) -> Vec<usize> {
    let mut v = idx.to_vec();
    v.sort_unstable();
    v
}

/// Monte-Carlo permutation test of `μ_A = μ_B`. Each of the `n_permutations`
/// relabelings keeps the sample sizes; `p = (#{T_i ≥ T_0} + 1) / (N + 1)`.
/// The permutation sequence depends only on `seed`; statistics are evaluated
/// in parallel on the current rayon pool.
pub fn permutation_test(
    g: &DMatrix<f64>,
    a: &[usize],
    b: &[usize],
    n_permutations: usize,
    seed: u64,
) -> Result<TwoSampleResult> {
    validate(g, &[("A", a), ("B", b)])?;
    if n_permutations == 0 {
        return Err(Error::InvalidConfig("need at least one permutation".into()));
    }
    // Statistics are computed on sorted index sets so that a relabeling equal
    // to the observed split reproduces T_0 bit for bit.
    let observed_sq = squared_distance(g, &sorted(a), &sorted(b)).max(0.0);
    let scale = (0..g.nrows()).map(|i| g[(i, i)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let threshold = observed_sq - TIE_TOLERANCE * scale;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pooled: Vec<usize> = a.iter().chain(b).copied().collect();
    let splits: Vec<Vec<usize>> = (0..n_permutations)
        .map(|_| {
            pooled.shuffle(&mut rng);
            pooled.clone()
        })
        .collect();
    let na = a.len();
    let permuted: Vec<f64> = splits
        .par_iter()
        .map(|perm| squared_distance(g, &sorted(&perm[..na]), &sorted(&perm[na..])).max(0.0))
        .collect();

    let exceed = permuted.iter().filter(|&&t| t >= threshold).count();
    let stats: Vec<f64> = permuted.iter().map(|t| t.sqrt()).collect();
    Ok(TwoSampleResult {
        statistic: observed_sq.sqrt(),
        p_value: (exceed + 1) as f64 / (n_permutations + 1) as f64,
        n_permutations,
        seed,
        sample_sizes: SampleSizes { a: a.len(), b: b.len() },
        permutation_summary: summarize(stats),
    })
}

fn summarize(stats: Vec<f64>) -> PermutationSummary {
    let mean = stats.iter().sum::<f64>() / stats.len() as f64;
    let min = stats.iter().copied().fold(f64::INFINITY, f64::min);
    let max = stats.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut data = Data::new(stats);
    let quantiles = QUANTILES.iter().map(|&(name, q)| (name.to_string(), data.quantile(q))).collect();
    PermutationSummary { min, max, mean, quantiles }
}

/// Class of a sample; label 0 in files is `A`, label 1 is `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Class {
    A,
    B,
}

/// Assigns each query to the class whose feature-space mean is closer.
/// Exact ties go to `A`.
pub fn nearest_mean_classify(g: &DMatrix<f64>, a: &[usize], b: &[usize], queries: &[usize]) -> Result<Vec<Class>> {
    validate(g, &[("A", a), ("B", b)])?;
    if !queries.is_empty() {
        validate(g, &[("A", a), ("B", b), ("query", queries)])?;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let self_a = block_sum(g, a, a) / (na * na);
    let self_b = block_sum(g, b, b) / (nb * nb);
    Ok(queries
        .iter()
        .map(|&z| {
            let zz = g[(z, z)];
            let to_a = zz - 2.0 * a.iter().map(|&i| g[(z, i)]).sum::<f64>() / na + self_a;
            let to_b = zz - 2.0 * b.iter().map(|&j| g[(z, j)]).sum::<f64>() / nb + self_b;
            if to_a <= to_b {
                Class::A
            } else {
                Class::B
            }
        })
        .collect())
}
