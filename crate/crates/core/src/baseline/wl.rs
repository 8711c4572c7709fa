//! Weisfeiler-Lehman subtree kernel on the undirected tree graph, starting
//! from node degrees as labels.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::kernel::PairwiseKernel;
use crate::tree::GeometricTree;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WlConfig {
    #[serde(default = "default_iterations")]
    pub iterations: usize,
}

fn default_iterations() -> usize {
    10
}

impl Default for WlConfig {
    fn default() -> Self {
        Self { iterations: default_iterations() }
    }
}

/// Sparse label histogram sorted by label.
type Histogram = Vec<(u32, u64)>;

fn histogram(labels: &[u32]) -> Histogram {
    let mut sorted = labels.to_vec();
    sorted.sort_unstable();
    let mut out: Histogram = Vec::new();
    for l in sorted {
        match out.last_mut() {
            Some((last, c)) if *last == l => *c += 1,
            _ => out.push((l, 1)),
        }
    }
    out
}

fn histogram_dot(h1: &Histogram, h2: &Histogram) -> u64 {
    let (mut i, mut j, mut total) = (0, 0, 0);
    while i < h1.len() && j < h2.len() {
        match h1[i].0.cmp(&h2[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                total += h1[i].1 * h2[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    total
}

/// Per-tree label histograms for rounds `0..=iterations`, with one label
/// dictionary per round shared across all given trees.
pub(crate) struct WeisfeilerLehman {
    rounds: Vec<Vec<Histogram>>,
}

impl WeisfeilerLehman {
    pub fn new(trees: &[&GeometricTree], cfg: &WlConfig) -> Self {
        let mut labels: Vec<Vec<u32>> =
            trees.iter().map(|t| (0..t.len()).map(|v| t.degree(v) as u32).collect()).collect();
        let mut rounds = Vec::with_capacity(cfg.iterations + 1);
        rounds.push(labels.iter().map(|l| histogram(l)).collect());
        for _ in 0..cfg.iterations {
            let mut dictionary: HashMap<(u32, Vec<u32>), u32> = HashMap::new();
            labels = trees
                .iter()
                .zip(&labels)
                .map(|(t, old)| {
                    (0..t.len())
                        .map(|v| {
                            let mut nbrs: Vec<u32> =
                                t.children(v).iter().chain(t.parent(v).as_ref()).map(|&w| old[w]).collect();
                            nbrs.sort_unstable();
                            let next = dictionary.len() as u32;
                            *dictionary.entry((old[v], nbrs)).or_insert(next)
                        })
                        .collect()
                })
                .collect();
            rounds.push(labels.iter().map(|l| histogram(l)).collect());
        }
        Self { rounds }
    }
}

impl PairwiseKernel for WeisfeilerLehman {
    fn eval(&self, i: usize, j: usize) -> f64 {
        self.rounds.iter().map(|r| histogram_dot(&r[i], &r[j]) as f64).sum()
    }
}

pub fn weisfeiler_lehman_kernel(t1: &GeometricTree, t2: &GeometricTree, cfg: &WlConfig) -> f64 {
    WeisfeilerLehman::new(&[t1, t2], cfg).eval(0, 1)
}
