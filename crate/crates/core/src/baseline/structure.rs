//! Kernels on combinatorial tree structure only: branch counts and
//! shortest-path lengths.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::kernel::PairwiseKernel;
use crate::path::KernelForm;
use crate::tree::GeometricTree;

/// `(linear, gaussian)` branch count kernels: `|V1|·|V2|` and
/// `exp(-(|V1| - |V2|)²)`.
pub fn branchcount_kernels(t1: &GeometricTree, t2: &GeometricTree) -> (f64, f64) {
    let (c1, c2) = (t1.len() as f64, t2.len() as f64);
    (c1 * c2, (-(c1 - c2) * (c1 - c2)).exp())
}

pub(crate) struct Branchcount {
    form: KernelForm,
    counts: Vec<f64>,
}

impl Branchcount {
    pub fn new(trees: &[&GeometricTree], form: KernelForm) -> Self {
        Self { form, counts: trees.iter().map(|t| t.len() as f64).collect() }
    }
}

impl PairwiseKernel for Branchcount {
    fn eval(&self, i: usize, j: usize) -> f64 {
        let (c1, c2) = (self.counts[i], self.counts[j]);
        match self.form {
            KernelForm::Linear => c1 * c2,
            KernelForm::Gaussian => (-(c1 - c2) * (c1 - c2)).exp(),
        }
    }
}

/// How two path lengths are compared.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthKernel {
    /// 1 if the lengths are equal, else 0.
    #[default]
    Delta,
    /// Product of the lengths.
    Linear,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShortestPathSpec {
    #[serde(default)]
    pub length_kernel: LengthKernel,
}

/// Histogram of path lengths (edge counts) over all ordered node pairs,
/// diagonal included: `hist[ℓ]` pairs at distance `ℓ`.
pub fn path_length_histogram(tree: &GeometricTree) -> Vec<u64> {
    let len = tree.len();
    let neighbours = |v: usize| tree.children(v).iter().copied().chain(tree.parent(v));
    let mut hist = vec![0u64; 2 * tree.height() - 1];
    let mut dist = vec![usize::MAX; len];
    let mut queue = VecDeque::new();
    for source in 0..len {
        dist.fill(usize::MAX);
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            hist[dist[v]] += 1;
            for w in neighbours(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    while hist.len() > 1 && hist.last() == Some(&0) {
        hist.pop();
    }
    hist
}

pub fn shortest_path_kernel(t1: &GeometricTree, t2: &GeometricTree, spec: &ShortestPathSpec) -> f64 {
    ShortestPath::new(&[t1, t2], spec).eval(0, 1)
}

pub(crate) struct ShortestPath {
    length_kernel: LengthKernel,
    histograms: Vec<Vec<u64>>,
}

impl ShortestPath {
    pub fn new(trees: &[&GeometricTree], spec: &ShortestPathSpec) -> Self {
        Self {
            length_kernel: spec.length_kernel,
            histograms: trees.iter().map(|t| path_length_histogram(t)).collect(),
        }
    }
}

impl PairwiseKernel for ShortestPath {
    fn eval(&self, i: usize, j: usize) -> f64 {
        let (h1, h2) = (&self.histograms[i], &self.histograms[j]);
        match self.length_kernel {
            LengthKernel::Delta => h1.iter().zip(h2).map(|(a, b)| (a * b) as f64).sum(),
            LengthKernel::Linear => {
                let total = |h: &[u64]| h.iter().enumerate().map(|(l, &c)| (l as u64 * c) as f64).sum::<f64>();
                total(h1) * total(h2)
            }
        }
    }
}
