use super::{common_dims, NodeKernel, NodeKernelSpec};
use crate::error::Result;
use crate::kernel::PairwiseKernel;
use crate::tree::{GeometricTree, NodePath};

/// Sum of position-aligned node kernels for paths of equal length, 0
/// otherwise.
pub fn node_path_kernel(
    t1: &GeometricTree,
    p1: &NodePath,
    t2: &GeometricTree,
    p2: &NodePath,
    spec: &NodeKernelSpec,
) -> Result<f64> {
    let (n, d) = common_dims(&[t1, t2], spec.use_attributes)?;
    let kernel = spec.resolve(n, d)?;
    for (t, p) in [(t1, p1), (t2, p2)] {
        if let Some(&v) = p.nodes().iter().find(|&&v| v >= t.len()) {
            return Err(crate::error::Error::InvalidIndex { index: v, len: t.len() });
        }
    }
    Ok(aligned_sum(&kernel, t1, p1.nodes(), t2, p2.nodes()))
}

pub(crate) fn aligned_sum(kernel: &NodeKernel, t1: &GeometricTree, p1: &[usize], t2: &GeometricTree, p2: &[usize]) -> f64 {
    if p1.len() != p2.len() {
        return 0.0;
    }
    p1.iter().zip(p2).map(|(&v1, &v2)| kernel.eval_nodes(t1, v1, t2, v2)).sum()
}

/// All node-paths of one tree grouped by length. `buckets[L - 1]` holds the
/// paths with `L` nodes, concatenated.
struct PathBuckets {
    buckets: Vec<Vec<usize>>,
}

impl PathBuckets {
    fn new(tree: &GeometricTree) -> Self {
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); 2 * tree.height() - 1];
        for i in 0..tree.len() {
            for j in 0..tree.len() {
                let path = tree.node_path(i, j).expect("indices in range");
                buckets[path.len() - 1].extend_from_slice(path.nodes());
            }
        }
        Self { buckets }
    }
}

/// All-pairs node-path kernel. Paths are bucketed by length and only
/// equal-length buckets are compared; node kernel values are looked up from a
/// per-pair matrix.
pub(crate) struct AllPairsNodePath<'a> {
    trees: Vec<&'a GeometricTree>,
    kernel: NodeKernel,
    paths: Vec<PathBuckets>,
}

impl<'a> AllPairsNodePath<'a> {
    pub fn new(trees: &[&'a GeometricTree], spec: &NodeKernelSpec) -> Result<Self> {
        let (n, d) = common_dims(trees, spec.use_attributes)?;
        let kernel = spec.resolve(n, d)?;
        let paths = trees.iter().map(|t| PathBuckets::new(t)).collect();
        Ok(Self { trees: trees.to_vec(), kernel, paths })
    }
}

impl PairwiseKernel for AllPairsNodePath<'_> {
    fn eval(&self, i: usize, j: usize) -> f64 {
        let (t1, t2) = (self.trees[i], self.trees[j]);
        let k = self.kernel.matrix(t1, t2);
        let cols = t2.len();
        let mut total = 0.0;
        for (len, (b1, b2)) in (1..).zip(self.paths[i].buckets.iter().zip(&self.paths[j].buckets)) {
            for p in b1.chunks_exact(len) {
                for q in b2.chunks_exact(len) {
                    total += p.iter().zip(q).map(|(&u, &v)| k[u * cols + v]).sum::<f64>();
                }
            }
        }
        total
    }
}
