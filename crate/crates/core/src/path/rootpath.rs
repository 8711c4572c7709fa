use super::node_path::aligned_sum;
use super::{common_dims, KernelForm, NodeKernel, NodeKernelSpec};
use crate::error::{Error, Result};
use crate::kernel::PairwiseKernel;
use crate::tree::GeometricTree;

/// Direct evaluation over all node pairs: every pair of rootpaths is compared
/// with the node-path kernel.
pub(crate) struct RootpathNodeNaive<'a> {
    trees: Vec<&'a GeometricTree>,
    kernel: NodeKernel,
    rootpaths: Vec<Vec<Vec<usize>>>,
}

impl<'a> RootpathNodeNaive<'a> {
    pub fn new(trees: &[&'a GeometricTree], spec: &NodeKernelSpec) -> Result<Self> {
        let (n, d) = common_dims(trees, spec.use_attributes)?;
        let kernel = spec.resolve(n, d)?;
        let rootpaths = trees
            .iter()
            .map(|t| {
                (0..t.len())
                    .map(|v| t.rootpath(v).expect("index in range").nodes().to_vec())
                    .collect()
            })
            .collect();
        Ok(Self { trees: trees.to_vec(), kernel, rootpaths })
    }
}

impl PairwiseKernel for RootpathNodeNaive<'_> {
    fn eval(&self, i: usize, j: usize) -> f64 {
        let (t1, t2) = (self.trees[i], self.trees[j]);
        let mut total = 0.0;
        for p1 in &self.rootpaths[i] {
            for p2 in &self.rootpaths[j] {
                total += aligned_sum(&self.kernel, t1, p1, t2, p2);
            }
        }
        total
    }
}

fn deltas_f64(tree: &GeometricTree) -> Vec<Vec<f64>> {
    tree.descendant_vectors()
        .into_iter()
        .map(|d| d.counts.into_iter().map(|c| c as f64).collect())
        .collect()
}

/// Descendant-vector form: node kernels between nodes on the same level,
/// weighted by the inner product of their descendant vectors.
pub(crate) struct RootpathDecomposed<'a> {
    trees: Vec<&'a GeometricTree>,
    kernel: NodeKernel,
    deltas: Vec<Vec<Vec<f64>>>,
}

impl<'a> RootpathDecomposed<'a> {
    pub fn new(trees: &[&'a GeometricTree], spec: &NodeKernelSpec) -> Result<Self> {
        let (n, d) = common_dims(trees, spec.use_attributes)?;
        let kernel = spec.resolve(n, d)?;
        let deltas = trees.iter().map(|t| deltas_f64(t)).collect();
        Ok(Self { trees: trees.to_vec(), kernel, deltas })
    }
}

impl PairwiseKernel for RootpathDecomposed<'_> {
    fn eval(&self, i: usize, j: usize) -> f64 {
        let (t1, t2) = (self.trees[i], self.trees[j]);
        let (d1, d2) = (&self.deltas[i], &self.deltas[j]);
        let h = t1.height().min(t2.height());
        let mut total = 0.0;
        for l in 1..=h {
            for v1 in t1.nodes_at_level(l) {
                for v2 in t2.nodes_at_level(l) {
                    let weight = super::dot(&d1[v1], &d2[v2]);
                    total += weight * self.kernel.eval_nodes(t1, v1, t2, v2);
                }
            }
        }
        total
    }
}

/// Per-level Kronecker feature `Σ_{v ∈ level} [a(v) ⊗] x(v) ⊗ δ(v)`, stored as
/// a `features × width` row-major block with `δ` zero-padded to `width`.
struct LevelFeature {
    width: usize,
    data: Vec<f64>,
}

pub(crate) struct RootpathLinearFast {
    features: usize,
    levels: Vec<Vec<LevelFeature>>,
}

impl RootpathLinearFast {
    pub fn new(trees: &[&GeometricTree], spec: &NodeKernelSpec) -> Result<Self> {
        if spec.form != KernelForm::Linear {
            return Err(Error::IncompatibleSpec(
                "the Kronecker decomposition requires a linear node kernel".into(),
            ));
        }
        let (n, d) = common_dims(trees, spec.use_attributes)?;
        spec.resolve(n, d)?;
        let features = if spec.use_attributes { n * d } else { n };
        let levels = trees.iter().map(|t| level_features(t, spec.use_attributes, features)).collect();
        Ok(Self { features, levels })
    }
}

fn level_features(tree: &GeometricTree, use_attributes: bool, features: usize) -> Vec<LevelFeature> {
    let deltas = tree.descendant_vectors();
    let height = tree.height();
    let mut feature = Vec::with_capacity(features);
    (1..=height)
        .map(|l| {
            let width = height - l + 1;
            let mut data = vec![0.0; features * width];
            for v in tree.nodes_at_level(l) {
                feature.clear();
                let x = tree.position(v);
                match tree.attributes(v).filter(|_| use_attributes) {
                    Some(a) => feature.extend(a.iter().flat_map(|ap| x.iter().map(move |xc| ap * xc))),
                    None => feature.extend_from_slice(x),
                }
                for (row, f) in data.chunks_exact_mut(width).zip(&feature) {
                    for (cell, &count) in row.iter_mut().zip(&deltas[v].counts) {
                        *cell += f * count as f64;
                    }
                }
            }
            LevelFeature { width, data }
        })
        .collect()
}

impl PairwiseKernel for RootpathLinearFast {
    fn eval(&self, i: usize, j: usize) -> f64 {
        let mut total = 0.0;
        for (g1, g2) in self.levels[i].iter().zip(&self.levels[j]) {
            let common = g1.width.min(g2.width);
            for f in 0..self.features {
                let r1 = &g1.data[f * g1.width..f * g1.width + common];
                let r2 = &g2.data[f * g2.width..f * g2.width + common];
                total += super::dot(r1, r2);
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{
        rootpath_kernel_decomposed, rootpath_kernel_linear_fast, rootpath_kernel_naive, PathKernelSpec,
    };
    use crate::tree::Node;

    fn chain(xs: &[f64]) -> GeometricTree {
        let nodes = xs.iter().enumerate().map(|(i, &x)| Node::new(i.checked_sub(1), vec![x])).collect();
        GeometricTree::new("c", 1, 0, nodes).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn single_nodes_reduce_to_node_kernel() {
        let t1 = chain(&[0.0]);
        let t2 = chain(&[1.0]);
        let spec = NodeKernelSpec::gaussian();
        let expected = (-1.0f64).exp();
        assert!(close(rootpath_kernel_decomposed(&t1, &t2, &spec).unwrap(), expected));
        assert!(close(rootpath_kernel_naive(&t1, &t2, &PathKernelSpec::NodePath(spec)).unwrap(), expected));
    }

    #[test]
    fn chains_of_two_and_three_by_hand() {
        // t1: r1=0, a1=1. t2: r2=0, b=1, c=3. λ1 = 1.
        // Length-1 rootpaths: [r1]·[r2] → k(0,0) = 1.
        // Length-2 rootpaths: [a1,r1]·[b,r2] → k(1,1) + k(0,0) = 2.
        // [r1] vs [b,r2], [c,b,r2] and [a1,r1] vs [r2], [c,b,r2] give 0.
        let t1 = chain(&[0.0, 1.0]);
        let t2 = chain(&[0.0, 1.0, 3.0]);
        let spec = NodeKernelSpec::gaussian();
        let naive = rootpath_kernel_naive(&t1, &t2, &PathKernelSpec::NodePath(spec.clone())).unwrap();
        assert!(close(naive, 3.0));
        assert!(close(rootpath_kernel_decomposed(&t1, &t2, &spec).unwrap(), 3.0));
    }

    #[test]
    fn constant_kernel_on_two_chains_is_three_c() {
        // All nodes at the same point: k_n ≡ 1, so K = ⟨[1,1],[1,1]⟩ + ⟨[1],[1]⟩ = 3.
        let t = chain(&[2.0, 2.0]);
        assert!(close(rootpath_kernel_decomposed(&t, &t, &NodeKernelSpec::gaussian()).unwrap(), 3.0));
    }

    #[test]
    fn linear_fast_orthogonal_single_nodes() {
        let t1 = GeometricTree::new("a", 2, 0, vec![Node::new(None, vec![1.0, 0.0])]).unwrap();
        let t2 = GeometricTree::new("b", 2, 0, vec![Node::new(None, vec![0.0, 1.0])]).unwrap();
        assert_eq!(rootpath_kernel_linear_fast(&t1, &t2, &NodeKernelSpec::linear()).unwrap(), 0.0);
    }

    #[test]
    fn linear_fast_attributed_single_nodes() {
        let t1 = GeometricTree::new("a", 2, 2, vec![Node::new(None, vec![1.0, 2.0]).with_attributes(vec![3.0, -1.0])])
            .unwrap();
        let t2 = GeometricTree::new("b", 2, 2, vec![Node::new(None, vec![0.5, 4.0]).with_attributes(vec![2.0, 0.5])])
            .unwrap();
        // ⟨x1,x2⟩ = 8.5, ⟨a1,a2⟩ = 5.5
        let k = rootpath_kernel_linear_fast(&t1, &t2, &NodeKernelSpec::linear().attributed()).unwrap();
        assert!(close(k, 8.5 * 5.5));
    }

    #[test]
    fn linear_fast_rejects_gaussian() {
        let t = chain(&[0.0]);
        assert!(matches!(
            rootpath_kernel_linear_fast(&t, &t, &NodeKernelSpec::gaussian()),
            Err(Error::IncompatibleSpec(_))
        ));
    }

    #[test]
    fn branching_tree_three_way_agreement() {
        // root -> a, b; a -> c, d; b -> e
        let xs = [(None, 1.0), (Some(0), 2.0), (Some(0), -1.0), (Some(1), 0.5), (Some(1), 3.0), (Some(2), 1.5)];
        let nodes = xs.iter().map(|&(p, x)| Node::new(p, vec![x])).collect();
        let t1 = GeometricTree::new("t1", 1, 0, nodes).unwrap();
        let t2 = chain(&[0.5, 1.0, 2.0]);
        let spec = NodeKernelSpec::linear();
        let naive = rootpath_kernel_naive(&t1, &t2, &PathKernelSpec::NodePath(spec.clone())).unwrap();
        let dec = rootpath_kernel_decomposed(&t1, &t2, &spec).unwrap();
        let fast = rootpath_kernel_linear_fast(&t1, &t2, &spec).unwrap();
        assert!(close(naive, dec), "{naive} vs {dec}");
        assert!(close(naive, fast), "{naive} vs {fast}");
    }
}
