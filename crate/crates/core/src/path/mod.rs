//! Path-based tree kernels.
//!
//! Two path representations are supported: node-paths, compared position by
//! position with a node kernel, and embedded paths, resampled to `m`
//! arc-length-equidistant landmarks and compared as stacked vectors. Both can
//! be summed over all node pairs ([`all_pairs_kernel`]) or over rootpaths only
//! ([`rootpath_kernel_naive`]). For node-paths the rootpath kernel also has
//! two faster exact forms: a descendant-vector weighting of node kernels on
//! equal levels ([`rootpath_kernel_decomposed`]) and, for linear node
//! kernels, a per-level Kronecker feature vector
//! ([`rootpath_kernel_linear_fast`]).

mod embedded;
mod node_path;
mod rootpath;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::PairwiseKernel;
use crate::tree::{canonical_pair, GeometricTree};

pub use embedded::{landmark_path_kernel, sample_embedded_path, EmbeddedPath};
pub use node_path::node_path_kernel;

pub(crate) use embedded::{AllPairsEmbedded, RootpathEmbedded};
pub(crate) use node_path::AllPairsNodePath;
pub(crate) use rootpath::{RootpathDecomposed, RootpathLinearFast, RootpathNodeNaive};

/// Landmark count used when none is given.
pub const DEFAULT_LANDMARKS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelForm {
    Linear,
    Gaussian,
}

impl std::fmt::Display for KernelForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelForm::Linear => "linear",
            KernelForm::Gaussian => "gaussian",
        })
    }
}

/// Node kernel configuration. Unset bandwidths default to the inverse
/// dimension of the compared space (`1/n` for positions, `1/d` for
/// attributes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeKernelSpec {
    pub form: KernelForm,
    #[serde(default)]
    pub use_attributes: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
}

impl NodeKernelSpec {
    pub fn linear() -> Self {
        Self { form: KernelForm::Linear, use_attributes: false, lambda1: None, lambda2: None }
    }

    pub fn gaussian() -> Self {
        Self { form: KernelForm::Gaussian, ..Self::linear() }
    }

    pub fn attributed(mut self) -> Self {
        self.use_attributes = true;
        self
    }

    /// Fixes bandwidths for trees of geometric dimension `n` and attribute
    /// dimension `d`.
    pub fn resolve(&self, n: usize, d: usize) -> Result<NodeKernel> {
        if self.use_attributes && d == 0 {
            return Err(Error::IncompatibleSpec(
                "attributed node kernel requires trees with d > 0".into(),
            ));
        }
        let lambda1 = positive_or(self.lambda1, 1.0 / n as f64, "lambda1")?;
        let lambda2 = if self.use_attributes {
            positive_or(self.lambda2, 1.0 / d as f64, "lambda2")?
        } else {
            0.0
        };
        Ok(NodeKernel { form: self.form, use_attributes: self.use_attributes, lambda1, lambda2 })
    }
}

pub(crate) fn positive_or(value: Option<f64>, default: f64, name: &str) -> Result<f64> {
    match value {
        None => Ok(default),
        Some(v) if v > 0.0 && v.is_finite() => Ok(v),
        Some(v) => Err(Error::IncompatibleSpec(format!("{name} must be positive, got {v}"))),
    }
}

/// A node kernel with resolved bandwidths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeKernel {
    pub form: KernelForm,
    pub use_attributes: bool,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl NodeKernel {
    pub fn eval(&self, x1: &[f64], a1: Option<&[f64]>, x2: &[f64], a2: Option<&[f64]>) -> f64 {
        let attrs = || {
            (
                a1.expect("attributed node kernel on unattributed node"),
                a2.expect("attributed node kernel on unattributed node"),
            )
        };
        match self.form {
            KernelForm::Linear => {
                let k = dot(x1, x2);
                if self.use_attributes {
                    let (a1, a2) = attrs();
                    k * dot(a1, a2)
                } else {
                    k
                }
            }
            KernelForm::Gaussian => {
                let k = (-self.lambda1 * sq_dist(x1, x2)).exp();
                if self.use_attributes {
                    let (a1, a2) = attrs();
                    k * (-self.lambda2 * sq_dist(a1, a2)).exp()
                } else {
                    k
                }
            }
        }
    }

    pub fn eval_nodes(&self, t1: &GeometricTree, v1: usize, t2: &GeometricTree, v2: usize) -> f64 {
        self.eval(t1.position(v1), t1.attributes(v1), t2.position(v2), t2.attributes(v2))
    }

    /// Node kernel matrix between all nodes of `t1` (rows) and `t2` (columns),
    /// row-major.
    pub(crate) fn matrix(&self, t1: &GeometricTree, t2: &GeometricTree) -> Vec<f64> {
        let mut out = Vec::with_capacity(t1.len() * t2.len());
        for v1 in 0..t1.len() {
            for v2 in 0..t2.len() {
                out.push(self.eval_nodes(t1, v1, t2, v2));
            }
        }
        out
    }
}

/// Node kernel between `v1 ∈ t1` and `v2 ∈ t2`.
pub fn node_kernel(
    t1: &GeometricTree,
    v1: usize,
    t2: &GeometricTree,
    v2: usize,
    spec: &NodeKernelSpec,
) -> Result<f64> {
    for (t, v) in [(t1, v1), (t2, v2)] {
        if v >= t.len() {
            return Err(Error::InvalidIndex { index: v, len: t.len() });
        }
    }
    let (n, d) = common_dims(&[t1, t2], spec.use_attributes)?;
    Ok(spec.resolve(n, d)?.eval_nodes(t1, v1, t2, v2))
}

/// Landmark path kernel configuration. `lambda` (Gaussian only) defaults to
/// `1/(m·n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandmarkSpec {
    #[serde(default = "default_landmarks")]
    pub landmarks: usize,
    pub form: KernelForm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

fn default_landmarks() -> usize {
    DEFAULT_LANDMARKS
}

impl LandmarkSpec {
    pub fn new(form: KernelForm, landmarks: usize) -> Self {
        Self { landmarks, form, lambda: None }
    }

    pub(crate) fn resolve(&self, n: usize) -> Result<LandmarkKernel> {
        if self.landmarks < 2 {
            return Err(Error::IncompatibleSpec(format!(
                "embedded paths need at least 2 landmarks, got {}",
                self.landmarks
            )));
        }
        let lambda = positive_or(self.lambda, 1.0 / (self.landmarks * n) as f64, "lambda")?;
        Ok(LandmarkKernel { form: self.form, landmarks: self.landmarks, lambda })
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LandmarkKernel {
    pub form: KernelForm,
    pub landmarks: usize,
    pub lambda: f64,
}

impl LandmarkKernel {
    pub fn eval(&self, p: &[f64], q: &[f64]) -> f64 {
        match self.form {
            KernelForm::Linear => dot(p, q),
            KernelForm::Gaussian => (-self.lambda * sq_dist(p, q)).exp(),
        }
    }
}

/// Path representation together with its path kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "snake_case")]
pub enum PathKernelSpec {
    NodePath(NodeKernelSpec),
    EmbeddedLandmarks(LandmarkSpec),
}

impl PathKernelSpec {
    pub fn uses_attributes(&self) -> bool {
        matches!(self, PathKernelSpec::NodePath(s) if s.use_attributes)
    }
}

/// All-pairs path kernel: sum of path kernels over every ordered node pair of
/// each tree, the zero-length diagonal paths included.
pub fn all_pairs_kernel(t1: &GeometricTree, t2: &GeometricTree, spec: &PathKernelSpec) -> Result<f64> {
    let (t1, t2) = canonical_pair(t1, t2);
    let trees = [t1, t2];
    match spec {
        PathKernelSpec::NodePath(s) => Ok(AllPairsNodePath::new(&trees, s)?.eval(0, 1)),
        PathKernelSpec::EmbeddedLandmarks(s) => Ok(AllPairsEmbedded::new(&trees, s)?.eval(0, 1)),
    }
}

/// Rootpath kernel by direct enumeration of all node pairs. Reference for the
/// decomposed variants.
pub fn rootpath_kernel_naive(t1: &GeometricTree, t2: &GeometricTree, spec: &PathKernelSpec) -> Result<f64> {
    let (t1, t2) = canonical_pair(t1, t2);
    let trees = [t1, t2];
    match spec {
        PathKernelSpec::NodePath(s) => Ok(RootpathNodeNaive::new(&trees, s)?.eval(0, 1)),
        PathKernelSpec::EmbeddedLandmarks(s) => Ok(RootpathEmbedded::new(&trees, s)?.eval(0, 1)),
    }
}

/// Node-rootpath kernel as a descendant-weighted sum of node kernels between
/// nodes on the same level.
pub fn rootpath_kernel_decomposed(
    t1: &GeometricTree,
    t2: &GeometricTree,
    spec: &NodeKernelSpec,
) -> Result<f64> {
    let (t1, t2) = canonical_pair(t1, t2);
    Ok(RootpathDecomposed::new(&[t1, t2], spec)?.eval(0, 1))
}

/// Node-rootpath kernel for linear node kernels via per-level Kronecker
/// features.
pub fn rootpath_kernel_linear_fast(
    t1: &GeometricTree,
    t2: &GeometricTree,
    spec: &NodeKernelSpec,
) -> Result<f64> {
    let (t1, t2) = canonical_pair(t1, t2);
    Ok(RootpathLinearFast::new(&[t1, t2], spec)?.eval(0, 1))
}

/// Checks that all trees share `n` (and `d > 0` when attributes are used) and
/// returns `(n, d)`.
pub(crate) fn common_dims(trees: &[&GeometricTree], use_attributes: bool) -> Result<(usize, usize)> {
    let Some(first) = trees.first() else {
        return Err(Error::InvalidSample("no trees".into()));
    };
    let (n, d) = (first.n(), first.d());
    for t in trees {
        if t.n() != n {
            return Err(Error::DimensionMismatch(format!(
                "tree {} has n = {}, tree {} has n = {n}",
                t.id(),
                t.n(),
                first.id()
            )));
        }
        if use_attributes && t.d() != d {
            return Err(Error::DimensionMismatch(format!(
                "tree {} has d = {}, tree {} has d = {d}",
                t.id(),
                t.d(),
                first.id()
            )));
        }
    }
    if use_attributes && d == 0 {
        return Err(Error::IncompatibleSpec("kernel uses attributes but trees have d = 0".into()));
    }
    Ok((n, d))
}

#[inline]
pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

#[inline]
pub(crate) fn sq_dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Node;

    fn point(x: Vec<f64>, a: Option<Vec<f64>>) -> GeometricTree {
        let d = a.as_ref().map_or(0, Vec::len);
        let n = x.len();
        GeometricTree::new("p", n, d, vec![Node { parent: None, x, a }]).unwrap()
    }

    #[test]
    fn gaussian_identical_nodes_is_one() {
        let t = point(vec![0.3, -1.0, 2.0], Some(vec![4.0]));
        assert_eq!(node_kernel(&t, 0, &t, 0, &NodeKernelSpec::gaussian()).unwrap(), 1.0);
        assert_eq!(node_kernel(&t, 0, &t, 0, &NodeKernelSpec::gaussian().attributed()).unwrap(), 1.0);
    }

    #[test]
    fn linear_node_kernels() {
        let t1 = point(vec![1.0, 0.0, 0.0], Some(vec![1.0, 1.0]));
        let t2 = point(vec![2.0, 0.0, 0.0], Some(vec![1.0, 2.0]));
        assert_eq!(node_kernel(&t1, 0, &t2, 0, &NodeKernelSpec::linear()).unwrap(), 2.0);
        // x·x' = 2, a·a' = 3
        assert_eq!(node_kernel(&t1, 0, &t2, 0, &NodeKernelSpec::linear().attributed()).unwrap(), 6.0);
    }

    #[test]
    fn gaussian_default_bandwidth_is_inverse_dimension() {
        let t1 = point(vec![0.0, 0.0], Some(vec![0.0, 0.0, 0.0]));
        let t2 = point(vec![1.0, 1.0], Some(vec![1.0, 1.0, 1.0]));
        // λ1 = 1/2 on ‖Δx‖² = 2, λ2 = 1/3 on ‖Δa‖² = 3
        let k = node_kernel(&t1, 0, &t2, 0, &NodeKernelSpec::gaussian().attributed()).unwrap();
        assert!((k - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn node_kernel_errors() {
        let t1 = point(vec![1.0, 0.0], None);
        let t2 = point(vec![1.0, 0.0, 0.0], None);
        assert!(matches!(
            node_kernel(&t1, 0, &t2, 0, &NodeKernelSpec::linear()),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            node_kernel(&t1, 0, &t1, 0, &NodeKernelSpec::linear().attributed()),
            Err(Error::IncompatibleSpec(_))
        ));
        assert!(matches!(
            node_kernel(&t1, 1, &t1, 0, &NodeKernelSpec::linear()),
            Err(Error::InvalidIndex { .. })
        ));
        let bad = NodeKernelSpec { lambda1: Some(-1.0), ..NodeKernelSpec::gaussian() };
        assert!(bad.resolve(2, 0).is_err());
    }

    #[test]
    fn path_spec_json_shape() {
        let spec = PathKernelSpec::EmbeddedLandmarks(LandmarkSpec::new(KernelForm::Gaussian, 20));
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"representation":"embedded_landmarks","landmarks":20,"form":"gaussian"}"#);
        let node: PathKernelSpec =
            serde_json::from_str(r#"{"representation":"node_path","form":"linear"}"#).unwrap();
        assert_eq!(node, PathKernelSpec::NodePath(NodeKernelSpec::linear()));
    }
}
