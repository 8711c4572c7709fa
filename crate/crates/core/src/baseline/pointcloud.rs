use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernel::PairwiseKernel;
use crate::path::{common_dims, positive_or, sq_dist};
use crate::tree::{canonical_pair, GeometricTree};

/// Gaussian edge kernel parameters; unset values default to `1/n` and `1/d`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointcloudSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
}

/// Sum over all edge pairs of a geometric Gaussian factor times an attribute
/// Gaussian factor. Each edge is represented by its child node. For
/// unattributed trees (`d = 0`) the attribute factor is 1.
pub fn pointcloud_kernel(t1: &GeometricTree, t2: &GeometricTree, spec: &PointcloudSpec) -> Result<f64> {
    let (t1, t2) = canonical_pair(t1, t2);
    Ok(Pointcloud::new(&[t1, t2], spec)?.eval(0, 1))
}

pub(crate) struct Pointcloud<'a> {
    trees: Vec<&'a GeometricTree>,
    lambda1: f64,
    lambda2: f64,
}

impl<'a> Pointcloud<'a> {
    pub fn new(trees: &[&'a GeometricTree], spec: &PointcloudSpec) -> Result<Self> {
        let (n, _) = common_dims(trees, false)?;
        let d = trees[0].d();
        let attributed = d > 0 && trees.iter().all(|t| t.d() == d);
        if !attributed && trees.iter().any(|t| t.d() > 0) {
            return Err(crate::error::Error::DimensionMismatch(
                "pointcloud kernel needs a common attribute dimension".into(),
            ));
        }
        for t in trees.iter().filter(|t| t.len() < 2) {
            log::warn!("tree {} has no edges; its pointcloud kernel values are 0", t.id());
        }
        let lambda1 = positive_or(spec.lambda1, 1.0 / n as f64, "lambda1")?;
        let lambda2 = if attributed { positive_or(spec.lambda2, 1.0 / d as f64, "lambda2")? } else { 0.0 };
        Ok(Self { trees: trees.to_vec(), lambda1, lambda2 })
    }
}

impl PairwiseKernel for Pointcloud<'_> {
    fn eval(&self, i: usize, j: usize) -> f64 {
        let (t1, t2) = (self.trees[i], self.trees[j]);
        let mut total = 0.0;
        for e1 in 1..t1.len() {
            for e2 in 1..t2.len() {
                let geometric = (-self.lambda1 * sq_dist(t1.position(e1), t2.position(e2))).exp();
                let attribute = match (t1.attributes(e1), t2.attributes(e2)) {
                    (Some(a1), Some(a2)) => (-self.lambda2 * sq_dist(a1, a2)).exp(),
                    _ => 1.0,
                };
                total += geometric * attribute;
            }
        }
        total
    }
}
