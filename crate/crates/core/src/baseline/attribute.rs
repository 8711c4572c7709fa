//! Global attribute-average kernels: the mean of one attribute component over
//! the whole tree, or a vector of its means per generation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::PairwiseKernel;
use crate::path::{dot, sq_dist, KernelForm};
use crate::tree::GeometricTree;

fn gaussian() -> KernelForm {
    KernelForm::Gaussian
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageAttributeSpec {
    #[serde(default = "gaussian")]
    pub form: KernelForm,
    #[serde(default)]
    pub attr_index: usize,
}

impl Default for AverageAttributeSpec {
    fn default() -> Self {
        Self { form: KernelForm::Gaussian, attr_index: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationAverageSpec {
    #[serde(default = "gaussian")]
    pub form: KernelForm,
    #[serde(default)]
    pub attr_index: usize,
    #[serde(default = "default_gen_lo")]
    pub gen_lo: usize,
    #[serde(default = "default_gen_hi")]
    pub gen_hi: usize,
}

fn default_gen_lo() -> usize {
    3
}

fn default_gen_hi() -> usize {
    6
}

impl Default for GenerationAverageSpec {
    fn default() -> Self {
        Self { form: KernelForm::Gaussian, attr_index: 0, gen_lo: 3, gen_hi: 6 }
    }
}

fn check_attr(tree: &GeometricTree, index: usize) -> Result<()> {
    if tree.d() == 0 {
        return Err(Error::IncompatibleSpec(format!("tree {} has no attributes", tree.id())));
    }
    if index >= tree.d() {
        return Err(Error::IncompatibleSpec(format!(
            "attribute index {index} out of range for d = {}",
            tree.d()
        )));
    }
    Ok(())
}

fn attr(tree: &GeometricTree, v: usize, index: usize) -> f64 {
    tree.attributes(v).expect("checked d > 0")[index]
}

/// Mean of the selected attribute over all nodes.
pub fn mean_attribute(tree: &GeometricTree, index: usize) -> Result<f64> {
    check_attr(tree, index)?;
    Ok((0..tree.len()).map(|v| attr(tree, v, index)).sum::<f64>() / tree.len() as f64)
}

/// Per-generation means of the selected attribute for generations
/// `lo..=hi` (root = generation 0). Empty generations yield 0.
pub fn generation_means(tree: &GeometricTree, index: usize, lo: usize, hi: usize) -> Result<Vec<f64>> {
    check_attr(tree, index)?;
    if lo > hi {
        return Err(Error::IncompatibleSpec(format!("generation range {lo}..={hi} is empty")));
    }
    Ok((lo..=hi)
        .map(|g| {
            let nodes = tree.nodes_at_level(g + 1);
            if nodes.is_empty() {
                log::warn!("tree {} has no nodes in generation {g}; using mean 0", tree.id());
                0.0
            } else {
                let count = nodes.len() as f64;
                nodes.map(|v| attr(tree, v, index)).sum::<f64>() / count
            }
        })
        .collect())
}

/// Kernel on per-tree summary vectors.
pub(crate) struct SummaryKernel {
    form: KernelForm,
    summaries: Vec<Vec<f64>>,
}

impl SummaryKernel {
    pub fn average(trees: &[&GeometricTree], spec: &AverageAttributeSpec) -> Result<Self> {
        let summaries = trees
            .iter()
            .map(|t| mean_attribute(t, spec.attr_index).map(|m| vec![m]))
            .collect::<Result<_>>()?;
        Ok(Self { form: spec.form, summaries })
    }

    pub fn generations(trees: &[&GeometricTree], spec: &GenerationAverageSpec) -> Result<Self> {
        let summaries = trees
            .iter()
            .map(|t| generation_means(t, spec.attr_index, spec.gen_lo, spec.gen_hi))
            .collect::<Result<_>>()?;
        Ok(Self { form: spec.form, summaries })
    }
}

impl PairwiseKernel for SummaryKernel {
    fn eval(&self, i: usize, j: usize) -> f64 {
        let (u, v) = (&self.summaries[i], &self.summaries[j]);
        match self.form {
            KernelForm::Linear => dot(u, v),
            KernelForm::Gaussian => (-sq_dist(u, v)).exp(),
        }
    }
}

pub fn average_attribute_kernel(t1: &GeometricTree, t2: &GeometricTree, spec: &AverageAttributeSpec) -> Result<f64> {
    Ok(SummaryKernel::average(&[t1, t2], spec)?.eval(0, 1))
}

pub fn generation_average_kernel(
    t1: &GeometricTree,
    t2: &GeometricTree,
    spec: &GenerationAverageSpec,
) -> Result<f64> {
    Ok(SummaryKernel::generations(&[t1, t2], spec)?.eval(0, 1))
}
