//! Named kernel configurations and population-level evaluation.

use serde::{Deserialize, Serialize};

use crate::baseline::{
    AverageAttributeSpec, Branchcount, GenerationAverageSpec, Pointcloud, PointcloudSpec, ShortestPath,
    ShortestPathSpec, SummaryKernel, WeisfeilerLehman, WlConfig,
};
use crate::error::Result;
use crate::path::{
    AllPairsEmbedded, AllPairsNodePath, KernelForm, LandmarkSpec, NodeKernelSpec, RootpathDecomposed,
    RootpathEmbedded, RootpathLinearFast, RootpathNodeNaive,
};
use crate::baseline::LengthKernel;
use crate::tree::{canonical_pair, GeometricTree};

/// Kernel over a fixed population of trees, addressed by index. Per-tree
/// precomputations happen once when the population is prepared.
pub trait PairwiseKernel: Sync {
    fn eval(&self, i: usize, j: usize) -> f64;
}

/// Every kernel this crate can evaluate, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "kebab-case")]
pub enum KernelSpec {
    AllPairsEmbedded(LandmarkSpec),
    RootpathEmbedded(LandmarkSpec),
    AllPairsNode(NodeKernelSpec),
    RootpathNodeNaive(NodeKernelSpec),
    RootpathNode(NodeKernelSpec),
    RootpathNodeLinearFast(NodeKernelSpec),
    Pointcloud(PointcloudSpec),
    Aaw(AverageAttributeSpec),
    Agaw(GenerationAverageSpec),
    Lbc,
    Gbc,
    Sp(ShortestPathSpec),
    Wl(WlConfig),
}

pub const KERNEL_NAMES: [&str; 13] = [
    "all-pairs-embedded",
    "rootpath-embedded",
    "all-pairs-node",
    "rootpath-node-naive",
    "rootpath-node",
    "rootpath-node-linear-fast",
    "pointcloud",
    "aaw",
    "agaw",
    "lbc",
    "gbc",
    "sp",
    "wl",
];

impl KernelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::AllPairsEmbedded(_) => "all-pairs-embedded",
            KernelSpec::RootpathEmbedded(_) => "rootpath-embedded",
            KernelSpec::AllPairsNode(_) => "all-pairs-node",
            KernelSpec::RootpathNodeNaive(_) => "rootpath-node-naive",
            KernelSpec::RootpathNode(_) => "rootpath-node",
            KernelSpec::RootpathNodeLinearFast(_) => "rootpath-node-linear-fast",
            KernelSpec::Pointcloud(_) => "pointcloud",
            KernelSpec::Aaw(_) => "aaw",
            KernelSpec::Agaw(_) => "agaw",
            KernelSpec::Lbc => "lbc",
            KernelSpec::Gbc => "gbc",
            KernelSpec::Sp(_) => "sp",
            KernelSpec::Wl(_) => "wl",
        }
    }

    /// Linear kernels between scalar summaries. Normalizing them yields the
    /// all-ones matrix, so [`crate::gram::GramMatrix::normalize`] refuses them.
    pub fn is_scalar_linear(&self) -> bool {
        match self {
            KernelSpec::Lbc => true,
            KernelSpec::Aaw(s) => s.form == KernelForm::Linear,
            KernelSpec::Sp(s) => s.length_kernel == LengthKernel::Linear,
            _ => false,
        }
    }

    /// Precomputes per-tree data for `trees` and returns an index-addressed
    /// kernel.
    pub fn prepare<'a>(&self, trees: &[&'a GeometricTree]) -> Result<Box<dyn PairwiseKernel + 'a>> {
        Ok(match self {
            KernelSpec::AllPairsEmbedded(s) => Box::new(AllPairsEmbedded::new(trees, s)?),
            KernelSpec::RootpathEmbedded(s) => Box::new(RootpathEmbedded::new(trees, s)?),
            KernelSpec::AllPairsNode(s) => Box::new(AllPairsNodePath::new(trees, s)?),
            KernelSpec::RootpathNodeNaive(s) => Box::new(RootpathNodeNaive::new(trees, s)?),
            KernelSpec::RootpathNode(s) => Box::new(RootpathDecomposed::new(trees, s)?),
            KernelSpec::RootpathNodeLinearFast(s) => Box::new(RootpathLinearFast::new(trees, s)?),
            KernelSpec::Pointcloud(s) => Box::new(Pointcloud::new(trees, s)?),
            KernelSpec::Aaw(s) => Box::new(SummaryKernel::average(trees, s)?),
            KernelSpec::Agaw(s) => Box::new(SummaryKernel::generations(trees, s)?),
            KernelSpec::Lbc => Box::new(Branchcount::new(trees, KernelForm::Linear)),
            KernelSpec::Gbc => Box::new(Branchcount::new(trees, KernelForm::Gaussian)),
            KernelSpec::Sp(s) => Box::new(ShortestPath::new(trees, s)),
            KernelSpec::Wl(s) => Box::new(WeisfeilerLehman::new(trees, s)),
        })
    }

    /// Kernel value for one pair, with the argument order canonicalized so
    /// that `evaluate(a, b) == evaluate(b, a)` exactly.
    pub fn evaluate(&self, t1: &GeometricTree, t2: &GeometricTree) -> Result<f64> {
        let (t1, t2) = canonical_pair(t1, t2);
        Ok(self.prepare(&[t1, t2])?.eval(0, 1))
    }
}
