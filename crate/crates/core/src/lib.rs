//! Kernels between geometric trees: rooted trees whose nodes carry positions
//! in `R^n` and optional attribute vectors in `R^d`.
//!
//! The path-based kernels compare trees through their node paths, either
//! node by node or as resampled embedded curves, summed over all paths or
//! restricted to root-to-node paths. Baseline kernels (pointcloud, average
//! attribute, branch count, shortest path, Weisfeiler-Lehman) share the same
//! interface. [`gram`] assembles Gram matrices in parallel and [`stats`]
//! runs a permutation two-sample test and a nearest-mean classifier on them.

pub mod baseline;
pub mod error;
pub mod gram;
pub mod kernel;
pub mod path;
pub mod stats;
pub mod synth;
pub mod tree;

pub use error::{Error, Result};
pub use gram::{GramMatrix, GramSource};
pub use kernel::{KernelSpec, PairwiseKernel};
pub use tree::{GeometricTree, Node};
