//! Pointcloud kernel and the baseline kernels it is compared against.

mod attribute;
mod pointcloud;
mod structure;
mod wl;

pub use attribute::{
    average_attribute_kernel, generation_average_kernel, generation_means, mean_attribute, AverageAttributeSpec,
    GenerationAverageSpec,
};
pub use pointcloud::{pointcloud_kernel, PointcloudSpec};
pub use structure::{
    branchcount_kernels, path_length_histogram, shortest_path_kernel, LengthKernel, ShortestPathSpec,
};
pub use wl::{weisfeiler_lehman_kernel, WlConfig};

pub(crate) use attribute::SummaryKernel;
pub(crate) use pointcloud::Pointcloud;
pub(crate) use structure::{Branchcount, ShortestPath};
pub(crate) use wl::WeisfeilerLehman;
