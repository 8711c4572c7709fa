use super::{common_dims, LandmarkKernel, LandmarkSpec};
use crate::error::{Error, Result};
use crate::kernel::PairwiseKernel;
use crate::tree::GeometricTree;

/// `m` landmark points in R^n, stored stacked (point-major).
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedPath {
    n: usize,
    coords: Vec<f64>,
}

impl EmbeddedPath {
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::DimensionMismatch("landmarks of differing dimension".into()));
        }
        Ok(Self { n, coords: points.concat() })
    }

    pub fn landmarks(&self) -> usize {
        self.coords.len().checked_div(self.n).unwrap_or(0)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.coords[k * self.n..(k + 1) * self.n]
    }

    /// Stacked `m·n` coordinate vector.
    pub fn stacked(&self) -> &[f64] {
        &self.coords
    }
}

/// Resamples the polyline through the embedded nodes of the path from `from`
/// to `to` at `m` arc-length-equidistant points, both endpoints included.
pub fn sample_embedded_path(tree: &GeometricTree, from: usize, to: usize, m: usize) -> Result<EmbeddedPath> {
    if m < 2 {
        return Err(Error::IncompatibleSpec(format!("need at least 2 landmarks, got {m}")));
    }
    let path = tree.node_path(from, to)?;
    let points: Vec<&[f64]> = path.nodes().iter().map(|&v| tree.position(v)).collect();
    let mut coords = Vec::with_capacity(m * tree.n());
    resample(&points, m, &mut coords);
    Ok(EmbeddedPath { n: tree.n(), coords })
}

fn resample(points: &[&[f64]], m: usize, out: &mut Vec<f64>) {
    let seg_len: Vec<f64> = points.windows(2).map(|w| super::sq_dist(w[0], w[1]).sqrt()).collect();
    let total: f64 = seg_len.iter().sum();
    let first = points[0];
    let last = points[points.len() - 1];
    if total == 0.0 {
        for _ in 0..m {
            out.extend_from_slice(first);
        }
        return;
    }

    out.extend_from_slice(first);
    let (mut seg, mut seg_start) = (0usize, 0.0f64);
    for k in 1..m - 1 {
        let s = total * k as f64 / (m - 1) as f64;
        while seg + 1 < seg_len.len() && seg_start + seg_len[seg] < s {
            seg_start += seg_len[seg];
            seg += 1;
        }
        let t = if seg_len[seg] > 0.0 { ((s - seg_start) / seg_len[seg]).clamp(0.0, 1.0) } else { 0.0 };
        let (p, q) = (points[seg], points[seg + 1]);
        out.extend(p.iter().zip(q).map(|(a, b)| a + t * (b - a)));
    }
    out.extend_from_slice(last);
}

/// Linear or Gaussian kernel on stacked landmark coordinates. The landmark
/// count is taken from the paths; an unset Gaussian `lambda` defaults to
/// `1/(m·n)`.
pub fn landmark_path_kernel(p: &EmbeddedPath, q: &EmbeddedPath, spec: &LandmarkSpec) -> Result<f64> {
    if p.n != q.n || p.coords.len() != q.coords.len() {
        return Err(Error::DimensionMismatch(format!(
            "landmark paths differ: {}x{} vs {}x{}",
            p.landmarks(),
            p.n,
            q.landmarks(),
            q.n
        )));
    }
    let lambda = super::positive_or(spec.lambda, 1.0 / p.coords.len().max(1) as f64, "lambda")?;
    let kernel = LandmarkKernel { form: spec.form, landmarks: p.landmarks(), lambda };
    Ok(kernel.eval(&p.coords, &q.coords))
}

/// Landmark paths of one tree, flattened with a fixed stride.
struct PathSet {
    coords: Vec<f64>,
}

impl PathSet {
    fn iter(&self, stride: usize) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(stride)
    }
}

fn sample_into(tree: &GeometricTree, from: usize, to: usize, m: usize, out: &mut Vec<f64>) {
    let path = tree.node_path(from, to).expect("indices in range");
    let points: Vec<&[f64]> = path.nodes().iter().map(|&v| tree.position(v)).collect();
    resample(&points, m, out);
}

fn sum_pairs(kernel: &LandmarkKernel, stride: usize, p1: &PathSet, p2: &PathSet) -> f64 {
    let mut total = 0.0;
    for p in p1.iter(stride) {
        for q in p2.iter(stride) {
            total += kernel.eval(p, q);
        }
    }
    total
}

fn resolve(trees: &[&GeometricTree], spec: &LandmarkSpec) -> Result<(LandmarkKernel, usize)> {
    let (n, _) = common_dims(trees, false)?;
    let kernel = spec.resolve(n)?;
    Ok((kernel, kernel.landmarks * n))
}

pub(crate) struct AllPairsEmbedded {
    kernel: LandmarkKernel,
    stride: usize,
    paths: Vec<PathSet>,
}

impl AllPairsEmbedded {
    pub fn new(trees: &[&GeometricTree], spec: &LandmarkSpec) -> Result<Self> {
        let (kernel, stride) = resolve(trees, spec)?;
        let paths = trees
            .iter()
            .map(|t| {
                let mut coords = Vec::with_capacity(t.len() * t.len() * stride);
                for i in 0..t.len() {
                    for j in 0..t.len() {
                        sample_into(t, i, j, kernel.landmarks, &mut coords);
                    }
                }
                PathSet { coords }
            })
            .collect();
        Ok(Self { kernel, stride, paths })
    }
}

impl PairwiseKernel for AllPairsEmbedded {
    fn eval(&self, i: usize, j: usize) -> f64 {
        sum_pairs(&self.kernel, self.stride, &self.paths[i], &self.paths[j])
    }
}

pub(crate) struct RootpathEmbedded {
    kernel: LandmarkKernel,
    stride: usize,
    paths: Vec<PathSet>,
}

impl RootpathEmbedded {
    pub fn new(trees: &[&GeometricTree], spec: &LandmarkSpec) -> Result<Self> {
        let (kernel, stride) = resolve(trees, spec)?;
        let paths = trees
            .iter()
            .map(|t| {
                let mut coords = Vec::with_capacity(t.len() * stride);
                for v in 0..t.len() {
                    sample_into(t, v, t.root(), kernel.landmarks, &mut coords);
                }
                PathSet { coords }
            })
            .collect();
        Ok(Self { kernel, stride, paths })
    }
}

impl PairwiseKernel for RootpathEmbedded {
    fn eval(&self, i: usize, j: usize) -> f64 {
        sum_pairs(&self.kernel, self.stride, &self.paths[i], &self.paths[j])
    }
}
