//! Gram matrices over tree populations.
//!
//! File format: a CSV whose first row is `id,<id1>,<id2>,...` followed by one
//! row per tree (`idK,v,v,...`, values with 17 significant digits), plus a
//! JSON sidecar at `<csv path>.meta.json` recording the producing kernel and
//! whether the matrix is normalized.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::tree::GeometricTree;

/// What produced a Gram matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GramSource {
    Kernel(KernelSpec),
    /// Entrywise sum of matrices.
    Sum(Vec<GramSource>),
}

impl GramSource {
    pub fn is_scalar_linear(&self) -> bool {
        match self {
            GramSource::Kernel(spec) => spec.is_scalar_linear(),
            GramSource::Sum(parts) => parts.iter().all(GramSource::is_scalar_linear),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            GramSource::Kernel(spec) => spec.name().to_string(),
            GramSource::Sum(parts) => parts.iter().map(GramSource::describe).collect::<Vec<_>>().join("+"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub ids: Vec<String>,
    pub values: DMatrix<f64>,
    pub source: GramSource,
    pub normalized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMeta {
    pub kernel_spec: GramSource,
    pub normalized: bool,
    pub software_version: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub min_eig: f64,
    pub max_eig: f64,
    pub is_psd: bool,
}

pub const DEFAULT_PSD_TOL: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-9;

/// Computes `K(T_i, T_j)` for `i ≤ j` and mirrors it. Entries are evaluated
/// independently on a pool of `threads` workers (0 = all cores), so the result
/// does not depend on the worker count.
pub fn assemble(trees: &[GeometricTree], spec: &KernelSpec, threads: usize) -> Result<GramMatrix> {
    if trees.is_empty() {
        return Err(Error::InvalidSample("cannot assemble a Gram matrix over zero trees".into()));
    }
    let refs: Vec<&GeometricTree> = trees.iter().collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let size = trees.len();
    let values = pool.install(|| -> Result<Vec<f64>> {
        let kernel = spec.prepare(&refs)?;
        let pairs: Vec<(usize, usize)> = (0..size).flat_map(|i| (i..size).map(move |j| (i, j))).collect();
        Ok(pairs.par_iter().map(|&(i, j)| kernel.eval(i, j)).collect())
    })?;

    let mut matrix = DMatrix::zeros(size, size);
    let mut entries = values.into_iter();
    for i in 0..size {
        for j in i..size {
            let v = entries.next().expect("one value per upper-triangle entry");
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
    }
    Ok(GramMatrix {
        ids: trees.iter().map(|t| t.id().to_string()).collect(),
        values: matrix,
        source: GramSource::Kernel(spec.clone()),
        normalized: false,
    })
}

/// Eigenvalue range of a symmetric matrix. `is_psd` iff
/// `min_eig ≥ -tol · max(|max_eig|, 1)`.
pub fn psd_check(values: &DMatrix<f64>, tol: f64) -> Result<PsdReport> {
    check_symmetric(values)?;
    if values.is_empty() {
        return Ok(PsdReport { min_eig: 0.0, max_eig: 0.0, is_psd: true });
    }
    let eig = values.clone().symmetric_eigenvalues();
    let min_eig = eig.min();
    let max_eig = eig.max();
    Ok(PsdReport { min_eig, max_eig, is_psd: min_eig >= -tol * max_eig.abs().max(1.0) })
}

fn check_symmetric(values: &DMatrix<f64>) -> Result<()> {
    if !values.is_square() {
        return Err(Error::GramFormat(format!("matrix is {}x{}", values.nrows(), values.ncols())));
    }
    for i in 0..values.nrows() {
        for j in 0..i {
            let diff = (values[(i, j)] - values[(j, i)]).abs();
            if diff > SYMMETRY_TOL || diff.is_nan() {
                return Err(Error::Asymmetric { i, j, diff });
            }
        }
    }
    Ok(())
}

impl GramMatrix {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// `K(i, j) / sqrt(K(i, i) K(j, j))`.
    pub fn normalize(&self) -> Result<GramMatrix> {
        if self.source.is_scalar_linear() {
            return Err(Error::ScalarLinearNormalization(self.source.describe()));
        }
        let scale: Vec<f64> = self
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let v = self.values[(i, i)];
                if v > 0.0 {
                    Ok(v.sqrt())
                } else {
                    Err(Error::NonPositiveDiagonal { id: id.clone(), value: v })
                }
            })
            .collect::<Result<_>>()?;
        let values = DMatrix::from_fn(self.len(), self.len(), |i, j| self.values[(i, j)] / (scale[i] * scale[j]));
        Ok(GramMatrix { values, normalized: true, ..self.clone() })
    }

    pub fn psd_check(&self, tol: f64) -> Result<PsdReport> {
        psd_check(&self.values, tol)
    }

    /// Entrywise sum of two matrices over the same ids in the same order.
    pub fn combine(&self, other: &GramMatrix) -> Result<GramMatrix> {
        if self.ids != other.ids {
            return Err(Error::IdMismatch("combined Gram matrices must list the same ids in the same order".into()));
        }
        let parts = |g: &GramMatrix| match &g.source {
            GramSource::Sum(p) => p.clone(),
            s => vec![s.clone()],
        };
        let mut source = parts(self);
        source.extend(parts(other));
        Ok(GramMatrix {
            ids: self.ids.clone(),
            values: &self.values + &other.values,
            source: GramSource::Sum(source),
            normalized: false,
        })
    }

    /// Submatrix over the given indices, in that order.
    pub fn select(&self, indices: &[usize]) -> GramMatrix {
        GramMatrix {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            values: self.values.select_rows(indices).select_columns(indices),
            source: self.source.clone(),
            normalized: self.normalized,
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().flexible(false).from_writer(writer);
        out.write_record(std::iter::once("id").chain(self.ids.iter().map(String::as_str)))?;
        for (i, id) in self.ids.iter().enumerate() {
            let row = self.values.row(i);
            out.write_record(std::iter::once(id.clone()).chain(row.iter().map(|v| format!("{v:.16e}"))))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn meta(&self) -> GramMeta {
        GramMeta {
            kernel_spec: self.source.clone(),
            normalized: self.normalized,
            software_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Writes the CSV and its sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut csv_bytes = Vec::new();
        self.write_csv(&mut csv_bytes)?;
        fs::write(path, csv_bytes)?;
        let mut meta = serde_json::to_vec_pretty(&self.meta())?;
        meta.push(b'\n');
        fs::write(sidecar_path(path), meta)?;
        Ok(())
    }

    /// Reads a CSV and its sidecar.
    pub fn load(path: &Path) -> Result<GramMatrix> {
        let (ids, values) = read_csv(fs::File::open(path)?)?;
        let meta: GramMeta = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
        Ok(GramMatrix { ids, values, source: meta.kernel_spec, normalized: meta.normalized })
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Parses the CSV body of a Gram file.
pub fn read_csv<R: Read>(reader: R) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut records = rdr.records();
    let header = records.next().ok_or_else(|| Error::GramFormat("empty file".into()))??;
    if header.get(0) != Some("id") {
        return Err(Error::GramFormat("first header cell must be `id`".into()));
    }
    let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let size = ids.len();
    let mut values = DMatrix::zeros(size, size);
    let mut rows = 0;
    for (i, record) in records.enumerate() {
        let record = record?;
        if i >= size {
            return Err(Error::GramFormat(format!("more than {size} rows")));
        }
        if record.get(0) != Some(ids[i].as_str()) {
            return Err(Error::GramFormat(format!("row {} is labelled {:?}, expected {}", i + 1, record.get(0), ids[i])));
        }
        if record.len() != size + 1 {
            return Err(Error::GramFormat(format!("row {} has {} values", i + 1, record.len() - 1)));
        }
        for (j, cell) in record.iter().skip(1).enumerate() {
            values[(i, j)] = cell
                .trim()
                .parse()
                .map_err(|_| Error::GramFormat(format!("unparsable value {cell:?} at ({i}, {j})")))?;
        }
        rows += 1;
    }
    if rows != size {
        return Err(Error::GramFormat(format!("{rows} rows for {size} ids")));
    }
    Ok((ids, values))
}
