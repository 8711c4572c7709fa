//! Seeded random geometric trees and labelled two-class populations.
//!
//! Trees grow by a branching process: below `max_depth`, each non-root node
//! stops with probability `p_stop`, otherwise spawns two children with
//! probability `p_branch` or one child. Child directions deviate from the
//! parent direction by at most `direction_jitter` radians and edge lengths
//! shrink by `edge_length_decay` per level. Attributes follow
//! `attr_base + depth · attr_depth_slope + N(0, attr_noise_sd²)` per
//! component. Each tree draws from its own ChaCha stream, selected by the
//! tree's offset, so any tree can be regenerated in isolation.

use std::collections::VecDeque;
use std::io::Read;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{serialize_dataset, GeometricTree, Node};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub p_branch: f64,
    pub p_stop: f64,
    pub max_depth: usize,
    pub edge_length_decay: f64,
    pub direction_jitter: f64,
    pub attr_base: f64,
    pub attr_depth_slope: f64,
    pub attr_noise_sd: f64,
    /// Measure depth relative to the tree's mean node depth in the attribute
    /// model, so the slope leaves each tree's attribute mean unchanged.
    pub attr_center_depth: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n: 3,
            d: 1,
            p_branch: 0.35,
            p_stop: 0.1,
            max_depth: 12,
            edge_length_decay: 0.8,
            direction_jitter: 0.5,
            attr_base: 1.0,
            attr_depth_slope: 0.0,
            attr_noise_sd: 0.1,
            attr_center_depth: false,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        for (name, p) in [("p_branch", self.p_branch), ("p_stop", self.p_stop)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} = {p} is not a probability"));
            }
        }
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1".into());
        }
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !(self.edge_length_decay > 0.0 && self.edge_length_decay.is_finite()) {
            return bad(format!("edge_length_decay = {} must be positive", self.edge_length_decay));
        }
        if !(self.direction_jitter >= 0.0 && self.attr_noise_sd >= 0.0) {
            return bad("direction_jitter and attr_noise_sd must be non-negative".into());
        }
        Ok(())
    }
}

fn stream(seed: u64, offset: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(offset);
    rng
}

/// Unit vector orthogonal to `dir`, or `None` in one dimension.
fn random_orthogonal(dir: &[f64], rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    if dir.len() < 2 {
        return None;
    }
    loop {
        let mut g: Vec<f64> = (0..dir.len()).map(|_| StandardNormal.sample(rng)).collect();
        let proj: f64 = g.iter().zip(dir).map(|(a, b)| a * b).sum();
        g.iter_mut().zip(dir).for_each(|(a, b)| *a -= proj * b);
        let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-9 {
            g.iter_mut().for_each(|a| *a /= norm);
            return Some(g);
        }
    }
}

fn rotate(dir: &[f64], perp: Option<&[f64]>, angle: f64) -> Vec<f64> {
    match perp {
        None => dir.to_vec(),
        Some(p) => dir.iter().zip(p).map(|(d, q)| angle.cos() * d + angle.sin() * q).collect(),
    }
}

/// Breadth-first growth. `children(level, is_root, rng)` decides the child
/// count of a node at `level`; growth stops once `max_nodes` nodes exist.
fn grow(
    cfg: &GeneratorConfig,
    rng: &mut ChaCha8Rng,
    max_nodes: usize,
    mut children: impl FnMut(usize, bool, &mut ChaCha8Rng) -> usize,
) -> Vec<(Option<usize>, Vec<f64>, usize)> {
    let mut down = vec![0.0; cfg.n];
    down[cfg.n - 1] = -1.0;
    let mut nodes = vec![(None, vec![0.0; cfg.n], 1usize)];
    let mut queue = VecDeque::from([(0usize, down)]);
    while let Some((v, dir)) = queue.pop_front() {
        let level = nodes[v].2;
        if level >= cfg.max_depth {
            continue;
        }
        let count = children(level, v == 0, rng);
        let perp = if count > 0 { random_orthogonal(&dir, rng) } else { None };
        let length = cfg.edge_length_decay.powi(level as i32 - 1);
        for c in 0..count {
            if nodes.len() >= max_nodes {
                return nodes;
            }
            let angle = rng.random::<f64>() * cfg.direction_jitter;
            let sign_perp: Option<Vec<f64>> =
                perp.as_ref().map(|p| p.iter().map(|x| if c % 2 == 0 { *x } else { -*x }).collect());
            let child_dir = rotate(&dir, sign_perp.as_deref(), angle);
            let pos: Vec<f64> = nodes[v].1.iter().zip(&child_dir).map(|(p, d)| p + length * d).collect();
            nodes.push((Some(v), pos, level + 1));
            queue.push_back((nodes.len() - 1, child_dir));
        }
    }
    nodes
}

fn attach_attributes(
    cfg: &GeneratorConfig,
    rng: &mut ChaCha8Rng,
    id: String,
    grown: Vec<(Option<usize>, Vec<f64>, usize)>,
) -> Result<GeometricTree> {
    let mean_depth = grown.iter().map(|(_, _, l)| (l - 1) as f64).sum::<f64>() / grown.len() as f64;
    let center = if cfg.attr_center_depth { mean_depth } else { 0.0 };
    let noise = Normal::new(0.0, cfg.attr_noise_sd).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let nodes = grown
        .into_iter()
        .map(|(parent, x, level)| {
            let node = Node::new(parent, x);
            if cfg.d == 0 {
                return node;
            }
            let mean = cfg.attr_base + cfg.attr_depth_slope * ((level - 1) as f64 - center);
            node.with_attributes((0..cfg.d).map(|_| mean + noise.sample(rng)).collect())
        })
        .collect();
    GeometricTree::new(id, cfg.n, cfg.d, nodes)
}

/// One tree from the branching process; deterministic in
/// `(cfg.seed, seed_offset)`.
pub fn generate_tree(cfg: &GeneratorConfig, seed_offset: u64) -> Result<GeometricTree> {
    cfg.validate()?;
    let mut rng = stream(cfg.seed, seed_offset);
    let grown = grow(cfg, &mut rng, usize::MAX, |_, is_root, rng| {
        if !is_root && rng.random::<f64>() < cfg.p_stop {
            0
        } else if rng.random::<f64>() < cfg.p_branch {
            2
        } else {
            1
        }
    });
    attach_attributes(cfg, &mut rng, format!("tree-{seed_offset:05}"), grown)
}

/// Complete binary tree with exactly `size` nodes (filled level by level),
/// embedded with the geometry of `cfg`. `max_depth` is ignored.
pub fn balanced_tree(cfg: &GeneratorConfig, size: usize, seed_offset: u64) -> Result<GeometricTree> {
    let cfg = GeneratorConfig { max_depth: usize::MAX, ..cfg.clone() };
    cfg.validate()?;
    if size == 0 {
        return Err(Error::InvalidConfig("balanced tree needs at least one node".into()));
    }
    let mut rng = stream(cfg.seed, seed_offset);
    let grown = grow(&cfg, &mut rng, size, |_, _, _| 2);
    attach_attributes(&cfg, &mut rng, format!("balanced-{size}"), grown)
}

/// Random recursive tree: node `i` attaches to a uniformly chosen earlier
/// node. Positions are the parent's position plus a step in `[0, 1)^n`
/// (root uniform in `[0, 1)^n`); attributes are uniform in `[0.5, 1.5)`.
pub fn random_recursive_tree(seed: u64, size: usize, n: usize, d: usize) -> Result<GeometricTree> {
    if size == 0 || n == 0 {
        return Err(Error::InvalidConfig("random recursive tree needs size and n positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<Vec<f64>> = Vec::with_capacity(size);
    let mut nodes = Vec::with_capacity(size);
    for i in 0..size {
        let parent = (i > 0).then(|| rng.random_range(0..i));
        let step: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let x: Vec<f64> = match parent {
            Some(p) => positions[p].iter().zip(&step).map(|(a, b)| a + b).collect(),
            None => step,
        };
        positions.push(x.clone());
        let node = Node::new(parent, x);
        nodes.push(if d > 0 {
            node.with_attributes((0..d).map(|_| 0.5 + rng.random::<f64>()).collect())
        } else {
            node
        });
    }
    GeometricTree::new(format!("rrt-{seed}"), n, d, nodes)
}

/// Trees with binary class labels (0 = class A, 1 = class B).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub trees: Vec<GeometricTree>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn trees_json(&self) -> Vec<u8> {
        serialize_dataset(&self.trees)
    }

    pub fn labels_csv(&self) -> Vec<u8> {
        let mut out = csv::Writer::from_writer(Vec::new());
        out.write_record(["tree_id", "label"]).expect("in-memory write");
        for (t, l) in self.trees.iter().zip(&self.labels) {
            out.write_record([t.id(), &l.to_string()]).expect("in-memory write");
        }
        out.into_inner().expect("in-memory write")
    }

    pub fn indices_of(&self, label: u8) -> Vec<usize> {
        self.labels.iter().enumerate().filter(|(_, &l)| l == label).map(|(i, _)| i).collect()
    }
}

/// `size_a` trees from `cfg_a` then `size_b` trees from `cfg_b`. Tree `k`
/// uses stream offset `k`, so equal configs give two samples from one
/// distribution rather than repeated trees.
pub fn generate_two_class_population(
    cfg_a: &GeneratorConfig,
    cfg_b: &GeneratorConfig,
    size_a: usize,
    size_b: usize,
) -> Result<Dataset> {
    if (cfg_a.n, cfg_a.d) != (cfg_b.n, cfg_b.d) {
        return Err(Error::DimensionMismatch(format!(
            "class configs differ in dimensions: (n, d) = ({}, {}) vs ({}, {})",
            cfg_a.n, cfg_a.d, cfg_b.n, cfg_b.d
        )));
    }
    let mut trees = Vec::with_capacity(size_a + size_b);
    let mut labels = Vec::with_capacity(size_a + size_b);
    for k in 0..size_a + size_b {
        let (cfg, label) = if k < size_a { (cfg_a, 0) } else { (cfg_b, 1) };
        trees.push(generate_tree(cfg, k as u64)?);
        labels.push(label);
    }
    Ok(Dataset { trees, labels })
}

pub const PRESETS: [&str; 3] = ["null", "attr-shift", "branch-shift"];

/// Class configurations for a named preset.
///
/// * `null`: both classes share the default configuration.
/// * `attr-shift`: identical topology and geometry, attribute noise sd 0.3;
///   class B's attribute slope exceeds class A's by `3 · attr_noise_sd` per
///   generation, centred on each tree's mean depth so whole-tree attribute
///   means agree.
/// * `branch-shift`: class B bifurcates far more often than class A.
pub fn preset(name: &str, seed: u64) -> Result<(GeneratorConfig, GeneratorConfig)> {
    let base = GeneratorConfig { seed, ..Default::default() };
    match name {
        "null" => Ok((base.clone(), base)),
        "attr-shift" => {
            let a = GeneratorConfig { attr_noise_sd: 0.3, attr_center_depth: true, ..base };
            let b = GeneratorConfig { attr_depth_slope: a.attr_depth_slope + 3.0 * a.attr_noise_sd, ..a.clone() };
            Ok((a, b))
        }
        "branch-shift" => Ok((
            GeneratorConfig { p_branch: 0.2, ..base.clone() },
            GeneratorConfig { p_branch: 0.6, ..base },
        )),
        other => Err(Error::InvalidConfig(format!("unknown preset {other:?}; expected one of {PRESETS:?}"))),
    }
}

/// Reads a `tree_id,label` CSV.
pub fn parse_labels<R: Read>(reader: R) -> Result<Vec<(String, u8)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["tree_id", "label"] {
        return Err(Error::Malformed("labels header must be `tree_id,label`".into()));
    }
    rdr.records()
        .map(|r| {
            let r = r?;
            let label = match &r[1] {
                "0" => 0,
                "1" => 1,
                other => return Err(Error::Malformed(format!("label {other:?} for {} is not 0 or 1", &r[0]))),
            };
            Ok((r[0].to_string(), label))
        })
        .collect()
}
