//! JSON tree format.
//!
//! ```json
//! {"id": "t1", "n": 3, "d": 1,
//!  "nodes": [{"id": 0, "parent": null, "x": [0, 0, 0], "a": [0.5]}, ...]}
//! ```
//!
//! `a` is omitted iff `d = 0`. Serialization writes nodes in canonical order
//! with `id` equal to the canonical index, so `serialize(parse(s))` is a fixed
//! point after one round.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GeometricTree, Node};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTree {
    id: String,
    n: usize,
    d: usize,
    nodes: Vec<RawNode>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: i64,
    parent: Option<i64>,
    x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<f64>>,
}

impl TryFrom<RawTree> for GeometricTree {
    type Error = Error;

    fn try_from(raw: RawTree) -> Result<Self> {
        let mut position = HashMap::with_capacity(raw.nodes.len());
        for (i, node) in raw.nodes.iter().enumerate() {
            if position.insert(node.id, i).is_some() {
                return Err(Error::Malformed(format!("tree {}: duplicate node id {}", raw.id, node.id)));
            }
        }
        let mut roots = raw.nodes.iter().filter(|n| n.parent.is_none()).map(|n| n.id);
        if let (Some(r1), Some(r2)) = (roots.next(), roots.next()) {
            return Err(Error::MultipleRoots(r1, r2));
        }
        let nodes = raw
            .nodes
            .into_iter()
            .map(|node| {
                let parent = match node.parent {
                    None => None,
                    Some(p) if p == node.id => {
                        return Err(Error::Cycle(format!(
                            "tree {}: node {} is its own parent",
                            raw.id, node.id
                        )))
                    }
                    Some(p) => Some(*position.get(&p).ok_or_else(|| {
                        Error::Malformed(format!("tree {}: unknown parent id {p}", raw.id))
                    })?),
                };
                Ok(Node { parent, x: node.x, a: node.a })
            })
            .collect::<Result<Vec<_>>>()?;
        GeometricTree::new(raw.id, raw.n, raw.d, nodes)
    }
}

impl From<&GeometricTree> for RawTree {
    fn from(tree: &GeometricTree) -> Self {
        RawTree {
            id: tree.id.clone(),
            n: tree.n,
            d: tree.d,
            nodes: tree
                .nodes
                .iter()
                .enumerate()
                .map(|(i, node)| RawNode {
                    id: i as i64,
                    parent: node.parent.map(|p| p as i64),
                    x: node.x.clone(),
                    a: node.a.clone(),
                })
                .collect(),
        }
    }
}

pub fn parse_tree(bytes: &[u8]) -> Result<GeometricTree> {
    let raw: RawTree = serde_json::from_slice(bytes)?;
    raw.try_into()
}

pub fn serialize_tree(tree: &GeometricTree) -> Vec<u8> {
    serde_json::to_vec(&RawTree::from(tree)).expect("tree serialization is infallible")
}

/// Parses either a JSON array of trees or a single tree object.
pub fn parse_dataset(bytes: &[u8]) -> Result<Vec<GeometricTree>> {
    let value: serde_json::Value = serde_json::from_slice(bytes)?;
    if value.is_array() {
        let raws: Vec<RawTree> = serde_json::from_value(value)?;
        raws.into_iter().map(GeometricTree::try_from).collect()
    } else {
        let raw: RawTree = serde_json::from_value(value)?;
        Ok(vec![raw.try_into()?])
    }
}

pub fn serialize_dataset(trees: &[GeometricTree]) -> Vec<u8> {
    let raws: Vec<RawTree> = trees.iter().map(RawTree::from).collect();
    let mut out = serde_json::to_vec(&raws).expect("tree serialization is infallible");
    out.push(b'\n');
    out
}

/// Loads a dataset from a JSON file or from a directory of one-tree `.json`
/// files (read in file-name order).
pub fn load_dataset(path: &Path) -> Result<Vec<GeometricTree>> {
    if path.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
            .collect();
        files.sort();
        let mut trees = Vec::with_capacity(files.len());
        for file in files {
            trees.extend(parse_dataset(&fs::read(&file)?)?);
        }
        Ok(trees)
    } else {
        parse_dataset(&fs::read(path)?)
    }
}
