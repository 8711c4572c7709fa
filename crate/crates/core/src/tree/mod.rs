//! Geometric trees: rooted trees whose nodes carry a position in R^n and,
//! optionally, an attribute vector in R^d.
//!
//! Trees are stored in canonical breadth-first order: nodes are sorted by
//! (level, parent index, input order), so the root is always node 0 and each
//! level occupies a contiguous index range. All structural queries below rely
//! on that layout.

mod io;

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::ops::Range;

use crate::error::{Error, Result};

pub use io::{load_dataset, parse_dataset, parse_tree, serialize_dataset, serialize_tree};

/// A node as supplied by the caller. `parent` indexes into the same input
/// vector; edge attributes belong to the child node of the edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub parent: Option<usize>,
    pub x: Vec<f64>,
    pub a: Option<Vec<f64>>,
}

impl Node {
    pub fn new(parent: Option<usize>, x: Vec<f64>) -> Self {
        Self { parent, x, a: None }
    }

    pub fn with_attributes(mut self, a: Vec<f64>) -> Self {
        self.a = Some(a);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricTree {
    id: String,
    n: usize,
    d: usize,
    nodes: Vec<Node>,
    children: Vec<Vec<usize>>,
    levels: Vec<usize>,
    // level_starts[l - 1] is the first index at level l; last entry is len().
    level_starts: Vec<usize>,
}

impl GeometricTree {
    /// Validates the node list and reorders it canonically.
    ///
    /// If `nodes` is already in canonical breadth-first order the indices are
    /// preserved.
    pub fn new(id: impl Into<String>, n: usize, d: usize, nodes: Vec<Node>) -> Result<Self> {
        let id = id.into();
        if n == 0 {
            return Err(Error::DimensionMismatch(format!("tree {id}: n must be positive")));
        }
        if nodes.is_empty() {
            return Err(Error::Malformed(format!("tree {id} has no nodes")));
        }
        let len = nodes.len();

        let mut root = None;
        let mut input_children = vec![Vec::new(); len];
        for (i, node) in nodes.iter().enumerate() {
            if node.x.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "tree {id} node {i}: x has length {}, expected n = {n}",
                    node.x.len()
                )));
            }
            match (&node.a, d) {
                (None, 0) => {}
                (Some(a), d) if d > 0 && a.len() == d => {}
                (Some(a), _) => {
                    return Err(Error::DimensionMismatch(format!(
                        "tree {id} node {i}: a has length {}, expected d = {d}",
                        a.len()
                    )))
                }
                (None, _) => {
                    return Err(Error::DimensionMismatch(format!(
                        "tree {id} node {i}: missing attributes (d = {d})"
                    )))
                }
            }
            match node.parent {
                None => {
                    if let Some(r) = root {
                        return Err(Error::MultipleRoots(r as i64, i as i64));
                    }
                    root = Some(i);
                }
                Some(p) if p == i => {
                    return Err(Error::Cycle(format!("tree {id}: node {i} is its own parent")))
                }
                Some(p) if p >= len => return Err(Error::InvalidIndex { index: p, len }),
                Some(p) => input_children[p].push(i),
            }
        }
        let root = root.ok_or_else(|| Error::Cycle(format!("tree {id}: no root node")))?;

        // Breadth-first traversal with children in input order yields the
        // canonical (level, parent, input order) ordering.
        let mut order = Vec::with_capacity(len);
        let mut new_index = vec![usize::MAX; len];
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            new_index[v] = order.len();
            order.push(v);
            queue.extend(input_children[v].iter().copied());
        }
        if order.len() != len {
            let stray = new_index.iter().position(|&k| k == usize::MAX).unwrap_or(0);
            return Err(Error::Cycle(format!(
                "tree {id}: node {stray} is not reachable from the root"
            )));
        }

        let mut canonical = Vec::with_capacity(len);
        let mut slots: Vec<Option<Node>> = nodes.into_iter().map(Some).collect();
        for &old in &order {
            let mut node = slots[old].take().expect("each node visited once");
            node.parent = node.parent.map(|p| new_index[p]);
            canonical.push(node);
        }
        Ok(Self::from_canonical(id, n, d, canonical))
    }

    fn from_canonical(id: String, n: usize, d: usize, nodes: Vec<Node>) -> Self {
        let len = nodes.len();
        let mut children = vec![Vec::new(); len];
        let mut levels = vec![1usize; len];
        for i in 1..len {
            let p = nodes[i].parent.expect("non-root node has a parent");
            children[p].push(i);
            levels[i] = levels[p] + 1;
        }
        let height = levels[len - 1];
        let mut level_starts = vec![len; height + 1];
        for (i, &l) in levels.iter().enumerate().rev() {
            level_starts[l - 1] = i;
        }
        Self { id, n, d, nodes, children, levels, level_starts }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn set_id(&mut self, id: impl Into<String>) {
        self.id = id.into();
    }

    /// Geometric dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Attribute dimension, 0 when unattributed.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.nodes[v].parent
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn position(&self, v: usize) -> &[f64] {
        &self.nodes[v].x
    }

    pub fn attributes(&self, v: usize) -> Option<&[f64]> {
        self.nodes[v].a.as_deref()
    }

    /// 1-based level; the root is at level 1.
    pub fn level(&self, v: usize) -> usize {
        self.levels[v]
    }

    /// Generation (depth), with the root at generation 0.
    pub fn depth(&self, v: usize) -> usize {
        self.levels[v] - 1
    }

    pub fn height(&self) -> usize {
        self.level_starts.len() - 1
    }

    /// Undirected degree of `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.children[v].len() + usize::from(self.nodes[v].parent.is_some())
    }

    /// Indices of the nodes at level `l` (1-based); empty when `l` is 0 or
    /// exceeds the height.
    pub fn nodes_at_level(&self, l: usize) -> Range<usize> {
        if l == 0 || l > self.height() {
            return 0..0;
        }
        self.level_starts[l - 1]..self.level_starts[l]
    }

    fn check_index(&self, v: usize) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::InvalidIndex { index: v, len: self.len() })
        }
    }

    /// The unique path from `from` to `to`, ascending to the highest common
    /// ancestor and then descending.
    pub fn node_path(&self, from: usize, to: usize) -> Result<NodePath> {
        self.check_index(from)?;
        self.check_index(to)?;
        let (mut up, mut down) = (vec![from], vec![to]);
        let (mut u, mut w) = (from, to);
        while self.levels[u] > self.levels[w] {
            u = self.nodes[u].parent.expect("deeper node has a parent");
            up.push(u);
        }
        while self.levels[w] > self.levels[u] {
            w = self.nodes[w].parent.expect("deeper node has a parent");
            down.push(w);
        }
        while u != w {
            u = self.nodes[u].parent.expect("distinct nodes below the root");
            w = self.nodes[w].parent.expect("distinct nodes below the root");
            up.push(u);
            down.push(w);
        }
        down.pop();
        up.extend(down.into_iter().rev());
        Ok(NodePath { nodes: up })
    }

    /// Path from `v` up to the root.
    pub fn rootpath(&self, v: usize) -> Result<NodePath> {
        self.node_path(v, self.root())
    }

    /// Descendant vectors for every node, by dynamic programming from the
    /// deepest level upward.
    pub fn descendant_vectors(&self) -> Vec<DescendantVector> {
        let mut deltas: Vec<DescendantVector> = vec![DescendantVector::default(); self.len()];
        for v in (0..self.len()).rev() {
            let mut below: Vec<u64> = Vec::new();
            for &c in &self.children[v] {
                below = left_aligned_add(&below, &deltas[c].counts);
            }
            let mut counts = Vec::with_capacity(below.len() + 1);
            counts.push(1);
            counts.extend(below);
            deltas[v] = DescendantVector { counts };
        }
        deltas
    }

    /// Total order on tree content (structure, positions, attributes), used to
    /// fix the argument order of pairwise kernels.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        fn cmp_vec(a: &[f64], b: &[f64]) -> Ordering {
            a.len()
                .cmp(&b.len())
                .then_with(|| {
                    a.iter()
                        .zip(b)
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(Ordering::Equal)
                })
        }
        self.len()
            .cmp(&other.len())
            .then(self.n.cmp(&other.n))
            .then(self.d.cmp(&other.d))
            .then_with(|| {
                self.nodes
                    .iter()
                    .zip(&other.nodes)
                    .map(|(p, q)| {
                        p.parent
                            .cmp(&q.parent)
                            .then_with(|| cmp_vec(&p.x, &q.x))
                            .then_with(|| {
                                cmp_vec(p.a.as_deref().unwrap_or(&[]), q.a.as_deref().unwrap_or(&[]))
                            })
                    })
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
    }
}

/// Orders a pair of trees canonically so pairwise kernels are exactly
/// symmetric in floating point.
pub(crate) fn canonical_pair<'a>(
    t1: &'a GeometricTree,
    t2: &'a GeometricTree,
) -> (&'a GeometricTree, &'a GeometricTree) {
    if t1.canonical_cmp(t2) == Ordering::Greater {
        (t2, t1)
    } else {
        (t1, t2)
    }
}

/// A node sequence along the tree, from the first endpoint to the last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePath {
    nodes: Vec<usize>,
}

impl NodePath {
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Number of nodes on the path.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn reversed(&self) -> NodePath {
        NodePath { nodes: self.nodes.iter().rev().copied().collect() }
    }
}

/// `counts[j]` is the number of descendants (the node itself included) at
/// relative depth `j`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DescendantVector {
    pub counts: Vec<u64>,
}

impl DescendantVector {
    pub fn subtree_size(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Inner product over the common prefix.
    pub fn dot(&self, other: &Self) -> u64 {
        self.counts.iter().zip(&other.counts).map(|(a, b)| a * b).sum()
    }
}

/// Left-aligned vector addition: `[a, b, c] ⊕ [d, e] = [a + d, b + e, c]`.
pub fn left_aligned_add(u: &[u64], v: &[u64]) -> Vec<u64> {
    let (long, short) = if u.len() >= v.len() { (u, v) } else { (v, u) };
    let mut out = long.to_vec();
    for (o, s) in out.iter_mut().zip(short) {
        *o += s;
    }
    out
}
