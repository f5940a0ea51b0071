//! Reverse causal cones of two-point correlation functions.
//!
//! The cone of `<Z_i Z_j>` after `p` QAOA blocks is supported on the
//! `p`-step neighborhood of `{i, j}`. Vertices are labelled by the round in
//! which they join the support (`layer`), which also fixes which gates are
//! inside the cone: in block `k` counted from the measurement end
//! (`k = 1` is the last block applied), a gate is kept iff it touches a
//! vertex with `layer < k`.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};
use crate::instance::{Edge, Family, SpinGlass};

/// Marked edge, depth and layer labels on top of the restricted instance.
///
/// Vertices are relabelled in BFS order; the marked edge is always `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalCone {
    #[serde(flatten)]
    pub graph: SpinGlass,
    pub marked_edge: (usize, usize),
    pub depth: usize,
    #[serde(rename = "layers")]
    pub layer_of: Vec<usize>,
    /// Parent-graph index of every cone vertex. Empty for synthetic trees.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub origin: Vec<usize>,
}

/// Infinite-size limit cone: a regular tree of `degree` grown `depth` steps
/// from the marked edge, every edge carrying `coupling`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub degree: usize,
    pub depth: usize,
    pub coupling: f64,
}

impl TreeSpec {
    pub fn new(degree: usize, depth: usize, coupling: f64) -> Result<Self> {
        if degree < 2 || depth < 1 {
            return input_err(format!("tree needs degree >= 2 and depth >= 1, got {degree}, {depth}"));
        }
        if coupling == 0.0 || !coupling.is_finite() {
            return input_err("tree coupling must be finite and non-zero");
        }
        Ok(TreeSpec { degree, depth, coupling })
    }

    /// Tree for Max-Cut on `degree`-regular graphs (coupling 1/2).
    pub fn maxcut(degree: usize, depth: usize) -> Result<Self> {
        TreeSpec::new(degree, depth, 0.5)
    }

    /// Tree for `+-1` glasses. Any sign pattern on a tree is gauge
    /// equivalent to all `+1`.
    pub fn pm_glass(degree: usize, depth: usize) -> Result<Self> {
        TreeSpec::new(degree, depth, 1.0)
    }

    pub fn with_depth(self, depth: usize) -> Result<Self> {
        TreeSpec::new(self.degree, depth, self.coupling)
    }

    /// `2 * ((d-1)^(p+1) - 1) / (d - 2)`, or `2 (p + 1)` for a path.
    pub fn vertex_count(&self) -> usize {
        let b = self.degree - 1;
        if b == 1 {
            2 * (self.depth + 1)
        } else {
            2 * (b.pow(self.depth as u32 + 1) - 1) / (b - 1)
        }
    }
}

impl CausalCone {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Is the ZZ gate on edge `(u, v)` inside the cone in block `k`
    /// (1-indexed from the measurement end)?
    pub fn keeps_edge(&self, u: usize, v: usize, k: usize) -> bool {
        self.layer_of[u].min(self.layer_of[v]) < k
    }

    /// Is the single-qubit gate on `v` inside the cone in block `k`?
    pub fn keeps_vertex(&self, v: usize, k: usize) -> bool {
        self.layer_of[v] < k
    }

    /// Edges whose ZZ gate appears in at least one block.
    pub fn active_edges(&self) -> Vec<(usize, usize)> {
        self.graph
            .edges()
            .iter()
            .filter(|e| self.keeps_edge(e.i, e.j, self.depth))
            .map(|e| (e.i, e.j))
            .collect()
    }
}

/// Support of `<Z_i Z_j>` after `p` blocks, with the induced couplings.
pub fn reverse_causal_cone(sg: &SpinGlass, edge: (usize, usize), p: usize) -> Result<CausalCone> {
    if p < 1 {
        return input_err("cone depth must be at least 1");
    }
    if sg.edge_index(edge.0, edge.1).is_none() || edge.0 >= sg.n() || edge.1 >= sg.n() {
        return input_err(format!("({}, {}) is not an edge of the instance", edge.0, edge.1));
    }
    let adj = sg.adjacency();
    let mut layer = vec![usize::MAX; sg.n()];
    let mut order = vec![edge.0, edge.1];
    layer[edge.0] = 0;
    layer[edge.1] = 0;
    let mut queue: VecDeque<usize> = order.iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        if layer[v] == p {
            continue;
        }
        for &w in &adj[v] {
            if layer[w] == usize::MAX {
                layer[w] = layer[v] + 1;
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    let mut relabel = vec![usize::MAX; sg.n()];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    let edges = sg
        .edges()
        .iter()
        .filter(|e| relabel[e.i] != usize::MAX && relabel[e.j] != usize::MAX)
        .map(|e| Edge { i: relabel[e.i], j: relabel[e.j], coupling: e.coupling })
        .collect();
    let fields = order.iter().map(|&v| sg.fields()[v]).collect();
    let mut graph = SpinGlass::new(order.len(), edges, fields, 0.0)?;
    if let Some(meta) = sg.meta() {
        graph = graph.with_meta(meta.family, meta.seed);
    }
    Ok(CausalCone {
        graph,
        marked_edge: (0, 1),
        depth: p,
        layer_of: order.iter().map(|&v| layer[v]).collect(),
        origin: order,
    })
}

/// Regular tree grown from the marked edge `(0, 1)`: every vertex closer
/// than `depth` to its root gets `degree - 1` children, leaves have degree 1.
pub fn build_tree_cone(spec: &TreeSpec) -> Result<CausalCone> {
    let spec = TreeSpec::new(spec.degree, spec.depth, spec.coupling)?;
    let total = spec.vertex_count();
    let mut layer_of = Vec::with_capacity(total);
    let mut edges = Vec::with_capacity(total - 1);
    layer_of.extend([0, 0]);
    edges.push(Edge { i: 0, j: 1, coupling: spec.coupling });
    let mut next = 0;
    while next < layer_of.len() {
        let v = next;
        next += 1;
        if layer_of[v] == spec.depth {
            continue;
        }
        for _ in 0..spec.degree - 1 {
            let child = layer_of.len();
            layer_of.push(layer_of[v] + 1);
            edges.push(Edge { i: v, j: child, coupling: spec.coupling });
        }
    }
    debug_assert_eq!(layer_of.len(), total);
    let n = layer_of.len();
    let graph = SpinGlass::new(n, edges, vec![0.0; n], 0.0)?.with_meta(Family::Tree, 0);
    Ok(CausalCone { graph, marked_edge: (0, 1), depth: spec.depth, layer_of, origin: Vec::new() })
}
