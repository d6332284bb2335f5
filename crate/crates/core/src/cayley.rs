//! The Cayley graph `Γ_p = Γ(G_p, {δ₁, δ₂})`.

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::group::{GroupContext, GroupElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum EdgeColor {
    D1,
    D2,
}

impl EdgeColor {
    pub fn label(&self) -> &'static str {
        match self {
            EdgeColor::D1 => "D1",
            EdgeColor::D2 => "D2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CayleyEdge {
    pub source: usize,
    pub target: usize,
    pub color: EdgeColor,
}

/// A permutation of `0..n`, stored as the image of each point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.0.len()];
        for &j in &self.0 {
            if j >= seen.len() || seen[j] {
                return false;
            }
            seen[j] = true;
        }
        true
    }
}

#[derive(Clone, Debug)]
pub struct CayleyGraph {
    vertices: Vec<GroupElement>,
    edges: Vec<CayleyEdge>,
    index: HashMap<GroupElement, usize>,
}

impl CayleyGraph {
    /// Vertices in lexicographic `(a, b)` order; per vertex one `D1` edge
    /// `g → gδ₁` and one `D2` edge `g → gδ₂`.
    pub fn build(ctx: &GroupContext) -> Self {
        let vertices = ctx.elements().to_vec();
        let index: HashMap<_, _> = vertices.iter().enumerate().map(|(i, g)| (*g, i)).collect();
        let mut edges = Vec::with_capacity(2 * vertices.len());
        for (i, g) in vertices.iter().enumerate() {
            edges.push(CayleyEdge { source: i, target: index[&(*g * ctx.delta1())], color: EdgeColor::D1 });
            edges.push(CayleyEdge { source: i, target: index[&(*g * ctx.delta2())], color: EdgeColor::D2 });
        }
        Self { vertices, edges, index }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[GroupElement] {
        &self.vertices
    }

    pub fn edges(&self) -> &[CayleyEdge] {
        &self.edges
    }

    pub fn edges_of(&self, color: EdgeColor) -> impl Iterator<Item = &CayleyEdge> {
        self.edges.iter().filter(move |e| e.color == color)
    }

    pub fn index(&self, g: &GroupElement) -> usize {
        self.index[g]
    }

    pub fn element(&self, i: usize) -> GroupElement {
        self.vertices[i]
    }

    /// Target of the outgoing edge of `color` at vertex `v`.
    pub fn successor(&self, v: usize, color: EdgeColor) -> usize {
        let offset = match color {
            EdgeColor::D1 => 0,
            EdgeColor::D2 => 1,
        };
        self.edges[2 * v + offset].target
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.source == v).count()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.target == v).count()
    }

    /// Connectivity of the underlying undirected graph.
    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.source].push(e.target);
            adj[e.target].push(e.source);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    /// Writes one edge per line as `src dst color`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for e in &self.edges {
            writeln!(out, "{} {} {}", e.source, e.target, e.color.label())?;
        }
        Ok(())
    }
}

/// Partition of `G_p` into the δ₂-cycles `C_j = {δ₁^j δ₂^m}`.
#[derive(Clone, Debug, Serialize)]
pub struct CyclePartition {
    /// `cycles[j]` lists the vertices of `C_j` in traversal order `m = 0, 1, …`.
    pub cycles: Vec<Vec<usize>>,
    pub cycle_of: Vec<usize>,
}

/// Follows `D2` edges from each `δ₁^j` until the walk closes.
pub fn delta2_cycles(ctx: &GroupContext, graph: &CayleyGraph) -> CyclePartition {
    let p = ctx.p() as usize;
    let mut cycles = Vec::with_capacity(p);
    let mut cycle_of = vec![usize::MAX; graph.vertex_count()];
    for j in 0..p {
        let start = graph.index(&ctx.delta1().pow(j as u64));
        let mut cycle = vec![start];
        cycle_of[start] = j;
        let mut v = graph.successor(start, EdgeColor::D2);
        while v != start {
            cycle.push(v);
            cycle_of[v] = j;
            v = graph.successor(v, EdgeColor::D2);
        }
        cycles.push(cycle);
    }
    CyclePartition { cycles, cycle_of }
}

impl CyclePartition {
    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    /// True when the cycles are pairwise disjoint and cover every vertex.
    pub fn is_partition(&self, n: usize) -> bool {
        let mut count = vec![0usize; n];
        for c in &self.cycles {
            for &v in c {
                count[v] += 1;
            }
        }
        count.iter().all(|&c| c == 1)
    }
}

/// `profile[i][j]` counts `D1` edges from `C_i` to `C_j`.
pub fn cycle_transition_profile(graph: &CayleyGraph, partition: &CyclePartition) -> Vec<Vec<usize>> {
    let p = partition.len();
    let mut profile = vec![vec![0; p]; p];
    for e in graph.edges_of(EdgeColor::D1) {
        profile[partition.cycle_of[e.source]][partition.cycle_of[e.target]] += 1;
    }
    profile
}

/// Whether every `D1` edge moves between neighbouring cycles `C_i → C_{i±1}`.
pub fn transitions_are_adjacent(profile: &[Vec<usize>]) -> bool {
    let p = profile.len();
    profile.iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, &c)| c == 0 || j == (i + 1) % p || (j + 1) % p == i)
    })
}

/// Vertex permutation `v ↦ index(g · element(v))`.
pub fn left_action(graph: &CayleyGraph, g: &GroupElement) -> Permutation {
    Permutation(graph.vertices().iter().map(|h| graph.index(&(*g * *h))).collect())
}

/// Whether `perm` maps each edge to an edge of the same color.
pub fn preserves_colored_edges(graph: &CayleyGraph, perm: &Permutation) -> bool {
    graph.edges().iter().all(|e| {
        let s = perm.apply(e.source);
        let t = perm.apply(e.target);
        graph.successor(s, e.color) == t
    })
}
