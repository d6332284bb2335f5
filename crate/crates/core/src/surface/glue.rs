//! Vertex identification shared by block construction and surface assembly.

use std::collections::BTreeMap;

use super::{BoundaryVertex, Edge};
use crate::error::{Error, Result};

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes; the smaller root survives.
    pub fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra < rb {
            self.parent[rb] = ra;
        } else if rb < ra {
            self.parent[ra] = rb;
        }
    }
}

/// Accumulates vertices, edge conductances, faces and masses.
#[derive(Default)]
pub(crate) struct ComplexBuilder {
    pub n: usize,
    pub edges: BTreeMap<(usize, usize), f64>,
    pub faces: Vec<Vec<usize>>,
    pub mass: BTreeMap<usize, f64>,
}

impl ComplexBuilder {
    pub fn add_vertex(&mut self) -> usize {
        self.n += 1;
        self.n - 1
    }

    pub fn add_edge(&mut self, a: usize, b: usize, conductance: f64) {
        debug_assert!(a != b && conductance > 0.0);
        let key = if a < b { (a, b) } else { (b, a) };
        *self.edges.entry(key).or_insert(0.0) += conductance;
    }

    pub fn add_mass(&mut self, v: usize, m: f64) {
        *self.mass.entry(v).or_insert(0.0) += m;
    }

    pub fn edge_list(&self) -> Vec<Edge> {
        self.edges.iter().map(|(&(i, j), &c)| Edge { i, j, conductance: c }).collect()
    }

    pub fn boundary_list(&self) -> Vec<BoundaryVertex> {
        self.mass.iter().map(|(&vertex, &mass)| BoundaryVertex { vertex, mass }).collect()
    }
}

/// Input piece for [`glue_pieces`].
pub(crate) struct Piece<'a> {
    pub vertex_count: usize,
    pub edges: &'a [Edge],
    pub faces: &'a [Vec<usize>],
    pub boundary: &'a [BoundaryVertex],
}

pub(crate) struct Glued {
    pub vertex_count: usize,
    pub edges: Vec<Edge>,
    pub faces: Vec<Vec<usize>>,
    pub boundary: Vec<BoundaryVertex>,
    /// `slot_to_global[offsets[piece] + local]`.
    pub slot_to_global: Vec<usize>,
    pub offsets: Vec<usize>,
    /// Every `(piece, local)` representing each glued vertex.
    pub reps: Vec<Vec<(usize, usize)>>,
}

impl Glued {
    pub fn global(&self, piece: usize, local: usize) -> usize {
        self.slot_to_global[self.offsets[piece] + local]
    }
}

/// Identifies port vertices pairwise and merges the pieces into one complex.
///
/// Surface vertices are numbered by their smallest `(piece, local)`
/// representative, so the result depends only on the piece order.
pub(crate) fn glue_pieces(pieces: &[Piece<'_>], identifications: &[((usize, usize), (usize, usize))]) -> Result<Glued> {
    let mut offsets = Vec::with_capacity(pieces.len());
    let mut total = 0;
    for p in pieces {
        offsets.push(total);
        total += p.vertex_count;
    }
    let mut uf = UnionFind::new(total);
    for &((pa, la), (pb, lb)) in identifications {
        uf.union(offsets[pa] + la, offsets[pb] + lb);
    }
    let mut root_id = vec![usize::MAX; total];
    let mut slot_to_global = vec![0; total];
    let mut n = 0;
    for s in 0..total {
        let r = uf.find(s);
        if root_id[r] == usize::MAX {
            root_id[r] = n;
            n += 1;
        }
        slot_to_global[s] = root_id[r];
    }
    let mut reps = vec![Vec::new(); n];
    for (pi, p) in pieces.iter().enumerate() {
        for l in 0..p.vertex_count {
            reps[slot_to_global[offsets[pi] + l]].push((pi, l));
        }
    }

    let mut edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut faces = Vec::new();
    let mut mass: BTreeMap<usize, f64> = BTreeMap::new();
    for (pi, p) in pieces.iter().enumerate() {
        let map = |l: usize| slot_to_global[offsets[pi] + l];
        for e in p.edges {
            let (a, b) = (map(e.i), map(e.j));
            if a == b {
                return Err(Error::Gluing(format!("edge ({}, {}) of piece {pi} collapses", e.i, e.j)));
            }
            let key = if a < b { (a, b) } else { (b, a) };
            *edges.entry(key).or_insert(0.0) += e.conductance;
        }
        for f in p.faces {
            let mapped: Vec<usize> = f.iter().map(|&l| map(l)).collect();
            let mut sorted = mapped.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != mapped.len() {
                return Err(Error::Gluing(format!("face of piece {pi} degenerates")));
            }
            faces.push(mapped);
        }
        for b in p.boundary {
            *mass.entry(map(b.vertex)).or_insert(0.0) += b.mass;
        }
    }
    Ok(Glued {
        vertex_count: n,
        edges: edges.into_iter().map(|((i, j), c)| Edge { i, j, conductance: c }).collect(),
        faces,
        boundary: mass.into_iter().map(|(vertex, mass)| BoundaryVertex { vertex, mass }).collect(),
        slot_to_global,
        offsets,
        reps,
    })
}

/// Index-aligned identification of two equally long ports.
pub(crate) fn port_pairs(
    piece_a: usize,
    port_a: &[usize],
    piece_b: usize,
    port_b: &[usize],
) -> Result<Vec<((usize, usize), (usize, usize))>> {
    if port_a.len() != port_b.len() {
        return Err(Error::Gluing(format!("port sizes differ: {} vs {}", port_a.len(), port_b.len())));
    }
    Ok(port_a.iter().zip(port_b).map(|(&a, &b)| ((piece_a, a), (piece_b, b))).collect())
}
