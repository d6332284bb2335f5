use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::glue::UnionFind;
use super::{DiscreteBlock, DiscreteSurface};
use crate::error::{Error, Result};

/// A 2-complex given by vertices, an edge list and polygonal faces.
pub trait CellComplex {
    fn vertex_count(&self) -> usize;
    fn edge_pairs(&self) -> Vec<(usize, usize)>;
    fn faces(&self) -> &[Vec<usize>];
}

impl CellComplex for DiscreteBlock {
    fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.i, e.j)).collect()
    }

    fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }
}

impl CellComplex for DiscreteSurface {
    fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(|e| (e.i, e.j)).collect()
    }

    fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }
}

/// Plain complex, e.g. the result of [`cap_boundaries`].
#[derive(Clone, Debug, Default)]
pub struct SimpleComplex {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
    pub faces: Vec<Vec<usize>>,
}

impl CellComplex for SimpleComplex {
    fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.clone()
    }

    fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Number of faces on each edge, rejecting face sides missing from the edge
/// list and edges on more than two faces.
fn face_incidence(c: &impl CellComplex) -> Result<BTreeMap<(usize, usize), usize>> {
    let mut count: BTreeMap<(usize, usize), usize> = c.edge_pairs().into_iter().map(|(i, j)| (key(i, j), 0)).collect();
    for f in c.faces() {
        for k in 0..f.len() {
            let e = key(f[k], f[(k + 1) % f.len()]);
            match count.get_mut(&e) {
                Some(n) => *n += 1,
                None => return Err(Error::Malformed(format!("face side {e:?} is not an edge"))),
            }
        }
    }
    if let Some((e, n)) = count.iter().find(|(_, &n)| n > 2) {
        return Err(Error::Malformed(format!("edge {e:?} lies on {n} faces")));
    }
    Ok(count)
}

/// Boundary cycles: connected components of the edges lying on one face.
/// Each returned cycle lists its vertices in traversal order.
pub fn boundary_components(c: &impl CellComplex) -> Result<Vec<Vec<usize>>> {
    let incidence = face_incidence(c)?;
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (&(a, b), &n) in &incidence {
        if n == 1 {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
    }
    if let Some((v, nb)) = adj.iter().find(|(_, nb)| nb.len() != 2) {
        return Err(Error::Malformed(format!("boundary vertex {v} has {} boundary neighbours", nb.len())));
    }
    let mut seen = BTreeSet::new();
    let mut cycles = Vec::new();
    for &start in adj.keys() {
        if seen.contains(&start) {
            continue;
        }
        let mut cycle = vec![start];
        seen.insert(start);
        let (mut prev, mut cur) = (start, adj[&start][0]);
        while cur != start {
            cycle.push(cur);
            seen.insert(cur);
            let nb = &adj[&cur];
            let next = if nb[0] == prev { nb[1] } else { nb[0] };
            prev = cur;
            cur = next;
        }
        cycles.push(cycle);
    }
    Ok(cycles)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub chi: i64,
    pub boundary_count: usize,
    /// `(2 − χ − b)/2` when that is a non-negative integer.
    pub genus_chi: Option<i64>,
    /// First Betti number `E − V + 1` of the graph with one vertex per
    /// δ₂-cycle and one edge per `D1` edge.
    pub tube_genus: Option<i64>,
    /// Closed form `1 + p(p − 1)` quoted for the glued surface.
    pub stated_genus: Option<i64>,
}

impl EulerReport {
    pub fn agrees_with_tube_graph(&self) -> Option<bool> {
        Some(self.genus_chi? == self.tube_genus?)
    }
}

/// Euler characteristic and genus; with `p` the genus is compared against the
/// combinatorial predictions for `S_p`.
pub fn euler_genus(c: &impl CellComplex, p: Option<u32>) -> Result<EulerReport> {
    let v = c.vertex_count();
    let e = c.edge_pairs().len();
    let f = c.faces().len();
    let b = boundary_components(c)?.len();
    let chi = v as i64 - e as i64 + f as i64;
    let twice = 2 - chi - b as i64;
    let genus_chi = (twice >= 0 && twice % 2 == 0).then_some(twice / 2);
    let (tube_genus, stated_genus) = match p {
        Some(p) => {
            let p = p as i64;
            let tube_vertices = p;
            let tube_edges = p * (p - 1);
            (Some(tube_edges - tube_vertices + 1), Some(1 + p * (p - 1)))
        }
        None => (None, None),
    };
    Ok(EulerReport { vertices: v, edges: e, faces: f, chi, boundary_count: b, genus_chi, tube_genus, stated_genus })
}

/// Closes every boundary cycle with a cone over a new vertex.
pub fn cap_boundaries(c: &impl CellComplex) -> Result<SimpleComplex> {
    let cycles = boundary_components(c)?;
    let mut out = SimpleComplex { vertex_count: c.vertex_count(), edges: c.edge_pairs(), faces: c.faces().to_vec() };
    for cycle in cycles {
        let apex = out.vertex_count;
        out.vertex_count += 1;
        for (k, &x) in cycle.iter().enumerate() {
            out.edges.push((x, apex));
            out.faces.push(vec![x, cycle[(k + 1) % cycle.len()], apex]);
        }
    }
    Ok(out)
}

/// Connected components of the surface after deleting the collar
/// mid-circles (vertices without a region). Each component is returned as a
/// sorted vertex list.
pub fn components_after_cut(s: &DiscreteSurface) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(s.vertex_count);
    for e in &s.edges {
        if s.region_of[e.i].is_some() && s.region_of[e.j].is_some() {
            uf.union(e.i, e.j);
        }
    }
    let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..s.vertex_count {
        if s.region_of[v].is_some() {
            comps.entry(uf.find(v)).or_default().push(v);
        }
    }
    comps.into_values().collect()
}
