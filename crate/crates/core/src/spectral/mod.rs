//! Steklov and Steklov–Neumann eigenproblems on weighted complexes.
//!
//! The discrete Laplacian `L` of a domain is reduced to its boundary by the
//! Schur complement `Λ = L_BB − L_BI L_II⁻¹ L_IB`; Steklov eigenvalues solve
//! `Λ v = σ M v` with the diagonal boundary mass `M`.

mod dtn;
mod eigen;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use dtn::{dtn_operator, dtn_operator_cg, SteklovOperator};
pub use eigen::{multiplicity, steklov_spectrum, steklov_spectrum_with_tol, SpectralResult, GAP_REL_TOL};

use crate::cayley::Permutation;
use crate::error::{Error, Result};
use crate::group::GroupContext;
use crate::reptheory::{isotypic_multiplicities, IsotypicEntry, PermutationAction};
use crate::surface::{collar_half_width, BoundaryVertex, DiscreteSurface, Edge};

/// Anything with weighted edges and a massed boundary.
pub trait SteklovDomain {
    fn vertex_count(&self) -> usize;
    fn edges(&self) -> &[Edge];
    fn boundary(&self) -> &[BoundaryVertex];
}

impl SteklovDomain for DiscreteSurface {
    fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    fn edges(&self) -> &[Edge] {
        &self.edges
    }

    fn boundary(&self) -> &[BoundaryVertex] {
        &self.boundary
    }
}

/// A bare weighted graph with boundary masses.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub vertex_count: usize,
    pub edges: Vec<Edge>,
    pub boundary: Vec<BoundaryVertex>,
}

impl WeightedGraph {
    /// Path `0 − 1 − … − (n−1)` with the given conductances and unit masses at
    /// both ends.
    pub fn path(conductances: &[f64]) -> Self {
        let n = conductances.len() + 1;
        Self {
            vertex_count: n,
            edges: conductances.iter().enumerate().map(|(i, &c)| Edge { i, j: i + 1, conductance: c }).collect(),
            boundary: vec![BoundaryVertex { vertex: 0, mass: 1.0 }, BoundaryVertex { vertex: n - 1, mass: 1.0 }],
        }
    }

    /// Copy with vertices renamed by `perm` (vertex `v` becomes `perm[v]`).
    pub fn relabeled(&self, perm: &Permutation) -> Self {
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| {
                let (a, b) = (perm.apply(e.i), perm.apply(e.j));
                Edge { i: a.min(b), j: a.max(b), conductance: e.conductance }
            })
            .collect();
        edges.sort_by_key(|e| (e.i, e.j));
        let mut boundary: Vec<BoundaryVertex> =
            self.boundary.iter().map(|b| BoundaryVertex { vertex: perm.apply(b.vertex), mass: b.mass }).collect();
        boundary.sort_by_key(|b| b.vertex);
        Self { vertex_count: self.vertex_count, edges, boundary }
    }

    pub fn from_domain(d: &impl SteklovDomain) -> Self {
        Self { vertex_count: d.vertex_count(), edges: d.edges().to_vec(), boundary: d.boundary().to_vec() }
    }
}

impl SteklovDomain for WeightedGraph {
    fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    fn edges(&self) -> &[Edge] {
        &self.edges
    }

    fn boundary(&self) -> &[BoundaryVertex] {
        &self.boundary
    }
}

/// Sparse graph Laplacian stored as diagonal plus adjacency lists.
#[derive(Clone, Debug)]
pub struct Laplacian {
    pub diag: Vec<f64>,
    pub adj: Vec<Vec<(usize, f64)>>,
}

impl Laplacian {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.size())
            .map(|i| self.diag[i] * u[i] - self.adj[i].iter().map(|&(j, c)| c * u[j]).sum::<f64>())
            .collect()
    }

    /// `uᵀLu = Σ_edges c (u_i − u_j)²`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let mut e = 0.0;
        for (i, nb) in self.adj.iter().enumerate() {
            for &(j, c) in nb {
                if i < j {
                    e += c * (u[i] - u[j]).powi(2);
                }
            }
        }
        e
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            for &(j, c) in &self.adj[i] {
                m[(i, j)] -= c;
            }
        }
        m
    }
}

pub fn assemble_laplacian(d: &impl SteklovDomain) -> Laplacian {
    let n = d.vertex_count();
    let mut diag = vec![0.0; n];
    let mut adj = vec![Vec::new(); n];
    for e in d.edges() {
        diag[e.i] += e.conductance;
        diag[e.j] += e.conductance;
        adj[e.i].push((e.j, e.conductance));
        adj[e.j].push((e.i, e.conductance));
    }
    Laplacian { diag, adj }
}

/// Discrete Rayleigh quotient `uᵀLu / Σ_∂ m_v u_v²`.
pub fn rayleigh(d: &impl SteklovDomain, u: &[f64]) -> Result<f64> {
    if u.len() != d.vertex_count() {
        return Err(Error::InvalidParameter(format!("vector length {} != {}", u.len(), d.vertex_count())));
    }
    let denom: f64 = d.boundary().iter().map(|b| b.mass * u[b.vertex] * u[b.vertex]).sum();
    if denom <= 0.0 {
        return Err(Error::ZeroBoundaryNorm);
    }
    Ok(assemble_laplacian(d).energy(u) / denom)
}

/// Induced subgraph on `domain`, dropping components that miss the boundary.
pub fn restrict_to_domain(d: &impl SteklovDomain, domain: &[bool]) -> Result<(WeightedGraph, Vec<usize>)> {
    let missing = d.boundary().iter().filter(|b| !domain[b.vertex]).count();
    if missing > 0 {
        return Err(Error::DomainMissingBoundary(missing));
    }
    let n = d.vertex_count();
    let mut adj = vec![Vec::new(); n];
    for e in d.edges() {
        if domain[e.i] && domain[e.j] {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
    }
    let mut keep = vec![false; n];
    let mut stack: Vec<usize> = d.boundary().iter().map(|b| b.vertex).collect();
    for &v in &stack {
        keep[v] = true;
    }
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !keep[w] {
                keep[w] = true;
                stack.push(w);
            }
        }
    }
    let mut local = vec![usize::MAX; n];
    let mut vertices = Vec::new();
    for v in 0..n {
        if keep[v] {
            local[v] = vertices.len();
            vertices.push(v);
        }
    }
    let edges = d
        .edges()
        .iter()
        .filter(|e| keep[e.i] && keep[e.j])
        .map(|e| Edge { i: local[e.i], j: local[e.j], conductance: e.conductance })
        .collect();
    let boundary =
        d.boundary().iter().map(|b| BoundaryVertex { vertex: local[b.vertex], mass: b.mass }).collect();
    Ok((WeightedGraph { vertex_count: vertices.len(), edges, boundary }, vertices))
}

/// Steklov–Neumann operator of the subcomplex induced on `domain`: the
/// Schur complement onto `∂S` with no coupling across the domain's interior
/// boundary.
pub fn neumann_operator(d: &impl SteklovDomain, domain: &[bool]) -> Result<SteklovOperator> {
    let (g, _) = restrict_to_domain(d, domain)?;
    dtn_operator(&g)
}

pub fn steklov_neumann_spectrum(d: &impl SteklovDomain, domain: &[bool], count: usize) -> Result<SpectralResult> {
    steklov_spectrum(&neumann_operator(d, domain)?, count)
}

/// Test function of region `i`: 1 on the region, 0 on other regions, and on
/// each half-collar of the region the ramp `|ρ| / w(ℓ)` vanishing on the
/// collar mid-circle.
pub fn test_function(s: &DiscreteSurface, region: usize) -> Result<Vec<f64>> {
    if region >= s.region_count {
        return Err(Error::InvalidParameter(format!("region {region} out of range 0..{}", s.region_count)));
    }
    let w = s.profile.half_width;
    Ok((0..s.vertex_count)
        .map(|v| match s.region_of[v] {
            Some(r) if r == region => s.collar[v].map_or(1.0, |c| (c.rho.abs() / w).min(1.0)),
            _ => 0.0,
        })
        .collect())
}

/// Total boundary mass of region `i` outside its collars.
pub fn region_boundary_mass(s: &DiscreteSurface, region: usize) -> f64 {
    s.boundary.iter().filter(|b| s.region_of[b.vertex] == Some(region)).map(|b| b.mass).sum()
}

/// `(2p − 2) ℓ² / (4 A w(ℓ))`.
pub fn analytic_bound(p: u32, ell: f64, a_const: f64) -> Result<f64> {
    if p < 3 || !(a_const > 0.0) {
        return Err(Error::InvalidParameter(format!("analytic bound needs p ≥ 3 and A > 0, got p = {p}, A = {a_const}")));
    }
    let w = collar_half_width(ell)?;
    Ok((2.0 * p as f64 - 2.0) * ell * ell / (4.0 * a_const * w))
}

/// Group action restricted to the boundary rows of `op`.
pub fn boundary_action(op: &SteklovOperator, action: &[Permutation]) -> Result<Vec<Permutation>> {
    action
        .iter()
        .map(|perm| {
            op.boundary
                .iter()
                .map(|&v| {
                    op.boundary_index[perm.apply(v)]
                        .ok_or_else(|| Error::SymmetryBroken(format!("vertex {v} leaves the boundary")))
                })
                .collect::<Result<Vec<usize>>>()
                .map(Permutation)
        })
        .collect()
}

/// Largest relative defect of `Λ` and `M` under a boundary permutation.
pub fn commutation_defect(op: &SteklovOperator, perm: &Permutation) -> f64 {
    let n = op.size();
    let scale = op.norm().max(f64::MIN_POSITIVE);
    let mut d: f64 = 0.0;
    for j in 0..n {
        let pj = perm.apply(j);
        for i in 0..n {
            d = d.max((op.dtn[(perm.apply(i), pj)] - op.dtn[(i, j)]).abs() / scale);
        }
        d = d.max((op.mass[pj] - op.mass[j]).abs() / op.mass[j]);
    }
    d
}

/// Largest `‖ΛΠv − σMΠv‖ / ‖Λ‖` over the returned pairs.
pub fn permuted_residual(op: &SteklovOperator, result: &SpectralResult, perm: &Permutation) -> f64 {
    let n = op.size();
    let scale = op.norm().max(f64::MIN_POSITIVE);
    (0..result.len())
        .map(|c| {
            let mut pv = DVector::zeros(n);
            for i in 0..n {
                pv[perm.apply(i)] = result.eigenvectors[(i, c)];
            }
            let r = &op.dtn * &pv - result.eigenvalues[c] * op.mass.component_mul(&pv);
            r.norm() / scale
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterIsotypic {
    pub cluster: Vec<usize>,
    pub entries: Vec<IsotypicEntry>,
    /// `⟨δ₁⟩` fixes every vector of the cluster (only degree-1 irreps occur).
    pub delta1_trivial: bool,
    pub commutation_defect: f64,
}

/// Decomposes the span of a cluster of eigenvectors under the group action.
pub fn eigenspace_isotypic(
    op: &SteklovOperator,
    result: &SpectralResult,
    cluster: &[usize],
    ctx: &GroupContext,
    action: &[Permutation],
) -> Result<ClusterIsotypic> {
    let perms = boundary_action(op, action)?;
    let defect = perms.iter().map(|p| commutation_defect(op, p)).fold(0.0, f64::max);
    if defect > 1e-8 {
        return Err(Error::SymmetryBroken(format!("action fails to commute with the operator by {defect:e}")));
    }
    let n = op.size();
    let mut basis = DMatrix::zeros(n, cluster.len());
    for (k, &c) in cluster.iter().enumerate() {
        basis.set_column(k, &result.eigenvectors.column(c));
    }
    let weights: Vec<f64> = op.mass.iter().copied().collect();
    let action = PermutationAction { perms };
    let entries = isotypic_multiplicities(ctx, &action, &basis, &weights)?;
    let d1 = &action.perms[ctx.index(&ctx.delta1())];
    let mut moved: f64 = 0.0;
    for k in 0..cluster.len() {
        for i in 0..n {
            moved = moved.max((basis[(d1.apply(i), k)] - basis[(i, k)]).abs() * op.mass[i].sqrt());
        }
    }
    Ok(ClusterIsotypic { cluster: cluster.to_vec(), entries, delta1_trivial: moved < 1e-6, commutation_defect: defect })
}

#[cfg(test)]
mod tests;
