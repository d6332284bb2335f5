//! Weighted 2-complexes modelling the building block `B(ℓ)`, its self-glued
//! variant `B'(ℓ)`, the glued surface `S_p(ℓ)` and its quotient `S'_p(ℓ)`.
//!
//! A block is a perforated square `[−2, 2]²∖D` (Euclidean finite-volume
//! conductances), an ℓ-independent junction complex with unit conductances
//! (a discrete three-holed sphere), and two half-collars `[0, w(ℓ)] × S¹`
//! carrying Fermi-metric conductances. The `ρ = 0` rims of the half-collars
//! are the ports `γ₁±`; gluing two of them produces a full collar around a
//! geodesic of length `ℓ`. The square's vertical sides are `γ₂±` and its
//! horizontal sides `b₁`, `b₂` form the Steklov boundary.

mod assemble;
mod block;
mod collar;
mod glue;
mod topology;

use serde::{Deserialize, Serialize};

use crate::cayley::Permutation;
use crate::error::{Error, Result};

pub use assemble::{
    assemble_quotient_direct, assemble_surface, quotient_by_delta1, quotient_isomorphism, QuotientMatch,
};
pub use block::{build_block, build_block_prime, BlockPorts, DiscreteBlock};
pub use collar::{collar_area, collar_half_width, fermi_collar_area, CollarProfile, MIN_ELL};
pub use topology::{
    boundary_components, cap_boundaries, components_after_cut, euler_genus, CellComplex, EulerReport, SimpleComplex,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Resolution {
    /// Segments per side of the square.
    pub square_n: usize,
    pub collar_n_rho: usize,
    pub collar_n_t: usize,
    /// Number of bridge vertices and of intermediate rings per junction leg.
    pub pants_level: usize,
}

impl Resolution {
    /// Defaults derived from the square resolution: collar grid `4n × 2n`.
    pub fn from_square_n(square_n: usize) -> Self {
        Self { square_n, collar_n_rho: 4 * square_n, collar_n_t: 2 * square_n, pants_level: 2 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.square_n < 4 || self.square_n % 2 != 0 {
            return Err(Error::Resolution(format!("square_n = {} must be even and at least 4", self.square_n)));
        }
        let inner = 4 * self.square_n;
        if self.collar_n_t < 3 || inner % self.collar_n_t != 0 {
            return Err(Error::Resolution(format!(
                "collar_n_t = {} must be at least 3 and divide the inner circle size {inner}",
                self.collar_n_t
            )));
        }
        if self.collar_n_rho == 0 {
            return Err(Error::Resolution("collar_n_rho must be positive".into()));
        }
        if self.pants_level == 0 {
            return Err(Error::Resolution("pants_level must be positive".into()));
        }
        Ok(())
    }

    pub fn profile(&self, ell: f64) -> Result<CollarProfile> {
        CollarProfile::new(ell, self.collar_n_rho, self.collar_n_t)
    }
}

impl Default for Resolution {
    fn default() -> Self {
        Self::from_square_n(8)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub conductance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryVertex {
    pub vertex: usize,
    pub mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexPart {
    Square,
    Junction,
    Collar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CollarSide {
    Plus,
    Minus,
}

/// Position of a block vertex on one of its half-collars.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollarPoint {
    pub side: CollarSide,
    pub rho_index: usize,
    pub rho: f64,
}

/// Position of a surface vertex on a full collar; `rho` is signed, positive
/// on the `γ₁⁺` half.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollarMembership {
    pub collar: usize,
    pub rho: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceKind {
    /// `S_p(ℓ)`, one block per Cayley vertex.
    Glued,
    /// `S'_p(ℓ)` built from `p − 1` copies of `B'(ℓ)`.
    QuotientDirect,
    /// `S_p(ℓ)/⟨δ₁⟩` as an orbit complex.
    QuotientOrbit,
}

#[derive(Clone, Debug)]
pub struct DiscreteSurface {
    pub kind: SurfaceKind,
    pub p: u32,
    pub profile: CollarProfile,
    pub resolution: Resolution,
    pub vertex_count: usize,
    /// Sorted by `(i, j)` with `i < j`.
    pub edges: Vec<Edge>,
    pub faces: Vec<Vec<usize>>,
    /// Sorted by vertex.
    pub boundary: Vec<BoundaryVertex>,
    /// Block owning the vertex, `None` when shared by several blocks.
    pub block_of: Vec<Option<usize>>,
    /// δ₂-cycle index of each block.
    pub region_of_block: Vec<usize>,
    /// Region of each vertex, `None` on collar mid-circles joining two regions.
    pub region_of: Vec<Option<usize>>,
    pub region_count: usize,
    pub parts: Vec<VertexPart>,
    pub collar: Vec<Option<CollarMembership>>,
    /// `block_slots[b][x]`: vertex of block `b` at base-block local index `x`.
    pub block_slots: Vec<Vec<usize>>,
    /// Ports of each block in surface vertex indices.
    pub block_ports: Vec<BlockPorts>,
    /// Vertex permutation of every group element, by `GroupContext::index`.
    pub action: Option<Vec<Permutation>>,
}

impl DiscreteSurface {
    pub fn block_count(&self) -> usize {
        self.block_slots.len()
    }

    pub fn boundary_mass_total(&self) -> f64 {
        self.boundary.iter().map(|b| b.mass).sum()
    }

    pub fn is_connected(&self) -> bool {
        let mut uf = glue::UnionFind::new(self.vertex_count);
        for e in &self.edges {
            uf.union(e.i, e.j);
        }
        (0..self.vertex_count).filter(|&v| uf.find(v) == v).count() == 1
    }

    /// Vertices whose every representative lies in the square part.
    pub fn square_vertices(&self) -> Vec<bool> {
        self.parts.iter().map(|&p| p == VertexPart::Square).collect()
    }

    pub fn to_file(&self) -> SurfaceFile {
        SurfaceFile {
            kind: self.kind,
            p: self.p,
            ell: self.profile.ell,
            resolution: self.resolution,
            vertex_count: self.vertex_count,
            edges: self.edges.iter().map(|e| (e.i, e.j, e.conductance)).collect(),
            boundary: self.boundary.iter().map(|b| (b.vertex, b.mass)).collect(),
            faces: self.faces.clone(),
            region_of: self.region_of.clone(),
            block_of: self.block_of.clone(),
            parts: self.parts.clone(),
            ports: self.block_ports.clone(),
        }
    }
}

/// JSON serialization of a surface.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub kind: SurfaceKind,
    pub p: u32,
    pub ell: f64,
    pub resolution: Resolution,
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub boundary: Vec<(usize, f64)>,
    pub faces: Vec<Vec<usize>>,
    pub region_of: Vec<Option<usize>>,
    pub block_of: Vec<Option<usize>>,
    pub parts: Vec<VertexPart>,
    pub ports: Vec<BlockPorts>,
}
