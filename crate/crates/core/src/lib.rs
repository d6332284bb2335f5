//! Discrete laboratory for Steklov eigenvalue multiplicity on surfaces built
//! around the Cayley graph of the affine group `Z_p ⋊ Z_p^*`.
//!
//! The pipeline is:
//!
//! 1. [`group`]: exact arithmetic in `G_p` and its presentation.
//! 2. [`cayley`]: the Cayley graph `Γ_p`, its δ₂-cycles and the left action.
//! 3. [`reptheory`]: irreducible representations, characters and isotypic
//!    multiplicities of group actions.
//! 4. [`surface`]: weighted 2-complexes modelling the building block, the glued
//!    surface `S_p(ℓ)` and its quotient `S'_p(ℓ)`.
//! 5. [`spectral`]: Dirichlet-to-Neumann operators, Steklov and
//!    Steklov–Neumann spectra, Rayleigh quotients and test functions.
//! 6. [`experiments`]: parameter sweeps, audits and persisted outputs.

pub mod cayley;
pub mod error;
pub mod experiments;
pub mod group;
pub mod reptheory;
pub mod spectral;
pub mod surface;

pub use cayley::{CayleyGraph, CyclePartition, EdgeColor, Permutation};
pub use error::{Error, Result};
pub use group::{GroupContext, GroupElement};
pub use reptheory::{CharacterTable, IrrepLabel, Representation};
pub use spectral::{SpectralResult, SteklovOperator};
pub use surface::{CollarProfile, DiscreteBlock, DiscreteSurface, Resolution};
