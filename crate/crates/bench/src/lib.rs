//! Fixtures shared by the criterion benchmarks.

use steklov_core::spectral::{dtn_operator, SteklovOperator};
use steklov_core::surface::assemble_surface;
use steklov_core::{DiscreteSurface, GroupContext, Resolution, Result};

/// `S_p(ℓ)` at square resolution `n` with the default collar grid.
pub fn surface(p: u64, ell: f64, n: usize) -> Result<DiscreteSurface> {
    let ctx = GroupContext::new(p)?;
    assemble_surface(&ctx, ell, &Resolution::from_square_n(n))
}

pub fn operator(p: u64, ell: f64, n: usize) -> Result<SteklovOperator> {
    dtn_operator(&surface(p, ell, n)?)
}
