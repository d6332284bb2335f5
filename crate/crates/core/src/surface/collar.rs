use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest collar length accepted; shorter values are clamped.
pub const MIN_ELL: f64 = 1e-6;

fn asinh_log_form(x: f64) -> f64 {
    if x > 1e8 {
        (2.0 * x).ln() + 1.0 / (4.0 * x * x)
    } else {
        (x + (x * x + 1.0).sqrt()).ln()
    }
}

/// Collar half-width `w(ℓ) = arcsinh(coth(ℓ/2))`.
pub fn collar_half_width(ell: f64) -> Result<f64> {
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(Error::InvalidParameter(format!("collar length must be positive, got {ell}")));
    }
    Ok(asinh_log_form(1.0 / (ell / 2.0).tanh()))
}

/// `ℓ²·w(ℓ)`, the collar area value used by the decay bound.
pub fn collar_area(ell: f64) -> Result<f64> {
    Ok(ell * ell * collar_half_width(ell)?)
}

/// Area of `[−w, w] × S¹` under `dρ² + ℓ²cosh²ρ dt²`, i.e. `2ℓ·sinh(w(ℓ))`.
pub fn fermi_collar_area(ell: f64) -> Result<f64> {
    let w = collar_half_width(ell)?;
    Ok(2.0 * ell * w.sinh())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollarProfile {
    pub ell: f64,
    pub half_width: f64,
    pub n_rho: usize,
    pub n_t: usize,
}

impl CollarProfile {
    pub fn new(ell: f64, n_rho: usize, n_t: usize) -> Result<Self> {
        if !(ell > 0.0) || !ell.is_finite() {
            return Err(Error::InvalidParameter(format!("collar length must be positive, got {ell}")));
        }
        let ell = if ell < MIN_ELL {
            warn!("collar length {ell:e} clamped to {MIN_ELL:e}");
            MIN_ELL
        } else {
            ell
        };
        if n_rho == 0 || n_t < 3 {
            return Err(Error::Resolution(format!("collar grid {n_rho}x{n_t} too coarse")));
        }
        Ok(Self { ell, half_width: collar_half_width(ell)?, n_rho, n_t })
    }

    pub fn d_rho(&self) -> f64 {
        self.half_width / self.n_rho as f64
    }

    pub fn d_t(&self) -> f64 {
        1.0 / self.n_t as f64
    }

    pub fn rho(&self, i: usize) -> f64 {
        i as f64 * self.d_rho()
    }

    /// Conductance of the edge between rows `i` and `i+1` in one column.
    pub fn radial_conductance(&self, i: usize) -> f64 {
        let mid = 0.5 * (self.rho(i) + self.rho(i + 1));
        self.ell * mid.cosh() * self.d_t() / self.d_rho()
    }

    /// Conductance of a circumferential edge in row `i`; end rows own half a
    /// dual cell.
    pub fn circumferential_conductance(&self, i: usize) -> f64 {
        let dual = if i == 0 || i == self.n_rho { 0.5 * self.d_rho() } else { self.d_rho() };
        dual / (self.ell * self.rho(i).cosh() * self.d_t())
    }

    /// Midpoint-rule area of one cell between rows `i` and `i+1`.
    pub fn cell_area(&self, i: usize) -> f64 {
        let mid = 0.5 * (self.rho(i) + self.rho(i + 1));
        self.ell * mid.cosh() * self.d_rho() * self.d_t()
    }

    /// Cell-area sum over one half-collar `[0, w] × S¹`.
    pub fn discrete_half_area(&self) -> f64 {
        (0..self.n_rho).map(|i| self.cell_area(i)).sum::<f64>() * self.n_t as f64
    }

    /// Cell-area sum over the full collar `[−w, w] × S¹`.
    pub fn discrete_area(&self) -> f64 {
        2.0 * self.discrete_half_area()
    }
}
