use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::SteklovOperator;
use crate::error::{Error, Result};

/// Default relative gap below which consecutive eigenvalues are clustered.
pub const GAP_REL_TOL: f64 = 1e-6;

/// Lowest eigenpairs of `Λ v = σ M v`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    /// Columns are `M`-orthonormal boundary vectors.
    #[serde(skip, default = "empty_matrix")]
    pub eigenvectors: DMatrix<f64>,
    /// Consecutive index ranges forming multiplicity groups.
    pub clusters: Vec<Vec<usize>>,
    /// `‖Λv − σMv‖ / ‖Λ‖` for every returned pair.
    pub residuals: Vec<f64>,
    /// First eigenvalue beyond the returned ones, if any.
    pub next_eigenvalue: Option<f64>,
    pub gap_rel_tol: f64,
    /// Irrep multiplicities of one selected cluster.
    pub isotypic: Option<BTreeMap<String, usize>>,
}

fn empty_matrix() -> DMatrix<f64> {
    DMatrix::zeros(0, 0)
}

fn same_cluster(a: f64, b: f64, rel_tol: f64) -> bool {
    (b - a).abs() <= rel_tol * a.abs().max(1.0)
}

fn cluster_indices(values: &[f64], rel_tol: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if same_cluster(values[i - 1], v, rel_tol) => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}

/// Solves the generalized problem through `M^{−1/2} Λ M^{−1/2}` and returns
/// the `count` lowest pairs.
pub fn steklov_spectrum(op: &SteklovOperator, count: usize) -> Result<SpectralResult> {
    steklov_spectrum_with_tol(op, count, GAP_REL_TOL)
}

pub fn steklov_spectrum_with_tol(op: &SteklovOperator, count: usize, rel_tol: f64) -> Result<SpectralResult> {
    let n = op.size();
    if count > n || count == 0 {
        return Err(Error::CountTooLarge { requested: count, available: n });
    }
    let inv_sqrt: DVector<f64> = op.mass.map(|m| 1.0 / m.sqrt());
    let mut s = op.dtn.clone();
    for j in 0..n {
        for i in 0..n {
            s[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let eigenvalues: Vec<f64> = order[..count].iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = DMatrix::zeros(n, count);
    for (c, &k) in order[..count].iter().enumerate() {
        let y = eig.eigenvectors.column(k);
        for i in 0..n {
            eigenvectors[(i, c)] = y[i] * inv_sqrt[i];
        }
    }
    let norm = op.norm().max(f64::MIN_POSITIVE);
    let residuals = (0..count)
        .map(|c| {
            let v = eigenvectors.column(c);
            let r = &op.dtn * v - eigenvalues[c] * op.mass.component_mul(&v);
            r.norm() / norm
        })
        .collect();
    Ok(SpectralResult {
        clusters: cluster_indices(&eigenvalues, rel_tol),
        next_eigenvalue: order.get(count).map(|&k| eig.eigenvalues[k]),
        eigenvalues,
        eigenvectors,
        residuals,
        gap_rel_tol: rel_tol,
        isotypic: None,
    })
}

impl SpectralResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Largest deviation of `VᵀMV` from the identity.
    pub fn orthonormality_defect(&self, mass: &DVector<f64>) -> f64 {
        let mut mv = self.eigenvectors.clone();
        for (i, mut row) in mv.row_iter_mut().enumerate() {
            row *= mass[i];
        }
        let g = self.eigenvectors.transpose() * mv;
        (g - DMatrix::identity(self.len(), self.len())).amax()
    }

    /// Indices of the cluster containing `index` under `rel_tol`.
    pub fn cluster_of(&self, index: usize, rel_tol: f64) -> Result<Vec<usize>> {
        if index >= self.len() {
            return Err(Error::CountTooLarge { requested: index + 1, available: self.len() });
        }
        let clusters = cluster_indices(&self.eigenvalues, rel_tol);
        let cluster = clusters.into_iter().find(|c| c.contains(&index)).unwrap_or_default();
        let last = *cluster.last().unwrap_or(&index);
        if last + 1 == self.len() {
            if let Some(next) = self.next_eigenvalue {
                if same_cluster(self.eigenvalues[last], next, rel_tol) {
                    return Err(Error::TruncatedCluster(index));
                }
            }
        }
        Ok(cluster)
    }

    /// Relative gap from the cluster containing `index` to the next eigenvalue.
    pub fn gap_after(&self, index: usize, rel_tol: f64) -> Option<f64> {
        let cluster = self.cluster_of(index, rel_tol).ok()?;
        let last = *cluster.last()?;
        let next = self.eigenvalues.get(last + 1).copied().or(self.next_eigenvalue)?;
        let here = self.eigenvalues[last];
        Some((next - here) / here.abs().max(1.0))
    }
}

/// Size of the cluster containing `index`.
pub fn multiplicity(result: &SpectralResult, index: usize, rel_tol: f64) -> Result<usize> {
    Ok(result.cluster_of(index, rel_tol)?.len())
}
