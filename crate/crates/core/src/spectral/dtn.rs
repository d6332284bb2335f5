use std::sync::{Arc, Once};

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, DVector};

use super::{assemble_laplacian, Laplacian, SteklovDomain};
use crate::error::{Error, Result};
use crate::surface::BoundaryVertex;

/// Right-hand sides solved per batch.
const CHUNK: usize = 128;

/// Interior solver kept by the operator to evaluate harmonic extensions.
#[derive(Clone)]
pub(crate) struct HarmonicExtension {
    factor: faer::sparse::linalg::solvers::Llt<usize, f64>,
    laplacian: Arc<Laplacian>,
    /// Interior vertices in local order.
    interior: Vec<usize>,
    /// Local interior index of every vertex, `usize::MAX` on the boundary.
    interior_index: Vec<usize>,
    boundary: Vec<usize>,
}

impl HarmonicExtension {
    /// `L_IB u_B` restricted to the columns `cols` of `u`.
    fn coupling_rhs(&self, u: &DMatrix<f64>, cols: std::ops::Range<usize>) -> Mat<f64> {
        let mut rhs = Mat::<f64>::zeros(self.interior.len(), cols.len());
        for (row, &v) in self.boundary.iter().enumerate() {
            for &(w, c) in &self.laplacian.adj[v] {
                let i = self.interior_index[w];
                if i == usize::MAX {
                    continue;
                }
                for (k, col) in cols.clone().enumerate() {
                    rhs[(i, k)] -= c * u[(row, col)];
                }
            }
        }
        rhs
    }

    /// Interior values `−L_II⁻¹ L_IB u_B`.
    fn solve(&self, u: &DMatrix<f64>, cols: std::ops::Range<usize>) -> Mat<f64> {
        let mut x = self.coupling_rhs(u, cols);
        self.factor.solve_in_place(x.as_mut());
        for v in x.as_mut().col_iter_mut() {
            for e in v.iter_mut() {
                *e = -*e;
            }
        }
        x
    }

    pub fn extend(&self, u_b: &[f64]) -> Vec<f64> {
        let n = self.interior_index.len();
        let u = DMatrix::from_column_slice(u_b.len(), 1, u_b);
        let x = self.solve(&u, 0..1);
        let mut out = vec![0.0; n];
        for (row, &v) in self.boundary.iter().enumerate() {
            out[v] = u_b[row];
        }
        for (i, &v) in self.interior.iter().enumerate() {
            out[v] = x[(i, 0)];
        }
        out
    }
}

/// Discrete Dirichlet-to-Neumann operator `Λ = L_BB − L_BI L_II⁻¹ L_IB` with
/// the diagonal boundary mass matrix.
#[derive(Clone)]
pub struct SteklovOperator {
    pub dtn: DMatrix<f64>,
    pub mass: DVector<f64>,
    /// Boundary vertex of each row.
    pub boundary: Vec<usize>,
    /// Row of each vertex, `None` for interior vertices.
    pub boundary_index: Vec<Option<usize>>,
    pub(crate) extension: Option<HarmonicExtension>,
}

impl std::fmt::Debug for SteklovOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SteklovOperator")
            .field("size", &self.boundary.len())
            .field("interior", &self.extension.as_ref().map_or(0, |e| e.interior.len()))
            .finish()
    }
}

impl SteklovOperator {
    pub fn size(&self) -> usize {
        self.boundary.len()
    }

    /// Frobenius norm of `Λ`.
    pub fn norm(&self) -> f64 {
        self.dtn.norm()
    }

    /// Harmonic extension of boundary values to all vertices.
    pub fn harmonic_extension(&self, u_b: &[f64]) -> Result<Vec<f64>> {
        if u_b.len() != self.size() {
            return Err(Error::InvalidParameter(format!(
                "boundary vector has length {}, expected {}",
                u_b.len(),
                self.size()
            )));
        }
        match &self.extension {
            Some(ext) => Ok(ext.extend(u_b)),
            None => {
                let mut out = vec![0.0; self.boundary_index.len()];
                for (row, &v) in self.boundary.iter().enumerate() {
                    out[v] = u_b[row];
                }
                Ok(out)
            }
        }
    }
}

struct Split {
    boundary: Vec<usize>,
    boundary_index: Vec<Option<usize>>,
    interior: Vec<usize>,
    interior_index: Vec<usize>,
    mass: DVector<f64>,
}

fn split(n: usize, boundary_list: &[BoundaryVertex], lap: &Laplacian) -> Result<Split> {
    if boundary_list.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let mut boundary_index = vec![None; n];
    let mut boundary = Vec::with_capacity(boundary_list.len());
    let mut mass = Vec::with_capacity(boundary_list.len());
    let mut sorted: Vec<BoundaryVertex> = boundary_list.to_vec();
    sorted.sort_by_key(|b| b.vertex);
    for b in &sorted {
        if !(b.mass > 0.0) {
            return Err(Error::InvalidParameter(format!("boundary mass {} at vertex {}", b.mass, b.vertex)));
        }
        boundary_index[b.vertex] = Some(boundary.len());
        boundary.push(b.vertex);
        mass.push(b.mass);
    }
    let mut interior_index = vec![usize::MAX; n];
    let mut interior = Vec::new();
    for v in 0..n {
        if boundary_index[v].is_none() {
            interior_index[v] = interior.len();
            interior.push(v);
        }
    }
    // Every interior component must reach the boundary for L_II to be invertible.
    let mut reached = vec![false; n];
    let mut stack: Vec<usize> = boundary.clone();
    for &b in &boundary {
        reached[b] = true;
    }
    while let Some(v) = stack.pop() {
        for &(w, _) in &lap.adj[v] {
            if !reached[w] {
                reached[w] = true;
                stack.push(w);
            }
        }
    }
    let detached = reached.iter().filter(|&&r| !r).count();
    if detached > 0 {
        return Err(Error::DetachedInterior(detached));
    }
    Ok(Split { boundary, boundary_index, interior, interior_index, mass: DVector::from_vec(mass) })
}

fn boundary_block(lap: &Laplacian, s: &Split) -> DMatrix<f64> {
    let nb = s.boundary.len();
    let mut l_bb = DMatrix::zeros(nb, nb);
    for (row, &v) in s.boundary.iter().enumerate() {
        l_bb[(row, row)] = lap.diag[v];
        for &(w, c) in &lap.adj[v] {
            if let Some(col) = s.boundary_index[w] {
                l_bb[(row, col)] -= c;
            }
        }
    }
    l_bb
}

/// Subtracts `L_BI X` from `dtn` for the columns in `cols`, where
/// `x[(i, k)] = (L_II⁻¹ L_IB)[i, cols.start + k]`.
fn subtract_coupling(
    dtn: &mut DMatrix<f64>,
    lap: &Laplacian,
    s: &Split,
    x: impl Fn(usize, usize) -> f64,
    cols: std::ops::Range<usize>,
) {
    for (row, &v) in s.boundary.iter().enumerate() {
        for &(w, c) in &lap.adj[v] {
            let i = s.interior_index[w];
            if i == usize::MAX {
                continue;
            }
            for (k, col) in cols.clone().enumerate() {
                // L_BI has entries −c
                dtn[(row, col)] += c * x(i, k);
            }
        }
    }
}

fn finish(mut dtn: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let scale = dtn.norm().max(f64::MIN_POSITIVE);
    let asym = (&dtn - dtn.transpose()).norm() / scale;
    if asym > 1e-10 {
        return Err(Error::Factorization(format!("Schur complement asymmetric by {asym:e}")));
    }
    dtn = 0.5 * (&dtn + dtn.transpose());
    Ok(dtn)
}

static SEQUENTIAL: Once = Once::new();

/// Schur complement through a sparse Cholesky factorization of `L_II`.
pub fn dtn_operator(domain: &impl SteklovDomain) -> Result<SteklovOperator> {
    // Parallelism lives at the sweep level; sequential kernels keep results
    // bit-reproducible.
    SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
    let lap = Arc::new(assemble_laplacian(domain));
    let s = split(domain.vertex_count(), domain.boundary(), &lap)?;
    let nb = s.boundary.len();
    let mut dtn = boundary_block(&lap, &s);
    if s.interior.is_empty() {
        return Ok(SteklovOperator {
            dtn: finish(dtn)?,
            mass: s.mass,
            boundary: s.boundary,
            boundary_index: s.boundary_index,
            extension: None,
        });
    }
    let mut triplets = Vec::new();
    for (i, &v) in s.interior.iter().enumerate() {
        triplets.push(Triplet::new(i, i, lap.diag[v]));
        for &(w, c) in &lap.adj[v] {
            let j = s.interior_index[w];
            if j != usize::MAX {
                triplets.push(Triplet::new(i, j, -c));
            }
        }
    }
    let n_i = s.interior.len();
    let l_ii = SparseColMat::<usize, f64>::try_new_from_triplets(n_i, n_i, &triplets)
        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let factor = l_ii.sp_cholesky(Side::Lower).map_err(|e| Error::Factorization(format!("{e:?}")))?;
    let ext = HarmonicExtension {
        factor,
        laplacian: lap.clone(),
        interior: s.interior.clone(),
        interior_index: s.interior_index.clone(),
        boundary: s.boundary.clone(),
    };
    let identity = DMatrix::<f64>::identity(nb, nb);
    let mut start = 0;
    while start < nb {
        let cols = start..(start + CHUNK).min(nb);
        // ext.solve gives −L_II⁻¹ L_IB e_col.
        let x = ext.solve(&identity, cols.clone());
        subtract_coupling(&mut dtn, &lap, &s, |i, k| -x[(i, k)], cols.clone());
        start = cols.end;
    }
    Ok(SteklovOperator {
        dtn: finish(dtn)?,
        mass: s.mass,
        boundary: s.boundary,
        boundary_index: s.boundary_index,
        extension: Some(ext),
    })
}

/// Jacobi-preconditioned conjugate gradients on `L_II x = b`.
fn pcg(lap: &Laplacian, s: &Split, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let apply = |x: &[f64], out: &mut [f64]| {
        for (i, &v) in s.interior.iter().enumerate() {
            let mut acc = lap.diag[v] * x[i];
            for &(w, c) in &lap.adj[v] {
                let j = s.interior_index[w];
                if j != usize::MAX {
                    acc -= c * x[j];
                }
            }
            out[i] = acc;
        }
    };
    let inv_diag: Vec<f64> = s.interior.iter().map(|&v| 1.0 / lap.diag[v]).collect();
    let b_norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for _ in 0..max_iter {
        apply(&p, &mut ap);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r_norm <= tol * b_norm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Factorization(format!("conjugate gradients did not reach {tol:e} in {max_iter} iterations")))
}

/// Same operator as [`dtn_operator`], computed column by column with
/// preconditioned conjugate gradients to relative residual `tol`.
pub fn dtn_operator_cg(domain: &impl SteklovDomain, tol: f64) -> Result<SteklovOperator> {
    let lap = assemble_laplacian(domain);
    let s = split(domain.vertex_count(), domain.boundary(), &lap)?;
    let mut dtn = boundary_block(&lap, &s);
    let n_i = s.interior.len();
    if n_i > 0 {
        let max_iter = 20 * n_i + 1000;
        for (col, &v) in s.boundary.iter().enumerate() {
            let mut rhs = vec![0.0; n_i];
            for &(w, c) in &lap.adj[v] {
                let i = s.interior_index[w];
                if i != usize::MAX {
                    // L_IB e_col = −c
                    rhs[i] -= c;
                }
            }
            let x = pcg(&lap, &s, &rhs, tol, max_iter)?;
            subtract_coupling(&mut dtn, &lap, &s, |i, _| x[i], col..col + 1);
        }
    }
    Ok(SteklovOperator {
        dtn: finish(dtn)?,
        mass: s.mass,
        boundary: s.boundary,
        boundary_index: s.boundary_index,
        extension: None,
    })
}
