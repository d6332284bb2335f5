//! Irreducible representations of `G_p`, characters, irreducibility
//! certificates and isotypic multiplicities of linear actions.
//!
//! `G_p` has `p − 1` one-dimensional irreps `ρ_r(δ₁^a δ₂^m) = α^(rm)` with
//! `α = exp(2πi/(p−1))`, and one irrep `ρ` of degree `p − 1` given by
//! `ρ(δ₁) = diag(ξ^(k^0), …, ξ^(k^(p−2)))`, `ξ = exp(2πi/p)`, and `ρ(δ₂)` the
//! cyclic shift `e_i ↦ e_(i+1)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{pow_mod, GroupContext, GroupElement};

pub const CHARACTER_TOL: f64 = 1e-10;
pub const MULTIPLICITY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IrrepLabel {
    /// `ρ_r`, `1 ≤ r ≤ p − 1`; `r = p − 1` is the trivial representation.
    OneDim(u32),
    /// The irrep of degree `p − 1`.
    Big,
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrepLabel::OneDim(r) => write!(f, "rho_{r}"),
            IrrepLabel::Big => write!(f, "rho_big"),
        }
    }
}

/// A matrix representation tabulated on every group element.
#[derive(Clone, Debug)]
pub struct Representation {
    pub label: Option<IrrepLabel>,
    degree: usize,
    // indexed by `GroupContext::index`
    matrices: Vec<DMatrix<Complex64>>,
}

fn root_of_unity(n: u64, power: u64) -> Complex64 {
    let theta = 2.0 * PI * (power % n) as f64 / n as f64;
    Complex64::from_polar(1.0, theta)
}

impl Representation {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn eval(&self, ctx: &GroupContext, g: &GroupElement) -> &DMatrix<Complex64> {
        &self.matrices[ctx.index(g)]
    }

    pub fn character(&self) -> Vec<Complex64> {
        self.matrices.iter().map(|m| m.trace()).collect()
    }

    /// Largest entrywise deviation of `ρ(gh)` from `ρ(g)ρ(h)` over all pairs.
    pub fn homomorphism_defect(&self, ctx: &GroupContext) -> f64 {
        let mut worst: f64 = 0.0;
        for g in ctx.elements() {
            for h in ctx.elements() {
                let lhs = self.eval(ctx, &(*g * *h));
                let rhs = self.eval(ctx, g) * self.eval(ctx, h);
                worst = worst.max((lhs - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    pub fn direct_sum(&self, other: &Representation) -> Representation {
        let d = self.degree + other.degree;
        let matrices = self
            .matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| {
                let mut m = DMatrix::zeros(d, d);
                m.view_mut((0, 0), (self.degree, self.degree)).copy_from(a);
                m.view_mut((self.degree, self.degree), (other.degree, other.degree)).copy_from(b);
                m
            })
            .collect();
        Representation { label: None, degree: d, matrices }
    }
}

/// `ρ_r` with `ρ_r(δ₁) = 1`, `ρ_r(δ₂) = α^r`.
pub fn one_dim_rep(ctx: &GroupContext, r: u32) -> Result<Representation> {
    let n = ctx.p() - 1;
    if r == 0 || r > n {
        return Err(Error::RepIndex { r, max: n });
    }
    let matrices = ctx
        .elements()
        .iter()
        .map(|g| {
            let (_, m) = ctx.word_decompose(g);
            DMatrix::from_element(1, 1, root_of_unity(n as u64, r as u64 * m as u64))
        })
        .collect();
    Ok(Representation { label: Some(IrrepLabel::OneDim(r)), degree: 1, matrices })
}

/// The degree `p − 1` irrep, evaluated on `δ₁^a δ₂^m` as `ρ(δ₁)^a ρ(δ₂)^m`.
pub fn big_rep(ctx: &GroupContext) -> Representation {
    let p = ctx.p() as u64;
    let d = (p - 1) as usize;
    let diag: Vec<u64> = (0..d as u64).map(|i| pow_mod(ctx.k() as u64, i, p)).collect();
    let matrices = ctx
        .elements()
        .iter()
        .map(|g| {
            let (a, m) = ctx.word_decompose(g);
            // ρ(δ₁)^a ρ(δ₂)^m sends e_j to ξ^(a·k^(j+m)) e_(j+m).
            let mut mat = DMatrix::zeros(d, d);
            for j in 0..d {
                let row = (j + m as usize) % d;
                mat[(row, j)] = root_of_unity(p, a as u64 * diag[row]);
            }
            mat
        })
        .collect();
    Representation { label: Some(IrrepLabel::Big), degree: d, matrices }
}

/// All `p` irreps: `ρ_1, …, ρ_(p−1)` followed by the big one.
pub fn all_irreps(ctx: &GroupContext) -> Vec<Representation> {
    let mut reps: Vec<_> = (1..ctx.p()).map(|r| one_dim_rep(ctx, r).expect("r in range")).collect();
    reps.push(big_rep(ctx));
    reps
}

/// `(1/|G|) Σ_g χ(g) · conj(χ'(g))`.
pub fn character_inner(chi: &[Complex64], psi: &[Complex64]) -> Complex64 {
    let sum: Complex64 = chi.iter().zip(psi).map(|(a, b)| a * b.conj()).sum();
    sum / chi.len() as f64
}

#[derive(Clone, Debug)]
pub struct CharacterTable {
    pub labels: Vec<IrrepLabel>,
    pub degrees: Vec<usize>,
    pub class_representatives: Vec<GroupElement>,
    pub class_sizes: Vec<usize>,
    /// `values[i][c]` is the character of irrep `i` on class `c`.
    pub values: Vec<Vec<Complex64>>,
    pub group_order: usize,
}

impl CharacterTable {
    pub fn build(ctx: &GroupContext) -> Self {
        let classes = ctx.conjugacy_classes();
        let irreps = all_irreps(ctx);
        let values = irreps
            .iter()
            .map(|rep| classes.iter().map(|c| rep.eval(ctx, &c[0]).trace()).collect())
            .collect();
        Self {
            labels: irreps.iter().map(|r| r.label.expect("irrep")).collect(),
            degrees: irreps.iter().map(Representation::degree).collect(),
            class_representatives: classes.iter().map(|c| c[0]).collect(),
            class_sizes: classes.iter().map(Vec::len).collect(),
            values,
            group_order: ctx.order(),
        }
    }

    pub fn inner(&self, i: usize, j: usize) -> Complex64 {
        let sum: Complex64 = self
            .class_sizes
            .iter()
            .zip(self.values[i].iter().zip(&self.values[j]))
            .map(|(&n, (a, b))| a * b.conj() * n as f64)
            .sum();
        sum / self.group_order as f64
    }

    /// Largest deviation of the Gram matrix of characters from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.labels.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.inner(i, j) - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn degree_square_sum(&self) -> usize {
        self.degrees.iter().map(|d| d * d).sum()
    }

    /// Partner of a one-dimensional irrep under complex conjugation.
    pub fn conjugate_partner(&self, label: IrrepLabel) -> Option<IrrepLabel> {
        match label {
            IrrepLabel::OneDim(r) => {
                let n = (self.labels.len() - 1) as u32;
                let partner = if r == n { n } else { n - r };
                (partner != r).then_some(IrrepLabel::OneDim(partner))
            }
            IrrepLabel::Big => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IrreducibilityCertificate {
    pub character_norm: f64,
    pub commutant_dimension: usize,
}

impl IrreducibilityCertificate {
    pub fn is_irreducible(&self) -> bool {
        (self.character_norm - 1.0).abs() < 1e-8 && self.commutant_dimension == 1
    }
}

/// Character norm and dimension of `{X : ρ(g)X = Xρ(g) ∀g}`.
pub fn irreducibility_certificate(ctx: &GroupContext, rep: &Representation) -> IrreducibilityCertificate {
    let chi = rep.character();
    let character_norm = character_inner(&chi, &chi).re;

    // vec(AX − XA) = (I ⊗ A − Aᵀ ⊗ I) vec(X); accumulate the Gram matrix of
    // the stacked system and count its zero eigenvalues.
    let d = rep.degree();
    let n = d * d;
    let eye = DMatrix::<Complex64>::identity(d, d);
    let mut gram = DMatrix::<Complex64>::zeros(n, n);
    for g in ctx.elements() {
        let a = rep.eval(ctx, g);
        let k = eye.kronecker(a) - a.transpose().kronecker(&eye);
        gram += k.adjoint() * &k;
    }
    let eig = gram.symmetric_eigenvalues();
    let scale = eig.iter().cloned().fold(1.0, f64::max);
    let commutant_dimension = eig.iter().filter(|&&v| v.abs() < 1e-9 * scale).count();
    IrreducibilityCertificate { character_norm, commutant_dimension }
}

/// A linear action of `G_p` on `R^n` (unitary for some diagonal inner product).
pub trait LinearAction {
    fn dim(&self) -> usize;
    /// Writes the image of `v` under `g` into `out`.
    fn act(&self, ctx: &GroupContext, g: &GroupElement, v: &[f64], out: &mut [f64]);
}

/// Permutation action `(π(g) f)(perm_g(i)) = f(i)`, so `π(g)π(h) = π(gh)`
/// whenever `perm_g ∘ perm_h = perm_gh`.
#[derive(Clone, Debug)]
pub struct PermutationAction {
    // indexed by `GroupContext::index`
    pub perms: Vec<crate::cayley::Permutation>,
}

impl LinearAction for PermutationAction {
    fn dim(&self) -> usize {
        self.perms.first().map_or(0, |p| p.len())
    }

    fn act(&self, ctx: &GroupContext, g: &GroupElement, v: &[f64], out: &mut [f64]) {
        let perm = &self.perms[ctx.index(g)];
        for (i, &x) in v.iter().enumerate() {
            out[perm.apply(i)] = x;
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct IsotypicEntry {
    pub label: IrrepLabel,
    pub degree: usize,
    pub multiplicity: usize,
    /// Conjugate partner when the irrep is non-real (pairs into a real form).
    pub real_pair: Option<IrrepLabel>,
}

/// Multiplicity of each irrep in the action restricted to `span(basis)`.
///
/// `basis` columns must be orthonormal for the inner product
/// `⟨u, v⟩ = Σ weights[i] u[i] v[i]`, and the action must preserve both the
/// subspace and the inner product.
pub fn isotypic_multiplicities(
    ctx: &GroupContext,
    action: &impl LinearAction,
    basis: &DMatrix<f64>,
    weights: &[f64],
) -> Result<Vec<IsotypicEntry>> {
    let n = action.dim();
    if basis.nrows() != n || weights.len() != n {
        return Err(Error::InvalidParameter(format!(
            "basis has {} rows, weights {}, action dimension {n}",
            basis.nrows(),
            weights.len()
        )));
    }
    let k = basis.ncols();
    let weighted = DMatrix::from_fn(n, k, |i, j| weights[i] * basis[(i, j)]);
    let mut image = DMatrix::zeros(n, k);
    let mut out = vec![0.0; n];
    let mut traces = Vec::with_capacity(ctx.order());
    let mut worst_leak: f64 = 0.0;
    for g in ctx.elements() {
        for j in 0..k {
            let col: Vec<f64> = basis.column(j).iter().cloned().collect();
            action.act(ctx, g, &col, &mut out);
            image.column_mut(j).copy_from_slice(&out);
        }
        let compressed = weighted.transpose() * &image;
        // Invariance: the image must stay inside span(basis).
        let leak = &image - basis * &compressed;
        for j in 0..k {
            let norm2: f64 = (0..n).map(|i| weights[i] * leak[(i, j)].powi(2)).sum();
            worst_leak = worst_leak.max(norm2.sqrt());
        }
        traces.push(Complex64::new(compressed.trace(), 0.0));
    }
    if worst_leak > 1e-6 {
        return Err(Error::NotInvariant(format!("component outside the subspace of norm {worst_leak:.3e}")));
    }

    let table = CharacterTable::build(ctx);
    let irreps = all_irreps(ctx);
    let mut entries = Vec::with_capacity(irreps.len());
    let mut weighted_sum = 0;
    for rep in &irreps {
        let m = character_inner(&traces, &rep.character());
        let rounded = m.re.round();
        if (m.re - rounded).abs() > MULTIPLICITY_TOL || m.im.abs() > MULTIPLICITY_TOL || rounded < 0.0 {
            return Err(Error::NotInvariant(format!(
                "non-integral multiplicity {:.6}{:+.6}i for {}",
                m.re,
                m.im,
                rep.label.expect("irrep")
            )));
        }
        let label = rep.label.expect("irrep");
        weighted_sum += rounded as usize * rep.degree();
        entries.push(IsotypicEntry {
            label,
            degree: rep.degree(),
            multiplicity: rounded as usize,
            real_pair: table.conjugate_partner(label),
        });
    }
    if weighted_sum != k {
        return Err(Error::NotInvariant(format!("degrees sum to {weighted_sum}, subspace has dimension {k}")));
    }
    Ok(entries)
}

pub fn multiplicity_of(entries: &[IsotypicEntry], label: IrrepLabel) -> usize {
    entries.iter().find(|e| e.label == label).map_or(0, |e| e.multiplicity)
}

pub fn as_map(entries: &[IsotypicEntry]) -> BTreeMap<String, usize> {
    entries.iter().map(|e| (e.label.to_string(), e.multiplicity)).collect()
}

pub fn complex_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{left_action, CayleyGraph};

    #[test]
    fn one_dim_reps_are_homomorphisms() {
        let ctx = GroupContext::new(5).unwrap();
        let trivial = one_dim_rep(&ctx, 4).unwrap();
        for g in ctx.elements() {
            assert!((trivial.eval(&ctx, g)[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
        for r in 1..5 {
            let rep = one_dim_rep(&ctx, r).unwrap();
            assert!((rep.eval(&ctx, &ctx.delta1())[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
            assert!(rep.homomorphism_defect(&ctx) < 1e-12);
        }
        assert!(one_dim_rep(&ctx, 0).is_err());
        assert!(one_dim_rep(&ctx, 5).is_err());
    }

    #[test]
    fn big_rep_values() {
        for p in [3u64, 5, 7] {
            let ctx = GroupContext::new(p).unwrap();
            let rho = big_rep(&ctx);
            assert!(rho.homomorphism_defect(&ctx) < 1e-12);
            let chi = rho.character();
            assert!((chi[ctx.index(&ctx.identity())] - Complex64::new(p as f64 - 1.0, 0.0)).norm() < 1e-12);
            // Σ_{j≠0} ξ^j = −1
            let brute: Complex64 = (1..p).map(|j| root_of_unity(p, j)).sum();
            assert!((brute + 1.0).norm() < 1e-12);
            assert!((chi[ctx.index(&ctx.delta1())] - brute).norm() < 1e-12);
        }
        let ctx = GroupContext::new(5).unwrap();
        let chi = big_rep(&ctx).character();
        let mut sum = 0.0;
        for g in ctx.elements() {
            sum += chi[ctx.index(g)].norm_sqr();
        }
        assert!((sum / 20.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn character_tables() {
        let ctx = GroupContext::new(3).unwrap();
        let t = CharacterTable::build(&ctx);
        let mut degrees = t.degrees.clone();
        degrees.sort();
        assert_eq!(degrees, vec![1, 1, 2]);
        assert_eq!(t.degree_square_sum(), 6);
        for p in [5u64, 7, 11] {
            let ctx = GroupContext::new(p).unwrap();
            let t = CharacterTable::build(&ctx);
            assert_eq!(t.labels.len(), p as usize);
            assert_eq!(t.degree_square_sum(), ctx.order());
            assert!(t.orthonormality_defect() < CHARACTER_TOL);
        }
    }

    #[test]
    fn explicit_orthogonality_by_summation_p7() {
        let ctx = GroupContext::new(7).unwrap();
        let chars: Vec<_> = all_irreps(&ctx).iter().map(Representation::character).collect();
        for (i, a) in chars.iter().enumerate() {
            for (j, b) in chars.iter().enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for g in ctx.elements() {
                    let idx = ctx.index(g);
                    s += a[idx] * b[idx].conj();
                }
                s /= ctx.order() as f64;
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((s - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn certificates() {
        let ctx = GroupContext::new(5).unwrap();
        let cert = irreducibility_certificate(&ctx, &big_rep(&ctx));
        assert!((cert.character_norm - 1.0).abs() < 1e-10);
        assert_eq!(cert.commutant_dimension, 1);
        assert!(cert.is_irreducible());

        let r1 = one_dim_rep(&ctx, 1).unwrap();
        let sum = r1.direct_sum(&r1);
        let cert = irreducibility_certificate(&ctx, &sum);
        assert!((cert.character_norm - 4.0).abs() < 1e-10);
        assert_eq!(cert.commutant_dimension, 4);
        assert!(!cert.is_irreducible());

        let trivial = one_dim_rep(&ctx, 4).unwrap();
        assert!((irreducibility_certificate(&ctx, &trivial).character_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn regular_representation_decomposes_by_degree() {
        for p in [3u64, 5] {
            let ctx = GroupContext::new(p).unwrap();
            let graph = CayleyGraph::build(&ctx);
            let action = PermutationAction {
                perms: ctx.elements().iter().map(|g| left_action(&graph, g)).collect(),
            };
            let n = ctx.order();
            let basis = DMatrix::identity(n, n);
            let entries = isotypic_multiplicities(&ctx, &action, &basis, &vec![1.0; n]).unwrap();
            for e in &entries {
                assert_eq!(e.multiplicity, e.degree, "{}", e.label);
            }
        }
    }

    #[test]
    fn constants_carry_trivial_irrep() {
        let ctx = GroupContext::new(5).unwrap();
        let graph = CayleyGraph::build(&ctx);
        let action = PermutationAction {
            perms: ctx.elements().iter().map(|g| left_action(&graph, g)).collect(),
        };
        let n = ctx.order();
        let basis = DMatrix::from_element(n, 1, 1.0 / (n as f64).sqrt());
        let entries = isotypic_multiplicities(&ctx, &action, &basis, &vec![1.0; n]).unwrap();
        for e in &entries {
            let expected = usize::from(e.label == IrrepLabel::OneDim(4));
            assert_eq!(e.multiplicity, expected);
        }
    }

    #[test]
    fn non_invariant_subspace_rejected() {
        let ctx = GroupContext::new(3).unwrap();
        let graph = CayleyGraph::build(&ctx);
        let action = PermutationAction {
            perms: ctx.elements().iter().map(|g| left_action(&graph, g)).collect(),
        };
        let mut basis = DMatrix::zeros(6, 1);
        basis[(0, 0)] = 1.0;
        let err = isotypic_multiplicities(&ctx, &action, &basis, &[1.0; 6]).unwrap_err();
        assert!(matches!(err, Error::NotInvariant(_)));
    }
}
