use super::*;
use crate::surface::{assemble_quotient_direct, assemble_surface, Resolution};
use rand::{rngs::StdRng, Rng, SeedableRng};

fn path3() -> WeightedGraph {
    WeightedGraph::path(&[1.0, 1.0])
}

#[test]
fn path_laplacian() {
    let l = assemble_laplacian(&path3()).to_dense();
    let expected = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0]);
    assert_eq!(l, expected);
}

#[test]
fn path_dtn_and_spectrum() {
    let op = dtn_operator(&path3()).unwrap();
    let expected = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
    assert!((&op.dtn - expected).amax() < 1e-12);
    let res = steklov_spectrum(&op, 2).unwrap();
    assert!(res.eigenvalues[0].abs() < 1e-12);
    assert!((res.eigenvalues[1] - 1.0).abs() < 1e-12);
    assert_eq!(multiplicity(&res, 0, GAP_REL_TOL).unwrap(), 1);
    assert_eq!(multiplicity(&res, 1, GAP_REL_TOL).unwrap(), 1);
    assert!(steklov_spectrum(&op, 3).is_err());
}

#[test]
fn laplacian_energy_matches_dense_form() {
    let ctx = GroupContext::new(3).unwrap();
    let s = assemble_surface(&ctx, 0.5, &Resolution::from_square_n(4)).unwrap();
    let lap = assemble_laplacian(&s);
    for i in 0..lap.size() {
        let row: f64 = lap.diag[i] - lap.adj[i].iter().map(|&(_, c)| c).sum::<f64>();
        assert!(row.abs() < 1e-12);
    }
    let mut rng = StdRng::seed_from_u64(7);
    let u: Vec<f64> = (0..lap.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let lu = lap.apply(&u);
    let quad: f64 = u.iter().zip(&lu).map(|(a, b)| a * b).sum();
    let e = lap.energy(&u);
    assert!(e >= 0.0);
    assert!((quad - e).abs() <= 1e-9 * e);
}

#[test]
fn detached_interior_and_empty_boundary() {
    let mut g = path3();
    g.vertex_count = 5;
    g.edges.push(Edge { i: 3, j: 4, conductance: 1.0 });
    assert!(matches!(dtn_operator(&g), Err(Error::DetachedInterior(2))));
    let empty = WeightedGraph { vertex_count: 2, edges: vec![Edge { i: 0, j: 1, conductance: 1.0 }], boundary: vec![] };
    assert!(matches!(dtn_operator(&empty), Err(Error::EmptyBoundary)));
}

#[test]
fn factorization_and_cg_agree() {
    let ctx = GroupContext::new(3).unwrap();
    let s = assemble_surface(&ctx, 0.5, &Resolution::from_square_n(4)).unwrap();
    let a = dtn_operator(&s).unwrap();
    let b = dtn_operator_cg(&s, 1e-13).unwrap();
    let diff = (&a.dtn - &b.dtn).amax() / a.dtn.amax();
    assert!(diff < 1e-9, "{diff:e}");
    let ones = DVector::from_element(a.size(), 1.0);
    assert!((&a.dtn * ones).amax() < 1e-9 * a.dtn.amax());
}

#[test]
fn harmonic_extension_reproduces_eigenvalues() {
    let ctx = GroupContext::new(3).unwrap();
    let s = assemble_surface(&ctx, 0.5, &Resolution::from_square_n(4)).unwrap();
    let op = dtn_operator(&s).unwrap();
    let res = steklov_spectrum(&op, 6).unwrap();
    assert!(res.eigenvalues[0].abs() < 1e-10);
    assert!(res.eigenvalues[1] > 1e-6);
    assert!(res.max_residual() < 1e-8);
    assert!(res.orthonormality_defect(&op.mass) < 1e-8);
    for c in 1..6 {
        let vb: Vec<f64> = res.eigenvectors.column(c).iter().copied().collect();
        let u = op.harmonic_extension(&vb).unwrap();
        let r = rayleigh(&s, &u).unwrap();
        assert!((r - res.eigenvalues[c]).abs() < 1e-9, "{r} vs {}", res.eigenvalues[c]);
    }
    let constant = vec![1.0; s.vertex_count];
    assert!(rayleigh(&s, &constant).unwrap().abs() < 1e-20);
}

#[test]
fn random_trials_stay_above_sigma1() {
    let ctx = GroupContext::new(3).unwrap();
    let s = assemble_surface(&ctx, 0.5, &Resolution::from_square_n(4)).unwrap();
    let op = dtn_operator(&s).unwrap();
    let res = steklov_spectrum(&op, 2).unwrap();
    let sigma1 = res.eigenvalues[1];
    let mut rng = StdRng::seed_from_u64(11);
    let total: f64 = op.mass.sum();
    for _ in 0..20 {
        let mut v = DVector::from_fn(op.size(), |_, _| rng.gen_range(-1.0..1.0));
        let mean = op.mass.dot(&v) / total;
        v.add_scalar_mut(-mean);
        let q = v.dot(&(&op.dtn * &v)) / v.dot(&op.mass.component_mul(&v));
        assert!(q >= sigma1 - 1e-9);
    }
}

#[test]
fn relabeling_preserves_clusters() {
    let ctx = GroupContext::new(3).unwrap();
    let s = assemble_surface(&ctx, 0.25, &Resolution::from_square_n(4)).unwrap();
    let g = WeightedGraph::from_domain(&s);
    let mut perm: Vec<usize> = (0..g.vertex_count).collect();
    let mut rng = StdRng::seed_from_u64(3);
    for i in (1..perm.len()).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let h = g.relabeled(&Permutation(perm));
    let a = steklov_spectrum(&dtn_operator(&g).unwrap(), 8).unwrap();
    let b = steklov_spectrum(&dtn_operator(&h).unwrap(), 8).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).abs() < 1e-9);
    }
    let sizes = |r: &SpectralResult| r.clusters.iter().map(Vec::len).collect::<Vec<_>>();
    assert_eq!(sizes(&a)[..sizes(&a).len() - 1], sizes(&b)[..sizes(&b).len() - 1]);
}

#[test]
fn truncated_cluster_is_reported() {
    // symmetric star: centre 0, three unit spokes to massed leaves
    let g = WeightedGraph {
        vertex_count: 4,
        edges: (1..4).map(|j| Edge { i: 0, j, conductance: 1.0 }).collect(),
        boundary: (1..4).map(|v| BoundaryVertex { vertex: v, mass: 1.0 }).collect(),
    };
    let op = dtn_operator(&g).unwrap();
    let res = steklov_spectrum(&op, 2).unwrap();
    assert!(matches!(multiplicity(&res, 1, GAP_REL_TOL), Err(Error::TruncatedCluster(1))));
    let full = steklov_spectrum(&op, 3).unwrap();
    assert_eq!(multiplicity(&full, 1, GAP_REL_TOL).unwrap(), 2);
}

#[test]
fn neumann_whole_domain_matches_steklov() {
    let ctx = GroupContext::new(3).unwrap();
    let s = assemble_surface(&ctx, 0.5, &Resolution::from_square_n(4)).unwrap();
    let all = vec![true; s.vertex_count];
    let a = steklov_spectrum(&dtn_operator(&s).unwrap(), 5).unwrap();
    let b = steklov_neumann_spectrum(&s, &all, 5).unwrap();
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).abs() < 1e-12);
    }
    let mut missing = all.clone();
    missing[s.boundary[0].vertex] = false;
    assert!(matches!(steklov_neumann_spectrum(&s, &missing, 2), Err(Error::DomainMissingBoundary(1))));
}

#[test]
fn neumann_square_domain_is_ell_independent() {
    let ctx = GroupContext::new(3).unwrap();
    let res = Resolution::from_square_n(4);
    let mut previous: Option<DMatrix<f64>> = None;
    for ell in [1.0, 0.25] {
        let s = assemble_quotient_direct(&ctx, ell, &res).unwrap();
        let op = neumann_operator(&s, &s.square_vertices()).unwrap();
        let full = steklov_spectrum(&dtn_operator(&s).unwrap(), 2).unwrap();
        let n = steklov_spectrum(&op, 2).unwrap();
        assert!(n.eigenvalues[1] > 0.0 && n.eigenvalues[1] <= full.eigenvalues[1] + 1e-12);
        if let Some(prev) = &previous {
            assert_eq!(prev, &op.dtn);
        }
        previous = Some(op.dtn.clone());
    }
}

#[test]
fn test_functions_have_disjoint_support_and_bound_sigma1() {
    let ctx = GroupContext::new(3).unwrap();
    let s = assemble_surface(&ctx, 0.5, &Resolution::from_square_n(4)).unwrap();
    let f0 = test_function(&s, 0).unwrap();
    let f1 = test_function(&s, 1).unwrap();
    assert!(f0.iter().zip(&f1).all(|(a, b)| a * b == 0.0));
    assert!(test_function(&s, 3).is_err());
    let sigma1 = steklov_spectrum(&dtn_operator(&s).unwrap(), 2).unwrap().eigenvalues[1];
    let r = rayleigh(&s, &f0).unwrap().max(rayleigh(&s, &f1).unwrap());
    assert!(sigma1 <= r);
    assert!((region_boundary_mass(&s, 0) - 16.0).abs() < 1e-12);
}

#[test]
fn analytic_bound_behaviour() {
    let b1 = analytic_bound(3, 1.0, 16.0).unwrap();
    let b2 = analytic_bound(3, 0.01, 16.0).unwrap();
    assert!(b2 < b1 && b2 > 0.0);
    let b5 = analytic_bound(5, 1.0, 16.0).unwrap();
    assert!((b5 / b1 - 2.0).abs() < 1e-12);
    assert!(analytic_bound(3, 1.0, 0.0).is_err());
    assert!(analytic_bound(3, -1.0, 1.0).is_err());
}

#[test]
fn symmetry_commutes_and_decomposes() {
    let ctx = GroupContext::new(3).unwrap();
    let s = assemble_surface(&ctx, 0.25, &Resolution::from_square_n(4)).unwrap();
    let op = dtn_operator(&s).unwrap();
    let res = steklov_spectrum(&op, 8).unwrap();
    let action = s.action.as_ref().unwrap();
    let perms = boundary_action(&op, action).unwrap();
    for p in &perms {
        assert!(commutation_defect(&op, p) < 1e-8);
        assert!(permuted_residual(&op, &res, p) < 1e-8);
    }
    let zero = eigenspace_isotypic(&op, &res, &[0], &ctx, action).unwrap();
    let trivial: Vec<_> = zero.entries.iter().filter(|e| e.multiplicity > 0).collect();
    assert_eq!(trivial.len(), 1);
    assert_eq!(trivial[0].label, crate::reptheory::IrrepLabel::OneDim(ctx.p() - 1));
    assert!(zero.delta1_trivial);
}
