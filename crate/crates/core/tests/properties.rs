use proptest::prelude::*;

use steklov_core::cayley::left_action;
use steklov_core::spectral::{assemble_laplacian, dtn_operator, steklov_spectrum, WeightedGraph};
use steklov_core::surface::{BoundaryVertex, Edge};
use steklov_core::{CayleyGraph, GroupContext, Permutation};

const PRIMES: [u64; 6] = [3, 5, 7, 11, 13, 17];

fn group_and_elements() -> impl Strategy<Value = (u64, usize, usize, usize)> {
    prop::sample::select(PRIMES.to_vec()).prop_flat_map(|p| {
        let n = (p * (p - 1)) as usize;
        (Just(p), 0..n, 0..n, 0..n)
    })
}

fn permutation(max_len: usize) -> impl Strategy<Value = Permutation> {
    (1..max_len).prop_flat_map(|n| Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(Permutation))
}

/// Connected graph: a random spanning tree plus extra edges, with a random
/// nonempty boundary of positive masses.
fn weighted_graph() -> impl Strategy<Value = WeightedGraph> {
    (3usize..12).prop_flat_map(|n| {
        let tree = prop::collection::vec((any::<prop::sample::Index>(), 0.1f64..10.0), n - 1);
        let extra = prop::collection::vec((0..n, 0..n, 0.1f64..10.0), 0..2 * n);
        let boundary = prop::collection::btree_set(0..n, 2..=n);
        let masses = prop::collection::vec(0.1f64..5.0, n);
        (Just(n), tree, extra, boundary, masses).prop_map(|(n, tree, extra, boundary, masses)| {
            let mut edges = Vec::new();
            for (k, (parent, c)) in tree.into_iter().enumerate() {
                let child = k + 1;
                edges.push(Edge { i: parent.index(child), j: child, conductance: c });
            }
            for (a, b, c) in extra {
                if a != b {
                    edges.push(Edge { i: a.min(b), j: a.max(b), conductance: c });
                }
            }
            let boundary = boundary.into_iter().map(|v| BoundaryVertex { vertex: v, mass: masses[v] }).collect();
            WeightedGraph { vertex_count: n, edges, boundary }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_laws_hold((p, i, j, k) in group_and_elements()) {
        let ctx = GroupContext::new(p).unwrap();
        let (g, h, f) = (ctx.element(i), ctx.element(j), ctx.element(k));
        prop_assert_eq!((g * h) * f, g * (h * f));
        prop_assert!((g * g.inv()).is_identity());
        prop_assert_eq!((g * h).inv(), h.inv() * g.inv());
        let (a, m) = ctx.word_decompose(&g);
        prop_assert_eq!(ctx.word(a as i64, m as i64), g);
    }

    #[test]
    fn left_action_is_a_homomorphism((p, i, j, _k) in group_and_elements()) {
        let ctx = GroupContext::new(p).unwrap();
        let graph = CayleyGraph::build(&ctx);
        let (g, h) = (ctx.element(i), ctx.element(j));
        prop_assert_eq!(left_action(&graph, &g).compose(&left_action(&graph, &h)), left_action(&graph, &(g * h)));
    }

    #[test]
    fn permutation_inverse(perm in permutation(40)) {
        prop_assert!(perm.is_bijection());
        let id = Permutation::identity(perm.len());
        prop_assert_eq!(perm.compose(&perm.inverse()), id.clone());
        prop_assert_eq!(perm.inverse().compose(&perm), id);
    }

    #[test]
    fn laplacian_energy_is_nonnegative(g in weighted_graph(), seed in prop::collection::vec(-1.0f64..1.0, 12)) {
        let lap = assemble_laplacian(&g);
        let u = &seed[..g.vertex_count];
        prop_assert!(lap.energy(u) >= 0.0);
        let shifted: Vec<f64> = u.iter().map(|x| x + 3.5).collect();
        prop_assert!((lap.energy(u) - lap.energy(&shifted)).abs() <= 1e-9 * (1.0 + lap.energy(u)));
    }

    #[test]
    fn dtn_is_symmetric_with_constant_kernel(g in weighted_graph()) {
        let op = dtn_operator(&g).unwrap();
        let scale = op.dtn.amax().max(1.0);
        prop_assert!((&op.dtn - op.dtn.transpose()).amax() <= 1e-12 * scale);
        for row in op.dtn.row_iter() {
            prop_assert!(row.sum().abs() <= 1e-10 * scale);
        }
        let res = steklov_spectrum(&op, op.size()).unwrap();
        prop_assert!(res.eigenvalues[0].abs() <= 1e-9 * scale);
        prop_assert!(res.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(res.eigenvalues[1] > 0.0);
    }

    #[test]
    fn relabeling_preserves_spectrum((g, order) in weighted_graph().prop_flat_map(|g| {
        let n = g.vertex_count;
        (Just(g), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    })) {
        let h = g.relabeled(&Permutation(order));
        let a = steklov_spectrum(&dtn_operator(&g).unwrap(), g.boundary.len()).unwrap();
        let b = steklov_spectrum(&dtn_operator(&h).unwrap(), g.boundary.len()).unwrap();
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }
}
