use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::block::{build_block, build_block_prime, DiscreteBlock};
use super::glue::{glue_pieces, port_pairs, Glued, Piece};
use super::{
    BoundaryVertex, CollarMembership, CollarSide, DiscreteSurface, Edge, Resolution, SurfaceKind, VertexPart,
};
use crate::cayley::{CayleyGraph, EdgeColor, Permutation};
use crate::error::{Error, Result};
use crate::group::GroupContext;

fn pieces(block: &DiscreteBlock, copies: usize) -> Vec<Piece<'_>> {
    (0..copies).map(|_| block.piece()).collect()
}

/// Permutation of surface vertices induced by a permutation of the pieces,
/// keeping the local index. Fails if glued representatives disagree.
fn induced_perm(glued: &Glued, piece_map: impl Fn(usize) -> usize) -> Result<Permutation> {
    let mut perm = vec![usize::MAX; glued.vertex_count];
    for (v, reps) in glued.reps.iter().enumerate() {
        for &(piece, local) in reps {
            let image = glued.global(piece_map(piece), local);
            if perm[v] == usize::MAX {
                perm[v] = image;
            } else if perm[v] != image {
                return Err(Error::SymmetryBroken(format!(
                    "vertex {v} maps to both {} and {image}",
                    perm[v]
                )));
            }
        }
    }
    let perm = Permutation(perm);
    if !perm.is_bijection() {
        return Err(Error::SymmetryBroken("induced map is not a bijection".into()));
    }
    Ok(perm)
}

fn single_piece(reps: &[(usize, usize)]) -> Option<usize> {
    let first = reps[0].0;
    reps.iter().all(|&(p, _)| p == first).then_some(first)
}

/// Glues one block per Cayley-graph vertex: each `D1` edge `v → w`
/// identifies `γ₁⁺` of `v` with `γ₁⁻` of `w`, each `D2` edge identifies `γ₂⁺`
/// of `v` with `γ₂⁻` of `w`, index by index.
pub fn assemble_surface(ctx: &GroupContext, ell: f64, resolution: &Resolution) -> Result<DiscreteSurface> {
    let profile = resolution.profile(ell)?;
    let block = build_block(&profile, resolution)?;
    let graph = CayleyGraph::build(ctx);
    let n = graph.vertex_count();

    let mut ids = Vec::new();
    for e in graph.edges() {
        let (a, b) = match e.color {
            EdgeColor::D1 => (&block.ports.gamma1_plus, &block.ports.gamma1_minus),
            EdgeColor::D2 => (&block.ports.gamma2_plus, &block.ports.gamma2_minus),
        };
        ids.extend(port_pairs(e.source, a, e.target, b)?);
    }
    let glued = glue_pieces(&pieces(&block, n), &ids)?;

    let mut action = Vec::with_capacity(ctx.order());
    for g in ctx.elements() {
        action.push(induced_perm(&glued, |v| graph.index(&(*g * graph.element(v))))?);
    }

    let region_of_block: Vec<usize> = graph.vertices().iter().map(|g| g.a() as usize).collect();
    let d1_inverse = ctx.delta1().inv();
    let mut block_of = Vec::with_capacity(glued.vertex_count);
    let mut region_of = Vec::with_capacity(glued.vertex_count);
    let mut parts = Vec::with_capacity(glued.vertex_count);
    let mut collar = Vec::with_capacity(glued.vertex_count);
    for reps in &glued.reps {
        block_of.push(single_piece(reps));
        let regions: BTreeSet<usize> = reps.iter().map(|&(v, _)| region_of_block[v]).collect();
        region_of.push(if regions.len() == 1 { regions.first().copied() } else { None });
        let (v, local) = reps[0];
        parts.push(block.parts[local]);
        collar.push(block.collar_points[local].map(|cp| match cp.side {
            CollarSide::Plus => CollarMembership { collar: v, rho: cp.rho },
            CollarSide::Minus => {
                CollarMembership { collar: graph.index(&(graph.element(v) * d1_inverse)), rho: -cp.rho }
            }
        }));
    }

    Ok(DiscreteSurface {
        kind: SurfaceKind::Glued,
        p: ctx.p(),
        profile,
        resolution: *resolution,
        vertex_count: glued.vertex_count,
        edges: glued.edges.clone(),
        faces: glued.faces.clone(),
        boundary: glued.boundary.clone(),
        block_of,
        region_of_block,
        region_of,
        region_count: ctx.p() as usize,
        parts,
        collar,
        block_slots: (0..n).map(|v| (0..block.vertex_count).map(|x| glued.global(v, x)).collect()).collect(),
        block_ports: (0..n).map(|v| block.ports.mapped(|x| glued.global(v, x))).collect(),
        action: Some(action),
    })
}

/// Builds `S'_p(ℓ)` from `p − 1` copies of `B'(ℓ)` arranged in a cycle along
/// `γ₂`. Block `i` stands for the coset of `δ₂^i`.
pub fn assemble_quotient_direct(ctx: &GroupContext, ell: f64, resolution: &Resolution) -> Result<DiscreteSurface> {
    let profile = resolution.profile(ell)?;
    let block = build_block_prime(&profile, resolution)?;
    let m = ctx.p() as usize - 1;
    let mut ids = Vec::new();
    for i in 0..m {
        ids.extend(port_pairs(i, &block.ports.gamma2_plus, (i + 1) % m, &block.ports.gamma2_minus)?);
    }
    let glued = glue_pieces(&pieces(&block, m), &ids)?;

    let mut action = Vec::with_capacity(ctx.order());
    for g in ctx.elements() {
        let (_, shift) = ctx.word_decompose(g);
        action.push(induced_perm(&glued, |i| (i + shift as usize) % m)?);
    }

    let mut block_of = Vec::with_capacity(glued.vertex_count);
    let mut region_of = Vec::with_capacity(glued.vertex_count);
    let mut parts = Vec::with_capacity(glued.vertex_count);
    let mut collar = Vec::with_capacity(glued.vertex_count);
    for reps in &glued.reps {
        block_of.push(single_piece(reps));
        let (i, local) = reps[0];
        parts.push(block.parts[local]);
        let cp = block.collar_points[local];
        region_of.push(match cp {
            Some(cp) if cp.rho_index == 0 => None,
            _ => Some(0),
        });
        collar.push(cp.map(|cp| CollarMembership {
            collar: i,
            rho: if cp.side == CollarSide::Plus { cp.rho } else { -cp.rho },
        }));
    }

    Ok(DiscreteSurface {
        kind: SurfaceKind::QuotientDirect,
        p: ctx.p(),
        profile,
        resolution: *resolution,
        vertex_count: glued.vertex_count,
        edges: glued.edges.clone(),
        faces: glued.faces.clone(),
        boundary: glued.boundary.clone(),
        block_of,
        region_of_block: vec![0; m],
        region_of,
        region_count: 1,
        parts,
        collar,
        block_slots: (0..m)
            .map(|i| block.local_from_base.iter().map(|&l| glued.global(i, l)).collect())
            .collect(),
        block_ports: (0..m).map(|i| block.ports.mapped(|x| glued.global(i, x))).collect(),
        action: Some(action),
    })
}

fn canonical_face(face: &[usize]) -> Vec<usize> {
    let n = face.len();
    let start = (0..n).min_by_key(|&k| face[k]).unwrap_or(0);
    let forward: Vec<usize> = (0..n).map(|k| face[(start + k) % n]).collect();
    let backward: Vec<usize> = (0..n).map(|k| face[(start + n - k) % n]).collect();
    forward.min(backward)
}

/// Orbit complex of `S_p(ℓ)` under `⟨δ₁⟩`. The action must be free; edge
/// weights between orbits `O_i`, `O_j` are `Σ_{y ∈ O_j} c(x, y)` for one
/// `x ∈ O_i`.
pub fn quotient_by_delta1(ctx: &GroupContext, s: &DiscreteSurface) -> Result<DiscreteSurface> {
    let action = s.action.as_ref().ok_or(Error::MissingAction)?;
    let d1 = &action[ctx.index(&ctx.delta1())];
    let p = ctx.p() as usize;
    let mut orbit_of = vec![usize::MAX; s.vertex_count];
    let mut reps = Vec::new();
    for v in 0..s.vertex_count {
        if orbit_of[v] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(v);
        let mut x = v;
        let mut size = 0;
        loop {
            orbit_of[x] = id;
            size += 1;
            x = d1.apply(x);
            if x == v {
                break;
            }
        }
        if size != p {
            return Err(Error::NotFree(format!("orbit of vertex {v} has size {size}, expected {p}")));
        }
    }
    let count = reps.len();

    let mut neighbours: Vec<Vec<(usize, f64)>> = vec![Vec::new(); s.vertex_count];
    for e in &s.edges {
        neighbours[e.i].push((e.j, e.conductance));
        neighbours[e.j].push((e.i, e.conductance));
    }
    let mut edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, &r) in reps.iter().enumerate() {
        for &(y, c) in &neighbours[r] {
            let j = orbit_of[y];
            if j == i {
                return Err(Error::NotFree(format!("edge inside the orbit of vertex {r}")));
            }
            if j > i {
                *edges.entry((i, j)).or_insert(0.0) += c;
            }
        }
    }
    let mut faces = BTreeSet::new();
    for f in &s.faces {
        let mapped: Vec<usize> = f.iter().map(|&v| orbit_of[v]).collect();
        let distinct: BTreeSet<usize> = mapped.iter().copied().collect();
        if distinct.len() != mapped.len() {
            return Err(Error::NotFree("a face degenerates in the quotient".into()));
        }
        faces.insert(canonical_face(&mapped));
    }
    let mut mass = vec![0.0; s.vertex_count];
    for b in &s.boundary {
        mass[b.vertex] = b.mass;
    }
    let boundary: Vec<BoundaryVertex> = reps
        .iter()
        .enumerate()
        .filter(|(_, &r)| mass[r] > 0.0)
        .map(|(i, &r)| BoundaryVertex { vertex: i, mass: mass[r] })
        .collect();

    let induced: Vec<Permutation> =
        action.iter().map(|perm| Permutation(reps.iter().map(|&r| orbit_of[perm.apply(r)]).collect())).collect();

    // Quotient block i is the image of the S_p block δ₂^i = (0, k^(−i)).
    let blocks: Vec<usize> = (0..p - 1).map(|i| ctx.index(&ctx.word(0, i as i64))).collect();
    let mut block_by_unit = BTreeMap::new();
    for (i, g) in blocks.iter().enumerate() {
        block_by_unit.insert(ctx.element(*g).b(), i);
    }
    let block_of_vertex = |v: usize| block_by_unit[&ctx.element(v).b()];

    let mut parts = Vec::with_capacity(count);
    let mut region_of = Vec::with_capacity(count);
    let mut block_of = Vec::with_capacity(count);
    let mut collar = Vec::with_capacity(count);
    for &r in &reps {
        parts.push(s.parts[r]);
        block_of.push(s.block_of[r].map(block_of_vertex));
        region_of.push(if s.parts[r] == VertexPart::Collar && s.region_of[r].is_none() { None } else { Some(0) });
        collar.push(s.collar[r].map(|c| CollarMembership { collar: block_of_vertex(c.collar), rho: c.rho }));
    }

    Ok(DiscreteSurface {
        kind: SurfaceKind::QuotientOrbit,
        p: s.p,
        profile: s.profile,
        resolution: s.resolution,
        vertex_count: count,
        edges: edges.into_iter().map(|((i, j), conductance)| Edge { i, j, conductance }).collect(),
        faces: faces.into_iter().collect(),
        boundary,
        block_of,
        region_of_block: vec![0; p - 1],
        region_of,
        region_count: 1,
        parts,
        collar,
        block_slots: blocks.iter().map(|&b| s.block_slots[b].iter().map(|&v| orbit_of[v]).collect()).collect(),
        block_ports: blocks.iter().map(|&b| s.block_ports[b].mapped(|v| orbit_of[v])).collect(),
        action: Some(induced),
    })
}

/// Vertex correspondence between two quotient constructions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuotientMatch {
    /// `vertex_map[v]`: vertex of the second surface matching `v`.
    pub vertex_map: Vec<usize>,
    pub max_weight_rel_diff: f64,
    pub max_mass_rel_diff: f64,
}

/// Matches two surfaces block by block through their base-block slots and
/// compares conductances and masses to relative tolerance `tol`.
pub fn quotient_isomorphism(a: &DiscreteSurface, b: &DiscreteSurface, tol: f64) -> Result<QuotientMatch> {
    if a.vertex_count != b.vertex_count || a.block_count() != b.block_count() {
        return Err(Error::Isomorphism(format!(
            "sizes differ: {} vertices / {} blocks vs {} / {}",
            a.vertex_count,
            a.block_count(),
            b.vertex_count,
            b.block_count()
        )));
    }
    let mut map = vec![usize::MAX; a.vertex_count];
    for (sa, sb) in a.block_slots.iter().zip(&b.block_slots) {
        for (&x, &y) in sa.iter().zip(sb) {
            if map[x] == usize::MAX {
                map[x] = y;
            } else if map[x] != y {
                return Err(Error::Isomorphism(format!("vertex {x} matched to {} and {y}", map[x])));
            }
        }
    }
    if !Permutation(map.clone()).is_bijection() {
        return Err(Error::Isomorphism("slot correspondence is not a bijection".into()));
    }
    if a.edges.len() != b.edges.len() || a.boundary.len() != b.boundary.len() {
        return Err(Error::Isomorphism("edge or boundary counts differ".into()));
    }
    let b_edges: BTreeMap<(usize, usize), f64> = b.edges.iter().map(|e| ((e.i, e.j), e.conductance)).collect();
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE);
    let mut max_weight_rel_diff: f64 = 0.0;
    for e in &a.edges {
        let (i, j) = (map[e.i], map[e.j]);
        let k = if i < j { (i, j) } else { (j, i) };
        let c = b_edges.get(&k).ok_or_else(|| Error::Isomorphism(format!("edge ({}, {}) has no image", e.i, e.j)))?;
        max_weight_rel_diff = max_weight_rel_diff.max(rel(e.conductance, *c));
    }
    let b_mass: BTreeMap<usize, f64> = b.boundary.iter().map(|m| (m.vertex, m.mass)).collect();
    let mut max_mass_rel_diff: f64 = 0.0;
    for m in &a.boundary {
        let other = b_mass
            .get(&map[m.vertex])
            .ok_or_else(|| Error::Isomorphism(format!("boundary vertex {} has no image", m.vertex)))?;
        max_mass_rel_diff = max_mass_rel_diff.max(rel(m.mass, *other));
    }
    if max_weight_rel_diff > tol || max_mass_rel_diff > tol {
        return Err(Error::Isomorphism(format!(
            "weights differ by {max_weight_rel_diff:e}, masses by {max_mass_rel_diff:e}"
        )));
    }
    Ok(QuotientMatch { vertex_map: map, max_weight_rel_diff, max_mass_rel_diff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::topology::{boundary_components, components_after_cut, euler_genus};

    fn small() -> Resolution {
        Resolution::from_square_n(4)
    }

    #[test]
    fn glued_surface_topology() {
        for p in [3u32, 5] {
            let ctx = GroupContext::new(p as u64).unwrap();
            let s = assemble_surface(&ctx, 0.5, &small()).unwrap();
            assert!(s.is_connected());
            let r = euler_genus(&s, Some(p)).unwrap();
            let pp = p as i64;
            assert_eq!(r.chi, -2 * pp * (pp - 1));
            assert_eq!(r.boundary_count, 2 * p as usize);
            assert_eq!(r.genus_chi, Some((pp - 1) * (pp - 1)));
            assert_eq!(r.agrees_with_tube_graph(), Some(true));
            assert_eq!(boundary_components(&s).unwrap().len(), 2 * p as usize);
            let comps = components_after_cut(&s);
            assert_eq!(comps.len(), p as usize);
            for c in &comps {
                let regions: BTreeSet<_> = c.iter().map(|&v| s.region_of[v]).collect();
                assert_eq!(regions.len(), 1);
            }
            let total = s.boundary_mass_total();
            assert!((total - 8.0 * ctx.order() as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn action_is_exact_symmetry() {
        let ctx = GroupContext::new(5).unwrap();
        let s = assemble_surface(&ctx, 0.25, &small()).unwrap();
        let action = s.action.as_ref().unwrap();
        let edges: BTreeMap<(usize, usize), f64> = s.edges.iter().map(|e| ((e.i, e.j), e.conductance)).collect();
        let mass: BTreeMap<usize, f64> = s.boundary.iter().map(|b| (b.vertex, b.mass)).collect();
        for (gi, perm) in action.iter().enumerate() {
            for e in &s.edges {
                let (a, b) = (perm.apply(e.i), perm.apply(e.j));
                let k = if a < b { (a, b) } else { (b, a) };
                assert_eq!(edges.get(&k), Some(&e.conductance));
            }
            for b in &s.boundary {
                assert_eq!(mass.get(&perm.apply(b.vertex)), Some(&b.mass));
            }
            for hi in 0..ctx.order() {
                let gh = ctx.index(&(ctx.element(gi) * ctx.element(hi)));
                assert_eq!(perm.compose(&action[hi]), action[gh]);
            }
        }
    }

    #[test]
    fn collar_membership_is_consistent() {
        let ctx = GroupContext::new(3).unwrap();
        let s = assemble_surface(&ctx, 1.0, &small()).unwrap();
        let mut mid = BTreeMap::new();
        for (v, c) in s.collar.iter().enumerate() {
            if let Some(c) = c {
                if c.rho == 0.0 {
                    *mid.entry(c.collar).or_insert(0) += 1;
                    assert!(s.region_of[v].is_none());
                }
            }
        }
        assert_eq!(mid.len(), ctx.order());
        assert!(mid.values().all(|&n| n == small().collar_n_t));
    }

    #[test]
    fn quotients_agree() {
        for p in [3u64, 5] {
            let ctx = GroupContext::new(p).unwrap();
            let s = assemble_surface(&ctx, 0.5, &small()).unwrap();
            let orbit = quotient_by_delta1(&ctx, &s).unwrap();
            let direct = assemble_quotient_direct(&ctx, 0.5, &small()).unwrap();
            let m = quotient_isomorphism(&direct, &orbit, 1e-12).unwrap();
            assert!(m.max_weight_rel_diff <= 1e-12);
            let r = euler_genus(&direct, None).unwrap();
            assert_eq!(r.chi, -2 * (p as i64 - 1));
            assert_eq!(r.boundary_count, 2);
            let ro = euler_genus(&orbit, None).unwrap();
            assert_eq!((ro.chi, ro.boundary_count), (r.chi, r.boundary_count));
            // δ₁ acts trivially on the quotient
            let d1 = &direct.action.as_ref().unwrap()[ctx.index(&ctx.delta1())];
            assert_eq!(*d1, Permutation::identity(direct.vertex_count));
            assert_eq!(components_after_cut(&direct).len(), 1);
        }
    }

    #[test]
    fn missing_action_is_reported() {
        let ctx = GroupContext::new(3).unwrap();
        let mut s = assemble_surface(&ctx, 0.5, &small()).unwrap();
        s.action = None;
        assert!(matches!(quotient_by_delta1(&ctx, &s), Err(Error::MissingAction)));
    }
}
