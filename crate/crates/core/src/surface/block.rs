use serde::{Deserialize, Serialize};

use super::glue::{glue_pieces, port_pairs, ComplexBuilder, Piece};
use super::{BoundaryVertex, CollarPoint, CollarProfile, CollarSide, Edge, Resolution, VertexPart};
use crate::error::{Error, Result};

/// Named port chains of a block. `γ₁±` are closed circles of `n_t` vertices;
/// the other four are open chains of `square_n + 1` vertices listed
/// bottom-to-top (`γ₂±`) or left-to-right (`b₁`, `b₂`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPorts {
    pub gamma1_plus: Vec<usize>,
    pub gamma1_minus: Vec<usize>,
    pub gamma2_plus: Vec<usize>,
    pub gamma2_minus: Vec<usize>,
    pub b1: Vec<usize>,
    pub b2: Vec<usize>,
}

impl BlockPorts {
    fn map(&self, f: impl Fn(usize) -> usize) -> Self {
        let m = |v: &Vec<usize>| v.iter().map(|&x| f(x)).collect();
        Self {
            gamma1_plus: m(&self.gamma1_plus),
            gamma1_minus: m(&self.gamma1_minus),
            gamma2_plus: m(&self.gamma2_plus),
            gamma2_minus: m(&self.gamma2_minus),
            b1: m(&self.b1),
            b2: m(&self.b2),
        }
    }

    pub(crate) fn mapped(&self, f: impl Fn(usize) -> usize) -> Self {
        self.map(f)
    }
}

#[derive(Clone, Debug)]
pub struct DiscreteBlock {
    pub profile: CollarProfile,
    pub resolution: Resolution,
    pub vertex_count: usize,
    pub edges: Vec<Edge>,
    pub faces: Vec<Vec<usize>>,
    pub ports: BlockPorts,
    pub boundary_mass: Vec<BoundaryVertex>,
    pub parts: Vec<VertexPart>,
    pub collar_points: Vec<Option<CollarPoint>>,
    /// Local index in this block of each vertex of the unglued block `B(ℓ)`.
    pub local_from_base: Vec<usize>,
    pub self_glued: bool,
}

impl DiscreteBlock {
    pub fn boundary_mass_total(&self) -> f64 {
        self.boundary_mass.iter().map(|b| b.mass).sum()
    }

    pub(crate) fn piece(&self) -> Piece<'_> {
        Piece {
            vertex_count: self.vertex_count,
            edges: &self.edges,
            faces: &self.faces,
            boundary: &self.boundary_mass,
        }
    }
}

type Point = (f64, f64);

fn dist(a: Point, b: Point) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn midpoint(a: Point, b: Point) -> Point {
    (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1))
}

/// Point `s` of `4n` equally spaced points on the boundary of `[−2, 2]²`,
/// counter-clockwise from `(−2, −2)`.
fn perimeter_point(s: usize, n: usize) -> Point {
    let side = (s / n) % 4;
    let t = 4.0 * (s % n) as f64 / n as f64;
    match side {
        0 => (-2.0 + t, -2.0),
        1 => (2.0, -2.0 + t),
        2 => (2.0 - t, 2.0),
        _ => (-2.0, 2.0 - t),
    }
}

/// Triangulated band between two cycles, advancing along whichever cycle is
/// behind in relative arclength.
fn zipper(a: &[usize], b: &[usize], faces: &mut Vec<Vec<usize>>) {
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    while i < na || j < nb {
        let advance_a = if i == na {
            false
        } else if j == nb {
            true
        } else {
            (i + 1) * nb <= (j + 1) * na
        };
        if advance_a {
            faces.push(vec![a[i], a[(i + 1) % na], b[j % nb]]);
            i += 1;
        } else {
            faces.push(vec![a[i % na], b[(j + 1) % nb], b[j]]);
            j += 1;
        }
    }
}

/// Builds `B(ℓ)`: perforated square, junction and two half-collars.
pub fn build_block(profile: &CollarProfile, resolution: &Resolution) -> Result<DiscreteBlock> {
    resolution.validate()?;
    if profile.n_rho != resolution.collar_n_rho || profile.n_t != resolution.collar_n_t {
        return Err(Error::Resolution(format!(
            "collar profile {}x{} does not match resolution {}x{}",
            profile.n_rho, profile.n_t, resolution.collar_n_rho, resolution.collar_n_t
        )));
    }
    let n = resolution.square_n;
    let n_ring = 4 * n;
    let n_radial = n / 2;
    let mut cx = ComplexBuilder::default();
    let mut parts = Vec::new();
    let mut collar_points = Vec::new();

    // Perforated square: structured grid between the unit circle (r = 0) and
    // the square boundary (r = n_radial) along rays through the origin.
    let mut pos = vec![vec![(0.0, 0.0); n_radial + 1]; n_ring];
    let mut sq = vec![vec![0; n_radial + 1]; n_ring];
    for s in 0..n_ring {
        let outer = perimeter_point(s, n);
        let norm = (outer.0 * outer.0 + outer.1 * outer.1).sqrt();
        let inner = (outer.0 / norm, outer.1 / norm);
        for r in 0..=n_radial {
            let f = r as f64 / n_radial as f64;
            pos[s][r] = (inner.0 + f * (outer.0 - inner.0), inner.1 + f * (outer.1 - inner.1));
            sq[s][r] = cx.add_vertex();
            parts.push(VertexPart::Square);
            collar_points.push(None);
        }
    }
    let next = |s: usize| (s + 1) % n_ring;
    let prev = |s: usize| (s + n_ring - 1) % n_ring;
    for s in 0..n_ring {
        for r in 0..n_radial {
            let h = dist(pos[s][r], pos[s][r + 1]);
            let m = midpoint(pos[s][r], pos[s][r + 1]);
            let m_prev = midpoint(pos[prev(s)][r], pos[prev(s)][r + 1]);
            let m_next = midpoint(pos[next(s)][r], pos[next(s)][r + 1]);
            let dual = 0.5 * (dist(m, m_prev) + dist(m, m_next));
            cx.add_edge(sq[s][r], sq[s][r + 1], dual / h);
        }
        for r in 0..=n_radial {
            let h = dist(pos[s][r], pos[next(s)][r]);
            let t = |rr: usize| midpoint(pos[s][rr], pos[next(s)][rr]);
            let mut dual = 0.0;
            if r > 0 {
                dual += 0.5 * dist(t(r), t(r - 1));
            }
            if r < n_radial {
                dual += 0.5 * dist(t(r), t(r + 1));
            }
            cx.add_edge(sq[s][r], sq[next(s)][r], dual / h);
        }
        for r in 0..n_radial {
            cx.faces.push(vec![sq[s][r], sq[next(s)][r], sq[next(s)][r + 1], sq[s][r + 1]]);
        }
    }
    let outer = |s: usize| sq[s % n_ring][n_radial];
    let seg = 4.0 / n as f64;
    for s in (0..n).chain(2 * n..3 * n) {
        cx.add_mass(outer(s), 0.5 * seg);
        cx.add_mass(outer(s + 1), 0.5 * seg);
    }
    let b1: Vec<usize> = (0..=n).map(outer).collect();
    let gamma2_plus: Vec<usize> = (n..=2 * n).map(outer).collect();
    let b2: Vec<usize> = (2 * n..=3 * n).rev().map(outer).collect();
    let gamma2_minus: Vec<usize> = (3 * n..=4 * n).rev().map(outer).collect();

    // Half-collars: rows i = 0..=n_rho at ρ_i = i·w/n_rho, row 0 is the port.
    let n_t = profile.n_t;
    let mut collar_grid = Vec::new();
    for side in [CollarSide::Plus, CollarSide::Minus] {
        let mut grid = vec![vec![0; n_t]; profile.n_rho + 1];
        for (i, row) in grid.iter_mut().enumerate() {
            for v in row.iter_mut() {
                *v = cx.add_vertex();
                parts.push(VertexPart::Collar);
                collar_points.push(Some(CollarPoint { side, rho_index: i, rho: profile.rho(i) }));
            }
        }
        for i in 0..=profile.n_rho {
            for j in 0..n_t {
                let jn = (j + 1) % n_t;
                cx.add_edge(grid[i][j], grid[i][jn], profile.circumferential_conductance(i));
                if i < profile.n_rho {
                    cx.add_edge(grid[i][j], grid[i + 1][j], profile.radial_conductance(i));
                    cx.faces.push(vec![grid[i][j], grid[i][jn], grid[i + 1][jn], grid[i + 1][j]]);
                }
            }
        }
        collar_grid.push(grid);
    }
    let gamma1_plus = collar_grid[0][0].clone();
    let gamma1_minus = collar_grid[1][0].clone();

    // Junction: a bridge splits the inner circle into two loops, each joined
    // to a collar mouth through `pants_level` intermediate rings.
    let ring: Vec<usize> = (0..n_ring).map(|s| sq[s][0]).collect();
    let half = n_ring / 2;
    let level = resolution.pants_level;
    let mut junction_vertex = |cx: &mut ComplexBuilder| {
        parts.push(VertexPart::Junction);
        collar_points.push(None);
        cx.add_vertex()
    };
    let bridge: Vec<usize> = (0..level).map(|_| junction_vertex(&mut cx)).collect();
    let mut loop_plus: Vec<usize> = ring[..=half].to_vec();
    loop_plus.extend(bridge.iter().rev());
    let mut loop_minus: Vec<usize> = ring[half..].to_vec();
    loop_minus.push(ring[0]);
    loop_minus.extend(bridge.iter());

    let mut junction_faces = Vec::new();
    for (start, mouth) in [(loop_plus, &collar_grid[0][profile.n_rho]), (loop_minus, &collar_grid[1][profile.n_rho])] {
        let m0 = start.len() as f64;
        let mut current = start;
        for l in 1..=level {
            let size = (m0 + (n_t as f64 - m0) * l as f64 / (level + 1) as f64).round().max(3.0) as usize;
            let layer: Vec<usize> = (0..size).map(|_| junction_vertex(&mut cx)).collect();
            zipper(&current, &layer, &mut junction_faces);
            current = layer;
        }
        zipper(&current, mouth, &mut junction_faces);
    }
    let mut junction_edges = std::collections::BTreeSet::new();
    for f in &junction_faces {
        for k in 0..f.len() {
            let (a, b) = (f[k], f[(k + 1) % f.len()]);
            junction_edges.insert(if a < b { (a, b) } else { (b, a) });
        }
    }
    for (a, b) in junction_edges {
        cx.add_edge(a, b, 1.0);
    }
    cx.faces.extend(junction_faces);

    let vertex_count = cx.n;
    Ok(DiscreteBlock {
        profile: *profile,
        resolution: *resolution,
        vertex_count,
        edges: cx.edge_list(),
        faces: cx.faces.clone(),
        ports: BlockPorts { gamma1_plus, gamma1_minus, gamma2_plus, gamma2_minus, b1, b2 },
        boundary_mass: cx.boundary_list(),
        parts,
        collar_points,
        local_from_base: (0..vertex_count).collect(),
        self_glued: false,
    })
}

/// Builds `B'(ℓ)`: `B(ℓ)` with `γ₁⁺` glued to `γ₁⁻` without twist.
pub fn build_block_prime(profile: &CollarProfile, resolution: &Resolution) -> Result<DiscreteBlock> {
    let base = build_block(profile, resolution)?;
    let ids = port_pairs(0, &base.ports.gamma1_plus, 0, &base.ports.gamma1_minus)?;
    let glued = glue_pieces(&[base.piece()], &ids)?;
    let mut parts = vec![VertexPart::Square; glued.vertex_count];
    let mut collar_points = vec![None; glued.vertex_count];
    for (v, reps) in glued.reps.iter().enumerate() {
        let (_, l) = reps[0];
        parts[v] = base.parts[l];
        collar_points[v] = base.collar_points[l];
    }
    let map = |l: usize| glued.global(0, l);
    Ok(DiscreteBlock {
        profile: *profile,
        resolution: *resolution,
        vertex_count: glued.vertex_count,
        edges: glued.edges.clone(),
        faces: glued.faces.clone(),
        ports: base.ports.mapped(map),
        boundary_mass: glued.boundary.clone(),
        parts,
        collar_points,
        local_from_base: (0..base.vertex_count).map(map).collect(),
        self_glued: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::topology::{boundary_components, euler_genus};

    fn block(ell: f64, res: Resolution) -> DiscreteBlock {
        build_block(&res.profile(ell).unwrap(), &res).unwrap()
    }

    #[test]
    fn euler_characteristic_is_minus_one() {
        for res in [
            Resolution::from_square_n(4),
            Resolution::from_square_n(8),
            Resolution { square_n: 6, collar_n_rho: 5, collar_n_t: 8, pants_level: 1 },
            Resolution { square_n: 10, collar_n_rho: 3, collar_n_t: 20, pants_level: 4 },
        ] {
            let b = block(0.7, res);
            let report = euler_genus(&b, None).unwrap();
            assert_eq!(report.chi, -1, "{res:?}");
            assert_eq!(report.boundary_count, 3);
            assert_eq!(report.genus_chi, Some(0));
            let bp = build_block_prime(&res.profile(0.7).unwrap(), &res).unwrap();
            let report = euler_genus(&bp, None).unwrap();
            assert_eq!(report.chi, -1);
            assert_eq!(report.boundary_count, 1);
            assert_eq!(report.genus_chi, Some(1));
        }
    }

    #[test]
    fn ports_and_masses() {
        let res = Resolution::from_square_n(8);
        let b = block(0.5, res);
        assert_eq!(b.ports.gamma1_plus.len(), res.collar_n_t);
        assert_eq!(b.ports.gamma1_minus.len(), res.collar_n_t);
        for chain in [&b.ports.b1, &b.ports.b2, &b.ports.gamma2_plus, &b.ports.gamma2_minus] {
            assert_eq!(chain.len(), 9);
        }
        assert!((b.boundary_mass_total() - 8.0).abs() < 1e-12);
        let mut on_b: Vec<usize> = b.ports.b1.iter().chain(&b.ports.b2).copied().collect();
        on_b.sort();
        let massed: Vec<usize> = b.boundary_mass.iter().map(|m| m.vertex).collect();
        assert_eq!(on_b, massed);
        // corners are shared between b and γ₂ chains
        assert_eq!(b.ports.b1[0], b.ports.gamma2_minus[0]);
        assert_eq!(b.ports.b1[8], b.ports.gamma2_plus[0]);
        assert_eq!(b.ports.b2[0], b.ports.gamma2_minus[8]);
        assert_eq!(b.ports.b2[8], b.ports.gamma2_plus[8]);
    }

    #[test]
    fn conductances_positive_and_edges_in_at_most_two_faces() {
        let b = block(0.25, Resolution::from_square_n(6));
        assert!(b.edges.iter().all(|e| e.conductance > 0.0 && e.i < e.j));
        assert!(b.boundary_mass.iter().all(|m| m.mass > 0.0));
        assert_eq!(boundary_components(&b).unwrap().len(), 3);
    }

    #[test]
    fn junction_is_independent_of_ell() {
        let res = Resolution::from_square_n(4);
        let a = block(1.0, res);
        let b = block(0.1, res);
        assert_eq!(a.vertex_count, b.vertex_count);
        for (ea, eb) in a.edges.iter().zip(&b.edges) {
            assert_eq!((ea.i, ea.j), (eb.i, eb.j));
            if a.parts[ea.i] != VertexPart::Collar || a.parts[ea.j] != VertexPart::Collar {
                assert_eq!(ea.conductance, eb.conductance);
            }
        }
    }

    #[test]
    fn mismatched_resolution_rejected() {
        let res = Resolution::from_square_n(8);
        let prof = CollarProfile::new(1.0, 10, 16).unwrap();
        assert!(build_block(&prof, &res).is_err());
        let bad = Resolution { square_n: 8, collar_n_rho: 8, collar_n_t: 12, pants_level: 1 };
        assert!(build_block(&bad.profile(1.0).unwrap(), &bad).is_err());
        let odd = Resolution { square_n: 5, ..res };
        assert!(odd.validate().is_err());
    }
}
