//! Parameter sweeps over the collar length, combinatorial audits and the
//! files written for each sweep.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cayley::{cycle_transition_profile, delta2_cycles, transitions_are_adjacent, CayleyGraph};
use crate::error::{Error, Result};
use crate::group::GroupContext;
use crate::reptheory::{as_map, multiplicity_of, IrrepLabel};
use crate::spectral::{
    analytic_bound, dtn_operator, eigenspace_isotypic, neumann_operator, rayleigh, region_boundary_mass,
    steklov_spectrum_with_tol, test_function, SpectralResult, SteklovOperator,
};
use crate::surface::{
    assemble_quotient_direct, assemble_surface, boundary_components, components_after_cut, euler_genus,
    DiscreteSurface, Resolution,
};

/// Environment variable overriding the worker count of a sweep.
pub const WORKERS_ENV: &str = "STEKLOV_LAB_WORKERS";

pub const DEFAULT_ELL_VALUES: [f64; 5] = [1.0, 0.5, 0.25, 0.125, 0.0625];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative gap for multiplicity clustering.
    pub gap_rel: f64,
    /// Largest accepted eigen-residual `‖Λv − σMv‖ / ‖Λ‖`.
    pub solver_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { gap_rel: 1e-6, solver_tol: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub p: u32,
    pub ell_values: Vec<f64>,
    pub resolution: Resolution,
    pub tolerances: Tolerances,
    pub eigen_count: usize,
    pub output_dir: PathBuf,
}

impl SweepConfig {
    pub fn new(p: u32, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            p,
            ell_values: DEFAULT_ELL_VALUES.to_vec(),
            resolution: Resolution::default(),
            tolerances: Tolerances::default(),
            eigen_count: 16,
            output_dir: output_dir.into(),
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        GroupContext::new(self.p as u64)?;
        self.resolution.validate()?;
        if self.ell_values.is_empty() {
            return Err(Error::InvalidParameter("ell_values is empty".into()));
        }
        if let Some(bad) = self.ell_values.iter().find(|&&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParameter(format!("ell values must be positive, got {bad}")));
        }
        if self.ell_values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidParameter("ell_values must be strictly descending".into()));
        }
        if self.eigen_count < 2 {
            return Err(Error::InvalidParameter("eigen_count must be at least 2".into()));
        }
        if !(self.tolerances.gap_rel > 0.0) || !(self.tolerances.solver_tol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical (field-ordered, compact) JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(canonical.as_bytes()))
    }
}

/// Quantities computed at one collar length. Numeric fields are `None` when
/// the computation failed; `status` then carries the error.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub ell: f64,
    pub sigma1_sp: Option<f64>,
    pub mult_sigma1_sp: Option<usize>,
    pub sigma1_sp_prime: Option<f64>,
    pub sigma1_neumann_a: Option<f64>,
    pub rayleigh_f1: Option<f64>,
    pub rayleigh_f2: Option<f64>,
    pub analytic_bound: Option<f64>,
    pub isotypic_table: BTreeMap<String, usize>,
    pub big_rep_multiplicity: Option<usize>,
    /// Relative gap from the σ₁ cluster to the next eigenvalue.
    pub gap_to_next: Option<f64>,
    /// Largest relative spread inside the σ₁ cluster.
    pub cluster_spread: Option<f64>,
    pub spectrum_sp: Vec<f64>,
    pub spectrum_sp_prime: Vec<f64>,
    pub max_residual: Option<f64>,
    pub wall_seconds: f64,
    pub status: String,
}

impl SweepRecord {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// `σ₁(S_p) ≤ max R(f_i)` and `σ₁^N(A) ≤ σ₁(S′_p)`.
    pub fn invariants_hold(&self) -> bool {
        let upper = match (self.sigma1_sp, self.rayleigh_f1, self.rayleigh_f2) {
            (Some(s), Some(a), Some(b)) => s <= a.max(b) * (1.0 + 1e-12),
            _ => false,
        };
        let lower = match (self.sigma1_neumann_a, self.sigma1_sp_prime) {
            (Some(n), Some(s)) => n <= s * (1.0 + 1e-12),
            _ => false,
        };
        upper && lower
    }

    pub fn separated(&self) -> bool {
        matches!((self.sigma1_sp, self.sigma1_sp_prime), (Some(a), Some(b)) if a < b)
    }
}

/// Spectrum with at least the full cluster of σ₁, growing `count` as needed.
fn spectrum_with_cluster(op: &SteklovOperator, count: usize, gap_rel: f64) -> Result<(SpectralResult, Vec<usize>)> {
    let mut count = count.min(op.size());
    loop {
        let res = steklov_spectrum_with_tol(op, count, gap_rel)?;
        match res.cluster_of(1, gap_rel) {
            Ok(cluster) => return Ok((res, cluster)),
            Err(Error::TruncatedCluster(_)) if count < op.size() => count = (2 * count).min(op.size()),
            Err(e) => return Err(e),
        }
    }
}

/// Surfaces and operators shared by every quantity at one collar length.
pub struct EllComputation {
    pub surface: DiscreteSurface,
    pub quotient: DiscreteSurface,
    pub operator: SteklovOperator,
    pub spectrum: SpectralResult,
    pub cluster: Vec<usize>,
}

pub fn evaluate_ell(ctx: &GroupContext, cfg: &SweepConfig, ell: f64) -> Result<(SweepRecord, EllComputation)> {
    let start = Instant::now();
    let tol = cfg.tolerances;
    let surface = assemble_surface(ctx, ell, &cfg.resolution)?;
    let operator = dtn_operator(&surface)?;
    let (spectrum, cluster) = spectrum_with_cluster(&operator, cfg.eigen_count, tol.gap_rel)?;
    let action = surface.action.as_ref().ok_or(Error::MissingAction)?;
    let iso = eigenspace_isotypic(&operator, &spectrum, &cluster, ctx, action)?;

    let quotient = assemble_quotient_direct(ctx, ell, &cfg.resolution)?;
    let q_op = dtn_operator(&quotient)?;
    let q_spec = steklov_spectrum_with_tol(&q_op, cfg.eigen_count.min(q_op.size()), tol.gap_rel)?;
    let n_op = neumann_operator(&quotient, &quotient.square_vertices())?;
    let n_spec = steklov_spectrum_with_tol(&n_op, 2, tol.gap_rel)?;

    let f1 = test_function(&surface, 0)?;
    let f2 = test_function(&surface, 1)?;
    let a_const = region_boundary_mass(&surface, 0);

    let sigma1 = spectrum.eigenvalues[1];
    let last = *cluster.last().expect("cluster is nonempty");
    let spread = (spectrum.eigenvalues[last] - spectrum.eigenvalues[cluster[0]]) / sigma1.abs().max(1.0);
    let max_residual = spectrum.max_residual().max(q_spec.max_residual()).max(n_spec.max_residual());
    let mut record = SweepRecord {
        ell,
        sigma1_sp: Some(sigma1),
        mult_sigma1_sp: Some(cluster.len()),
        sigma1_sp_prime: Some(q_spec.eigenvalues[1]),
        sigma1_neumann_a: Some(n_spec.eigenvalues[1]),
        rayleigh_f1: Some(rayleigh(&surface, &f1)?),
        rayleigh_f2: Some(rayleigh(&surface, &f2)?),
        analytic_bound: Some(analytic_bound(ctx.p(), surface.profile.ell, a_const)?),
        isotypic_table: as_map(&iso.entries),
        big_rep_multiplicity: Some(multiplicity_of(&iso.entries, IrrepLabel::Big)),
        gap_to_next: spectrum.gap_after(1, tol.gap_rel),
        cluster_spread: Some(spread),
        spectrum_sp: spectrum.eigenvalues.clone(),
        spectrum_sp_prime: q_spec.eigenvalues.clone(),
        max_residual: Some(max_residual),
        wall_seconds: 0.0,
        status: "ok".into(),
    };
    if max_residual > tol.solver_tol {
        record.status = format!("failed: eigen-residual {max_residual:e} exceeds {:e}", tol.solver_tol);
    } else if !record.invariants_hold() {
        record.status = "failed: record invariants violated".into();
    }
    record.wall_seconds = start.elapsed().as_secs_f64();
    Ok((record, EllComputation { surface, quotient, operator, spectrum, cluster }))
}

/// Record for one collar length; failures become marked records.
pub fn sweep_record(ctx: &GroupContext, cfg: &SweepConfig, ell: f64) -> SweepRecord {
    let start = Instant::now();
    match evaluate_ell(ctx, cfg, ell) {
        Ok((record, _)) => {
            info!("p = {}, ell = {ell}: sigma1 = {:?}, mult = {:?}", cfg.p, record.sigma1_sp, record.mult_sigma1_sp);
            record
        }
        Err(e) => {
            warn!("p = {}, ell = {ell} failed: {e}", cfg.p);
            SweepRecord {
                ell,
                wall_seconds: start.elapsed().as_secs_f64(),
                status: format!("failed: {e}"),
                ..Default::default()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub p: u32,
    /// Smallest ℓ with `mult ≥ p − 1`.
    pub first_multiplicity_ell: Option<f64>,
    /// Smallest ℓ whose σ₁ cluster carries the degree `p − 1` irrep.
    pub first_big_rep_ell: Option<f64>,
    /// Smallest ℓ with `σ₁(S_p) < σ₁(S′_p)`.
    pub first_separation_ell: Option<f64>,
    /// Smallest ℓ where all three hold at once.
    pub witness_ell: Option<f64>,
    pub failed: usize,
    pub message: String,
}

pub fn summarize(p: u32, records: &[SweepRecord]) -> SweepSummary {
    let target = p as usize - 1;
    let smallest = |pred: &dyn Fn(&SweepRecord) -> bool| {
        records.iter().filter(|r| r.is_ok() && pred(r)).map(|r| r.ell).fold(None, |m: Option<f64>, l| {
            Some(m.map_or(l, |m| m.min(l)))
        })
    };
    let mult = |r: &SweepRecord| r.mult_sigma1_sp.is_some_and(|m| m >= target);
    let big = |r: &SweepRecord| r.big_rep_multiplicity.is_some_and(|m| m >= 1);
    let sep = |r: &SweepRecord| r.separated();
    let witness_ell = smallest(&|r| mult(r) && big(r) && sep(r));
    let message = match witness_ell {
        Some(l) => format!(
            "p = {p}: at ell = {l} sigma1(S_p) has multiplicity >= {target}, carries the degree-{target} irrep \
             and lies below sigma1(S'_p)"
        ),
        None => format!("p = {p}: not reached"),
    };
    SweepSummary {
        p,
        first_multiplicity_ell: smallest(&mult),
        first_big_rep_ell: smallest(&big),
        first_separation_ell: smallest(&sep),
        witness_ell,
        failed: records.iter().filter(|r| !r.is_ok()).count(),
        message,
    }
}

/// Worker count from the environment, falling back to rayon's default.
pub fn worker_count() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

/// Runs every ℓ of the sweep concurrently and returns records ordered as
/// `ell_values`.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let ctx = GroupContext::new(cfg.p as u64)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| cfg.ell_values.par_iter().map(|&ell| sweep_record(&ctx, cfg, ell)).collect()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub config: SweepConfig,
    pub crate_version: String,
    pub workers: usize,
    pub wall_seconds: BTreeMap<String, f64>,
    pub total_wall_seconds: f64,
    pub summary: SweepSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordsFile {
    pub summary: SweepSummary,
    pub records: Vec<SweepRecord>,
}

pub const CSV_HEADER: [&str; 9] =
    ["ell", "sigma1_Sp", "mult", "sigma1_Sp_prime", "sigma1N_A", "R_f1", "R_f2", "bound", "status"];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv(records: &[SweepRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.ell.to_string(),
            opt(r.sigma1_sp),
            opt(r.mult_sigma1_sp),
            opt(r.sigma1_sp_prime),
            opt(r.sigma1_neumann_a),
            opt(r.rayleigh_f1),
            opt(r.rayleigh_f2),
            opt(r.analytic_bound),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Log-log plot of σ₁(S_p), σ₁(S′_p), σ₁^N(A), max R(f_i) and the bound.
pub fn render_svg(records: &[SweepRecord]) -> String {
    let (width, height, margin) = (640.0, 420.0, 60.0);
    type Getter = fn(&SweepRecord) -> Option<f64>;
    let series: [(&str, &str, Getter); 5] = [
        ("sigma1(S_p)", "#1f77b4", |r| r.sigma1_sp),
        ("sigma1(S'_p)", "#ff7f0e", |r| r.sigma1_sp_prime),
        ("sigma1^N(A)", "#2ca02c", |r| r.sigma1_neumann_a),
        ("max R(f_i)", "#d62728", |r| Some(r.rayleigh_f1?.max(r.rayleigh_f2?))),
        ("bound", "#9467bd", |r| r.analytic_bound),
    ];
    let points: Vec<(f64, f64)> = records
        .iter()
        .flat_map(|r| series.iter().filter_map(move |(_, _, f)| f(r).map(|y| (r.ell, y))))
        .filter(|&(x, y)| x > 0.0 && y > 0.0)
        .collect();
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    if points.is_empty() {
        svg.push_str("<text x=\"20\" y=\"40\" font-family=\"sans-serif\">no data</text>\n</svg>\n");
        return svg;
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min).floor();
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil();
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, hi + 1.0)
        }
    };
    let (x0, x1) = range(&lx);
    let (y0, y1) = range(&ly);
    let sx = |x: f64| margin + (x.log10() - x0) / (x1 - x0) * (width - 2.0 * margin);
    let sy = |y: f64| height - margin - (y.log10() - y0) / (y1 - y0) * (height - 2.0 * margin);
    svg.push_str(&format!(
        "<g stroke=\"black\" fill=\"none\"><rect x=\"{margin}\" y=\"{margin}\" width=\"{}\" height=\"{}\"/></g>\n",
        width - 2.0 * margin,
        height - 2.0 * margin
    ));
    for d in x0 as i32..=x1 as i32 {
        let x = sx(10f64.powi(d));
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">1e{d}</text>\n",
            height - margin + 16.0
        ));
    }
    for d in y0 as i32..=y1 as i32 {
        let y = sy(10f64.powi(d));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{y:.1}\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">1e{d}</text>\n",
            margin - 6.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">ell</text>\n",
        width / 2.0,
        height - 15.0
    ));
    for (k, (name, colour, get)) in series.iter().enumerate() {
        let pts: Vec<String> = records
            .iter()
            .filter_map(|r| get(r).filter(|&y| y > 0.0).map(|y| format!("{:.2},{:.2}", sx(r.ell), sy(y))))
            .collect();
        if !pts.is_empty() {
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\" points=\"{}\"/>\n",
                pts.join(" ")
            ));
        }
        let ly = margin + 14.0 + 16.0 * k as f64;
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{ly:.1}\" font-size=\"11\" fill=\"{colour}\" font-family=\"sans-serif\">{name}</text>\n",
            width - margin - 90.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes `records.csv`, `records.json`, `sigma1.svg` and `manifest.json`.
pub fn emit_outputs(
    records: &[SweepRecord],
    cfg: &SweepConfig,
    workers: usize,
    total_wall_seconds: f64,
) -> Result<SweepSummary> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let summary = summarize(cfg.p, records);
    write_csv(records, fs::File::create(dir.join("records.csv"))?)?;
    let file = RecordsFile { summary: summary.clone(), records: records.to_vec() };
    fs::write(dir.join("records.json"), serde_json::to_string_pretty(&file)?)?;
    fs::write(dir.join("sigma1.svg"), render_svg(records))?;
    let manifest = Manifest {
        config_hash: cfg.hash(),
        config: cfg.clone(),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        workers,
        wall_seconds: records.iter().map(|r| (r.ell.to_string(), r.wall_seconds)).collect(),
        total_wall_seconds,
        summary: summary.clone(),
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(summary)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditReport {
    pub p: u32,
    pub order: usize,
    pub resolution: Resolution,
    pub boundary_count: usize,
    pub chi: i64,
    /// `χ` predicted from `p(p−1)` blocks of `χ = −1` and `p(p−1)` arc gluings.
    pub chi_from_blocks: i64,
    pub genus_chi: Option<i64>,
    pub genus_tube_graph: Option<i64>,
    pub genus_stated: Option<i64>,
    pub genus_oracles_agree: bool,
    pub components_after_cut: usize,
    pub delta2_cycles: Vec<Vec<usize>>,
    pub transition_profile: Vec<Vec<usize>>,
    /// Whether every `D1` edge joins cycles with indices differing by ±1.
    pub transitions_adjacent: bool,
    pub audit_ell: Option<f64>,
    pub m1_observed: Option<usize>,
    /// `4g + 3` with the χ-based genus.
    pub kkp_bound: Option<i64>,
    pub kkp_consistent: Option<bool>,
}

/// Combinatorial audit of `S_p`; with `ell` also the observed σ₁
/// multiplicity for the informational `m₁ ≤ 4g + 3` comparison.
pub fn audit_combinatorics(p: u32, resolution: &Resolution, ell: Option<f64>) -> Result<AuditReport> {
    let ctx = GroupContext::new(p as u64)?;
    let graph = CayleyGraph::build(&ctx);
    let cycles = delta2_cycles(&ctx, &graph);
    let profile = cycle_transition_profile(&graph, &cycles);
    let surface = assemble_surface(&ctx, ell.unwrap_or(1.0), resolution)?;
    let euler = euler_genus(&surface, Some(p))?;
    let blocks = ctx.order() as i64;
    let m1_observed = match ell {
        Some(_) => {
            let op = dtn_operator(&surface)?;
            Some(spectrum_with_cluster(&op, 16, Tolerances::default().gap_rel)?.1.len())
        }
        None => None,
    };
    let kkp_bound = euler.genus_chi.map(|g| 4 * g + 3);
    Ok(AuditReport {
        p,
        order: ctx.order(),
        resolution: *resolution,
        boundary_count: boundary_components(&surface)?.len(),
        chi: euler.chi,
        chi_from_blocks: -blocks - blocks,
        genus_chi: euler.genus_chi,
        genus_tube_graph: euler.tube_genus,
        genus_stated: euler.stated_genus,
        genus_oracles_agree: euler.agrees_with_tube_graph() == Some(true),
        components_after_cut: components_after_cut(&surface).len(),
        delta2_cycles: cycles.cycles.clone(),
        transition_profile: profile.clone(),
        transitions_adjacent: transitions_are_adjacent(&profile),
        audit_ell: ell,
        m1_observed,
        kkp_bound,
        kkp_consistent: match (m1_observed, kkp_bound) {
            (Some(m), Some(b)) => Some(m as i64 <= b),
            _ => None,
        },
    })
}
