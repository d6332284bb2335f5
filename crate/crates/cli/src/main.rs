use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde_json::{json, Value};

use steklov_core::cayley::{cycle_transition_profile, delta2_cycles, transitions_are_adjacent};
use steklov_core::experiments::{audit_combinatorics, emit_outputs, run_sweep, worker_count, AuditReport, SweepConfig};
use steklov_core::group::is_prime;
use steklov_core::reptheory::{all_irreps, irreducibility_certificate};
use steklov_core::spectral::{dtn_operator, eigenspace_isotypic, steklov_spectrum};
use steklov_core::{CayleyGraph, CharacterTable, GroupContext, Resolution};

const MAX_DEFAULT_P: u32 = 13;

#[derive(Parser)]
#[command(name = "steklov-lab", version, about = "Steklov multiplicity lab for surfaces built on Z_p x| Z_p^*")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct PrimeArgs {
    /// Odd prime p.
    #[arg(long, value_parser = parse_prime)]
    p: u32,
    /// Permit p > 13.
    #[arg(long)]
    allow_large: bool,
}

#[derive(Args, Clone, Copy)]
struct Output {
    /// Emit one JSON document instead of tables.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Group order, generators and presentation checks.
    Group {
        #[command(flatten)]
        prime: PrimeArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Cayley graph, δ₂-cycles and cycle transitions.
    Cayley {
        #[command(flatten)]
        prime: PrimeArgs,
        /// Write the edge list (`src dst color` per line) to this file.
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Character table and irreducibility certificates.
    Reps {
        #[command(flatten)]
        prime: PrimeArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Build S_p(ℓ) and report its topology.
    Surface {
        #[command(flatten)]
        prime: PrimeArgs,
        #[arg(long, default_value_t = 0.5, value_parser = parse_ell)]
        ell: f64,
        /// Square grid segments per side.
        #[arg(long, default_value_t = 8)]
        resolution: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Lowest Steklov eigenvalues of S_p(ℓ).
    Spectrum {
        #[command(flatten)]
        prime: PrimeArgs,
        #[arg(long, default_value_t = 0.5, value_parser = parse_ell)]
        ell: f64,
        #[arg(long, default_value_t = 8)]
        resolution: usize,
        #[arg(long, default_value_t = 8)]
        count: usize,
        /// Decompose the σ₁ cluster into irreducible representations.
        #[arg(long)]
        decompose: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Run a collar-length sweep described by a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Combinatorial audit with the observed σ₁ multiplicity.
    Audit {
        #[command(flatten)]
        prime: PrimeArgs,
        #[arg(long, default_value_t = 0.125, value_parser = parse_ell)]
        ell: f64,
        #[arg(long, default_value_t = 8)]
        resolution: usize,
        #[command(flatten)]
        out: Output,
    },
}

fn parse_prime(s: &str) -> Result<u32, String> {
    let p: u32 = s.parse().map_err(|_| format!("'{s}' is not a positive integer"))?;
    if p < 3 || !is_prime(p as u64) {
        return Err(format!("{p} is not an odd prime"));
    }
    Ok(p)
}

fn parse_ell(s: &str) -> Result<f64, String> {
    let ell: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !(ell > 0.0) || !ell.is_finite() {
        return Err(format!("ell must be positive, got {ell}"));
    }
    Ok(ell)
}

fn check_size(prime: PrimeArgs) {
    if prime.p > MAX_DEFAULT_P && !prime.allow_large {
        Cli::command()
            .error(
                ErrorKind::ValueValidation,
                format!("p = {} exceeds {MAX_DEFAULT_P}; pass --allow-large to build it anyway", prime.p),
            )
            .exit();
    }
}

fn resolution(n: usize) -> Result<Resolution> {
    let r = Resolution::from_square_n(n);
    r.validate()?;
    Ok(r)
}

fn emit(out: Output, value: &Value, human: impl FnOnce() -> String) {
    if out.json {
        println!("{}", serde_json::to_string_pretty(value).expect("JSON value serializes"));
    } else {
        print!("{}", human());
    }
}

fn table(rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<width$}  {v}\n")).collect()
}

fn row(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn group(prime: PrimeArgs, out: Output) -> Result<()> {
    let ctx = GroupContext::new(prime.p as u64)?;
    let report = ctx.verify_presentation()?;
    let classes = ctx.conjugacy_classes();
    let value = json!({
        "p": ctx.p(),
        "order": ctx.order(),
        "primitive_root": ctx.k(),
        "delta1": [ctx.delta1().a(), ctx.delta1().b()],
        "delta2": [ctx.delta2().a(), ctx.delta2().b()],
        "presentation": {
            "delta1_order_p": report.delta1_order_p,
            "delta2_order_p_minus_1": report.delta2_order_p_minus_1,
            "conjugation": report.conjugation,
        },
        "conjugacy_classes": classes.len(),
    });
    emit(out, &value, || {
        table(&[
            row("p", ctx.p()),
            row("order", ctx.order()),
            row("primitive root k", ctx.k()),
            row("delta1", ctx.delta1()),
            row("delta2", ctx.delta2()),
            row("delta1^p = e", report.delta1_order_p),
            row("delta2^(p-1) = e", report.delta2_order_p_minus_1),
            row("delta2^-1 delta1 delta2 = delta1^k", report.conjugation),
            row("conjugacy classes", classes.len()),
        ])
    });
    Ok(())
}

fn cayley(prime: PrimeArgs, dot: Option<PathBuf>, out: Output) -> Result<()> {
    let ctx = GroupContext::new(prime.p as u64)?;
    let graph = CayleyGraph::build(&ctx);
    let cycles = delta2_cycles(&ctx, &graph);
    let profile = cycle_transition_profile(&graph, &cycles);
    let adjacent = transitions_are_adjacent(&profile);
    if let Some(path) = &dot {
        let file = std::fs::File::create(path)?;
        graph.write_edge_list(std::io::BufWriter::new(file))?;
    }
    let mut value = json!({
        "p": ctx.p(),
        "vertices": graph.vertex_count(),
        "edges": graph.edges().len(),
        "connected": graph.is_connected(),
        "delta2_cycles": cycles.cycles,
        "transition_profile": profile,
        "transitions_adjacent": adjacent,
    });
    if let Some(path) = &dot {
        value["edge_list_file"] = json!(path);
    }
    emit(out, &value, || {
        let mut s = table(&[
            row("p", ctx.p()),
            row("vertices", graph.vertex_count()),
            row("edges", graph.edges().len()),
            row("connected", graph.is_connected()),
            row("delta2 cycles", cycles.len()),
            row("transitions only between adjacent cycles", adjacent),
        ]);
        s.push_str("transition profile (row: from cycle, column: to cycle)\n");
        for r in &profile {
            s.push_str(&r.iter().map(|x| format!("{x:>3}")).collect::<String>());
            s.push('\n');
        }
        s
    });
    Ok(())
}

fn reps(prime: PrimeArgs, out: Output) -> Result<()> {
    let ctx = GroupContext::new(prime.p as u64)?;
    let tab = CharacterTable::build(&ctx);
    let certs: Vec<_> = all_irreps(&ctx)
        .iter()
        .map(|r| {
            let c = irreducibility_certificate(&ctx, r);
            let label = r.label.map(|l| l.to_string()).unwrap_or_default();
            (label, r.degree(), c)
        })
        .collect();
    let value = json!({
        "p": ctx.p(),
        "labels": tab.labels.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "degrees": tab.degrees,
        "class_sizes": tab.class_sizes,
        "characters": tab.values.iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "degree_square_sum": tab.degree_square_sum(),
        "orthonormality_defect": tab.orthonormality_defect(),
        "certificates": certs.iter().map(|(l, d, c)| json!({
            "label": l, "degree": d, "character_norm": c.character_norm,
            "commutant_dimension": c.commutant_dimension, "irreducible": c.is_irreducible(),
        })).collect::<Vec<_>>(),
    });
    emit(out, &value, || {
        let mut s = table(&[
            row("p", ctx.p()),
            row("sum of squared degrees", tab.degree_square_sum()),
            row("orthonormality defect", format!("{:.2e}", tab.orthonormality_defect())),
        ]);
        s.push_str(&format!("{:<10} {:>6} {:>14} {:>10} {:>12}\n", "irrep", "degree", "<chi,chi>", "commutant", "irreducible"));
        for (l, d, c) in &certs {
            s.push_str(&format!(
                "{l:<10} {d:>6} {:>14.10} {:>10} {:>12}\n",
                c.character_norm,
                c.commutant_dimension,
                c.is_irreducible()
            ));
        }
        s
    });
    Ok(())
}

fn audit_rows(a: &AuditReport) -> Vec<(String, String)> {
    let show = |v: Option<i64>| v.map_or("-".to_string(), |x| x.to_string());
    let mut rows = vec![
        row("p", a.p),
        row("blocks", a.order),
        row("boundary components", a.boundary_count),
        row("euler characteristic", a.chi),
        row("euler characteristic from blocks", a.chi_from_blocks),
        row("genus (euler)", show(a.genus_chi)),
        row("genus (tube graph)", show(a.genus_tube_graph)),
        row("genus 1 + p(p-1)", show(a.genus_stated)),
        row("genus oracles agree", a.genus_oracles_agree),
        row("components after cutting collars", a.components_after_cut),
        row("transitions only between adjacent cycles", a.transitions_adjacent),
    ];
    for (i, c) in a.delta2_cycles.iter().enumerate() {
        rows.push(row(&format!("region {i} blocks"), format!("{c:?}")));
    }
    if let Some(m) = a.m1_observed {
        rows.push(row(&format!("m1 at ell = {}", a.audit_ell.unwrap_or_default()), m));
        rows.push(row("4g + 3", show(a.kkp_bound)));
    }
    rows
}

fn surface(prime: PrimeArgs, ell: f64, n: usize, out: Output) -> Result<()> {
    let res = resolution(n)?;
    let mut report = audit_combinatorics(prime.p, &res, None)?;
    report.audit_ell = Some(ell);
    let ctx = GroupContext::new(prime.p as u64)?;
    let s = steklov_core::surface::assemble_surface(&ctx, ell, &res)?;
    let value = json!({
        "audit": report,
        "vertices": s.vertex_count,
        "edges": s.edges.len(),
        "faces": s.faces.len(),
        "boundary_vertices": s.boundary.len(),
        "collar_half_width": s.profile.half_width,
    });
    emit(out, &value, || {
        let mut rows = vec![
            row("ell", ell),
            row("collar half-width", format!("{:.8}", s.profile.half_width)),
            row("vertices", s.vertex_count),
            row("edges", s.edges.len()),
            row("faces", s.faces.len()),
            row("boundary vertices", s.boundary.len()),
        ];
        rows.extend(audit_rows(&report));
        table(&rows)
    });
    Ok(())
}

fn spectrum(prime: PrimeArgs, ell: f64, n: usize, count: usize, decompose: bool, out: Output) -> Result<()> {
    let res = resolution(n)?;
    let ctx = GroupContext::new(prime.p as u64)?;
    let s = steklov_core::surface::assemble_surface(&ctx, ell, &res)?;
    let op = dtn_operator(&s)?;
    let mut result = steklov_spectrum(&op, count)?;
    let mut iso = None;
    if decompose {
        let cluster = result.cluster_of(1, result.gap_rel_tol)?;
        let action = s.action.as_ref().ok_or(steklov_core::Error::MissingAction)?;
        let d = eigenspace_isotypic(&op, &result, &cluster, &ctx, action)?;
        result.isotypic = Some(steklov_core::reptheory::as_map(&d.entries));
        iso = Some(d);
    }
    let value = json!({
        "p": ctx.p(),
        "ell": ell,
        "resolution": res,
        "boundary_size": op.size(),
        "eigenvalues": result.eigenvalues,
        "clusters": result.clusters,
        "residuals": result.residuals,
        "isotypic": iso,
    });
    emit(out, &value, || {
        let mut s = format!("p = {}, ell = {ell}, boundary size {}\n", ctx.p(), op.size());
        s.push_str(&format!("{:>4} {:>22} {:>10} {:>8}\n", "k", "sigma_k", "residual", "cluster"));
        for (k, v) in result.eigenvalues.iter().enumerate() {
            let c = result.clusters.iter().position(|c| c.contains(&k)).unwrap_or(0);
            s.push_str(&format!("{k:>4} {v:>22.15} {:>10.1e} {c:>8}\n", result.residuals[k]));
        }
        if let Some(d) = &iso {
            s.push_str(&format!("sigma_1 cluster {:?}, delta1 acts trivially: {}\n", d.cluster, d.delta1_trivial));
            for e in &d.entries {
                s.push_str(&format!("  {:<10} multiplicity {}\n", e.label.to_string(), e.multiplicity));
            }
        }
        s
    });
    Ok(())
}

fn sweep(path: &std::path::Path, out: Output) -> Result<()> {
    let cfg = SweepConfig::from_json_file(path)?;
    let workers = worker_count();
    log::info!("sweep p = {} over {} collar lengths with {workers} workers", cfg.p, cfg.ell_values.len());
    let start = Instant::now();
    let records = run_sweep(&cfg, workers)?;
    let summary = emit_outputs(&records, &cfg, workers, start.elapsed().as_secs_f64())?;
    let value = json!({ "summary": summary, "output_dir": cfg.output_dir, "records": records.len() });
    emit(out, &value, || {
        let mut s = format!("{:>8} {:>14} {:>5} {:>14} {:>14} {:>12}  status\n", "ell", "sigma1(S_p)", "mult", "sigma1(S'_p)", "sigma1N(A)", "max R(f)");
        let f = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.8}"));
        for r in &records {
            let rf = r.rayleigh_f1.zip(r.rayleigh_f2).map(|(a, b)| a.max(b));
            s.push_str(&format!(
                "{:>8} {:>14} {:>5} {:>14} {:>14} {:>12}  {}\n",
                r.ell,
                f(r.sigma1_sp),
                r.mult_sigma1_sp.map_or("-".into(), |m| m.to_string()),
                f(r.sigma1_sp_prime),
                f(r.sigma1_neumann_a),
                f(rf),
                r.status
            ));
        }
        s.push_str(&summary.message);
        s.push('\n');
        s.push_str(&format!("outputs written to {}\n", cfg.output_dir.display()));
        s
    });
    Ok(())
}

fn audit(prime: PrimeArgs, ell: f64, n: usize, out: Output) -> Result<()> {
    let report = audit_combinatorics(prime.p, &resolution(n)?, Some(ell))?;
    emit(out, &serde_json::to_value(&report)?, || table(&audit_rows(&report)));
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Group { prime, out } => {
            check_size(prime);
            group(prime, out)
        }
        Command::Cayley { prime, dot, out } => {
            check_size(prime);
            cayley(prime, dot, out)
        }
        Command::Reps { prime, out } => {
            check_size(prime);
            reps(prime, out)
        }
        Command::Surface { prime, ell, resolution, out } => {
            check_size(prime);
            surface(prime, ell, resolution, out)
        }
        Command::Spectrum { prime, ell, resolution, count, decompose, out } => {
            check_size(prime);
            spectrum(prime, ell, resolution, count, decompose, out)
        }
        Command::Sweep { config, out } => sweep(&config, out),
        Command::Audit { prime, ell, resolution, out } => {
            check_size(prime);
            audit(prime, ell, resolution, out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
