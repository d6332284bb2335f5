use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steklov-lab")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn non_prime_is_a_usage_error() {
    assert_eq!(run(&["group", "--p", "4"]).status.code(), Some(2));
    assert_eq!(run(&["group", "--p", "2"]).status.code(), Some(2));
    assert_eq!(run(&["group", "--p", "x"]).status.code(), Some(2));
}

#[test]
fn unknown_flags_and_large_primes_are_rejected() {
    assert_eq!(run(&["group", "--p", "3", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let out = run(&["group", "--p", "17"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--allow-large"));
    let v = json_of(&run(&["group", "--p", "17", "--allow-large", "--json"]));
    assert_eq!(v["order"], 272);
}

#[test]
fn group_json() {
    let v = json_of(&run(&["group", "--p", "5", "--json"]));
    assert_eq!(v["order"], 20);
    assert_eq!(v["primitive_root"], 2);
    assert_eq!(v["presentation"]["conjugation"], true);
    assert_eq!(v["conjugacy_classes"], 5);
}

#[test]
fn cayley_json_and_dot() {
    let v = json_of(&run(&["cayley", "--p", "5", "--json"]));
    assert_eq!(v["vertices"], 20);
    assert_eq!(v["edges"], 40);
    assert_eq!(v["delta2_cycles"].as_array().unwrap().len(), 5);
    assert_eq!(v["transitions_adjacent"], false);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gamma3.txt");
    let v = json_of(&run(&["cayley", "--p", "3", "--dot", path.to_str().unwrap(), "--json"]));
    assert_eq!(v["edge_list_file"], path.to_str().unwrap());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    for line in lines {
        let fields: Vec<&str> = line.split(' ').collect();
        assert_eq!(fields.len(), 3);
        assert!(fields[0].parse::<usize>().unwrap() < 6 && fields[1].parse::<usize>().unwrap() < 6);
        assert!(["D1", "D2"].contains(&fields[2]), "{line}");
    }
}

#[test]
fn reps_json() {
    let v = json_of(&run(&["reps", "--p", "5", "--json"]));
    assert_eq!(v["degree_square_sum"], 20);
    let certs = v["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 5);
    assert!(certs.iter().all(|c| c["irreducible"] == true));
}

#[test]
fn surface_json() {
    let v = json_of(&run(&["surface", "--p", "3", "--ell", "0.5", "--resolution", "4", "--json"]));
    assert_eq!(v["audit"]["boundary_count"], 6);
    assert_eq!(v["audit"]["genus_oracles_agree"], true);
}

#[test]
fn spectrum_json() {
    let v = json_of(&run(&["spectrum", "--p", "3", "--ell", "0.5", "--resolution", "8", "--count", "6", "--json"]));
    let eig = v["eigenvalues"].as_array().unwrap();
    assert_eq!(eig.len(), 6);
    assert!(eig[0].as_f64().unwrap().abs() < 1e-10);
    let d = json_of(&run(&[
        "spectrum", "--p", "3", "--ell", "0.25", "--resolution", "4", "--count", "6", "--decompose", "--json",
    ]));
    let entries = d["isotypic"]["entries"].as_array().unwrap();
    assert!(entries.iter().any(|e| e["label"] == "Big" && e["multiplicity"].as_u64().unwrap() >= 1));
}

#[test]
fn spectrum_count_too_large_is_a_domain_error() {
    let out = run(&["spectrum", "--p", "3", "--ell", "0.5", "--resolution", "4", "--count", "100000", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}

#[test]
fn audit_json() {
    let v = json_of(&run(&["audit", "--p", "3", "--resolution", "4", "--json"]));
    assert_eq!(v["boundary_count"], 6);
    assert_eq!(v["m1_observed"], 2);
    assert_eq!(v["kkp_consistent"], true);
}

#[test]
fn sweep_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = serde_json::json!({
        "p": 3,
        "ell_values": [1.0, 0.25],
        "resolution": {"square_n": 4, "collar_n_rho": 16, "collar_n_t": 8, "pants_level": 2},
        "tolerances": {"gap_rel": 1e-6, "solver_tol": 1e-8},
        "eigen_count": 8,
        "output_dir": out_dir,
    });
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(&cfg_path, cfg.to_string()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_steklov-lab"))
        .args(["sweep", "--config", cfg_path.to_str().unwrap(), "--json"])
        .env("STEKLOV_LAB_WORKERS", "2")
        .output()
        .unwrap();
    let v = json_of(&out);
    assert_eq!(v["records"], 2);
    for f in ["records.csv", "records.json", "sigma1.svg", "manifest.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["workers"], 2);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"p\": 3}").unwrap();
    assert_eq!(run(&["sweep", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn human_output_is_a_table() {
    let out = run(&["group", "--p", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("order") && l.trim_end().ends_with('6')));
}
