//! The `lmg-rat` binary end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str], config: &str) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_lmg-rat"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .env("RUST_LOG", "info")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Numbers printed after `key = ` on the output line.
fn printed(text: &str, key: &str) -> f64 {
    let start = text.find(key).unwrap() + key.len();
    let rest = &text[start..];
    let end = rest.find([',', '\n']).unwrap_or(rest.len());
    rest[..end].trim().parse().unwrap()
}

#[test]
fn spectrum_prints_periods_and_uses_cache() {
    let dir = TempDir::new().unwrap();
    let cfg = "[model]\nJ = 30\n";
    let first = run(dir.path(), &["spectrum"], cfg);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let text = stdout(&first);
    assert!((printed(&text, "T(r=1) = ") - 7.90344990884333).abs() < 1e-12, "{text}");
    assert!((printed(&text, "T(r=2) = ") - 4.003373105555204).abs() < 1e-12, "{text}");
    assert!(!stderr(&first).contains("cache hit"));

    let second = run(dir.path(), &["spectrum"], cfg);
    assert_eq!(second.status.code(), Some(0));
    assert!(stderr(&second).contains("spectrum cache hit"), "{}", stderr(&second));
    assert_eq!(stdout(&second), text);

    let cache_dir = dir.path().join("out/cache");
    for entry in fs::read_dir(&cache_dir).unwrap() {
        fs::write(entry.unwrap().path(), b"not a spectrum").unwrap();
    }
    let third = run(dir.path(), &["spectrum"], cfg);
    assert_eq!(third.status.code(), Some(0));
    assert!(stderr(&third).contains("recomputing"), "{}", stderr(&third));
    assert_eq!(stdout(&third), text);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    for cfg in ["[model]\nspin = 3\n", "[drive]\neps_grid = [0.2, 0.1]\n", "not toml at all ["] {
        let o = run(dir.path(), &["spectrum"], cfg);
        assert_eq!(o.status.code(), Some(2), "{cfg}: {}", stderr(&o));
    }
}

#[test]
fn energy_outside_orbit_family_is_a_numerical_error() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["poincare"], "[resonance]\nE_R = 5.0\n");
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn poincare_files_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = "[drive]\neps_grid = [0.005, 0.01]\n[poincare]\nseeds = [[3.14159, -0.3], [0.0, 0.5]]\nn_iter = 25\n";
    let o = run(dir.path(), &["poincare"], cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let path = dir.path().join("out/poincare_tau8_eps0.005.csv");
    let first = fs::read_to_string(&path).unwrap();
    let mut lines = first.lines();
    assert_eq!(lines.next(), Some("seed_id,iter,phi,z"));
    assert_eq!(lines.count(), 2 * 26);
    assert!(dir.path().join("out/poincare_tau8_eps0.01.csv").exists());
    run(dir.path(), &["poincare"], cfg);
    assert_eq!(fs::read_to_string(&path).unwrap(), first);

    let resolved = fs::read_to_string(dir.path().join("out/config.resolved.toml")).unwrap();
    for key in ["J_list", "T_target", "drift_tol", "tracking_mode", "overlap_floor"] {
        assert!(resolved.contains(key), "{key} missing from echo:\n{resolved}");
    }
}

#[test]
fn empty_seed_list_gives_header_only() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["poincare"], "[drive]\nepsilon = 0.01\n[poincare]\nseeds = []\n");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("out/poincare_tau8_eps0.01.csv")).unwrap();
    assert_eq!(text, "seed_id,iter,phi,z\n");
}

/// A stored classical table with `K = 0.0655 eps` and constant mass.
fn seed_classical_table(out: &Path, eps: &[f64]) {
    fs::create_dir_all(out).unwrap();
    let mut text = String::from("r,s,tau,epsilon,S_plus,S_minus,trM,detM,I_rs,m_rs,K_rs,status\n");
    for e in eps {
        let area = 7.1 * e.sqrt();
        text.push_str(&format!("1,1,8,{e},{},{},1.9,1,0.47,1.52,{},ok\n", 3.0 + area / 2.0, 3.0 - area / 2.0, 0.0655 * e));
    }
    fs::write(out.join("classical_r1_s1.csv"), text).unwrap();
}

#[test]
fn fit_reports_invalid_fit_for_single_point() {
    let dir = TempDir::new().unwrap();
    seed_classical_table(&dir.path().join("out"), &[0.01]);
    let o = run(dir.path(), &["fit"], "[drive]\neps_grid = [0.01]\n");
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/fits_r1_s1.json")).unwrap()).unwrap();
    for entry in json.as_array().unwrap() {
        assert!(entry["slope"].is_null());
        assert!(entry["error"].as_str().unwrap().contains("invalid fit"), "{entry}");
    }
}

#[test]
fn fit_recovers_stored_slopes() {
    let dir = TempDir::new().unwrap();
    let eps = [1e-4, 3e-4, 1e-3, 3e-3];
    seed_classical_table(&dir.path().join("out"), &eps);
    let o = run(dir.path(), &["fit"], "[drive]\neps_grid = [1e-4, 3e-4, 1e-3, 3e-3]\n");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/fits_r1_s1.json")).unwrap()).unwrap();
    let slope = |q: &str| {
        json.as_array().unwrap().iter().find(|e| e["quantity"] == q).unwrap()["slope"].as_f64().unwrap()
    };
    assert!((slope("K_vs_epsilon") - 1.0).abs() < 1e-12);
    assert!((slope("area_vs_epsilon") - 0.5).abs() < 1e-12);
    assert!((slope("epsilon_max_vs_J") + 2.0).abs() < 1e-12);
    let entry = &json[0];
    for key in ["resonance", "slope", "intercept", "residual_rms", "n_points", "J_list"] {
        assert!(!entry[key].is_null(), "{key}");
    }
}

#[test]
fn sweep_resume_reproduces_the_table() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let eps = [0.0, 1e-4, 3e-4, 1e-3, 3e-3];
    seed_classical_table(&out, &eps[1..]);
    let cfg = "[model]\nJ_list = [20, 30]\n[drive]\neps_grid = [0.0, 1e-4, 3e-4, 1e-3, 3e-3]\n";
    // the stored table lacks eps = 0, which fails extraction and is recorded as a gap
    let full = run(dir.path(), &["sweep", "--resume"], cfg);
    assert_eq!(full.status.code(), Some(4), "{}", stderr(&full));
    let table = out.join("sweep_r1_s1.csv");
    let complete = fs::read_to_string(&table).unwrap();
    let lines: Vec<&str> = complete.lines().collect();
    assert_eq!(lines[0], "J,r,s,tau,epsilon,delta_quantum,delta_rat,delta_harm,K_rs,m_rs,overlap,status");
    assert_eq!(lines.len(), 1 + 2 * eps.len());
    assert!(lines[1].starts_with("20,1,1,") && lines[1].ends_with(",ok"));

    // interrupted after the first spin size and one row of the second
    let partial: Vec<&str> = lines[..2 + eps.len()].to_vec();
    fs::write(&table, partial.join("\n") + "\n").unwrap();
    let resumed = run(dir.path(), &["sweep", "--resume"], cfg);
    assert_eq!(resumed.status.code(), Some(4));
    assert!(stderr(&resumed).contains("already present"));
    assert_eq!(fs::read_to_string(&table).unwrap(), complete);

    let json = fs::read_to_string(out.join("curves_r1_s1.json")).unwrap();
    assert!(json.contains("epsilon_max_estimate"));
}
