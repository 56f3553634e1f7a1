use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ics_transfer::contraction::ContractionConstants;
use serde_json::Value;
use tempfile::TempDir;

fn ics(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ics")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

#[test]
fn constants_bundle_matches_the_library() {
    let dir = TempDir::new().unwrap();
    let o = ics(&["constants", "--theta", "0.5", "--diam", "1", "--lip", "1"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&dir.path().join("constants.csv"));
    assert_eq!(header, "theta,diam,lip_a,m,n,t,c,lambda");
    assert_eq!(rows.len(), 1);
    let lib = ContractionConstants::new(0.5, 1.0, 1.0).unwrap();
    let json = read_json(&dir.path().join("constants.json"));
    assert_eq!(json["experiment"], "constants");
    assert_eq!(json["holds"], true);
    let got: ContractionConstants = serde_json::from_value(json["constants"].clone()).unwrap();
    assert_eq!(got, lib);
    assert_eq!(rows[0][4], lib.n.to_string());
    assert_eq!(rows[0][5], lib.t.to_string());
}

#[test]
fn invalid_theta_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = ics(&["constants", "--theta", "1.5", "--diam", "1", "--lip", "1"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("theta"));
    assert!(!dir.path().join("constants.csv").exists());
}

#[test]
fn constant_potential_contracts_at_one_half() {
    let dir = TempDir::new().unwrap();
    let o = ics(&["contract", "--system", "doubling", "--potential", "const", "--n", "20"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&dir.path().join("contract.csv"));
    assert_eq!(header, "n,w1,bound,merge_slack");
    assert_eq!(rows.len(), 21);
    let json = read_json(&dir.path().join("contract.json"));
    let rate = json["lambda_emp"].as_f64().unwrap();
    assert!((rate - 0.5).abs() < 1e-6, "{rate}");
    assert_eq!(json["constants"]["c"], 1.0);
}

#[test]
fn understated_lipschitz_constant_violates_the_bound() {
    let dir = TempDir::new().unwrap();
    let args = ["contract", "--potential", "sine", "--amplitude", "0.3", "--lip", "0", "--n", "6"];
    let o = ics(&args, dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("n=1"));
    assert_eq!(read_json(&dir.path().join("contract.json"))["holds"], false);
    let honest = ics(&["contract", "--potential", "sine", "--amplitude", "0.3", "--n", "6"], dir.path());
    assert_eq!(code(&honest), 0);
}

#[test]
fn output_is_deterministic_for_a_seed() {
    let (a, b, c) = (TempDir::new().unwrap(), TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["ot-selftest", "--seed", "7", "--pairs", "8"];
    for d in [&a, &b] {
        assert_eq!(code(&ics(&args, d.path())), 0);
    }
    assert_eq!(code(&ics(&["ot-selftest", "--seed", "8", "--pairs", "8"], c.path())), 0);
    let read = |d: &TempDir, f: &str| fs::read(d.path().join(f)).unwrap();
    assert_eq!(read(&a, "ot-selftest.csv"), read(&b, "ot-selftest.csv"));
    assert_eq!(read(&a, "ot-selftest.json"), read(&b, "ot-selftest.json"));
    assert_ne!(read(&a, "ot-selftest.csv"), read(&c, "ot-selftest.csv"));
    let (header, rows) = csv_rows(&a.path().join("ot-selftest.csv"));
    assert_eq!(header, "case,atoms_mu,atoms_nu,flow,closed,abs_diff,duality_gap");
    assert_eq!(rows.len(), 8);
}

#[test]
fn seeded_contraction_pairs_are_reproducible() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let args = ["contract", "--potential", "cosine", "--amplitude", "0.1", "--n", "8", "--seed", "3"];
    assert_eq!(code(&ics(&args, a.path())), 0);
    assert_eq!(code(&ics(&args, b.path())), 0);
    assert_eq!(fs::read(a.path().join("contract.csv")).unwrap(), fs::read(b.path().join("contract.csv")).unwrap());
}

#[test]
fn config_file_drives_a_run_and_flags_override_it() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("gibbs.json");
    fs::write(
        &cfg,
        r#"{
            "experiment": "gibbs",
            "system": {"kind": "circle_map", "degree": 3, "perturbation": {"kind": "sine", "eps": 0.05}},
            "potential": {"kind": "cosine", "base": -1.0986122886681098, "amplitude": 0.2},
            "tol": 1e-3,
            "x0": {"real": 0.25}
        }"#,
    )
    .unwrap();
    let o = ics(&["run", "--config", cfg.to_str().unwrap(), "--tol", "1e-4"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let json = read_json(&dir.path().join("gibbs.json"));
    assert_eq!(json["config"]["tol"], 1e-4);
    assert!(json["residual"].as_f64().unwrap() < 1e-4);
    let (header, rows) = csv_rows(&dir.path().join("gibbs.csv"));
    assert_eq!(header, "atom,point,weight");
    let mass: f64 = rows.iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
    assert!((mass - 1.0).abs() < 1e-12);
}

#[test]
fn malformed_configs_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        r#"{"experiment": "gibbs", "tolerance": 1e-3}"#,
        r#"{"experiment": "gibbs", "system": {"kind": "tent", "slope": 0.5}}"#,
        r#"{"experiment": "contract", "x": {"real": 1.5}}"#,
        r#"{"experiment": "stability-map", "system": {"kind": "tent", "slope": 3.0}}"#,
        r#"{"experiment": "stability-potential", "perturbations": []}"#,
        r#"not json"#,
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("bad{i}.json"));
        fs::write(&cfg, text).unwrap();
        let o = ics(&["run", "--config", cfg.to_str().unwrap()], dir.path());
        assert_eq!(code(&o), 2, "case {i}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let cfg = dir.path().join("bad0.json");
    let o = ics(&["contract", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn support_overflow_is_a_resource_error() {
    let dir = TempDir::new().unwrap();
    let o = ics(&["contract", "--n", "30", "--merge-eps", "0", "--x", "0.1", "--y", "0.3"], dir.path());
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds the cap"));
}

#[test]
fn stability_experiments_report_nonnegative_slack() {
    let dir = TempDir::new().unwrap();
    let o = ics(&["stability-potential", "--perturbations", "0.01,0.05"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&dir.path().join("stability-potential.csv"));
    assert_eq!(header, "system,perturbation,check,lhs,rhs,slack");
    assert_eq!(rows.iter().map(|r| r[2].as_str()).collect::<Vec<_>>(), ["gibbs", "entropy", "gibbs", "entropy"]);

    let o = ics(&["stability-map", "--perturbations", "0.01,0.02", "--perturbation-kind", "shift"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = csv_rows(&dir.path().join("stability-map.csv"));
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert!(r[5].parse::<f64>().unwrap() >= 0.0, "{r:?}");
    }
    let json = read_json(&dir.path().join("stability-map.json"));
    assert_eq!(json["holds"], true);
}

#[test]
fn spectral_gap_stays_under_its_bound() {
    let dir = TempDir::new().unwrap();
    let o =
        ics(&["spectral-gap", "--potential", "sine", "--amplitude", "0.1", "--n", "6", "--grid", "256"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&dir.path().join("spectral-gap.csv"));
    assert_eq!(header, "n,sup,lip,norm,bound");
    assert_eq!(rows.len(), 7);
    let json = read_json(&dir.path().join("spectral-gap.json"));
    assert!(json["eigen"]["rho"].as_f64().unwrap() > 1.0);
}
