use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use proptest::prelude::*;
use sos_cli::config::parse_params_str;
use sos_core::interp::degree_prediction_error;
use sos_core::numeric::{c, Guard, C64};
use sos_core::partition::{normalized_z, ClearingFactor};
use sos_core::verify::{sample_params, SuiteConfig};
use sos_core::ModelParams;
use tempfile::TempDir;

const N1: &str = r#"{"eta":[0.7,0],"zeta":[1.1,0],"theta":[0.9,0],"lambdas":[[0.3,0]],"xis":[[0.2,0]]}"#;

fn sos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sos"))
        .args(args)
        .env_remove("SOS_GUARD_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn random_file(dir: &TempDir, n: usize, seed: u64) -> (String, ModelParams) {
    let cfg = SuiteConfig {
        seed,
        ..SuiteConfig::default()
    };
    let p = sample_params(&cfg, n, 0).unwrap();
    let path = write(dir, &format!("random{n}.json"), &serde_json::to_string_pretty(&p).unwrap());
    (path, p)
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn compute_one_site_both_methods() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "n1.json", N1);
    let o = sos(&["compute", "--config", &cfg, "--method", "both"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = json(&o);
    assert!(doc["rel_diff"].as_f64().unwrap() < 1e-12);
    for r in doc["results"].as_array().unwrap() {
        assert_eq!(r["Z"].as_array().unwrap().len(), 2);
        assert!(r["elapsed_ms"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn compute_random_three_sites_from_file() {
    let dir = TempDir::new().unwrap();
    let (cfg, _) = random_file(&dir, 3, 11);
    let o = sos(&["compute", "--config", &cfg, "--method", "both"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(json(&o)["rel_diff"].as_f64().unwrap() < 1e-9);
}

#[test]
fn compute_fifty_sites() {
    let dir = TempDir::new().unwrap();
    let (cfg, _) = random_file(&dir, 50, 3);
    let o = sos(&["compute", "--config", &cfg, "--method", "det"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = json(&o);
    assert_eq!(doc["method"], "det");
    assert!(doc["elapsed_ms"].as_f64().unwrap() < 100.0);
    assert!(doc["ln_abs"].as_f64().unwrap().is_finite());

    let o = sos(&["compute", "--config", &cfg, "--method", "brute"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("N <= 8"), "{}", stderr(&o));
}

#[test]
fn compute_writes_output_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("z.json");
    let o = sos(&["compute", "--random", "2", "--seed", "5", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["n"], 2);
}

#[test]
fn compute_needs_a_parameter_source() {
    let o = sos(&["compute"]);
    assert!(!o.status.success());
    let o = sos(&["compute", "--random", "2", "--config", "x.json"]);
    assert!(!o.status.success());
}

#[test]
fn bad_configs_are_reported() {
    let dir = TempDir::new().unwrap();
    let shape = write(
        &dir,
        "shape.json",
        r#"{"eta":[0.7,0],"zeta":[1.1,0],"theta":[0.9,0],"lambdas":[[0.3,0],[0.5,0]],"xis":[[0.2,0]]}"#,
    );
    let o = sos(&["compute", "--config", &shape]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("invariant"), "{}", stderr(&o));

    let guard = write(
        &dir,
        "guard.json",
        r#"{"eta":[0.7,0],"zeta":[1.1,0],"theta":[0.9,0],"lambdas":[[-1.1,0]],"xis":[[0.2,0]]}"#,
    );
    let o = sos(&["compute", "--config", &guard]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("sinh(zeta+lambda_1)"), "{}", stderr(&o));

    let syntax = write(&dir, "syntax.json", "{\n  \"eta\": [0.7, 0],\n  \"zeta\": [1.1,\n}");
    let o = sos(&["compute", "--config", &syntax]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("syntax.json:4:"), "{}", stderr(&o));
}

#[test]
fn guard_tolerance_comes_from_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "n1.json", N1);
    let strict = Command::new(env!("CARGO_BIN_EXE_sos"))
        .args(["compute", "--config", &cfg])
        .env("SOS_GUARD_TOL", "0.2")
        .output()
        .unwrap();
    assert!(!strict.status.success());
    assert!(stderr(&strict).contains("2.0e-1"), "{}", stderr(&strict));
    assert!(sos(&["compute", "--config", &cfg]).status.success());
}

#[test]
fn verify_reports_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let o = sos(&[
        "verify", "--suite", "partition", "--seed", "3", "--samples", "2", "--max-n", "2", "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains(" s"));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["suite"], "partition");
    assert_eq!(doc["seed"], 3);
    assert_eq!(doc["summary"]["failed"], 0);
    assert!(doc.get("elapsed").is_none());

    let o = sos(&["verify", "--suite", "partition", "--samples", "2", "--max-n", "2", "--tol", "theorem=1e-300"]);
    assert_eq!(o.status.code(), Some(1));
    let doc = json(&o);
    assert!(doc["summary"]["failed"].as_u64().unwrap() > 0);

    let o = sos(&["verify", "--suite", "nonsense"]);
    assert!(!o.status.success());
    let o = sos(&["verify", "--max-n", "9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_table() {
    let o = sos(&["bench", "--max-n", "6", "--seed", "42"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,t_det_ms,t_brute_ms,rel_diff"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0], (k + 1).to_string());
        let rel: f64 = row[3].parse().unwrap();
        assert!(rel < 1e-9, "n={} rel_diff={rel}", k + 1);
    }

    let o = sos(&["bench", "--max-n", "3", "--cap", "1"]);
    let text = stdout(&o);
    assert!(text.lines().nth(2).unwrap().ends_with(",-,-"));
    assert!(!sos(&["bench", "--max-n", "0"]).status.success());
}

fn sweep_rows(text: &str) -> Vec<(C64, Option<C64>, String)> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda_re,lambda_im,re_z,im_z,status"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.splitn(5, ',').collect();
            let lam = c(f[0].parse().unwrap(), f[1].parse().unwrap());
            let z = (f[2] != "-").then(|| c(f[2].parse().unwrap(), f[3].parse().unwrap()));
            (lam, z, f[4].to_string())
        })
        .collect()
}

fn sweep(cfg: &str, vary: &str, from: &str, to: &str, points: &str) -> Output {
    sos(&["sweep", "--config", cfg, "--vary", vary, "--from", from, "--to", to, "--points", points])
}

#[test]
fn sweep_grid_shape_and_skips() {
    let dir = TempDir::new().unwrap();
    let (cfg, p) = random_file(&dir, 2, 4);
    let o = sweep(&cfg, "2", "-0.4,0.1", "0.6,-0.3", "10");
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = sweep_rows(&stdout(&o));
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.1.is_some() && r.2 == "ok"));
    assert_eq!(rows[0].0, c(-0.4, 0.1));
    assert_eq!(rows[9].0, c(0.6, -0.3));

    let zeta = format!("{},{}", p.zeta.re, p.zeta.im);
    let o = sweep(&cfg, "1", &zeta, "0.3,0.2", "4");
    assert!(o.status.success());
    let rows = sweep_rows(&stdout(&o));
    assert_eq!(rows.len(), 4);
    assert!(rows[0].1.is_none());
    assert!(rows[0].2.starts_with("skipped"), "{}", rows[0].2);
    assert!(rows[0].2.contains("sinh(zeta-lambda_1)"), "{}", rows[0].2);
    assert!(stderr(&o).contains("1 of 4"));

    assert!(!sweep(&cfg, "3", "0,0", "1,0", "4").status.success());
}

#[test]
fn sweep_values_pass_the_degree_test() {
    let dir = TempDir::new().unwrap();
    let (cfg, p) = random_file(&dir, 2, 9);
    let n = p.n();
    let o = sweep(&cfg, "1", "-0.6,-0.9", "0.7,1.1", &(2 * n + 4).to_string());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = sweep_rows(&stdout(&o));
    let mut nodes = Vec::new();
    let (mut zeta_vals, mut theta_vals) = (Vec::new(), Vec::new());
    for (lam, z, _) in rows {
        let z = z.expect("generic grid");
        let q = p.with_lambda(0, lam);
        nodes.push((lam * 2.0).exp());
        zeta_vals.push(normalized_z(&q, 0, z, ClearingFactor::ZetaShift));
        theta_vals.push(normalized_z(&q, 0, z, ClearingFactor::ThetaShift));
    }
    assert!(degree_prediction_error(&nodes, &zeta_vals, 2 * n + 2) < 1e-8);
    assert!(degree_prediction_error(&nodes, &theta_vals, 2 * n + 2) > 1e-6);
}

#[test]
fn help_mentions_every_subcommand() {
    let o = sos(&["--help"]);
    let text = stdout(&o);
    for cmd in ["compute", "verify", "bench", "sweep"] {
        assert!(text.contains(cmd));
    }
    let o = sos(&["sweep", "--help"]);
    assert!(stdout(&o).contains("RE,IM"));
}

fn complex() -> impl Strategy<Value = C64> {
    (-1.5f64..1.5, -1.2f64..1.2).prop_map(|(re, im)| c(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trip(
        eta in complex(), zeta in complex(), theta in complex(),
        pairs in proptest::collection::vec((complex(), complex()), 1..5),
    ) {
        let (l, x): (Vec<C64>, Vec<C64>) = pairs.into_iter().unzip();
        let p = ModelParams::new(eta, zeta, theta, l, x).unwrap();
        prop_assume!(p.validate(Guard::default()).is_ok());
        let text = serde_json::to_string_pretty(&p).unwrap();
        let q = parse_params_str(&text, "inline", Guard::default()).unwrap();
        prop_assert_eq!(p, q);
    }
}

#[test]
fn output_to_unwritable_path_fails() {
    let o = sos(&["bench", "--max-n", "1", "--output", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(Path::new("/nonexistent/dir/out.csv").metadata().is_err());
}
