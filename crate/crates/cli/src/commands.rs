//! Subcommand bodies. Each returns its document as a string so the binary
//! only has to decide where to write it.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;
use sos_core::numeric::{rel_err, C64};
use sos_core::partition::{z_bruteforce, z_determinant, DEFAULT_BRUTE_CAP};
use sos_core::verify::{run_suite, sample_params, SuiteConfig, SuiteName, SuiteReport};
use sos_core::{MForm, Model, ModelParams, PartitionResult};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum MethodChoice {
    #[default]
    Det,
    Brute,
    Both,
}

#[derive(Serialize)]
struct ResultJson {
    #[serde(rename = "Z")]
    z: [f64; 2],
    method: &'static str,
    elapsed_ms: f64,
    n: usize,
    ln_abs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cond_hint: Option<f64>,
}

fn result_json(r: &PartitionResult) -> ResultJson {
    ResultJson {
        z: [r.value.re, r.value.im],
        method: r.method.as_str(),
        elapsed_ms: r.elapsed.as_secs_f64() * 1e3,
        n: r.n,
        ln_abs: r.ln_abs,
        cond_hint: r.cond_hint,
    }
}

/// Random parameters for `--random N --seed S`, drawn exactly as the
/// verification suite would draw them.
pub fn random_params(n: usize, seed: u64, guard_tol: f64) -> CliResult<ModelParams> {
    if n == 0 {
        return Err(CliError::Usage("--random needs N >= 1".into()));
    }
    let cfg = SuiteConfig {
        seed,
        guard_tol,
        ..SuiteConfig::default()
    };
    Ok(sample_params(&cfg, n, 0)?)
}

pub fn cmd_compute(model: &Model, p: &ModelParams, method: MethodChoice, cap: usize) -> CliResult<serde_json::Value> {
    let doc = match method {
        MethodChoice::Det => serde_json::to_value(result_json(&z_determinant(model, p, MForm::ProductForm)?)),
        MethodChoice::Brute => serde_json::to_value(result_json(&z_bruteforce(model, p, cap)?)),
        MethodChoice::Both => {
            let brute = z_bruteforce(model, p, cap)?;
            let det = z_determinant(model, p, MForm::ProductForm)?;
            Ok(json!({
                "results": [result_json(&det), result_json(&brute)],
                "rel_diff": rel_err(det.value, brute.value),
            }))
        }
    };
    Ok(doc.expect("plain data serializes"))
}

pub struct VerifyOptions {
    pub suite: SuiteName,
    pub seed: u64,
    pub samples: usize,
    pub max_n: usize,
    pub tolerances: Vec<(String, f64)>,
    pub guard_tol: f64,
    pub cap: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        let cfg = SuiteConfig::default();
        VerifyOptions {
            suite: SuiteName::All,
            seed: cfg.seed,
            samples: cfg.samples_per_case,
            max_n: *cfg.n_values.iter().max().unwrap_or(&3),
            tolerances: Vec::new(),
            guard_tol: cfg.guard_tol,
            cap: DEFAULT_BRUTE_CAP,
        }
    }
}

pub fn cmd_verify(opts: &VerifyOptions) -> CliResult<SuiteReport> {
    if opts.max_n == 0 {
        return Err(CliError::Usage("--max-n must be >= 1".into()));
    }
    let mut cfg = SuiteConfig {
        seed: opts.seed,
        n_values: (1..=opts.max_n).collect(),
        samples_per_case: opts.samples,
        guard_tol: opts.guard_tol,
        brute_cap: opts.cap,
        ..SuiteConfig::default()
    };
    for (name, value) in &opts.tolerances {
        if !cfg.tolerances.contains_key(name) {
            return Err(CliError::Usage(format!("unknown check name {name:?}")));
        }
        cfg.tolerances.insert(name.clone(), *value);
    }
    cfg.validate()?;
    if opts.max_n > cfg.brute_cap.min(sos_core::chain::DENSE_SITE_LIMIT) {
        return Err(CliError::Usage(format!("--max-n {} exceeds the brute-force cap {}", opts.max_n, cfg.brute_cap)));
    }
    Ok(run_suite(opts.suite, &cfg)?)
}

/// CSV `n,t_det_ms,t_brute_ms,rel_diff`; brute columns are `-` above `cap`.
pub fn cmd_bench(model: &Model, max_n: usize, seed: u64, cap: usize) -> CliResult<String> {
    if max_n == 0 {
        return Err(CliError::Usage("--max-n must be >= 1".into()));
    }
    let cfg = SuiteConfig {
        seed,
        guard_tol: model.guard.tol(),
        ..SuiteConfig::default()
    };
    let mut out = String::from("n,t_det_ms,t_brute_ms,rel_diff\n");
    for n in 1..=max_n {
        let p = sample_params(&cfg, n, n as u64)?;
        let det = z_determinant(model, &p, MForm::ProductForm)?;
        let t_det = det.elapsed.as_secs_f64() * 1e3;
        if n <= cap {
            let brute = z_bruteforce(model, &p, cap)?;
            let t_brute = brute.elapsed.as_secs_f64() * 1e3;
            writeln!(out, "{n},{t_det:.4},{t_brute:.4},{:.3e}", rel_err(det.value, brute.value)).unwrap();
        } else {
            writeln!(out, "{n},{t_det:.4},-,-").unwrap();
        }
    }
    Ok(out)
}

pub struct SweepOutput {
    pub csv: String,
    pub rows: usize,
    pub skipped: usize,
}

/// Determinant `Z` along a straight segment in `λ_vary` (1-based).
/// Grid points failing the genericity guard are kept as marked rows.
pub fn cmd_sweep(model: &Model, p: &ModelParams, vary: usize, from: C64, to: C64, points: usize) -> CliResult<SweepOutput> {
    if vary == 0 || vary > p.n() {
        return Err(CliError::Usage(format!("--vary must be in 1..={}", p.n())));
    }
    if points == 0 {
        return Err(CliError::Usage("--points must be >= 1".into()));
    }
    let mut csv = String::from("lambda_re,lambda_im,re_z,im_z,status\n");
    let mut skipped = 0;
    for k in 0..points {
        let t = if points == 1 { 0.0 } else { k as f64 / (points - 1) as f64 };
        let l = from * (1.0 - t) + to * t;
        let q = p.with_lambda(vary - 1, l);
        let z = q.validate(model.guard).and_then(|_| z_determinant(model, &q, MForm::ProductForm));
        match z {
            Ok(r) => writeln!(csv, "{:e},{:e},{:e},{:e},ok", l.re, l.im, r.value.re, r.value.im).unwrap(),
            Err(e) => {
                skipped += 1;
                let reason = e.to_string().replace(',', ";");
                writeln!(csv, "{:e},{:e},-,-,skipped: {reason}", l.re, l.im).unwrap();
            }
        }
    }
    Ok(SweepOutput {
        csv,
        rows: points,
        skipped,
    })
}
