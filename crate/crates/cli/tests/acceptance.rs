//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Tolerances are written out here rather than taken from
//! the library defaults.

use std::process::{Command, ExitCode};
use std::time::Instant;

use sos_cli::commands::cmd_bench;
use sos_core::partition::{z_bruteforce, z_determinant, DEFAULT_BRUTE_CAP};
use sos_core::verify::{run_suite, sample_params, SuiteConfig, SuiteName, SuiteReport};
use sos_core::{MForm, Model, SosError};

struct Tally {
    failed: Vec<usize>,
}

impl Tally {
    fn record(&mut self, id: usize, title: &str, pass: bool, detail: String) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} [{id:>2}] {title}: {detail}");
        if !pass {
            self.failed.push(id);
        }
    }
}

/// Count, worst residual and pass flag for `name` over the given chain sizes.
fn family(report: &SuiteReport, name: &str, ns: &[usize], tol: f64) -> (usize, f64, bool) {
    let cases: Vec<_> = report.named(name).filter(|c| ns.contains(&c.n)).collect();
    let worst = cases.iter().map(|c| c.residual).fold(0.0, f64::max);
    let ok = !cases.is_empty() && cases.iter().all(|c| c.residual < tol);
    (cases.len(), worst, ok)
}

fn describe(name: &str, f: (usize, f64, bool), tol: f64) -> String {
    format!("{name} {} cases max {:.2e} < {tol:.0e}", f.0, f.1)
}

fn config(n_values: Vec<usize>, samples: usize, pinned: &[(&str, f64)]) -> SuiteConfig {
    let mut cfg = SuiteConfig {
        n_values,
        samples_per_case: samples,
        ..SuiteConfig::default()
    };
    for (name, tol) in pinned {
        cfg.tolerances.insert(name.to_string(), *tol);
    }
    cfg
}

fn info_observations(report: &SuiteReport, name: &str) {
    let mut ns: Vec<usize> = report.observations.iter().filter(|c| c.name == name).map(|c| c.n).collect();
    ns.dedup();
    for n in ns {
        let r: Vec<f64> = report
            .observations
            .iter()
            .filter(|c| c.name == name && c.n == n)
            .map(|c| c.residual)
            .collect();
        let min = r.iter().copied().fold(f64::INFINITY, f64::min);
        let max = r.iter().copied().fold(0.0, f64::max);
        println!("INFO      {name} N={n}: residual range {min:.2e} .. {max:.2e} over {} sets", r.len());
    }
}

fn weights(t: &mut Tally) {
    let pinned = [("dybe", 1e-10), ("unitarity", 1e-12), ("reflection_equation", 1e-11)];
    let cfg = config(vec![1], 100, &pinned);
    let start = Instant::now();
    let report = run_suite(SuiteName::Weights, &cfg).expect("weights suite runs");
    let secs = start.elapsed().as_secs_f64();

    let dybe = family(&report, "dybe", &[0], 1e-10);
    t.record(
        1,
        "dynamical Yang-Baxter equation",
        dybe.2 && dybe.0 >= 100 && secs < 5.0,
        format!("{}, {secs:.2} s < 5 s", describe("dybe", dybe, 1e-10)),
    );

    let uni = family(&report, "unitarity", &[0], 1e-12);
    let refl = family(&report, "reflection_equation", &[0], 1e-11);
    t.record(
        2,
        "unitarity and reflection equation",
        uni.2 && refl.2 && uni.0 >= 100 && refl.0 >= 100,
        format!("{}; {}", describe("unitarity", uni, 1e-12), describe("reflection", refl, 1e-11)),
    );
}

fn algebra(t: &mut Tally) {
    let pinned = [
        ("yang_baxter_algebra", 1e-9),
        ("dynamical_reflection", 1e-9),
        ("b_commutation", 1e-9),
        ("b_crossing", 1e-9),
        ("t_hat_inverse", 1e-10),
    ];
    let cfg = config(vec![1, 2, 3, 4], 25, &pinned);
    let report = run_suite(SuiteName::Algebra, &cfg).expect("algebra suite runs");
    let small = [1, 2, 3];

    let yba = family(&report, "yang_baxter_algebra", &small, 1e-9);
    let dre = family(&report, "dynamical_reflection", &small, 1e-9);
    t.record(
        3,
        "Yang-Baxter algebra and dynamical reflection, N=1..3",
        yba.2 && dre.2 && yba.0 >= 75 && dre.0 >= 75,
        format!("{}; {}", describe("algebra", yba, 1e-9), describe("reflection", dre, 1e-9)),
    );

    let comm = family(&report, "b_commutation", &small, 1e-9);
    let cross = family(&report, "b_crossing", &small, 1e-9);
    t.record(
        4,
        "B commutation and B crossing, N=1..3",
        comm.2 && cross.2 && comm.0 >= 75 && cross.0 >= 75,
        format!("{}; {}", describe("commutation", comm, 1e-9), describe("crossing", cross, 1e-9)),
    );

    let hat = family(&report, "t_hat_inverse", &[1, 2, 3, 4], 1e-10);
    t.record(
        5,
        "hat monodromy inverts T(-lambda), N=1..4",
        hat.2 && hat.0 >= 100,
        describe("t_hat_inverse", hat, 1e-10),
    );
    info_observations(&report, "b_crossing_with_gamma");
}

fn partition(t: &mut Tally) {
    let pinned = [
        ("theorem", 1e-9),
        ("m_forms", 1e-11),
        ("closed_form_n1", 1e-12),
        ("lambda_symmetry", 1e-10),
        ("xi_symmetry", 1e-10),
        ("crossing_bruteforce", 1e-9),
        ("crossing_determinant", 1e-9),
        ("crossing_involution", 1e-9),
        ("recursion_lower", 1e-9),
        ("recursion_upper", 1e-9),
        ("degree_bound", 1e-8),
    ];
    let cfg = config(vec![1, 2, 3, 4], 50, &pinned);
    let start = Instant::now();
    let report = run_suite(SuiteName::Partition, &cfg).expect("partition suite runs");
    let secs = start.elapsed().as_secs_f64();
    let all = [1, 2, 3, 4];

    let theorem = family(&report, "theorem", &all, 1e-9);
    let per_n_ok = all.iter().all(|&n| report.named("theorem").filter(|c| c.n == n).count() >= 50);
    t.record(
        6,
        "determinant formula equals brute force, N=1..4",
        theorem.2 && per_n_ok && secs < 60.0,
        format!("{}, {secs:.2} s < 60 s", describe("theorem", theorem, 1e-9)),
    );

    let forms = family(&report, "m_forms", &all, 1e-11);
    let entries: usize = report.named("m_forms").map(|c| c.n * c.n).sum();
    t.record(
        7,
        "sum and product forms of M agree",
        forms.2 && entries >= 100,
        format!("{entries} entries, max rel {:.2e} < 1e-11", forms.1),
    );

    let checks = [
        ("lambda_symmetry", 1e-10, &all[..]),
        ("xi_symmetry", 1e-10, &all[..]),
        ("crossing_bruteforce", 1e-9, &all[..]),
        ("crossing_determinant", 1e-9, &all[..]),
        ("crossing_involution", 1e-9, &all[..]),
        ("recursion_lower", 1e-9, &all[..]),
        ("recursion_upper", 1e-9, &all[..]),
        ("degree_bound", 1e-8, &all[..3]),
        ("closed_form_n1", 1e-12, &all[..1]),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, tol, ns) in checks {
        let f = family(&report, name, ns, tol);
        ok &= f.2;
        parts.push(format!("{name} {:.1e}", f.1));
    }
    t.record(8, "functional properties", ok, parts.join(", "));
    info_observations(&report, "theorem_printed_prefactor");
    info_observations(&report, "degree_bound_theta_factor");
}

fn performance(t: &mut Tally) {
    let model = Model::default();
    let cfg = SuiteConfig::default();
    let big = sample_params(&cfg, 200, 0).expect("N=200 sample");
    let start = Instant::now();
    let z = z_determinant(&model, &big, MForm::ProductForm).expect("N=200 determinant");
    let det_secs = start.elapsed().as_secs_f64();
    let det_ok = det_secs < 1.0 && z.ln_abs.is_finite();

    let nine = sample_params(&cfg, DEFAULT_BRUTE_CAP + 1, 0).unwrap();
    let thirteen = sample_params(&cfg, 13, 0).unwrap();
    let cap_ok = matches!(
        z_bruteforce(&model, &nine, DEFAULT_BRUTE_CAP),
        Err(SosError::CapExceeded { n: 9, cap: 8 })
    ) && matches!(z_bruteforce(&model, &thirteen, 64), Err(SosError::CapExceeded { n: 13, cap: 12 }));

    let csv = cmd_bench(&model, DEFAULT_BRUTE_CAP, 42, DEFAULT_BRUTE_CAP).expect("bench runs");
    let diffs: Vec<(usize, f64)> = csv
        .lines()
        .skip(1)
        .filter_map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            f[3].parse().ok().map(|d| (f[0].parse().unwrap(), d))
        })
        .collect();
    let worst = diffs.iter().copied().fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    let agree_ok = diffs.len() == DEFAULT_BRUTE_CAP && diffs.iter().all(|&(_, d)| d < 1e-9);
    for (n, d) in &diffs {
        println!("INFO      bench seed 42: N={n} rel_diff {d:.2e}");
    }
    t.record(
        9,
        "performance and cap",
        det_ok && cap_ok && agree_ok,
        format!(
            "N=200 det {:.1} ms < 1000 ms (ln|Z| = {:.1}); cap enforced: {cap_ok}; brute vs det for N=1..{}: worst {:.2e} at N={} < 1e-9",
            det_secs * 1e3,
            z.ln_abs,
            DEFAULT_BRUTE_CAP,
            worst.1,
            worst.0
        ),
    );
}

fn reproducibility(t: &mut Tally) {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_sos"))
            .args(["verify", "--suite", "all", "--seed", "42"])
            .env_remove("SOS_GUARD_TOL")
            .output()
            .expect("sos binary runs")
    };
    let a = run();
    let b = run();
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    t.record(
        10,
        "verify --suite all --seed 42 is reproducible",
        same && a.status.success() && b.status.success(),
        format!(
            "{} bytes, identical: {same}, exit codes {:?}/{:?}",
            a.stdout.len(),
            a.status.code(),
            b.status.code()
        ),
    );
}

fn main() -> ExitCode {
    let mut t = Tally { failed: Vec::new() };
    let start = Instant::now();
    weights(&mut t);
    algebra(&mut t);
    partition(&mut t);
    performance(&mut t);
    reproducibility(&mut t);
    println!("acceptance: {} of 10 criteria passed in {:.1} s", 10 - t.failed.len(), start.elapsed().as_secs_f64());
    if t.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {:?}", t.failed);
        ExitCode::FAILURE
    }
}
