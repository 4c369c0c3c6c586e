//! A corrupted weight model must be caught by the harness, not crash it.

use sos_core::numeric::{Guard, C64};
use sos_core::verify::{run_suite, run_suite_with, SuiteConfig, SuiteName};
use sos_core::weights::{face_weights, FaceWeightSet, Model, WeightModel};

struct FlippedCPlus;

impl WeightModel for FlippedCPlus {
    fn face_weights(&self, lambda: C64, theta: C64, eta: C64, guard: Guard) -> sos_core::Result<FaceWeightSet> {
        let mut w = face_weights(lambda, theta, eta, guard)?;
        w.c_plus = -w.c_plus;
        Ok(w)
    }
}

#[test]
fn flipped_c_plus_fails_dybe_and_theorem() {
    let weights = FlippedCPlus;
    let model = Model {
        weights: &weights,
        guard: Guard::default(),
    };
    let cfg = SuiteConfig {
        n_values: vec![2],
        samples_per_case: 5,
        ..SuiteConfig::default()
    };
    let report = run_suite_with(&model, SuiteName::All, &cfg).unwrap();
    assert!(!report.all_passed());
    assert!(report.named("dybe").all(|c| !c.passed));
    assert!(report.named("theorem").all(|c| !c.passed));
    // determinant-only identities are untouched by the weights
    assert!(report.named("m_forms").all(|c| c.passed));
    let s = report.summary();
    assert!(s.failed > 0);
    assert_eq!(s.passed + s.failed, report.cases.len());

    let clean = run_suite(SuiteName::All, &cfg).unwrap();
    assert!(clean.all_passed());
}
