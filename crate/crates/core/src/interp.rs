//! Polynomial interpolation used to bound the degree of sampled functions.

use crate::numeric::{rel_err, C64};

/// Value at `w` of the unique polynomial of degree `< nodes.len()` through
/// `(nodes[k], values[k])`, in barycentric form.
pub fn interpolate_at(nodes: &[C64], values: &[C64], w: C64) -> C64 {
    assert_eq!(nodes.len(), values.len());
    assert!(!nodes.is_empty());
    let weights: Vec<C64> = nodes
        .iter()
        .enumerate()
        .map(|(k, &xk)| {
            let prod: C64 = nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &xj)| xk - xj)
                .product();
            1.0 / prod
        })
        .collect();
    let mut num = C64::new(0.0, 0.0);
    let mut den = C64::new(0.0, 0.0);
    for ((&xk, &fk), &wk) in nodes.iter().zip(values).zip(&weights) {
        let d = w - xk;
        if d == C64::new(0.0, 0.0) {
            return fk;
        }
        let t = wk / d;
        num += t * fk;
        den += t;
    }
    num / den
}

/// Degree test: fit a polynomial of degree `degree` through the first
/// `degree + 1` samples, predict the remaining ones, and return the worst
/// relative prediction error.
pub fn degree_prediction_error(nodes: &[C64], values: &[C64], degree: usize) -> f64 {
    assert!(nodes.len() > degree + 1, "need at least one held-out sample");
    let (fit_x, test_x) = nodes.split_at(degree + 1);
    let (fit_y, test_y) = values.split_at(degree + 1);
    test_x
        .iter()
        .zip(test_y)
        .map(|(&w, &y)| rel_err(interpolate_at(fit_x, fit_y, w), y))
        .fold(0.0, f64::max)
}
