//! The partition function three ways: brute-force contraction of the
//! double-row ℬ operators, the one-site closed form, and the single
//! determinant formula; plus the scalar factors of its functional
//! properties (crossing, recursions, degree normalization).

use std::time::{Duration, Instant};

use crate::chain::{apply_b, b_crossing_scalar, ChainSpace, CrossingNormalization, DENSE_SITE_LIMIT};
use crate::dd::DdComplex;
use crate::error::{Result, SosError};
use crate::linalg::{determinant, CMatrix};
use crate::numeric::{sh, Guard, ScaledComplex, C64};
use crate::params::ModelParams;
use crate::weights::Model;

/// Default limit on N for brute-force contraction.
pub const DEFAULT_BRUTE_CAP: usize = 8;

/// Smallest pivot below which a determinant evaluation is flagged.
pub const ILL_CONDITIONED_PIVOT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    BruteForce,
    Determinant,
    ClosedFormN1,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::BruteForce => "brute",
            Method::Determinant => "det",
            Method::ClosedFormN1 => "closed_n1",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionResult {
    pub value: C64,
    pub method: Method,
    pub elapsed: Duration,
    pub n: usize,
    /// Smallest pivot modulus during elimination (determinant only).
    pub cond_hint: Option<f64>,
    /// `ln|Z|`, finite even when `value` overflows.
    pub ln_abs: f64,
}

impl PartitionResult {
    pub fn is_ill_conditioned(&self) -> bool {
        self.cond_hint.is_some_and(|p| p < ILL_CONDITIONED_PIVOT)
    }
}

/// `⟨0̄| ℬ(λ1) ⋯ ℬ(λN) |0⟩`, applying each double-row factor to the state.
pub fn z_bruteforce(model: &Model, p: &ModelParams, cap: usize) -> Result<PartitionResult> {
    let start = Instant::now();
    let n = p.n();
    let cap = cap.min(DENSE_SITE_LIMIT);
    if n > cap {
        return Err(SosError::CapExceeded { n, cap });
    }
    let space = ChainSpace::new(n);
    let h = space.dim();
    let mut v = vec![DdComplex::zero(); h];
    v[space.all_up()] = C64::new(1.0, 0.0).into();
    for &lambda in p.lambdas.iter().rev() {
        v = apply_b(model, lambda, p, &v)?;
    }
    let value = v[space.all_down()].to_c64();
    Ok(PartitionResult {
        value,
        method: Method::BruteForce,
        elapsed: start.elapsed(),
        n,
        cond_hint: None,
        ln_abs: value.norm().ln(),
    })
}

/// One-site partition function: the two boundary configurations summed.
pub fn z_n1_closed(lambda: C64, xi: C64, theta: C64, eta: C64, zeta: C64, guard: Guard) -> Result<C64> {
    let st = guard.sinh(theta, || "sinh(theta)".into())?;
    let d_up = guard.sinh(theta + zeta + lambda, || "sinh(theta+zeta+lambda)".into())?;
    let d_down = guard.sinh(zeta + lambda, || "sinh(zeta+lambda)".into())?;
    let pre = sh(eta) * sh(theta - eta) / (st * st);
    let up = sh(theta + zeta - lambda) / d_up * sh(lambda - xi) * sh(theta + lambda + xi);
    let down = sh(zeta - lambda) / d_down * sh(lambda + xi) * sh(theta - lambda + xi);
    Ok(pre * (up + down))
}

pub fn z_n1_closed_result(p: &ModelParams, guard: Guard) -> Result<PartitionResult> {
    let start = Instant::now();
    if p.n() != 1 {
        return Err(SosError::InvariantViolation(format!(
            "closed form needs N = 1, got N = {}",
            p.n()
        )));
    }
    let value = z_n1_closed(p.lambdas[0], p.xis[0], p.theta, p.eta, p.zeta, guard)?;
    Ok(PartitionResult {
        value,
        method: Method::ClosedFormN1,
        elapsed: start.elapsed(),
        n: 1,
        cond_hint: None,
        ln_abs: value.norm().ln(),
    })
}

/// Which of the two equivalent expressions for `M_ij` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MForm {
    /// Boundary-weighted sum of `M⁺` and `M⁻`.
    #[default]
    SumForm,
    /// Factorized single product.
    ProductForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MMatrix {
    pub matrix: CMatrix,
    pub form: MForm,
}

/// Entry `M_ij` (zero-based `i`, `j`).
pub fn m_entry(i: usize, j: usize, p: &ModelParams, form: MForm, guard: Guard) -> Result<C64> {
    let (l, x) = (p.lambdas[i], p.xis[j]);
    let (eta, zeta, theta) = (p.eta, p.zeta, p.theta);
    let g = |arg: C64, what: &str| guard.sinh(arg, || format!("{what} (i={}, j={})", i + 1, j + 1));
    match form {
        MForm::SumForm => {
            let st = g(theta, "sinh(theta)")?;
            let half = |s: f64| -> Result<C64> {
                let outer = g(l - x * s + eta, "sinh(lambda-+xi+eta)")?;
                let d1 = g(l + x * s, "sinh(lambda+-xi)")?;
                let d2 = g(l + x * s + eta, "sinh(lambda+-xi+eta)")?;
                Ok((1.0 / d1 - sh(theta - eta * s) / (st * d2)) / outer)
            };
            let k_up = sh(theta + zeta - l) / g(theta + zeta + l, "sinh(theta+zeta+lambda)")?;
            let k_down = sh(zeta - l) / g(zeta + l, "sinh(zeta+lambda)")?;
            Ok(k_up * half(1.0)? + k_down * half(-1.0)?)
        }
        MForm::ProductForm => {
            let d = g(theta + zeta + l, "sinh(theta+zeta+lambda)")?
                * g(zeta + l, "sinh(zeta+lambda)")?
                * g(l - x + eta, "sinh(lambda-xi+eta)")?
                * g(l + x + eta, "sinh(lambda+xi+eta)")?
                * g(l - x, "sinh(lambda-xi)")?
                * g(l + x, "sinh(lambda+xi)")?;
            Ok(sh(theta + zeta + x) * sh(zeta - x) * sh(l * 2.0) * sh(eta) / d)
        }
    }
}

pub fn m_matrix(p: &ModelParams, form: MForm, guard: Guard) -> Result<MMatrix> {
    let n = p.n();
    let mut m = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = m_entry(i, j, p, form, guard)?;
        }
    }
    Ok(MMatrix { matrix: m, form })
}

/// Height-dependent scalar prefactor of the determinant formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaPrefactor {
    /// `(-1)^{N(N-1)/2} ∏_{k=1}^{N} ∏_{i=1}^{k} sinh(θ+(k-2i)η)/sinh(θ+(k-2i+1)η)`,
    /// the product generated by iterating the lower recursion.
    #[default]
    Nested,
    /// `(-1)^N ∏_{i=1}^{N} [sinh(θ+η(N-2i))/sinh(θ+η(N-2i+1))]^{N-i+1}`.
    /// Does not reproduce the contraction; kept for comparison.
    Printed,
}

/// `∏_{i=1}^{n} sinh(θ+(n-2i)η)/sinh(θ+(n-2i+1)η)`, the height factor of
/// one recursion step.
pub fn recursion_theta_factor(n: usize, theta: C64, eta: C64, guard: Guard) -> Result<C64> {
    let mut acc = C64::new(1.0, 0.0);
    for i in 1..=n {
        let k = n as f64 - 2.0 * i as f64;
        let d = guard.sinh(theta + eta * (k + 1.0), || format!("sinh(theta{:+}*eta)", k + 1.0))?;
        acc *= sh(theta + eta * k) / d;
    }
    Ok(acc)
}

fn theta_prefactor(n: usize, theta: C64, eta: C64, kind: ThetaPrefactor, guard: Guard) -> Result<ScaledComplex> {
    let mut acc = ScaledComplex::one();
    match kind {
        ThetaPrefactor::Nested => {
            if (n * (n - 1) / 2) % 2 == 1 {
                acc.mul(C64::new(-1.0, 0.0));
            }
            for k in 1..=n {
                acc.mul(recursion_theta_factor(k, theta, eta, guard)?);
            }
        }
        ThetaPrefactor::Printed => {
            if n % 2 == 1 {
                acc.mul(C64::new(-1.0, 0.0));
            }
            for i in 1..=n {
                let k = n as f64 - 2.0 * i as f64;
                let d = guard.sinh(theta + eta * (k + 1.0), || format!("sinh(theta{:+}*eta)", k + 1.0))?;
                let ratio = sh(theta + eta * k) / d;
                for _ in 0..(n - i + 1) {
                    acc.mul(ratio);
                }
            }
        }
    }
    Ok(acc)
}

/// Determinant formula with the default height prefactor.
pub fn z_determinant(model: &Model, p: &ModelParams, form: MForm) -> Result<PartitionResult> {
    z_determinant_with(model, p, form, ThetaPrefactor::Nested)
}

/// `Z = prefactor(θ) · det M · ∏_{i,j} sinh(λᵢ±ξⱼ) sinh(λᵢ±ξⱼ+η)
///      / ∏_{i<j} sinh(ξⱼ+ξᵢ) sinh(ξⱼ-ξᵢ) sinh(λⱼ-λᵢ) sinh(λⱼ+λᵢ+η)`.
pub fn z_determinant_with(model: &Model, p: &ModelParams, form: MForm, kind: ThetaPrefactor) -> Result<PartitionResult> {
    let start = Instant::now();
    let guard = model.guard;
    let n = p.n();
    let eta = p.eta;
    let m = m_matrix(p, form, guard)?;
    let det = determinant(&m.matrix);

    let mut acc = det.scaled;
    acc.mul_scaled(theta_prefactor(n, p.theta, eta, kind, guard)?);
    for &l in &p.lambdas {
        for &x in &p.xis {
            acc.mul(sh(l + x));
            acc.mul(sh(l - x));
            acc.mul(sh(l + x + eta));
            acc.mul(sh(l - x + eta));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (xi, xj) = (p.xis[i], p.xis[j]);
            let (li, lj) = (p.lambdas[i], p.lambdas[j]);
            let label = |what: &str| format!("{what} (i={}, j={})", i + 1, j + 1);
            acc.div(guard.sinh(xj + xi, || label("sinh(xi_j+xi_i)"))?);
            acc.div(guard.sinh(xj - xi, || label("sinh(xi_j-xi_i)"))?);
            acc.div(guard.sinh(lj - li, || label("sinh(lambda_j-lambda_i)"))?);
            acc.div(guard.sinh(lj + li + eta, || label("sinh(lambda_j+lambda_i+eta)"))?);
        }
    }
    Ok(PartitionResult {
        value: acc.to_c64(),
        method: Method::Determinant,
        elapsed: start.elapsed(),
        n,
        cond_hint: Some(det.min_pivot),
        ln_abs: acc.ln_abs(),
    })
}

/// Scalar `c(λᵢ)` with `Z(…, -λᵢ-η, …) = c(λᵢ) Z(…, λᵢ, …)`.
pub fn crossing_factor(lambda_i: C64, p: &ModelParams, guard: Guard) -> Result<C64> {
    b_crossing_scalar(lambda_i, p, guard, CrossingNormalization::Plain)
}

/// Instance after removing `λ₁` and `ξ₁` (lower-right corner frozen), or
/// `None` for N = 1 where the reduced partition function is `Z₀ = 1`.
pub fn lower_reduced(p: &ModelParams) -> Option<ModelParams> {
    let n = p.n();
    (n > 1).then(|| p.select(&(1..n).collect::<Vec<_>>(), &(1..n).collect::<Vec<_>>()))
}

/// Instance after removing `λ_N` and `ξ₁` (upper-right corner frozen).
pub fn upper_reduced(p: &ModelParams) -> Option<ModelParams> {
    let n = p.n();
    (n > 1).then(|| p.select(&(0..n - 1).collect::<Vec<_>>(), &(1..n).collect::<Vec<_>>()))
}

/// Right-hand side of the recursion at `λ₁ = ξ₁`; `z_prev` is the
/// partition function of [`lower_reduced`].
pub fn recursion_rhs_lower(p: &ModelParams, z_prev: C64, guard: Guard) -> Result<C64> {
    let n = p.n();
    let (l1, x1, eta) = (p.lambdas[0], p.xis[0], p.eta);
    if l1 != x1 {
        return Err(SosError::InvariantViolation("lower recursion needs lambda_1 == xi_1".into()));
    }
    let mut acc = sh(eta) * sh(p.zeta - l1) / guard.sinh(p.zeta + l1, || "sinh(zeta+lambda_1)".into())?;
    acc *= recursion_theta_factor(n, p.theta, eta, guard)?;
    for &l in &p.lambdas {
        acc *= sh(l + x1);
    }
    for i in 1..n {
        acc *= sh(l1 - p.xis[i] + eta) * sh(l1 + p.xis[i] + eta) * sh(p.lambdas[i] - x1 + eta);
    }
    Ok(acc * z_prev)
}

/// Right-hand side of the recursion at `λ_N = -ξ₁`; `z_prev` is the
/// partition function of [`upper_reduced`].
pub fn recursion_rhs_upper(p: &ModelParams, z_prev: C64, guard: Guard) -> Result<C64> {
    let n = p.n();
    let (ln, x1, eta) = (p.lambdas[n - 1], p.xis[0], p.eta);
    if ln != -x1 {
        return Err(SosError::InvariantViolation("upper recursion needs lambda_N == -xi_1".into()));
    }
    let mut acc = sh(eta) * sh(p.theta + p.zeta - ln)
        / guard.sinh(p.theta + p.zeta + ln, || "sinh(theta+zeta+lambda_N)".into())?;
    acc *= recursion_theta_factor(n, p.theta, eta, guard)?;
    for &l in &p.lambdas {
        acc *= sh(l - x1);
    }
    for i in 1..n {
        acc *= sh(ln + p.xis[i] + eta) * sh(ln - p.xis[i] + eta) * sh(p.lambdas[i - 1] + x1 + eta);
    }
    Ok(acc * z_prev)
}

/// Second factor clearing the K-matrix poles in the normalized partition
/// function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClearingFactor {
    /// `sinh(ζ+λᵢ)`, the lower K-matrix denominator.
    #[default]
    ZetaShift,
    /// `sinh(θ+λᵢ)`; not enough to make the result polynomial.
    ThetaShift,
}

/// `exp((2N+2)Σλ) sinh(θ+ζ+λᵢ) F(λᵢ) Z`, polynomial of degree `2N+2` in
/// `e^{2λᵢ}` for the default factor.
pub fn normalized_z(p: &ModelParams, i: usize, z: C64, factor: ClearingFactor) -> C64 {
    let n = p.n() as f64;
    let sum: C64 = p.lambdas.iter().sum();
    let l = p.lambdas[i];
    let second = match factor {
        ClearingFactor::ZetaShift => sh(p.zeta + l),
        ClearingFactor::ThetaShift => sh(p.theta + l),
    };
    (sum * (2.0 * n + 2.0)).exp() * sh(p.theta + p.zeta + l) * second * z
}
