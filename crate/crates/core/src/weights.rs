//! Face weights of the trigonometric SOS model, the dynamical R-matrix,
//! the diagonal boundary K-matrix, and residual checks of their defining
//! identities.

use crate::dd::{DdComplex, DdMat4};
use crate::error::Result;
use crate::linalg::{local_operator, scaled_residual, spin, swap4, CMatrix, Mat4};
use crate::numeric::{sh, Guard, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// The six nonzero weights at `(lambda, theta)`.
///
/// `a` is shared by `R^{++}_{++}` and `R^{--}_{--}`; the `minus` weights are
/// the `plus` weights at `-theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceWeightSet {
    pub a: C64,
    pub b_plus: C64,
    pub b_minus: C64,
    pub c_plus: C64,
    pub c_minus: C64,
}

impl FaceWeightSet {
    /// 4×4 block in the basis `(++, +-, -+, --)`.
    pub fn r_block(&self) -> Mat4 {
        [
            [self.a, ZERO, ZERO, ZERO],
            [ZERO, self.b_plus, self.c_plus, ZERO],
            [ZERO, self.c_minus, self.b_minus, ZERO],
            [ZERO, ZERO, ZERO, self.a],
        ]
    }
}

fn b_weight(lambda: C64, theta: C64, eta: C64, inv_sinh_theta: C64) -> C64 {
    sh(lambda) * sh(theta - eta) * inv_sinh_theta
}

fn c_weight(lambda: C64, theta: C64, eta: C64, inv_sinh_theta: C64) -> C64 {
    sh(eta) * sh(theta - lambda) * inv_sinh_theta
}

pub fn face_weights(lambda: C64, theta: C64, eta: C64, guard: Guard) -> Result<FaceWeightSet> {
    let s = guard.sinh(theta, || format!("sinh(theta) at theta = {theta}"))?;
    let inv = 1.0 / s;
    let inv_neg = 1.0 / sh(-theta);
    Ok(FaceWeightSet {
        a: sh(lambda + eta),
        b_plus: b_weight(lambda, theta, eta, inv),
        b_minus: b_weight(lambda, -theta, eta, inv_neg),
        c_plus: c_weight(lambda, theta, eta, inv),
        c_minus: c_weight(lambda, -theta, eta, inv_neg),
    })
}

/// Face weights evaluated at double-double working precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdFaceWeights {
    pub a: DdComplex,
    pub b_plus: DdComplex,
    pub b_minus: DdComplex,
    pub c_plus: DdComplex,
    pub c_minus: DdComplex,
}

impl DdFaceWeights {
    pub fn r_block(&self) -> DdMat4 {
        let z = DdComplex::zero();
        [
            [self.a, z, z, z],
            [z, self.b_plus, self.c_plus, z],
            [z, self.c_minus, self.b_minus, z],
            [z, z, z, self.a],
        ]
    }
}

impl From<FaceWeightSet> for DdFaceWeights {
    fn from(w: FaceWeightSet) -> Self {
        DdFaceWeights {
            a: w.a.into(),
            b_plus: w.b_plus.into(),
            b_minus: w.b_minus.into(),
            c_plus: w.c_plus.into(),
            c_minus: w.c_minus.into(),
        }
    }
}

pub fn face_weights_dd(lambda: DdComplex, theta: DdComplex, eta: DdComplex, guard: Guard) -> Result<DdFaceWeights> {
    let t = theta.to_c64();
    guard.sinh(t, || format!("sinh(theta) at theta = {t}"))?;
    let st = theta.sinh();
    let sl = lambda.sinh();
    let se = eta.sinh();
    Ok(DdFaceWeights {
        a: (lambda + eta).sinh(),
        b_plus: sl * (theta - eta).sinh() / st,
        b_minus: sl * (-theta - eta).sinh() / -st,
        c_plus: se * (theta - lambda).sinh() / st,
        c_minus: se * (-theta - lambda).sinh() / -st,
    })
}

pub fn r_matrix(lambda: C64, theta: C64, eta: C64, guard: Guard) -> Result<CMatrix> {
    Ok(CMatrix::from_mat4(&face_weights(lambda, theta, eta, guard)?.r_block()))
}

/// Diagonal entries `(K^+_+, K^-_-)` of the boundary matrix.
pub fn k_diagonal(lambda: C64, theta: C64, zeta: C64, guard: Guard) -> Result<[C64; 2]> {
    let d_up = guard.sinh(theta + zeta + lambda, || {
        format!("sinh(theta+zeta+lambda) at lambda = {lambda}")
    })?;
    let d_down = guard.sinh(zeta + lambda, || format!("sinh(zeta+lambda) at lambda = {lambda}"))?;
    Ok([sh(theta + zeta - lambda) / d_up, sh(zeta - lambda) / d_down])
}

pub fn k_diagonal_dd(lambda: DdComplex, theta: DdComplex, zeta: DdComplex, guard: Guard) -> Result<[DdComplex; 2]> {
    k_diagonal(lambda.to_c64(), theta.to_c64(), zeta.to_c64(), guard)?;
    Ok([
        (theta + zeta - lambda).sinh() / (theta + zeta + lambda).sinh(),
        (zeta - lambda).sinh() / (zeta + lambda).sinh(),
    ])
}

pub fn k_matrix(lambda: C64, theta: C64, zeta: C64, guard: Guard) -> Result<CMatrix> {
    Ok(CMatrix::diag(&k_diagonal(lambda, theta, zeta, guard)?))
}

/// Source of face weights. The trigonometric solution is the only real
/// implementation; the trait exists so that perturbed weights can be
/// injected when testing the harness.
pub trait WeightModel: Sync {
    fn face_weights(&self, lambda: C64, theta: C64, eta: C64, guard: Guard) -> Result<FaceWeightSet>;

    /// Weights for the brute-force contraction. The default widens
    /// [`WeightModel::face_weights`].
    fn face_weights_dd(&self, lambda: DdComplex, theta: DdComplex, eta: DdComplex, guard: Guard) -> Result<DdFaceWeights> {
        Ok(self
            .face_weights(lambda.to_c64(), theta.to_c64(), eta.to_c64(), guard)?
            .into())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Trigonometric;

impl WeightModel for Trigonometric {
    fn face_weights(&self, lambda: C64, theta: C64, eta: C64, guard: Guard) -> Result<FaceWeightSet> {
        face_weights(lambda, theta, eta, guard)
    }

    fn face_weights_dd(&self, lambda: DdComplex, theta: DdComplex, eta: DdComplex, guard: Guard) -> Result<DdFaceWeights> {
        face_weights_dd(lambda, theta, eta, guard)
    }
}

pub static TRIGONOMETRIC: Trigonometric = Trigonometric;

/// Weights plus guard; every lattice construction goes through one of these.
#[derive(Clone, Copy)]
pub struct Model<'a> {
    pub weights: &'a dyn WeightModel,
    pub guard: Guard,
}

impl Default for Model<'static> {
    fn default() -> Self {
        Model {
            weights: &TRIGONOMETRIC,
            guard: Guard::default(),
        }
    }
}

impl std::fmt::Debug for Model<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model").field("guard", &self.guard).finish_non_exhaustive()
    }
}

impl<'a> Model<'a> {
    pub fn with_guard(guard: Guard) -> Model<'static> {
        Model {
            weights: &TRIGONOMETRIC,
            guard,
        }
    }

    pub fn r_block(&self, lambda: C64, theta: C64, eta: C64) -> Result<Mat4> {
        Ok(self.weights.face_weights(lambda, theta, eta, self.guard)?.r_block())
    }

    pub fn r_block_dd(&self, lambda: DdComplex, theta: DdComplex, eta: DdComplex) -> Result<DdMat4> {
        Ok(self.weights.face_weights_dd(lambda, theta, eta, self.guard)?.r_block())
    }
}

/// Dynamical Yang–Baxter equation on three spaces:
/// `R12(λ12; θ-ησ3) R13(λ13; θ) R23(λ23; θ-ησ1) = R23(λ23; θ) R13(λ13; θ-ησ2) R12(λ12; θ)`.
pub fn check_dybe(model: &Model, lambdas: [C64; 3], theta: C64, eta: C64) -> Result<f64> {
    let [l1, l2, l3] = lambdas;
    let r = |x: C64, shift: i32| model.r_block(x, theta - eta * shift as f64, eta);
    let mut lhs = local_operator(3, 0, 1, |b| r(l1 - l2, spin(b, 2, 3)))?;
    crate::linalg::mul_local_right(&mut lhs, 3, 0, 2, |_| r(l1 - l3, 0))?;
    crate::linalg::mul_local_right(&mut lhs, 3, 1, 2, |b| r(l2 - l3, spin(b, 0, 3)))?;

    let mut rhs = local_operator(3, 1, 2, |_| r(l2 - l3, 0))?;
    crate::linalg::mul_local_right(&mut rhs, 3, 0, 2, |b| r(l1 - l3, spin(b, 1, 3)))?;
    crate::linalg::mul_local_right(&mut rhs, 3, 0, 1, |_| r(l1 - l2, 0))?;
    Ok(scaled_residual(&lhs, &rhs))
}

/// `R12(λ;θ) R21(-λ;θ) + sinh(λ-η) sinh(λ+η) Id`, with `R21 = P R12 P`.
pub fn check_unitarity(model: &Model, lambda: C64, theta: C64, eta: C64) -> Result<f64> {
    let p = swap4();
    let r = CMatrix::from_mat4(&model.r_block(lambda, theta, eta)?);
    let r21 = &(&p * &CMatrix::from_mat4(&model.r_block(-lambda, theta, eta)?)) * &p;
    let lhs = &r * &r21;
    let rhs = CMatrix::identity(4).scale(-sh(lambda - eta) * sh(lambda + eta));
    Ok(scaled_residual(&lhs, &rhs))
}

/// `R12(λ1-λ2) K1(λ1) R21(λ1+λ2) K2(λ2) = K2(λ2) R12(λ1+λ2) K1(λ1) R21(λ1-λ2)`,
/// all at the same `θ`.
pub fn check_reflection_equation(
    model: &Model,
    l1: C64,
    l2: C64,
    theta: C64,
    eta: C64,
    zeta: C64,
) -> Result<f64> {
    let p = swap4();
    let id2 = CMatrix::identity(2);
    let k1 = k_matrix(l1, theta, zeta, model.guard)?.kron(&id2);
    let k2 = id2.kron(&k_matrix(l2, theta, zeta, model.guard)?);
    let r12 = |x: C64| -> Result<CMatrix> { Ok(CMatrix::from_mat4(&model.r_block(x, theta, eta)?)) };
    let r21 = |x: C64| -> Result<CMatrix> { Ok(&(&p * &r12(x)?) * &p) };
    let lhs = &(&(&r12(l1 - l2)? * &k1) * &r21(l1 + l2)?) * &k2;
    let rhs = &(&(&k2 * &r12(l1 + l2)?) * &k1) * &r21(l1 - l2)?;
    Ok(scaled_residual(&lhs, &rhs))
}

/// Largest entry of `R` that the ice rule forces to zero (exactly 0 when it holds).
pub fn ice_rule_violation(r: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for row in 0..4 {
        for col in 0..4 {
            let m = |i: usize| spin(i, 0, 2) + spin(i, 1, 2);
            if m(row) != m(col) {
                worst = worst.max(r[(row, col)].norm());
            }
        }
    }
    worst
}

/// Partial transpose in the first space.
pub fn partial_transpose_first(r: &CMatrix) -> CMatrix {
    CMatrix::from_fn(4, |row, col| {
        let (a, b) = (row >> 1, row & 1);
        let (c, d) = (col >> 1, col & 1);
        r[(2 * c + b, 2 * a + d)]
    })
}

/// Commutator norm `[σᶻ⊗1 - 1⊗σᶻ, R^{t1}]`.
pub fn transposed_ice_rule_violation(r: &CMatrix) -> f64 {
    let rt = partial_transpose_first(r);
    let s = CMatrix::diag(&[0, 1, 2, 3].map(|i| C64::new((spin(i, 0, 2) - spin(i, 1, 2)) as f64, 0.0)));
    (&s * &rt).max_abs_diff(&(&rt * &s))
}

/// `b_minus(λ,θ) - b_plus(λ,-θ)` and `c_minus(λ,θ) - c_plus(λ,-θ)`, max modulus.
pub fn theta_reflection_violation(lambda: C64, theta: C64, eta: C64, guard: Guard) -> Result<f64> {
    let w = face_weights(lambda, theta, eta, guard)?;
    let neg = face_weights(lambda, -theta, eta, guard)?;
    Ok((w.b_minus - neg.b_plus).norm().max((w.c_minus - neg.c_plus).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::c;

    fn g() -> Guard {
        Guard::default()
    }

    #[test]
    fn zero_spectral_parameter_gives_scaled_permutation() {
        let eta = c(0.7, 0.2);
        let w = face_weights(c(0.0, 0.0), c(1.1, -0.3), eta, g()).unwrap();
        assert_eq!(w.a, sh(eta));
        assert_eq!(w.b_plus, ZERO);
        assert!((w.c_plus - sh(eta)).norm() < 1e-15);
        let r = r_matrix(c(0.0, 0.0), c(1.1, -0.3), eta, g()).unwrap();
        assert!(r.max_abs_diff(&swap4().scale(sh(eta))) < 1e-15);
    }

    #[test]
    fn c_plus_vanishes_at_lambda_equal_theta() {
        let theta = c(0.4, 0.9);
        let w = face_weights(theta, theta, c(0.3, 0.0), g()).unwrap();
        assert_eq!(w.c_plus, ZERO);
    }

    #[test]
    fn real_point_matches_direct_evaluation() {
        // Evaluated independently with real sinh: λ=0.3, θ=1.1, η=0.7.
        let (l, t, e) = (0.3f64, 1.1f64, 0.7f64);
        let w = face_weights(c(l, 0.0), c(t, 0.0), c(e, 0.0), g()).unwrap();
        let expect = [
            (l + e).sinh(),
            l.sinh() * (t - e).sinh() / t.sinh(),
            l.sinh() * (-t - e).sinh() / (-t).sinh(),
            e.sinh() * (t - l).sinh() / t.sinh(),
            e.sinh() * (-t - l).sinh() / (-t).sinh(),
        ];
        let got = [w.a, w.b_plus, w.b_minus, w.c_plus, w.c_minus];
        for (g, e) in got.iter().zip(expect) {
            assert!((g.re - e).abs() < 1e-15 && g.im == 0.0, "{g} vs {e}");
        }
        // frozen values
        assert!((w.a.re - 1.1752011936438014).abs() < 1e-15);
        assert!((w.c_plus.re - 0.5044016019669372).abs() < 1e-14, "{}", w.c_plus.re);
    }

    #[test]
    fn near_singular_theta_is_rejected() {
        assert!(face_weights(c(0.3, 0.0), c(1e-8, 0.0), c(0.7, 0.0), g()).is_err());
    }

    #[test]
    fn k_matrix_special_points() {
        let (theta, zeta) = (c(0.8, 0.3), c(0.5, -0.2));
        assert!(k_matrix(c(0.0, 0.0), theta, zeta, g())
            .unwrap()
            .max_abs_diff(&CMatrix::identity(2))
            < 1e-15);
        assert_eq!(k_diagonal(zeta, theta, zeta, g()).unwrap()[1], ZERO);
        assert_eq!(k_diagonal(theta + zeta, theta, zeta, g()).unwrap()[0], ZERO);
        assert!(k_matrix(-zeta, theta, zeta, g()).is_err());
    }

    #[test]
    fn ice_rules_hold_structurally() {
        let r = r_matrix(c(0.3, 0.4), c(-0.6, 0.2), c(0.9, 0.1), g()).unwrap();
        assert_eq!(ice_rule_violation(&r), 0.0);
        assert_eq!(transposed_ice_rule_violation(&r), 0.0);
        // ten structural zeros
        let zeros = (0..16).filter(|&k| r[(k / 4, k % 4)] == ZERO).count();
        assert_eq!(zeros, 10);
    }

    #[test]
    fn identities_at_a_fixed_point() {
        let m = Model::default();
        let (t, e, z) = (c(0.7, 0.3), c(0.45, -0.2), c(-0.3, 0.5));
        let ls = [c(0.2, 0.1), c(-0.5, 0.4), c(0.9, -0.3)];
        assert!(check_dybe(&m, ls, t, e).unwrap() < 1e-12);
        assert!(check_unitarity(&m, ls[0], t, e).unwrap() < 1e-13);
        assert!(check_reflection_equation(&m, ls[0], ls[1], t, e, z).unwrap() < 1e-12);
    }

    #[test]
    fn degenerate_spectral_points() {
        let m = Model::default();
        let (t, e, z) = (c(0.7, 0.3), c(0.45, -0.2), c(-0.3, 0.5));
        let l = c(0.2, 0.1);
        // λ1 = λ2 in DYBE; η = 0
        assert!(check_dybe(&m, [l, l, c(0.6, -0.2)], t, e).unwrap() < 1e-10);
        assert!(check_dybe(&m, [l, c(-0.1, 0.3), c(0.6, -0.2)], t, ZERO).unwrap() < 1e-10);
        // unitarity at λ = 0 and λ = η
        assert!(check_unitarity(&m, ZERO, t, e).unwrap() < 1e-12);
        assert!(check_unitarity(&m, e, t, e).unwrap() < 1e-12);
        let r = CMatrix::from_mat4(&m.r_block(e, t, e).unwrap());
        let r21 = &(&swap4() * &CMatrix::from_mat4(&m.r_block(-e, t, e).unwrap())) * &swap4();
        assert!((&r * &r21).max_abs() < 1e-12);
        // reflection with λ1 = λ2 and with λ2 = 0
        assert!(check_reflection_equation(&m, l, l, t, e, z).unwrap() < 1e-11);
        assert!(check_reflection_equation(&m, l, ZERO, t, e, z).unwrap() < 1e-11);
    }

    #[test]
    fn theta_reflection_is_exact() {
        assert_eq!(
            theta_reflection_violation(c(0.3, 0.2), c(0.8, -0.1), c(0.5, 0.5), g()).unwrap(),
            0.0
        );
    }
}
