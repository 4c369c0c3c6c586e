//! Problem-instance parameters and their genericity guard.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SosError};
use crate::numeric::{Guard, C64};

/// All free parameters of one instance: crossing parameter `eta`, boundary
/// parameter `zeta`, external height `theta`, spectral parameters `lambdas`
/// and inhomogeneities `xis` (equal length `N >= 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsWire", into = "ParamsWire")]
pub struct ModelParams {
    pub eta: C64,
    pub zeta: C64,
    pub theta: C64,
    pub lambdas: Vec<C64>,
    pub xis: Vec<C64>,
}

/// JSON layout: complex numbers are `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsWire {
    pub eta: [f64; 2],
    pub zeta: [f64; 2],
    pub theta: [f64; 2],
    pub lambdas: Vec<[f64; 2]>,
    pub xis: Vec<[f64; 2]>,
}

fn to_c(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

fn from_c(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

impl TryFrom<ParamsWire> for ModelParams {
    type Error = SosError;
    fn try_from(w: ParamsWire) -> Result<Self> {
        let p = ModelParams {
            eta: to_c(w.eta),
            zeta: to_c(w.zeta),
            theta: to_c(w.theta),
            lambdas: w.lambdas.into_iter().map(to_c).collect(),
            xis: w.xis.into_iter().map(to_c).collect(),
        };
        p.check_shape()?;
        Ok(p)
    }
}

impl From<ModelParams> for ParamsWire {
    fn from(p: ModelParams) -> Self {
        ParamsWire {
            eta: from_c(p.eta),
            zeta: from_c(p.zeta),
            theta: from_c(p.theta),
            lambdas: p.lambdas.into_iter().map(from_c).collect(),
            xis: p.xis.into_iter().map(from_c).collect(),
        }
    }
}

impl ModelParams {
    pub fn new(eta: C64, zeta: C64, theta: C64, lambdas: Vec<C64>, xis: Vec<C64>) -> Result<Self> {
        let p = ModelParams {
            eta,
            zeta,
            theta,
            lambdas,
            xis,
        };
        p.check_shape()?;
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.lambdas.len()
    }

    /// `N >= 1`, equal lengths, finite entries.
    pub fn check_shape(&self) -> Result<()> {
        if self.lambdas.is_empty() {
            return Err(SosError::InvariantViolation("N must be at least 1".into()));
        }
        if self.lambdas.len() != self.xis.len() {
            return Err(SosError::InvariantViolation(format!(
                "lambdas (len {}) and xis (len {}) differ in length",
                self.lambdas.len(),
                self.xis.len()
            )));
        }
        let all = [self.eta, self.zeta, self.theta]
            .into_iter()
            .chain(self.lambdas.iter().copied())
            .chain(self.xis.iter().copied());
        if all.into_iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SosError::InvariantViolation("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Every denominator the instance can touch, with a readable label.
    pub fn guard_arguments(&self) -> Vec<(String, C64)> {
        let n = self.n();
        let (eta, zeta, theta) = (self.eta, self.zeta, self.theta);
        let mut out = Vec::with_capacity(12 * n * n + 2 * n + 2);
        for k in -(n as i64)..=(n as i64 + 1) {
            out.push((format!("sinh(theta{k:+}*eta)"), theta + eta * k as f64));
        }
        for (i, &l) in self.lambdas.iter().enumerate() {
            let i1 = i + 1;
            out.push((format!("sinh(zeta+lambda_{i1})"), zeta + l));
            out.push((format!("sinh(zeta-lambda_{i1})"), zeta - l));
            out.push((format!("sinh(theta+zeta+lambda_{i1})"), theta + zeta + l));
            out.push((format!("sinh(theta+zeta-lambda_{i1})"), theta + zeta - l));
            out.push((format!("sinh(2*lambda_{i1})"), l * 2.0));
            out.push((format!("sinh(lambda_{i1}-zeta+eta)"), l - zeta + eta));
            out.push((format!("sinh(lambda_{i1}-theta-zeta+eta)"), l - theta - zeta + eta));
            for (j, &x) in self.xis.iter().enumerate() {
                let j1 = j + 1;
                out.push((format!("sinh(lambda_{i1}+xi_{j1})"), l + x));
                out.push((format!("sinh(lambda_{i1}-xi_{j1})"), l - x));
                out.push((format!("sinh(lambda_{i1}+xi_{j1}+eta)"), l + x + eta));
                out.push((format!("sinh(lambda_{i1}-xi_{j1}+eta)"), l - x + eta));
            }
            for (j, &m) in self.lambdas.iter().enumerate() {
                let j1 = j + 1;
                if i != j {
                    out.push((format!("sinh(lambda_{i1}-lambda_{j1})"), l - m));
                    out.push((format!("sinh(lambda_{i1}+lambda_{j1})"), l + m));
                }
                out.push((format!("sinh(lambda_{i1}+lambda_{j1}+eta)"), l + m + eta));
            }
        }
        for (i, &x) in self.xis.iter().enumerate() {
            for (j, &y) in self.xis.iter().enumerate().skip(i + 1) {
                out.push((format!("sinh(xi_{}-xi_{})", i + 1, j + 1), x - y));
                out.push((format!("sinh(xi_{}+xi_{})", i + 1, j + 1), x + y));
            }
        }
        out
    }

    /// Shape plus genericity of every denominator.
    pub fn validate(&self, guard: Guard) -> Result<()> {
        self.check_shape()?;
        self.first_guard_violation(guard)
            .map_or(Ok(()), |(label, modulus)| {
                Err(SosError::InvariantViolation(format!(
                    "genericity guard {label}: |sinh| = {modulus:.3e} <= {:.1e}",
                    guard.tol()
                )))
            })
    }

    fn first_guard_violation(&self, guard: Guard) -> Option<(String, f64)> {
        // Cheap pass first; labels are only built on failure.
        let args = self.guard_arguments();
        args.into_iter()
            .find(|(_, a)| !guard.is_clear(*a))
            .map(|(l, a)| (l, a.sinh().norm()))
    }

    pub fn with_lambda(&self, i: usize, value: C64) -> ModelParams {
        let mut p = self.clone();
        p.lambdas[i] = value;
        p
    }

    /// Instance restricted to the given lambda and xi index sets.
    pub fn select(&self, lambda_idx: &[usize], xi_idx: &[usize]) -> ModelParams {
        ModelParams {
            eta: self.eta,
            zeta: self.zeta,
            theta: self.theta,
            lambdas: lambda_idx.iter().map(|&i| self.lambdas[i]).collect(),
            xis: xi_idx.iter().map(|&i| self.xis[i]).collect(),
        }
    }
}
