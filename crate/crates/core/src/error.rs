use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SosError {
    /// A denominator fell inside the genericity guard.
    #[error("near-singular denominator {what}: |sinh| = {modulus:.3e} <= guard {guard:.1e}")]
    NearSingular {
        what: String,
        modulus: f64,
        guard: f64,
    },

    #[error("brute-force contraction limited to N <= {cap}, got N = {n}")]
    CapExceeded { n: usize, cap: usize },

    #[error("parameter sampling exhausted after {attempts} rejected draws")]
    SamplingExhausted { attempts: usize },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub type Result<T> = std::result::Result<T, SosError>;
