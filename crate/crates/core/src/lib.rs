//! Trigonometric solid-on-solid model with one reflecting end and
//! domain-wall boundary conditions.
//!
//! The partition function is computed two independent ways: by contracting
//! dense double-row ℬ operators between the all-up and all-down chain
//! states, and by a single N×N determinant. The [`verify`] harness checks
//! every algebraic identity linking the two on seeded random parameters.

pub mod chain;
pub mod dd;
pub mod error;
pub mod interp;
pub mod linalg;
pub mod numeric;
pub mod params;
pub mod partition;
pub mod verify;
pub mod weights;

pub use error::{Result, SosError};
pub use linalg::CMatrix;
pub use numeric::{Guard, C64};
pub use params::ModelParams;
pub use partition::{MForm, Method, PartitionResult};
pub use weights::Model;
