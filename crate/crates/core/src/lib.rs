//! Automorphisms of separable multipartite quantum states.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decompose;
pub mod error;
pub mod formats;
pub mod hermitian;
pub mod linalg;
pub mod pnr;
pub mod rng;
pub mod states;
pub mod superop;
pub mod tensor;

pub use error::{Error, Result};
pub use hermitian::{HermitianBasis, HermitianOperator};
pub use tensor::{CMatrix, TensorShape};
