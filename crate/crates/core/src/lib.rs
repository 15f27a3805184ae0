//! Numerical toolkit for stoquastic branch-overlap verification.
//!
//! The crate covers the whole pipeline at desk scale: reversible-circuit
//! verifiers and their compressed overlap matrices ([`verifier`]),
//! nonnegative product values ([`product_value`]), separately symmetric
//! extensions ([`extension`]), the positive de Finetti rounding procedure
//! ([`rounding`]), the dyadic approximate symmetrizer ([`dyadic`]) and the
//! multi-prover to single-prover compiler ([`collapse`]).

pub mod collapse;
pub mod distances;
pub mod dyadic;
pub mod error;
pub mod extension;
pub mod permutation;
pub mod product_value;
pub mod random;
pub mod rounding;
pub mod tensor;
pub mod verifier;

pub use error::{Error, Result};
