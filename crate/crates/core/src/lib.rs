//! Traces of reciprocal singular moduli and the Kudla-Millson theta lift of
//! `1/j`, with the high-precision machinery needed to verify their explicit
//! identities numerically.

pub mod error;
pub mod lift_oracle;
pub mod numerics;
pub mod modfuncs;
pub mod quadforms;
pub mod theta;
pub mod traces;

pub use error::{Error, Result};
