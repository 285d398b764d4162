//! Precision policy, MPFR-backed complex arithmetic, truncated q-series and
//! the handful of special functions the rest of the crate needs.

mod complex;
mod context;
mod gamma;
mod qseries;
mod rational;

pub use complex::HPComplex;
pub use context::PrecisionContext;
pub use gamma::{gamma_eval, reflection_defect};
pub use qseries::{
    series_add, series_invert, series_multiply, QExpansion, QExponent, EXPONENT_DENOMINATOR,
};
pub use rational::reconstruct_rational;

use rug::Float;

/// `|a - b|` as f64, convenient for tolerance checks.
pub fn abs_diff(a: &HPComplex, b: &HPComplex) -> f64 {
    (a - b).abs().to_f64()
}

/// `|a - b| / |b|`, falling back to the absolute difference when `b = 0`.
pub fn rel_diff(a: &HPComplex, b: &HPComplex) -> f64 {
    let d = (a - b).abs();
    let m = b.abs();
    if m.is_zero() {
        d.to_f64()
    } else {
        Float::with_val(d.prec(), &d / &m).to_f64()
    }
}
