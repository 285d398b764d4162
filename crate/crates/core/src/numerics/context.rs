use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};

const GUARD_BITS: u32 = 32;

/// Working precision and truncation policy shared by every numeric routine.
///
/// A context is a plain value; pass it explicitly to each call.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionContext {
    precision_digits: u32,
    series_order: usize,
    lattice_cutoff: f64,
    tail_tolerance: f64,
}

impl PrecisionContext {
    /// Context with `digits` decimal digits and defaults derived from it.
    pub fn new(digits: u32) -> Result<Self> {
        if digits < 30 {
            return Err(Error::InvalidContext(format!(
                "precision_digits must be at least 30, got {digits}"
            )));
        }
        if digits > 290 {
            return Err(Error::InvalidContext(format!(
                "precision_digits above 290 would underflow the f64 tail budget, got {digits}"
            )));
        }
        Ok(Self {
            precision_digits: digits,
            series_order: default_series_order(digits),
            lattice_cutoff: 1.0e3,
            tail_tolerance: 10f64.powi(-(digits as i32) - 5),
        })
    }

    pub fn with_series_order(mut self, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidContext("series_order must be positive".into()));
        }
        self.series_order = order;
        Ok(self)
    }

    pub fn with_lattice_cutoff(mut self, cutoff: f64) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(Error::InvalidContext(format!(
                "lattice_cutoff must be positive, got {cutoff}"
            )));
        }
        self.lattice_cutoff = cutoff;
        Ok(self)
    }

    pub fn with_tail_tolerance(mut self, tol: f64) -> Result<Self> {
        let ceiling = 10f64.powf(-(self.precision_digits as f64) / 2.0);
        if !(tol > 0.0 && tol < ceiling) {
            return Err(Error::InvalidContext(format!(
                "tail_tolerance must lie in (0, {ceiling:e}), got {tol:e}"
            )));
        }
        self.tail_tolerance = tol;
        Ok(self)
    }

    pub fn precision_digits(&self) -> u32 {
        self.precision_digits
    }

    pub fn series_order(&self) -> usize {
        self.series_order
    }

    pub fn lattice_cutoff(&self) -> f64 {
        self.lattice_cutoff
    }

    pub fn tail_tolerance(&self) -> f64 {
        self.tail_tolerance
    }

    /// Binary precision handed to MPFR, including guard bits.
    pub fn bits(&self) -> u32 {
        (self.precision_digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS
    }

    /// `10^-precision_digits`.
    pub fn epsilon(&self) -> f64 {
        10f64.powi(-(self.precision_digits as i32))
    }

    /// Same policy at twice the digits; used for stability checks.
    pub fn doubled(&self) -> Self {
        let digits = (self.precision_digits * 2).min(290);
        Self {
            precision_digits: digits,
            series_order: default_series_order(digits).max(self.series_order),
            lattice_cutoff: self.lattice_cutoff,
            tail_tolerance: 10f64.powi(-(digits as i32) - 5),
        }
    }

    pub fn float<T>(&self, value: T) -> Float
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.bits(), value)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits(), Constant::Pi)
    }
}

/// Smallest N with exp(4 pi sqrt N) (4 pi N)^6 |q|^N below 10^-(digits+10) at
/// |q| = exp(-pi sqrt 3), the worst case on the standard fundamental domain.
/// The (4 pi N)^6 factor leaves room for six raisings of j.
fn default_series_order(digits: u32) -> usize {
    let target = -((digits + 10) as f64) * std::f64::consts::LN_10;
    let decay = std::f64::consts::PI * 3f64.sqrt();
    let mut n = 8usize;
    loop {
        let nf = n as f64;
        let log_term = 4.0 * std::f64::consts::PI * nf.sqrt()
            + 6.0 * (4.0 * std::f64::consts::PI * nf).ln()
            - decay * nf;
        if log_term < target {
            return n;
        }
        n += 1;
    }
}
