//! Level-one modular objects: E2*, E4, E6, Delta, j and 1/j, their raisings,
//! and Laurent expansions at `rho`.

mod almost;
mod elliptic;
mod series;

pub use almost::{raise, AlmostHolomorphicForm};
pub use elliptic::{
    elliptic_coefficients, elliptic_coefficients_with_radius, is_equivalent_to_rho, rho, x_rho,
    z_from_x, EllipticExpansion, EllipticTarget, ReciprocalJ, DEFAULT_CONTOUR_RADIUS,
    LAURENT_SWITCH_RADIUS,
};
pub use series::{build_series, eval_modular, BuiltSeries, ModularName, ModularSeries};

use rug::ops::Pow;
use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::numerics::{gamma_eval, HPComplex, PrecisionContext};
use crate::quadforms::UnimodularMatrix;

/// `(z', g)` with `z' = g z`, `|Re z'| <= 1/2` and `|z'| >= 1`.
pub fn reduce_to_fundamental_domain(z: &HPComplex) -> Result<(HPComplex, UnimodularMatrix)> {
    if !z.im.is_sign_positive() || z.im.is_zero() || !z.is_finite() {
        return Err(Error::NotInUpperHalfPlane(z.im.to_string()));
    }
    let p = z.prec();
    // Points within rounding of the unit circle count as on it.
    let unit = Float::with_val(p, 1) - Float::with_val(p, Float::i_exp(1, 10 - p as i32));
    let mut w = z.clone();
    let mut g = UnimodularMatrix::identity();
    loop {
        let n = w.re.clone().round_even().to_integer().expect("finite");
        if n != 0 {
            w.re -= &n;
            g = UnimodularMatrix::t_big(-n).mul(&g);
        }
        if w.norm_sqr() < unit {
            w = -w.recip();
            g = UnimodularMatrix::s().mul(&g);
            continue;
        }
        return Ok((w, g));
    }
}

/// `Omega = (6 pi)^(-1/2) (Gamma(1/3) / Gamma(2/3))^(3/2)`.
pub fn chowla_selberg(ctx: &PrecisionContext) -> Result<Float> {
    let g13 = gamma_eval(&Rational::from((1, 3)), ctx)?;
    let g23 = gamma_eval(&Rational::from((2, 3)), ctx)?;
    let ratio = Float::with_val(ctx.bits(), &g13 / &g23);
    let six_pi = ctx.pi() * 6u32;
    let pow = ratio.pow(Float::with_val(ctx.bits(), 1.5));
    Ok(pow / six_pi.sqrt())
}
