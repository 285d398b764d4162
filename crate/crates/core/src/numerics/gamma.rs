use rug::{Float, Rational};

use super::context::PrecisionContext;
use crate::error::{Error, Result};

/// Gamma function at a positive rational, via MPFR.
pub fn gamma_eval(x: &Rational, ctx: &PrecisionContext) -> Result<Float> {
    if *x <= 0 {
        return Err(Error::NonPositiveArgument(x.to_string()));
    }
    Ok(ctx.float(x).gamma())
}

/// `|Gamma(x) Gamma(1-x) sin(pi x) / pi - 1|` for `0 < x < 1`.
pub fn reflection_defect(x: &Rational, ctx: &PrecisionContext) -> Result<Float> {
    let one_minus = Rational::from(1) - x.clone();
    let g1 = gamma_eval(x, ctx)?;
    let g2 = gamma_eval(&one_minus, ctx)?;
    let pi = ctx.pi();
    let s = Float::with_val(ctx.bits(), &pi * &ctx.float(x)).sin();
    let mut prod = g1 * g2 * s / pi;
    prod -= 1;
    Ok(prod.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_gives_sqrt_pi() {
        let ctx = PrecisionContext::new(50).unwrap();
        let g = gamma_eval(&Rational::from((1, 2)), &ctx).unwrap();
        let want = ctx.pi().sqrt();
        assert!(Float::with_val(ctx.bits(), &g - &want).abs() < 1e-50);
    }

    #[test]
    fn rejects_non_positive() {
        let ctx = PrecisionContext::new(30).unwrap();
        assert!(gamma_eval(&Rational::from(0), &ctx).is_err());
        assert!(gamma_eval(&Rational::from((-1, 3)), &ctx).is_err());
    }

    #[test]
    fn reflection_identity() {
        let ctx = PrecisionContext::new(60).unwrap();
        for den in [3, 4, 6] {
            let d = reflection_defect(&Rational::from((1, den)), &ctx).unwrap();
            assert!(d < 1e-58, "x = 1/{den}: defect {d}");
        }
    }
}
