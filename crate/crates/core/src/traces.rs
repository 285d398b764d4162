//! Traces of `1/j` over CM points and the generating series they form.

use std::collections::BTreeMap;

use rayon::prelude::*;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::modfuncs::{
    chowla_selberg, elliptic_coefficients, is_equivalent_to_rho, raise, rho, EllipticExpansion,
    EllipticTarget, ModularName, ReciprocalJ,
};
use crate::numerics::{reconstruct_rational, HPComplex, PrecisionContext};
use crate::quadforms::{class_representatives, cm_point, stabilizer_order};

/// Order of the stabilizer of `rho` in PSL2(Z).
pub const RHO_STABILIZER: u32 = 3;

/// One coefficient of the generating series.
#[derive(Clone, Debug)]
pub struct TraceEntry {
    pub d: i64,
    pub value: Float,
    /// Continued-fraction reconstruction, present only when it is stable
    /// under doubling the working precision.
    pub rational_guess: Option<Rational>,
    pub class_count: usize,
}

/// Shared state for many trace evaluations at one precision: `1/j` and its
/// Laurent data at `rho`.
#[derive(Clone, Debug)]
pub struct TraceEngine {
    ctx: PrecisionContext,
    rj: ReciprocalJ,
}

impl TraceEngine {
    pub fn new(ctx: &PrecisionContext) -> Result<Self> {
        Ok(Self {
            ctx: ctx.clone(),
            rj: ReciprocalJ::new(ctx)?,
        })
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn reciprocal_j(&self) -> &ReciprocalJ {
        &self.rj
    }

    /// Laurent expansion of `1/j` at `rho`.
    pub fn laurent_at_rho(&self) -> &EllipticExpansion {
        self.rj.laurent()
    }

    /// `c_{1/j,rho}(0)`, the value assigned to CM points in the orbit of `rho`.
    pub fn constant_term_at_rho(&self) -> HPComplex {
        self.rj.laurent().coefficient(0)
    }

    /// `sum_Q v_Q / |Gamma_Q|` over reduced forms of discriminant `d < 0`.
    pub fn trace_value(&self, d: i64) -> Result<(Float, usize)> {
        if d >= 0 {
            return Err(Error::InvalidDiscriminant(d, "trace needs D < 0; use trace_zero for D = 0"));
        }
        let forms = class_representatives(d)?;
        let mut acc = HPComplex::zero(self.ctx.bits());
        for q in &forms {
            let z = cm_point(q, &self.ctx)?.value;
            let v = if is_equivalent_to_rho(&z, &self.ctx)? {
                self.constant_term_at_rho()
            } else {
                self.rj.eval(&z)?
            };
            acc += v.div_real(&Float::with_val(self.ctx.bits(), stabilizer_order(q)?));
        }
        Ok((acc.re, forms.len()))
    }

    pub fn trace(&self, d: i64) -> Result<TraceEntry> {
        let (value, class_count) = self.trace_value(d)?;
        Ok(TraceEntry {
            d,
            value,
            rational_guess: None,
            class_count,
        })
    }

    /// Values `R_2^{n-1} E2*(rho)` for `n = 1..=n_max`.
    pub fn raised_e2_star_at_rho(&self, n_max: usize) -> Result<BTreeMap<usize, HPComplex>> {
        let s = self.rj.series();
        let e2 = s.form(ModularName::E2Star);
        let r = rho(self.ctx.bits());
        (1..=n_max)
            .map(|n| Ok((n, s.eval_form(&raise(&e2, n - 1), &r)?)))
            .collect()
    }

    /// Regularized average of `1/j`:
    /// `(pi/3) (1/|Gamma_rho|) sum_n Im(rho)^n/(n-1)! c(-n) R_2^{n-1} E2*(rho)`.
    pub fn trace_zero_value(&self) -> Result<Float> {
        let laurent = self.rj.laurent();
        let n_max = (-laurent.lowest()).max(1) as usize;
        let raised = self.raised_e2_star_at_rho(n_max)?;
        let pairing = elliptic_pairing(laurent, &raised)?;
        // pairing = -4 pi sum(...), so the average is pairing / (-12 |Gamma_rho|).
        Ok(pairing.re / Float::with_val(self.ctx.bits(), -12 * RHO_STABILIZER as i64))
    }

    pub fn trace_zero(&self) -> Result<TraceEntry> {
        Ok(TraceEntry {
            d: 0,
            value: self.trace_zero_value()?,
            rational_guess: None,
            class_count: 0,
        })
    }

    /// `tr(D)` for any integer `D`: zero for `D > 0`, the regularized average at 0.
    pub fn trace_any(&self, d: i64) -> Result<Float> {
        match d.cmp(&0) {
            std::cmp::Ordering::Greater => Ok(Float::new(self.ctx.bits())),
            std::cmp::Ordering::Equal => self.trace_zero_value(),
            std::cmp::Ordering::Less => Ok(self.trace_value(d)?.0),
        }
    }

    /// All entries for `d_min <= D <= 0`, without rational guesses.
    pub fn table(&self, d_min: i64) -> Result<Vec<TraceEntry>> {
        let mut rows: Vec<TraceEntry> = (d_min..0)
            .into_par_iter()
            .map(|d| self.trace(d))
            .collect::<Result<_>>()?;
        rows.push(self.trace_zero()?);
        Ok(rows)
    }
}

/// Denominator bound `10^(digits/3)` for reconstruction.
fn denominator_bound(ctx: &PrecisionContext) -> Integer {
    Integer::from(Integer::u_pow_u(10, ctx.precision_digits() / 3))
}

/// Rational guess for `x` at `ctx`, or `None` when no convergent fits within
/// `10^(-digits/2)`.
pub fn rational_guess(x: &Float, ctx: &PrecisionContext) -> Option<Rational> {
    let tol = Float::with_val(ctx.bits(), ctx.epsilon().sqrt());
    reconstruct_rational(x, &denominator_bound(ctx), &tol)
}

/// Keeps a guess only when both precisions agree on it.
fn stable_guess(lo: &Float, hi: &Float, ctx: &PrecisionContext) -> Option<Rational> {
    let a = rational_guess(lo, ctx)?;
    let b = rational_guess(hi, &ctx.doubled())?;
    (a == b).then_some(a)
}

/// `tr_{1/j}(D)` for `D < 0`, with a precision-doubling-stable rational guess.
pub fn trace(d: i64, ctx: &PrecisionContext) -> Result<TraceEntry> {
    let mut entry = TraceEngine::new(ctx)?.trace(d)?;
    let hi = TraceEngine::new(&ctx.doubled())?.trace_value(d)?.0;
    entry.rational_guess = stable_guess(&entry.value, &hi, ctx);
    Ok(entry)
}

/// Regularized average `tr_{1/j}(0)`.
pub fn trace_zero(ctx: &PrecisionContext) -> Result<TraceEntry> {
    let mut entry = TraceEngine::new(ctx)?.trace_zero()?;
    let hi = TraceEngine::new(&ctx.doubled())?.trace_zero_value()?;
    entry.rational_guess = stable_guess(&entry.value, &hi, ctx);
    Ok(entry)
}

/// `-4 pi sum_{n>=1} Im(center)^n / (n-1)! c(-n) g_n`.
///
/// Coefficients below `10^(-digits/2)` of the largest principal-part
/// coefficient count as zero and need no raised value.
pub fn elliptic_pairing(
    coeffs: &EllipticExpansion,
    raised_values: &BTreeMap<usize, HPComplex>,
) -> Result<HPComplex> {
    let center = coeffs.center();
    let p = center.prec();
    let n_max = (-coeffs.lowest()).max(0) as usize;
    let principal: Vec<HPComplex> = (1..=n_max).map(|n| coeffs.coefficient(-(n as i64))).collect();
    let scale = principal.iter().map(|c| c.abs().to_f64()).fold(0.0, f64::max);
    let digits = (p as f64 / std::f64::consts::LOG2_10).floor();
    let negligible = scale * 10f64.powf(-digits / 2.0);

    let mut acc = HPComplex::zero(p);
    let mut im_pow = Float::with_val(p, 1);
    let mut fact = Float::with_val(p, 1);
    for (idx, c) in principal.iter().enumerate() {
        let n = idx + 1;
        im_pow *= &center.im;
        if n > 1 {
            fact *= (n - 1) as u32;
        }
        if c.abs().to_f64() <= negligible {
            continue;
        }
        let g = raised_values.get(&n).ok_or(Error::MissingRaisedValue(n))?;
        let w = Float::with_val(p, &im_pow / &fact);
        acc += (c * g).scale(&w);
    }
    let minus_four_pi = Float::with_val(p, rug::float::Constant::Pi) * -4i32;
    Ok(acc.scale(&minus_four_pi))
}

/// `tr(D)` for `d_min <= D <= 0`; zero rows for `D = 2, 3 mod 4` are kept.
pub fn generating_series(d_min: i64, ctx: &PrecisionContext) -> Result<Vec<TraceEntry>> {
    if d_min >= 0 {
        return Err(Error::InvalidDiscriminant(d_min, "generating series needs D_min < 0"));
    }
    let lo = TraceEngine::new(ctx)?;
    let hi_ctx = ctx.doubled();
    let hi = TraceEngine::new(&hi_ctx)?;
    let mut rows = lo.table(d_min)?;
    let hi_values: Vec<Float> = rows
        .par_iter()
        .map(|r| hi.trace_any(r.d))
        .collect::<Result<_>>()?;
    for (row, h) in rows.iter_mut().zip(&hi_values) {
        row.rational_guess = stable_guess(&row.value, h, ctx);
    }
    rows.sort_by_key(|r| std::cmp::Reverse(r.d));
    Ok(rows)
}

/// `c_{1/j,rho}(-3) = -pi^-3 Omega^-6 / (2^12 3^3)`, the closed form used as
/// a reference value.
pub fn reference_leading_coefficient(ctx: &PrecisionContext) -> Result<Float> {
    let omega = chowla_selberg(ctx)?;
    let pi3 = ctx.pi() * ctx.pi() * ctx.pi();
    let om6 = Float::with_val(ctx.bits(), omega.square_ref()).square() * omega.square();
    Ok(-(pi3 * om6 * Float::with_val(ctx.bits(), (1u64 << 12) * 27)).recip())
}

/// Laurent coefficients `c_{1/j,rho}(n)` for `n` in `-3..=0` at `ctx`.
pub fn principal_part_at_rho(ctx: &PrecisionContext) -> Result<EllipticExpansion> {
    elliptic_coefficients(EllipticTarget::ReciprocalJ, -3..=0, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    #[test]
    fn small_traces() {
        let e = TraceEngine::new(&ctx()).unwrap();
        let r = |d| rational_guess(&e.trace_value(d).unwrap().0, &ctx()).unwrap();
        assert_eq!(r(-3), Rational::from((23, 331776)));
        assert_eq!(r(-4), Rational::from((1, 3456)));
        assert_eq!(r(-7), Rational::from((-1, 3375)));
        assert_eq!(r(-8), Rational::from((1, 8000)));
        assert!(e.trace_value(-6).unwrap().0.is_zero());
        assert!(e.trace_value(0).is_err());
    }

    #[test]
    fn regularized_average() {
        let e = TraceEngine::new(&ctx()).unwrap();
        let v = e.trace_zero_value().unwrap();
        assert_eq!(rational_guess(&v, &ctx()).unwrap(), Rational::from((-1, 165888)));
    }

    #[test]
    fn pairing_single_term() {
        let c = ctx();
        let p = c.bits();
        let e = principal_part_at_rho(&c).unwrap();
        let mut raised = BTreeMap::new();
        raised.insert(3usize, HPComplex::one(p));
        let got = elliptic_pairing(&e, &raised).unwrap();
        let im3 = Float::with_val(p, 3).sqrt() * 3u32 / 8u32;
        let want = e.coefficient(-3).scale(&(im3 / 2u32 * c.pi() * -4i32));
        assert!((&got - &want).abs().to_f64() < 1e-40 * want.abs().to_f64());
        assert!(matches!(
            elliptic_pairing(&e, &BTreeMap::new()),
            Err(Error::MissingRaisedValue(3))
        ));
    }
}
