use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Float, Integer};

use super::almost::AlmostHolomorphicForm;
use super::reduce_to_fundamental_domain;
use crate::error::{Error, Result};
use crate::numerics::{HPComplex, PrecisionContext, QExpansion, QExponent};

/// Extra bits carried while assembling series; absorbs the cancellation in
/// `E4^3 - E6^2`.
const SERIES_GUARD_BITS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModularName {
    E2Star,
    E4,
    E6,
    Delta,
    J,
}

impl ModularName {
    pub const ALL: [ModularName; 5] = [Self::E2Star, Self::E4, Self::E6, Self::Delta, Self::J];

    pub fn weight(self) -> i64 {
        match self {
            Self::E2Star => 2,
            Self::E4 => 4,
            Self::E6 => 6,
            Self::Delta => 12,
            Self::J => 0,
        }
    }
}

impl fmt::Display for ModularName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::E2Star => "E2*",
            Self::E4 => "E4",
            Self::E6 => "E6",
            Self::Delta => "Delta",
            Self::J => "j",
        })
    }
}

impl FromStr for ModularName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "e2*" | "e2star" | "e2" => Ok(Self::E2Star),
            "e4" => Ok(Self::E4),
            "e6" => Ok(Self::E6),
            "delta" | "δ" => Ok(Self::Delta),
            "j" => Ok(Self::J),
            other => Err(format!("unknown modular function {other:?}; expected E2*, E4, E6, Delta or j")),
        }
    }
}

fn divisor_power_sum(n: u64, k: u32) -> Integer {
    let mut s = Integer::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            s += Integer::from(d).pow(k);
            let e = n / d;
            if e != d {
                s += Integer::from(e).pow(k);
            }
        }
        d += 1;
    }
    s
}

/// `1 + factor * sum_{n>=1} sigma_{k-1}(n) q^n`, exponents below `terms`.
fn eisenstein(k: u32, factor: i64, terms: usize, prec: u32) -> QExpansion {
    let coeffs = (0..terms as u64).map(|n| {
        let c = if n == 0 {
            Integer::from(1)
        } else {
            divisor_power_sum(n, k - 1) * factor
        };
        (QExponent::integer(n as i64), HPComplex::from_real(Float::with_val(prec, c)))
    });
    QExpansion::new(coeffs, QExponent::integer(terms as i64), prec)
}

/// q-expansions of E2, E4, E6, Delta and j, built once per context.
#[derive(Clone, Debug)]
pub struct ModularSeries {
    ctx: PrecisionContext,
    e2: QExpansion,
    e4: QExpansion,
    e6: QExpansion,
    delta: QExpansion,
    j: QExpansion,
}

impl ModularSeries {
    pub fn new(ctx: &PrecisionContext) -> Result<Self> {
        let prec = ctx.bits() + SERIES_GUARD_BITS;
        let n = ctx.series_order();
        let e2 = eisenstein(2, -24, n, prec);
        let e4 = eisenstein(4, 240, n, prec);
        let e6 = eisenstein(6, -504, n, prec);
        let e4_cubed = e4.multiply(&e4).multiply(&e4);
        let delta = e4_cubed
            .sub(&e6.multiply(&e6))
            .scale_real(&Float::with_val(prec, 1728).recip());
        let j = e4_cubed.multiply(&delta.invert()?);
        Ok(Self {
            ctx: ctx.clone(),
            e2,
            e4,
            e6,
            delta,
            j,
        })
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    /// Holomorphic q-series; for E2* this is the holomorphic part E2.
    pub fn q_expansion(&self, name: ModularName) -> &QExpansion {
        match name {
            ModularName::E2Star => &self.e2,
            ModularName::E4 => &self.e4,
            ModularName::E6 => &self.e6,
            ModularName::Delta => &self.delta,
            ModularName::J => &self.j,
        }
    }

    pub fn form(&self, name: ModularName) -> AlmostHolomorphicForm {
        let f = self.q_expansion(name).clone();
        match name {
            ModularName::E2Star => {
                let prec = f.prec();
                let pi = Float::with_val(prec, rug::float::Constant::Pi);
                let c = HPComplex::from_real(Float::with_val(prec, -3) / pi);
                let nonhol = QExpansion::monomial(QExponent::ZERO, c, f.truncation());
                AlmostHolomorphicForm::new(2, vec![f, nonhol])
            }
            _ => AlmostHolomorphicForm::holomorphic(name.weight(), f),
        }
    }

    pub fn eval(&self, name: ModularName, z: &HPComplex) -> Result<HPComplex> {
        self.eval_form(&self.form(name), z)
    }

    /// Value of a modular almost-holomorphic form of its declared weight.
    pub fn eval_form(&self, f: &AlmostHolomorphicForm, z: &HPComplex) -> Result<HPComplex> {
        Ok(self.eval_form_with_error(f, z)?.0)
    }

    /// Reduces `z`, evaluates the series and undoes the weight cocycle.
    pub fn eval_form_with_error(
        &self,
        f: &AlmostHolomorphicForm,
        z: &HPComplex,
    ) -> Result<(HPComplex, f64)> {
        let work = z.with_prec(self.ctx.bits() + SERIES_GUARD_BITS);
        let (zr, g) = reduce_to_fundamental_domain(&work)?;
        let (v, err) = f.evaluate_with_error(&zr);
        let (v, err) = if f.weight() == 0 {
            (v, err)
        } else {
            // f(g z) = (c z + d)^k f(z)
            let cyc = g.cocycle(&work).powi(f.weight());
            let m = cyc.abs().to_f64();
            (&v / &cyc, err / m)
        };
        Ok((v.with_prec(self.ctx.bits()), err))
    }
}

/// A named series: E2* carries a nonholomorphic part, the others do not.
#[derive(Clone, Debug)]
pub enum BuiltSeries {
    Holomorphic(QExpansion),
    AlmostHolomorphic(AlmostHolomorphicForm),
}

pub fn build_series(name: ModularName, ctx: &PrecisionContext) -> Result<BuiltSeries> {
    let s = ModularSeries::new(ctx)?;
    Ok(match name {
        ModularName::E2Star => BuiltSeries::AlmostHolomorphic(s.form(name)),
        _ => BuiltSeries::Holomorphic(s.q_expansion(name).clone()),
    })
}

/// One-shot evaluation; build a [`ModularSeries`] to amortize many calls.
pub fn eval_modular(name: ModularName, z: &HPComplex, ctx: &PrecisionContext) -> Result<HPComplex> {
    if !z.im.is_sign_positive() || z.im.is_zero() {
        return Err(Error::NotInUpperHalfPlane(z.im.to_string()));
    }
    ModularSeries::new(ctx)?.eval(name, z)
}
