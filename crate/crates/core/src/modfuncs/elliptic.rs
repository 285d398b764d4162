use std::ops::RangeInclusive;

use rayon::prelude::*;
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use super::series::{ModularName, ModularSeries};
use super::reduce_to_fundamental_domain;
use crate::error::{Error, Result};
use crate::numerics::{HPComplex, PrecisionContext, QExpansion, QExponent};

pub const DEFAULT_CONTOUR_RADIUS: f64 = 0.25;

/// Below this `|X_rho|` the reciprocal of j is evaluated from its Laurent
/// expansion.
pub const LAURENT_SWITCH_RADIUS: f64 = 0.1;

/// `rho = (1 + i sqrt 3) / 2`.
pub fn rho(prec: u32) -> HPComplex {
    let half = Float::with_val(prec, 0.5);
    let im = Float::with_val(prec, 3).sqrt() / 2u32;
    HPComplex::new(half, im)
}

/// `X_rho(z) = (z - rho) / (z - conj rho)`.
pub fn x_rho(z: &HPComplex) -> HPComplex {
    let r = rho(z.prec());
    (z - &r) / (z - &r.conj())
}

/// Inverse of [`x_rho`]: `z = (rho - conj(rho) X) / (1 - X)`.
pub fn z_from_x(x: &HPComplex) -> HPComplex {
    let p = x.prec();
    let r = rho(p);
    (&r - &(&r.conj() * x)) / (HPComplex::one(p) - x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EllipticTarget {
    J,
    ReciprocalJ,
}

/// `f(z) = sum_n c(n) X_rho(z)^n` for `n` in `lowest..=highest`.
#[derive(Clone, Debug)]
pub struct EllipticExpansion {
    center: HPComplex,
    lowest: i64,
    coefficients: Vec<HPComplex>,
    error_budget: f64,
    below_support: bool,
}

impl EllipticExpansion {
    pub fn center(&self) -> &HPComplex {
        &self.center
    }

    pub fn lowest(&self) -> i64 {
        self.lowest
    }

    pub fn highest(&self) -> i64 {
        self.lowest + self.coefficients.len() as i64 - 1
    }

    /// Absolute error bound on each stored coefficient.
    pub fn error_budget(&self) -> f64 {
        self.error_budget
    }

    /// Set when the requested range started below the order of the pole;
    /// those entries are exact zeros.
    pub fn below_support(&self) -> bool {
        self.below_support
    }

    /// `c(n)`, zero outside the stored range.
    pub fn coefficient(&self, n: i64) -> HPComplex {
        let prec = self.center.prec();
        if n < self.lowest || n > self.highest() {
            return HPComplex::zero(prec);
        }
        self.coefficients[(n - self.lowest) as usize].clone()
    }

    pub fn evaluate_at_x(&self, x: &HPComplex) -> HPComplex {
        let p = self.center.prec().max(x.prec());
        // Horner in X, then the X^lowest factor.
        let mut acc = HPComplex::zero(p);
        for c in self.coefficients.iter().rev() {
            acc = &(&acc * x) + c;
        }
        &acc * &x.powi(self.lowest)
    }

    pub fn evaluate(&self, z: &HPComplex) -> HPComplex {
        self.evaluate_at_x(&x_rho(z))
    }

    /// The same coefficients as a power series in `X`, truncated just above
    /// the highest stored index.
    pub fn to_power_series(&self) -> QExpansion {
        QExpansion::new(
            self.coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| (QExponent::integer(self.lowest + i as i64), c.clone())),
            QExponent::integer(self.highest() + 1),
            self.center.prec(),
        )
        .with_error_budget(self.error_budget)
    }
}

/// Laurent coefficients at `rho` with the default contour radius.
pub fn elliptic_coefficients(
    target: EllipticTarget,
    range: RangeInclusive<i64>,
    ctx: &PrecisionContext,
) -> Result<EllipticExpansion> {
    elliptic_coefficients_with_radius(target, range, DEFAULT_CONTOUR_RADIUS, ctx)
}

pub fn elliptic_coefficients_with_radius(
    target: EllipticTarget,
    range: RangeInclusive<i64>,
    radius: f64,
    ctx: &PrecisionContext,
) -> Result<EllipticExpansion> {
    if !(radius > 0.0 && radius <= 0.5) {
        return Err(Error::ContourRadius(radius));
    }
    let (lo, hi) = (*range.start(), *range.end());
    match target {
        EllipticTarget::J => {
            let j = cauchy_coefficients_of_j(hi.max(0), radius, ctx)?;
            let below = lo < 0;
            let coeffs = (lo..=hi)
                .map(|n| {
                    if n < 0 {
                        HPComplex::zero(ctx.bits())
                    } else {
                        j.coefficients[n as usize].clone()
                    }
                })
                .collect();
            Ok(EllipticExpansion {
                center: rho(ctx.bits()),
                lowest: lo,
                coefficients: coeffs,
                error_budget: j.error,
                below_support: below,
            })
        }
        EllipticTarget::ReciprocalJ => reciprocal_j_coefficients(lo, hi, radius, ctx),
    }
}

struct CauchyOutput {
    /// `c(0..=n_max)` at the caller's precision.
    coefficients: Vec<HPComplex>,
    error: f64,
}

fn cauchy_coefficients_of_j(n_max: i64, radius: f64, ctx: &PrecisionContext) -> Result<CauchyOutput> {
    // Dividing by r^n amplifies rounding; carry the lost digits up front.
    let lost = (n_max as f64 * (1.0 / radius).log10()).ceil() as u32;
    let work_digits = (ctx.precision_digits() + lost + 10).min(290);
    let wctx = PrecisionContext::new(work_digits)?;
    let series = ModularSeries::new(&wctx)?;
    let p = wctx.bits();

    // j is holomorphic on |w| < 1; the aliasing error is controlled by its
    // size on the circle of radius r_out = (1 + r) / 2.
    let r_out = (1.0 + radius) / 2.0;
    let im_max = 3f64.sqrt() / 2.0 * (1.0 + r_out) / (1.0 - r_out);
    let log10_jmax = 2.0 * std::f64::consts::PI * im_max / std::f64::consts::LN_10 + 3.0;
    let per_sample = (r_out / radius).log10();
    let m = ((work_digits as f64 + 10.0 + log10_jmax) / per_sample).ceil() as usize + n_max as usize + 1;

    let r = Float::with_val(p, radius);
    let two_pi = Float::with_val(p, Constant::Pi) * 2u32;
    let samples: Vec<HPComplex> = (0..m)
        .into_par_iter()
        .map(|k| {
            let t = Float::with_val(p, &two_pi * k as u64) / m as u64;
            let w = HPComplex::cis(&t).scale(&r);
            series.eval(ModularName::J, &z_from_x(&w))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_sample = samples.iter().map(|s| s.abs().to_f64()).fold(0.0, f64::max);

    let coefficients: Vec<HPComplex> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut acc = HPComplex::zero(p);
            for (k, s) in samples.iter().enumerate() {
                let idx = (k as u64 * n as u64) % m as u64;
                let t = Float::with_val(p, &two_pi * idx) / m as u64;
                acc += s * &HPComplex::cis(&t).conj();
            }
            let scale = Float::with_val(p, &r).pow(-(n as i32)) / m as u64;
            acc.scale(&scale).with_prec(ctx.bits())
        })
        .collect();
    let aliasing = 10f64.powf(log10_jmax) * (radius / r_out).powi(m as i32 - n_max as i32);
    let rounding = max_sample * 10f64.powi(-(work_digits as i32)) * radius.powi(-(n_max as i32));
    Ok(CauchyOutput {
        coefficients,
        error: aliasing * radius.powi(-(n_max as i32)) + rounding,
    })
}

fn reciprocal_j_coefficients(lo: i64, hi: i64, radius: f64, ctx: &PrecisionContext) -> Result<EllipticExpansion> {
    // Order of the zero of j at rho is found from the data, then the pole of
    // 1/j has the same order; 6 extra coefficients of j cover a triple zero.
    let probe = cauchy_coefficients_of_j(hi.max(0) + 12, radius, ctx)?;
    let scaled: Vec<f64> = probe
        .coefficients
        .iter()
        .enumerate()
        .map(|(n, c)| c.abs().to_f64() * radius.powi(n as i32))
        .collect();
    let peak = scaled.iter().cloned().fold(0.0, f64::max);
    let threshold = peak * 10f64.powf(-(ctx.precision_digits() as f64) / 2.0);
    let order = scaled
        .iter()
        .position(|&s| s > threshold)
        .ok_or(Error::ZeroLeadingCoefficient)? as i64;
    let needed = hi + 2 * order;
    let j = if needed as usize + 1 <= probe.coefficients.len() {
        probe
    } else {
        cauchy_coefficients_of_j(needed, radius, ctx)?
    };
    let f = QExpansion::new(
        j.coefficients
            .iter()
            .enumerate()
            .skip(order as usize)
            .map(|(n, c)| (QExponent::integer(n as i64), c.clone())),
        QExponent::integer(needed + 1),
        ctx.bits(),
    )
    .with_error_budget(j.error);
    let inv = f.invert()?;
    let coeffs = (lo..=hi)
        .map(|n| inv.coefficient(QExponent::integer(n)))
        .collect();
    Ok(EllipticExpansion {
        center: rho(ctx.bits()),
        lowest: lo,
        coefficients: coeffs,
        error_budget: inv.error_budget(),
        below_support: lo < -order,
    })
}

/// `1/j` on the whole upper half-plane: Laurent expansion within
/// [`LAURENT_SWITCH_RADIUS`] of the orbit of `rho`, reciprocal of the
/// q-series elsewhere.
#[derive(Clone, Debug)]
pub struct ReciprocalJ {
    series: ModularSeries,
    laurent: EllipticExpansion,
}

impl ReciprocalJ {
    pub fn new(ctx: &PrecisionContext) -> Result<Self> {
        let ratio = LAURENT_SWITCH_RADIUS / 0.5;
        let n_max = ((ctx.precision_digits() as f64 + 10.0) / -ratio.log10()).ceil() as i64;
        Ok(Self {
            series: ModularSeries::new(ctx)?,
            laurent: elliptic_coefficients(EllipticTarget::ReciprocalJ, -3..=n_max, ctx)?,
        })
    }

    pub fn series(&self) -> &ModularSeries {
        &self.series
    }

    pub fn laurent(&self) -> &EllipticExpansion {
        &self.laurent
    }

    /// `X_rho` of the representative of `z` in the closure of the standard
    /// fundamental domain nearest to `rho`.
    pub fn local_coordinate(&self, z: &HPComplex) -> Result<HPComplex> {
        let (mut zr, _) = reduce_to_fundamental_domain(z)?;
        if zr.re.is_sign_negative() {
            zr.re += 1;
        }
        Ok(x_rho(&zr))
    }

    pub fn eval(&self, z: &HPComplex) -> Result<HPComplex> {
        let ctx = self.series.context();
        let x = self.local_coordinate(z)?;
        let ax = x.abs().to_f64();
        if ax < ctx.epsilon().sqrt() {
            return Err(Error::PoleOfReciprocalJ(z.to_string()));
        }
        if ax < LAURENT_SWITCH_RADIUS {
            Ok(self.laurent.evaluate_at_x(&x))
        } else {
            Ok(self.series.eval(ModularName::J, z)?.recip())
        }
    }
}

/// True when `z` lies within `10^(-digits/2)` of the orbit of `rho`.
pub fn is_equivalent_to_rho(z: &HPComplex, ctx: &PrecisionContext) -> Result<bool> {
    let (mut zr, _) = reduce_to_fundamental_domain(&z.with_prec(ctx.bits()))?;
    if zr.re.is_sign_negative() {
        zr.re += 1;
    }
    Ok((&zr - &rho(ctx.bits())).abs().to_f64() < ctx.epsilon().sqrt())
}
