use rug::Float;

use super::kernels::raised_kernel;
use super::lattice::{concave_tail, ellipsoid_points, exact_sqrt, tail_start};
use super::{check_v, richardson_derivative, KernelKind, ThetaValue};
use crate::error::{Error, Result};
use crate::modfuncs::rho;
use crate::numerics::{rel_diff, HPComplex, PrecisionContext};
use crate::quadforms::{q_of, q_z, BinaryQuadraticForm};
use crate::traces::{TraceEngine, RHO_STABILIZER};

/// Highest raising order accepted by [`singular_theta_coeff`].
pub const MAX_RAISING_ORDER: usize = 2;

/// `v^2 d/dv eta_KM = 4 phi*_KM` for every form; the single-mode lowering of
/// the singular coefficient therefore reproduces `R^m Theta*` times this.
pub const LOWERING_FACTOR: u32 = 4;

/// `(a', b', c') = (2A+B+2C, -A+B+2C, A+B)`, so that `Q_rho = a'/sqrt3` and
/// `conj Q(rho,1) = (b' - i sqrt3 c')/2`.
pub fn rho_coordinates(q: &BinaryQuadraticForm) -> Option<[i64; 3]> {
    let (a, b, c) = q.to_i64_triple()?;
    Some([2 * a + b + 2 * c, -a + b + 2 * c, a + b])
}

/// Inverse of [`rho_coordinates`]; `None` off the lattice
/// `a' = b' (mod 3)`, `b' = c' (mod 2)`.
pub fn from_rho_coordinates(p: [i64; 3]) -> Option<BinaryQuadraticForm> {
    let [ap, bp, cp] = p;
    if (ap - bp).rem_euclid(3) != 0 {
        return None;
    }
    let a = (ap - bp) / 3;
    let b = cp - a;
    let twice_c = bp + a - b;
    if twice_c.rem_euclid(2) != 0 {
        return None;
    }
    Some(BinaryQuadraticForm::new(a, b, twice_c / 2))
}

/// Forms of discriminant `d` with `b'^2 + 3c'^2 <= s3_max`, as `rho`
/// coordinates. Forms with `Q(rho,1) = 0` (the multiples of `[1,-1,1]`)
/// are left out.
fn forms_near_rho(d: i64, s3_max: i64) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    if d.rem_euclid(4) > 1 || s3_max < 1 {
        return out;
    }
    let c_max = ((s3_max as f64 / 3.0).sqrt()) as i64 + 1;
    for cp in -c_max..=c_max {
        let rest = s3_max - 3 * cp * cp;
        if rest < 0 {
            continue;
        }
        let b_max = (rest as f64).sqrt() as i64 + 1;
        for bp in -b_max..=b_max {
            let s3 = bp * bp + 3 * cp * cp;
            if s3 > s3_max || s3 == 0 || (bp - cp).rem_euclid(2) != 0 {
                continue;
            }
            // Q_rho^2 - |Q(rho,1)|^2 / Im(rho)^2 = -D
            let Some(ap) = exact_sqrt(s3 - 3 * d) else { continue };
            for ap in if ap == 0 { vec![0] } else { vec![ap, -ap] } {
                if (ap - bp).rem_euclid(3) == 0 {
                    out.push([ap, bp, cp]);
                }
            }
        }
    }
    out
}

/// Empirical majorant for `|R^m eta_KM(Q,rho,v)|` and `|R^m phi*_KM(Q,rho,v)|`
/// in terms of `s = |Q(rho,1)|^2 / Im(rho)^2`; validated by the test suite.
pub fn kernel_majorant(m: usize, v: f64, s: f64, d: i64) -> f64 {
    kernel_log_majorant(m, v, s, d).exp()
}

fn kernel_log_majorant(m: usize, v: f64, s: f64, d: i64) -> f64 {
    let m = m as f64;
    2.0 * m * (1.0 + 4.0 * std::f64::consts::PI * v).ln()
        + (2.0 * m + 1.0) * (2.0 + s + d.unsigned_abs() as f64).ln()
        + 2.0 * (1.0 + v).ln()
        - 4.0 * std::f64::consts::PI * v * s
}

/// Log-majorant of the shell `n <= s < n+1`: at most
/// `2 (2 sqrt(3n+3) + 1)(2 sqrt(n+1) + 1)` forms.
fn shell_log_majorant(m: usize, v: f64, d: i64) -> impl Fn(f64) -> f64 {
    move |n: f64| {
        let count = 2.0 * (2.0 * (3.0 * n + 3.0).sqrt() + 1.0) * (2.0 * (n + 1.0).sqrt() + 1.0);
        count.ln() + kernel_log_majorant(m, v, n, d)
    }
}

fn check_order(m: usize) -> Result<()> {
    if m > MAX_RAISING_ORDER {
        return Err(Error::UnsupportedRaisingOrder(m, MAX_RAISING_ORDER));
    }
    Ok(())
}

/// Adaptive `Q_rho` cutoff for the fixed-`D` sums.
fn adaptive_cutoff(d: i64, m: usize, v: f64, ctx: &PrecisionContext) -> Result<f64> {
    let f = shell_log_majorant(m, v, d);
    let start = d.max(0) as f64 + 1.0;
    let limit = ctx.lattice_cutoff().powi(2);
    let n0 = tail_start(&f, ctx.tail_tolerance(), start, limit)?;
    Ok((n0 - d as f64).sqrt())
}

fn fixed_d_sum(
    kind: KernelKind,
    d: i64,
    m: usize,
    v: f64,
    cutoff: f64,
    ctx: &PrecisionContext,
) -> Result<ThetaValue> {
    check_v(v)?;
    let p = ctx.bits();
    // Q_rho^2 <= cutoff^2  <=>  s <= cutoff^2 + D
    let s_max = cutoff * cutoff + d as f64;
    let s3_max = (3.0 * s_max + 1e-9).floor() as i64;
    let z = rho(p);
    let mut acc = HPComplex::zero(p);
    for pt in forms_near_rho(d, s3_max) {
        let q = from_rho_coordinates(pt).expect("enumeration stays on the lattice");
        acc += raised_kernel(kind, &q, &z, v, m, ctx)?;
    }
    let n0 = (s_max + 1e-9).floor().max(0.0);
    let tail = concave_tail(&shell_log_majorant(m, v, d), n0);
    Ok(ThetaValue { value: acc, cutoff, tail_bound: Float::with_val(p, tail) })
}

/// `R_2^m Theta~*_{KM,D}(rho, v)` with an adaptive cutoff.
pub fn singular_theta_sum(d: i64, m: usize, v: f64, ctx: &PrecisionContext) -> Result<ThetaValue> {
    check_order(m)?;
    check_v(v)?;
    let cutoff = adaptive_cutoff(d, m, v, ctx)?;
    singular_theta_sum_with_cutoff(d, m, v, cutoff, ctx)
}

/// As [`singular_theta_sum`], over the forms with `Q_rho^2 <= cutoff^2`.
pub fn singular_theta_sum_with_cutoff(
    d: i64,
    m: usize,
    v: f64,
    cutoff: f64,
    ctx: &PrecisionContext,
) -> Result<ThetaValue> {
    check_order(m)?;
    fixed_d_sum(KernelKind::Eta, d, m, v, cutoff, ctx)
}

/// Value of [`singular_theta_sum`].
pub fn singular_theta_coeff(d: i64, m: usize, v: f64, ctx: &PrecisionContext) -> Result<HPComplex> {
    Ok(singular_theta_sum(d, m, v, ctx)?.value)
}

/// `R_2^m Theta*_{KM,D}(rho, v)` from the raised `phi*_KM` kernels.
pub fn theta_star_coeff(d: i64, m: usize, v: f64, ctx: &PrecisionContext) -> Result<HPComplex> {
    check_v(v)?;
    let cutoff = adaptive_cutoff(d, m, v, ctx)?;
    Ok(fixed_d_sum(KernelKind::PhiStar, d, m, v, cutoff, ctx)?.value)
}

/// `sum_{Q in Q_D} conj(Q(rho,1))^3 / Im(rho)^6 (12 pi v^3 Q_rho - 32 pi^2 v^4 Q_rho^3)
/// exp(-4 pi v |Q(rho,1)|^2 / Im(rho)^2)`, evaluated from `q_of` and `q_z`.
pub fn theta_star_closed_form(d: i64, v: f64, ctx: &PrecisionContext) -> Result<HPComplex> {
    check_v(v)?;
    let p = ctx.bits();
    let cutoff = adaptive_cutoff(d, 2, v, ctx)?;
    let s3_max = (3.0 * (cutoff * cutoff + d as f64) + 1e-9).floor() as i64;
    let z = rho(p);
    let mut acc = HPComplex::zero(p);
    for pt in forms_near_rho(d, s3_max) {
        let q = from_rho_coordinates(pt).expect("enumeration stays on the lattice");
        acc += closed_form_term(&q, &z, v, ctx);
    }
    Ok(acc)
}

/// One summand of [`theta_star_closed_form`], without the `exp(-2 pi i D tau)`.
pub(crate) fn closed_form_term(q: &BinaryQuadraticForm, z: &HPComplex, v: f64, ctx: &PrecisionContext) -> HPComplex {
    let p = ctx.bits();
    let pi = ctx.pi();
    let v = Float::with_val(p, v);
    let qr = q_z(q, z);
    let conj_q = q_of(q, z).conj();
    let im2 = Float::with_val(p, z.im.square_ref());
    let im6 = Float::with_val(p, &im2 * &im2) * &im2;
    let v3 = Float::with_val(p, &v * &v) * &v;
    let v4 = Float::with_val(p, &v3 * &v);
    let poly = Float::with_val(p, &pi * &v3) * 12u32 * &qr
        - Float::with_val(p, pi.clone().square() * &v4) * 32u32 * Float::with_val(p, &qr * &qr) * &qr;
    let s = conj_q.norm_sqr() / &im2;
    let gauss = Float::with_val(p, -(pi * 4u32) * &v * s).exp();
    conj_q.powi(3).scale(&Float::with_val(p, poly * gauss / im6))
}

/// `Im(rho)^3 = 3 sqrt3 / 8`.
fn im_rho_cubed(p: u32) -> Float {
    Float::with_val(p, 3).sqrt() * 3u32 / 8u32
}

/// Fourier coefficient `c(D, v)` of the lift of `1/j`, split into its trace
/// and singular parts.
#[derive(Clone, Debug)]
pub struct CompletionCoefficient {
    pub d: i64,
    pub v_samples: Vec<(f64, HPComplex)>,
    pub trace_part: Float,
    /// `-(4 pi / 3) Im(rho)^3 / 2! c_{1/j,rho}(-3)`, the weight of `R^2 Theta~*_D`.
    pub singular_weight: Float,
    ctx: PrecisionContext,
}

impl CompletionCoefficient {
    /// `singular_weight * R^2 Theta~*_{KM,D}(rho, v)`.
    pub fn singular_part(&self, v: f64) -> Result<HPComplex> {
        Ok(singular_theta_coeff(self.d, 2, v, &self.ctx)?.scale(&self.singular_weight))
    }

    /// `2 trace_part + singular_part(v)`.
    pub fn value(&self, v: f64) -> Result<HPComplex> {
        let t = Float::with_val(self.ctx.bits(), &self.trace_part * 2u32);
        Ok(&HPComplex::from_real(t) + &self.singular_part(v)?)
    }
}

/// Caches the traces and the Laurent data of `1/j` at `rho` so many
/// completion coefficients can share them.
#[derive(Clone, Debug)]
pub struct CompletionEngine {
    traces: TraceEngine,
    weight: Float,
}

impl CompletionEngine {
    pub fn new(ctx: &PrecisionContext) -> Result<Self> {
        let traces = TraceEngine::new(ctx)?;
        let p = ctx.bits();
        let c3 = traces.laurent_at_rho().coefficient(-3).re;
        // c(-1) = c(-2) = 0, so only n = 3 enters.
        let weight = -(ctx.pi() * 4u32) / RHO_STABILIZER * im_rho_cubed(p) / 2u32 * c3;
        Ok(Self { traces, weight: Float::with_val(p, weight) })
    }

    pub fn context(&self) -> &PrecisionContext {
        self.traces.context()
    }

    pub fn trace_engine(&self) -> &TraceEngine {
        &self.traces
    }

    /// Weight of `R^2 Theta~*_D` in `c(D, v)`.
    pub fn singular_weight(&self) -> &Float {
        &self.weight
    }

    pub fn coefficient(&self, d: i64, vs: &[f64]) -> Result<CompletionCoefficient> {
        let mut cc = CompletionCoefficient {
            d,
            v_samples: Vec::with_capacity(vs.len()),
            trace_part: self.traces.trace_any(d)?,
            singular_weight: self.weight.clone(),
            ctx: self.context().clone(),
        };
        for &v in vs {
            let val = cc.value(v)?;
            cc.v_samples.push((v, val));
        }
        Ok(cc)
    }

    /// `c(D, v)`.
    pub fn value(&self, d: i64, v: f64) -> Result<HPComplex> {
        Ok(self.coefficient(d, &[v])?.v_samples.remove(0).1)
    }

    /// `v^2 d/dv c(D, v)` by Richardson-extrapolated centered differences,
    /// with the lattice cutoff frozen over the stencil. The trace part does
    /// not depend on `v`, so only the singular part is differenced.
    pub fn lowered(&self, d: i64, v: f64) -> Result<HPComplex> {
        check_v(v)?;
        let ctx = self.context();
        let p = ctx.bits();
        // resolve the fastest Gaussian exp(-4 pi v s) present
        let s_min = forms_near_rho(d, 3 * (d.max(0) + 40))
            .iter()
            .map(|[_, b, c]| (b * b + 3 * c * c) as f64 / 3.0)
            .fold(f64::INFINITY, f64::min);
        let rate = if s_min.is_finite() { 4.0 * std::f64::consts::PI * s_min } else { 0.0 };
        let h = 0.5 / (rate + 8.0 / v);
        let cutoff = adaptive_cutoff(d, 2, v - h, ctx)?;
        let f = |dv: &Float| -> Result<HPComplex> {
            let vv = Float::with_val(p, dv + v).to_f64();
            Ok(singular_theta_sum_with_cutoff(d, 2, vv, cutoff, ctx)?.value.scale(&self.weight))
        };
        let deriv = richardson_derivative(&f, h, 5, p)?;
        Ok(deriv.scale(&Float::with_val(p, v * v)))
    }

    /// The literal lowering target `singular_weight * R^2 Theta*_{KM,D}(rho, v)`.
    pub fn lowering_target(&self, d: i64, v: f64) -> Result<HPComplex> {
        Ok(theta_star_coeff(d, 2, v, self.context())?.scale(&self.weight))
    }

    /// `xi_{3/2}` of the completed lift at `tau`, assembled from
    /// `v^2 d/dv c(D, v) = LOWERING_FACTOR * lowering_target(D, v)` over all `D`.
    pub fn xi_of_lift(&self, tau: &HPComplex) -> Result<ThetaValue> {
        let ctx = self.context();
        let p = ctx.bits();
        let series = theta_star_series(tau, ctx)?;
        let v = Float::with_val(p, &tau.im);
        let k = Float::with_val(p, &self.weight * LOWERING_FACTOR) / v.sqrt();
        // xi_{3/2} F = v^{-1/2} conj(L F), L = v^2 d/dv on each mode
        Ok(ThetaValue {
            value: series.value.conj().scale(&k),
            cutoff: series.cutoff,
            tail_bound: Float::with_val(p, series.tail_bound * k.abs()),
        })
    }
}

/// One-off [`CompletionEngine::coefficient`] at a single `v`.
pub fn completion_coefficient(d: i64, v: f64, ctx: &PrecisionContext) -> Result<CompletionCoefficient> {
    CompletionEngine::new(ctx)?.coefficient(d, &[v])
}

/// One-off [`CompletionEngine::lowering_target`].
pub fn lowering_target(d: i64, v: f64, ctx: &PrecisionContext) -> Result<HPComplex> {
    CompletionEngine::new(ctx)?.lowering_target(d, v)
}

/// Forms with `3N = a'^2 + b'^2 + 3c'^2 <= n3_max` as `(A, B, C)`, where
/// `N = Q_rho^2 + |Q(rho,1)|^2 / Im(rho)^2`. Excludes `Q = 0`.
pub(crate) fn forms_by_norm(n3_max: f64) -> Vec<[i64; 3]> {
    // 3N in the (A, B, C) basis
    let m = [[8.0, 4.0, 2.0], [4.0, 5.0, 4.0], [2.0, 4.0, 8.0]];
    ellipsoid_points(&m, n3_max)
        .into_iter()
        .filter(|p| *p != [0, 0, 0])
        .collect()
}

/// Log-majorant of the terms with `3N = n`: at most
/// `2 (2 sqrt n + 1)(2 sqrt(n/3) + 1)` forms, each bounded by
/// `8/(81 sqrt3) (36 pi v^3 sqrt n + 32 pi^2 v^4 n^(3/2)) n^(3/2) exp(-2 pi v n / 3)`.
pub(crate) fn norm_log_majorant(v: f64) -> impl Fn(f64) -> f64 {
    use std::f64::consts::PI;
    move |n: f64| {
        let count = 2.0 * (2.0 * n.sqrt() + 1.0) * (2.0 * (n / 3.0).sqrt() + 1.0);
        let poly = 8.0 / (81.0 * 3f64.sqrt())
            * (36.0 * PI * v.powi(3) * n.sqrt() + 32.0 * PI * PI * v.powi(4) * n.powf(1.5))
            * n.powf(1.5);
        count.ln() + poly.ln() - 2.0 * PI * v * n / 3.0
    }
}

/// `3N` cutoff for the all-`D` sums at height `v`; returns `(n0, tail)`
/// with the sum taken over `3N < n0`.
pub(crate) fn norm_cutoff(v: f64, ctx: &PrecisionContext) -> Result<(f64, f64)> {
    let f = norm_log_majorant(v);
    let n0 = tail_start(&f, ctx.tail_tolerance(), 1.0, 3.0 * ctx.lattice_cutoff().powi(2))?;
    Ok((n0, concave_tail(&f, n0)))
}

/// `sum_D R^2 Theta*_{KM,D}(rho, v) e^(-2 pi i D tau)` from raised `phi*` kernels.
fn theta_star_series(tau: &HPComplex, ctx: &PrecisionContext) -> Result<ThetaValue> {
    let v = tau.im.to_f64();
    check_v(v)?;
    let p = ctx.bits();
    let tau = tau.with_prec(p);
    let (n0, tail) = norm_cutoff(v, ctx)?;
    let z = rho(p);
    let minus_two_pi_i_tau = tau.mul_i().scale(&Float::with_val(p, ctx.pi() * -2i32));
    let mut acc = HPComplex::zero(p);
    for [a, b, c] in forms_by_norm(n0 - 0.5) {
        let q = BinaryQuadraticForm::new(a, b, c);
        let d = b * b - 4 * a * c;
        let term = raised_kernel(KernelKind::PhiStar, &q, &z, v, 2, ctx)?;
        acc += &term * &minus_two_pi_i_tau.scale_i64(d).exp();
    }
    Ok(ThetaValue { value: acc, cutoff: n0 / 3.0, tail_bound: Float::with_val(p, tail) })
}

#[derive(Clone, Debug)]
pub struct LoweringSample {
    pub d: i64,
    pub v: f64,
    /// `v^2 d/dv c(D, v)` by finite differences.
    pub lowered: HPComplex,
    /// `singular_weight * R^2 Theta*_D(rho, v)`.
    pub target: HPComplex,
    /// Relative error of `lowered` against `target`.
    pub rel_error: f64,
    /// Relative error of `lowered` against `LOWERING_FACTOR * target`.
    pub rel_error_scaled: f64,
    /// `lowered / target`, absent when the target vanishes.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct XiSample {
    pub tau: HPComplex,
    pub xi: HPComplex,
    pub shadow: HPComplex,
    pub ratio: HPComplex,
}

#[derive(Clone, Debug)]
pub struct LoweringReport {
    pub samples: Vec<LoweringSample>,
    /// Largest `rel_error` over the samples.
    pub max_rel_error: f64,
    /// Largest `rel_error_scaled` over the samples.
    pub max_rel_error_scaled: f64,
    pub xi_samples: Vec<XiSample>,
    /// Mean of `xi / shadow` over the sample points.
    pub fitted_constant: HPComplex,
    /// Largest relative deviation of a single ratio from the mean.
    pub constant_spread: f64,
}

/// Lowering of `c(D, v)` against `R^2 Theta*_D` on the grid `d_set x v_set`,
/// and `xi_{3/2}` of the lift against [`super::shadow_combination`] on `taus`.
pub fn lowering_and_xi_checks(
    d_set: &[i64],
    v_set: &[f64],
    taus: &[HPComplex],
    ctx: &PrecisionContext,
) -> Result<LoweringReport> {
    let engine = CompletionEngine::new(ctx)?;
    let mut samples = Vec::new();
    for &d in d_set {
        for &v in v_set {
            let lowered = engine.lowered(d, v)?;
            let target = engine.lowering_target(d, v)?;
            let scaled = target.scale(&Float::with_val(ctx.bits(), LOWERING_FACTOR));
            let ratio = (!target.is_zero() && target.abs().to_f64() > 0.0)
                .then(|| (&lowered / &target).re.to_f64());
            samples.push(LoweringSample {
                d,
                v,
                rel_error: rel_diff(&lowered, &target),
                rel_error_scaled: rel_diff(&lowered, &scaled),
                lowered,
                target,
                ratio,
            });
        }
    }
    let max_of = |f: fn(&LoweringSample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let max_rel_error = max_of(|s| s.rel_error);
    let max_rel_error_scaled = max_of(|s| s.rel_error_scaled);

    let p = ctx.bits();
    let mut xi_samples = Vec::new();
    for tau in taus {
        let xi = engine.xi_of_lift(tau)?.value;
        let shadow = super::shadow_combination(tau, ctx)?;
        let ratio = &xi / &shadow;
        xi_samples.push(XiSample { tau: tau.clone(), xi, shadow, ratio });
    }
    let mut fitted = HPComplex::zero(p);
    for s in &xi_samples {
        fitted += &s.ratio;
    }
    if !xi_samples.is_empty() {
        fitted = fitted.div_real(&Float::with_val(p, xi_samples.len()));
    }
    let constant_spread = xi_samples.iter().map(|s| rel_diff(&s.ratio, &fitted)).fold(0.0, f64::max);
    Ok(LoweringReport {
        samples,
        max_rel_error,
        max_rel_error_scaled,
        xi_samples,
        fitted_constant: fitted,
        constant_spread,
    })
}
