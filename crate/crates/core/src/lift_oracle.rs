//! Brute-force evaluation of the regularized inner product of `1/j` with the
//! Kudla-Millson theta function, by 2-D quadrature over a fundamental domain
//! with a small ball around `rho` removed.
//!
//! The domain is `F' = {0 <= x <= 1, |z| >= 1, |z - 1| >= 1}`, the standard
//! domain with its left half moved right by one. Both corners then meet at
//! `rho`, and near `rho` the domain is the sector `|arg X_rho| <= pi/3` of
//! the `X_rho`-disk, whose sides are the two boundary arcs.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use rug::Float;

use crate::error::{Error, Result};
use crate::modfuncs::ReciprocalJ;
use crate::numerics::{HPComplex, PrecisionContext};
use crate::quadforms::BinaryQuadraticForm;
use crate::theta::lattice::{concave_tail, ellipsoid_points, invert3, tail_start};
use crate::theta::{kernel, CompletionEngine, KernelKind};

/// Outer radius, in `|X_rho|`, of the polar patch around `rho`. It stays
/// below `|X_rho(i)| = 0.268`, so the patch is exactly a sector of `F'`.
pub const POLAR_RADIUS: f64 = 0.25;

/// Refinement parameters of the composite Gauss-Legendre rules.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    /// Nodes per panel.
    pub degree: usize,
    /// Nodes of the angular rule in the polar patch.
    pub angular_degree: usize,
    /// Relative tolerance for panel doubling.
    pub tolerance: f64,
    /// Panels per interval before doubling stops.
    pub max_panels: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { degree: 16, angular_degree: 24, tolerance: 1e-9, max_panels: 64 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Excision radius in `|X_rho|`.
    pub epsilon: f64,
    /// Height at which the domain is cut off.
    pub y_max: f64,
    pub grid: GridSpec,
    /// Largest `|D|` kept in the theta function.
    pub d_max: i64,
}

impl QuadratureSpec {
    pub fn new(epsilon: f64, y_max: f64, d_max: i64) -> Result<Self> {
        Self { epsilon, y_max, grid: GridSpec::default(), d_max }.validated()
    }

    pub fn with_grid(self, grid: GridSpec) -> Result<Self> {
        Self { grid, ..self }.validated()
    }

    fn validated(self) -> Result<Self> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.2) {
            return Err(Error::InvalidContext(format!("epsilon must lie in (0, 0.2), got {}", self.epsilon)));
        }
        if !(self.y_max >= 5.0 && self.y_max.is_finite()) {
            return Err(Error::InvalidContext(format!("y_max must be at least 5, got {}", self.y_max)));
        }
        if self.d_max < 1 {
            return Err(Error::InvalidContext(format!("d_max must be positive, got {}", self.d_max)));
        }
        let g = &self.grid;
        if g.degree < 2 || g.angular_degree < 2 || g.max_panels < 2 || !(g.tolerance > 0.0) {
            return Err(Error::InvalidContext(format!("invalid grid {g:?}")));
        }
        Ok(self)
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { epsilon: 0.1, y_max: 6.0, grid: GridSpec::default(), d_max: 40 }
    }
}

/// `t = Q_z^2 + |Q(z,1)|^2 / y^2` as a quadratic form in `(a, b, c)`; each
/// term of the theta function is bounded by `(4 v t + 1/(2 pi)) e^(-2 pi v t)`.
/// Its determinant is 4 for every `z`.
fn majorant_matrix(x: f64, y: f64) -> [[f64; 3]; 3] {
    let n = x * x + y * y;
    let u = [n / y, x / y, 1.0 / y];
    let r = [(x * x - y * y) / y, x / y, 1.0 / y];
    let i = [2.0 * x, 1.0, 0.0];
    let mut m = [[0.0; 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            m[j][k] = u[j] * u[k] + r[j] * r[k] + i[j] * i[k];
        }
    }
    m
}

/// Bound on `t` and the tail beyond it for absolute tolerance `tol`.
fn theta_cutoff(m: &[[f64; 3]; 3], v: f64, tol: f64) -> Result<(f64, f64)> {
    let inv = invert3(m);
    let f = move |n: f64| {
        let count: f64 = (0..3).map(|i| 2.0 * ((n + 1.0) * inv[i][i]).sqrt() + 1.0).product();
        count.ln() + (4.0 * v * (n + 1.0) + 1.0 / (2.0 * PI)).ln() - 2.0 * PI * v * n
    };
    let n0 = tail_start(&f, tol, 1.0, 1e6)?;
    Ok((n0, concave_tail(&f, n0)))
}

fn check_upper(label: &str, im: f64) -> Result<()> {
    if im.is_finite() && im > 0.0 {
        Ok(())
    } else {
        Err(Error::NotInUpperHalfPlane(format!("{label}: {im}")))
    }
}

/// `Theta_KM(z, tau) = sum_{|D| <= D_max} sum_{Q in Q_D} phi_KM(Q, z, v) e^(-2 pi i D tau)`,
/// including `Q = 0`, with the lattice cut where the Gaussian tail drops
/// below the tail tolerance.
pub fn km_theta_full(z: &HPComplex, tau: &HPComplex, spec: &QuadratureSpec, ctx: &PrecisionContext) -> Result<HPComplex> {
    let (x, y) = (z.re.to_f64(), z.im.to_f64());
    let v = tau.im.to_f64();
    check_upper("z", y)?;
    check_upper("tau", v)?;
    let p = ctx.bits();
    let m = majorant_matrix(x, y);
    let (cut, _) = theta_cutoff(&m, v, ctx.tail_tolerance())?;
    let minus_two_pi_i_tau = tau.with_prec(p).mul_i().scale(&Float::with_val(p, ctx.pi() * -2i32));
    let mut acc = HPComplex::from_real(-Float::with_val(p, ctx.pi() * 2u32).recip());
    for [a, b, c] in ellipsoid_points(&m, cut) {
        let d = b * b - 4 * a * c;
        if [a, b, c] == [0, 0, 0] || d.abs() > spec.d_max {
            continue;
        }
        let q = BinaryQuadraticForm::new(a, b, c);
        let phi = kernel(KernelKind::PhiKm, &q, z, v, ctx)?;
        acc += &phi * &minus_two_pi_i_tau.scale_i64(d).exp();
    }
    Ok(acc)
}

/// Double-precision theta function for the quadrature, with the phases
/// `e^(-2 pi i D tau)` tabulated once.
struct ThetaF64 {
    v: f64,
    d_max: i64,
    phases: Vec<Complex64>,
}

impl ThetaF64 {
    fn new(tau: Complex64, d_max: i64) -> Self {
        let phases = (-d_max..=d_max)
            .map(|d| (Complex64::new(0.0, -2.0 * PI * d as f64) * tau).exp())
            .collect();
        Self { v: tau.im, d_max, phases }
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        let (x, y, v) = (z.re, z.im, self.v);
        let m = majorant_matrix(x, y);
        let cut = theta_cutoff(&m, v, 1e-18).map(|c| c.0).unwrap_or(60.0 / v);
        let mut acc = Complex64::new(-1.0 / (2.0 * PI), 0.0);
        for [a, b, c] in ellipsoid_points(&m, cut) {
            let d = b * b - 4 * a * c;
            if [a, b, c] == [0, 0, 0] || d.abs() > self.d_max {
                continue;
            }
            let (a, b, c) = (a as f64, b as f64, c as f64);
            let qz = (a * (x * x + y * y) + b * x + c) / y;
            let s = qz * qz + d as f64;
            let phi = (4.0 * v * qz * qz - 1.0 / (2.0 * PI)) * (-4.0 * PI * v * s).exp();
            acc += self.phases[(d + self.d_max) as usize] * phi;
        }
        acc
    }
}

/// `(1/j)(z) Theta_KM(z, tau)`, or `(1/j)(z)` alone.
struct Integrand<'a> {
    rj: &'a ReciprocalJ,
    theta: Option<ThetaF64>,
    prec: u32,
}

impl Integrand<'_> {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        let zh = HPComplex::from_f64(self.prec, z.re, z.im);
        let rj = self.rj.eval(&zh)?.to_c64();
        Ok(self.theta.as_ref().map_or(rj, |t| rj * t.eval(z)))
    }
}

/// Composite Gauss-Legendre rule with panel doubling.
struct Composite {
    rule: GaussLegendre,
    tolerance: f64,
    max_panels: usize,
}

#[derive(Clone, Copy, Debug, Default)]
struct Estimate {
    value: Complex64,
    error: f64,
    converged: bool,
}

impl Composite {
    fn new(degree: usize, tolerance: f64, max_panels: usize) -> Self {
        let degree = NonZeroUsize::new(degree).expect("degree validated");
        Self { rule: GaussLegendre::new(degree), tolerance, max_panels }
    }

    fn fixed(&self, a: f64, b: f64, panels: usize, f: &(impl Fn(f64) -> Result<Complex64> + Sync)) -> Result<Complex64> {
        let h = (b - a) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..panels {
            let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
            for &(t, w) in self.rule.as_node_weight_pairs() {
                acc += f(mid + half * t)? * (w * half);
            }
        }
        Ok(acc)
    }

    /// Doubles the panel count until two successive values agree to the
    /// relative tolerance (with absolute floor `floor`).
    fn adaptive(&self, a: f64, b: f64, floor: f64, f: &(impl Fn(f64) -> Result<Complex64> + Sync)) -> Result<Estimate> {
        let mut panels = 1;
        let mut prev = self.fixed(a, b, panels, f)?;
        loop {
            panels *= 2;
            let cur = self.fixed(a, b, panels, f)?;
            let err = (cur - prev).norm();
            if err <= self.tolerance * (cur.norm() + floor) {
                return Ok(Estimate { value: cur, error: err, converged: true });
            }
            if panels >= self.max_panels {
                return Ok(Estimate { value: cur, error: err, converged: false });
            }
            prev = cur;
        }
    }
}

/// `|z| >= 1` and `|z - 1| >= 1`.
fn arc(x: f64) -> f64 {
    (1.0 - x * x).max(1.0 - (x - 1.0) * (x - 1.0)).max(0.0).sqrt()
}

/// Upper branch of the patch circle, where it exists.
fn disk_top(x: f64) -> Option<f64> {
    let (cy, radius) = patch_circle();
    let rad2 = radius * radius - (x - 0.5) * (x - 0.5);
    (rad2 >= 0.0).then(|| cy + rad2.sqrt())
}

/// Lower edge of `F'` minus the polar patch in the column `x`.
fn outer_floor(x: f64) -> f64 {
    let a = arc(x);
    disk_top(x).map_or(a, |t| t.max(a))
}

/// `x` in `(0, 1/2)` where the patch boundary meets the arc `|z| = 1`.
fn patch_corner() -> f64 {
    let mut lo = 0.5 - patch_circle().1;
    let mut hi = 0.5;
    // top - arc changes sign exactly once on [lo, hi]
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if disk_top(mid).unwrap_or(0.0) > arc(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Center height and radius of the circle `|X_rho(z)| = POLAR_RADIUS`,
/// which is centered on the line `x = 1/2`.
fn patch_circle() -> (f64, f64) {
    let h = 3f64.sqrt() / 2.0;
    let r2 = POLAR_RADIUS * POLAR_RADIUS;
    (h * (1.0 + r2) / (1.0 - r2), 2.0 * h * POLAR_RADIUS / (1.0 - r2))
}

/// Variable of the outer integral over columns: `x` itself, or the angle
/// `phi` with `x = 1/2 + R cos(phi)`.
#[derive(Clone, Copy)]
enum ColumnMap {
    Linear,
    Circle(f64),
}

impl ColumnMap {
    /// `(x, |dx/dt|, lower edge of the column)`.
    fn apply(self, t: f64) -> (f64, f64, f64) {
        match self {
            Self::Linear => (t, 1.0, outer_floor(t)),
            Self::Circle(r) => {
                let (cy, _) = patch_circle();
                (0.5 + r * t.cos(), r.abs() * t.sin(), cy + r.abs() * t.sin())
            }
        }
    }
}

/// `z = (rho - conj(rho) X) / (1 - X)`.
fn z_of_x(x: Complex64) -> Complex64 {
    let rho = Complex64::new(0.5, 3f64.sqrt() / 2.0);
    (rho - rho.conj() * x) / (1.0 - x)
}

/// Result of [`regularized_lift`].
#[derive(Clone, Debug)]
pub struct LiftValue {
    /// Extrapolation of the excised integrals to `epsilon -> 0`.
    pub value: HPComplex,
    /// Empirical error of `value`: the last extrapolation correction plus
    /// the quadrature error estimates.
    pub estimate: f64,
    /// `(epsilon, excised integral)` pairs used for the extrapolation.
    pub samples: Vec<(f64, Complex64)>,
    /// Highest power of `epsilon` removed by the extrapolation.
    pub extrapolation_order: u32,
    /// Whether every adaptive rule met its tolerance.
    pub converged: bool,
}

impl LiftValue {
    pub fn to_c64(&self) -> Complex64 {
        self.value.to_c64()
    }
}

/// Integrals over the parts of `F'` at fixed `tau`.
struct LiftPieces<'a> {
    f: Integrand<'a>,
    spec: &'a QuadratureSpec,
}

impl LiftPieces<'_> {
    /// Over `F'` above the polar patch and below `y_max`.
    fn outer(&self) -> Result<Estimate> {
        let g = &self.spec.grid;
        let rule = Composite::new(g.degree, g.tolerance, g.max_panels);
        // columns are resolved below the outer tolerance so that their noise
        // does not stall the doubling across columns
        let col_rule = Composite::new(g.degree, g.tolerance * 1e-2, g.max_panels);
        let xc = patch_corner();
        let (_, radius) = patch_circle();
        let phi_c = ((0.5 - xc) / radius).clamp(-1.0, 1.0).acos();
        let y_max = self.spec.y_max;
        let column = |x: f64, lo: f64| -> Result<Estimate> {
            col_rule.adaptive(lo, y_max, 1e-14, &|y: f64| Ok(self.f.eval(Complex64::new(x, y))? / (y * y)))
        };
        // Above the patch the columns are parametrized by the angle on the
        // patch circle, which keeps the lower edge smooth where the circle
        // is nearly vertical.
        let pieces: [(f64, f64, ColumnMap); 4] = [
            (0.0, xc, ColumnMap::Linear),
            (phi_c, PI / 2.0, ColumnMap::Circle(-radius)),
            (phi_c, PI / 2.0, ColumnMap::Circle(radius)),
            (1.0 - xc, 1.0, ColumnMap::Linear),
        ];
        let mut total = Estimate { converged: true, ..Default::default() };
        for (a, b, map) in pieces {
            let mut panels = 1;
            let mut prev: Option<Complex64> = None;
            loop {
                let h = (b - a) / panels as f64;
                let nodes: Vec<(f64, f64, f64)> = (0..panels)
                    .flat_map(|k| {
                        let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
                        let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
                        rule.rule.as_node_weight_pairs().iter().map(move |&(t, w)| {
                            let (x, dx, lo) = map.apply(mid + half * t);
                            (x, w * half * dx, lo)
                        })
                    })
                    .collect();
                // columns in parallel, reduced in node order
                let cols: Vec<Estimate> = nodes.par_iter().map(|&(x, _, lo)| column(x, lo)).collect::<Result<_>>()?;
                let mut val = Complex64::new(0.0, 0.0);
                let mut inner_err = 0.0;
                let mut ok = true;
                for ((_, w, _), c) in nodes.iter().zip(&cols) {
                    val += c.value * *w;
                    inner_err += c.error * w;
                    ok &= c.converged;
                }
                if let Some(p) = prev {
                    let err = (val - p).norm();
                    let done = err <= g.tolerance * (val.norm() + 1e-14);
                    if done || panels >= g.max_panels {
                        total.value += val;
                        total.error += err + inner_err;
                        total.converged &= ok && done;
                        break;
                    }
                }
                prev = Some(val);
                panels *= 2;
            }
        }
        Ok(total)
    }

    /// Over the annular sector `r0 <= |X| <= r1`, `|arg X| <= pi/3`, with
    /// `d mu = 4 r dr d theta / (1 - r^2)^2`.
    fn sector(&self, r0: f64, r1: f64) -> Result<Estimate> {
        let g = &self.spec.grid;
        let ang = GaussLegendre::new(NonZeroUsize::new(g.angular_degree).expect("validated"));
        let ring = |r: f64| -> Result<Complex64> {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(t, w) in ang.as_node_weight_pairs() {
                let theta = t * PI / 3.0;
                let z = z_of_x(Complex64::from_polar(r, theta));
                acc += self.f.eval(z)? * (w * PI / 3.0);
            }
            Ok(acc * (4.0 * r / (1.0 - r * r).powi(2)))
        };
        let rule = Composite::new(g.degree, g.tolerance, g.max_panels);
        rule.adaptive(r0, r1, 1e-14, &ring)
    }
}

/// `<1/j, conj(Theta_KM(., tau))>^reg` by quadrature at excision radii
/// `epsilon` and `epsilon / 2`, extrapolated in `epsilon^2`.
pub fn regularized_lift(tau: &HPComplex, spec: &QuadratureSpec, ctx: &PrecisionContext) -> Result<LiftValue> {
    regularized_lift_with_radii(tau, spec, &[spec.epsilon, spec.epsilon / 2.0], ctx)
}

/// As [`regularized_lift`] with explicit decreasing radii, all of which
/// enter the extrapolation.
pub fn regularized_lift_with_radii(
    tau: &HPComplex,
    spec: &QuadratureSpec,
    radii: &[f64],
    ctx: &PrecisionContext,
) -> Result<LiftValue> {
    check_upper("tau", tau.im.to_f64())?;
    excised_integral(Some(tau.to_c64()), spec, radii, ctx)
}

/// `int^reg_F (1/j) d mu`, with the same excision and extrapolation as the lift.
pub fn regularized_integral(spec: &QuadratureSpec, radii: &[f64], ctx: &PrecisionContext) -> Result<LiftValue> {
    excised_integral(None, spec, radii, ctx)
}

fn excised_integral(tau: Option<Complex64>, spec: &QuadratureSpec, radii: &[f64], ctx: &PrecisionContext) -> Result<LiftValue> {
    let spec = spec.clone().validated()?;
    if radii.len() < 2 || radii.windows(2).any(|w| !(w[1] < w[0])) || !(radii[0] < POLAR_RADIUS) || !(radii[radii.len() - 1] > 0.0) {
        return Err(Error::InvalidContext(format!("radii must decrease inside (0, {POLAR_RADIUS}): {radii:?}")));
    }
    let rj = ReciprocalJ::new(ctx)?;
    let pieces = LiftPieces {
        f: Integrand { rj: &rj, theta: tau.map(|t| ThetaF64::new(t, spec.d_max)), prec: ctx.bits() },
        spec: &spec,
    };
    let outer = pieces.outer()?;
    let mut converged = outer.converged;
    let mut err = outer.error;
    let mut inner = pieces.sector(radii[0], POLAR_RADIUS)?;
    converged &= inner.converged;
    err += inner.error;
    let mut samples = vec![(radii[0], outer.value + inner.value)];
    for w in radii.windows(2) {
        let ring = pieces.sector(w[1], w[0])?;
        converged &= ring.converged;
        err += ring.error;
        inner.value += ring.value;
        samples.push((w[1], outer.value + inner.value));
    }
    // I(eps) is even in eps: Neville extrapolation in eps^2 to 0
    let x: Vec<f64> = samples.iter().map(|(e, _)| e * e).collect();
    let mut t: Vec<Complex64> = samples.iter().map(|s| s.1).collect();
    let mut correction = 0.0;
    for m in 1..t.len() {
        for k in (m..t.len()).rev() {
            t[k] = (t[k] * x[k - m] - t[k - 1] * x[k]) / (x[k - m] - x[k]);
        }
        correction = (t[t.len() - 1] - t[t.len() - 2]).norm();
    }
    let value = t[t.len() - 1];
    let order = 2 * (samples.len() as u32 - 1);
    let estimate = correction + err;
    Ok(LiftValue {
        value: HPComplex::from_f64(ctx.bits(), value.re, value.im),
        estimate,
        samples,
        extrapolation_order: order,
        converged,
    })
}

/// `sum_{|D| <= d_max} c(D, v) e^(-2 pi i D tau)`, the Fourier side of the lift.
pub fn fourier_side(tau: &HPComplex, d_max: i64, engine: &CompletionEngine) -> Result<HPComplex> {
    let ctx = engine.context();
    let v = tau.im.to_f64();
    check_upper("tau", v)?;
    let p = ctx.bits();
    let minus_two_pi_i_tau = tau.with_prec(p).mul_i().scale(&Float::with_val(p, ctx.pi() * -2i32));
    let mut acc = HPComplex::zero(p);
    for d in -d_max..=d_max {
        let c = engine.value(d, v)?;
        if !c.is_zero() {
            acc += &c * &minus_two_pi_i_tau.scale_i64(d).exp();
        }
    }
    Ok(acc)
}

/// `2 sum_{-d_max <= D <= 0} tr(D) e^(-2 pi i D tau)`, the trace part alone.
pub fn trace_side(tau: &HPComplex, d_max: i64, engine: &CompletionEngine) -> Result<HPComplex> {
    let ctx = engine.context();
    check_upper("tau", tau.im.to_f64())?;
    let p = ctx.bits();
    let minus_two_pi_i_tau = tau.with_prec(p).mul_i().scale(&Float::with_val(p, ctx.pi() * -2i32));
    let mut acc = HPComplex::zero(p);
    for d in -d_max..=0 {
        let t = Float::with_val(p, engine.trace_engine().trace_any(d)? * 2u32);
        acc += minus_two_pi_i_tau.scale_i64(d).exp().scale(&t);
    }
    Ok(acc)
}
