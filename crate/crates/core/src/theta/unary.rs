use std::fmt;
use std::str::FromStr;

use rug::float::Constant;
use rug::Float;

use super::lattice::{concave_tail, tail_start};
use super::{check_v, richardson_derivative, ThetaValue};
use crate::error::{Error, Result};
use crate::numerics::{HPComplex, PrecisionContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryWeight {
    /// `sum a q^(a^2/3)`.
    ThreeHalves,
    /// `v^(-3/2) sum H_3(2 sqrt(pi v) a / sqrt 3) q^(a^2/3)`.
    SevenHalves,
}

impl fmt::Display for UnaryWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ThreeHalves => "3/2",
            Self::SevenHalves => "7/2",
        })
    }
}

impl FromStr for UnaryWeight {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "3/2" | "1.5" => Ok(Self::ThreeHalves),
            "7/2" | "3.5" => Ok(Self::SevenHalves),
            other => Err(format!("unary theta weight must be 3/2 or 7/2, got {other:?}")),
        }
    }
}

fn im_f64(tau: &HPComplex) -> Result<f64> {
    let v = tau.im.to_f64();
    check_v(v).map(|_| v)
}

/// `exp(2 pi i tau n / 3)` from `2 pi i tau / 3`.
fn q_third_power(n: i64, two_pi_i_tau_third: &HPComplex) -> HPComplex {
    two_pi_i_tau_third.scale_i64(n).exp()
}

fn two_pi_i_over_3(tau: &HPComplex) -> HPComplex {
    let p = tau.prec();
    let k = Float::with_val(p, Constant::Pi) * 2u32 / 3u32;
    tau.mul_i().scale(&k)
}

/// Log-majorant of `|summand(a)|` for `|a| = n >= 1`, both signs included.
fn unary_log_majorant(weight: UnaryWeight, v: f64) -> impl Fn(f64) -> f64 {
    let alpha = 2.0 * std::f64::consts::PI * v / 3.0;
    let (log_c, k) = match weight {
        UnaryWeight::ThreeHalves => (2f64.ln(), 1.0),
        UnaryWeight::SevenHalves => {
            // |H_3(c a)| <= (8 c^3 + 12 c) a^3 for a >= 1.
            let c = 2.0 * (std::f64::consts::PI * v).sqrt() / 3f64.sqrt();
            ((2.0 * (8.0 * c.powi(3) + 12.0 * c) * v.powf(-1.5)).ln(), 3.0)
        }
    };
    move |n: f64| log_c + k * n.ln() - alpha * n * n
}

/// Unary theta of the given weight on the class `h mod 3`, summed over
/// `|a|` below an automatic cutoff.
pub fn theta_unary(weight: UnaryWeight, h: i64, tau: &HPComplex, ctx: &PrecisionContext) -> Result<ThetaValue> {
    let v = im_f64(tau)?;
    let f = unary_log_majorant(weight, v);
    let cutoff = tail_start(&f, ctx.tail_tolerance(), 1.0, ctx.lattice_cutoff())?;
    theta_unary_with_cutoff(weight, h, tau, cutoff, ctx)
}

/// As [`theta_unary`], summing exactly the terms with `|a| < cutoff`.
pub fn theta_unary_with_cutoff(
    weight: UnaryWeight,
    h: i64,
    tau: &HPComplex,
    cutoff: f64,
    ctx: &PrecisionContext,
) -> Result<ThetaValue> {
    let v = im_f64(tau)?;
    let p = ctx.bits();
    let tau = tau.with_prec(p);
    let e = two_pi_i_over_3(&tau);
    let a_max = cutoff.ceil() as i64 - 1;
    let h = h.rem_euclid(3);
    // H_3(x) = 8x^3 - 12x with x = c a.
    let c = Float::with_val(p, Constant::Pi) * Float::with_val(p, &tau.im);
    let c = Float::with_val(p, c.sqrt() * 2u32) / Float::with_val(p, 3).sqrt();
    let v_pow = Float::with_val(p, tau.im.clone().pow_f(-1.5));
    let mut acc = HPComplex::zero(p);
    for a in (-a_max..=a_max).filter(|a| a.rem_euclid(3) == h) {
        let coeff = match weight {
            UnaryWeight::ThreeHalves => Float::with_val(p, a),
            UnaryWeight::SevenHalves => {
                let x = Float::with_val(p, &c * a);
                let x3 = Float::with_val(p, x.clone().square() * &x);
                (x3 * 8u32 - x * 12u32) * &v_pow
            }
        };
        acc += q_third_power(a * a, &e).scale(&coeff);
    }
    let f = unary_log_majorant(weight, v);
    Ok(ThetaValue {
        value: acc,
        cutoff,
        tail_bound: Float::with_val(p, concave_tail(&f, cutoff)),
    })
}

trait PowF {
    fn pow_f(self, e: f64) -> Float;
}

impl PowF for Float {
    fn pow_f(self, e: f64) -> Float {
        let p = self.prec();
        Float::with_val(p, rug::ops::Pow::pow(self, Float::with_val(p, e)))
    }
}

/// Log-majorant for the binary theta grouped by `n = b^2 + 3c^2`: at most
/// `2(2 sqrt(n/3) + 1) <= 4.31 sqrt n` points, each of size `n^(3/2) |q|^(n/3)`.
fn binary_log_majorant(v: f64) -> impl Fn(f64) -> f64 {
    let beta = 2.0 * std::f64::consts::PI * v / 3.0;
    move |n: f64| 4.31f64.ln() + 2.0 * n.ln() - beta * n
}

/// `theta_{4,h} = sum_{b = c mod 2, b = h mod 3} (b - i sqrt3 c)^3 q^(b^2/3 + c^2)`.
pub fn theta_binary_4(h: i64, tau: &HPComplex, ctx: &PrecisionContext) -> Result<ThetaValue> {
    let v = im_f64(tau)?;
    let f = binary_log_majorant(v);
    let cutoff = tail_start(&f, ctx.tail_tolerance(), 1.0, ctx.lattice_cutoff().powi(2))?;
    theta_binary_4_with_cutoff(h, tau, cutoff, ctx)
}

/// As [`theta_binary_4`], summing exactly the terms with `b^2 + 3c^2 < cutoff`.
pub fn theta_binary_4_with_cutoff(h: i64, tau: &HPComplex, cutoff: f64, ctx: &PrecisionContext) -> Result<ThetaValue> {
    let v = im_f64(tau)?;
    let p = ctx.bits();
    let tau = tau.with_prec(p);
    let e = two_pi_i_over_3(&tau);
    let h = h.rem_euclid(3);
    let sqrt3 = Float::with_val(p, 3).sqrt();
    let n_max = cutoff.ceil() as i64 - 1;
    let mut acc = HPComplex::zero(p);
    let c_max = ((n_max as f64 / 3.0).sqrt()) as i64 + 1;
    for c in -c_max..=c_max {
        let rest = n_max - 3 * c * c;
        if rest < 0 {
            continue;
        }
        let b_max = (rest as f64).sqrt() as i64 + 1;
        for b in -b_max..=b_max {
            let n = b * b + 3 * c * c;
            if n > n_max || (b - c).rem_euclid(2) != 0 || b.rem_euclid(3) != h {
                continue;
            }
            let w = HPComplex::new(Float::with_val(p, b), Float::with_val(p, &sqrt3 * -c));
            acc += &w.powi(3) * &q_third_power(n, &e);
        }
    }
    Ok(ThetaValue {
        value: acc,
        cutoff,
        tail_bound: Float::with_val(p, concave_tail(&binary_log_majorant(v), cutoff)),
    })
}

/// `sum_{h mod 3} v^(7/2) conj(theta_{7/2,h}) theta_{4,h}`.
pub fn shadow_combination(tau: &HPComplex, ctx: &PrecisionContext) -> Result<HPComplex> {
    let p = ctx.bits();
    let v72 = tau.im.clone().pow_f(3.5);
    let mut acc = HPComplex::zero(p);
    for h in 0..3 {
        let t7 = theta_unary(UnaryWeight::SevenHalves, h, tau, ctx)?;
        let t4 = theta_binary_4(h, tau, ctx)?;
        acc += &t7.value.conj() * &t4.value;
    }
    Ok(acc.scale(&Float::with_val(p, v72)))
}

/// `xi_{7/2} theta_{7/2,h} = 24 sqrt(pi/3) v^(3/2) conj(theta_{3/2,h})`; the
/// constant follows from the `1/v` term of the Hermite expansion.
pub fn xi_proportionality_constant(ctx: &PrecisionContext) -> Float {
    let p = ctx.bits();
    Float::with_val(p, ctx.pi() / 3u32).sqrt() * 24u32
}

/// Hermite splitting of `theta_{7/2,h}` into a holomorphic part and a
/// `v^-1 theta_{3/2,h}` part, and the resulting `xi` image.
#[derive(Clone, Debug)]
pub struct Example21Report {
    pub h: i64,
    pub theta: HPComplex,
    pub decomposition: HPComplex,
    pub decomposition_error: f64,
    /// `xi_{7/2} theta_{7/2,h}` by finite differences.
    pub xi: HPComplex,
    /// `v^(3/2) conj(theta_{3/2,h})`.
    pub target: HPComplex,
    /// `xi / target`, absent when the target vanishes.
    pub ratio: Option<HPComplex>,
    pub tail_bound: f64,
}

pub fn example_2_1_decomposition(h: i64, tau: &HPComplex, ctx: &PrecisionContext) -> Result<Example21Report> {
    let v = im_f64(tau)?;
    let p = ctx.bits();
    let tau = tau.with_prec(p);
    let t72 = theta_unary(UnaryWeight::SevenHalves, h, &tau, ctx)?;
    let t32 = theta_unary_with_cutoff(UnaryWeight::ThreeHalves, h, &tau, t72.cutoff, ctx)?;
    // sum a^3 q^(a^2/3) over the same range
    let e = two_pi_i_over_3(&tau);
    let a_max = t72.cutoff.ceil() as i64 - 1;
    let mut cubes = HPComplex::zero(p);
    for a in (-a_max..=a_max).filter(|a| a.rem_euclid(3) == h.rem_euclid(3)) {
        cubes += q_third_power(a * a, &e).scale_i64(a * a * a);
    }
    let pi = ctx.pi();
    let sqrt3 = Float::with_val(p, 3).sqrt();
    let k1 = Float::with_val(p, pi.clone().pow_f(1.5)) * 64u32 / Float::with_val(p, &sqrt3 * 3u32);
    let k2 = Float::with_val(p, pi.sqrt() * 24u32) / Float::with_val(p, &sqrt3 * &tau.im);
    let decomposition = &cubes.scale(&k1) - &t32.value.scale(&k2);
    let decomposition_error = (&t72.value - &decomposition).abs().to_f64();

    // d/d(conj tau) = (d/du + i d/dv) / 2
    let eval = |du: &Float, dv: &Float| -> Result<HPComplex> {
        let t = HPComplex::new(Float::with_val(p, &tau.re + du), Float::with_val(p, &tau.im + dv));
        Ok(theta_unary_with_cutoff(UnaryWeight::SevenHalves, h, &t, t72.cutoff, ctx)?.value)
    };
    let zero = Float::new(p);
    let step = v / 16.0;
    let d_u = richardson_derivative(&|s: &Float| eval(s, &zero), step, 4, p)?;
    let d_v = richardson_derivative(&|s: &Float| eval(&zero, s), step, 4, p)?;
    let d_bar = (&d_u + &d_v.mul_i()).div_real(&Float::with_val(p, 2));
    // xi_k f = 2i v^k conj(df/d conj tau)
    let vk = tau.im.clone().pow_f(3.5);
    let xi = d_bar.conj().mul_i().scale(&Float::with_val(p, vk * 2u32));
    let target = t32.value.conj().scale(&tau.im.clone().pow_f(1.5));
    let ratio = if target.abs().to_f64() > 10.0 * ctx.tail_tolerance() {
        Some(&xi / &target)
    } else {
        None
    };
    if !decomposition_error.is_finite() {
        return Err(Error::InvalidContext("non-finite theta value".into()));
    }
    Ok(Example21Report {
        h,
        theta: t72.value,
        decomposition,
        decomposition_error,
        xi,
        target,
        ratio,
        tail_bound: t72.tail_bound.to_f64() + t32.tail_bound.to_f64(),
    })
}
