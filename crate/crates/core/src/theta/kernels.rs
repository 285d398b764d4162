use std::fmt;
use std::str::FromStr;

use rug::float::Constant;
use rug::Float;

use super::jet::Jet;
use crate::error::{Error, Result};
use crate::numerics::{HPComplex, PrecisionContext};
use crate::quadforms::BinaryQuadraticForm;

/// The three Kudla-Millson kernels, each including the Gaussian factor
/// `exp(-4 pi v |Q(z,1)|^2 / y^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `(4 v Q_z^2 - 1/(2 pi))`, weight 0 in `z`.
    PhiKm,
    /// `-v^2/(2 y^2) conj(Q(z,1)) Q_z`, weight 2 in `z`.
    PhiStar,
    /// `Q_z / (2 pi Q(z,1))`, weight 2 in `z`, singular at `z_Q`.
    Eta,
}

impl KernelKind {
    pub fn weight(self) -> i64 {
        match self {
            Self::PhiKm => 0,
            Self::PhiStar | Self::Eta => 2,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PhiKm => "phi_KM",
            Self::PhiStar => "phi*_KM",
            Self::Eta => "eta_KM",
        })
    }
}

impl FromStr for KernelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "phi" | "phi_km" => Ok(Self::PhiKm),
            "phi*" | "phistar" | "phi*_km" => Ok(Self::PhiStar),
            "eta" | "eta_km" => Ok(Self::Eta),
            other => Err(format!("unknown kernel {other:?}")),
        }
    }
}

/// Kernel value at `(Q, z, v)`.
pub fn kernel(kind: KernelKind, q: &BinaryQuadraticForm, z: &HPComplex, v: f64, ctx: &PrecisionContext) -> Result<HPComplex> {
    raised_kernel(kind, q, z, v, 0, ctx)
}

/// `R^m` of the kernel at `z`, raising through weights `k, k+2, ..., k+2m-2`.
pub fn raised_kernel(
    kind: KernelKind,
    q: &BinaryQuadraticForm,
    z: &HPComplex,
    v: f64,
    m: usize,
    ctx: &PrecisionContext,
) -> Result<HPComplex> {
    super::check_v(v)?;
    if !(z.im.is_sign_positive() && !z.im.is_zero()) {
        return Err(Error::NotInUpperHalfPlane(z.im.to_string()));
    }
    let (a, b, c) = q
        .to_i64_triple()
        .ok_or_else(|| Error::InvalidContext(format!("form {q} exceeds 64-bit coefficients")))?;
    let p = ctx.bits();
    let z = z.with_prec(p);
    let len = m + 1;
    let parts = Parts::new(a, b, c, &z, v, len, p);
    let mut f = match kind {
        KernelKind::PhiKm => parts.phi_km(),
        KernelKind::PhiStar => parts.phi_star(),
        KernelKind::Eta => {
            // Q(z,1) = 0 up to rounding relative to the size of the form.
            let scale = (a.unsigned_abs() + b.unsigned_abs() + c.unsigned_abs()) as f64
                * (1.0 + z.norm_sqr().to_f64());
            if parts.q.value().abs().to_f64() <= scale * ctx.epsilon().sqrt() {
                return Err(Error::KernelPole(q.to_string()));
            }
            parts.eta()
        }
    };
    let mut weight = kind.weight();
    for _ in 0..m {
        f = f.raise(weight, &parts.inv_y.truncate(f.len()));
        weight += 2;
    }
    Ok(f.value().clone())
}

/// Building blocks as jets in `z` about `z0`, with `w = conj(z0)` frozen.
struct Parts {
    prec: u32,
    v: Float,
    inv_y: Jet,
    q: Jet,
    q_bar: HPComplex,
    q_z: Jet,
    gauss: Jet,
}

impl Parts {
    fn new(a: i64, b: i64, c: i64, z0: &HPComplex, v: f64, len: usize, p: u32) -> Self {
        let w = z0.conj();
        let one = HPComplex::one(p);
        let z = Jet::linear(z0.clone(), one.clone(), len);
        // y = (z - w) / (2i)
        let half_i = HPComplex::new(Float::new(p), Float::with_val(p, -0.5));
        let y = Jet::linear(HPComplex::from_real(z0.im.clone()), half_i, len);
        let inv_y = y.recip();
        let (fa, fb, fc) = (
            HPComplex::from_real(Float::with_val(p, a)),
            HPComplex::from_real(Float::with_val(p, b)),
            HPComplex::from_real(Float::with_val(p, c)),
        );
        let q = z.mul(&z).scale(&fa).add(&z.scale(&fb)).add(&Jet::constant(fc.clone(), len));
        let q_bar = &(&(&(&w * &w) * &fa) + &(&w * &fb)) + &fc;
        // Q_z = (a z w + b (z + w)/2 + c) / y
        let half = Float::with_val(p, 0.5);
        let num = z
            .scale(&(&w * &fa))
            .add(&z.add(&Jet::constant(w.clone(), len)).scale(&fb).scale_real(&half))
            .add(&Jet::constant(fc, len));
        let q_z = num.mul(&inv_y);
        let v = Float::with_val(p, v);
        let minus_four_pi_v = Float::with_val(p, Constant::Pi) * Float::with_val(p, &v * -4i32);
        let s = q.mul(&inv_y).mul(&inv_y).scale(&q_bar);
        let gauss = s.scale_real(&minus_four_pi_v).exp();
        Self { prec: p, v, inv_y, q, q_bar, q_z, gauss }
    }

    fn two_pi(&self) -> Float {
        Float::with_val(self.prec, Constant::Pi) * 2u32
    }

    fn phi_km(&self) -> Jet {
        let len = self.q.len();
        let four_v = HPComplex::from_real(Float::with_val(self.prec, &self.v * 4u32));
        let shift = HPComplex::from_real(-self.two_pi().recip());
        self.q_z
            .mul(&self.q_z)
            .scale(&four_v)
            .add(&Jet::constant(shift, len))
            .mul(&self.gauss)
    }

    fn phi_star(&self) -> Jet {
        let k = Float::with_val(self.prec, self.v.square_ref()) / -2i32;
        self.q_z
            .mul(&self.inv_y)
            .mul(&self.inv_y)
            .mul(&self.gauss)
            .scale(&self.q_bar.scale(&k))
    }

    fn eta(&self) -> Jet {
        self.q_z
            .mul(&self.q.recip())
            .mul(&self.gauss)
            .scale_real(&self.two_pi().recip())
    }
}
