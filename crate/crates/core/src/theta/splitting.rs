use std::f64::consts::PI;

use rug::Float;

use super::lattice::concave_tail;
use super::singular::{closed_form_term, forms_by_norm, norm_cutoff, norm_log_majorant};
use super::check_v;
use crate::error::Result;
use crate::modfuncs::rho;
use crate::numerics::{HPComplex, PrecisionContext};
use crate::quadforms::BinaryQuadraticForm;

/// Both sides of the unary-times-binary splitting of
/// `sum_D R^2 Theta*_{KM,D}(rho, v) e(-D tau)`.
#[derive(Clone, Debug)]
pub struct SplittingSides {
    /// Sum over forms, grouped by nothing, with `3N` below `3 * cutoff`.
    pub lhs: HPComplex,
    /// `8/(81 sqrt3) sum_h U_h B_h` from the two factor sums.
    pub rhs: HPComplex,
    /// Bound on the omitted lhs terms.
    pub lhs_tail: f64,
    /// Bound on the error of the truncated product.
    pub rhs_tail: f64,
    /// `N = Q_rho^2 + |Q(rho,1)|^2 / Im(rho)^2` cutoff of the lhs.
    pub cutoff: f64,
    pub lhs_terms: usize,
}

impl SplittingSides {
    pub fn difference(&self) -> f64 {
        (&self.lhs - &self.rhs).abs().to_f64()
    }

    pub fn combined_tail(&self) -> f64 {
        self.lhs_tail + self.rhs_tail
    }
}

/// Both sides with cutoffs chosen from the tail tolerance.
pub fn splitting_sides(tau: &HPComplex, ctx: &PrecisionContext) -> Result<SplittingSides> {
    let v = tau.im.to_f64();
    check_v(v)?;
    let (n0, _) = norm_cutoff(v, ctx)?;
    // N takes values in (1/3)Z; stay clear of ties.
    splitting_sides_with_cutoff(tau, (n0 - 0.5) / 3.0, ctx)
}

/// Both sides, the lhs over forms with `N <= cutoff` and each rhs factor
/// over its own box `a^2 <= 3 cutoff`, `b^2 + 3c^2 <= 3 cutoff`.
pub fn splitting_sides_with_cutoff(tau: &HPComplex, cutoff: f64, ctx: &PrecisionContext) -> Result<SplittingSides> {
    let v = tau.im.to_f64();
    check_v(v)?;
    let p = ctx.bits();
    let tau = tau.with_prec(p);
    let pi = ctx.pi();
    let n3 = 3.0 * cutoff;

    // lhs: Q_rho and Q(rho,1) straight from the form
    let z = rho(p);
    let minus_two_pi_i_tau = tau.mul_i().scale(&Float::with_val(p, &pi * -2i32));
    let forms = forms_by_norm(n3);
    let mut lhs = HPComplex::zero(p);
    for &[a, b, c] in &forms {
        let q = BinaryQuadraticForm::new(a, b, c);
        let d = b * b - 4 * a * c;
        lhs += &closed_form_term(&q, &z, v, ctx) * &minus_two_pi_i_tau.scale_i64(d).exp();
    }
    let lhs_tail = concave_tail(&norm_log_majorant(v), n3.floor() + 1.0);

    // rhs: U_h = sum_{a = h} (36 pi v^3 a - 32 pi^2 v^4 a^3) e(a^2 tau / 3),
    //      B_h = sum_{b = h, b = c (2)} (b - i sqrt3 c)^3 e(-(b^2/3 + c^2) conj tau)
    let vf = Float::with_val(p, v);
    let k1 = Float::with_val(p, &pi * 36u32) * Float::with_val(p, vf.clone().square() * &vf);
    let k3 = Float::with_val(p, pi.clone().square() * 32u32) * Float::with_val(p, vf.clone().square().square());
    let two_pi_i_third = tau.mul_i().scale(&(Float::with_val(p, &pi * 2u32) / 3u32));
    let minus_two_pi_i_third_bar = tau.conj().mul_i().scale(&(Float::with_val(p, &pi * -2i32) / 3u32));
    let sqrt3 = Float::with_val(p, 3).sqrt();
    let a_max = n3.sqrt().floor() as i64;
    let mut u = [HPComplex::zero(p), HPComplex::zero(p), HPComplex::zero(p)];
    for a in -a_max..=a_max {
        let coeff = Float::with_val(p, &k1 * a) - Float::with_val(p, &k3 * (a * a * a));
        u[a.rem_euclid(3) as usize] += two_pi_i_third.scale_i64(a * a).exp().scale(&coeff);
    }
    let mut bsum = [HPComplex::zero(p), HPComplex::zero(p), HPComplex::zero(p)];
    let c_max = (n3 / 3.0).sqrt().floor() as i64;
    for c in -c_max..=c_max {
        let b_max = (n3 - 3.0 * (c * c) as f64).max(0.0).sqrt().floor() as i64;
        for b in (-b_max..=b_max).filter(|b| (b - c).rem_euclid(2) == 0) {
            let w = HPComplex::new(Float::with_val(p, b), Float::with_val(p, &sqrt3 * -c));
            let e = minus_two_pi_i_third_bar.scale_i64(b * b + 3 * c * c).exp();
            bsum[b.rem_euclid(3) as usize] += &w.powi(3) * &e;
        }
    }
    let pref = Float::with_val(p, 8u32) / Float::with_val(p, &sqrt3 * 81u32);
    let mut rhs = HPComplex::zero(p);
    for h in 0..3 {
        rhs += &u[h] * &bsum[h];
    }
    let rhs = rhs.scale(&pref);

    // |U B - U_T B_T| <= |U_T| tB + tU |B_T| + tU tB, summed over h
    let unary = move |n: f64| {
        (2.0 * (36.0 * PI * v.powi(3) + 32.0 * PI * PI * v.powi(4))).ln() + 3.0 * n.ln() - 2.0 * PI * v * n * n / 3.0
    };
    let binary = move |n: f64| 4.31f64.ln() + 2.0 * n.ln() - 2.0 * PI * v * n / 3.0;
    let tu = concave_tail(&unary, (a_max + 1) as f64);
    let tb = concave_tail(&binary, n3.floor() + 1.0);
    let pref = 8.0 / (81.0 * 3f64.sqrt());
    let rhs_tail = pref
        * (0..3)
            .map(|h| u[h].abs().to_f64() * tb + tu * bsum[h].abs().to_f64() + tu * tb)
            .sum::<f64>();
    Ok(SplittingSides { lhs, rhs, lhs_tail, rhs_tail, cutoff, lhs_terms: forms.len() })
}
