use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rug::Float;

/// Complex number with MPFR real and imaginary parts.
///
/// Results of binary operations carry the larger of the two operand
/// precisions.
#[derive(Clone, PartialEq)]
pub struct HPComplex {
    pub re: Float,
    pub im: Float,
}

impl HPComplex {
    pub fn new(re: Float, im: Float) -> Self {
        Self { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Self::new(Float::new(prec), Float::new(prec))
    }

    pub fn one(prec: u32) -> Self {
        Self::new(Float::with_val(prec, 1), Float::new(prec))
    }

    pub fn i(prec: u32) -> Self {
        Self::new(Float::new(prec), Float::with_val(prec, 1))
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Self::new(Float::with_val(prec, re), Float::with_val(prec, im))
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::new(re.prec());
        Self { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    /// Copy at a new precision (rounded when narrowing).
    pub fn with_prec(&self, prec: u32) -> Self {
        Self::new(Float::with_val(prec, &self.re), Float::with_val(prec, &self.im))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), Float::with_val(self.im.prec(), -&self.im))
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        let mut s = Float::with_val(p, &self.re * &self.re);
        s += &self.im * &self.im;
        s
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn scale(&self, k: &Float) -> Self {
        let p = self.prec().max(k.prec());
        Self::new(Float::with_val(p, &self.re * k), Float::with_val(p, &self.im * k))
    }

    pub fn scale_i64(&self, k: i64) -> Self {
        let p = self.prec();
        Self::new(Float::with_val(p, &self.re * k), Float::with_val(p, &self.im * k))
    }

    pub fn div_real(&self, k: &Float) -> Self {
        let p = self.prec().max(k.prec());
        Self::new(Float::with_val(p, &self.re / k), Float::with_val(p, &self.im / k))
    }

    /// Multiplication by i.
    pub fn mul_i(&self) -> Self {
        Self::new(Float::with_val(self.im.prec(), -&self.im), self.re.clone())
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sqr();
        let p = self.prec();
        Self::new(
            Float::with_val(p, &self.re / &n),
            Float::with_val(p, -Float::with_val(p, &self.im / &n)),
        )
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        let m = self.re.clone().exp();
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        Self::new(Float::with_val(p, &m * &c), Float::with_val(p, &m * &s))
    }

    /// `e^{i t}` for real `t`.
    pub fn cis(t: &Float) -> Self {
        let (s, c) = t.clone().sin_cos(Float::new(t.prec()));
        Self::new(c, s)
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.is_zero() {
            return Self::zero(p);
        }
        let r = self.abs();
        let mut re = Float::with_val(p, &r + &self.re);
        re /= 2;
        let re = re.sqrt();
        let mut im = Float::with_val(p, &r - &self.re);
        im /= 2;
        let mut im = im.sqrt();
        if self.im.is_sign_negative() {
            im = -im;
        }
        Self::new(re, im)
    }

    pub fn powi(&self, n: i64) -> Self {
        let p = self.prec();
        if n < 0 {
            return self.recip().powi(-n);
        }
        let mut base = self.clone();
        let mut acc = Self::one(p);
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Decimal rendering with `digits` significant digits per component.
    pub fn to_string_digits(&self, digits: usize) -> String {
        let re = self.re.to_string_radix(10, Some(digits));
        let im = self.im.to_string_radix(10, Some(digits));
        if self.im.is_sign_negative() {
            format!("{re}{im}i")
        } else {
            format!("{re}+{im}i")
        }
    }
}

impl fmt::Debug for HPComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_digits(20))
    }
}

impl fmt::Display for HPComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_digits(20))
    }
}

impl<'a> Add<&'a HPComplex> for &'a HPComplex {
    type Output = HPComplex;
    fn add(self, rhs: &'a HPComplex) -> HPComplex {
        let p = self.prec().max(rhs.prec());
        HPComplex::new(
            Float::with_val(p, &self.re + &rhs.re),
            Float::with_val(p, &self.im + &rhs.im),
        )
    }
}

impl<'a> Sub<&'a HPComplex> for &'a HPComplex {
    type Output = HPComplex;
    fn sub(self, rhs: &'a HPComplex) -> HPComplex {
        let p = self.prec().max(rhs.prec());
        HPComplex::new(
            Float::with_val(p, &self.re - &rhs.re),
            Float::with_val(p, &self.im - &rhs.im),
        )
    }
}

impl<'a> Mul<&'a HPComplex> for &'a HPComplex {
    type Output = HPComplex;
    fn mul(self, rhs: &'a HPComplex) -> HPComplex {
        let p = self.prec().max(rhs.prec());
        let mut re = Float::with_val(p, &self.re * &rhs.re);
        re -= Float::with_val(p, &self.im * &rhs.im);
        let mut im = Float::with_val(p, &self.re * &rhs.im);
        im += Float::with_val(p, &self.im * &rhs.re);
        HPComplex::new(re, im)
    }
}

impl<'a> Div<&'a HPComplex> for &'a HPComplex {
    type Output = HPComplex;
    fn div(self, rhs: &'a HPComplex) -> HPComplex {
        let p = self.prec().max(rhs.prec());
        let n = rhs.norm_sqr();
        let mut re = Float::with_val(p, &self.re * &rhs.re);
        re += Float::with_val(p, &self.im * &rhs.im);
        let mut im = Float::with_val(p, &self.im * &rhs.re);
        im -= Float::with_val(p, &self.re * &rhs.im);
        re /= &n;
        im /= &n;
        HPComplex::new(re, im)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<HPComplex> for HPComplex {
            type Output = HPComplex;
            fn $m(self, rhs: HPComplex) -> HPComplex {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a HPComplex> for HPComplex {
            type Output = HPComplex;
            fn $m(self, rhs: &'a HPComplex) -> HPComplex {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<HPComplex> for &'a HPComplex {
            type Output = HPComplex;
            fn $m(self, rhs: HPComplex) -> HPComplex {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for HPComplex {
    type Output = HPComplex;
    fn neg(self) -> HPComplex {
        HPComplex::new(-self.re, -self.im)
    }
}

impl Neg for &HPComplex {
    type Output = HPComplex;
    fn neg(self) -> HPComplex {
        -(self.clone())
    }
}

impl AddAssign<&HPComplex> for HPComplex {
    fn add_assign(&mut self, rhs: &HPComplex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl AddAssign<HPComplex> for HPComplex {
    fn add_assign(&mut self, rhs: HPComplex) {
        *self += &rhs;
    }
}

impl SubAssign<&HPComplex> for HPComplex {
    fn sub_assign(&mut self, rhs: &HPComplex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&HPComplex> for HPComplex {
    fn mul_assign(&mut self, rhs: &HPComplex) {
        *self = &*self * rhs;
    }
}

impl Mul<&Float> for &HPComplex {
    type Output = HPComplex;
    fn mul(self, rhs: &Float) -> HPComplex {
        self.scale(rhs)
    }
}

impl Mul<&Float> for HPComplex {
    type Output = HPComplex;
    fn mul(self, rhs: &Float) -> HPComplex {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 200;

    fn c(re: f64, im: f64) -> HPComplex {
        HPComplex::from_f64(P, re, im)
    }

    fn close(a: &HPComplex, b: &HPComplex, tol: f64) -> bool {
        (a - b).abs().to_f64() <= tol
    }

    #[test]
    fn field_operations() {
        let a = c(1.5, -2.0);
        let b = c(-0.25, 3.0);
        let q = &(&a * &b) / &b;
        assert!(close(&q, &a, 1e-55));
        assert!(close(&(&(&a + &b) - &b), &a, 1e-55));
        assert!(close(&(&a * &a.recip()), &HPComplex::one(P), 1e-55));
    }

    #[test]
    fn exp_of_i_pi_is_minus_one() {
        let pi = Float::with_val(P, rug::float::Constant::Pi);
        let z = HPComplex::new(Float::new(P), pi).exp();
        assert!(close(&z, &c(-1.0, 0.0), 1e-55));
    }

    #[test]
    fn sqrt_and_powers() {
        let z = c(-3.0, 4.0);
        let r = z.sqrt();
        assert!(close(&(&r * &r), &z, 1e-55));
        assert!(r.re.to_f64() > 0.0);
        assert!(close(&z.powi(3), &(&(&z * &z) * &z), 1e-50));
        assert!(close(&z.powi(-2), &(&z * &z).recip(), 1e-55));
    }

    #[test]
    fn conjugation_and_modulus() {
        let z = c(3.0, -4.0);
        assert_eq!(z.abs().to_f64(), 5.0);
        assert_eq!(z.conj().im.to_f64(), 4.0);
        assert!(close(&z.mul_i(), &c(4.0, 3.0), 0.0));
    }
}
