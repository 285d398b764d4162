//! Truncated q-expansions with rational exponents on a fixed grid.
//!
//! Every exponent is an integer multiple of 1/12. That grid contains all the
//! exponents met here: integral ones for j, E2, E4, E6 and Delta, thirds for
//! the unary and binary thetas.

use std::fmt;
use std::ops::{Add, Sub};

use rug::Float;

use super::complex::HPComplex;
use crate::error::{Error, Result};

/// Common denominator of every exponent.
pub const EXPONENT_DENOMINATOR: i64 = 12;

/// An exponent `k/12`, stored as `k`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct QExponent(i64);

impl QExponent {
    pub const ZERO: QExponent = QExponent(0);

    pub fn integer(n: i64) -> Self {
        QExponent(n * EXPONENT_DENOMINATOR)
    }

    pub fn from_twelfths(k: i64) -> Self {
        QExponent(k)
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 || (num * EXPONENT_DENOMINATOR) % den != 0 {
            return Err(Error::DenominatorOverflow {
                num,
                den,
                bound: EXPONENT_DENOMINATOR,
            });
        }
        Ok(QExponent(num * EXPONENT_DENOMINATOR / den))
    }

    pub fn twelfths(self) -> i64 {
        self.0
    }

    /// Reduced `(numerator, denominator)` with positive denominator.
    pub fn as_ratio(self) -> (i64, i64) {
        let g = gcd(self.0.unsigned_abs(), EXPONENT_DENOMINATOR as u64).max(1) as i64;
        (self.0 / g, EXPONENT_DENOMINATOR / g)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / EXPONENT_DENOMINATOR as f64
    }
}

impl Add for QExponent {
    type Output = QExponent;
    fn add(self, rhs: QExponent) -> QExponent {
        QExponent(self.0 + rhs.0)
    }
}

impl Sub for QExponent {
    type Output = QExponent;
    fn sub(self, rhs: QExponent) -> QExponent {
        QExponent(self.0 - rhs.0)
    }
}

impl fmt::Display for QExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_ratio() {
            (n, 1) => write!(f, "{n}"),
            (n, d) => write!(f, "{n}/{d}"),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `sum_e c_e q^e + O(q^truncation)`.
///
/// Terms are strictly ascending, nonzero, and below the truncation.
/// `error_budget` bounds the absolute error of every stored coefficient.
#[derive(Clone, Debug)]
pub struct QExpansion {
    terms: Vec<(QExponent, HPComplex)>,
    truncation: QExponent,
    error_budget: f64,
    prec: u32,
}

impl QExpansion {
    pub fn new(
        terms: impl IntoIterator<Item = (QExponent, HPComplex)>,
        truncation: QExponent,
        prec: u32,
    ) -> Self {
        let mut collected: Vec<(QExponent, HPComplex)> = terms
            .into_iter()
            .filter(|(e, _)| *e < truncation)
            .collect();
        collected.sort_by_key(|(e, _)| *e);
        let mut merged: Vec<(QExponent, HPComplex)> = Vec::with_capacity(collected.len());
        for (e, c) in collected {
            match merged.last_mut() {
                Some((last, acc)) if *last == e => *acc += &c,
                _ => merged.push((e, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        Self {
            terms: merged,
            truncation,
            error_budget: 0.0,
            prec,
        }
    }

    pub fn zero(truncation: QExponent, prec: u32) -> Self {
        Self::new(std::iter::empty(), truncation, prec)
    }

    pub fn one(truncation: QExponent, prec: u32) -> Self {
        Self::monomial(QExponent::ZERO, HPComplex::one(prec), truncation)
    }

    pub fn monomial(exponent: QExponent, coeff: HPComplex, truncation: QExponent) -> Self {
        let prec = coeff.prec();
        Self::new(std::iter::once((exponent, coeff)), truncation, prec)
    }

    /// Integer coefficients `coeffs[n]` at `q^(start + n)`.
    pub fn from_integer_coefficients(start: i64, coeffs: &[i64], truncation: i64, prec: u32) -> Self {
        Self::new(
            coeffs.iter().enumerate().map(|(n, &c)| {
                (
                    QExponent::integer(start + n as i64),
                    HPComplex::from_real(Float::with_val(prec, c)),
                )
            }),
            QExponent::integer(truncation),
            prec,
        )
    }

    pub fn with_error_budget(mut self, budget: f64) -> Self {
        self.error_budget = budget;
        self
    }

    pub fn terms(&self) -> &[(QExponent, HPComplex)] {
        &self.terms
    }

    pub fn truncation(&self) -> QExponent {
        self.truncation
    }

    pub fn error_budget(&self) -> f64 {
        self.error_budget
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest exponent with a nonzero coefficient; the truncation for the
    /// zero series.
    pub fn order(&self) -> QExponent {
        self.terms.first().map(|(e, _)| *e).unwrap_or(self.truncation)
    }

    pub fn coefficient(&self, e: QExponent) -> HPComplex {
        match self.terms.binary_search_by_key(&e, |(x, _)| *x) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => HPComplex::zero(self.prec),
        }
    }

    pub fn truncate(&self, truncation: QExponent) -> Self {
        let t = truncation.min(self.truncation);
        Self {
            terms: self.terms.iter().filter(|(e, _)| *e < t).cloned().collect(),
            truncation: t,
            error_budget: self.error_budget,
            prec: self.prec,
        }
    }

    pub fn scale(&self, k: &HPComplex) -> Self {
        let mag = k.abs().to_f64();
        let mut out = Self::new(
            self.terms.iter().map(|(e, c)| (*e, c * k)),
            self.truncation,
            self.prec,
        );
        out.error_budget = self.error_budget * mag;
        out
    }

    pub fn scale_real(&self, k: &Float) -> Self {
        self.scale(&HPComplex::from_real(k.clone()))
    }

    /// Multiplication by `q^shift`.
    pub fn shift(&self, shift: QExponent) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (*e + shift, c.clone())).collect(),
            truncation: self.truncation + shift,
            error_budget: self.error_budget,
            prec: self.prec,
        }
    }

    /// `q d/dq` applied termwise.
    pub fn q_derivative(&self) -> Self {
        let mut out = Self::new(
            self.terms.iter().map(|(e, c)| {
                let (n, d) = e.as_ratio();
                let mut f = Float::with_val(self.prec, n);
                f /= d;
                (*e, c.scale(&f))
            }),
            self.truncation,
            self.prec,
        );
        out.error_budget = self.error_budget * self.truncation.to_f64().abs().max(1.0);
        out
    }

    fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.abs().to_f64()).sum()
    }

    /// Coefficientwise sum; the truncation is the smaller one.
    pub fn add(&self, other: &Self) -> Self {
        let t = self.truncation.min(other.truncation);
        let prec = self.prec.max(other.prec);
        let mut out = Self::new(
            self.terms.iter().chain(other.terms.iter()).cloned(),
            t,
            prec,
        );
        out.error_budget = self.error_budget + other.error_budget;
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let neg = Self {
            terms: other.terms.iter().map(|(e, c)| (*e, -c)).collect(),
            truncation: other.truncation,
            error_budget: other.error_budget,
            prec: other.prec,
        };
        self.add(&neg)
    }

    /// Cauchy product, truncated where either factor's truncation starts to
    /// matter.
    pub fn multiply(&self, other: &Self) -> Self {
        let t = (self.truncation + other.order()).min(other.truncation + self.order());
        let prec = self.prec.max(other.prec);
        let mut acc: Vec<(QExponent, HPComplex)> = Vec::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = *ea + *eb;
                if e < t {
                    acc.push((e, ca * cb));
                }
            }
        }
        let mut out = Self::new(acc, t, prec);
        let (na, nb) = (self.l1_norm(), other.l1_norm());
        let rounding = na * nb * 2f64.powi(-(prec as i32) + 4);
        out.error_budget = self.error_budget * nb + other.error_budget * na + rounding;
        out
    }

    /// Multiplicative inverse `g` with `f g = 1 + O(q^(truncation - order))`
    /// after removing the leading monomials.
    pub fn invert(&self) -> Result<Self> {
        let Some((lead_exp, lead)) = self.terms.first() else {
            return Err(Error::ZeroLeadingCoefficient);
        };
        if lead.is_zero() {
            return Err(Error::ZeroLeadingCoefficient);
        }
        let m = *lead_exp;
        let span = (self.truncation - m).twelfths();
        let mut step = span.unsigned_abs();
        for (e, _) in &self.terms {
            step = gcd(step, (*e - m).twelfths().unsigned_abs());
        }
        let step = step.max(1) as i64;
        let len = ((span + step - 1) / step) as usize;
        let mut a = vec![HPComplex::zero(self.prec); len];
        for (e, c) in &self.terms {
            let k = ((*e - m).twelfths() / step) as usize;
            if k < len {
                a[k] = c.clone();
            }
        }
        let inv_lead = lead.recip();
        let mut g: Vec<HPComplex> = Vec::with_capacity(len);
        g.push(inv_lead.clone());
        for k in 1..len {
            let mut s = HPComplex::zero(self.prec);
            for i in 1..=k {
                if !a[i].is_zero() {
                    s += &a[i] * &g[k - i];
                }
            }
            g.push(-(&s * &inv_lead));
        }
        let shift = QExponent::ZERO - m;
        let truncation = QExponent::from_twelfths(shift.twelfths() + len as i64 * step)
            .min(self.truncation - m - m);
        let mut out = Self::new(
            g.into_iter()
                .enumerate()
                .map(|(k, c)| (QExponent::from_twelfths(shift.twelfths() + k as i64 * step), c)),
            truncation,
            self.prec,
        );
        let inv_mag = inv_lead.abs().to_f64();
        let gnorm = out.l1_norm();
        out.error_budget = self.error_budget * gnorm * gnorm
            + gnorm * inv_mag * 2f64.powi(-(self.prec as i32) + 8);
        Ok(out)
    }

    /// Value at `tau`, with `q^e = exp(2 pi i e tau)`.
    pub fn evaluate(&self, tau: &HPComplex) -> HPComplex {
        let prec = self.prec.max(tau.prec());
        if self.terms.is_empty() {
            return HPComplex::zero(prec);
        }
        let e0 = self.terms[0].0;
        let mut step = 0u64;
        for (e, _) in &self.terms {
            step = gcd(step, (*e - e0).twelfths().unsigned_abs());
        }
        let step = step.max(1) as i64;
        let two_pi_i_tau = tau
            .mul_i()
            .scale(&Float::with_val(prec, rug::float::Constant::Pi))
            .scale_i64(2);
        let unit = two_pi_i_tau
            .scale_i64(step)
            .div_real(&Float::with_val(prec, EXPONENT_DENOMINATOR))
            .exp();
        let mut power = two_pi_i_tau
            .scale_i64(e0.twelfths())
            .div_real(&Float::with_val(prec, EXPONENT_DENOMINATOR))
            .exp();
        let mut idx = 0i64;
        let mut sum = HPComplex::zero(prec);
        for (e, c) in &self.terms {
            let k = (*e - e0).twelfths() / step;
            while idx < k {
                power = &power * &unit;
                idx += 1;
            }
            sum += c * &power;
        }
        sum
    }
}

/// `f + g` truncated at the smaller truncation.
pub fn series_add(f: &QExpansion, g: &QExpansion) -> QExpansion {
    f.add(g)
}

/// Truncated Cauchy product.
pub fn series_multiply(f: &QExpansion, g: &QExpansion) -> QExpansion {
    f.multiply(g)
}

/// Multiplicative inverse; fails on a vanishing leading coefficient.
pub fn series_invert(f: &QExpansion) -> Result<QExpansion> {
    f.invert()
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 160;

    fn ints(start: i64, c: &[i64], trunc: i64) -> QExpansion {
        QExpansion::from_integer_coefficients(start, c, trunc, P)
    }

    fn int_coeffs(f: &QExpansion, from: i64, to: i64) -> Vec<i64> {
        (from..to)
            .map(|n| {
                let c = f.coefficient(QExponent::integer(n));
                c.re.to_f64().round() as i64
            })
            .collect()
    }

    #[test]
    fn exponent_grid() {
        assert_eq!(QExponent::from_ratio(2, 3).unwrap().twelfths(), 8);
        assert_eq!(QExponent::from_ratio(1, 12).unwrap().as_ratio(), (1, 12));
        assert!(QExponent::from_ratio(1, 5).is_err());
        assert_eq!(format!("{}", QExponent::from_ratio(4, 6).unwrap()), "2/3");
        assert_eq!(format!("{}", QExponent::integer(-1)), "-1");
    }

    #[test]
    fn add_disjoint_supports() {
        let f = ints(-1, &[1], 10);
        let g = ints(0, &[744], 10);
        let s = series_add(&f, &g);
        assert_eq!(int_coeffs(&s, -1, 1), vec![1, 744]);
        let z = QExpansion::zero(QExponent::integer(10), P);
        let s2 = series_add(&f, &z);
        assert_eq!(s2.terms().len(), 1);
    }

    #[test]
    fn multiply_difference_of_squares() {
        let f = ints(0, &[1, 1], 10);
        let g = ints(0, &[1, -1], 10);
        let p = series_multiply(&f, &g);
        assert_eq!(int_coeffs(&p, 0, 4), vec![1, 0, -1, 0]);
    }

    #[test]
    fn truncation_of_product_tracks_orders() {
        let f = ints(1, &[1, 2], 5);
        let g = ints(-1, &[1, 3], 7);
        let p = series_multiply(&f, &g);
        // f known to q^5, g starts at q^-1: product known to q^4.
        assert_eq!(p.truncation(), QExponent::integer(4));
    }

    #[test]
    fn third_exponents_stay_on_grid() {
        let third = QExponent::from_ratio(1, 3).unwrap();
        let f = QExpansion::monomial(third, HPComplex::one(P), QExponent::integer(5));
        let sq = series_multiply(&f, &f);
        assert_eq!(sq.order(), QExponent::from_ratio(2, 3).unwrap());
        assert_eq!(sq.order().as_ratio(), (2, 3));
    }

    #[test]
    fn geometric_series() {
        let f = ints(0, &[1, -1], 8);
        let g = series_invert(&f).unwrap();
        assert_eq!(int_coeffs(&g, 0, 8), vec![1; 8]);
    }

    #[test]
    fn invert_with_leading_pole() {
        let f = ints(1, &[1, -24, 252], 4);
        let g = series_invert(&f).unwrap();
        assert_eq!(g.order(), QExponent::integer(-1));
        assert_eq!(int_coeffs(&g, -1, 1), vec![1, 24]);
        assert_eq!(g.truncation(), QExponent::integer(2));
    }

    #[test]
    fn invert_rejects_zero() {
        let z = QExpansion::zero(QExponent::integer(4), P);
        assert_eq!(series_invert(&z).unwrap_err(), Error::ZeroLeadingCoefficient);
    }

    #[test]
    fn evaluate_geometric() {
        // sum_{n<40} q^n at tau = i: 1/(1-q) up to q^40.
        let f = ints(0, &[1; 40], 40);
        let tau = HPComplex::from_f64(P, 0.0, 1.0);
        let v = f.evaluate(&tau);
        let q = (-2.0 * std::f64::consts::PI).exp();
        assert!((v.re.to_f64() - 1.0 / (1.0 - q)).abs() < 1e-15);
    }
}
