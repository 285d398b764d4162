//! Integral binary quadratic forms, their CM points and class numbers.

use std::fmt;

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::numerics::{HPComplex, PrecisionContext};

/// Element of SL2(Z), acting on the upper half-plane by Moebius maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnimodularMatrix {
    pub a: Integer,
    pub b: Integer,
    pub c: Integer,
    pub d: Integer,
}

impl UnimodularMatrix {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    pub fn identity() -> Self {
        Self::new(1, 0, 0, 1)
    }

    /// `z -> -1/z`.
    pub fn s() -> Self {
        Self::new(0, -1, 1, 0)
    }

    /// `z -> z + k`.
    pub fn t(k: i64) -> Self {
        Self::new(1, k, 0, 1)
    }

    pub fn t_big(k: Integer) -> Self {
        Self {
            a: 1.into(),
            b: k,
            c: 0.into(),
            d: 1.into(),
        }
    }

    pub fn det(&self) -> Integer {
        Integer::from(&self.a * &self.d) - Integer::from(&self.b * &self.c)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            a: Integer::from(&self.a * &o.a) + Integer::from(&self.b * &o.c),
            b: Integer::from(&self.a * &o.b) + Integer::from(&self.b * &o.d),
            c: Integer::from(&self.c * &o.a) + Integer::from(&self.d * &o.c),
            d: Integer::from(&self.c * &o.b) + Integer::from(&self.d * &o.d),
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d.clone(),
            b: Integer::from(-&self.b),
            c: Integer::from(-&self.c),
            d: self.a.clone(),
        }
    }

    /// `(a z + b) / (c z + d)`.
    pub fn act(&self, z: &HPComplex) -> HPComplex {
        let p = z.prec();
        let f = |n: &Integer| Float::with_val(p, n);
        let num = z.scale(&f(&self.a)) + HPComplex::from_real(f(&self.b));
        let den = self.cocycle(z);
        num / den
    }

    /// `c z + d`.
    pub fn cocycle(&self, z: &HPComplex) -> HPComplex {
        let p = z.prec();
        z.scale(&Float::with_val(p, &self.c)) + HPComplex::from_real(Float::with_val(p, &self.d))
    }

    /// Equal as elements of PSL2(Z).
    pub fn eq_projective(&self, o: &Self) -> bool {
        self == o
            || (self.a == Integer::from(-&o.a)
                && self.b == Integer::from(-&o.b)
                && self.c == Integer::from(-&o.c)
                && self.d == Integer::from(-&o.d))
    }
}

/// The form `a x^2 + b x y + c y^2`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryQuadraticForm {
    pub a: Integer,
    pub b: Integer,
    pub c: Integer,
}

impl BinaryQuadraticForm {
    pub fn new(a: impl Into<Integer>, b: impl Into<Integer>, c: impl Into<Integer>) -> Self {
        Self {
            a: a.into(),
            b: b.into(),
            c: c.into(),
        }
    }

    pub fn discriminant(&self) -> Integer {
        Integer::from(&self.b * &self.b) - Integer::from(4) * Integer::from(&self.a * &self.c)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.discriminant() < 0 && self.a > 0
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0 && self.c == 0
    }

    /// `|b| <= a <= c`, with `b >= 0` when `|b| = a` or `a = c`.
    pub fn is_reduced(&self) -> bool {
        if !self.is_positive_definite() {
            return false;
        }
        let abs_b = Integer::from(self.b.abs_ref());
        if abs_b > self.a || self.a > self.c {
            return false;
        }
        if (abs_b == self.a || self.a == self.c) && self.b < 0 {
            return false;
        }
        true
    }

    pub fn negate(&self) -> Self {
        Self {
            a: Integer::from(-&self.a),
            b: Integer::from(-&self.b),
            c: Integer::from(-&self.c),
        }
    }

    /// `Q o g`, i.e. `(x, y) -> Q(g_a x + g_b y, g_c x + g_d y)`.
    ///
    /// CM points move contravariantly: `z_{Q o g} = g^{-1} z_Q`.
    pub fn transform(&self, g: &UnimodularMatrix) -> Self {
        let (a, b, c) = (&self.a, &self.b, &self.c);
        let (p, q, r, s) = (&g.a, &g.b, &g.c, &g.d);
        // Q(p x + q y, r x + s y)
        let na = Integer::from(a * Integer::from(p * p))
            + Integer::from(b * Integer::from(p * r))
            + Integer::from(c * Integer::from(r * r));
        let nb = Integer::from(2) * Integer::from(a * Integer::from(p * q))
            + Integer::from(b * (Integer::from(p * s) + Integer::from(q * r)))
            + Integer::from(2) * Integer::from(c * Integer::from(r * s));
        let nc = Integer::from(a * Integer::from(q * q))
            + Integer::from(b * Integer::from(q * s))
            + Integer::from(c * Integer::from(s * s));
        Self::new(na, nb, nc)
    }

    pub fn to_i64_triple(&self) -> Option<(i64, i64, i64)> {
        Some((self.a.to_i64()?, self.b.to_i64()?, self.c.to_i64()?))
    }
}

impl fmt::Display for BinaryQuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

impl fmt::Debug for BinaryQuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Root of `Q(z,1)` in the upper half-plane.
#[derive(Clone, Debug)]
pub struct CMPoint {
    pub value: HPComplex,
    pub source_form: BinaryQuadraticForm,
}

/// `Q(z,1) = a z^2 + b z + c`.
pub fn q_of(q: &BinaryQuadraticForm, z: &HPComplex) -> HPComplex {
    let p = z.prec();
    let a = Float::with_val(p, &q.a);
    let b = Float::with_val(p, &q.b);
    let c = HPComplex::from_real(Float::with_val(p, &q.c));
    // Horner: (a z + b) z + c
    let inner = z.scale(&a) + HPComplex::from_real(b);
    &inner * z + c
}

/// `Q_z = (a |z|^2 + b x + c) / y`.
pub fn q_z(q: &BinaryQuadraticForm, z: &HPComplex) -> Float {
    let p = z.prec();
    let mut num = Float::with_val(p, &q.a) * z.norm_sqr();
    num += Float::with_val(p, &q.b) * &z.re;
    num += &q.c;
    num / &z.im
}

/// Reduced representative of the class of `q`, and `g` with `q o g` equal to it.
pub fn reduce(q: &BinaryQuadraticForm) -> Result<(BinaryQuadraticForm, UnimodularMatrix)> {
    if !q.is_positive_definite() {
        return Err(Error::NotPositiveDefinite(q.to_string()));
    }
    let mut cur = q.clone();
    let mut g = UnimodularMatrix::identity();
    loop {
        // Bring b into (-a, a].
        let two_a = Integer::from(&cur.a * 2);
        let shifted = Integer::from(&cur.a - &cur.b);
        let (k, _) = shifted.div_rem_floor(two_a);
        if k != 0 {
            let t = UnimodularMatrix::t_big(k);
            cur = cur.transform(&t);
            g = g.mul(&t);
        }
        if cur.a > cur.c || (cur.a == cur.c && cur.b < 0) {
            let s = UnimodularMatrix::s();
            cur = cur.transform(&s);
            g = g.mul(&s);
            continue;
        }
        break;
    }
    debug_assert!(cur.is_reduced());
    Ok((cur, g))
}

/// One reduced form per SL2(Z)-class of positive definite forms of
/// discriminant `d`, including imprimitive ones. Empty when `d = 2, 3 mod 4`.
pub fn class_representatives(d: i64) -> Result<Vec<BinaryQuadraticForm>> {
    if d >= 0 {
        return Err(Error::InvalidDiscriminant(d, "class enumeration needs D < 0"));
    }
    let mut out = Vec::new();
    if d.rem_euclid(4) > 1 {
        return Ok(out);
    }
    let n = -d;
    let mut a = 1i64;
    while 3 * a * a <= n {
        for b in (-a + 1)..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (b < 0 && c == a) {
                continue;
            }
            out.push(BinaryQuadraticForm::new(a, b, c));
        }
        a += 1;
    }
    Ok(out)
}

/// Order of the stabilizer of a reduced form in PSL2(Z).
pub fn stabilizer_order(q: &BinaryQuadraticForm) -> Result<u32> {
    if !q.is_reduced() {
        return Err(Error::UnreducedForm(q.to_string()));
    }
    Ok(if q.a == q.b && q.b == q.c {
        3
    } else if q.b == 0 && q.a == q.c {
        2
    } else {
        1
    })
}

/// `z_Q = (-b + i sqrt|D|) / (2a)`.
pub fn cm_point(q: &BinaryQuadraticForm, ctx: &PrecisionContext) -> Result<CMPoint> {
    if !q.is_positive_definite() {
        return Err(Error::NotPositiveDefinite(q.to_string()));
    }
    let p = ctx.bits();
    let two_a = Float::with_val(p, &q.a) * 2u32;
    let re = Float::with_val(p, Integer::from(-&q.b)) / &two_a;
    let im = Float::with_val(p, -q.discriminant()).sqrt() / &two_a;
    Ok(CMPoint {
        value: HPComplex::new(re, im),
        source_form: q.clone(),
    })
}

/// `H(D) = sum over classes of 1/|stabilizer|`.
pub fn hurwitz_class_number(d: i64) -> Result<Rational> {
    if d >= 0 || d.rem_euclid(4) > 1 {
        return Err(Error::InvalidDiscriminant(d, "Hurwitz class numbers need D < 0, D = 0,1 mod 4"));
    }
    let mut h = Rational::new();
    for q in class_representatives(d)? {
        h += Rational::from((1, stabilizer_order(&q)?));
    }
    Ok(h)
}
