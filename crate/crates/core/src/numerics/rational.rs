use rug::{Float, Integer, Rational};

/// First continued-fraction convergent `p/q` of `x` with `q <= max_den` and
/// `|x - p/q| < tol`.
pub fn reconstruct_rational(x: &Float, max_den: &Integer, tol: &Float) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    let prec = x.prec();
    let mut rem = x.clone();
    let (mut p0, mut q0) = (Integer::from(1), Integer::from(0));
    let (mut p1, mut q1) = (Integer::from(0), Integer::from(1));
    for _ in 0..(prec as usize) {
        let a = rem.clone().floor();
        let ai = a.to_integer()?;
        let p2 = Integer::from(&ai * &p0) + &p1;
        let q2 = Integer::from(&ai * &q0) + &q1;
        if q2 > *max_den {
            return None;
        }
        let approx = Rational::from((p2.clone(), q2.clone()));
        let err = Float::with_val(prec, x - &approx).abs();
        if err < *tol {
            return Some(approx);
        }
        p1 = p0;
        q1 = q0;
        p0 = p2;
        q0 = q2;
        let frac = Float::with_val(prec, &rem - &a);
        if frac.is_zero() {
            return None;
        }
        rem = frac.recip();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_fractions() {
        let prec = 200;
        let tol = Float::with_val(prec, 1e-40);
        let bound = Integer::from(Integer::u_pow_u(10, 20));
        for (n, d) in [(-1i64, 165888i64), (23, 331776), (1, 3456), (-1, 3375), (7, 1)] {
            let x = Float::with_val(prec, n) / d;
            let r = reconstruct_rational(&x, &bound, &tol).unwrap();
            assert_eq!(r, Rational::from((n, d)));
        }
    }

    #[test]
    fn rejects_irrational_within_bound() {
        let prec = 200;
        let x = Float::with_val(prec, 2).sqrt();
        let r = reconstruct_rational(&x, &Integer::from(Integer::u_pow_u(10, 10)), &Float::with_val(prec, 1e-40));
        assert!(r.is_none());
    }
}
