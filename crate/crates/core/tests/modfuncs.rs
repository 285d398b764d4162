use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recipj::modfuncs::*;
use recipj::numerics::{HPComplex, PrecisionContext, QExponent};
use recipj::quadforms::UnimodularMatrix;
use rug::ops::Pow;
use rug::{Float, Integer};

fn ctx() -> PrecisionContext {
    PrecisionContext::new(40).unwrap()
}

fn z(c: &PrecisionContext, re: f64, im: f64) -> HPComplex {
    HPComplex::from_f64(c.bits(), re, im)
}

fn sigma(n: u64, k: u32) -> Integer {
    (1..=n).filter(|d| n % d == 0).map(|d| Integer::from(d).pow(k)).sum()
}

/// Exact coefficients of j from integer E4, E6 and integer long division.
fn j_oracle(terms: usize) -> Vec<Integer> {
    let e4: Vec<Integer> = (0..terms as u64)
        .map(|n| if n == 0 { Integer::from(1) } else { sigma(n, 3) * 240 })
        .collect();
    let e6: Vec<Integer> = (0..terms as u64)
        .map(|n| if n == 0 { Integer::from(1) } else { sigma(n, 5) * -504 })
        .collect();
    let mul = |a: &[Integer], b: &[Integer]| {
        let mut c = vec![Integer::new(); terms];
        for i in 0..terms {
            for k in 0..=i {
                c[i] += Integer::from(&a[k] * &b[i - k]);
            }
        }
        c
    };
    let e4c = mul(&mul(&e4, &e4), &e4);
    let e6s = mul(&e6, &e6);
    // Delta / q, exactly divisible by 1728.
    let d: Vec<Integer> = (1..terms)
        .map(|n| Integer::from(&e4c[n] - &e6s[n]) / 1728)
        .chain(std::iter::once(Integer::new()))
        .collect();
    let mut inv = vec![Integer::new(); terms];
    inv[0] = Integer::from(1);
    for k in 1..terms {
        let mut s = Integer::new();
        for i in 1..=k {
            s += Integer::from(&d[i] * &inv[k - i]);
        }
        inv[k] = -s;
    }
    // j q = E4^3 / (Delta / q)
    mul(&e4c, &inv)
}

#[test]
fn j_series_matches_exact_integer_oracle() {
    let c = ctx();
    let s = ModularSeries::new(&c).unwrap();
    let j = s.q_expansion(ModularName::J);
    let oracle = j_oracle(31);
    for (i, want) in oracle.iter().take(30).enumerate() {
        let got = &j.coefficient(QExponent::integer(i as i64 - 1)).re;
        let w = Float::with_val(c.bits(), want);
        let rel = Float::with_val(c.bits(), got - &w).abs() / w.clone().abs().max(&Float::with_val(c.bits(), 1));
        assert!(rel.to_f64() < 1e-40, "q^{} got {} want {}", i as i64 - 1, got, want);
    }
    assert_eq!(oracle[3], 21493760);
}

#[test]
fn delta_leading_coefficient() {
    let c = ctx();
    let s = ModularSeries::new(&c).unwrap();
    let d = s.q_expansion(ModularName::Delta);
    assert_eq!(d.order(), QExponent::integer(1));
    assert!((d.coefficient(QExponent::integer(1)).re.to_f64() - 1.0).abs() < 1e-40);
    assert!((d.coefficient(QExponent::integer(2)).re.to_f64() + 24.0).abs() < 1e-38);
}

#[test]
fn j_special_values() {
    let c = ctx();
    let s = ModularSeries::new(&c).unwrap();
    let ji = s.eval(ModularName::J, &z(&c, 0.0, 1.0)).unwrap();
    assert!((&ji - &z(&c, 1728.0, 0.0)).abs().to_f64() < 1e-33);
    let jr = s.eval(ModularName::J, &rho(c.bits())).unwrap();
    assert!(jr.abs().to_f64() < 1e-35);
    let sqrt7 = Float::with_val(c.bits(), 7).sqrt() / 2u32;
    let p = HPComplex::new(Float::with_val(c.bits(), 0.5), sqrt7);
    let j7 = s.eval(ModularName::J, &p).unwrap();
    assert!((&j7 - &z(&c, -3375.0, 0.0)).abs().to_f64() < 1e-32);
}

fn random_matrix(rng: &mut ChaCha8Rng) -> UnimodularMatrix {
    let mut g = UnimodularMatrix::identity();
    for _ in 0..rng.gen_range(1..7) {
        g = g.mul(&UnimodularMatrix::t(rng.gen_range(-3..=3))).mul(&UnimodularMatrix::s());
    }
    g
}

#[test]
fn j_is_modular_invariant() {
    let c = ctx();
    let s = ModularSeries::new(&c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let p = z(&c, rng.gen_range(-0.5..0.5), rng.gen_range(0.9..2.0));
        let g = random_matrix(&mut rng);
        let a = s.eval(ModularName::J, &p).unwrap();
        let b = s.eval(ModularName::J, &g.act(&p)).unwrap();
        let rel = (&a - &b).abs().to_f64() / a.abs().to_f64();
        assert!(rel < 1e-32, "rel {rel}");
    }
}

#[test]
fn e2_star_transforms_with_weight_two() {
    let c = ctx();
    let s = ModularSeries::new(&c).unwrap();
    let f = s.form(ModularName::E2Star);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let p = z(&c, rng.gen_range(-0.5..0.5), rng.gen_range(1.0..2.0));
        let g = random_matrix(&mut rng);
        let direct = f.evaluate(&p);
        let moved = s.eval(ModularName::E2Star, &g.act(&p)).unwrap();
        let want = &direct * &g.cocycle(&p).powi(2);
        assert!((&moved - &want).abs().to_f64() < 1e-30 * want.abs().to_f64().max(1.0));
    }
}

fn raised_at(c: &PrecisionContext, s: &ModularSeries, name: ModularName, n: usize, p: &HPComplex) -> HPComplex {
    s.eval_form(&raise(&s.form(name), n), p).unwrap()
    .with_prec(c.bits())
}

#[test]
fn raised_e2_star_at_rho() {
    let c = ctx();
    let s = ModularSeries::new(&c).unwrap();
    let r = rho(c.bits());
    assert!(raised_at(&c, &s, ModularName::E2Star, 0, &r).abs().to_f64() < 1e-35);
    assert!(raised_at(&c, &s, ModularName::E2Star, 1, &r).abs().to_f64() < 1e-35);
    let omega = chowla_selberg(&c).unwrap();
    let want = Float::with_val(c.bits(), 32) / Float::with_val(c.bits(), 3).sqrt()
        * c.pi().square()
        * omega.pow(6u32);
    let got = raised_at(&c, &s, ModularName::E2Star, 2, &r);
    assert!((got.re.to_f64() / want.to_f64() - 1.0).abs() < 1e-14);
    let rel = Float::with_val(c.bits(), &got.re - &want).abs() / &want;
    assert!(rel.to_f64() < 1e-35 && got.im.to_f64().abs() < 1e-35);
}

/// `2i d/dz f + k f / y = i f_x + f_y + k f / y` by central differences with
/// one Richardson step.
fn raise_by_differences(s: &ModularSeries, name: ModularName, f: &AlmostHolomorphicForm, p: &HPComplex) -> HPComplex {
    let c = s.context();
    let eval = |dx: f64, dy: f64| {
        let q = p + &HPComplex::from_f64(c.bits(), dx, dy);
        s.eval_form(f, &q).unwrap()
    };
    let central = |h: f64| {
        let fx = (&eval(h, 0.0) - &eval(-h, 0.0)).div_real(&Float::with_val(c.bits(), 2.0 * h));
        let fy = (&eval(0.0, h) - &eval(0.0, -h)).div_real(&Float::with_val(c.bits(), 2.0 * h));
        fx.mul_i() + fy
    };
    let h = 1e-3;
    let d = (central(h / 2.0).scale_i64(4) - central(h)).div_real(&Float::with_val(c.bits(), 3));
    let k = f.weight();
    let _ = name;
    d + s.eval_form(f, p).unwrap().scale_i64(k).div_real(&p.im)
}

#[test]
fn raising_agrees_with_finite_differences() {
    let c = ctx();
    let s = ModularSeries::new(&c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..10 {
        let name = [ModularName::E2Star, ModularName::E4, ModularName::E6, ModularName::J][i % 4];
        let times = i % 3;
        let f = raise(&s.form(name), times);
        let p = z(&c, rng.gen_range(-1.0..1.0), rng.gen_range(0.7..1.6));
        let fd = raise_by_differences(&s, name, &f, &p);
        let exact = s.eval_form(&f.raise_once(), &p).unwrap();
        let rel = (&fd - &exact).abs().to_f64() / exact.abs().to_f64();
        assert!(rel < 1e-8, "{name} raised {times}+1 at {p}: rel {rel}");
    }
}

#[test]
fn elliptic_coefficients_of_j_at_rho() {
    let c = ctx();
    let e = elliptic_coefficients(EllipticTarget::J, 0..=7, &c).unwrap();
    let pi = c.pi();
    let omega = chowla_selberg(&c).unwrap();
    let im = Float::with_val(c.bits(), 3).sqrt() / 2u32;
    let sqrt3 = Float::with_val(c.bits(), 3).sqrt();
    let r3: Float = Float::with_val(c.bits(), -(1i64 << 16) * 9) * &sqrt3 * pi.clone().pow(3u32) * omega.clone().pow(6u32);
    let r6: Float = Float::with_val(c.bits(), -(1i64 << 22) * 9 * 5 * 23) * pi.clone().pow(6u32) * omega.clone().pow(12u32);
    let want3 = r3.clone() * im.clone().pow(3u32) / 6u32;
    let want6 = r6.clone() * im.clone().pow(6u32) / 720u32;
    let tol = 1e-20;
    for n in [0, 1, 2, 4, 5, 7] {
        assert!(e.coefficient(n).abs().to_f64() < tol * 1e6, "c({n})");
    }
    let rel3 = Float::with_val(c.bits(), &e.coefficient(3).re - &want3).abs() / want3.clone().abs();
    let rel6 = Float::with_val(c.bits(), &e.coefficient(6).re - &want6).abs() / want6.clone().abs();
    assert!(rel3.to_f64() < tol && rel6.to_f64() < tol, "{rel3} {rel6}");

    // Same values through iterated raising of the q-series of j.
    let s = ModularSeries::new(&c).unwrap();
    let r = rho(c.bits());
    let got3 = raised_at(&c, &s, ModularName::J, 3, &r);
    let got6 = raised_at(&c, &s, ModularName::J, 6, &r);
    assert!(raised_at(&c, &s, ModularName::J, 4, &r).abs().to_f64() < 1e-25 * r3.to_f64().abs());
    assert!(raised_at(&c, &s, ModularName::J, 5, &r).abs().to_f64() < 1e-25 * r6.to_f64().abs());
    println!("R^3 j(rho) = {got3}, closed form {r3}");
    println!("R^6 j(rho) = {got6}, closed form {r6}");
    assert!((Float::with_val(c.bits(), &got3.re - &r3).abs() / r3.clone().abs()).to_f64() < 1e-20);
    assert!((Float::with_val(c.bits(), &got6.re - &r6).abs() / r6.clone().abs()).to_f64() < 1e-20);
}

#[test]
fn reciprocal_j_laurent_coefficients() {
    let c = ctx();
    let e = elliptic_coefficients(EllipticTarget::ReciprocalJ, -5..=4, &c).unwrap();
    assert!(e.below_support());
    assert!(e.coefficient(-5).is_zero() && e.coefficient(-4).is_zero());
    let omega = chowla_selberg(&c).unwrap();
    let denom = Float::with_val(c.bits(), (1u64 << 12) * 27);
    let want_m3 = -(c.pi().pow(3u32) * omega.pow(6u32) * &denom).recip();
    let want_0 = Float::with_val(c.bits(), 23) / &denom;
    let rel = |a: &Float, b: &Float| (Float::with_val(c.bits(), a - b).abs() / b.clone().abs()).to_f64();
    assert!(rel(&e.coefficient(-3).re, &want_m3) < 1e-25);
    assert!(rel(&e.coefficient(0).re, &want_0) < 1e-25);
    assert!(e.coefficient(-2).abs().to_f64() < 1e-25 * want_m3.to_f64().abs());
    assert!(e.coefficient(-1).abs().to_f64() < 1e-25 * want_m3.to_f64().abs());
}

#[test]
fn laurent_inversion_is_consistent() {
    let c = ctx();
    let n_max = 12;
    let j = elliptic_coefficients(EllipticTarget::J, 0..=n_max + 6, &c).unwrap();
    let inv = elliptic_coefficients(EllipticTarget::ReciprocalJ, -3..=n_max, &c).unwrap();
    let one = recipj::numerics::series_multiply(&j.to_power_series(), &inv.to_power_series());
    for n in 0..n_max {
        let v = one.coefficient(QExponent::integer(n));
        let want = if n == 0 { 1.0 } else { 0.0 };
        assert!((v.re.to_f64() - want).abs() < 1e-20 && v.im.to_f64().abs() < 1e-20, "X^{n}: {v}");
    }
}

#[test]
fn reciprocal_j_is_continuous_across_the_switch() {
    let c = ctx();
    let rj = ReciprocalJ::new(&c).unwrap();
    let s = rj.series();
    for (k, r) in [(0usize, 0.099), (1, 0.101), (2, 0.05), (3, 0.3)] {
        let t = Float::with_val(c.bits(), k as f64 * 1.1 + 0.2);
        let x = HPComplex::cis(&t).scale(&Float::with_val(c.bits(), r));
        let p = z_from_x(&x);
        let direct = s.eval(ModularName::J, &p).unwrap().recip();
        let laurent = rj.laurent().evaluate_at_x(&x);
        let via = rj.eval(&p).unwrap();
        let scale = direct.abs().to_f64();
        if r < LAURENT_SWITCH_RADIUS * 1.5 {
            assert!((&direct - &laurent).abs().to_f64() < 1e-30 * scale, "r={r}");
        }
        assert!((&direct - &via).abs().to_f64() < 1e-30 * scale, "r={r}");
    }
    assert!(rj.eval(&rho(c.bits())).is_err());
    let rho_minus_one = &rho(c.bits()) - &HPComplex::one(c.bits());
    assert!(is_equivalent_to_rho(&rho_minus_one, &c).unwrap());
    assert!(!is_equivalent_to_rho(&z(&c, 0.0, 1.0), &c).unwrap());
}

#[test]
fn omega_defining_identity() {
    let c = ctx();
    let omega = chowla_selberg(&c).unwrap();
    let g13 = recipj::numerics::gamma_eval(&(1, 3).into(), &c).unwrap();
    let g23 = recipj::numerics::gamma_eval(&(2, 3).into(), &c).unwrap();
    let v = c.pi() * 6u32 * omega.square() * (g23 / g13).pow(3u32);
    assert!((v - 1u32).abs().to_f64() < 1e-38);
}
