use recipj::modfuncs::{ModularName, ModularSeries};
use recipj::numerics::{HPComplex, PrecisionContext};
use recipj::quadforms::{class_representatives, cm_point, BinaryQuadraticForm};
use recipj::traces::*;
use rug::{Float, Integer, Rational};

fn ctx() -> PrecisionContext {
    PrecisionContext::new(40).unwrap()
}

#[test]
fn first_coefficients_of_the_generating_series() {
    let rows = generating_series(-8, &ctx()).unwrap();
    let ds: Vec<i64> = rows.iter().map(|r| r.d).collect();
    assert_eq!(ds, vec![0, -1, -2, -3, -4, -5, -6, -7, -8]);
    let want = [
        (0, (-1, 165888)),
        (-3, (23, 331776)),
        (-4, (1, 3456)),
        (-7, (-1, 3375)),
        (-8, (1, 8000)),
    ];
    for (d, frac) in want {
        let row = rows.iter().find(|r| r.d == d).unwrap();
        assert_eq!(row.rational_guess, Some(Rational::from(frac)), "D = {d}");
    }
    for row in rows.iter().filter(|r| r.d.rem_euclid(4) >= 2) {
        assert!(row.value.is_zero(), "D = {}", row.d);
        assert_eq!(row.class_count, 0);
    }
}

#[test]
fn d_minus_12_from_direct_cm_evaluation() {
    let c = ctx();
    let forms = class_representatives(-12).unwrap();
    assert_eq!(forms, vec![BinaryQuadraticForm::new(1, 0, 3), BinaryQuadraticForm::new(2, 2, 2)]);
    // [1,0,3] has CM point i sqrt 3 with j = 54000; [2,2,2] sits on the orbit of
    // rho and contributes c(0) / 3.
    let s = ModularSeries::new(&c).unwrap();
    let z = cm_point(&forms[0], &c).unwrap().value;
    let j = s.eval(ModularName::J, &z).unwrap();
    assert!((j.re.to_f64() - 54000.0).abs() < 1e-25);
    let want = Rational::from((1, 54000)) + Rational::from((23, 110592 * 3));
    let got = TraceEngine::new(&c).unwrap().trace_value(-12).unwrap().0;
    let diff = Float::with_val(c.bits(), &got - &want);
    assert!(diff.abs().to_f64() < 1e-35, "{got}");
}

#[test]
fn polynomial_growth_up_to_500() {
    let c = PrecisionContext::new(30).unwrap();
    let e = TraceEngine::new(&c).unwrap();
    let rows = e.table(-500).unwrap();
    for r in rows.iter().filter(|r| r.d < 0) {
        let bound = 10.0 * (r.d.abs() as f64).powi(4);
        assert!(r.value.to_f64().abs() <= bound, "D = {}", r.d);
    }
}

#[test]
fn partial_sums_converge_geometrically() {
    let c = PrecisionContext::new(30).unwrap();
    let e = TraceEngine::new(&c).unwrap();
    let v = 0.1;
    let terms: Vec<f64> = (1..=200)
        .map(|n| e.trace_any(-n).unwrap().to_f64().abs() * (-2.0 * std::f64::consts::PI * n as f64 * v).exp())
        .collect();
    let partial: Vec<f64> = terms
        .iter()
        .scan(0.0, |s, t| {
            *s += t;
            Some(*s)
        })
        .collect();
    // Tail after N is dominated by 10 n^4 e^{-2 pi v n}; checked at N = 50, 100, 150.
    for n in [50usize, 100, 150] {
        let tail = partial[199] - partial[n - 1];
        let majorant: f64 = (n + 1..=200)
            .map(|k| 10.0 * (k as f64).powi(4) * (-2.0 * std::f64::consts::PI * k as f64 * v).exp())
            .sum();
        assert!(tail <= majorant, "N = {n}: {tail} > {majorant}");
    }
    assert!(partial[199] - partial[99] < 1e-20);
}

/// The reduced principal form `[1, b, c]` of discriminant `d`.
fn principal_form(d: i64) -> BinaryQuadraticForm {
    let b = d.rem_euclid(2);
    BinaryQuadraticForm::new(1, b, (b * b - d) / 4)
}

#[test]
fn class_number_one_reciprocals_are_unit_fractions() {
    // j(z) for D = -163 is -640320^3; the denominator bound 10^(digits/3) must exceed it.
    let c = PrecisionContext::new(60).unwrap();
    let e = TraceEngine::new(&c).unwrap();
    let rj = e.reciprocal_j();
    for d in [-4i64, -8, -11, -16, -19, -27, -28, -43, -67, -163] {
        let q = principal_form(d);
        let z = cm_point(&q, &c).unwrap().value;
        let v = rj.eval(&z).unwrap().re;
        let g = rational_guess(&v, &c).unwrap_or_else(|| panic!("no guess at D = {d}"));
        assert_eq!(g.numer().clone().abs(), Integer::from(1), "D = {d}: {g}");
    }
    // Imprimitive classes reuse the principal values of smaller discriminants.
    let t16 = e.trace_value(-16).unwrap().0;
    let want = Rational::from((1, 287496)) + Rational::from((1, 1728 * 2));
    assert!(Float::with_val(c.bits(), &t16 - &want).abs().to_f64() < 1e-50);
}

#[test]
fn reconstruction_is_stable_under_precision_doubling() {
    let c = PrecisionContext::new(30).unwrap();
    assert_eq!(trace(-3, &c).unwrap().rational_guess, Some(Rational::from((23, 331776))));
    assert_eq!(trace(-4, &c).unwrap().rational_guess, Some(Rational::from((1, 3456))));
    // Class number 3: the trace is rational but its denominator is not small
    // enough for a 30-digit reconstruction, so no guess may be reported.
    let t23 = trace(-23, &c).unwrap();
    assert_eq!(t23.class_count, 3);
    if let Some(g) = &t23.rational_guess {
        let diff = Float::with_val(c.bits(), &t23.value - g);
        assert!(diff.abs().to_f64() < 1e-15);
    }
}

#[test]
fn trace_rejects_nonnegative_discriminants() {
    let e = TraceEngine::new(&ctx()).unwrap();
    assert!(e.trace_value(0).is_err());
    assert!(e.trace_any(5).unwrap().is_zero());
    assert!(generating_series(0, &ctx()).is_err());
}

#[test]
fn pairing_reproduces_closed_form_constants() {
    let c = ctx();
    let e = TraceEngine::new(&c).unwrap();
    let raised = e.raised_e2_star_at_rho(3).unwrap();
    let pairing = elliptic_pairing(e.laurent_at_rho(), &raised).unwrap();
    // -4 pi (3 sqrt3 / 16) c(-3) (32/sqrt3) pi^2 Omega^6 = -24 pi^3 Omega^6 c(-3)
    let omega = recipj::modfuncs::chowla_selberg(&c).unwrap();
    let om6 = Float::with_val(c.bits(), omega.square_ref()).square() * omega.square();
    let pi3 = c.pi() * c.pi() * c.pi();
    let cm3 = reference_leading_coefficient(&c).unwrap();
    let want = HPComplex::from_real(pi3 * om6 * cm3 * -24i32);
    assert!(recipj::numerics::rel_diff(&pairing, &want) < 1e-30);
    assert!((pairing.re.to_f64() - 12.0 * 3.0 / 165888.0).abs() < 1e-15);
}
