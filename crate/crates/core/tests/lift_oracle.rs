use std::f64::consts::PI;

use proptest::prelude::*;
use recipj::lift_oracle::*;
use recipj::numerics::{HPComplex, PrecisionContext};
use recipj::theta::CompletionEngine;
use recipj::traces::TraceEngine;

fn ctx() -> PrecisionContext {
    PrecisionContext::new(30).unwrap()
}

fn c(ctx: &PrecisionContext, x: f64, y: f64) -> HPComplex {
    HPComplex::from_f64(ctx.bits(), x, y)
}

fn theta(ctx: &PrecisionContext, z: &HPComplex, tau: &HPComplex, spec: &QuadratureSpec) -> num_complex::Complex64 {
    km_theta_full(z, tau, spec, ctx).unwrap().to_c64()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn theta_is_invariant_under_translation_and_inversion(
        x in -0.5f64..0.5, y in 0.6f64..2.0, u in -0.5f64..0.5, v in 0.4f64..1.5,
    ) {
        let ctx = ctx();
        let spec = QuadratureSpec::default();
        let (z, tau) = (c(&ctx, x, y), c(&ctx, u, v));
        let base = theta(&ctx, &z, &tau, &spec);
        let t = theta(&ctx, &c(&ctx, x + 1.0, y), &tau, &spec);
        let inv = -z.recip();
        let s = theta(&ctx, &inv, &tau, &spec);
        let scale = base.norm().max(1e-30);
        prop_assert!((t - base).norm() <= 1e-8 * scale, "{t} vs {base}");
        prop_assert!((s - base).norm() <= 1e-8 * scale, "{s} vs {base}");
    }
}

#[test]
fn theta_is_periodic_in_tau() {
    let ctx = ctx();
    let spec = QuadratureSpec::default();
    let z = c(&ctx, 0.3, 1.1);
    let a = theta(&ctx, &z, &c(&ctx, 0.25, 0.7), &spec);
    let b = theta(&ctx, &z, &c(&ctx, 1.25, 0.7), &spec);
    assert!((a - b).norm() < 1e-20 * a.norm());
}

#[test]
fn theta_decays_square_exponentially_toward_the_cusp() {
    // The decay is exp(-pi y^2 / (4 v)) once the full lattice is summed, so
    // the D-truncation is lifted and v is taken below 0.35.
    let ctx = PrecisionContext::new(60).unwrap();
    let spec = QuadratureSpec::new(0.1, 6.0, i64::MAX / 4).unwrap();
    let tau = c(&ctx, 0.2, 1.0 / 3.0);
    let at_i = theta(&ctx, &c(&ctx, 0.0, 1.0), &tau, &spec);
    let at_5i = theta(&ctx, &c(&ctx, 0.0, 5.0), &tau, &spec);
    assert!(at_i.norm() > 1e-2);
    assert!(at_5i.norm() < 1e-20 * at_i.norm(), "{at_5i} vs {at_i}");
    // the rate itself
    let logs: Vec<f64> = [3.0, 4.0, 5.0].iter().map(|&y| theta(&ctx, &c(&ctx, 0.0, y), &tau, &spec).norm().ln()).collect();
    let rate = (logs[1] - logs[2]) / 9.0;
    let expected = PI / (4.0 / 3.0);
    assert!((rate / expected - 1.0).abs() < 0.15, "rate {rate} vs {expected}");
}

#[test]
fn lift_matches_the_fourier_side_at_i() {
    let ctx = ctx();
    let spec = QuadratureSpec::default();
    let tau = c(&ctx, 0.0, 1.0);
    let lift = regularized_lift(&tau, &spec, &ctx).unwrap();
    assert!(lift.converged);
    assert_eq!(lift.extrapolation_order, 2);
    let engine = CompletionEngine::new(&ctx).unwrap();
    let fourier = fourier_side(&tau, spec.d_max, &engine).unwrap().to_c64();
    let diff = (lift.to_c64() - fourier).norm();
    assert!(diff < 1e-3);
    assert!(diff < 1e-3 * fourier.norm(), "{} vs {fourier}", lift.to_c64());
    assert!(diff <= lift.estimate);
}

#[test]
fn lift_is_periodic_in_tau() {
    let ctx = ctx();
    let spec = QuadratureSpec::default();
    let a = regularized_lift(&c(&ctx, 0.25, 1.0), &spec, &ctx).unwrap().to_c64();
    let b = regularized_lift(&c(&ctx, 1.25, 1.0), &spec, &ctx).unwrap().to_c64();
    assert!((a - b).norm() < 1e-12 * a.norm());
}

#[test]
fn lift_at_2i_is_trace_dominated() {
    let ctx = ctx();
    let spec = QuadratureSpec::default();
    let tau = c(&ctx, 0.0, 2.0);
    let lift = regularized_lift(&tau, &spec, &ctx).unwrap();
    let engine = CompletionEngine::new(&ctx).unwrap();
    let traces = trace_side(&tau, spec.d_max, &engine).unwrap().to_c64();
    let mut singular = 0.0;
    for d in -spec.d_max..=spec.d_max {
        let cc = engine.coefficient(d, &[2.0]).unwrap();
        let weight = (4.0 * PI * d as f64).exp();
        singular += cc.singular_part(2.0).unwrap().abs().to_f64() * weight;
    }
    let diff = (lift.to_c64() - traces).norm();
    assert!(diff <= singular + lift.estimate, "diff {diff} bound {singular}");
    assert!(singular < 1e-2 * traces.norm());
}

#[test]
fn extrapolation_is_stable_under_halving() {
    let ctx = ctx();
    let spec = QuadratureSpec::default();
    let tau = c(&ctx, 0.0, 1.0);
    let e = spec.epsilon;
    let coarse = regularized_lift_with_radii(&tau, &spec, &[e, e / 2.0], &ctx).unwrap();
    let fine = regularized_lift_with_radii(&tau, &spec, &[e / 2.0, e / 4.0], &ctx).unwrap();
    let jump = (coarse.to_c64() - fine.to_c64()).norm();
    assert!(jump <= 5.0 * coarse.estimate, "{jump} vs {}", coarse.estimate);
}

#[test]
fn doubling_the_height_cutoff_changes_nothing() {
    let ctx = ctx();
    let low = QuadratureSpec::default();
    let high = QuadratureSpec::new(low.epsilon, 2.0 * low.y_max, low.d_max).unwrap();
    let tau = c(&ctx, 0.1, 1.0);
    let a = regularized_lift(&tau, &low, &ctx).unwrap().to_c64();
    let b = regularized_lift(&tau, &high, &ctx).unwrap().to_c64();
    assert!((a - b).norm() < 1e-15, "{a} vs {b}");
}

#[test]
fn regularized_integral_of_reciprocal_j_gives_the_zeroth_trace() {
    // Theta has constant term -1/(2 pi), which pairs with 1/j to give 2 tr(0).
    let ctx = ctx();
    let spec = QuadratureSpec::default();
    let e = spec.epsilon;
    let int = regularized_integral(&spec, &[e, e / 2.0, e / 4.0], &ctx).unwrap();
    let t0 = TraceEngine::new(&ctx).unwrap().trace_zero_value().unwrap().to_f64();
    let expected = -4.0 * PI * t0;
    assert!((int.to_c64().re / expected - 1.0).abs() < 1e-4, "{} vs {expected}", int.to_c64());
    assert!(int.to_c64().im.abs() < 1e-15);
}

#[test]
fn quadrature_spec_bounds() {
    assert!(QuadratureSpec::new(0.2, 5.0, 40).is_err());
    assert!(QuadratureSpec::new(0.19, 5.0, 40).is_ok());
    assert!(QuadratureSpec::new(0.1, 4.99, 40).is_err());
    let ctx = ctx();
    assert!(regularized_lift(&c(&ctx, 0.0, -1.0), &QuadratureSpec::default(), &ctx).is_err());
}
