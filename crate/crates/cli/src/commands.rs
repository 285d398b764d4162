use rug::Float;
use serde_json::{json, Value};

use recipj::numerics::{HPComplex, PrecisionContext};
use recipj::theta::{
    shadow_combination, theta_binary_4, theta_binary_4_with_cutoff, theta_unary, theta_unary_with_cutoff,
    CompletionEngine, ThetaValue, UnaryWeight,
};
use recipj::traces::generating_series;
use recipj::Result;

use crate::table::{Provenance, Table};

/// Coefficients printed as closed rationals in the reference series.
pub const PUBLISHED_TRACES: [(i64, i64, i64); 5] =
    [(0, -1, 165888), (-3, 23, 331776), (-4, 1, 3456), (-7, -1, 3375), (-8, 1, 8000)];

pub fn decimal(x: &Float, ctx: &PrecisionContext) -> String {
    x.to_string_radix(10, Some(ctx.precision_digits() as usize))
}

pub fn complex(z: &HPComplex, ctx: &PrecisionContext) -> String {
    z.to_string_digits(ctx.precision_digits() as usize)
}

pub fn context_meta(t: &mut Table, ctx: &PrecisionContext) {
    t.meta("precision_digits", ctx.precision_digits());
    t.meta("precision_bits", ctx.bits());
    t.meta("tail_tolerance", ctx.tail_tolerance());
    t.meta("lattice_cutoff", ctx.lattice_cutoff());
}

/// `D, tr(D), rational guess, number of classes` for `d_min <= D <= 0`.
pub fn traces(d_min: i64, ctx: &PrecisionContext) -> Result<Table> {
    let mut t = Table::new(&["D", "value", "rational", "classes"]);
    context_meta(&mut t, ctx);
    t.meta("d_min", d_min);
    let rows = if d_min == 0 {
        vec![recipj::traces::trace_zero(ctx)?]
    } else {
        generating_series(d_min, ctx)?
    };
    for r in rows {
        let published = PUBLISHED_TRACES.iter().any(|p| p.0 == r.d);
        let rational = r.rational_guess.as_ref().map_or(Value::Null, |q| json!(q.to_string()));
        t.push(
            vec![json!(r.d), json!(decimal(&r.value, ctx)), rational, json!(r.class_count)],
            if published { Provenance::PaperTarget } else { Provenance::Computed },
        );
    }
    Ok(t)
}

/// Completed coefficients `c(D, v) = 2 tr(D) + singular part` of the lift at
/// `v = Im(tau)` for `d_min <= D <= -d_min`.
pub fn series(d_min: i64, tau: &HPComplex, ctx: &PrecisionContext) -> Result<Table> {
    let v = tau.im.to_f64();
    let engine = CompletionEngine::new(ctx)?;
    let mut t = Table::new(&["D", "trace_part", "singular_part", "value"]);
    context_meta(&mut t, ctx);
    t.meta("d_min", d_min);
    t.meta("v", v);
    for d in d_min..=-d_min {
        let c = engine.coefficient(d, &[v])?;
        let singular = c.singular_part(v)?;
        let value = c.value(v)?;
        t.push(
            vec![
                json!(d),
                json!(decimal(&c.trace_part, ctx)),
                json!(complex(&singular, ctx)),
                json!(complex(&value, ctx)),
            ],
            Provenance::Computed,
        );
    }
    Ok(t)
}

/// `theta_{3/2,h}`, `theta_{7/2,h}`, `theta_{4,h}` for `h mod 3` and the
/// shadow combination at `tau`.
pub fn theta(tau: &HPComplex, cutoff: Option<f64>, ctx: &PrecisionContext) -> Result<Table> {
    let mut t = Table::new(&["name", "h", "value", "cutoff", "tail_bound"]);
    context_meta(&mut t, ctx);
    t.meta("tau", complex(tau, ctx));
    let push = |t: &mut Table, name: &str, h: Value, v: &ThetaValue| {
        t.push(
            vec![
                json!(name),
                h,
                json!(complex(&v.value, ctx)),
                json!(v.cutoff),
                json!(v.tail_bound.to_f64()),
            ],
            Provenance::Computed,
        )
    };
    let mut max_tail = 0f64;
    for weight in [UnaryWeight::ThreeHalves, UnaryWeight::SevenHalves] {
        for h in 0..3 {
            let v = match cutoff {
                Some(c) => theta_unary_with_cutoff(weight, h, tau, c, ctx)?,
                None => theta_unary(weight, h, tau, ctx)?,
            };
            max_tail = max_tail.max(v.tail_bound.to_f64());
            push(&mut t, &format!("theta_{weight}"), json!(h), &v);
        }
    }
    for h in 0..3 {
        let v = match cutoff {
            Some(c) => theta_binary_4_with_cutoff(h, tau, c, ctx)?,
            None => theta_binary_4(h, tau, ctx)?,
        };
        max_tail = max_tail.max(v.tail_bound.to_f64());
        push(&mut t, "theta_4", json!(h), &v);
    }
    let shadow = shadow_combination(tau, ctx)?;
    t.push(
        vec![json!("shadow_combination"), Value::Null, json!(complex(&shadow, ctx)), Value::Null, Value::Null],
        Provenance::Computed,
    );
    t.meta("max_tail_bound", max_tail);
    if let Some(c) = cutoff {
        t.meta("cutoff_override", c);
    }
    Ok(t)
}
