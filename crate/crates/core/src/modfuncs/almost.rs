use rug::Float;

use crate::numerics::{HPComplex, QExpansion};

/// `sum_m parts[m] * y^-m` with `y = Im z`, each part a q-series.
///
/// Raising maps this representation to itself, so iterated derivatives of
/// E2*, E4, E6 and j stay exact at the level of q-coefficients.
#[derive(Clone, Debug)]
pub struct AlmostHolomorphicForm {
    weight: i64,
    parts: Vec<QExpansion>,
}

impl AlmostHolomorphicForm {
    pub fn new(weight: i64, parts: Vec<QExpansion>) -> Self {
        assert!(!parts.is_empty(), "an almost-holomorphic form needs at least one part");
        Self { weight, parts }
    }

    pub fn holomorphic(weight: i64, f: QExpansion) -> Self {
        Self::new(weight, vec![f])
    }

    pub fn weight(&self) -> i64 {
        self.weight
    }

    pub fn parts(&self) -> &[QExpansion] {
        &self.parts
    }

    /// Highest power of `1/y` present.
    pub fn depth(&self) -> usize {
        self.parts.len() - 1
    }

    /// `R_k = 2i d/dz + k/y`.
    ///
    /// On a single part: `R_k(g y^-m) = -4 pi (q d/dq g) y^-m + (k - m) g y^-(m+1)`.
    pub fn raise_once(&self) -> Self {
        let prec = self.parts[0].prec();
        let trunc = self
            .parts
            .iter()
            .map(|p| p.truncation())
            .min()
            .expect("nonempty");
        let mut out: Vec<QExpansion> = (0..=self.parts.len())
            .map(|_| QExpansion::zero(trunc, prec))
            .collect();
        let minus_four_pi = Float::with_val(prec, rug::float::Constant::Pi) * -4i32;
        for (m, g) in self.parts.iter().enumerate() {
            let d = g.q_derivative().scale_real(&minus_four_pi);
            out[m] = out[m].add(&d);
            let k = self.weight - m as i64;
            if k != 0 {
                out[m + 1] = out[m + 1].add(&g.scale_real(&Float::with_val(prec, k)));
            }
        }
        while out.len() > 1 && out.last().is_some_and(|p| p.is_zero()) {
            out.pop();
        }
        Self::new(self.weight + 2, out)
    }

    /// Direct evaluation of the truncated parts at `z`; no modular reduction.
    pub fn evaluate(&self, z: &HPComplex) -> HPComplex {
        let p = z.prec().max(self.parts[0].prec());
        let inv_y = Float::with_val(p, z.im.recip_ref());
        let mut acc = HPComplex::zero(p);
        let mut pow = Float::with_val(p, 1);
        for part in &self.parts {
            acc += part.evaluate(z).scale(&pow);
            pow *= &inv_y;
        }
        acc
    }

    /// Value together with a bound on truncation plus coefficient error.
    ///
    /// The tail majorant is valid for forms assembled from E2, E4, E6 and j
    /// (coefficients at most `exp(4 pi sqrt n) + 10^3 (n+1)^11`).
    pub fn evaluate_with_error(&self, z: &HPComplex) -> (HPComplex, f64) {
        let value = self.evaluate(z);
        let y = z.im.to_f64();
        let log_q = -2.0 * std::f64::consts::PI * y;
        let mut err = 0.0;
        for (m, part) in self.parts.iter().enumerate() {
            let y_factor = y.powi(-(m as i32));
            let mut coeff_err = 0.0;
            for (e, _) in part.terms() {
                coeff_err += (e.to_f64() * log_q).exp();
            }
            err += y_factor * part.error_budget() * coeff_err;
            let trunc = part.truncation().to_f64().ceil().max(1.0) as usize;
            err += y_factor * tail_majorant(trunc, log_q, self.depth());
        }
        (value, err)
    }
}

/// `sum_{n >= start} M(n) (4 pi n)^depth |q|^n` for the coefficient majorant
/// `M(n) = exp(4 pi sqrt n) + 10^3 (n+1)^11`.
fn tail_majorant(start: usize, log_q: f64, depth: usize) -> f64 {
    let four_pi = 4.0 * std::f64::consts::PI;
    let mut total = 0.0;
    for n in start..start + 2000 {
        let nf = n as f64;
        let log_m = (four_pi * nf.sqrt()).max(3.0 * std::f64::consts::LN_10 + 11.0 * (nf + 1.0).ln())
            + std::f64::consts::LN_2;
        let term = (log_m + depth as f64 * (four_pi * nf).ln() + nf * log_q).exp();
        total += term;
        if n > start + 10 && term < total * 1e-20 {
            break;
        }
    }
    total
}

/// `R^times` applied to `form`.
pub fn raise(form: &AlmostHolomorphicForm, times: usize) -> AlmostHolomorphicForm {
    let mut f = form.clone();
    for _ in 0..times {
        f = f.raise_once();
    }
    f
}
