//! Theta objects around `rho`: unary and binary thetas, the Kudla-Millson
//! kernels and their raisings, singular theta coefficients, completion
//! coefficients of the lift of `1/j`, and the identities tying them together.

mod jet;
mod kernels;
pub(crate) mod lattice;
mod singular;
mod splitting;
mod unary;

pub use kernels::{kernel, raised_kernel, KernelKind};
pub use singular::{
    completion_coefficient, from_rho_coordinates, kernel_majorant, lowering_and_xi_checks, lowering_target,
    rho_coordinates, singular_theta_coeff, singular_theta_sum, singular_theta_sum_with_cutoff,
    theta_star_closed_form, theta_star_coeff, CompletionCoefficient, CompletionEngine,
    LoweringReport, LoweringSample, XiSample, LOWERING_FACTOR, MAX_RAISING_ORDER,
};
pub use splitting::{splitting_sides, splitting_sides_with_cutoff, SplittingSides};
pub use unary::{
    example_2_1_decomposition, shadow_combination, theta_binary_4, theta_binary_4_with_cutoff,
    theta_unary, theta_unary_with_cutoff, xi_proportionality_constant, Example21Report,
    UnaryWeight,
};

use rug::Float;

use crate::numerics::HPComplex;

/// A truncated lattice sum.
#[derive(Clone, Debug)]
pub struct ThetaValue {
    pub value: HPComplex,
    /// Norm bound of the included lattice points; its meaning is fixed by
    /// the producing function.
    pub cutoff: f64,
    /// Bound on the absolute value of all omitted terms.
    pub tail_bound: Float,
}

/// Rejects `v <= 0` or non-finite `v`.
pub(crate) fn check_v(v: f64) -> crate::Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(crate::Error::NotInUpperHalfPlane(v.to_string()))
    }
}

/// `f'(0)` from centered differences at steps `h, h/2, ..., h/2^(levels-1)`
/// with Richardson extrapolation in `h^2`.
pub(crate) fn richardson_derivative(
    f: &impl Fn(&Float) -> crate::Result<HPComplex>,
    h: f64,
    levels: usize,
    prec: u32,
) -> crate::Result<HPComplex> {
    let mut table: Vec<HPComplex> = Vec::with_capacity(levels);
    for l in 0..levels {
        let step = Float::with_val(prec, h) / Float::with_val(prec, 1u64 << l);
        let plus = f(&step)?;
        let minus = f(&Float::with_val(prec, -&step))?;
        let mut d = (&plus - &minus).div_real(&Float::with_val(prec, &step * 2u32));
        // Fold in the previous row: R_k = (4^k R_{k-1}(h/2) - R_{k-1}(h)) / (4^k - 1).
        let mut prev_row = std::mem::take(&mut table);
        let mut row = vec![d.clone()];
        for (k, old) in prev_row.drain(..).enumerate() {
            let w = Float::with_val(prec, 4u64.pow(k as u32 + 1));
            d = (&d.scale(&w) - &old).div_real(&Float::with_val(prec, &w - 1u32));
            row.push(d.clone());
        }
        table = row;
    }
    Ok(table.pop().expect("levels >= 1"))
}
