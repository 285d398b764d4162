use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid precision context: {0}")]
    InvalidContext(String),

    #[error("exponent {num}/{den} does not fit the q-exponent grid of denominator {bound}")]
    DenominatorOverflow { num: i64, den: i64, bound: i64 },

    #[error("cannot invert a series whose leading coefficient vanishes")]
    ZeroLeadingCoefficient,

    #[error("gamma function requested at non-positive argument {0}")]
    NonPositiveArgument(String),

    #[error("form {0} is not positive definite")]
    NotPositiveDefinite(String),

    #[error("form {0} is not reduced")]
    UnreducedForm(String),

    #[error("discriminant {0} is not admissible here: {1}")]
    InvalidDiscriminant(i64, &'static str),

    #[error("point is not in the upper half-plane (imaginary part {0})")]
    NotInUpperHalfPlane(String),

    #[error("kernel evaluated at a pole: Q(z,1) = 0 for form {0}")]
    KernelPole(String),

    #[error("{0} is Gamma-equivalent to a pole of 1/j")]
    PoleOfReciprocalJ(String),

    #[error("contour radius {0} outside (0, 0.5]")]
    ContourRadius(f64),

    #[error("raising order {0} is not supported (at most {1})")]
    UnsupportedRaisingOrder(usize, usize),

    #[error("missing raised value for n = {0} while c(-{0}) is nonzero")]
    MissingRaisedValue(usize),

    #[error("lattice sum cannot reach tail tolerance {tolerance:e} below cutoff {cutoff}")]
    CutoffExceeded { cutoff: f64, tolerance: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
