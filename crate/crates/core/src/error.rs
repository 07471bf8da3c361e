use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Gamma function evaluated at (or within 1e-12 of) a non-positive integer.
    #[error("gamma pole at z = {0}")]
    Pole(Complex64),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// No vertical contour separates the left and right pole families.
    #[error("no pole-free strip: {0}")]
    NoStrip(String),

    /// Adaptive refinement hit its panel budget before the tolerance.
    #[error("quadrature failed to converge: {0}")]
    Convergence(String),

    /// A nominally real contour integral came back with too much imaginary part.
    #[error("imaginary residual {imag:e} exceeds bound {bound:e}")]
    ResidualImag { imag: f64, bound: f64 },

    /// Parameter combination rejected by a constructor invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
