//! Exact-BER analysis of dual-branch selection combining over generalized-K
//! fading, built on direct Mellin-Barnes contour integration.
//!
//! The crate is organized bottom-up:
//!
//! * [`special_fn`] - complex log-gamma, incomplete gamma, modified Bessel K
//! * [`mellin_barnes`] - single Meijer G-functions on a vertical contour
//! * [`egbmgf`] - the extended generalized bivariate Meijer G-function
//!   (double contour) and its Laplace transform
//! * [`gk_channel`] - the generalized-K (Gamma-Gamma) power distribution
//! * [`ber`] - conditional error probability, SC output statistics, and the
//!   closed-form / numerical-quadrature average BER pair
//! * [`montecarlo`] - seeded, streamed Monte Carlo validation
//!
//! All contour evaluations return real values with an explicit imaginary
//! residual check; anything that fails to converge or lands on a pole comes
//! back as a structured [`Error`] instead of a NaN.

pub mod ber;
pub mod egbmgf;
pub mod error;
pub mod gk_channel;
pub mod mellin_barnes;
pub mod montecarlo;
pub mod special_fn;

mod quadrature;

pub use error::{Error, Result};
