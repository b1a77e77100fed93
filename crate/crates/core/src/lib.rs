//! Information geometry of the beta-logistic (generalized hyperbolic secant)
//! distribution family.
//!
//! The family has density proportional to `sech(x)^θ¹ · exp(θ² x)` on the
//! real line, with natural parameters restricted to `θ¹ ± θ² > 0`. Being an
//! exponential family, its whole dual geometry follows from derivatives of
//! the potential (log-normalizer):
//!
//! - [`specfun`]: log-gamma, polygamma up to order 3, Hurwitz zeta, harmonic
//!   numbers and log-beta.
//! - [`quadrature`]: tanh-sinh and adaptive Gauss-Kronrod integration, with
//!   tail truncation on the real line.
//! - [`distribution`]: density, potential, exact sampler, moments and the
//!   Bernoulli/Euler polynomial moment identities.
//! - [`geometry`]: Fisher metric, cubic tensor, α-connections and curvatures.
//! - [`geodesics`]: adaptive Dormand-Prince integration of the geodesic
//!   equations, geodesic bundles and a spread diagnostic.
//! - [`inference`]: α-parallel priors and MAP estimation.
//! - [`verify`]: the closed-form value table (Bernoulli and Euler cases).

pub mod distribution;
pub mod error;
pub mod geodesics;
pub mod geometry;
pub mod inference;
pub mod polynomials;
pub mod quadrature;
pub mod specfun;
pub mod verify;

pub use distribution::ThetaPoint;
pub use error::{Error, Result};

/// Format with 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}
