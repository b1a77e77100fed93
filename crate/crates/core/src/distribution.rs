//! The beta-logistic density
//!
//! ```text
//! p(x; θ¹, θ²) = 2^(1−θ¹) sech(x)^θ¹ exp(θ² x) / B((θ¹−θ²)/2, (θ¹+θ²)/2)
//! ```
//!
//! on the domain `θ¹ ± θ² > 0`, its potential, an exact sampler, moments by
//! quadrature, and the Bernoulli/Euler polynomial moment identities.

use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Estimate, QuadratureSpec};
use crate::specfun::{ln_beta_unchecked, ln_gamma_unchecked, polygamma_unchecked};

/// A point `(θ¹, θ²)` of the statistical manifold, `θ¹ ± θ² > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaPoint {
    theta1: f64,
    theta2: f64,
}

impl ThetaPoint {
    pub fn new(theta1: f64, theta2: f64) -> Result<Self> {
        if !(theta1.is_finite() && theta2.is_finite()) {
            return Err(Error::domain(format!(
                "theta must be finite, got ({theta1}, {theta2})"
            )));
        }
        if !(theta1 + theta2 > 0.0 && theta1 - theta2 > 0.0) {
            return Err(Error::domain(format!(
                "theta must satisfy theta1 + theta2 > 0 and theta1 - theta2 > 0, got ({theta1}, {theta2})"
            )));
        }
        Ok(ThetaPoint { theta1, theta2 })
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    /// `(θ¹ + θ²)/2`, the first beta shape.
    pub fn half_sum(&self) -> f64 {
        0.5 * (self.theta1 + self.theta2)
    }

    /// `(θ¹ − θ²)/2`, the second beta shape.
    pub fn half_diff(&self) -> f64 {
        0.5 * (self.theta1 - self.theta2)
    }

    /// The point with `θ²` negated.
    pub fn mirrored(&self) -> ThetaPoint {
        ThetaPoint { theta1: self.theta1, theta2: -self.theta2 }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.theta1, self.theta2]
    }
}

/// `ln sech(x) = ln 2 − |x| − ln(1 + e^(−2|x|))`, finite for every finite x.
pub fn ln_sech(x: f64) -> f64 {
    let ax = x.abs();
    LN_2 - ax - (-2.0 * ax).exp().ln_1p()
}

/// Potential (log-normalizer) `φ = ln B((θ¹−θ²)/2, (θ¹+θ²)/2) + (ln 2)(θ¹ − 1)`.
pub fn potential(p: &ThetaPoint) -> f64 {
    ln_beta_unchecked(p.half_diff(), p.half_sum()) + LN_2 * (p.theta1 - 1.0)
}

/// The same potential written with three log-gamma terms.
pub fn potential_gamma_form(p: &ThetaPoint) -> f64 {
    ln_gamma_unchecked(p.half_diff()) + ln_gamma_unchecked(p.half_sum())
        - ln_gamma_unchecked(p.theta1)
        + LN_2 * (p.theta1 - 1.0)
}

/// Gradient of the potential: `(E[ln sech X], E[X])`.
pub fn potential_gradient(p: &ThetaPoint) -> [f64; 2] {
    let psi_minus = polygamma_unchecked(0, p.half_diff());
    let psi_plus = polygamma_unchecked(0, p.half_sum());
    let psi_one = polygamma_unchecked(0, p.theta1);
    [
        0.5 * (psi_plus + psi_minus) - psi_one + LN_2,
        0.5 * (psi_plus - psi_minus),
    ]
}

pub fn log_pdf(p: &ThetaPoint, x: f64) -> f64 {
    p.theta1 * ln_sech(x) + p.theta2 * x - potential(p)
}

pub fn pdf(p: &ThetaPoint, x: f64) -> f64 {
    log_pdf(p, x).exp()
}

/// `E[g(X)]` by quadrature; `growth` bounds the polynomial degree of `g`.
pub fn expectation<G>(p: &ThetaPoint, g: G, growth: u32, q: &QuadratureSpec) -> Result<Estimate>
where
    G: Fn(f64) -> f64,
{
    let phi = potential(p);
    let log_density = |x: f64| p.theta1 * ln_sech(x) + p.theta2 * x - phi;
    let degree = f64::from(growth);
    quadrature::integrate_real_line(
        |x| g(x) * log_density(x).exp(),
        |x| log_density(x) + degree * x.abs().ln_1p(),
        q,
    )
}

/// Total probability mass by quadrature (should be 1).
pub fn total_mass(p: &ThetaPoint, q: &QuadratureSpec) -> Result<Estimate> {
    expectation(p, |_| 1.0, 0, q)
}

/// `E[X^k]` by quadrature.
pub fn moment(p: &ThetaPoint, k: u32, q: &QuadratureSpec) -> Result<Estimate> {
    expectation(p, |x| x.powi(k as i32), k, q)
}

/// Draw `n` values with a seeded ChaCha8 stream.
///
/// `X = ½ ln(G₁/G₂)` with `G₁ ~ Gamma((θ¹+θ²)/2)`, `G₂ ~ Gamma((θ¹−θ²)/2)`,
/// i.e. half the logit of a `Beta((θ¹+θ²)/2, (θ¹−θ²)/2)` variate. The gamma
/// draws are produced on the log scale so small shapes never underflow.
pub fn sample(p: &ThetaPoint, n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (shape1, shape2) = (p.half_sum(), p.half_diff());
    Ok((0..n)
        .map(|_| {
            let l1 = ln_gamma_draw(&mut rng, shape1);
            let l2 = ln_gamma_draw(&mut rng, shape2);
            0.5 * (l1 - l2)
        })
        .collect())
}

/// Logarithm of a unit-scale Gamma(shape) draw (Marsaglia-Tsang squeeze,
/// with `G(a) = G(a+1) · U^(1/a)` for `a < 1`).
fn ln_gamma_draw<R: Rng>(rng: &mut R, shape: f64) -> f64 {
    if shape < 1.0 {
        let u: f64 = 1.0 - rng.random::<f64>();
        return ln_gamma_draw(rng, shape + 1.0) + u.ln() / shape;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * z;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = 1.0 - rng.random::<f64>();
        let z2 = z * z;
        if u < 1.0 - 0.0331 * z2 * z2 || u.ln() < 0.5 * z2 + d * (1.0 - v + v.ln()) {
            return d.ln() + v.ln();
        }
    }
}

/// CDF values at ascending points, accumulated by 15-point Kronrod rules
/// between consecutive points (pieces no wider than 1/4).
pub fn cdf_sorted(p: &ThetaPoint, sorted: &[f64]) -> Result<Vec<f64>> {
    if sorted.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("cdf_sorted needs ascending input"));
    }
    let phi = potential(p);
    let density = |x: f64| (p.theta1 * ln_sech(x) + p.theta2 * x - phi).exp();
    let lower = quadrature::truncate(|x| p.theta1 * ln_sech(x) + p.theta2 * x - phi)?.lower();
    let mut acc = 0.0;
    let mut at = lower;
    let mut out = Vec::with_capacity(sorted.len());
    for &x in sorted {
        if x > at {
            let pieces = ((x - at) / 0.25).ceil().max(1.0);
            let width = (x - at) / pieces;
            for i in 0..pieces as usize {
                let a = at + i as f64 * width;
                acc += quadrature::gauss_kronrod_15(&density, a, a + width).0;
            }
            at = x;
        }
        out.push(acc.min(1.0));
    }
    Ok(out)
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against this law.
pub fn ks_statistic(p: &ThetaPoint, xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::invalid("KS statistic of an empty sample"));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cdf = cdf_sorted(p, &sorted)?;
    let n = sorted.len() as f64;
    Ok(cdf
        .iter()
        .enumerate()
        .map(|(i, &f)| ((i as f64 + 1.0) / n - f).max(f - i as f64 / n))
        .fold(0.0, f64::max))
}

/// Asymptotic critical value of the KS statistic at significance `level`.
pub fn ks_critical_value(n: usize, level: f64) -> f64 {
    (-0.5 * (0.5 * level).ln()).sqrt() / (n as f64).sqrt()
}

/// A complex expectation computed as two real quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    pub value_real: f64,
    pub value_imag: f64,
    pub est_error: f64,
}

pub const MAX_POLY_DEGREE: usize = 20;

/// `∫ (x + it − ½)ⁿ w(t) dt` split into real and imaginary parts.
fn complex_shifted_moment<W>(
    n: usize,
    x: f64,
    ln_weight: W,
    q: &QuadratureSpec,
) -> Result<MomentResult>
where
    W: Fn(f64) -> f64 + Copy,
{
    if n > MAX_POLY_DEGREE {
        return Err(Error::invalid(format!(
            "polynomial degree must be at most {MAX_POLY_DEGREE}, got {n}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::invalid("polynomial argument must be finite"));
    }
    let c = x - 0.5;
    let power = move |t: f64| {
        let (mut re, mut im) = (1.0, 0.0);
        for _ in 0..n {
            (re, im) = (re * c - im * t, re * t + im * c);
        }
        (re, im)
    };
    let envelope = move |t: f64| ln_weight(t) + n as f64 * (1.0 + c.abs() + t.abs()).ln();
    let real = quadrature::integrate_real_line(|t| power(t).0 * ln_weight(t).exp(), envelope, q)?;
    let imag = quadrature::integrate_real_line(|t| power(t).1 * ln_weight(t).exp(), envelope, q)?;
    Ok(MomentResult {
        value_real: real.value,
        value_imag: imag.value,
        est_error: real.error + imag.error,
    })
}

/// `B_n(x) = (π/2) ∫ (x + it − ½)ⁿ sech²(πt) dt`.
pub fn bernoulli_poly_via_moments(n: usize, x: f64, q: &QuadratureSpec) -> Result<MomentResult> {
    complex_shifted_moment(n, x, |t| (0.5 * PI).ln() + 2.0 * ln_sech(PI * t), q)
}

/// `E_n(x) = ∫ (x + it − ½)ⁿ sech(πt) dt`.
pub fn euler_poly_via_moments(n: usize, x: f64, q: &QuadratureSpec) -> Result<MomentResult> {
    complex_shifted_moment(n, x, |t| ln_sech(PI * t), q)
}
