//! α-parallel priors, the unnormalized log-posterior and MAP estimation.
//!
//! The α-parallel prior is `ω⁽ᵅ⁾(θ) ∝ (det G)^{(1−α)/2}`: α = 1 is the flat
//! prior (so the MAP is the MLE), α = 0 is Jeffreys' prior and α = −1 the
//! left-invariant one. The posterior normalization `A(x)` is never needed.

use serde::{Deserialize, Serialize};

use crate::distribution::{ln_sech, potential, potential_gradient, ThetaPoint};
use crate::error::{Error, Result};
use crate::geometry;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub n: usize,
    /// `Σ ln sech xᵢ`
    pub log_a: f64,
    /// `Σ xᵢ`
    pub b: f64,
    /// All observations were identical.
    pub degenerate: bool,
}

/// Neumaier compensated sum.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn suff_stats(xs: &[f64]) -> Result<SufficientStats> {
    if xs.is_empty() {
        return Err(Error::invalid("no observations"));
    }
    if let Some(x) = xs.iter().find(|x| !x.is_finite()) {
        return Err(Error::domain(format!("observation {x} is not finite")));
    }
    Ok(SufficientStats {
        n: xs.len(),
        log_a: compensated_sum(xs.iter().map(|&x| ln_sech(x))),
        b: compensated_sum(xs.iter().copied()),
        degenerate: xs.iter().all(|&x| x == xs[0]),
    })
}

/// `((1 − α)/2) · ln det G`.
pub fn alpha_prior_log(p: &ThetaPoint, alpha: f64) -> f64 {
    let e = 0.5 * (1.0 - alpha);
    if e == 0.0 {
        return 0.0;
    }
    e * geometry::fisher(p).det.ln()
}

/// Log-likelihood of the sample, `θ·(log_a, b) − N φ(θ)`.
pub fn log_likelihood(s: &SufficientStats, p: &ThetaPoint) -> f64 {
    p.theta1() * s.log_a + p.theta2() * s.b - s.n as f64 * potential(p)
}

/// Log-posterior without the `−ln A(x)` constant.
pub fn log_posterior_unnorm(s: &SufficientStats, p: &ThetaPoint, alpha: f64) -> f64 {
    log_likelihood(s, p) + alpha_prior_log(p, alpha)
}

pub fn posterior_gradient(s: &SufficientStats, p: &ThetaPoint, alpha: f64) -> [f64; 2] {
    let n = s.n as f64;
    let dphi = potential_gradient(p);
    let mut g = [s.log_a - n * dphi[0], s.b - n * dphi[1]];
    let e = 0.5 * (1.0 - alpha);
    if e != 0.0 {
        let d = geometry::ln_det_gradient(p);
        g[0] += e * d[0];
        g[1] += e * d[1];
    }
    g
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Hessian of the log-posterior in θ: `−N G` plus a central-difference
/// Hessian of the prior term.
fn posterior_hessian(s: &SufficientStats, p: &ThetaPoint, alpha: f64) -> [[f64; 2]; 2] {
    let n = s.n as f64;
    let g = geometry::fisher(p).matrix();
    let mut h = [[-n * g[0][0], -n * g[0][1]], [-n * g[1][0], -n * g[1][1]]];
    let e = 0.5 * (1.0 - alpha);
    if e == 0.0 {
        return h;
    }
    let step = (1e-5 * p.theta1()).min(0.25 * p.half_diff().min(p.half_sum()));
    let mut d = [[0.0; 2]; 2];
    for j in 0..2 {
        let shift = |sign: f64| {
            let mut t = p.as_array();
            t[j] += sign * step;
            ThetaPoint::new(t[0], t[1]).map(|q| geometry::ln_det_gradient(&q))
        };
        if let (Ok(hi), Ok(lo)) = (shift(1.0), shift(-1.0)) {
            for i in 0..2 {
                d[i][j] = (hi[i] - lo[i]) / (2.0 * step);
            }
        }
    }
    let off = 0.5 * (d[0][1] + d[1][0]);
    h[0][0] += e * d[0][0];
    h[1][1] += e * d[1][1];
    h[0][1] += e * off;
    h[1][0] += e * off;
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Starting point; chosen automatically when `None`.
    pub init: Option<ThetaPoint>,
    pub backtrack_ratio: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { grad_tol: 1e-6, max_iter: 100, init: None, backtrack_ratio: 0.5 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::invalid("grad_tol must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if !(self.backtrack_ratio > 0.0 && self.backtrack_ratio < 1.0) {
            return Err(Error::invalid("backtrack_ratio must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapEstimate {
    pub theta_hat: ThetaPoint,
    pub alpha: f64,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
    pub log_post_unnorm: f64,
    pub degenerate_data: bool,
}

/// Coarse-grid starting point: the grid point with the best per-observation
/// log-likelihood, which is where `∇φ` comes closest to the sample averages
/// of `(ln sech x, x)` in the Bregman sense.
pub fn initial_guess(s: &SufficientStats) -> ThetaPoint {
    let mut best = (f64::NEG_INFINITY, ThetaPoint::new(2.0, 0.0).expect("valid"));
    for i in 0..=24 {
        let t1 = 0.2 * 250f64.powf(i as f64 / 24.0);
        for k in -19..=19 {
            let Ok(p) = ThetaPoint::new(t1, t1 * k as f64 / 20.0) else { continue };
            let ll = log_likelihood(s, &p);
            if ll.is_finite() && ll > best.0 {
                best = (ll, p);
            }
        }
    }
    best.1
}

// (u, v) = (ln(θ¹ − θ²), ln(θ¹ + θ²))
fn to_uv(p: &ThetaPoint) -> [f64; 2] {
    [(2.0 * p.half_diff()).ln(), (2.0 * p.half_sum()).ln()]
}

fn from_uv(w: [f64; 2]) -> Option<ThetaPoint> {
    let (eu, ev) = (w[0].exp(), w[1].exp());
    ThetaPoint::new(0.5 * (eu + ev), 0.5 * (ev - eu)).ok()
}

/// Maximize the log-posterior by damped Newton in `(u, v)`. Running out of
/// iterations, or degenerate data, is reported through `converged = false`
/// rather than as an error.
pub fn map_estimate(s: &SufficientStats, alpha: f64, cfg: &SolverConfig) -> Result<MapEstimate> {
    cfg.validate()?;
    if !alpha.is_finite() {
        return Err(Error::invalid("alpha must be finite"));
    }
    if s.n == 0 {
        return Err(Error::invalid("no observations"));
    }
    let mut p = cfg.init.unwrap_or_else(|| initial_guess(s));
    let mut w = to_uv(&p);
    let mut f = log_posterior_unnorm(s, &p, alpha);
    if !f.is_finite() {
        return Err(Error::domain("log-posterior is not finite at the starting point"));
    }

    let finish = |p: ThetaPoint, f: f64, iterations: usize, converged: bool| {
        let grad_norm = norm2(posterior_gradient(s, &p, alpha));
        MapEstimate {
            theta_hat: p,
            alpha,
            // identical observations have no finite maximizer
            converged: (converged || grad_norm <= cfg.grad_tol) && !s.degenerate,
            iterations,
            grad_norm,
            log_post_unnorm: f,
            degenerate_data: s.degenerate,
        }
    };

    for iter in 0..cfg.max_iter {
        let g = posterior_gradient(s, &p, alpha);
        if norm2(g) <= cfg.grad_tol {
            return Ok(finish(p, f, iter, true));
        }
        // Chain rule: θ = J(u, v), J = ½[[eᵘ, eᵛ], [−eᵘ, eᵛ]].
        let (hu, hv) = (0.5 * w[0].exp(), 0.5 * w[1].exp());
        let jac = [[hu, hv], [-hu, hv]];
        let gw = [jac[0][0] * g[0] + jac[1][0] * g[1], jac[0][1] * g[0] + jac[1][1] * g[1]];
        let h = posterior_hessian(s, &p, alpha);
        let mut hw = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for i in 0..2 {
                    for j in 0..2 {
                        hw[a][b] += jac[i][a] * h[i][j] * jac[j][b];
                    }
                }
            }
        }
        hw[0][0] += gw[0];
        hw[1][1] += gw[1];

        let det = hw[0][0] * hw[1][1] - hw[0][1] * hw[1][0];
        let negative_definite = hw[0][0] < 0.0 && det > 0.0;
        let mut dir = if negative_definite {
            [
                -(hw[1][1] * gw[0] - hw[0][1] * gw[1]) / det,
                -(-hw[1][0] * gw[0] + hw[0][0] * gw[1]) / det,
            ]
        } else {
            gw
        };
        // keep a single step within a factor e^3 in θ¹ ± θ²
        let len = dir[0].abs().max(dir[1].abs());
        if len > 3.0 {
            dir = [3.0 * dir[0] / len, 3.0 * dir[1] / len];
        }
        let slope = gw[0] * dir[0] + gw[1] * dir[1];

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = [w[0] + step * dir[0], w[1] + step * dir[1]];
            if let Some(q) = from_uv(trial) {
                let fq = log_posterior_unnorm(s, &q, alpha);
                if fq.is_finite() && fq >= f + 1e-4 * step * slope {
                    accepted = Some((trial, q, fq));
                    break;
                }
            }
            step *= cfg.backtrack_ratio;
        }
        let Some((trial, q, fq)) = accepted else {
            // no ascent possible at working precision
            return Ok(finish(p, f, iter, false));
        };
        w = trial;
        p = q;
        f = fq;
    }
    Ok(finish(p, f, cfg.max_iter, false))
}

/// Maximum-likelihood estimate (the flat prior, α = 1).
pub fn mle(s: &SufficientStats, cfg: &SolverConfig) -> Result<MapEstimate> {
    map_estimate(s, 1.0, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::sample;

    fn pt(a: f64, b: f64) -> ThetaPoint {
        ThetaPoint::new(a, b).unwrap()
    }

    #[test]
    fn stats_examples() {
        let s = suff_stats(&[0.0]).unwrap();
        assert_eq!((s.n, s.log_a, s.b), (1, 0.0, 0.0));
        let s = suff_stats(&[1.0, -1.0]).unwrap();
        let expected = 2.0 * (2.0 / (1f64.exp() + (-1f64).exp())).ln();
        assert!((s.log_a - expected).abs() < 1e-15);
        assert!((s.log_a + 0.867_561_660_966_054).abs() < 1e-14);
        assert_eq!(s.b, 0.0);
        assert!(suff_stats(&[]).is_err());
        assert!(suff_stats(&[f64::NAN]).is_err());
    }

    #[test]
    fn stats_are_permutation_invariant() {
        let xs = [0.1, 1e8, -3.0, -1e8, 2.5];
        let mut ys = xs;
        ys.reverse();
        let (a, b) = (suff_stats(&xs).unwrap(), suff_stats(&ys).unwrap());
        assert_eq!(a.b, b.b);
        assert!((a.b - (-0.4)).abs() < 1e-9);
        assert!((a.log_a - b.log_a).abs() <= 1e-15 * a.log_a.abs());
    }

    #[test]
    fn prior_examples() {
        assert_eq!(alpha_prior_log(&pt(2.0, 0.0), 1.0), 0.0);
        let pi2 = std::f64::consts::PI.powi(2);
        let jeffreys = 0.5 * ((1.0 - pi2 / 12.0) * (pi2 / 12.0)).ln();
        assert!((alpha_prior_log(&pt(2.0, 0.0), 0.0) - jeffreys).abs() < 1e-12);
        assert!((jeffreys + 0.962_022_919_106_465).abs() < 1e-13);
        let p = pt(3.0, 1.0);
        assert!((alpha_prior_log(&p, -1.0) - geometry::fisher(&p).det.ln()).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let s = suff_stats(&[0.3, -1.2, 2.0, 0.7, -0.1]).unwrap();
        for p in [pt(2.0, 0.3), pt(0.9, -0.5), pt(5.0, 2.0)] {
            for alpha in [-1.0, 0.0, 0.5, 1.0] {
                let g = posterior_gradient(&s, &p, alpha);
                for i in 0..2 {
                    let h = 1e-5;
                    let mut hi = p.as_array();
                    let mut lo = p.as_array();
                    hi[i] += h;
                    lo[i] -= h;
                    let fd = (log_posterior_unnorm(&s, &pt(hi[0], hi[1]), alpha)
                        - log_posterior_unnorm(&s, &pt(lo[0], lo[1]), alpha))
                        / (2.0 * h);
                    assert!((fd - g[i]).abs() < 1e-7 * g[i].abs().max(1.0), "{p:?} {alpha}: {fd} vs {}", g[i]);
                }
            }
        }
    }

    #[test]
    fn symmetric_data_kills_second_component() {
        let s = suff_stats(&[0.5, -0.5, 1.5, -1.5]).unwrap();
        for t1 in [0.5, 1.0, 4.0] {
            assert!(posterior_gradient(&s, &pt(t1, 0.0), 1.0)[1].abs() < 1e-13);
        }
        let est = mle(&s, &SolverConfig::default()).unwrap();
        assert!(est.converged);
        assert!(est.theta_hat.theta2().abs() < 1e-6);
    }

    #[test]
    fn recovers_parameters() {
        let xs = sample(&pt(3.0, 1.0), 10_000, 7).unwrap();
        let s = suff_stats(&xs).unwrap();
        let est = mle(&s, &SolverConfig::default()).unwrap();
        assert!(est.converged, "{est:?}");
        assert!(est.grad_norm <= 1e-6);
        assert!((est.theta_hat.theta1() - 3.0).abs() < 0.15);
        assert!((est.theta_hat.theta2() - 1.0).abs() < 0.15);
        for alpha in [-1.0, 0.0] {
            let m = map_estimate(&s, alpha, &SolverConfig::default()).unwrap();
            assert!(m.converged);
            assert!((m.theta_hat.theta1() - est.theta_hat.theta1()).abs() < 0.01);
        }
    }

    #[test]
    fn alpha_sweep_is_continuous() {
        let xs = sample(&pt(1.5, -0.4), 300, 11).unwrap();
        let s = suff_stats(&xs).unwrap();
        let cfg = SolverConfig::default();
        let mut prev: Option<ThetaPoint> = None;
        for k in 0..=20 {
            let alpha = -1.0 + 0.1 * k as f64;
            let m = map_estimate(&s, alpha, &cfg).unwrap();
            assert!(m.converged);
            if let Some(q) = prev {
                assert!((q.theta1() - m.theta_hat.theta1()).abs() < 0.05);
                assert!((q.theta2() - m.theta_hat.theta2()).abs() < 0.05);
            }
            prev = Some(m.theta_hat);
        }
        assert_eq!(prev.unwrap(), mle(&s, &cfg).unwrap().theta_hat);
    }

    #[test]
    fn degenerate_and_invalid_configs() {
        let s = suff_stats(&[1.0, 1.0, 1.0]).unwrap();
        assert!(s.degenerate);
        let m = mle(&s, &SolverConfig { max_iter: 20, ..Default::default() }).unwrap();
        assert!(m.degenerate_data);
        assert!(!m.converged);
        let bad = SolverConfig { backtrack_ratio: 1.0, ..Default::default() };
        assert!(map_estimate(&s, 1.0, &bad).is_err());
        let bad = SolverConfig { max_iter: 0, ..Default::default() };
        assert!(map_estimate(&s, 1.0, &bad).is_err());
    }
}
