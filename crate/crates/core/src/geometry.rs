//! Closed-form dual geometry of the beta-logistic manifold.
//!
//! In natural coordinates the Fisher metric is the Hessian of the potential,
//! the cubic tensor is its third derivative, `Γ⁽ᵅ⁾ᵢⱼₖ = (1−α)/2 ∂ᵢ∂ⱼ∂ₖφ`, and
//! every curvature quantity scales with `1 − α²`. All of it is expressed
//! through six polygamma values: `ψ'` and `ψ''` at `(θ¹−θ²)/2`, `(θ¹+θ²)/2`
//! and `θ¹`.
//!
//! Curvature is available along two routes that share no formula: the
//! explicit closed forms ([`curvature`]) and the generic contraction of the
//! cubic tensor with the inverse metric ([`curvature_by_contraction`]).

use serde::{Deserialize, Serialize};

use crate::distribution::ThetaPoint;
use crate::specfun::polygamma_unchecked;

/// Determinants below this flag the metric as numerically near-singular.
pub const NEAR_SINGULAR_DET: f64 = 1e-12;

pub type Tensor3 = [[[f64; 2]; 2]; 2];
pub type Tensor4 = [[[[f64; 2]; 2]; 2]; 2];

/// `ψ'` and `ψ''` at the three arguments the geometry depends on.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PolygammaTerms {
    /// ψ'((θ¹−θ²)/2)
    pub tri_minus: f64,
    /// ψ'((θ¹+θ²)/2)
    pub tri_plus: f64,
    /// ψ'(θ¹)
    pub tri_one: f64,
    pub tet_minus: f64,
    pub tet_plus: f64,
    pub tet_one: f64,
}

impl PolygammaTerms {
    pub fn at(p: &ThetaPoint) -> Self {
        let (a, b, c) = (p.half_diff(), p.half_sum(), p.theta1());
        PolygammaTerms {
            tri_minus: polygamma_unchecked(1, a),
            tri_plus: polygamma_unchecked(1, b),
            tri_one: polygamma_unchecked(1, c),
            tet_minus: polygamma_unchecked(2, a),
            tet_plus: polygamma_unchecked(2, b),
            tet_one: polygamma_unchecked(2, c),
        }
    }

    /// `𝒢 = ψ'₋ψ'₊ − ψ'₁(ψ'₋ + ψ'₊)`, four times the Fisher determinant.
    pub fn script_g(&self) -> f64 {
        self.tri_minus * self.tri_plus - self.tri_one * (self.tri_minus + self.tri_plus)
    }

    /// The common factor `ψ'₊ψ''₁ψ''₋ + (ψ'₋ψ''₁ − ψ'₁ψ''₋)ψ''₊` of the
    /// curvature formulas.
    fn curvature_core(&self) -> f64 {
        self.tri_plus * self.tet_one * self.tet_minus
            + (self.tri_minus * self.tet_one - self.tri_one * self.tet_minus) * self.tet_plus
    }
}

/// Fisher information matrix at a point, with determinant and inverse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherMatrix {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
    pub det: f64,
    pub inv11: f64,
    pub inv12: f64,
    pub inv22: f64,
    /// Ratio of the largest to the smallest eigenvalue.
    pub condition: f64,
    /// Set when `det` falls below [`NEAR_SINGULAR_DET`].
    pub near_singular: bool,
}

impl FisherMatrix {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.g11, self.g12], [self.g12, self.g22]]
    }

    pub fn inverse(&self) -> [[f64; 2]; 2] {
        [[self.inv11, self.inv12], [self.inv12, self.inv22]]
    }

    /// `g(u, v)`.
    pub fn inner(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        self.g11 * u[0] * v[0] + self.g12 * (u[0] * v[1] + u[1] * v[0]) + self.g22 * u[1] * v[1]
    }

    pub fn norm(&self, v: [f64; 2]) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    /// Lower-triangular `L` with `G = L Lᵀ`.
    pub fn cholesky(&self) -> [[f64; 2]; 2] {
        let l11 = self.g11.sqrt();
        let l21 = self.g12 / l11;
        let l22 = (self.g22 - l21 * l21).sqrt();
        [[l11, 0.0], [l21, l22]]
    }
}

pub fn fisher(p: &ThetaPoint) -> FisherMatrix {
    fisher_from_terms(&PolygammaTerms::at(p))
}

pub(crate) fn fisher_from_terms(t: &PolygammaTerms) -> FisherMatrix {
    let g11 = 0.25 * (t.tri_plus + t.tri_minus) - t.tri_one;
    let g12 = 0.25 * (t.tri_plus - t.tri_minus);
    let g22 = 0.25 * (t.tri_plus + t.tri_minus);
    let gcal = t.script_g();
    let det = 0.25 * gcal;
    let inv11 = (t.tri_plus + t.tri_minus) / gcal;
    let inv12 = (t.tri_minus - t.tri_plus) / gcal;
    let inv22 = (t.tri_plus + t.tri_minus - 4.0 * t.tri_one) / gcal;
    let half_trace = 0.5 * (g11 + g22);
    let spread = (0.25 * (g11 - g22) * (g11 - g22) + g12 * g12).sqrt();
    let condition = (half_trace + spread) / (half_trace - spread);
    FisherMatrix {
        g11,
        g12,
        g22,
        det,
        inv11,
        inv12,
        inv22,
        condition,
        near_singular: det < NEAR_SINGULAR_DET,
    }
}

/// `𝒢`, with `det G = 𝒢 / 4`.
pub fn script_g(p: &ThetaPoint) -> f64 {
    PolygammaTerms::at(p).script_g()
}

/// Analytic gradient of `ln det G` with respect to `(θ¹, θ²)`.
pub fn ln_det_gradient(p: &ThetaPoint) -> [f64; 2] {
    let t = PolygammaTerms::at(p);
    let gcal = t.script_g();
    // ∂ψ'₋ = (½, −½)ψ''₋,  ∂ψ'₊ = (½, ½)ψ''₊,  ∂ψ'₁ = (1, 0)ψ''₁
    let d1 = 0.5 * t.tet_minus * t.tri_plus + 0.5 * t.tri_minus * t.tet_plus
        - t.tet_one * (t.tri_minus + t.tri_plus)
        - t.tri_one * 0.5 * (t.tet_minus + t.tet_plus);
    let d2 = -0.5 * t.tet_minus * t.tri_plus + 0.5 * t.tri_minus * t.tet_plus
        - t.tri_one * 0.5 * (t.tet_plus - t.tet_minus);
    [d1 / gcal, d2 / gcal]
}

/// Amari-Chentsov tensor `Tᵢⱼₖ = ∂ᵢ∂ⱼ∂ₖφ`; four distinct entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTensor {
    pub t111: f64,
    pub t112: f64,
    pub t122: f64,
    pub t222: f64,
}

impl TTensor {
    /// Component with zero-based indices.
    pub fn component(&self, i: usize, j: usize, k: usize) -> f64 {
        match i + j + k {
            0 => self.t111,
            1 => self.t112,
            2 => self.t122,
            _ => self.t222,
        }
    }

    pub fn full(&self) -> Tensor3 {
        let mut out = [[[0.0; 2]; 2]; 2];
        for (i, plane) in out.iter_mut().enumerate() {
            for (j, row) in plane.iter_mut().enumerate() {
                for (k, v) in row.iter_mut().enumerate() {
                    *v = self.component(i, j, k);
                }
            }
        }
        out
    }
}

pub fn t_tensor(p: &ThetaPoint) -> TTensor {
    t_tensor_from_terms(&PolygammaTerms::at(p))
}

fn t_tensor_from_terms(t: &PolygammaTerms) -> TTensor {
    let t112 = 0.125 * (t.tet_plus - t.tet_minus);
    TTensor {
        t111: 0.125 * (t.tet_plus + t.tet_minus) - t.tet_one,
        t112,
        t122: 0.125 * (t.tet_plus + t.tet_minus),
        t222: t112,
    }
}

/// α-connection coefficients at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionField {
    pub alpha: f64,
    /// `lower[i][j][k] = Γ⁽ᵅ⁾ᵢⱼₖ`
    pub lower: Tensor3,
    /// `raised[k][i][j] = Γ^k⁽ᵅ⁾ᵢⱼ = Γ⁽ᵅ⁾ᵢⱼₛ gˢᵏ`
    pub raised: Tensor3,
}

pub fn connection(p: &ThetaPoint, alpha: f64) -> ConnectionField {
    let t = PolygammaTerms::at(p);
    connection_from_terms(&t, &fisher_from_terms(&t), alpha)
}

fn connection_from_terms(t: &PolygammaTerms, g: &FisherMatrix, alpha: f64) -> ConnectionField {
    let scale = (1.0 - alpha) / 16.0;
    let c111 = scale * (t.tet_plus + t.tet_minus - 8.0 * t.tet_one);
    let c112 = scale * (t.tet_plus - t.tet_minus);
    let c122 = scale * (t.tet_plus + t.tet_minus);
    let c222 = c112;
    let lower = [
        [[c111, c112], [c112, c122]],
        [[c112, c122], [c122, c222]],
    ];
    let inv = g.inverse();
    let mut raised = [[[0.0; 2]; 2]; 2];
    for (k, plane) in raised.iter_mut().enumerate() {
        for (i, row) in plane.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..2).map(|s| lower[i][j][s] * inv[s][k]).sum();
            }
        }
    }
    ConnectionField { alpha, lower, raised }
}

/// α-curvature quantities at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub alpha: f64,
    pub r1212: f64,
    pub ricci11: f64,
    pub ricci12: f64,
    pub ricci22: f64,
    pub scalar: f64,
    pub gaussian: f64,
}

impl CurvatureReport {
    pub fn values(&self) -> [f64; 6] {
        [self.r1212, self.ricci11, self.ricci12, self.ricci22, self.scalar, self.gaussian]
    }
}

/// Curvature from the explicit closed-form expressions.
pub fn curvature(p: &ThetaPoint, alpha: f64) -> CurvatureReport {
    let t = PolygammaTerms::at(p);
    let gcal = t.script_g();
    let factor = 1.0 - alpha * alpha;
    let r1212 = factor / (16.0 * gcal)
        * (t.tri_one * t.tet_plus * t.tet_minus
            - t.tet_one * (t.tri_plus * t.tet_minus + t.tri_minus * t.tet_plus));
    let core = t.curvature_core();
    let ricci_scale = factor * core / (16.0 * gcal * gcal);
    let ricci11 = -(-4.0 * t.tri_one + t.tri_minus + t.tri_plus) * ricci_scale;
    let ricci12 = (t.tri_minus - t.tri_plus) * ricci_scale;
    let ricci22 = -(t.tri_minus + t.tri_plus) * ricci_scale;
    CurvatureReport {
        alpha,
        r1212,
        ricci11,
        ricci12,
        ricci22,
        scalar: 8.0 * r1212 / gcal,
        gaussian: 4.0 * r1212 / gcal,
    }
}

/// Full curvature tensor `R⁽ᵅ⁾ᵢⱼₖₗ = (1−α²)/4 gᵐⁿ (Tₖₘᵢ Tⱼₗₙ − Tₖₘⱼ Tᵢₗₙ)`.
pub fn curvature_tensor(p: &ThetaPoint, alpha: f64) -> Tensor4 {
    let t = PolygammaTerms::at(p);
    let inv = fisher_from_terms(&t).inverse();
    let tt = t_tensor_from_terms(&t).full();
    let factor = 0.25 * (1.0 - alpha * alpha);
    let mut r = [[[[0.0; 2]; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let mut acc = 0.0;
                    for m in 0..2 {
                        for n in 0..2 {
                            acc += inv[m][n] * (tt[k][m][i] * tt[j][l][n] - tt[k][m][j] * tt[i][l][n]);
                        }
                    }
                    r[i][j][k][l] = factor * acc;
                }
            }
        }
    }
    r
}

/// Curvature by generic contraction of [`curvature_tensor`] with the inverse
/// metric: `Rᵢₖ = Rᵢⱼₖₗ gʲˡ`, `R = Rᵢₖ gⁱᵏ`, `K = R₁₂₁₂ / det G`.
pub fn curvature_by_contraction(p: &ThetaPoint, alpha: f64) -> CurvatureReport {
    let g = fisher(p);
    let inv = g.inverse();
    let r = curvature_tensor(p, alpha);
    let mut ricci = [[0.0; 2]; 2];
    for (i, row) in ricci.iter_mut().enumerate() {
        for (k, v) in row.iter_mut().enumerate() {
            *v = (0..2)
                .flat_map(|j| (0..2).map(move |l| (j, l)))
                .map(|(j, l)| r[i][j][k][l] * inv[j][l])
                .sum();
        }
    }
    let scalar = (0..2)
        .flat_map(|i| (0..2).map(move |k| (i, k)))
        .map(|(i, k)| ricci[i][k] * inv[i][k])
        .sum();
    CurvatureReport {
        alpha,
        r1212: r[0][1][0][1],
        ricci11: ricci[0][0],
        ricci12: ricci[0][1],
        ricci22: ricci[1][1],
        scalar,
        gaussian: r[0][1][0][1] / g.det,
    }
}

/// Gaussian curvature of the Fisher (α = 0) metric, closed form.
pub fn gaussian_curvature_riemannian(p: &ThetaPoint) -> f64 {
    let t = PolygammaTerms::at(p);
    let denom = t.tri_one * t.tri_minus + (t.tri_one - t.tri_minus) * t.tri_plus;
    let denom = 4.0 * denom * denom;
    t.tet_plus * (t.tet_minus * t.tri_one - t.tet_one * t.tri_minus) / denom
        - t.tet_one * t.tet_minus * t.tri_plus / denom
}
