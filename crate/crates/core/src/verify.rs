//! Closed-form value table: observed vs exact values at the Bernoulli point
//! `(2, 0)` and the Euler point `(1, 0)`, plus grid-wide structural checks.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::distribution::{bernoulli_poly_via_moments, euler_poly_via_moments, total_mass, ThetaPoint};
use crate::geometry::{self, curvature, curvature_by_contraction, gaussian_curvature_riemannian};
use crate::polynomials::{bernoulli_poly, euler_poly};
use crate::quadrature::QuadratureSpec;
use crate::Result;

/// Apéry's constant ζ(3).
pub const ZETA3: f64 = 1.202_056_903_159_594_3;

pub const ALPHA_GRID: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

/// 25 points: θ¹ ∈ {0.5, 1, 2, 4, 8}, θ² = θ¹·{−0.8, −0.4, 0, 0.4, 0.8}.
pub fn domain_grid() -> Vec<ThetaPoint> {
    let mut out = Vec::with_capacity(25);
    for t1 in [0.5, 1.0, 2.0, 4.0, 8.0] {
        for r in [-0.8, -0.4, 0.0, 0.4, 0.8] {
            out.push(ThetaPoint::new(t1, r * t1).expect("grid point inside the domain"));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
}

impl Tolerance {
    pub fn accepts(&self, observed: f64, expected: f64) -> bool {
        let err = (observed - expected).abs();
        match *self {
            Tolerance::Absolute(t) => err <= t,
            Tolerance::Relative(t) => err <= t * expected.abs(),
        }
    }

    fn describe(&self) -> String {
        match self {
            Tolerance::Absolute(t) => format!("abs {t:.0e}"),
            Tolerance::Relative(t) => format!("rel {t:.0e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: Tolerance,
}

impl Check {
    fn new(name: impl Into<String>, observed: f64, expected: f64, tolerance: Tolerance) -> Self {
        Check { name: name.into(), observed, expected, tolerance }
    }

    /// Relative tolerance, falling back to absolute when the exact value is 0.
    fn exact(name: impl Into<String>, observed: f64, expected: f64, rel: f64, abs: f64) -> Self {
        let tol = if expected == 0.0 { Tolerance::Absolute(abs) } else { Tolerance::Relative(rel) };
        Check::new(name, observed, expected, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: Tolerance,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub all_pass: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &VerifyRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.name.len()).max().unwrap_or(4);
        let mut s = String::new();
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{}  {:<width$}  observed {:>24.16e}  expected {:>24.16e}  {}",
                if r.pass { "PASS" } else { "FAIL" },
                r.name,
                r.observed,
                r.expected,
                r.tolerance.describe(),
            );
        }
        let passed = self.rows.iter().filter(|r| r.pass).count();
        let _ = writeln!(s, "{passed}/{} checks passed", self.rows.len());
        s
    }
}

pub fn evaluate(checks: Vec<Check>) -> VerifyReport {
    let rows: Vec<VerifyRow> = checks
        .into_iter()
        .map(|c| VerifyRow {
            pass: c.observed.is_finite() && c.tolerance.accepts(c.observed, c.expected),
            name: c.name,
            observed: c.observed,
            expected: c.expected,
            tolerance: c.tolerance,
        })
        .collect();
    let all_pass = rows.iter().all(|r| r.pass);
    VerifyReport { rows, all_pass }
}

/// Exact curvature values `[R1212, R11, R12, R22, R]` at the Bernoulli point.
pub fn bernoulli_curvatures(alpha: f64) -> [f64; 5] {
    let (z, p2) = (ZETA3, PI * PI);
    let f = 1.0 - alpha * alpha;
    let w = z * (6.0 * z + p2 * z - 2.0 * p2);
    let d = p2 - 12.0;
    [
        3.0 * f * w / (2.0 * p2 * d),
        18.0 * f * w / (p2 * p2 * d),
        0.0,
        -18.0 * f * w / (p2 * d * d),
        -432.0 * f * w / (p2 * p2 * d * d),
    ]
}

/// Exact curvature values `[R1212, R11, R12, R22, R]` at the Euler point.
pub fn euler_curvatures(alpha: f64) -> [f64; 5] {
    let (z2, p2) = (ZETA3 * ZETA3, PI * PI);
    let f = 1.0 - alpha * alpha;
    [
        7.0 * f * z2 / (2.0 * p2),
        14.0 * f * z2 / (p2 * p2),
        0.0,
        42.0 * f * z2 / (p2 * p2),
        336.0 * f * z2 / (p2 * p2 * p2),
    ]
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale.max(f64::MIN_POSITIVE)
}

/// Every row of the table with its exact value.
pub fn checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let p2 = PI * PI;
    let bern = ThetaPoint::new(2.0, 0.0)?;
    let euler = ThetaPoint::new(1.0, 0.0)?;

    for (label, p, diag) in [("(2,0)", bern, [1.0 - p2 / 12.0, p2 / 12.0]), ("(1,0)", euler, [p2 / 12.0, p2 / 4.0])] {
        let g = geometry::fisher(&p);
        out.push(Check::exact(format!("fisher {label} g11"), g.g11, diag[0], 1e-12, 1e-12));
        out.push(Check::exact(format!("fisher {label} g12"), g.g12, 0.0, 1e-12, 1e-12));
        out.push(Check::exact(format!("fisher {label} g22"), g.g22, diag[1], 1e-12, 1e-12));
    }

    out.push(Check::exact("T122 (2,0)", geometry::t_tensor(&bern).t122, -ZETA3 / 2.0, 1e-12, 1e-12));
    out.push(Check::exact(
        "connection (2,0) a=0 G111",
        geometry::connection(&bern, 0.0).lower[0][0][0],
        (12.0 * ZETA3 - 16.0) / 16.0,
        1e-12,
        1e-12,
    ));

    let names = ["R1212", "R11", "R12", "R22", "R"];
    for (label, p, exact) in [
        ("bernoulli", bern, bernoulli_curvatures as fn(f64) -> [f64; 5]),
        ("euler", euler, euler_curvatures),
    ] {
        for alpha in ALPHA_GRID {
            let c = curvature(&p, alpha);
            let observed = [c.r1212, c.ricci11, c.ricci12, c.ricci22, c.scalar];
            for ((name, o), e) in names.iter().zip(observed).zip(exact(alpha)) {
                out.push(Check::exact(format!("{label} {name} a={alpha}"), o, e, 1e-10, 1e-12));
            }
        }
    }
    out.push(Check::exact(
        "gaussian K (1,0)",
        gaussian_curvature_riemannian(&euler),
        168.0 * ZETA3 * ZETA3 / (p2 * p2 * p2),
        1e-10,
        1e-12,
    ));

    let grid = domain_grid();
    let mut flat = 0.0f64;
    let mut cross = 0.0f64;
    let mut k_cross = 0.0f64;
    for p in &grid {
        for alpha in [-1.0, 1.0] {
            let worst = curvature(p, alpha).values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            flat = flat.max(worst);
        }
        for alpha in ALPHA_GRID {
            let (a, b) = (curvature(p, alpha), curvature_by_contraction(p, alpha));
            if alpha.abs() < 1.0 {
                cross = cross.max(max_rel_diff(&a.values(), &b.values()));
            }
        }
        let k = gaussian_curvature_riemannian(p);
        let c = curvature(p, 0.0);
        k_cross = k_cross.max(((k - c.gaussian) / k).abs());
    }
    out.push(Check::new("grid max |curvature| a=+-1", flat, 0.0, Tolerance::Absolute(1e-12)));
    out.push(Check::new("grid explicit vs contraction", cross, 0.0, Tolerance::Absolute(1e-10)));
    out.push(Check::new("grid K formula vs R1212/det", k_cross, 0.0, Tolerance::Absolute(1e-10)));

    let q = QuadratureSpec::default();
    for (a, b) in [(1.0, 0.0), (2.0, 0.0), (3.0, 1.0), (5.0, -2.0), (0.6, 0.5)] {
        let mass = total_mass(&ThetaPoint::new(a, b)?, &q)?;
        out.push(Check::new(format!("mass ({a},{b})"), mass.value, 1.0, Tolerance::Absolute(1e-10)));
    }

    let mut bern_err = 0.0f64;
    let mut euler_err = 0.0f64;
    let mut imag = 0.0f64;
    for n in 0..=12 {
        for x in [0.0, 0.25, 0.5, 1.0] {
            let b = bernoulli_poly_via_moments(n, x, &q)?;
            let e = euler_poly_via_moments(n, x, &q)?;
            bern_err = bern_err.max((b.value_real - bernoulli_poly(n, x)).abs());
            euler_err = euler_err.max((e.value_real - euler_poly(n, x)).abs());
            imag = imag.max(b.value_imag.abs()).max(e.value_imag.abs());
        }
    }
    out.push(Check::new("bernoulli moments max error", bern_err, 0.0, Tolerance::Absolute(1e-8)));
    out.push(Check::new("euler moments max error", euler_err, 0.0, Tolerance::Absolute(1e-8)));
    out.push(Check::new("moments max imaginary part", imag, 0.0, Tolerance::Absolute(1e-10)));
    Ok(out)
}

pub fn run() -> Result<VerifyReport> {
    Ok(evaluate(checks()?))
}
