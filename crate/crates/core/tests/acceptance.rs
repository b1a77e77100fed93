//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;

use betalogistic::distribution::{
    bernoulli_poly_via_moments, euler_poly_via_moments, expectation, ks_critical_value, ks_statistic,
    potential_gradient, sample, total_mass,
};
use betalogistic::geodesics::{geodesic_bundle_sampled, spread_diagnostic, Tolerances};
use betalogistic::geometry::{
    self, curvature, curvature_by_contraction, gaussian_curvature_riemannian, t_tensor,
};
use betalogistic::inference::{log_posterior_unnorm, map_estimate, posterior_gradient, suff_stats, SolverConfig};
use betalogistic::polynomials::{bernoulli_poly, euler_poly};
use betalogistic::quadrature::QuadratureSpec;
use betalogistic::verify::{bernoulli_curvatures, domain_grid, euler_curvatures, ALPHA_GRID};
use betalogistic::ThetaPoint;

type Outcome = Result<String, String>;

fn pt(a: f64, b: f64) -> ThetaPoint {
    ThetaPoint::new(a, b).unwrap()
}

fn rel_err(observed: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        observed.abs()
    } else {
        ((observed - expected) / expected).abs()
    }
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fisher_exact_values() -> Outcome {
    let p2 = PI * PI;
    let mut worst = 0.0f64;
    for (p, d) in [(pt(2.0, 0.0), [1.0 - p2 / 12.0, p2 / 12.0]), (pt(1.0, 0.0), [p2 / 12.0, p2 / 4.0])] {
        let g = geometry::fisher(&p);
        worst = worst.max(rel_err(g.g11, d[0])).max(rel_err(g.g22, d[1])).max(g.g12.abs());
    }
    check(worst <= 1e-12, format!("max relative error {worst:.2e}"))
}

fn closed_form_case(p: ThetaPoint, exact: fn(f64) -> [f64; 5], only: &[usize]) -> Outcome {
    let mut worst_rel = 0.0f64;
    let mut worst_r12 = 0.0f64;
    for alpha in ALPHA_GRID {
        let c = curvature(&p, alpha);
        let obs = [c.r1212, c.ricci11, c.ricci12, c.ricci22, c.scalar];
        let exp = exact(alpha);
        for &i in only {
            if exp[i] == 0.0 {
                // α = ±1
                worst_rel = worst_rel.max(if obs[i].abs() <= 1e-12 { 0.0 } else { f64::INFINITY });
            } else {
                worst_rel = worst_rel.max(rel_err(obs[i], exp[i]));
            }
        }
        worst_r12 = worst_r12.max(c.ricci12.abs());
    }
    check(
        worst_rel <= 1e-10 && worst_r12 <= 1e-12,
        format!("max relative error {worst_rel:.2e}, max |R12| {worst_r12:.2e}"),
    )
}

fn flatness() -> Outcome {
    let mut worst = 0.0f64;
    for p in domain_grid() {
        for alpha in [-1.0, 1.0] {
            for v in curvature(&p, alpha).values() {
                worst = worst.max(v.abs());
            }
            for v in geometry::connection(&p, 1.0).lower.iter().flatten().flatten() {
                worst = worst.max(v.abs());
            }
        }
    }
    check(worst <= 1e-12, format!("max |value| {worst:.2e} over 25 points"))
}

fn cross_formula() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_k = 0.0f64;
    for p in domain_grid() {
        for alpha in [-0.5, 0.0, 0.5] {
            let (a, b) = (curvature(&p, alpha), curvature_by_contraction(&p, alpha));
            for (x, y) in a.values().iter().zip(b.values()) {
                worst = worst.max(rel_err(*x, y));
            }
        }
        let c = curvature(&p, 0.0);
        worst_k = worst_k.max(rel_err(gaussian_curvature_riemannian(&p), c.r1212 / geometry::fisher(&p).det));
    }
    check(
        worst <= 1e-10 && worst_k <= 1e-10,
        format!("explicit vs contraction {worst:.2e}, K formula {worst_k:.2e}"),
    )
}

fn exponential_family_identities() -> Outcome {
    let q = QuadratureSpec::default();
    let (mut fisher_err, mut t_err, mut grad_err) = (0.0f64, 0.0f64, 0.0f64);
    let stat = |x: f64, i: usize| if i == 0 { betalogistic::distribution::ln_sech(x) } else { x };
    for p in domain_grid() {
        let mean = potential_gradient(&p);
        let g = geometry::fisher(&p).matrix();
        let t = t_tensor(&p);
        let scale_g = g[0][0].abs().max(g[1][1].abs());
        for i in 0..2 {
            for j in 0..2 {
                let cov = expectation(&p, |x| (stat(x, i) - mean[i]) * (stat(x, j) - mean[j]), 2, &q)
                    .map_err(|e| e.to_string())?;
                fisher_err = fisher_err.max((cov.value - g[i][j]).abs() / scale_g);
            }
        }
        let scale_t = [t.t111, t.t112, t.t122, t.t222].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (i, j, k) in [(0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)] {
            let m3 = expectation(
                &p,
                |x| (stat(x, i) - mean[i]) * (stat(x, j) - mean[j]) * (stat(x, k) - mean[k]),
                3,
                &q,
            )
            .map_err(|e| e.to_string())?;
            t_err = t_err.max((m3.value - t.component(i, j, k)).abs() / scale_t);
        }
    }
    let xs = sample(&pt(1.7, 0.4), 500, 3).map_err(|e| e.to_string())?;
    let s = suff_stats(&xs).map_err(|e| e.to_string())?;
    for p in domain_grid() {
        for alpha in [-1.0, 0.0, 1.0] {
            let g = posterior_gradient(&s, &p, alpha);
            for i in 0..2 {
                let h = 1e-6 * p.theta1();
                let mut hi = p.as_array();
                let mut lo = p.as_array();
                hi[i] += h;
                lo[i] -= h;
                let fd = (log_posterior_unnorm(&s, &pt(hi[0], hi[1]), alpha)
                    - log_posterior_unnorm(&s, &pt(lo[0], lo[1]), alpha))
                    / (2.0 * h);
                grad_err = grad_err.max((fd - g[i]).abs() / g[i].abs().max(1.0));
            }
        }
    }
    check(
        fisher_err <= 1e-8 && t_err <= 1e-7 && grad_err <= 1e-7,
        format!("Fisher {fisher_err:.2e}, T {t_err:.2e}, gradient {grad_err:.2e} (relative)"),
    )
}

fn normalization_and_sampling() -> Outcome {
    let q = QuadratureSpec::default();
    let mut worst_mass = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (i, (a, b)) in [(1.0, 0.0), (2.0, 0.0), (3.0, 1.0), (5.0, -2.0), (0.6, 0.5)].into_iter().enumerate() {
        let p = pt(a, b);
        let mass = total_mass(&p, &q).map_err(|e| e.to_string())?.value;
        worst_mass = worst_mass.max((mass - 1.0).abs());
        let xs = sample(&p, 100_000, 1000 + i as u64).map_err(|e| e.to_string())?;
        let d = ks_statistic(&p, &xs).map_err(|e| e.to_string())?;
        worst_ratio = worst_ratio.max(d / ks_critical_value(xs.len(), 0.01));
    }
    check(
        worst_mass <= 1e-10 && worst_ratio < 1.0,
        format!("max |mass - 1| {worst_mass:.2e}, max KS D / D_crit(1%) {worst_ratio:.3}"),
    )
}

fn moment_identities() -> Outcome {
    let q = QuadratureSpec::default();
    let (mut worst, mut imag) = (0.0f64, 0.0f64);
    for n in 0..=12 {
        for x in [0.0, 0.25, 0.5, 1.0] {
            let b = bernoulli_poly_via_moments(n, x, &q).map_err(|e| e.to_string())?;
            let e = euler_poly_via_moments(n, x, &q).map_err(|e| e.to_string())?;
            worst = worst
                .max((b.value_real - bernoulli_poly(n, x)).abs())
                .max((e.value_real - euler_poly(n, x)).abs());
            imag = imag.max(b.value_imag.abs()).max(e.value_imag.abs());
        }
    }
    check(worst <= 1e-8 && imag <= 1e-10, format!("max error {worst:.2e}, max imaginary {imag:.2e}"))
}

fn geodesics() -> Outcome {
    let origin = pt(1.0, 0.0);
    let tol = Tolerances::default();
    let stops: Vec<f64> = (1..50).map(|i| 0.1 * i as f64).collect();
    let paths = geodesic_bundle_sampled(&origin, 16, 5.0, &tol, &stops).map_err(|e| e.to_string())?;
    let drift = paths.iter().map(|p| p.max_speed_drift()).fold(0.0, f64::max);
    let mut mirror = 0.0f64;
    for j in 1..8 {
        let (a, b) = (&paths[j], &paths[16 - j]);
        for s in a.states.iter().filter(|s| stops.contains(&s.t) || s.t == 5.0) {
            let Some(r) = b.state_at(s.t) else {
                return Err(format!("mirror path {} missed t = {}", 16 - j, s.t));
            };
            let scale = s.theta.theta1().max(1.0);
            mirror = mirror
                .max((s.theta.theta1() - r.theta.theta1()).abs() / scale)
                .max((s.theta.theta2() + r.theta.theta2()).abs() / scale);
        }
    }
    let spread = spread_diagnostic(&origin, PI / 8.0, 1e-4, 5.0, 50, &tol).map_err(|e| e.to_string())?;
    let growing = spread.monotone_on(1.0, 5.0);
    check(
        drift < 1e-7 && mirror <= 1e-6 && growing,
        format!("speed drift {drift:.2e}, mirror mismatch {mirror:.2e} (relative), spread monotone on [1,5]: {growing}"),
    )
}

fn map_recovery() -> Outcome {
    let truth = pt(3.0, 1.0);
    let xs = sample(&truth, 10_000, 20_240_601).map_err(|e| e.to_string())?;
    let s = suff_stats(&xs).map_err(|e| e.to_string())?;
    let mut worst_truth = 0.0f64;
    let mut worst_grid = 0.0f64;
    for alpha in [-1.0, 0.0, 1.0] {
        let est = map_estimate(&s, alpha, &SolverConfig::default()).map_err(|e| e.to_string())?;
        if !est.converged {
            return Err(format!("solver did not converge at alpha {alpha}"));
        }
        let th = est.theta_hat;
        worst_truth = worst_truth.max((th.theta1() - 3.0).abs()).max((th.theta2() - 1.0).abs());
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in 0..=200 {
            for j in 0..=200 {
                let (a, b) = (2.0 + 0.01 * i as f64, 0.01 * j as f64);
                // the corner (2, 2) lies on the boundary
                let Ok(q) = ThetaPoint::new(a, b) else { continue };
                let v = log_posterior_unnorm(&s, &q, alpha);
                if v > best.0 {
                    best = (v, a, b);
                }
            }
        }
        worst_grid = worst_grid.max((th.theta1() - best.1).abs()).max((th.theta2() - best.2).abs());
    }
    check(
        worst_truth <= 0.15 && worst_grid <= 0.01,
        format!("max deviation from truth {worst_truth:.4}, from grid argmax {worst_grid:.4}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("Fisher matrix exact values", fisher_exact_values),
        ("Bernoulli-case curvatures", || closed_form_case(pt(2.0, 0.0), bernoulli_curvatures, &[0, 1, 3, 4])),
        ("Euler-case curvatures", || closed_form_case(pt(1.0, 0.0), euler_curvatures, &[0, 1, 3, 4])),
        ("+-1 flatness on the grid", flatness),
        ("cross-formula agreement", cross_formula),
        ("exponential-family identities", exponential_family_identities),
        ("normalization and sampling", normalization_and_sampling),
        ("Bernoulli/Euler moment identities", moment_identities),
        ("geodesics", geodesics),
        ("MAP recovery", map_recovery),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{}/{} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
