//! Numerical integration on finite intervals and on the real line.
//!
//! Two schemes are available: tanh-sinh (double exponential) with level
//! halving, and adaptive 7/15-point Gauss-Kronrod bisection. Integrals over
//! ℝ are first truncated where a caller-supplied log-envelope of the
//! integrand falls [`TAIL_LOG_DROP`] units below its peak, then split into
//! dyadic segments `[0, 1], [1, 2], [2, 4], ...` on each side of the origin.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncate the real line where the log-envelope is this far below its peak.
pub const TAIL_LOG_DROP: f64 = 40.0;

/// Largest dyadic exponent searched for the truncation point (2^40).
const MAX_DYADIC_EXPONENT: i32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    TanhSinh,
    GaussKronrod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    scheme: Scheme,
    abs_tol: f64,
    rel_tol: f64,
    max_levels: u32,
}

impl QuadratureSpec {
    pub fn new(scheme: Scheme, abs_tol: f64, rel_tol: f64, max_levels: u32) -> Result<Self> {
        if !(abs_tol > 0.0 && rel_tol > 0.0) {
            return Err(Error::invalid("quadrature tolerances must be positive"));
        }
        if max_levels < 1 {
            return Err(Error::invalid("quadrature needs at least one level"));
        }
        Ok(QuadratureSpec { scheme, abs_tol, rel_tol, max_levels })
    }

    pub fn tanh_sinh() -> Self {
        QuadratureSpec { scheme: Scheme::TanhSinh, abs_tol: 1e-13, rel_tol: 1e-13, max_levels: 12 }
    }

    pub fn gauss_kronrod() -> Self {
        QuadratureSpec { scheme: Scheme::GaussKronrod, abs_tol: 1e-13, rel_tol: 1e-13, max_levels: 30 }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_levels(&self) -> u32 {
        self.max_levels
    }

    fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::tanh_sinh()
    }
}

/// An integral value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;

    fn add(self, rhs: Estimate) -> Estimate {
        Estimate { value: self.value + rhs.value, error: self.error + rhs.error }
    }
}

/// Integrate `f` over the finite interval `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("integration bounds must be finite"));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    if a > b {
        let est = integrate(f, b, a, spec)?;
        return Ok(Estimate { value: -est.value, error: est.error });
    }
    match spec.scheme {
        Scheme::TanhSinh => tanh_sinh(&f, a, b, spec),
        Scheme::GaussKronrod => gauss_kronrod_adaptive(&f, a, b, spec),
    }
}

/// Finite window of the real line carrying all but a negligible part of an
/// integrand, with its dyadic breakpoints in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub breakpoints: Vec<f64>,
}

impl Truncation {
    pub fn lower(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn upper(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1]
    }
}

/// Locate the integration window for an integrand whose magnitude is bounded
/// by `exp(log_envelope(x))`.
pub fn truncate<E>(log_envelope: E) -> Result<Truncation>
where
    E: Fn(f64) -> f64,
{
    let at = |x: f64| {
        let v = log_envelope(x);
        if v.is_nan() { f64::NEG_INFINITY } else { v }
    };
    let mut peak = at(0.0);
    for j in 0..=10 {
        let x = 2f64.powi(j);
        peak = peak.max(at(x)).max(at(-x));
    }
    if !peak.is_finite() {
        return Err(Error::invalid("integrand envelope has no finite peak near the origin"));
    }
    let cutoff = |sign: f64| -> Result<i32> {
        let mut prev = at(0.0);
        let mut running_peak = peak;
        for j in 0..=MAX_DYADIC_EXPONENT {
            let v = at(sign * 2f64.powi(j));
            running_peak = running_peak.max(v);
            if v < running_peak - TAIL_LOG_DROP && v <= prev {
                return Ok(j);
            }
            prev = v;
        }
        Err(Error::no_convergence("integrand tail does not decay within 2^40"))
    };
    let right = cutoff(1.0)?;
    let left = cutoff(-1.0)?;
    let mut breakpoints: Vec<f64> = (0..=left).rev().map(|j| -(2f64.powi(j))).collect();
    breakpoints.push(0.0);
    breakpoints.extend((0..=right).map(|j| 2f64.powi(j)));
    Ok(Truncation { breakpoints })
}

/// Integrate `f` over ℝ. `log_envelope(x)` must bound `ln |f(x)|` up to a
/// constant and decay in both tails.
pub fn integrate_real_line<F, E>(f: F, log_envelope: E, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
    E: Fn(f64) -> f64,
{
    let window = truncate(log_envelope)?;
    integrate_segments(&f, &window.breakpoints, spec)
}

/// Sum of integrals over consecutive breakpoint segments, sharing the
/// absolute tolerance evenly.
pub fn integrate_segments<F>(f: &F, breakpoints: &[f64], spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    let segments = breakpoints.len().saturating_sub(1).max(1);
    let local = spec.with_abs_tol(spec.abs_tol / segments as f64);
    breakpoints.windows(2).try_fold(Estimate { value: 0.0, error: 0.0 }, |acc, w| {
        Ok(acc + integrate(f, w[0], w[1], &local)?)
    })
}

fn tolerance(spec: &QuadratureSpec, value: f64) -> f64 {
    spec.abs_tol.max(spec.rel_tol * value.abs())
}

fn tanh_sinh<F>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    // Sum of w(t)·f(x(t)) over every node visited so far.
    let mut sum = FRAC_PI_2 * f(mid);
    let add_pair = |t: f64, sum: &mut f64| -> Result<bool> {
        let s = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * s).exp();
        // distance to the endpoint in units of `half`: 1 − tanh(s)
        let gap = 2.0 * e / (1.0 + e);
        let weight = FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        let offset = half * gap;
        let (xl, xr) = (a + offset, b - offset);
        if xl <= a || xr >= b || weight == 0.0 {
            return Ok(false);
        }
        let (fl, fr) = (f(xl), f(xr));
        if !(fl.is_finite() && fr.is_finite()) {
            return Err(Error::no_convergence(format!(
                "integrand not finite near x = {xl} or x = {xr}"
            )));
        }
        *sum += weight * (fl + fr);
        Ok(true)
    };
    const T_MAX: f64 = 4.0;
    let mut t = 1.0;
    while t <= T_MAX && add_pair(t, &mut sum)? {
        t += 1.0;
    }
    let mut h = 1.0;
    let mut previous = half * h * sum;
    if !previous.is_finite() {
        return Err(Error::no_convergence("integrand not finite at the interval midpoint"));
    }
    for level in 1..=spec.max_levels {
        h *= 0.5;
        let mut k = 1u64;
        loop {
            let t = k as f64 * h;
            if t > T_MAX || !add_pair(t, &mut sum)? {
                break;
            }
            k += 2;
        }
        let current = half * h * sum;
        let error = (current - previous).abs();
        if level >= 3 && error <= tolerance(spec, current) {
            return Ok(Estimate { value: current, error });
        }
        previous = current;
    }
    Err(Error::no_convergence(format!(
        "tanh-sinh on [{a}, {b}] did not reach tolerance in {} levels",
        spec.max_levels
    )))
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod evaluation on `[a, b]`: `(kronrod, gauss)` values.
pub fn gauss_kronrod_15<F>(f: &F, a: f64, b: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = half * KRONROD_NODES[i];
        let pair = f(mid - dx) + f(mid + dx);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * half, gauss * half)
}

fn gauss_kronrod_adaptive<F>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    let (k, g) = gauss_kronrod_15(f, a, b);
    let whole = Estimate { value: k, error: (k - g).abs() };
    let total_width = b - a;
    let target = tolerance(spec, whole.value);
    let mut stack = vec![(a, b, 0u32, whole)];
    let mut done = Estimate { value: 0.0, error: 0.0 };
    while let Some((lo, hi, depth, est)) = stack.pop() {
        if !est.value.is_finite() {
            return Err(Error::no_convergence(format!("integrand not finite on [{lo}, {hi}]")));
        }
        let share = target * (hi - lo) / total_width;
        if est.error <= share {
            done = done + est;
            continue;
        }
        if depth >= spec.max_levels {
            return Err(Error::no_convergence(format!(
                "Gauss-Kronrod on [{a}, {b}] exceeded {} bisection levels",
                spec.max_levels
            )));
        }
        let m = 0.5 * (lo + hi);
        for (l, r) in [(lo, m), (m, hi)] {
            let (k, g) = gauss_kronrod_15(f, l, r);
            stack.push((l, r, depth + 1, Estimate { value: k, error: (k - g).abs() }));
        }
    }
    Ok(done)
}
