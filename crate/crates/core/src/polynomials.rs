//! Bernoulli and Euler numbers and polynomials from their classical
//! recurrences.
//!
//! These are the reference values that the moment integrals in
//! [`crate::distribution`] are checked against; they share no code path
//! with the quadrature route.

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        row[k] = row[k - 1] * (n + 1 - k) as f64 / k as f64;
    }
    row
}

/// Bernoulli numbers `B₀..=B_n` with `B₁ = −1/2`, from
/// `Σ_{k=0}^{n} C(n+1, k) B_k = 0`.
pub fn bernoulli_numbers(n: usize) -> Vec<f64> {
    let mut b = vec![0.0; n + 1];
    b[0] = 1.0;
    for m in 1..=n {
        let c = binomial_row(m + 1);
        let s: f64 = (0..m).map(|k| c[k] * b[k]).sum();
        b[m] = -s / (m + 1) as f64;
    }
    b
}

/// `B_n(x) = Σ_k C(n, k) B_k x^(n−k)`.
pub fn bernoulli_poly(n: usize, x: f64) -> f64 {
    let b = bernoulli_numbers(n);
    let c = binomial_row(n);
    (0..=n).map(|k| c[k] * b[k] * x.powi((n - k) as i32)).sum()
}

/// `E_n(x)` from `E_n(x) + Σ_{k=0}^{n} C(n, k) E_k(x) = 2xⁿ`.
pub fn euler_poly(n: usize, x: f64) -> f64 {
    let mut e = vec![0.0; n + 1];
    for m in 0..=n {
        let c = binomial_row(m);
        let s: f64 = (0..m).map(|k| c[k] * e[k]).sum();
        e[m] = x.powi(m as i32) - 0.5 * s;
    }
    e[n]
}
