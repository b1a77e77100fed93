//! Real special functions: log-gamma, polygamma of orders 0..=3, Hurwitz and
//! Riemann zeta, generalized harmonic numbers and log-beta.
//!
//! Everything here is restricted to positive real arguments. Polygamma and
//! log-gamma shift the argument upward with the functional recurrence until
//! it reaches [`ASYMPTOTIC_THRESHOLD`], then sum an asymptotic series with
//! the Bernoulli numbers `B₂..B₂₀`. The Hurwitz zeta function uses
//! Euler-Maclaurin summation with the same Bernoulli table.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Arguments at or above this value go straight to the asymptotic series.
pub const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

/// Bernoulli numbers B₂, B₄, ..., B₂₀.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Order of a polygamma function, `0 ≤ m ≤ 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolyOrder(u8);

impl PolyOrder {
    pub const DIGAMMA: PolyOrder = PolyOrder(0);
    pub const TRIGAMMA: PolyOrder = PolyOrder(1);
    pub const TETRAGAMMA: PolyOrder = PolyOrder(2);
    pub const PENTAGAMMA: PolyOrder = PolyOrder(3);

    pub fn new(m: u32) -> Result<Self> {
        if m > 3 {
            return Err(Error::domain(format!(
                "polygamma order must be in 0..=3, got {m}"
            )));
        }
        Ok(PolyOrder(m as u8))
    }

    pub fn get(self) -> u32 {
        u32::from(self.0)
    }
}

impl TryFrom<u32> for PolyOrder {
    type Error = Error;

    fn try_from(m: u32) -> Result<Self> {
        PolyOrder::new(m)
    }
}

/// Validated argument pair `(s, a)` for the Hurwitz zeta function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaArg {
    s: f64,
    a: f64,
}

impl ZetaArg {
    pub fn new(s: f64, a: f64) -> Result<Self> {
        if !(s.is_finite() && s > 1.0) {
            return Err(Error::domain(format!("zeta exponent must satisfy s > 1, got {s}")));
        }
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::domain(format!("zeta shift must satisfy a > 0, got {a}")));
        }
        Ok(ZetaArg { s, a })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn a(&self) -> f64 {
        self.a
    }
}

fn check_positive(name: &str, z: f64) -> Result<()> {
    if z.is_finite() && z > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} requires a positive finite argument, got {z}")))
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * f64::from(k))
}

/// `ln Γ(z)` for `z > 0`.
pub fn log_gamma(z: f64) -> Result<f64> {
    check_positive("log_gamma", z)?;
    Ok(ln_gamma_unchecked(z))
}

pub(crate) fn ln_gamma_unchecked(z: f64) -> f64 {
    if z >= ASYMPTOTIC_THRESHOLD {
        return stirling(z);
    }
    // Below the threshold, move z into [1.5, 2.5) where a Taylor series
    // about 2 is accurate even next to the zeros at 1 and 2.
    if z < 1.5 {
        // Γ(z) = Γ(z + n) / (z (z+1) ... (z+n-1))
        let mut shifted = z;
        let mut product = 1.0;
        while shifted < 1.5 {
            product *= shifted;
            shifted += 1.0;
        }
        ln_gamma_near_two(shifted - 2.0) - product.ln()
    } else {
        // Γ(z) = (z-1)(z-2)...(z-n) Γ(z - n)
        let mut shifted = z;
        let mut product = 1.0;
        while shifted >= 2.5 {
            shifted -= 1.0;
            product *= shifted;
        }
        ln_gamma_near_two(shifted - 2.0) + product.ln()
    }
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `ζ(k) − 1 = ζ(k, 2)` for `k = 0..=40` (entries 0 and 1 unused).
fn zeta_minus_one_table() -> &'static [f64; 41] {
    static TABLE: OnceLock<[f64; 41]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; 41];
        for (k, v) in t.iter_mut().enumerate().skip(2) {
            *v = hurwitz_zeta(ZetaArg { s: k as f64, a: 2.0 });
        }
        t
    })
}

/// `ln Γ(2 + ε) = (1 − γ)ε + Σ_{k≥2} (−1)ᵏ (ζ(k) − 1) εᵏ / k` for `|ε| ≤ ½`.
fn ln_gamma_near_two(eps: f64) -> f64 {
    let table = zeta_minus_one_table();
    let mut power = -eps;
    let mut series = 0.0;
    for (k, zm1) in table.iter().enumerate().skip(2) {
        power *= -eps;
        series += zm1 * power / k as f64;
    }
    (1.0 - EULER_GAMMA) * eps + series
}

fn stirling(z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut power = inv;
    let mut series = 0.0;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let two_k = 2.0 * (k as f64 + 1.0);
        series += b / (two_k * (two_k - 1.0)) * power;
        power *= inv2;
    }
    (z - 0.5) * z.ln() - z + HALF_LN_2PI + series
}

/// `ψ⁽ᵐ⁾(z)`, the m-th derivative of the digamma function, for `z > 0`.
pub fn polygamma(m: PolyOrder, z: f64) -> Result<f64> {
    check_positive("polygamma", z)?;
    Ok(polygamma_unchecked(m.get(), z))
}

pub fn digamma(z: f64) -> Result<f64> {
    polygamma(PolyOrder::DIGAMMA, z)
}

pub fn trigamma(z: f64) -> Result<f64> {
    polygamma(PolyOrder::TRIGAMMA, z)
}

pub(crate) fn polygamma_unchecked(m: u32, z: f64) -> f64 {
    debug_assert!(m <= 3);
    // ψ⁽ᵐ⁾(z) = ψ⁽ᵐ⁾(z+1) − (−1)ᵐ m! / z^(m+1)
    let mut shifted = z;
    let mut shift_sum = 0.0;
    let exponent = (m + 1) as i32;
    while shifted < ASYMPTOTIC_THRESHOLD {
        shift_sum += shifted.powi(-exponent);
        shifted += 1.0;
    }
    let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
    polygamma_asymptotic(m, shifted) - sign_m * factorial(m) * shift_sum
}

fn polygamma_asymptotic(m: u32, z: f64) -> f64 {
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    if m == 0 {
        let mut power = inv2;
        let mut series = 0.0;
        for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
            series += b / (2.0 * (k as f64 + 1.0)) * power;
            power *= inv2;
        }
        return z.ln() - 0.5 * inv - series;
    }
    let mi = m as i32;
    let lead = factorial(m - 1) * inv.powi(mi) + 0.5 * factorial(m) * inv.powi(mi + 1);
    // B₂ₖ (2k+m−1)! / (2k)! / z^(2k+m)
    let mut power = inv.powi(mi + 2);
    let mut series = 0.0;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let two_k = 2 * (k as u32 + 1);
        // (2k+m−1)! / (2k)! = (2k+1)(2k+2)...(2k+m−1)
        let ratio = ((two_k + 1)..(two_k + m)).fold(1.0, |acc, j| acc * f64::from(j));
        series += b * ratio * power;
        power *= inv2;
    }
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    sign * (lead + series)
}

/// Hurwitz zeta `ζ(s, a) = Σₙ (n + a)^(−s)` by Euler-Maclaurin summation.
pub fn hurwitz_zeta(arg: ZetaArg) -> f64 {
    let ZetaArg { s, a } = arg;
    // Direct terms until the tail start w satisfies w ≥ max(20, s); beyond
    // that the correction series decreases geometrically.
    let start = 20.0_f64.max(s);
    let direct_terms = if a < start { (start - a).ceil() as u64 } else { 0 };
    let mut direct = 0.0;
    for k in (0..direct_terms).rev() {
        direct += (a + k as f64).powf(-s);
    }
    let w = a + direct_terms as f64;
    let w_pow = w.powf(-s);
    let mut tail = w * w_pow / (s - 1.0) + 0.5 * w_pow;

    // B₂ⱼ/(2j)! · s(s+1)···(s+2j−2) · w^(−s−2j+1)
    let inv_w = 1.0 / w;
    let mut rising = s;
    let mut fact = 2.0;
    let mut power = w_pow * inv_w;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * power;
        tail += term;
        let two_j = 2.0 * (j as f64 + 1.0);
        rising *= (s + two_j - 1.0) * (s + two_j);
        fact *= (two_j + 1.0) * (two_j + 2.0);
        power *= inv_w * inv_w;
    }
    direct + tail
}

/// Riemann zeta `ζ(s) = ζ(s, 1)` for `s > 1`.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    Ok(hurwitz_zeta(ZetaArg::new(s, 1.0)?))
}

/// Generalized harmonic number `H_n^(r) = Σ_{k=1..n} k^(−r)`.
pub fn harmonic_number(n: u64, r: u32) -> Result<f64> {
    if r == 0 {
        return Err(Error::domain("harmonic number order r must be at least 1"));
    }
    let r = r as i32;
    // smallest terms first
    Ok((1..=n).rev().map(|k| (k as f64).powi(-r)).sum())
}

/// `ln B(x, y) = ln Γ(x) + ln Γ(y) − ln Γ(x + y)`.
pub fn log_beta(x: f64, y: f64) -> Result<f64> {
    check_positive("log_beta", x)?;
    check_positive("log_beta", y)?;
    Ok(ln_beta_unchecked(x, y))
}

pub(crate) fn ln_beta_unchecked(x: f64, y: f64) -> f64 {
    ln_gamma_unchecked(x) + ln_gamma_unchecked(y) - ln_gamma_unchecked(x + y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn zeta3() -> f64 {
        riemann_zeta(3.0).unwrap()
    }

    #[test]
    fn log_gamma_examples() {
        assert_eq!(log_gamma(1.0).unwrap().abs() < 1e-15, true);
        assert!(rel(log_gamma(0.5).unwrap(), 0.5 * PI.ln()) < 1e-14);
        assert!(rel(log_gamma(5.0).unwrap(), 24.0_f64.ln()) < 1e-14);
    }

    #[test]
    fn log_gamma_against_factorials() {
        let mut fact: f64 = 1.0;
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        for n in 2..=170u32 {
            // Γ(n+1) = n!
            fact *= f64::from(n);
            let z = f64::from(n) + 1.0;
            assert!(rel(log_gamma(z).unwrap(), fact.ln()) < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn log_gamma_small_and_large() {
        // Γ(z) ≈ 1/z − γ near zero
        let z = 1e-3;
        let gamma: f64 = 0.577_215_664_901_532_9;
        let approx: f64 = (1.0 / z - gamma + 0.989_055_995_327_972_5 * z).ln();
        assert!(rel(log_gamma(z).unwrap(), approx) < 1e-9);
        // Stirling leading part dominates at 1e6
        let big: f64 = 1e6;
        let lead = (big - 0.5) * big.ln() - big + HALF_LN_2PI + 1.0 / (12.0 * big);
        assert!(rel(log_gamma(big).unwrap(), lead) < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(polygamma(PolyOrder::TRIGAMMA, 0.0).is_err());
        assert!(PolyOrder::new(4).is_err());
        assert!(ZetaArg::new(1.0, 1.0).is_err());
        assert!(ZetaArg::new(2.0, 0.0).is_err());
        assert!(log_beta(1.0, -1.0).is_err());
        assert!(harmonic_number(3, 0).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn polygamma_examples() {
        let z2 = PI * PI / 6.0;
        assert!(rel(polygamma(PolyOrder::TRIGAMMA, 1.0).unwrap(), z2) < 1e-13);
        assert!(rel(polygamma(PolyOrder::TRIGAMMA, 2.0).unwrap(), z2 - 1.0) < 1e-13);
        assert!(rel(polygamma(PolyOrder::TETRAGAMMA, 1.0).unwrap(), -2.0 * zeta3()) < 1e-13);
        assert!(rel(polygamma(PolyOrder::TETRAGAMMA, 1.0).unwrap(), -2.404_113_806_319_188_5) < 1e-13);
        // ψ(1) = −γ, ψ(1/2) = −γ − 2 ln 2
        let gamma: f64 = 0.577_215_664_901_532_9;
        assert!(rel(digamma(1.0).unwrap(), -gamma) < 1e-14);
        assert!(rel(digamma(0.5).unwrap(), -gamma - 2.0 * 2f64.ln()) < 1e-14);
        // ψ'''(1) = 6 ζ(4) = π⁴/15
        assert!(rel(polygamma(PolyOrder::PENTAGAMMA, 1.0).unwrap(), PI.powi(4) / 15.0) < 1e-13);
    }

    #[test]
    fn polygamma_at_integers_matches_harmonic_form() {
        // ψ⁽ᵐ⁾(k) = (−1)^(m+1) m! (ζ(m+1) − H_{k−1}^(m+1))
        for m in 1..=3u32 {
            let zeta = riemann_zeta(f64::from(m + 1)).unwrap();
            let sign = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
            for k in 1..=30u64 {
                let expected = sign
                    * factorial(m)
                    * (zeta - harmonic_number(k - 1, m + 1).unwrap());
                let got = polygamma(PolyOrder::new(m).unwrap(), k as f64).unwrap();
                assert!(rel(got, expected) < 1e-11, "m={m} k={k}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn zeta_examples() {
        let z2 = PI * PI / 6.0;
        assert!(rel(hurwitz_zeta(ZetaArg::new(2.0, 1.0).unwrap()), z2) < 1e-14);
        assert!(rel(hurwitz_zeta(ZetaArg::new(4.0, 1.0).unwrap()), PI.powi(4) / 90.0) < 1e-14);
        assert!(rel(hurwitz_zeta(ZetaArg::new(2.0, 3.0).unwrap()), z2 - 1.25) < 1e-14);
    }

    #[test]
    fn zeta_four_against_direct_sum() {
        // direct partial sum with the integral remainder bracket
        let n = 20_000u64;
        let partial: f64 = (1..=n).rev().map(|k| (k as f64).powi(-4)).sum();
        let lower = partial + 1.0 / (3.0 * ((n + 1) as f64).powi(3));
        let upper = partial + 1.0 / (3.0 * (n as f64).powi(3));
        let z = hurwitz_zeta(ZetaArg::new(4.0, 1.0).unwrap());
        assert!(z >= lower - 1e-15 && z <= upper + 1e-15);
    }

    #[test]
    fn zeta_large_exponent_and_shift() {
        // ζ(s, a) ≈ a^(−s) when a is small compared with 1
        let a = 0.01;
        let s = 40.0;
        let z = hurwitz_zeta(ZetaArg::new(s, a).unwrap());
        assert!(rel(z, a.powf(-s)) < 1e-14);
        // ζ(s, a) ≈ a^(1−s)/(s−1) + a^(−s)/2 for large a
        let a = 1e6;
        let z = hurwitz_zeta(ZetaArg::new(2.0, a).unwrap());
        assert!(rel(z, 1.0 / a + 0.5 / (a * a) + 1.0 / (6.0 * a * a * a)) < 1e-14);
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic_number(0, 2).unwrap(), 0.0);
        assert!((harmonic_number(3, 1).unwrap() - 11.0 / 6.0).abs() < 1e-15);
        assert_eq!(harmonic_number(2, 3).unwrap(), 9.0 / 8.0);
    }

    #[test]
    fn log_beta_examples() {
        assert!(log_beta(1.0, 1.0).unwrap().abs() < 1e-15);
        assert!(rel(log_beta(0.5, 0.5).unwrap(), PI.ln()) < 1e-14);
        assert!(rel(log_beta(2.0, 3.0).unwrap(), (1.0f64 / 12.0).ln()) < 1e-14);
    }

    #[test]
    fn zeta_polygamma_relation_on_grid() {
        for &z in &[0.1, 0.5, 1.0, 2.5, 10.0, 1000.0] {
            for m in 1..=3u32 {
                let zeta = hurwitz_zeta(ZetaArg::new(f64::from(m + 1), z).unwrap());
                let sign = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
                let expected = sign * factorial(m) * zeta;
                let got = polygamma(PolyOrder::new(m).unwrap(), z).unwrap();
                assert!(rel(got, expected) < 1e-11, "m={m} z={z}");
            }
        }
    }
}
