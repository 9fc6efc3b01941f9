//! Scalar special functions of complex argument.
//!
//! - Hermite polynomials `H_n(z)` by the physicists' three-term recurrence,
//!   with a rescaled variant for large orders.
//! - `ln Γ(z)` by upward recurrence plus the Stirling series, with the
//!   reflection formula in the left half plane.
//! - Kummer's `M(a, b, z)` as a plain power series.
//! - Parabolic cylinder functions `D_ν(z)` assembled from two Kummer series.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest Hermite order accepted anywhere in the crate.
pub const MAX_HERMITE_ORDER: usize = 512;

/// Above this order the recurrence carries a separate exponent.
const UNSCALED_HERMITE_LIMIT: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFnConfig {
    pub series_tol: f64,
    pub series_max_terms: usize,
    /// Largest `|z|` handed to the Kummer series.
    pub max_series_argument: f64,
}

impl Default for SpecialFnConfig {
    fn default() -> Self {
        SpecialFnConfig {
            series_tol: 1e-14,
            series_max_terms: 500,
            max_series_argument: 50.0,
        }
    }
}

impl SpecialFnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_tol > 0.0) || self.series_max_terms == 0 || !(self.max_series_argument > 0.0)
        {
            return Err(Error::Configuration(format!("invalid special-function config {self:?}")));
        }
        Ok(())
    }
}

#[inline]
fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Hermite polynomial `H_n(z)` with a mantissa/exponent split:
/// `H_n(z) = mantissa · 2^exponent`.
pub fn hermite_scaled(n: usize, z: Complex64) -> Result<(Complex64, i64)> {
    if n > MAX_HERMITE_ORDER {
        return Err(Error::Capability(format!(
            "Hermite order {n} exceeds the supported maximum {MAX_HERMITE_ORDER}"
        )));
    }
    let mut prev = c(1.0, 0.0);
    if n == 0 {
        return Ok((prev, 0));
    }
    let mut cur = z * 2.0;
    let mut exponent: i64 = 0;
    for k in 1..n {
        let next = z * cur * 2.0 - prev * (2.0 * k as f64);
        prev = cur;
        cur = next;
        if k >= UNSCALED_HERMITE_LIMIT {
            let mag = cur.norm().max(prev.norm());
            if mag > 1e100 || (mag < 1e-100 && mag > 0.0) {
                let shift = mag.log2().floor() as i32;
                let factor = 2f64.powi(-shift);
                cur *= factor;
                prev *= factor;
                exponent += shift as i64;
            }
        }
    }
    Ok((cur, exponent))
}

/// Physicists' Hermite polynomial `H_n(z)`.
pub fn hermite(n: usize, z: Complex64) -> Result<Complex64> {
    let (m, e) = hermite_scaled(n, z)?;
    let value = if e == 0 { m } else { m * 2f64.powf(e as f64) };
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Capability(format!(
            "H_{n}({z}) overflows double precision; use hermite_scaled"
        )));
    }
    Ok(value)
}

/// `H_0 … H_n` normalised by `(2^k k!)^{-1/2}`, from the stable recurrence
/// `h_{k+1} = √(2/(k+1)) z h_k − √(k/(k+1)) h_{k−1}`.
pub fn hermite_normalized_all(n: usize, z: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(c(1.0, 0.0));
    if n == 0 {
        return out;
    }
    out.push(z * std::f64::consts::SQRT_2);
    for k in 1..n {
        let kf = k as f64;
        let next = z * out[k] * (2.0 / (kf + 1.0)).sqrt() - out[k - 1] * (kf / (kf + 1.0)).sqrt();
        out.push(next);
    }
    out
}

/// `H_n(z) / √(2^n n!)`.
pub fn hermite_normalized(n: usize, z: Complex64) -> Result<Complex64> {
    if n > MAX_HERMITE_ORDER {
        return Err(Error::Capability(format!(
            "Hermite order {n} exceeds the supported maximum {MAX_HERMITE_ORDER}"
        )));
    }
    Ok(hermite_normalized_all(n, z)[n])
}

// Bernoulli numbers B_2k / (2k (2k-1)) for the Stirling series.
const STIRLING_COEFFS: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

fn nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

fn log_gamma_right(z: Complex64) -> Complex64 {
    // Shift into |z| ≥ 15 where the asymptotic series is accurate to rounding.
    let mut shift = c(0.0, 0.0);
    let mut w = z;
    while w.norm() < 15.0 {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = c(0.0, 0.0);
    let mut pow = inv;
    for coeff in STIRLING_COEFFS {
        series += pow * coeff;
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - shift
}

/// `ln Γ(z)`; the imaginary part is determined only modulo 2π.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if nonpositive_integer(z) {
        return Err(Error::Domain(format!("Γ has a pole at {z}")));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    if z.re >= 0.5 {
        Ok(log_gamma_right(z))
    } else {
        // Γ(z)Γ(1-z) = π / sin(πz)
        let s = (z * PI).sin();
        Ok(c(PI.ln(), 0.0) - s.ln() - log_gamma_right(c(1.0, 0.0) - z))
    }
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(log_gamma(z)?.exp())
}

/// `1/Γ(z)`, an entire function; exactly zero at the poles of Γ.
pub fn recip_gamma(z: Complex64) -> Complex64 {
    if nonpositive_integer(z) {
        return c(0.0, 0.0);
    }
    if z.re >= 0.5 {
        (-log_gamma_right(z)).exp()
    } else {
        (z * PI).sin() / PI * log_gamma_right(c(1.0, 0.0) - z).exp()
    }
}

/// Kummer's series result together with the largest term seen, which bounds
/// the cancellation the summation suffered.
#[derive(Debug, Clone, Copy)]
pub struct SeriesValue {
    pub value: Complex64,
    pub max_term: f64,
    pub terms: usize,
}

pub fn kummer_m_detailed(
    a: Complex64,
    b: Complex64,
    z: Complex64,
    cfg: &SpecialFnConfig,
) -> Result<SeriesValue> {
    if nonpositive_integer(b) {
        return Err(Error::Domain(format!("M(a, b, z) undefined for b = {b}")));
    }
    if z.norm() > cfg.max_series_argument {
        return Err(Error::Capability(format!(
            "|z| = {} exceeds the Kummer series budget {}",
            z.norm(),
            cfg.max_series_argument
        )));
    }
    let mut sum = c(1.0, 0.0);
    let mut term = c(1.0, 0.0);
    let mut max_term: f64 = 1.0;
    let zabs = z.norm();
    for k in 0..cfg.series_max_terms {
        let kf = k as f64;
        term = term * (a + kf) * z / ((b + kf) * (kf + 1.0));
        sum += term;
        let t = term.norm();
        max_term = max_term.max(t);
        if t == 0.0 || (kf + 1.0 > zabs && t <= cfg.series_tol * sum.norm()) {
            return Ok(SeriesValue {
                value: sum,
                max_term,
                terms: k + 2,
            });
        }
    }
    Err(Error::accuracy(
        format!(
            "Kummer series M({a}, {b}, {z}) did not converge in {} terms",
            cfg.series_max_terms
        ),
        term.norm(),
    ))
}

/// Kummer's confluent hypergeometric function `M(a, b, z) = ₁F₁(a; b; z)`.
pub fn kummer_m(a: Complex64, b: Complex64, z: Complex64, cfg: &SpecialFnConfig) -> Result<Complex64> {
    kummer_m_detailed(a, b, z, cfg).map(|s| s.value)
}

/// Parabolic cylinder function `D_ν(z)` for complex order and argument:
///
/// `D_ν(z) = 2^{ν/2} e^{−z²/4} √π [ M(−ν/2, ½, z²/2)/Γ((1−ν)/2)
///           − √2 z M((1−ν)/2, 3/2, z²/2)/Γ(−ν/2) ]`
pub fn parabolic_cylinder_d(nu: Complex64, z: Complex64, cfg: &SpecialFnConfig) -> Result<Complex64> {
    let half_z2 = z * z * 0.5;
    let even = kummer_m(-nu * 0.5, c(0.5, 0.0), half_z2, cfg)?;
    let odd = kummer_m((c(1.0, 0.0) - nu) * 0.5, c(1.5, 0.0), half_z2, cfg)?;
    let bracket = even * recip_gamma((c(1.0, 0.0) - nu) * 0.5)
        - z * std::f64::consts::SQRT_2 * odd * recip_gamma(-nu * 0.5);
    let prefactor = (nu * 0.5 * 2f64.ln() - z * z * 0.25).exp() * PI.sqrt();
    Ok(prefactor * bracket)
}

/// Leading Stirling approximation `√(2π) z^{z−½} e^{−z}`.
pub fn stirling_gamma(z: f64) -> Result<f64> {
    if !(z >= 2.0) {
        return Err(Error::Domain(format!("Stirling Γ approximation needs z ≥ 2, got {z}")));
    }
    Ok((0.5 * (2.0 * PI).ln() + (z - 0.5) * z.ln() - z).exp())
}

/// Leading Stirling approximation `√(2π) n^{n+½} e^{−n}`.
pub fn stirling_factorial(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("Stirling factorial needs n ≥ 2, got {n}")));
    }
    let x = n as f64;
    Ok((0.5 * (2.0 * PI).ln() + (x + 0.5) * x.ln() - x).exp())
}

/// `ln n!` via `ln Γ(n+1)`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    log_gamma_right(c(n as f64 + 1.0, 0.0)).re
}
