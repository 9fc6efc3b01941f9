//! The unitary map `𝒰` from the `(u,v)` to the `(x,p)` picture,
//! `(𝒰φ)(x) = C̃ ∫ φ(u) e^{iS(x,u)} du` with
//! `S(x,u) = γx²/2 − √(2γ) x u + u²/2`, and the complex scalings `V_λ`.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{relative_l2, Grid, Representation, WaveFunction};
use crate::numerics::{richardson_halving, ChirpSum};
use crate::resonances::{eval_f_pm_x, pair_f_minus_u, MollifierSpec, Sign};

/// How the oscillatory kernel integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// Dense O(NM) Simpson sums.
    Direct,
    /// Chirp, Bluestein Fourier sum, chirp: O((N+M) log(N+M)).
    ChirpFourierChirp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformParams {
    pub gamma: f64,
    pub quadrature: Quadrature,
    /// Evaluate both paths and fail if they disagree.
    pub self_check: bool,
}

/// Relative L² disagreement tolerated between the two quadrature paths.
pub const SELF_CHECK_TOL: f64 = 1e-5;

/// Edge amplitude, relative to the peak, above which the source is reported
/// as not decayed.
const EDGE_WARN: f64 = 1e-8;

impl TransformParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Data(format!("oscillator rate must be positive, got {gamma}")));
        }
        Ok(TransformParams {
            gamma,
            quadrature: Quadrature::ChirpFourierChirp,
            self_check: false,
        })
    }

    pub fn with_quadrature(self, quadrature: Quadrature) -> Self {
        TransformParams { quadrature, ..self }
    }

    pub fn with_self_check(self, self_check: bool) -> Self {
        TransformParams { self_check, ..self }
    }

    /// `C̃ = e^{-iπ/8} (γ/(2π²))^{1/4}`.
    pub fn c_tilde(&self) -> Complex64 {
        Complex64::from_polar((self.gamma / (2.0 * PI * PI)).powf(0.25), -FRAC_PI_8)
    }

    /// `√(2γ)`, the coupling in the kernel `e^{-i√(2γ) x u}`.
    pub fn coupling(&self) -> f64 {
        (2.0 * self.gamma).sqrt()
    }

    /// The generating function `S(x,u)`.
    pub fn generating_function(&self, x: f64, u: f64) -> f64 {
        0.5 * self.gamma * x * x - self.coupling() * x * u + 0.5 * u * u
    }

    /// An `(x,p)` grid with the same point count whose half-width is the
    /// source half-width over `√γ`; Gaussians of unit width map onto it
    /// without loss.
    pub fn default_target(&self, source: &Grid) -> Result<Grid> {
        let half = source.u_min().abs().max(source.u_max().abs()) / self.gamma.sqrt();
        Grid::new(source.n_points(), -half, half)
    }
}

fn require(phi: &WaveFunction, rep: Representation) -> Result<()> {
    if phi.representation() != rep {
        return Err(Error::Structural(format!(
            "expected a {rep} wavefunction, got {}",
            phi.representation()
        )));
    }
    Ok(())
}

fn warn_if_not_decayed(phi: &WaveFunction, what: &str) {
    let peak = phi.max_abs();
    let s = phi.samples();
    let edge = s[0].norm().max(s[s.len() - 1].norm());
    if peak > 0.0 && edge > EDGE_WARN * peak {
        warn!("{what}: source has not decayed at the domain edge (relative edge amplitude {:e})", edge / peak);
    }
}

/// `y_j = Σ_k a_k e^{-iβ s_j t_k}` for uniform nodes `s_j`, `t_k`.
fn kernel_sum(a: &[Complex64], t: &Grid, s: &Grid, beta: f64, quadrature: Quadrature) -> Vec<Complex64> {
    match quadrature {
        Quadrature::Direct => {
            let tk = t.points();
            s.points()
                .into_par_iter()
                .map(|sj| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (ak, &u) in a.iter().zip(&tk) {
                        acc += ak * Complex64::from_polar(1.0, -beta * sj * u);
                    }
                    acc
                })
                .collect()
        }
        Quadrature::ChirpFourierChirp => {
            // s_j t_k = s0 t0 + s0 ht k + hs t0 j + hs ht j k.
            let (s0, hs, t0, ht) = (s.u_min(), s.spacing(), t.u_min(), t.spacing());
            let pre: Vec<Complex64> = a
                .iter()
                .enumerate()
                .map(|(k, ak)| ak * Complex64::from_polar(1.0, -beta * s0 * ht * k as f64))
                .collect();
            let sum = ChirpSum::new(t.n_points(), s.n_points(), -beta * hs * ht);
            sum.apply(&pre)
                .into_iter()
                .enumerate()
                .map(|(j, y)| y * Complex64::from_polar(1.0, -beta * (s0 * t0 + hs * t0 * j as f64)))
                .collect()
        }
    }
}

fn transform_with(
    phi: &WaveFunction,
    params: &TransformParams,
    target: &Grid,
    quadrature: Quadrature,
    forward: bool,
) -> Result<Vec<Complex64>> {
    let source = phi.grid();
    let weights = source.weights();
    let beta = params.coupling();
    let gamma = params.gamma;
    // Forward: chirp e^{iu²/2} on the source, e^{iγx²/2} on the target.
    // Inverse: conjugate kernel, chirp e^{-iγx²/2} on the source.
    let (source_chirp, target_chirp, sign) = if forward {
        (0.5, 0.5 * gamma, 1.0)
    } else {
        (-0.5 * gamma, -0.5, -1.0)
    };
    let a: Vec<Complex64> = source
        .points()
        .iter()
        .zip(phi.samples())
        .zip(&weights)
        .map(|((&u, z), &w)| z * Complex64::from_polar(w, source_chirp * u * u))
        .collect();
    let c = if forward { params.c_tilde() } else { params.c_tilde().conj() };
    let sums = kernel_sum(&a, source, target, sign * beta, quadrature);
    Ok(target
        .points()
        .iter()
        .zip(sums)
        .map(|(&x, y)| c * y * Complex64::from_polar(1.0, target_chirp * x * x))
        .collect())
}

fn run(phi: &WaveFunction, params: &TransformParams, target: &Grid, forward: bool) -> Result<WaveFunction> {
    let rep = if forward { Representation::Xp } else { Representation::Uv };
    let primary = WaveFunction::new(*target, transform_with(phi, params, target, params.quadrature, forward)?, rep)?;
    if params.self_check {
        let other_path = match params.quadrature {
            Quadrature::Direct => Quadrature::ChirpFourierChirp,
            Quadrature::ChirpFourierChirp => Quadrature::Direct,
        };
        let other = WaveFunction::new(*target, transform_with(phi, params, target, other_path, forward)?, rep)?;
        let gap = relative_l2(&primary, &other)?;
        if gap > SELF_CHECK_TOL {
            return Err(Error::accuracy(
                format!("direct and chirp-Fourier-chirp transforms disagree by {gap:e}"),
                gap,
            ));
        }
    }
    Ok(primary)
}

/// `(𝒰φ)(x)` on `target`, tagged `(x,p)`.
pub fn forward_transform(phi_u: &WaveFunction, params: &TransformParams, target: &Grid) -> Result<WaveFunction> {
    require(phi_u, Representation::Uv)?;
    warn_if_not_decayed(phi_u, "forward transform");
    run(phi_u, params, target, true)
}

/// `(𝒰^{-1}ψ)(u) = conj(C̃) ∫ ψ(x) e^{-iS(x,u)} dx` on `target`, tagged `(u,v)`.
pub fn inverse_transform(phi_x: &WaveFunction, params: &TransformParams, target: &Grid) -> Result<WaveFunction> {
    require(phi_x, Representation::Xp)?;
    warn_if_not_decayed(phi_x, "inverse transform");
    run(phi_x, params, target, false)
}

/// `V_λφ(x) = e^{-iλ/2} φ(e^{-iλ}x)` on sampled data.
///
/// Sampled data can only be rescaled along the real axis, so `λ` must be
/// purely imaginary (`λ = iκ` dilates by `e^κ`); other values need
/// [`v_lambda_analytic`].
pub fn v_lambda(phi: &WaveFunction, lambda: Complex64) -> Result<WaveFunction> {
    if lambda.re != 0.0 {
        return Err(Error::Capability(format!(
            "V_λ with Re λ = {} moves the argument off the real axis; use the analytic form",
            lambda.re
        )));
    }
    if lambda.im == 0.0 {
        return Ok(phi.clone());
    }
    let kappa = lambda.im;
    let scale = kappa.exp();
    let amplitude = (0.5 * kappa).exp();
    let samples = phi
        .grid()
        .points()
        .into_iter()
        .map(|x| crate::grid::interpolate(phi, scale * x) * amplitude)
        .collect();
    WaveFunction::new(*phi.grid(), samples, phi.representation())
}

/// `V_λ` applied to a function known in closed form on the complex plane.
pub fn v_lambda_analytic<F>(f: F, lambda: Complex64) -> impl Fn(f64) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let i = Complex64::i();
    let phase = (-i * lambda * 0.5).exp();
    let rotation = (-i * lambda).exp();
    move |x| phase * f(rotation * x)
}

/// Smallest regulator used when transforming the growing family `f_n^+(u)`;
/// smaller values only add cancellation since the extrapolation is exact.
const RESONANCE_ETA_MIN: f64 = 0.05;

/// `𝒰[f_n^+ e^{-ηu²}](x)` extrapolated to `η → 0`.
///
/// For `a = η − i/2` the integral is `√(π/a) e^{-β²x²/(4a)} a^{-n} P(a)` with
/// `P` a polynomial of degree `⌊n/2⌋`; multiplying the level values by
/// `a^{n+½} e^{β²x²/(4a)}` makes the Richardson tableau exact.
fn transform_f_plus_at(n: usize, params: &TransformParams, xs: &[f64]) -> Result<Vec<Complex64>> {
    let levels = n / 2 + 3;
    let etas: Vec<f64> = (0..levels).map(|j| RESONANCE_ETA_MIN * 2f64.powi((levels - 1 - j) as i32)).collect();
    let eta_min = etas[levels - 1];
    let half_width = ((40.0 + n as f64 * 5.0) / eta_min).sqrt();
    let spacing = (PI / (4.0 * half_width)).min(0.02);
    let grid = Grid::symmetric(half_width, spacing)?;
    let beta = params.coupling();
    let ln_norm = 0.5 * crate::special::ln_factorial(n);
    let monomial: Vec<f64> = grid
        .points()
        .iter()
        .map(|&u| if n == 0 { 1.0 } else { (u.abs().ln() * n as f64 - ln_norm).exp() * if u < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 } })
        .collect();
    let weights = grid.weights();
    let points = grid.points();
    let precondition = |eta: f64, x: f64| {
        let a = Complex64::new(eta, -0.5);
        a.powf(n as f64 + 0.5) * (beta * beta * x * x / (4.0 * a)).exp()
    };
    xs.par_iter()
        .map(|&x| {
            let values: Vec<Complex64> = etas
                .iter()
                .map(|&eta| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..points.len() {
                        let u = points[k];
                        let damp = weights[k] * monomial[k] * (-eta * u * u).exp();
                        acc += Complex64::from_polar(damp, 0.5 * u * u - beta * x * u);
                    }
                    acc * precondition(eta, x)
                })
                .collect();
            let (best, err) = richardson_halving(&values);
            let limit = best / precondition(0.0, x);
            if err > 1e-6 * best.norm().max(1e-300) {
                return Err(Error::accuracy("η-extrapolation of the transformed resonance did not converge", err));
            }
            Ok(params.c_tilde() * Complex64::from_polar(1.0, 0.5 * params.gamma * x * x) * limit)
        })
        .collect()
}

/// `𝒰[f_n^-](x) = C̃ ⟨f_n^-, e^{iS(x,·)}⟩`, the pairing taken by stencil.
fn transform_f_minus_at(n: usize, params: &TransformParams, xs: &[f64]) -> Result<Vec<Complex64>> {
    let grid = Grid::symmetric(4.0, 1e-3)?;
    let moll = MollifierSpec::for_grid(&grid);
    xs.iter()
        .map(|&x| {
            let kernel = WaveFunction::from_fn(grid, Representation::Uv, |u| {
                Complex64::from_polar(1.0, params.generating_function(x, u))
            })?;
            Ok(params.c_tilde() * pair_f_minus_u(&kernel, n, &moll)?)
        })
        .collect()
}

/// Ratio `f_n^±(x) / 𝒰[f_n^±(u)](x)`, averaged over sample points where the
/// resonance is not small; fails if it varies by more than 1%.
pub fn transform_resonance_check(n: usize, sign: Sign, params: &TransformParams) -> Result<Complex64> {
    if n > 10 {
        return Err(Error::Capability(format!("resonance transform check supports n ≤ 10, got {n}")));
    }
    let gamma = params.gamma;
    let candidates: Vec<f64> = (-12..=12).map(|k| 0.125 * k as f64 / gamma.sqrt()).collect();
    let exact: Vec<Complex64> = candidates
        .iter()
        .map(|&x| eval_f_pm_x(n, sign, x, gamma))
        .collect::<Result<_>>()?;
    let peak = exact.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let (xs, targets): (Vec<f64>, Vec<Complex64>) = candidates
        .iter()
        .zip(&exact)
        .filter(|(_, z)| z.norm() > 0.05 * peak)
        .map(|(&x, &z)| (x, z))
        .unzip();
    let transformed = match sign {
        Sign::Plus => transform_f_plus_at(n, params, &xs)?,
        Sign::Minus => transform_f_minus_at(n, params, &xs)?,
    };
    let ratios: Vec<Complex64> = targets.iter().zip(&transformed).map(|(f, t)| f / t).collect();
    let mean = ratios.iter().sum::<Complex64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - mean).norm()).fold(0.0, f64::max) / mean.norm();
    if spread > 1e-2 {
        return Err(Error::accuracy(
            format!("ratio f_{n}/𝒰f_{n} varies by {spread:e} across x"),
            spread,
        ));
    }
    Ok(mean)
}

/// Closed-form proportionality constant `e^{inπ/4} (2π)^{∓1/4}` between
/// `f_n^±(x)` and `𝒰[f_n^±(u)](x)`.
pub fn resonance_transform_factor(n: usize, sign: Sign) -> Complex64 {
    Complex64::from_polar((2.0 * PI).powf(-0.25 * sign.factor()), n as f64 * FRAC_PI_4)
}
