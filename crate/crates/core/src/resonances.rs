//! Resonance families `f_n^±` in the `(u,v)` and `(x,p)` pictures.
//!
//! Bracket convention: `c_n = ⟨φ|f_n^+⟩ = ∫ conj(φ) f_n^+`, conjugate-linear in
//! the state. The dual expansion of a state is `φ = Σ conj(c_n) f_n^-`, which
//! reduces to `Σ c_n f_n^-` for real data.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, Representation, WaveFunction};
use crate::numerics::{central_half_width, central_weights, compensated_sum, richardson_halving};
use crate::special::{hermite_normalized_all, ln_factorial, MAX_HERMITE_ORDER};

/// Largest resonance index accepted anywhere in this module.
pub const MAX_RESONANCE_ORDER: usize = MAX_HERMITE_ORDER;

/// Relative size below which an integrand counts as decayed at the domain edge.
pub const EDGE_DECAY_TOL: f64 = 1e-12;

/// Index of a resonance at oscillator rate `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GamowIndex {
    n: usize,
    gamma: f64,
}

impl GamowIndex {
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Data(format!("oscillator rate must be positive, got {gamma}")));
        }
        Ok(GamowIndex { n, gamma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `γ(n + ½)`.
    pub fn decay_rate(&self) -> f64 {
        self.gamma * (self.n as f64 + 0.5)
    }

    /// `E_n = iγ(n + ½)`.
    pub fn energy(&self) -> Complex64 {
        Complex64::new(0.0, self.decay_rate())
    }

    /// Half-width `2 Im E_n`.
    pub fn width(&self) -> f64 {
        2.0 * self.decay_rate()
    }
}

/// Which member of a resonance pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Smoothed stand-in for `δ^{(n)}` plus the stencil order used for exact
/// distributional pairings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierSpec {
    pub width: f64,
    pub stencil_order: usize,
}

impl MollifierSpec {
    /// Width `4h`, order-8 stencils.
    pub fn for_grid(grid: &Grid) -> Self {
        MollifierSpec {
            width: 4.0 * grid.spacing(),
            stencil_order: 8,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.stencil_order == 0 || self.stencil_order % 2 != 0 {
            return Err(Error::Configuration(format!(
                "stencil order must be even and positive, got {}",
                self.stencil_order
            )));
        }
        if !(self.width.is_finite() && self.width >= 2.0 * grid.spacing() * (1.0 - 1e-12)) {
            return Err(Error::Configuration(format!(
                "mollifier width {} is below twice the grid spacing {}",
                self.width,
                grid.spacing()
            )));
        }
        Ok(())
    }

    /// Radius outside which mollified terms up to order `n_max` are negligible.
    pub fn footprint(&self, n_max: usize) -> f64 {
        self.width * (2.0 * ((n_max + 1) as f64).sqrt() + 10.0)
    }
}

/// Truncated resonance expansion; coefficients follow the module convention.
#[derive(Debug, Clone, PartialEq)]
pub struct GamowExpansion {
    gamma: f64,
    representation: Representation,
    coefficients: Vec<Complex64>,
}

impl GamowExpansion {
    pub fn new(gamma: f64, representation: Representation, coefficients: Vec<Complex64>) -> Result<Self> {
        GamowIndex::new(0, gamma)?;
        if coefficients.is_empty() {
            return Err(Error::Structural("an expansion needs at least one coefficient".into()));
        }
        if coefficients.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Data("non-finite expansion coefficient".into()));
        }
        Ok(GamowExpansion {
            gamma,
            representation,
            coefficients,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Coefficients after evolving for `t`: `c_n e^{-γ(n+½)t}`.
    pub fn evolved(&self, t: f64) -> Vec<Complex64> {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(n, c)| c * (-self.gamma * (n as f64 + 0.5) * t).exp())
            .collect()
    }

    /// Maps `(u,v)` coefficients to the `(x,p)` picture through the unitary
    /// transform: `c_n^x = e^{inπ/4} (2π)^{-1/4} c_n^u`.
    pub fn to_xp(&self) -> Result<Self> {
        if self.representation != Representation::Uv {
            return Err(Error::Structural("expansion is already in the xp representation".into()));
        }
        let scale = (2.0 * PI).powf(-0.25);
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(n, c)| c * Complex64::from_polar(scale, n as f64 * FRAC_PI_4))
            .collect();
        GamowExpansion::new(self.gamma, Representation::Xp, coefficients)
    }
}

fn check_order(n: usize) -> Result<()> {
    if n > MAX_RESONANCE_ORDER {
        return Err(Error::Capability(format!(
            "resonance order {n} exceeds the supported maximum {MAX_RESONANCE_ORDER}"
        )));
    }
    Ok(())
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

/// `f_n^+(u) = u^n / √(n!)`, evaluated through logarithms.
pub fn eval_f_plus_u(n: usize, u: f64) -> Result<f64> {
    check_order(n)?;
    if n == 0 {
        return Ok(1.0);
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    let magnitude = (n as f64 * u.abs().ln() - 0.5 * ln_factorial(n)).exp();
    if !magnitude.is_finite() {
        return Err(Error::Capability(format!("f_{n}^+({u}) overflows")));
    }
    let sign = if u < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    Ok(sign * magnitude)
}

/// `⟨g|f_n^+⟩` for the unit Gaussian `g(u) = π^{-1/4} e^{-u²/2}`:
/// `2^{(n+1)/2} Γ((n+1)/2) / (π^{1/4} √(n!))` for even `n`, zero for odd `n`.
pub fn gaussian_projection(n: usize) -> f64 {
    if n % 2 == 1 {
        return 0.0;
    }
    let half = 0.5 * (n as f64 + 1.0);
    let ln_gamma_half = crate::special::log_gamma(Complex64::new(half, 0.0))
        .expect("Γ is analytic on the positive axis")
        .re;
    (half * 2f64.ln() + ln_gamma_half - 0.25 * PI.ln() - 0.5 * ln_factorial(n)).exp()
}

/// A complex number stored as `mantissa · e^{ln_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    pub mantissa: Complex64,
    pub ln_scale: f64,
}

impl ScaledComplex {
    pub fn zero() -> Self {
        ScaledComplex {
            mantissa: Complex64::new(0.0, 0.0),
            ln_scale: 0.0,
        }
    }

    /// `ln |value|`, `-∞` for zero.
    pub fn ln_abs(&self) -> f64 {
        let m = self.mantissa.norm();
        if m == 0.0 {
            f64::NEG_INFINITY
        } else {
            m.ln() + self.ln_scale
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.mantissa.norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.mantissa * self.ln_scale.exp()
    }
}

/// Log-space projection `⟨φ|f_n^+⟩` for large `n`.
pub fn project_f_plus_u_scaled(phi: &WaveFunction, n: usize) -> Result<ScaledComplex> {
    check_order(n)?;
    require(phi, Representation::Uv)?;
    let grid = phi.grid();
    let weights = grid.weights();
    let nf = n as f64;
    let logs: Vec<f64> = grid
        .points()
        .iter()
        .zip(phi.samples())
        .zip(&weights)
        .map(|((&u, z), &w)| {
            let a = z.norm();
            if a == 0.0 || (n > 0 && u == 0.0) {
                f64::NEG_INFINITY
            } else {
                let power = if n == 0 { 0.0 } else { nf * u.abs().ln() };
                power + a.ln() + w.ln()
            }
        })
        .collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Ok(ScaledComplex::zero());
    }
    // Simpson end weights are h/3, interior weights up to 4h/3: compare the
    // unweighted integrand at the edges against the unweighted peak.
    let h = grid.spacing();
    let edge_excess = [0, grid.n_points() - 1]
        .iter()
        .map(|&k| logs[k] - (weights[k] / h).ln())
        .fold(f64::NEG_INFINITY, f64::max)
        - (peak - (4.0f64 / 3.0).ln());
    if edge_excess > EDGE_DECAY_TOL.ln() {
        return Err(Error::Truncation {
            message: format!("integrand u^{n} φ(u) has not decayed at the domain edge"),
            edge_value: edge_excess.exp(),
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for ((&u, z), &l) in grid.points().iter().zip(phi.samples()).zip(&logs) {
        if l == f64::NEG_INFINITY {
            continue;
        }
        let phase = z.conj() / z.norm();
        let phase = if u < 0.0 && n % 2 == 1 { -phase } else { phase };
        acc += phase * (l - peak).exp();
    }
    Ok(ScaledComplex {
        mantissa: acc,
        ln_scale: peak - 0.5 * ln_factorial(n),
    })
}

/// `⟨φ|f_n^+⟩ = ∫ conj(φ(u)) u^n/√(n!) du` by Simpson quadrature.
pub fn project_f_plus_u(phi: &WaveFunction, n: usize) -> Result<Complex64> {
    let value = project_f_plus_u_scaled(phi, n)?.to_complex();
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Capability(format!("projection onto f_{n}^+ overflows")));
    }
    Ok(value)
}

/// Rounding amplification allowed for a derivative stencil.
const STENCIL_ROUNDING_LIMIT: f64 = 1e-6;

/// `⟨f_n^-, φ⟩ = φ^{(n)}(0)/√(n!)` from a central difference stencil at `u = 0`.
///
/// The stencil stride balances truncation against rounding; it never
/// interpolates, so the grid must contain the origin.
pub fn pair_f_minus_u(phi: &WaveFunction, n: usize, moll: &MollifierSpec) -> Result<Complex64> {
    check_order(n)?;
    require(phi, Representation::Uv)?;
    let grid = phi.grid();
    moll.validate(grid)?;
    let origin = grid
        .origin_index()
        .ok_or_else(|| Error::Structural("grid does not contain u = 0".into()))?;
    if n == 0 {
        return Ok(phi.samples()[origin]);
    }
    let h = grid.spacing();
    let reach = central_half_width(n, moll.stencil_order);
    let room = origin.min(grid.n_points() - 1 - origin);
    if reach > room {
        return Err(Error::accuracy(
            format!("order-{n} stencil needs {reach} points on each side of u = 0, grid has {room}"),
            f64::INFINITY,
        ));
    }
    let target = 2.0 * f64::EPSILON.powf(1.0 / (n + moll.stencil_order) as f64);
    let ideal = ((target / h).round() as usize).max(1);
    let stride = ideal.min(room / reach).max(1);
    let step = stride as f64 * h;
    let weights = central_weights(n, moll.stencil_order);
    let scale = (-(n as f64) * step.ln() - 0.5 * ln_factorial(n)).exp();
    let amplification = f64::EPSILON * weights.iter().map(|w| w.abs()).sum::<f64>() * scale;
    if !(amplification <= STENCIL_ROUNDING_LIMIT) {
        return Err(Error::accuracy(
            format!("order-{n} derivative is too high for spacing {h}: rounding amplification {amplification:e}"),
            amplification,
        ));
    }
    let samples = phi.samples();
    let r = reach as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, w) in (-r..=r).zip(&weights) {
        let k = (origin as i64 + j * stride as i64) as usize;
        acc += samples[k] * *w;
    }
    Ok(acc * scale)
}

/// Mollified `f_n^-(u)`: `δ` replaced by a normal density of standard
/// deviation `width`, i.e. `width^{-n} h_n(y) e^{-y²} / (width √(2π))` with
/// `y = u/(width √2)` and `h_n` the normalised Hermite polynomial.
pub fn eval_f_minus_mollified(n: usize, u: f64, width: f64) -> Result<f64> {
    check_order(n)?;
    let y = u / (width * std::f64::consts::SQRT_2);
    let h = hermite_normalized_all(n, Complex64::new(y, 0.0))[n].re;
    let ln_prefactor = -(n as f64) * width.ln() - y * y - (width * (2.0 * PI).sqrt()).ln();
    if ln_prefactor > 700.0 {
        return Err(Error::Capability(format!(
            "mollified f_{n}^- overflows at width {width}"
        )));
    }
    Ok(h * ln_prefactor.exp())
}

/// Mollified `f_n^-` sampled on a `(u,v)` grid.
pub fn mollified_f_minus_field(n: usize, grid: &Grid, moll: &MollifierSpec) -> Result<WaveFunction> {
    moll.validate(grid)?;
    let samples = grid
        .points()
        .into_iter()
        .map(|u| eval_f_minus_mollified(n, u, moll.width).map(|v| Complex64::new(v, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    WaveFunction::new(*grid, samples, Representation::Uv)
}

/// `f_0^± … f_n^±` at one point `x` of the `(x,p)` picture:
/// `(γ/π)^{1/4} e^{±iπ/8} e^{∓iγx²/2} h_k(√γ e^{±iπ/4} x)`.
pub fn eval_f_pm_x_all(n: usize, sign: Sign, x: f64, gamma: f64) -> Result<Vec<Complex64>> {
    check_order(n)?;
    GamowIndex::new(n, gamma)?;
    let s = sign.factor();
    let z = Complex64::from_polar(gamma.sqrt() * x, s * FRAC_PI_4);
    let prefactor = Complex64::from_polar((gamma / PI).powf(0.25), s * FRAC_PI_8)
        * Complex64::from_polar(1.0, -s * 0.5 * gamma * x * x);
    let values: Vec<Complex64> = hermite_normalized_all(n, z).into_iter().map(|h| prefactor * h).collect();
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Capability(format!("f_{n}^± overflows at x = {x}")));
    }
    Ok(values)
}

/// `f_n^±(x)` in the `(x,p)` picture.
pub fn eval_f_pm_x(n: usize, sign: Sign, x: f64, gamma: f64) -> Result<Complex64> {
    Ok(eval_f_pm_x_all(n, sign, x, gamma)?[n])
}

/// Options for Gaussian-regularised pairings in the `(x,p)` picture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedPairing {
    /// Largest regulator `η₀`; levels use `η₀, η₀/2, …`.
    pub eta0: f64,
    pub levels: usize,
    /// Largest acceptable Richardson error estimate.
    pub tolerance: f64,
}

impl Default for RegularizedPairing {
    fn default() -> Self {
        RegularizedPairing {
            eta0: 1.0,
            levels: 3,
            tolerance: 1e-4,
        }
    }
}

impl RegularizedPairing {
    /// Milder regulator for sampled data that already decays.
    pub fn for_sampled_data() -> Self {
        RegularizedPairing {
            eta0: 1e-3,
            levels: 3,
            tolerance: 1e-4,
        }
    }

    fn etas(&self) -> Result<Vec<f64>> {
        if !(self.eta0.is_finite() && self.eta0 > 0.0) || self.levels == 0 {
            return Err(Error::Configuration(format!(
                "regulator needs η₀ > 0 and at least one level, got η₀ = {}, levels = {}",
                self.eta0, self.levels
            )));
        }
        Ok((0..self.levels).map(|j| self.eta0 / 2f64.powi(j as i32)).collect())
    }

    fn extrapolate(&self, values: &[Complex64]) -> Result<Complex64> {
        let (best, err) = richardson_halving(values);
        if self.levels > 1 && !(err <= self.tolerance) {
            return Err(Error::accuracy("η-extrapolation did not converge", err));
        }
        Ok(best)
    }
}

/// Node count and chirp period for the pairing quadrature.
///
/// The spacing satisfies `γh² = 2π/M` so that the chirp `e^{iγx²}` at
/// `x = kh` is `e^{2πi (k² mod M)/M}`, free of the phase rounding that would
/// otherwise grow like `x²`.
fn pairing_nodes(n: usize, m: usize, gamma: f64, eta_min: f64) -> (usize, u64, f64) {
    let degree = (n + m) as f64;
    let log_norms = 0.5 * (ln_factorial(n) + ln_factorial(m));
    let mut half_width: f64 = 8.0;
    while eta_min * half_width * half_width
        - degree * ((2.0 * gamma).sqrt() * half_width).max(1.0).ln()
        + log_norms
        < 40.0
    {
        half_width *= 1.1;
    }
    // Fourier content of e^{(iγ-η)x²} decays like e^{-k²η/(4γ²)}.
    let k_max = (4.0 * gamma * gamma * 40.0 / eta_min).sqrt();
    let max_spacing = 0.5 * PI / k_max;
    let period = (2.0 * PI / (gamma * max_spacing * max_spacing)).ceil() as u64;
    let spacing = (2.0 * PI / (gamma * period as f64)).sqrt();
    ((half_width / spacing).ceil() as usize, period, spacing)
}

/// `⟨f_n^+|f_m^-⟩` in the `(x,p)` picture, regularised by `e^{-ηx²}` and
/// extrapolated to `η → 0`.
pub fn pair_resonances_x(n: usize, m: usize, gamma: f64, eta: f64) -> Result<Complex64> {
    pair_resonances_x_with(
        n,
        m,
        gamma,
        &RegularizedPairing {
            eta0: eta,
            ..RegularizedPairing::default()
        },
    )
}

pub fn pair_resonances_x_with(n: usize, m: usize, gamma: f64, opts: &RegularizedPairing) -> Result<Complex64> {
    check_order(n.max(m))?;
    GamowIndex::new(0, gamma)?;
    let opts = RegularizedPairing {
        levels: opts.levels.max((n + m + 1) / 2 + 2),
        ..*opts
    };
    let etas = opts.etas()?;
    let (half, period, spacing) = pairing_nodes(n, m, gamma, etas[etas.len() - 1]);
    let weights = crate::grid::quadrature_weights(2 * half + 1, spacing);
    // conj(f_n^+) f_m^- = √(γ/π) e^{-iπ/4} e^{iγx²} h_n(z̄) h_m(z̄), z̄ = √γ e^{-iπ/4} x.
    let prefactor = Complex64::from_polar((gamma / PI).sqrt(), -FRAC_PI_4);
    let rotation = Complex64::from_polar(gamma.sqrt(), -FRAC_PI_4);
    let top = n.max(m);
    let polynomial = |x: f64| {
        let h = hermite_normalized_all(top, rotation * x);
        h[n] * h[m]
    };
    // Nodes k·h are exactly antisymmetric, so mirrored terms are summed
    // pairwise and odd integrands cancel to the last bit.
    let folded: Vec<(f64, Complex64)> = (0..=half)
        .into_par_iter()
        .map(|k| {
            let x = k as f64 * spacing;
            let residue = ((k as u64 % period) * (k as u64 % period)) % period;
            let chirp = Complex64::from_polar(1.0, 2.0 * PI * residue as f64 / period as f64);
            let value = if k == 0 { polynomial(0.0) } else { polynomial(x) + polynomial(-x) };
            (x * x, prefactor * chirp * value * weights[half + k])
        })
        .collect();
    if folded.iter().any(|(_, v)| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Capability(format!("pairing integrand for ({n}, {m}) overflows")));
    }
    // The regularised integral is (η - iγ)^{-D-½} times a polynomial of
    // degree D = ⌈(n+m)/2⌉ in η; extrapolating that polynomial is exact once
    // D + 2 levels are available.
    let power = ((n + m + 1) / 2) as f64 + 0.5;
    let weight = |eta: f64| Complex64::new(eta, -gamma).powf(power);
    let values: Vec<Complex64> = etas
        .iter()
        .map(|&eta| compensated_sum(folded.iter().map(|(x2, v)| v * (-eta * x2).exp())) * weight(eta))
        .collect();
    Ok(opts.extrapolate(&values)? / weight(0.0))
}

/// `⟨φ|f_n^+⟩` for sampled `(x,p)` data with the same regulator scheme.
pub fn project_f_plus_x(phi: &WaveFunction, n: usize, gamma: f64, opts: &RegularizedPairing) -> Result<Complex64> {
    Ok(project_f_plus_x_all(phi, n, gamma, opts)?[n])
}

fn project_f_plus_x_all(phi: &WaveFunction, n_max: usize, gamma: f64, opts: &RegularizedPairing) -> Result<Vec<Complex64>> {
    require(phi, Representation::Xp)?;
    let etas = opts.etas()?;
    let eta_min = etas[etas.len() - 1];
    let grid = phi.grid();
    let weights = grid.weights();
    let xs = grid.points();
    let modes = xs
        .par_iter()
        .map(|&x| eval_f_pm_x_all(n_max, Sign::Plus, x, gamma))
        .collect::<Result<Vec<_>>>()?;
    let last = xs.len() - 1;
    (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let damped = |k: usize| (phi.samples()[k].conj() * modes[k][n]).norm() * (-eta_min * xs[k] * xs[k]).exp();
            let peak = (0..xs.len()).map(damped).fold(0.0, f64::max);
            let edge = damped(0).max(damped(last));
            if peak > 0.0 && edge > EDGE_DECAY_TOL * peak {
                return Err(Error::Truncation {
                    message: format!("regularised integrand for f_{n}^+ has not decayed at the domain edge"),
                    edge_value: edge / peak,
                });
            }
            let values: Vec<Complex64> = etas
                .iter()
                .map(|&eta| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..xs.len() {
                        let x = xs[k];
                        acc += phi.samples()[k].conj() * modes[k][n] * (weights[k] * (-eta * x * x).exp());
                    }
                    acc
                })
                .collect();
            opts.extrapolate(&values)
        })
        .collect()
}

/// Coefficients `c_n = ⟨φ|f_n^+⟩`, `n = 0..=n_max`, in the representation
/// of `phi`. The mollifier is validated but only used by `(u,v)` consumers.
pub fn gamow_expand(phi: &WaveFunction, n_max: usize, moll: &MollifierSpec) -> Result<GamowExpansion> {
    gamow_expand_with(phi, n_max, moll, 1.0, &RegularizedPairing::for_sampled_data())
}

pub fn gamow_expand_with(
    phi: &WaveFunction,
    n_max: usize,
    moll: &MollifierSpec,
    gamma: f64,
    opts: &RegularizedPairing,
) -> Result<GamowExpansion> {
    check_order(n_max)?;
    match phi.representation() {
        Representation::Uv => {
            moll.validate(phi.grid())?;
            let coefficients = (0..=n_max)
                .into_par_iter()
                .map(|n| project_f_plus_u(phi, n))
                .collect::<Result<Vec<_>>>()?;
            GamowExpansion::new(gamma, Representation::Uv, coefficients)
        }
        Representation::Xp => {
            let coefficients = project_f_plus_x_all(phi, n_max, gamma, opts)?;
            GamowExpansion::new(gamma, Representation::Xp, coefficients)
        }
    }
}

/// `Σ_n e^{-γ(n+½)t} conj(c_n) f_n^-(x)` on `grid` for each time.
pub fn reconstruct_x(expansion: &GamowExpansion, times: &[f64], grid: &Grid) -> Result<Vec<WaveFunction>> {
    if expansion.representation() != Representation::Xp {
        return Err(Error::Structural("reconstruction needs an xp expansion".into()));
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::Data(format!("reconstruction times must be non-negative, got {t}")));
    }
    let n_max = expansion.order();
    let gamma = expansion.gamma();
    let modes = grid
        .points()
        .into_par_iter()
        .map(|x| eval_f_pm_x_all(n_max, Sign::Minus, x, gamma))
        .collect::<Result<Vec<_>>>()?;
    times
        .iter()
        .map(|&t| {
            let weights: Vec<Complex64> = expansion.evolved(t).iter().map(|c| c.conj()).collect();
            let samples = modes
                .iter()
                .map(|row| row.iter().zip(&weights).map(|(f, c)| f * c).sum())
                .collect();
            WaveFunction::new(*grid, samples, Representation::Xp)
        })
        .collect()
}

/// `Σ_n e^{-γ(n+½)t} conj(c_n) f̃_n^-(u)` with mollified `f̃_n^-`.
pub fn reconstruct_u_mollified(
    expansion: &GamowExpansion,
    t: f64,
    grid: &Grid,
    moll: &MollifierSpec,
) -> Result<WaveFunction> {
    if expansion.representation() != Representation::Uv {
        return Err(Error::Structural("mollified reconstruction needs a uv expansion".into()));
    }
    let mut acc = WaveFunction::zeros(*grid, Representation::Uv);
    for (n, c) in expansion.evolved(t).iter().enumerate() {
        let term = mollified_f_minus_field(n, grid, moll)?;
        acc = acc.axpy(c.conj(), &term)?;
    }
    Ok(acc)
}
