//! Generalised eigenfunctions of the continuous spectrum and their residues.
//!
//! With `ν = −(iE/γ + ½)`:
//! - `ψ_±^E(u) = (2πγ)^{-1/2} u_±^ν` in `(u,v)`;
//! - `χ_+^E(x) = (C̃/√(2πγ)) i^{(ν+1)/2} Γ(ν+1) D_{−ν−1}(−√(2γ) e^{−iπ/4} x)`;
//! - `η_+^E(x) = (C̃/√(2πγ)) i^{(ν+1)/2} Γ(−ν) D_ν(−√(2γ) e^{+iπ/4} x)`;
//! - `χ_−^E(x) = χ_+^E(−x)` and `η_−^E(x) = η_+^E(−x)`.
//!
//! `χ` has simple poles at `E = −iγ(n+½)` with residues proportional to
//! `f_n^−(x)`; `η` has them at `E = +iγ(n+½)` with residues proportional to
//! `f_n^+(x)`. Both satisfy `Hφ = Eφ` for `H = p²/2 − γ²x²/2`.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{quadrature_weights, Grid, Representation, WaveFunction};
use crate::resonances::{eval_f_pm_x, pair_f_minus_u, MollifierSpec, Sign};
use crate::special::{gamma as gamma_fn, ln_factorial, parabolic_cylinder_d, SpecialFnConfig};

/// Evaluations closer than `POLE_GUARD·γ` to a pole are refused.
pub const POLE_GUARD: f64 = 1e-6;

/// Largest `γx²` (that is `|z²/2|`) evaluated by the Kummer series; beyond
/// it the fields are continued by integrating the eigenvalue equation.
pub const SERIES_BUDGET: f64 = 12.0;

/// Default circle radius for residue extraction, in units of `γ`.
pub const DEFAULT_DELTA: f64 = 1e-3;

/// Relative change tolerated when the residue circle is halved.
pub const RESIDUE_HALVING_TOL: f64 = 1e-6;

/// Reference magnitudes at or below this are excluded from error maxima.
pub const REFERENCE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    PsiPlus,
    PsiMinus,
    ChiPlus,
    ChiMinus,
    EtaPlus,
    EtaMinus,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::PsiPlus => "psi_plus",
            FamilyKind::PsiMinus => "psi_minus",
            FamilyKind::ChiPlus => "chi_plus",
            FamilyKind::ChiMinus => "chi_minus",
            FamilyKind::EtaPlus => "eta_plus",
            FamilyKind::EtaMinus => "eta_minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumFamily {
    kind: FamilyKind,
    gamma: f64,
}

impl ContinuumFamily {
    pub fn new(kind: FamilyKind, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Data(format!("oscillator rate must be positive, got {gamma}")));
        }
        Ok(ContinuumFamily { kind, gamma })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn representation(&self) -> Representation {
        match self.kind {
            FamilyKind::PsiPlus | FamilyKind::PsiMinus => Representation::Uv,
            _ => Representation::Xp,
        }
    }

    /// `+1` for the plus member, `−1` for the mirrored one.
    pub fn side(&self) -> Sign {
        match self.kind {
            FamilyKind::PsiPlus | FamilyKind::ChiPlus | FamilyKind::EtaPlus => Sign::Plus,
            _ => Sign::Minus,
        }
    }

    fn is_eta(&self) -> bool {
        matches!(self.kind, FamilyKind::EtaPlus | FamilyKind::EtaMinus)
    }

    /// `ν = −(iE/γ + ½)`.
    pub fn nu(&self, energy: Complex64) -> Complex64 {
        -(Complex64::i() * energy / self.gamma + 0.5)
    }

    /// Pole of index `n`: `−iγ(n+½)` for ψ and χ, `+iγ(n+½)` for η.
    pub fn pole(&self, n: usize) -> Complex64 {
        let e = Complex64::new(0.0, self.gamma * (n as f64 + 0.5));
        if self.is_eta() {
            e
        } else {
            -e
        }
    }

    /// Distance from `energy` to the nearest pole of the family, with its index.
    pub fn nearest_pole(&self, energy: Complex64) -> (usize, f64) {
        let offset = if self.is_eta() { -energy } else { energy };
        // Poles sit at offset = −iγ(n+½); project onto n.
        let n = ((-offset.im / self.gamma) - 0.5).round().max(0.0) as usize;
        (n, (offset - Complex64::new(0.0, -self.gamma * (n as f64 + 0.5))).norm())
    }
}

fn require_kind(family: &ContinuumFamily, allowed: [FamilyKind; 2], op: &str) -> Result<()> {
    if !allowed.contains(&family.kind) {
        return Err(Error::Structural(format!("{op} does not accept the {} family", family.kind.name())));
    }
    Ok(())
}

/// `ψ_±^E(u)`; the point `u = 0` is excluded.
pub fn eval_psi(family: &ContinuumFamily, energy: Complex64, u: f64) -> Result<Complex64> {
    require_kind(family, [FamilyKind::PsiPlus, FamilyKind::PsiMinus], "eval_psi")?;
    if u == 0.0 {
        return Err(Error::Domain("ψ is distributional at u = 0".into()));
    }
    let on_support = match family.side() {
        Sign::Plus => u > 0.0,
        Sign::Minus => u < 0.0,
    };
    if !on_support {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let lambda = family.nu(energy);
    Ok((lambda * u.abs().ln()).exp() / (2.0 * PI * family.gamma).sqrt())
}

fn series_config() -> SpecialFnConfig {
    SpecialFnConfig {
        max_series_argument: SERIES_BUDGET,
        ..SpecialFnConfig::default()
    }
}

/// Prefactor, order and argument scale of a χ or η field:
/// `field(x) = A · D_μ(s·x)`, with `x` already mirrored for the minus side.
struct FieldParts {
    amplitude: Complex64,
    order: Complex64,
    scale: Complex64,
}

fn field_parts(family: &ContinuumFamily, energy: Complex64) -> Result<FieldParts> {
    let (_, distance) = family.nearest_pole(energy);
    if distance < POLE_GUARD * family.gamma {
        return Err(Error::PoleProximity {
            energy_re: energy.re,
            energy_im: energy.im,
            distance,
        });
    }
    let gamma = family.gamma;
    let nu = family.nu(energy);
    let c_tilde = Complex64::from_polar((gamma / (2.0 * PI * PI)).powf(0.25), -FRAC_PI_8);
    let i_power = (Complex64::new(0.0, 0.5 * PI) * (nu + 1.0) * 0.5).exp();
    let base = c_tilde / (2.0 * PI * gamma).sqrt() * i_power;
    let root = (2.0 * gamma).sqrt();
    Ok(if family.is_eta() {
        FieldParts {
            amplitude: base * gamma_fn(-nu)?,
            order: nu,
            scale: -Complex64::from_polar(root, FRAC_PI_4),
        }
    } else {
        FieldParts {
            amplitude: base * gamma_fn(nu + 1.0)?,
            order: -nu - 1.0,
            scale: -Complex64::from_polar(root, -FRAC_PI_4),
        }
    })
}

fn mirrored(family: &ContinuumFamily, x: f64) -> f64 {
    match family.side() {
        Sign::Plus => x,
        Sign::Minus => -x,
    }
}

/// Value and `x`-derivative of a χ or η field inside the series budget.
fn field_and_slope(family: &ContinuumFamily, parts: &FieldParts, x: f64) -> Result<(Complex64, Complex64)> {
    let cfg = series_config();
    let y = mirrored(family, x);
    let z = parts.scale * y;
    let d = parabolic_cylinder_d(parts.order, z, &cfg)?;
    let d_next = parabolic_cylinder_d(parts.order + 1.0, z, &cfg)?;
    // D_μ'(z) = (z/2) D_μ(z) − D_{μ+1}(z).
    let dz = z * 0.5 * d - d_next;
    let slope = parts.amplitude * parts.scale * dz * mirrored(family, 1.0);
    Ok((parts.amplitude * d, slope))
}

fn eval_xp(family: &ContinuumFamily, energy: Complex64, x: f64) -> Result<Complex64> {
    let parts = field_parts(family, energy)?;
    let y = mirrored(family, x);
    Ok(parts.amplitude * parabolic_cylinder_d(parts.order, parts.scale * y, &series_config())?)
}

/// `χ_±^E(x)` for `γx² ≤` [`SERIES_BUDGET`].
pub fn eval_chi(family: &ContinuumFamily, energy: Complex64, x: f64) -> Result<Complex64> {
    require_kind(family, [FamilyKind::ChiPlus, FamilyKind::ChiMinus], "eval_chi")?;
    eval_xp(family, energy, x)
}

/// `η_±^E(x)` for `γx² ≤` [`SERIES_BUDGET`].
pub fn eval_eta(family: &ContinuumFamily, energy: Complex64, x: f64) -> Result<Complex64> {
    require_kind(family, [FamilyKind::EtaPlus, FamilyKind::EtaMinus], "eval_eta")?;
    eval_xp(family, energy, x)
}

/// Any family at one point.
pub fn eval_family(family: &ContinuumFamily, energy: Complex64, point: f64) -> Result<Complex64> {
    match family.kind {
        FamilyKind::PsiPlus | FamilyKind::PsiMinus => eval_psi(family, energy, point),
        _ => eval_xp(family, energy, point),
    }
}

/// Largest `|x|` evaluated by the series.
pub fn series_reach(gamma: f64) -> f64 {
    (SERIES_BUDGET / gamma).sqrt()
}

/// RK4 sub-steps resolve the local wavenumber `√|2E + γ²x²|` to `k·h ≤ 0.005`.
const ODE_RESOLUTION: f64 = 0.005;

/// Integrates `y'' = −(2E + γ²x²) y` from `(x0, y0, y0')` through the
/// increasing (or decreasing) abscissae `targets`.
fn continue_outward(
    energy: Complex64,
    gamma: f64,
    start: (f64, Complex64, Complex64),
    targets: &[f64],
) -> Vec<Complex64> {
    let accel = |x: f64, y: Complex64| -(2.0 * energy + gamma * gamma * x * x) * y;
    let (mut x, mut y, mut v) = start;
    let mut out = Vec::with_capacity(targets.len());
    for &target in targets {
        let span = target - x;
        let k = (2.0 * energy + gamma * gamma * target * target).norm().sqrt().max(1.0);
        let steps = ((span.abs() * k / ODE_RESOLUTION).ceil() as usize).max(1);
        let h = span / steps as f64;
        for _ in 0..steps {
            let a1 = accel(x, y);
            let (y2, v2) = (y + v * (0.5 * h), v + a1 * (0.5 * h));
            let a2 = accel(x + 0.5 * h, y2);
            let (y3, v3) = (y + v2 * (0.5 * h), v + a2 * (0.5 * h));
            let a3 = accel(x + 0.5 * h, y3);
            let (y4, v4) = (y + v3 * h, v + a3 * h);
            let a4 = accel(x + h, y4);
            y += (v + 2.0 * v2 + 2.0 * v3 + v4) * (h / 6.0);
            v += (a1 + 2.0 * a2 + 2.0 * a3 + a4) * (h / 6.0);
            x += h;
        }
        x = target;
        out.push(y);
    }
    out
}

/// A χ or η field on `grid`: series inside [`series_reach`], continued by
/// integrating the eigenvalue equation beyond it.
pub fn continuum_field(family: &ContinuumFamily, energy: Complex64, grid: &Grid) -> Result<WaveFunction> {
    if family.representation() != Representation::Xp {
        return Err(Error::Structural("ψ fields are distributional at u = 0; evaluate pointwise".into()));
    }
    let parts = field_parts(family, energy)?;
    let reach = 0.95 * series_reach(family.gamma);
    let points = grid.points();
    let mut samples = vec![Complex64::new(0.0, 0.0); points.len()];
    let inner: Vec<usize> = (0..points.len()).filter(|&k| points[k].abs() <= reach).collect();
    let values: Vec<Complex64> = inner
        .par_iter()
        .map(|&k| field_and_slope(family, &parts, points[k]).map(|(v, _)| v))
        .collect::<Result<_>>()?;
    for (&k, v) in inner.iter().zip(values) {
        samples[k] = v;
    }
    for dir in [1.0f64, -1.0] {
        let outer: Vec<usize> = if dir > 0.0 {
            (0..points.len()).filter(|&k| points[k] > reach).collect()
        } else {
            (0..points.len()).rev().filter(|&k| points[k] < -reach).collect()
        };
        if outer.is_empty() {
            continue;
        }
        let x0 = dir * reach;
        let (y0, v0) = field_and_slope(family, &parts, x0)?;
        let targets: Vec<f64> = outer.iter().map(|&k| points[k]).collect();
        for (&k, v) in outer.iter().zip(continue_outward(energy, family.gamma, (x0, y0, v0), &targets)) {
            samples[k] = v;
        }
    }
    WaveFunction::new(*grid, samples, Representation::Xp)
}

/// Closed-form residue constant `K_n` with `Res = K_n · f_n^∓(x)` (before the
/// `(−1)^n` of the mirrored member): `f_n^−` for χ at `−E_n`, `f_n^+` for η
/// at `+E_n`.
pub fn residue_constant(family: &ContinuumFamily, n: usize) -> Result<Complex64> {
    if family.representation() != Representation::Xp {
        return Err(Error::Structural("closed-form residue constants exist for χ and η only".into()));
    }
    let gamma = family.gamma;
    let c_tilde = Complex64::from_polar((gamma / (2.0 * PI * PI)).powf(0.25), -FRAC_PI_8);
    let common = c_tilde / (2.0 * PI * gamma).sqrt()
        * Complex64::new(0.0, gamma)
        * (PI / gamma).powf(0.25)
        * (-0.5 * ln_factorial(n)).exp();
    let nf = n as f64;
    let k = if family.is_eta() {
        -common * Complex64::from_polar(1.0, FRAC_PI_4 * (nf + 1.0) - FRAC_PI_8)
    } else {
        common * Complex64::from_polar(1.0, -FRAC_PI_4 * nf + FRAC_PI_8)
    };
    let mirror = if family.side() == Sign::Minus && n % 2 == 1 { -1.0 } else { 1.0 };
    Ok(k * mirror)
}

/// Resonance family carried by the residues: `f_n^−` for χ, `f_n^+` for η.
pub fn residue_resonance_sign(family: &ContinuumFamily) -> Sign {
    if family.is_eta() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidueEstimate {
    pub n: usize,
    pub pole: Complex64,
    /// Circle average of `(E − pole)·field(E)`.
    pub estimate: WaveFunction,
    /// `residue_constant · f_n^∓` on the same grid.
    pub reference: WaveFunction,
    /// Pointwise relative error against `reference` where it exceeds the floor.
    pub max_rel_error: f64,
    /// Largest deviation of a circle sample from the average.
    pub fluctuation: f64,
}

fn circle_average(family: &ContinuumFamily, pole: Complex64, delta: f64, grid: &Grid) -> Result<(Vec<Complex64>, f64)> {
    let mut samples = Vec::with_capacity(4);
    for k in 0..4 {
        let offset = Complex64::from_polar(delta, 0.5 * PI * k as f64);
        let field = continuum_field(family, pole + offset, grid)?;
        samples.push(field.samples().iter().map(|v| v * offset).collect::<Vec<_>>());
    }
    let n = grid.n_points();
    let mean: Vec<Complex64> = (0..n).map(|j| samples.iter().map(|s| s[j]).sum::<Complex64>() * 0.25).collect();
    let fluctuation = samples
        .iter()
        .flat_map(|s| s.iter().zip(&mean).map(|(a, b)| (a - b).norm()))
        .fold(0.0, f64::max);
    Ok((mean, fluctuation))
}

/// Relative pointwise error of `estimate` against `reference` over points
/// where `|reference| > REFERENCE_FLOOR`.
pub fn max_relative_error(estimate: &[Complex64], reference: &[Complex64]) -> f64 {
    estimate
        .iter()
        .zip(reference)
        .filter(|(_, r)| r.norm() > REFERENCE_FLOOR)
        .map(|(e, r)| (e - r).norm() / r.norm())
        .fold(0.0, f64::max)
}

/// Shape error after fitting one complex scalar: `max |e − s r|/|s r|` with
/// the least-squares `s`. Returns `(s, error)`.
pub fn profile_error(estimate: &[Complex64], shape: &[Complex64]) -> (Complex64, f64) {
    let num: Complex64 = shape.iter().zip(estimate).map(|(r, e)| r.conj() * e).sum();
    let den: f64 = shape.iter().map(|r| r.norm_sqr()).sum();
    let s = if den > 0.0 { num / den } else { Complex64::new(0.0, 0.0) };
    let scaled: Vec<Complex64> = shape.iter().map(|r| r * s).collect();
    (s, max_relative_error(estimate, &scaled))
}

/// Circle-averaged residue of a χ or η family at its `n`-th pole, checked
/// against the closed form and against a circle of half the radius.
pub fn residue_at_pole(family: &ContinuumFamily, n: usize, grid: &Grid, delta: f64) -> Result<ResidueEstimate> {
    if family.representation() != Representation::Xp {
        return Err(Error::Capability(
            "ψ residues are distributions at u = 0; use psi_weak_residue".into(),
        ));
    }
    if !(delta > 0.0) {
        return Err(Error::Configuration(format!("circle radius must be positive, got {delta}")));
    }
    let pole = family.pole(n);
    let (mean, fluctuation) = circle_average(family, pole, delta, grid)?;
    let (half, _) = circle_average(family, pole, 0.5 * delta, grid)?;
    let scale = mean.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let change = mean.iter().zip(&half).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if change > RESIDUE_HALVING_TOL * scale {
        return Err(Error::accuracy(
            format!("residue at {pole} changed by {change:e} when the circle was halved"),
            change,
        ));
    }
    let constant = residue_constant(family, n)?;
    let sign = residue_resonance_sign(family);
    let reference = grid
        .points()
        .into_iter()
        .map(|x| eval_f_pm_x(n, sign, x, family.gamma).map(|f| f * constant))
        .collect::<Result<Vec<_>>>()?;
    let max_rel_error = max_relative_error(&mean, &reference);
    Ok(ResidueEstimate {
        n,
        pole,
        estimate: WaveFunction::new(*grid, mean, Representation::Xp)?,
        reference: WaveFunction::new(*grid, reference, Representation::Xp)?,
        max_rel_error,
        fluctuation,
    })
}

/// Locates the poles of a χ or η family with `|Im E| ≤ γ(n_max + 1)` by
/// contour moments `∮E F dE / ∮F dE` over a cover of discs, `F(E) = field(E, x0)`.
pub fn detect_poles(family: &ContinuumFamily, n_max: usize) -> Result<Vec<Complex64>> {
    if family.representation() != Representation::Xp {
        return Err(Error::Structural("pole detection needs a χ or η family".into()));
    }
    let gamma = family.gamma;
    let x0 = 0.7 / gamma.sqrt();
    let spacing = 0.3 * gamma;
    let radius = 0.3 * gamma;
    const NODES: usize = 256;
    let reach = gamma * (n_max as f64 + 1.0);
    let rows = (reach / spacing).ceil() as i64;
    let mut centres = Vec::new();
    for col in -2..=2i64 {
        for row in -rows..=rows {
            // Offsets keep every circle clear of the half-integer lattice.
            centres.push(Complex64::new((col as f64 + 0.17) * spacing, (row as f64 + 0.23) * spacing));
        }
    }
    let found: Vec<Option<Complex64>> = centres
        .par_iter()
        .map(|&c| -> Result<Option<Complex64>> {
            let mut m0 = Complex64::new(0.0, 0.0);
            let mut m1 = Complex64::new(0.0, 0.0);
            let mut peak: f64 = 0.0;
            for k in 0..NODES {
                let w = Complex64::from_polar(radius, 2.0 * PI * k as f64 / NODES as f64);
                let e = c + w;
                let f = eval_xp(family, e, x0)?;
                peak = peak.max(f.norm());
                m0 += f * w;
                m1 += f * w * e;
            }
            if m0.norm() <= 1e-6 * radius * peak * NODES as f64 {
                return Ok(None);
            }
            let centroid = m1 / m0;
            Ok(((centroid - c).norm() < 0.8 * radius && centroid.im.abs() <= reach).then_some(centroid))
        })
        .collect::<Result<_>>()?;
    let mut poles: Vec<Complex64> = Vec::new();
    for p in found.into_iter().flatten() {
        if poles.iter().all(|q| (q - p).norm() > 1e-3 * gamma) {
            poles.push(p);
        }
    }
    poles.sort_by(|a, b| a.im.total_cmp(&b.im));
    Ok(poles)
}

/// Weak residue of a ψ family at `−E_n`, paired with a test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakResidue {
    /// Circle average of `(E − pole)·∫ψ^E φ` (analytically continued).
    pub estimate: Complex64,
    /// `(±1)^n i√γ/√(2π n!) · ∫ f_n^− φ`.
    pub reference: Complex64,
}

/// `∫_0^∞ u^λ g(u) du` continued to `Re λ > −K−1` by subtracting the first
/// `K` Taylor terms on `[0, c]`; `g` is sampled on nodes `k·h`.
fn continued_mellin(lambda: Complex64, g: &[Complex64], h: f64, taylor: &[Complex64]) -> Complex64 {
    let cut = ((1.0 / h).round() as usize).clamp(2, g.len() - 1);
    let c = cut as f64 * h;
    let power = |u: f64| if u == 0.0 { Complex64::new(0.0, 0.0) } else { (lambda * u.ln()).exp() };
    let inner_w = quadrature_weights(cut + 1, h);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, w) in inner_w.iter().enumerate() {
        let u = k as f64 * h;
        let poly: Complex64 = taylor.iter().rev().fold(Complex64::new(0.0, 0.0), |s, a| s * u + a);
        acc += (g[k] - poly) * power(u) * w;
    }
    let outer_w = quadrature_weights(g.len() - cut, h);
    for (j, w) in outer_w.iter().enumerate() {
        let u = (cut + j) as f64 * h;
        acc += g[cut + j] * power(u) * w;
    }
    for (k, a) in taylor.iter().enumerate() {
        let s = lambda + (k as f64 + 1.0);
        acc += a * (s * c.ln()).exp() / s;
    }
    acc
}

/// Weak form of the ψ residue at `−E_n`: the test function's Taylor
/// coefficients come from the stencil pairings, the regular part from
/// quadrature, and the circle average isolates the pole.
pub fn psi_weak_residue(family: &ContinuumFamily, n: usize, test: &WaveFunction, delta: f64) -> Result<WeakResidue> {
    require_kind(family, [FamilyKind::PsiPlus, FamilyKind::PsiMinus], "psi_weak_residue")?;
    if test.representation() != Representation::Uv {
        return Err(Error::Structural("ψ pairings need a uv test function".into()));
    }
    let grid = test.grid();
    let origin = grid
        .origin_index()
        .ok_or_else(|| Error::Structural("ψ pairings need u = 0 on the grid".into()))?;
    let moll = MollifierSpec::for_grid(grid);
    let orders = n + 2;
    let dual = (0..orders)
        .map(|k| pair_f_minus_u(test, k, &moll))
        .collect::<Result<Vec<_>>>()?;
    let mirror = family.side() == Sign::Minus;
    // Taylor coefficients φ^{(k)}(0)/k! of g(u) = φ(±u).
    let taylor: Vec<Complex64> = dual
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let t = d * (-0.5 * ln_factorial(k)).exp();
            if mirror && k % 2 == 1 {
                -t
            } else {
                t
            }
        })
        .collect();
    let s = test.samples();
    let g: Vec<Complex64> = if mirror {
        (0..=origin).rev().map(|k| s[k]).collect()
    } else {
        s[origin..].to_vec()
    };
    let h = grid.spacing();
    let pole = family.pole(n);
    let norm = (2.0 * PI * family.gamma).sqrt().recip();
    let mut estimate = Complex64::new(0.0, 0.0);
    for k in 0..4 {
        let offset = Complex64::from_polar(delta, 0.5 * PI * k as f64);
        let lambda = family.nu(pole + offset);
        estimate += offset * continued_mellin(lambda, &g, h, &taylor) * norm * 0.25;
    }
    let parity = if mirror && n % 2 == 1 { -1.0 } else { 1.0 };
    let reference = Complex64::new(0.0, parity * family.gamma.sqrt() / (2.0 * PI).sqrt())
        * (-0.5 * ln_factorial(n)).exp()
        * dual[n];
    Ok(WeakResidue { estimate, reference })
}

/// `Σ_±∫ conj(χ_±^{E1}) χ_±^{E2} w(x) dx` over the window grid, `w` a cosine
/// taper of width `taper_width` at both ends.
pub fn orthonormality_check_chi(gamma: f64, e1: f64, e2: f64, window: &Grid, taper_width: f64) -> Result<Complex64> {
    let plus = ContinuumFamily::new(FamilyKind::ChiPlus, gamma)?;
    let a = continuum_field(&plus, Complex64::new(e1, 0.0), window)?;
    let b = if e1 == e2 {
        a.clone()
    } else {
        continuum_field(&plus, Complex64::new(e2, 0.0), window)?
    };
    let (sa, sb) = (a.samples(), b.samples());
    let n = sa.len();
    // χ_−(x) = χ_+(−x): the minus term is the plus product read backwards,
    // which needs a window symmetric about the origin.
    if (window.u_min() + window.u_max()).abs() > 1e-12 * window.u_max().abs() {
        return Err(Error::Structural("orthonormality windows must be symmetric".into()));
    }
    let taper = taper_weights(window, taper_width)?;
    let weights = window.weights();
    Ok((0..n)
        .map(|j| (sa[j].conj() * sb[j] + sa[n - 1 - j].conj() * sb[n - 1 - j]) * taper[j] * weights[j])
        .sum())
}

/// The same windowed product for plane waves `e^{ikx}/√(2π)`, whose
/// δ-normalisation is exact.
pub fn orthonormality_check_plane_waves(k1: f64, k2: f64, window: &Grid, taper_width: f64) -> Result<Complex64> {
    let taper = taper_weights(window, taper_width)?;
    let weights = window.weights();
    Ok(window
        .points()
        .into_iter()
        .zip(taper.iter().zip(weights))
        .map(|(x, (t, w))| Complex64::from_polar(t * w / (2.0 * PI), (k2 - k1) * x))
        .sum())
}

fn taper_weights(window: &Grid, taper_width: f64) -> Result<Vec<f64>> {
    let half = 0.5 * (window.u_max() - window.u_min());
    if !(taper_width >= 0.0 && taper_width < half) {
        return Err(Error::Configuration(format!("taper width {taper_width} does not fit the window")));
    }
    let (lo, hi) = (window.u_min(), window.u_max());
    Ok(window
        .points()
        .into_iter()
        .map(|x| {
            let d = (x - lo).min(hi - x);
            if taper_width == 0.0 || d >= taper_width {
                1.0
            } else {
                (0.5 * PI * d / taper_width).sin().powi(2)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poles_sit_on_the_imaginary_axis() {
        let chi = ContinuumFamily::new(FamilyKind::ChiPlus, 2.0).unwrap();
        let eta = ContinuumFamily::new(FamilyKind::EtaMinus, 2.0).unwrap();
        assert_eq!(chi.pole(1), Complex64::new(0.0, -3.0));
        assert_eq!(eta.pole(0), Complex64::new(0.0, 1.0));
        assert_eq!(chi.nearest_pole(Complex64::new(0.0, -3.1)).0, 1);
        assert!((eta.nearest_pole(Complex64::new(0.2, 1.0)).1 - 0.2).abs() < 1e-15);
    }

    #[test]
    fn pole_guard() {
        let chi = ContinuumFamily::new(FamilyKind::ChiPlus, 1.0).unwrap();
        let near = chi.pole(2) + Complex64::new(1e-7, 0.0);
        assert!(matches!(eval_chi(&chi, near, 0.3), Err(Error::PoleProximity { .. })));
        assert!(eval_chi(&chi, chi.pole(2) + 1e-5, 0.3).is_ok());
    }
}
