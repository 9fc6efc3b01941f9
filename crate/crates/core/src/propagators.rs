//! Time evolution in both pictures.
//!
//! In `(u,v)` the Hamiltonian `H = iγ(u∂_u + ½)` generates the scaling group
//! `ψ(u,t) = e^{γt/2} φ(e^{γt}u)`, available exactly and through an
//! independent method-of-lines integrator. In `(x,p)` the reversed oscillator
//! `H = p²/2 − γ²x²/2` is integrated by Strang splitting.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{interpolate, norm, Grid, Representation, WaveFunction};
use crate::numerics::{fd_weights, fit_line, ChirpSum};
use crate::resonances::{project_f_plus_u, project_f_plus_x, RegularizedPairing};

/// Default time step of the stepped propagators.
pub const DEFAULT_DT: f64 = 1e-3;

/// Largest admissible time step of the stepped propagators.
pub const MAX_DT: f64 = 1e-2;

/// Courant limit `γ·max|u|·dt/h` of the method-of-lines integrator.
pub const CFL_LIMIT: f64 = 0.5;

/// Fraction of each side of an `(x,p)` grid covered by the absorber.
pub const ABSORBER_FRACTION: f64 = 0.1;

/// Damping rate at the outer edge of the absorber.
pub const ABSORBER_STRENGTH: f64 = 100.0;

/// Magnitudes at or below this floor are excluded from rate fits.
pub const RATE_FLOOR: f64 = 1e-12;

/// Edge amplitude, relative to the peak, above which truncation is reported.
const EDGE_WARN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropagatorKind {
    /// Resampling `e^{γt/2} φ(e^{γt}u)`.
    ExactScaling,
    /// RK4 with fourth-order differences for `∂_t ψ = γ(u∂_u ψ + ψ/2)`.
    PdeUv,
    /// Strang potential–kinetic–potential splitting in `(x,p)`.
    SplitStepXp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Nothing enters from outside the grid; the split-step grid is periodic.
    ZeroFill,
    /// Cosine-profile damping over the outer tenth of each side (split-step
    /// only; the `(u,v)` flow is inward and needs no absorber).
    AbsorbingTaper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorSpec {
    kind: PropagatorKind,
    gamma: f64,
    dt: f64,
    boundary: Boundary,
}

impl PropagatorSpec {
    /// `gamma > 0`, except that the split-step integrator also accepts the
    /// free particle `gamma = 0`. Stepped kinds need `0 < dt ≤ 1e-2`.
    pub fn new(kind: PropagatorKind, gamma: f64, dt: f64, boundary: Boundary) -> Result<Self> {
        let gamma_ok = match kind {
            PropagatorKind::SplitStepXp => gamma.is_finite() && gamma >= 0.0,
            _ => gamma.is_finite() && gamma > 0.0,
        };
        if !gamma_ok {
            return Err(Error::Configuration(format!("invalid rate γ = {gamma} for {kind:?}")));
        }
        if kind != PropagatorKind::ExactScaling && !(dt > 0.0 && dt <= MAX_DT) {
            return Err(Error::Configuration(format!("time step {dt} outside (0, {MAX_DT}]")));
        }
        Ok(PropagatorSpec {
            kind,
            gamma,
            dt,
            boundary,
        })
    }

    pub fn exact(gamma: f64) -> Result<Self> {
        Self::new(PropagatorKind::ExactScaling, gamma, DEFAULT_DT, Boundary::ZeroFill)
    }

    pub fn pde(gamma: f64, dt: f64) -> Result<Self> {
        Self::new(PropagatorKind::PdeUv, gamma, dt, Boundary::ZeroFill)
    }

    pub fn split_step(gamma: f64, dt: f64, boundary: Boundary) -> Result<Self> {
        Self::new(PropagatorKind::SplitStepXp, gamma, dt, boundary)
    }

    pub fn kind(&self) -> PropagatorKind {
        self.kind
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
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

fn edge_ratio(phi: &WaveFunction, depth: usize) -> f64 {
    let peak = phi.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let s = phi.samples();
    let d = depth.min(s.len());
    let edge = s[..d].iter().chain(&s[s.len() - d..]).map(|z| z.norm()).fold(0.0, f64::max);
    edge / peak
}

/// `ψ(u,t) = e^{γt/2} φ0(e^{γt}u)` on the grid of `phi0`, for any real `t`.
pub fn evolve_damped_exact(phi0: &WaveFunction, t: f64, gamma: f64) -> Result<WaveFunction> {
    require(phi0, Representation::Uv)?;
    if t == 0.0 {
        return Ok(phi0.clone());
    }
    let grid = *phi0.grid();
    let stretch = (gamma * t).exp();
    let amplitude = (0.5 * gamma * t).exp();
    // Source abscissae reached by the evolved grid are [u_min, u_max]·e^{γt};
    // amplitude outside that window is lost.
    let (lo, hi) = (grid.u_min() * stretch, grid.u_max() * stretch);
    let lost = grid
        .points()
        .into_iter()
        .zip(phi0.samples())
        .filter(|(u, _)| *u < lo || *u > hi)
        .map(|(_, z)| z.norm())
        .fold(0.0, f64::max);
    let peak = phi0.max_abs();
    let edge = edge_ratio(phi0, 1);
    if peak > 0.0 && (lost > EDGE_WARN * peak || (stretch > 1.0 && edge > EDGE_WARN)) {
        warn!(
            "exact evolution to t = {t}: source amplitude {:e} (relative) falls outside the grid",
            (lost / peak).max(edge)
        );
    }
    let samples = grid
        .points()
        .into_iter()
        .map(|u| amplitude * interpolate(phi0, stretch * u))
        .collect();
    WaveFunction::new(grid, samples, Representation::Uv)
}

/// The exactly evolved state on the contracted grid `e^{-γt}·grid`, where its
/// samples are `e^{γt/2}` times those of `phi0` with no interpolation.
pub fn evolve_damped_exact_contracted(phi0: &WaveFunction, t: f64, gamma: f64) -> Result<WaveFunction> {
    require(phi0, Representation::Uv)?;
    let g = phi0.grid();
    let shrink = (-gamma * t).exp();
    let grid = Grid::new(g.n_points(), g.u_min() * shrink, g.u_max() * shrink)?;
    let amplitude = Complex64::new((0.5 * gamma * t).exp(), 0.0);
    WaveFunction::new(grid, phi0.samples().iter().map(|z| z * amplitude).collect(), Representation::Uv)
}

/// First-derivative operator: centred fourth-order in the interior, shifted
/// five-point stencils next to the boundary nodes.
struct Derivative {
    interior: [f64; 5],
    near_left: Vec<f64>,
    near_right: Vec<f64>,
}

impl Derivative {
    fn new(h: f64) -> Self {
        let nodes: Vec<f64> = (0..5).map(f64::from).collect();
        let scale = |w: Vec<f64>| w.into_iter().map(|x| x / h).collect::<Vec<_>>();
        let c = scale(fd_weights(1, 2.0, &nodes));
        Derivative {
            interior: [c[0], c[1], c[2], c[3], c[4]],
            near_left: scale(fd_weights(1, 1.0, &nodes)),
            near_right: scale(fd_weights(1, 3.0, &nodes)),
        }
    }

    /// `γ(u ∂_u ψ + ψ/2)` with `ψ = 0` held on both boundary nodes.
    fn rhs(&self, psi: &[Complex64], u: &[f64], gamma: f64) -> Vec<Complex64> {
        let n = psi.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        let dot = |w: &[f64], start: usize| -> Complex64 { w.iter().zip(&psi[start..start + 5]).map(|(a, z)| z * a).sum() };
        for j in 1..n - 1 {
            let d = if j == 1 {
                dot(&self.near_left, 0)
            } else if j == n - 2 {
                dot(&self.near_right, n - 5)
            } else {
                dot(&self.interior, j - 2)
            };
            out[j] = gamma * (u[j] * d + 0.5 * psi[j]);
        }
        out
    }
}

fn step_count(t_final: f64, dt: f64) -> usize {
    ((t_final / dt) - 1e-9).ceil().max(0.0) as usize
}

/// Method-of-lines solution of `∂_t ψ = γ(u ∂_u ψ + ψ/2)` up to `t_final ≥ 0`.
///
/// The characteristics flow inward, so both boundary nodes are inflow nodes
/// and are held at zero.
pub fn evolve_pde_uv(phi0: &WaveFunction, t_final: f64, spec: &PropagatorSpec) -> Result<WaveFunction> {
    require(phi0, Representation::Uv)?;
    if spec.kind != PropagatorKind::PdeUv {
        return Err(Error::Configuration(format!("evolve_pde_uv needs a pde_uv spec, got {:?}", spec.kind)));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::Data(format!("final time must be non-negative, got {t_final}")));
    }
    let grid = *phi0.grid();
    if grid.n_points() < 7 {
        return Err(Error::Structural("the pde integrator needs at least 7 grid points".into()));
    }
    let h = grid.spacing();
    let u_abs = grid.u_min().abs().max(grid.u_max().abs());
    let courant = spec.gamma * u_abs * spec.dt / h;
    if courant > CFL_LIMIT * (1.0 + 1e-12) {
        return Err(Error::Configuration(format!(
            "CFL number {courant} exceeds {CFL_LIMIT} (γ = {}, max|u| = {u_abs}, dt = {}, h = {h})",
            spec.gamma, spec.dt
        )));
    }
    if edge_ratio(phi0, 1) > EDGE_WARN {
        warn!("pde evolution: initial state does not vanish on the inflow boundary");
    }
    let steps = step_count(t_final, spec.dt);
    if steps == 0 {
        return Ok(phi0.clone());
    }
    let dt = t_final / steps as f64;
    let u = grid.points();
    let op = Derivative::new(h);
    let gamma = spec.gamma;
    let mut psi = phi0.samples().to_vec();
    let n = psi.len();
    psi[0] = Complex64::new(0.0, 0.0);
    psi[n - 1] = Complex64::new(0.0, 0.0);
    let stage = |base: &[Complex64], k: &[Complex64], f: f64| -> Vec<Complex64> {
        base.iter().zip(k).map(|(b, k)| b + k * f).collect()
    };
    for _ in 0..steps {
        let k1 = op.rhs(&psi, &u, gamma);
        let k2 = op.rhs(&stage(&psi, &k1, 0.5 * dt), &u, gamma);
        let k3 = op.rhs(&stage(&psi, &k2, 0.5 * dt), &u, gamma);
        let k4 = op.rhs(&stage(&psi, &k3, dt), &u, gamma);
        psi = (0..n)
            .map(|j| psi[j] + (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (dt / 6.0))
            .collect();
    }
    let out = WaveFunction::new(grid, psi, Representation::Uv)?;
    let edge = edge_ratio(&out, 5);
    if edge > 1e-6 {
        warn!("pde evolution: amplitude {edge:e} (relative) has grown next to the inflow boundary");
    }
    Ok(out)
}

/// `exp(−κ dt sin²(πd/2))` with `d ∈ [0,1]` the depth into the absorber.
fn absorber_mask(grid: &Grid, dt: f64) -> Vec<f64> {
    let half = 0.5 * (grid.u_max() - grid.u_min());
    let centre = 0.5 * (grid.u_max() + grid.u_min());
    let inner = half * (1.0 - ABSORBER_FRACTION);
    grid.points()
        .into_iter()
        .map(|x| {
            let r = (x - centre).abs();
            if r <= inner {
                1.0
            } else {
                let d = ((r - inner) / (half - inner)).min(1.0);
                (-ABSORBER_STRENGTH * dt * (0.5 * PI * d).sin().powi(2)).exp()
            }
        })
        .collect()
}

/// Strang split-step solution of `i∂_t ψ = (p²/2 − γ²x²/2)ψ` up to `t_final ≥ 0`.
pub fn evolve_rho_xp(phi0: &WaveFunction, t_final: f64, spec: &PropagatorSpec) -> Result<WaveFunction> {
    require(phi0, Representation::Xp)?;
    if spec.kind != PropagatorKind::SplitStepXp {
        return Err(Error::Configuration(format!(
            "evolve_rho_xp needs a split_step_xp spec, got {:?}",
            spec.kind
        )));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::Data(format!("final time must be non-negative, got {t_final}")));
    }
    let steps = step_count(t_final, spec.dt);
    if steps == 0 {
        return Ok(phi0.clone());
    }
    let dt = t_final / steps as f64;
    let grid = *phi0.grid();
    let n = grid.n_points();
    let h = grid.spacing();
    let gamma2 = spec.gamma * spec.gamma;
    let half_potential: Vec<Complex64> = grid
        .points()
        .into_iter()
        .map(|x| Complex64::from_polar(1.0, 0.25 * gamma2 * x * x * dt))
        .collect();
    let dk = 2.0 * PI / (n as f64 * h);
    // The 1/n of the inverse transform is folded into the kinetic factor.
    let kinetic: Vec<Complex64> = (0..n)
        .map(|j| {
            let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 } * dk;
            Complex64::from_polar(1.0 / n as f64, -0.5 * k * k * dt)
        })
        .collect();
    let mask = match spec.boundary {
        Boundary::ZeroFill => None,
        Boundary::AbsorbingTaper => Some(absorber_mask(&grid, dt)),
    };
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let initial_norm = norm(phi0)?;
    let mut psi = phi0.samples().to_vec();
    for _ in 0..steps {
        for (z, p) in psi.iter_mut().zip(&half_potential) {
            *z *= p;
        }
        fft.process(&mut psi);
        for (z, k) in psi.iter_mut().zip(&kinetic) {
            *z *= k;
        }
        ifft.process(&mut psi);
        for (z, p) in psi.iter_mut().zip(&half_potential) {
            *z *= p;
        }
        if let Some(mask) = &mask {
            for (z, m) in psi.iter_mut().zip(mask) {
                *z *= m;
            }
        }
    }
    let out = WaveFunction::new(grid, psi, Representation::Xp)?;
    if mask.is_some() && initial_norm > 0.0 {
        let loss = 1.0 - norm(&out)? / initial_norm;
        if loss > 0.01 {
            warn!("split-step evolution: {:.3}% of the norm absorbed by t = {t_final}", 100.0 * loss);
        }
    }
    Ok(out)
}

/// Time reversal: `(Tφ)(u) = (2π)^{-1/2} ∫ φ(v) e^{iuv} dv` on the same grid
/// in `(u,v)`, complex conjugation in `(x,p)`.
pub fn time_reverse(phi: &WaveFunction) -> Result<WaveFunction> {
    match phi.representation() {
        Representation::Xp => Ok(phi.conj()),
        Representation::Uv => {
            let grid = *phi.grid();
            let (u0, h, n) = (grid.u_min(), grid.spacing(), grid.n_points());
            // u_j u_k = u0² + u0 h (j + k) + h² j k.
            let a: Vec<Complex64> = phi
                .samples()
                .iter()
                .zip(grid.weights())
                .enumerate()
                .map(|(k, (z, w))| z * Complex64::from_polar(w, u0 * h * k as f64))
                .collect();
            let scale = (2.0 * PI).sqrt().recip();
            let samples = ChirpSum::new(n, n, h * h)
                .apply(&a)
                .into_iter()
                .enumerate()
                .map(|(j, y)| y * Complex64::from_polar(scale, u0 * u0 + u0 * h * j as f64))
                .collect();
            WaveFunction::new(grid, samples, Representation::Uv)
        }
    }
}

/// `C_n(t) = ⟨U(t)φ|f_n^+⟩*` sampled at increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTrace {
    pub n: usize,
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Least-squares slope of `ln|C_n|` against `t`.
    pub fitted_rate: f64,
}

/// Slope of `ln|value|` against time over samples above [`RATE_FLOOR`].
pub fn fitted_rate(times: &[f64], values: &[Complex64]) -> Result<f64> {
    let (t, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(_, v)| v.norm() > RATE_FLOOR)
        .map(|(t, v)| (*t, v.norm().ln()))
        .unzip();
    fit_line(&t, &y)
        .map(|f| f.slope)
        .ok_or_else(|| Error::UndefinedRate(format!("{} of {} samples above {RATE_FLOOR:e}", t.len(), times.len())))
}

/// Projects the state evolved under `spec` onto `f_n^+` at each time.
///
/// The exact kind evaluates on contracted grids, so its rate is exact up to
/// rounding. The stepped kinds march once through the sorted times.
pub fn coefficient_trace(phi0: &WaveFunction, spec: &PropagatorSpec, n: usize, times: &[f64]) -> Result<CoefficientTrace> {
    let values = coefficient_values(phi0, spec, n, times)?;
    let fitted_rate = fitted_rate(times, &values)?;
    Ok(CoefficientTrace {
        n,
        times: times.to_vec(),
        values,
        fitted_rate,
    })
}

/// The samples `C_n(t)` of [`coefficient_trace`] without the rate fit.
pub fn coefficient_values(phi0: &WaveFunction, spec: &PropagatorSpec, n: usize, times: &[f64]) -> Result<Vec<Complex64>> {
    if times.is_empty() {
        return Err(Error::Data("coefficient trace needs at least one time".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times[0] < 0.0 {
        return Err(Error::Data("trace times must be non-negative and strictly increasing".into()));
    }
    let project = |state: &WaveFunction| -> Result<Complex64> {
        let c = match state.representation() {
            Representation::Uv => project_f_plus_u(state, n)?,
            Representation::Xp => project_f_plus_x(state, n, spec.gamma, &RegularizedPairing::for_sampled_data())?,
        };
        Ok(c.conj())
    };
    let values = match spec.kind {
        PropagatorKind::ExactScaling => times
            .iter()
            .map(|&t| project(&evolve_damped_exact_contracted(phi0, t, spec.gamma)?))
            .collect::<Result<Vec<_>>>()?,
        PropagatorKind::PdeUv | PropagatorKind::SplitStepXp => {
            let mut state = phi0.clone();
            let mut now = 0.0;
            let mut out = Vec::with_capacity(times.len());
            for &t in times {
                state = match spec.kind {
                    PropagatorKind::PdeUv => evolve_pde_uv(&state, t - now, spec)?,
                    _ => evolve_rho_xp(&state, t - now, spec)?,
                };
                now = t;
                out.push(project(&state)?);
            }
            out
        }
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite coefficient in trace".into()));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagator_parameters_are_validated() {
        assert!(PropagatorSpec::pde(1.0, 0.02).is_err());
        assert!(PropagatorSpec::pde(0.0, 1e-3).is_err());
        assert!(PropagatorSpec::split_step(0.0, 1e-3, Boundary::ZeroFill).is_ok());
        assert!(PropagatorSpec::exact(1.0).is_ok());
    }

    #[test]
    fn interior_stencil_is_the_classic_one() {
        let d = Derivative::new(1.0);
        let expected = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        for (a, b) in d.interior.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
