//! Background functions `φ_N^BG(u,t) = φ(u,t) − Σ_{n≤N} e^{−γ(n+½)t} conj(c_n) f̃_n^−(u)`
//! with mollified `f̃_n^−`, coefficient-decay diagnostics, and the tail
//! comparison between a state's background and its difference from a bump.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Representation, WaveFunction};
use crate::numerics::fit_line;
use crate::propagators::{evolve_damped_exact, evolve_pde_uv, PropagatorKind, PropagatorSpec};
use crate::resonances::{mollified_f_minus_field, project_f_plus_u, project_f_plus_u_scaled, MollifierSpec};

/// Coefficients at or below this magnitude are left out of decay fits.
pub const COEFFICIENT_FLOOR: f64 = 1e-14;

/// Denominator floor of the tail relative error.
pub const TAIL_FLOOR: f64 = 1e-12;

/// The tail starts this factor beyond the evolving bump support.
pub const SUPPORT_MARGIN: f64 = 1.2;

/// Default number of subtracted terms minus one (`φ_20^BG`).
pub const DEFAULT_ORDER: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecayClass {
    SuperExponential,
    PowerLaw,
    Undetermined,
}

impl DecayClass {
    pub fn name(self) -> &'static str {
        match self {
            DecayClass::SuperExponential => "super_exponential",
            DecayClass::PowerLaw => "power_law",
            DecayClass::Undetermined => "undetermined",
        }
    }
}

/// Competing fits of `ln|c_n|`: against `ln n` (power law) and against
/// `n ln n` (factorial-type decay).
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub orders: Vec<usize>,
    pub ln_abs: Vec<f64>,
    /// Slope of `ln|c_n|` against `ln n`.
    pub exponent: f64,
    pub power_rss: f64,
    pub super_rss: f64,
    pub class: DecayClass,
}

/// Classifies the decay of `|c_n|` from `(n, ln|c_n|)` samples above the floor.
pub fn fit_decay(orders: &[usize], ln_abs: &[f64]) -> DecayFit {
    let floor = COEFFICIENT_FLOOR.ln();
    let (ns, ys): (Vec<usize>, Vec<f64>) = orders
        .iter()
        .zip(ln_abs)
        .filter(|(n, y)| **n > 0 && y.is_finite() && **y > floor)
        .map(|(n, y)| (*n, *y))
        .unzip();
    let undetermined = |ns: Vec<usize>, ys: Vec<f64>| DecayFit {
        orders: ns,
        ln_abs: ys,
        exponent: f64::NAN,
        power_rss: f64::NAN,
        super_rss: f64::NAN,
        class: DecayClass::Undetermined,
    };
    if ns.len() < 3 {
        return undetermined(ns, ys);
    }
    let log_n: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let n_log_n: Vec<f64> = ns.iter().map(|&n| n as f64 * (n as f64).ln()).collect();
    let (Some(power), Some(fast)) = (fit_line(&log_n, &ys), fit_line(&n_log_n, &ys)) else {
        return undetermined(ns, ys);
    };
    let class = if power.rss < fast.rss {
        DecayClass::PowerLaw
    } else if fast.rss < power.rss {
        DecayClass::SuperExponential
    } else {
        DecayClass::Undetermined
    };
    DecayFit {
        orders: ns,
        ln_abs: ys,
        exponent: power.slope,
        power_rss: power.rss,
        super_rss: fast.rss,
        class,
    }
}

/// Decay of `|⟨φ|f_n^+⟩|` over `n ∈ [n_min, n_max]`, restricted to the parity
/// of `n_min` (even data has vanishing odd coefficients). Projections are
/// carried in log space.
pub fn coefficient_decay_order(phi0: &WaveFunction, n_min: usize, n_max: usize) -> Result<DecayFit> {
    if n_min > n_max {
        return Err(Error::Configuration(format!("empty order range [{n_min}, {n_max}]")));
    }
    let orders: Vec<usize> = (n_min..=n_max).step_by(2).collect();
    let ln_abs = orders
        .par_iter()
        .map(|&n| project_f_plus_u_scaled(phi0, n).map(|c| c.ln_abs()))
        .collect::<Result<Vec<_>>>()?;
    Ok(fit_decay(&orders, &ln_abs))
}

fn evolve(phi0: &WaveFunction, t: f64, spec: &PropagatorSpec) -> Result<WaveFunction> {
    match spec.kind() {
        PropagatorKind::ExactScaling => evolve_damped_exact(phi0, t, spec.gamma()),
        PropagatorKind::PdeUv => evolve_pde_uv(phi0, t, spec),
        PropagatorKind::SplitStepXp => Err(Error::Structural("background functions live in the uv picture".into())),
    }
}

/// The unmollified reading of `φ_N^BG`: the evolved field and the evolved
/// coefficients `e^{−γ(n+½)t} conj(c_n)` of the subtracted terms.
pub fn background_parts(
    phi0: &WaveFunction,
    order: Option<usize>,
    t: f64,
    spec: &PropagatorSpec,
) -> Result<(WaveFunction, Vec<Complex64>)> {
    if phi0.representation() != Representation::Uv {
        return Err(Error::Structural("background functions need a uv state".into()));
    }
    let evolved = evolve(phi0, t, spec)?;
    let gamma = spec.gamma();
    let coefficients = match order {
        None => Vec::new(),
        Some(n_max) => (0..=n_max)
            .into_par_iter()
            .map(|n| project_f_plus_u(phi0, n).map(|c| c.conj() * (-gamma * (n as f64 + 0.5) * t).exp()))
            .collect::<Result<Vec<_>>>()?,
    };
    Ok((evolved, coefficients))
}

/// `φ_N^BG(·, t)`; `order = None` is the empty sum.
pub fn background_field(
    phi0: &WaveFunction,
    order: Option<usize>,
    t: f64,
    spec: &PropagatorSpec,
    moll: &MollifierSpec,
) -> Result<WaveFunction> {
    let (evolved, coefficients) = background_parts(phi0, order, t, spec)?;
    let grid = *evolved.grid();
    let mut acc = evolved;
    for (n, c) in coefficients.iter().enumerate() {
        acc = acc.axpy(-c, &mollified_f_minus_field(n, &grid, moll)?)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundReport {
    /// Highest subtracted order `N`.
    pub order: usize,
    pub gamma: f64,
    pub times: Vec<f64>,
    /// `|u|` interval compared at each time.
    pub tail_regions: Vec<(f64, f64)>,
    /// Median relative tail error at each time.
    pub tail_rel_error: Vec<f64>,
    /// Coefficient decay of the compared state, when requested.
    pub decay: Option<DecayFit>,
}

impl BackgroundReport {
    pub fn with_decay(mut self, decay: DecayFit) -> Self {
        self.decay = Some(decay);
        self
    }
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Compares `φ_N^BG` of `state` with `state(·,t) − bump(·,t)` on the tail
/// `|u| ≥ max(1.2·e^{−γt}ε₀, mollifier footprint)` at each time.
pub fn tail_compare(
    state: &WaveFunction,
    bump: &WaveFunction,
    epsilon0: f64,
    order: usize,
    times: &[f64],
    spec: &PropagatorSpec,
    moll: &MollifierSpec,
) -> Result<BackgroundReport> {
    if state.representation() != Representation::Uv || bump.representation() != Representation::Uv {
        return Err(Error::Structural("tail comparison needs uv states".into()));
    }
    if !state.grid().same_as(bump.grid()) {
        return Err(Error::Structural("state and bump must share a grid".into()));
    }
    if !(epsilon0 > 0.0) {
        return Err(Error::Data(format!("bump half-width must be positive, got {epsilon0}")));
    }
    let grid = *state.grid();
    let edge = grid.u_min().abs().min(grid.u_max().abs());
    let footprint = moll.footprint(order);
    let per_time = times
        .par_iter()
        .map(|&t| -> Result<((f64, f64), f64)> {
            let inner = (SUPPORT_MARGIN * (-spec.gamma() * t).exp() * epsilon0).max(footprint);
            if inner >= edge {
                return Err(Error::Configuration(format!(
                    "tail region [{inner}, {edge}] is empty at t = {t}"
                )));
            }
            let background = background_field(state, Some(order), t, spec, moll)?;
            let difference = evolve(state, t, spec)?.sub(&evolve(bump, t, spec)?)?;
            let errors: Vec<f64> = grid
                .points()
                .iter()
                .enumerate()
                .filter(|(_, u)| u.abs() >= inner && u.abs() <= edge)
                .map(|(k, _)| {
                    let d = difference.samples()[k];
                    (background.samples()[k] - d).norm() / d.norm().max(TAIL_FLOOR)
                })
                .collect();
            if errors.is_empty() {
                return Err(Error::Configuration(format!("no grid points in the tail at t = {t}")));
            }
            Ok(((inner, edge), median(errors)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (tail_regions, tail_rel_error) = per_time.into_iter().unzip();
    Ok(BackgroundReport {
        order,
        gamma: spec.gamma(),
        times: times.to_vec(),
        tail_regions,
        tail_rel_error,
        decay: None,
    })
}
