//! Compactly supported bumps `φ_ε(u) = K_ε exp(1/((u/ε)² − 1))` on `|u| < ε`
//! and one-parameter fits of a state by a bump.

use log::warn;

use crate::error::{Error, Result};
use crate::grid::{inner_product, Grid, Representation, WaveFunction};
use crate::numerics::{adaptive_simpson, golden_section};

/// Default search interval for `ε`.
pub const DEFAULT_SEARCH: (f64, f64) = (0.5, 4.0);

/// Tolerance in `ε` for the golden-section search.
pub const FIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpParams {
    epsilon: f64,
    k_epsilon: f64,
}

impl BumpParams {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Normalisation constant `K_ε`.
    pub fn k_epsilon(&self) -> f64 {
        self.k_epsilon
    }

    /// The bump sampled on `grid` in the `(u,v)` picture.
    pub fn field(&self, grid: &Grid) -> Result<WaveFunction> {
        WaveFunction::from_real_fn(*grid, Representation::Uv, |u| eval_bump(self, u))
    }
}

/// Unnormalised profile `exp(1/((u/ε)² − 1))`, exactly zero for `|u| ≥ ε`.
fn profile(epsilon: f64, u: f64) -> f64 {
    let w = u / epsilon;
    let d = w * w - 1.0;
    if d >= 0.0 {
        0.0
    } else {
        (1.0 / d).exp()
    }
}

pub fn eval_bump(params: &BumpParams, u: f64) -> f64 {
    params.k_epsilon * profile(params.epsilon, u)
}

/// `K_ε = (∫ exp(2/((u/ε)² − 1)) du)^{-1/2}` by adaptive Simpson.
pub fn normalize_bump(epsilon: f64) -> Result<BumpParams> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::Data(format!("bump width must be positive, got {epsilon}")));
    }
    let squared = |u: f64| profile(epsilon, u).powi(2);
    let half = adaptive_simpson(&squared, 0.0, epsilon, 1e-15 * epsilon, 40)?;
    Ok(BumpParams {
        epsilon,
        k_epsilon: 1.0 / (2.0 * half).sqrt(),
    })
}

/// Objective used to fit a bump to a target state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FitObjective {
    /// `‖target − φ_ε‖₂²` between normalised states.
    L2,
    /// `max_u |target − φ_ε|`.
    SupNorm,
    /// `min_A ‖target − A·profile_ε‖₂²`, free amplitude.
    UnnormalizedAmplitude,
    /// `φ_ε(0) = target(0)`.
    PeakMatch,
}

impl FitObjective {
    pub const ALL: [FitObjective; 4] = [
        FitObjective::L2,
        FitObjective::SupNorm,
        FitObjective::UnnormalizedAmplitude,
        FitObjective::PeakMatch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FitObjective::L2 => "l2",
            FitObjective::SupNorm => "sup_norm",
            FitObjective::UnnormalizedAmplitude => "unnormalized_amplitude",
            FitObjective::PeakMatch => "peak_match",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpFit {
    pub objective: FitObjective,
    pub params: BumpParams,
    /// Objective value at the optimum.
    pub residual: f64,
    pub evaluations: usize,
}

fn check_target(target: &WaveFunction) -> Result<()> {
    if target.representation() != Representation::Uv {
        return Err(Error::Structural("bump fits need a uv target".into()));
    }
    let s = target.samples();
    let n = s.len();
    let asym = (0..n / 2).map(|k| (s[k] - s[n - 1 - k]).norm()).fold(0.0, f64::max);
    if asym > 1e-8 * target.max_abs() {
        warn!("bump fit target is not even (asymmetry {asym:e})");
    }
    Ok(())
}

fn objective_value(target: &WaveFunction, objective: FitObjective, epsilon: f64) -> Result<f64> {
    let grid = target.grid();
    match objective {
        FitObjective::L2 | FitObjective::PeakMatch => {
            let bump = normalize_bump(epsilon)?.field(grid)?;
            let d = target.sub(&bump)?;
            Ok(inner_product(&d, &d)?.re)
        }
        FitObjective::SupNorm => {
            let bump = normalize_bump(epsilon)?.field(grid)?;
            Ok(target.sub(&bump)?.max_abs())
        }
        FitObjective::UnnormalizedAmplitude => {
            let shape = WaveFunction::from_real_fn(*grid, Representation::Uv, |u| profile(epsilon, u))?;
            let overlap = inner_product(&shape, target)?;
            let shape_sq = inner_product(&shape, &shape)?.re;
            let target_sq = inner_product(target, target)?.re;
            Ok((target_sq - overlap.norm_sqr() / shape_sq).max(0.0))
        }
    }
}

/// Least-squares bump fit: golden-section search for `ε` on `[lo, hi]`.
pub fn fit_epsilon(target: &WaveFunction, search: (f64, f64)) -> Result<BumpFit> {
    fit_epsilon_with(target, FitObjective::L2, search)
}

pub fn fit_epsilon_with(target: &WaveFunction, objective: FitObjective, search: (f64, f64)) -> Result<BumpFit> {
    check_target(target)?;
    let (lo, hi) = search;
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::Configuration(format!("invalid search interval [{lo}, {hi}]")));
    }
    if objective == FitObjective::PeakMatch {
        let grid = target.grid();
        let origin = grid
            .origin_index()
            .ok_or_else(|| Error::Structural("peak matching needs u = 0 on the grid".into()))?;
        let peak = target.samples()[origin].norm();
        if peak == 0.0 {
            return Err(Error::Data("target vanishes at u = 0".into()));
        }
        // φ_ε(0) = K_1 e^{-1} / √ε.
        let k1 = normalize_bump(1.0)?.k_epsilon();
        let epsilon = (k1 * (-1.0f64).exp() / peak).powi(2);
        if !(lo..=hi).contains(&epsilon) {
            return Err(Error::SearchInterval { optimum: epsilon, lo, hi });
        }
        return Ok(BumpFit {
            objective,
            params: normalize_bump(epsilon)?,
            residual: objective_value(target, objective, epsilon)?,
            evaluations: 1,
        });
    }
    let mut failure = None;
    let found = golden_section(
        |eps| match objective_value(target, objective, eps) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        FIT_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let found = found?;
    Ok(BumpFit {
        objective,
        params: normalize_bump(found.x)?,
        residual: found.value,
        evaluations: found.evaluations,
    })
}

/// Fits under every objective, for comparison when the least-squares
/// optimum is questioned.
pub fn alternative_fits(target: &WaveFunction, search: (f64, f64)) -> Vec<(FitObjective, Result<BumpFit>)> {
    FitObjective::ALL
        .iter()
        .map(|&o| (o, fit_epsilon_with(target, o, search)))
        .collect()
}

/// Convenience: a normalised bump of width `epsilon` sampled on `grid`.
pub fn bump_field(epsilon: f64, grid: &Grid) -> Result<WaveFunction> {
    normalize_bump(epsilon)?.field(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_vanishes_outside_support() {
        let p = normalize_bump(1.5).unwrap();
        assert_eq!(eval_bump(&p, 1.5), 0.0);
        assert_eq!(eval_bump(&p, -2.0), 0.0);
        assert_eq!(eval_bump(&p, 0.3), eval_bump(&p, -0.3));
        assert!((eval_bump(&p, 0.0) - p.k_epsilon() * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_width() {
        assert!(normalize_bump(0.0).is_err());
        assert!(normalize_bump(f64::NAN).is_err());
    }
}
