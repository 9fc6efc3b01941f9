use std::f64::consts::PI;

use gamowlab_core::bump::{bump_field, eval_bump, normalize_bump};
use gamowlab_core::grid::{inner_product, norm, relative_l2, Grid, Representation, WaveFunction};
use gamowlab_core::propagators::*;
use gamowlab_core::resonances::{eval_f_pm_x, project_f_plus_u, Sign};
use gamowlab_core::transform::{forward_transform, TransformParams};
use gamowlab_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn gaussian_u(grid: Grid) -> WaveFunction {
    WaveFunction::from_real_fn(grid, Representation::Uv, |u| PI.powf(-0.25) * (-0.5 * u * u).exp()).unwrap()
}

/// Grid on which the default time step satisfies the Courant limit.
fn bump_grid() -> Grid {
    Grid::new(1001, -1.25, 1.25).unwrap()
}

fn max_diff(a: &WaveFunction, b: &WaveFunction) -> f64 {
    a.sub(b).unwrap().max_abs()
}

#[test]
fn exact_evolution_of_the_gaussian() {
    let grid = Grid::default_uv();
    let g = gaussian_u(grid);
    assert_eq!(evolve_damped_exact(&g, 0.0, 1.0).unwrap(), g);
    for t in [-0.5, 0.5, 1.0, 2.0] {
        let psi = evolve_damped_exact(&g, t, 1.0).unwrap();
        for (u, v) in grid.points().into_iter().zip(psi.samples()) {
            let expected = (0.5 * t).exp() * PI.powf(-0.25) * (-(2.0 * t).exp() * u * u / 2.0).exp();
            assert!((v - expected).norm() < 1e-8, "t={t} u={u}");
        }
        if t >= 0.0 {
            assert!((norm(&psi).unwrap() - norm(&g).unwrap()).abs() < 1e-6);
        }
    }
}

#[test]
fn contracted_evolution_matches_resampled_evolution() {
    let g = gaussian_u(Grid::default_uv());
    let t = 0.7;
    let contracted = evolve_damped_exact_contracted(&g, t, 1.0).unwrap();
    assert!((contracted.grid().u_max() - 20.0 * (-t as f64).exp()).abs() < 1e-12);
    for n in [0usize, 2, 4] {
        let a = project_f_plus_u(&contracted, n).unwrap();
        let b = project_f_plus_u(&evolve_damped_exact(&g, t, 1.0).unwrap(), n).unwrap();
        assert!((a - b).norm() < 1e-8);
    }
}

#[test]
fn pde_matches_exact_scaling_on_the_bump() {
    let bump = bump_field(1.0, &bump_grid()).unwrap();
    let spec = PropagatorSpec::pde(1.0, DEFAULT_DT).unwrap();
    let pde = evolve_pde_uv(&bump, 1.0, &spec).unwrap();
    let exact = evolve_damped_exact(&bump, 1.0, 1.0).unwrap();
    assert!(relative_l2(&pde, &exact).unwrap() <= 1e-4);
    let n0 = norm(&bump).unwrap();
    for t in [0.25, 0.5, 1.0] {
        let drift = (norm(&evolve_pde_uv(&bump, t, &spec).unwrap()).unwrap() - n0).abs();
        assert!(drift <= 1e-5, "t={t}: {drift:e}");
    }
    let zero = WaveFunction::zeros(bump_grid(), Representation::Uv);
    assert_eq!(evolve_pde_uv(&zero, 0.5, &spec).unwrap().max_abs(), 0.0);
}

#[test]
fn pde_rejects_courant_violations() {
    let g = gaussian_u(Grid::default_uv());
    let spec = PropagatorSpec::pde(1.0, DEFAULT_DT).unwrap();
    assert!(matches!(evolve_pde_uv(&g, 0.1, &spec), Err(Error::Configuration(_))));
    let exact = PropagatorSpec::exact(1.0).unwrap();
    assert!(matches!(evolve_pde_uv(&g, 0.1, &exact), Err(Error::Configuration(_))));
}

#[test]
fn pde_time_stepping_is_fourth_order() {
    let bump = bump_field(1.0, &bump_grid()).unwrap();
    let run = |dt: f64| evolve_pde_uv(&bump, 0.5, &PropagatorSpec::pde(1.0, dt).unwrap()).unwrap();
    let reference = run(DEFAULT_DT / 16.0);
    let coarse = max_diff(&run(DEFAULT_DT), &reference);
    let fine = max_diff(&run(DEFAULT_DT / 2.0), &reference);
    let ratio = coarse / fine;
    assert!((13.0..20.0).contains(&ratio), "time ratio {ratio} ({coarse:e} / {fine:e})");
}

#[test]
fn pde_spatial_stencil_is_fourth_order() {
    let params = normalize_bump(1.0).unwrap();
    let t: f64 = 0.5;
    let error = |points: usize| {
        let grid = Grid::new(points, -1.25, 1.25).unwrap();
        let bump = params.field(&grid).unwrap();
        let psi = evolve_pde_uv(&bump, t, &PropagatorSpec::pde(1.0, 1e-4).unwrap()).unwrap();
        let exact = WaveFunction::from_real_fn(grid, Representation::Uv, |u| {
            (0.5 * t).exp() * eval_bump(&params, t.exp() * u)
        })
        .unwrap();
        max_diff(&psi, &exact)
    };
    let coarse = error(501);
    let fine = error(1001);
    let ratio = coarse / fine;
    assert!((13.0..20.0).contains(&ratio), "space ratio {ratio} ({coarse:e} / {fine:e})");
}

#[test]
fn free_gaussian_spreads_by_the_closed_form() {
    let grid = Grid::symmetric(40.0, 0.02).unwrap();
    let sigma0: f64 = 0.8;
    let phi = WaveFunction::from_real_fn(grid, Representation::Xp, |x| {
        (2.0 * PI * sigma0 * sigma0).powf(-0.25) * (-x * x / (4.0 * sigma0 * sigma0)).exp()
    })
    .unwrap();
    let spec = PropagatorSpec::split_step(0.0, DEFAULT_DT, Boundary::ZeroFill).unwrap();
    assert_eq!(evolve_rho_xp(&phi, 0.0, &spec).unwrap(), phi);
    for t in [0.5, 1.0, 2.0] {
        let psi = evolve_rho_xp(&phi, t, &spec).unwrap();
        let density = psi.map(|_, z| Complex64::new(z.norm_sqr(), 0.0)).unwrap();
        let second = WaveFunction::from_real_fn(grid, Representation::Xp, |x| x * x).unwrap();
        let variance = inner_product(&second, &density).unwrap().re;
        let expected = sigma0 * sigma0 + t * t / (4.0 * sigma0 * sigma0);
        assert!((variance - expected).abs() < 1e-6, "t={t}: {variance} vs {expected}");
    }
}

#[test]
fn transform_intertwines_the_two_dynamics() {
    let ugrid = Grid::default_uv();
    let params = TransformParams::new(1.0).unwrap();
    let xgrid = params.default_target(&ugrid).unwrap();
    let g = gaussian_u(ugrid);
    let start = forward_transform(&g, &params, &xgrid).unwrap();
    let spec = PropagatorSpec::split_step(1.0, DEFAULT_DT, Boundary::ZeroFill).unwrap();
    for t in [0.25, 0.5, 1.0] {
        let via_x = evolve_rho_xp(&start, t, &spec).unwrap();
        let via_u = forward_transform(&evolve_damped_exact(&g, t, 1.0).unwrap(), &params, &xgrid).unwrap();
        let gap = relative_l2(&via_x, &via_u).unwrap();
        assert!(gap <= 1e-4, "t={t}: {gap:e}");
    }
}

#[test]
fn outgoing_resonances_decay_at_quantised_rates() {
    let gamma = 1.0;
    let half = 30.0;
    let grid = Grid::symmetric(half, 0.02).unwrap();
    // Smooth cut-off well outside the observation window; the flow is outward.
    let window = |x: f64| {
        let r = x.abs() / half;
        if r < 0.5 {
            1.0
        } else if r > 0.8 {
            0.0
        } else {
            (0.5 * PI * (r - 0.5) / 0.3).cos().powi(2)
        }
    };
    let observed = Grid::symmetric(5.0, 0.02).unwrap();
    let spec = PropagatorSpec::split_step(gamma, DEFAULT_DT, Boundary::AbsorbingTaper).unwrap();
    for n in 0..=3usize {
        let phi = WaveFunction::from_fn(grid, Representation::Xp, |x| {
            eval_f_pm_x(n, Sign::Minus, x, gamma).unwrap() * window(x)
        })
        .unwrap();
        let inner = |w: &WaveFunction| {
            let samples = observed.points().into_iter().map(|x| w.samples()[grid.nearest_index(x).unwrap()]).collect();
            norm(&WaveFunction::new(observed, samples, Representation::Xp).unwrap()).unwrap()
        };
        let n0 = inner(&phi);
        for t in [0.5, 1.0] {
            let ratio = inner(&evolve_rho_xp(&phi, t, &spec).unwrap()) / n0;
            let expected = (-gamma * (n as f64 + 0.5) * t).exp();
            assert!((ratio / expected - 1.0).abs() < 0.02, "n={n} t={t}: {ratio} vs {expected}");
        }
    }
}

#[test]
fn time_reversal() {
    let xgrid = Grid::symmetric(5.0, 0.1).unwrap();
    let phi = WaveFunction::from_fn(xgrid, Representation::Xp, |x| Complex64::new(x.sin(), x * x)).unwrap();
    assert_eq!(time_reverse(&time_reverse(&phi).unwrap()).unwrap(), phi);
    let grid = Grid::default_uv();
    let g = gaussian_u(grid);
    assert!(max_diff(&time_reverse(&g).unwrap(), &g) < 1e-8);
    // T U(t) φ = U(-t) T φ.
    let phi = bump_field(1.5, &grid).unwrap();
    for t in [0.3, 0.8] {
        let lhs = time_reverse(&evolve_damped_exact(&phi, t, 1.0).unwrap()).unwrap();
        let rhs = evolve_damped_exact(&time_reverse(&phi).unwrap(), -t, 1.0).unwrap();
        let gap = max_diff(&lhs, &rhs);
        assert!(gap < 1e-6, "t={t}: {gap:e}");
    }
}

#[test]
fn exact_traces_have_exact_rates() {
    let bump = bump_field(1.0, &Grid::default_uv()).unwrap();
    let spec = PropagatorSpec::exact(1.0).unwrap();
    let times: Vec<f64> = (0..=20).map(|k| 0.1 * k as f64).collect();
    // The even bump has no odd components; a shifted copy supplies them.
    let params = normalize_bump(1.0).unwrap();
    let shifted = WaveFunction::from_real_fn(*bump.grid(), Representation::Uv, |u| eval_bump(&params, u - 0.3)).unwrap();
    for n in 0..=4 {
        if n % 2 == 0 {
            let trace = coefficient_trace(&bump, &spec, n, &times).unwrap();
            assert!((trace.fitted_rate + (n as f64 + 0.5)).abs() < 1e-10, "n={n}: {}", trace.fitted_rate);
        } else {
            assert!(matches!(coefficient_trace(&bump, &spec, n, &times), Err(Error::UndefinedRate(_))));
        }
        let trace = coefficient_trace(&shifted, &spec, n, &times).unwrap();
        assert!((trace.fitted_rate + (n as f64 + 0.5)).abs() < 1e-10, "shifted n={n}: {}", trace.fitted_rate);
    }
}

#[test]
fn pde_traces_follow_the_quantised_rates() {
    let bump = bump_field(1.0, &bump_grid()).unwrap();
    let spec = PropagatorSpec::pde(1.0, DEFAULT_DT).unwrap();
    let times: Vec<f64> = (0..=10).map(|k| 0.2 * k as f64).collect();
    for n in [0usize, 2, 4] {
        let trace = coefficient_trace(&bump, &spec, n, &times).unwrap();
        let expected = -(n as f64 + 0.5);
        assert!(((trace.fitted_rate - expected) / expected).abs() < 0.01, "n={n}: {}", trace.fitted_rate);
    }
}

#[test]
fn parity_kills_mismatched_traces() {
    let grid = Grid::default_uv();
    let odd = WaveFunction::from_real_fn(grid, Representation::Uv, |u| u * (-u * u).exp()).unwrap();
    let spec = PropagatorSpec::exact(1.0).unwrap();
    assert!(matches!(coefficient_trace(&odd, &spec, 2, &[0.0, 0.5, 1.0]), Err(Error::UndefinedRate(_))));
    assert!(coefficient_trace(&odd, &spec, 1, &[0.0, 0.5]).is_ok());
    assert!(matches!(coefficient_trace(&odd, &spec, 1, &[0.5, 0.5]), Err(Error::Data(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exact_evolution_is_a_group(t in -1.0f64..1.0, s in -1.0f64..1.0) {
        let g = gaussian_u(Grid::symmetric(20.0, 0.005).unwrap());
        let twice = evolve_damped_exact(&evolve_damped_exact(&g, t, 1.0).unwrap(), s, 1.0).unwrap();
        let once = evolve_damped_exact(&g, t + s, 1.0).unwrap();
        prop_assert!(max_diff(&twice, &once) < 1e-8);
    }

    #[test]
    fn exact_coefficients_obey_the_semigroup(t in 0.0f64..2.0, n in 0usize..6) {
        // C_n(t) = e^{-γ(n+½)t} C_n(0) on the actually evolved state.
        let g = gaussian_u(Grid::default_uv());
        let c0 = project_f_plus_u(&g, 2 * n).unwrap();
        let ct = project_f_plus_u(&evolve_damped_exact_contracted(&g, t, 1.0).unwrap(), 2 * n).unwrap();
        let expected = c0 * (-(2.0 * n as f64 + 0.5) * t).exp();
        prop_assert!((ct - expected).norm() <= 1e-12 * expected.norm());
    }
}
