use std::f64::consts::PI;

use gamowlab_core::bump::bump_field;
use gamowlab_core::grid::{inner_product, norm, relative_l2, Grid, Representation, WaveFunction};
use gamowlab_core::resonances::{eval_f_pm_x, Sign};
use gamowlab_core::special::hermite_normalized;
use gamowlab_core::transform::*;
use gamowlab_core::Error;
use num_complex::Complex64;

fn gaussian_u(grid: Grid) -> WaveFunction {
    WaveFunction::from_real_fn(grid, Representation::Uv, |u| PI.powf(-0.25) * (-0.5 * u * u).exp()).unwrap()
}

fn wide_x() -> Grid {
    Grid::symmetric(60.0, 0.01).unwrap()
}

/// Ten normalised uv states: Gaussians, bumps and Hermite modes.
fn battery(grid: Grid) -> Vec<WaveFunction> {
    let mut states = Vec::new();
    let normalise = |w: WaveFunction| {
        let n = norm(&w).unwrap();
        w.scale(Complex64::new(1.0 / n, 0.0)).unwrap()
    };
    for (width, centre) in [(1.0, 0.0), (0.6, 0.5), (1.7, -1.0)] {
        states.push(normalise(
            WaveFunction::from_real_fn(grid, Representation::Uv, |u| (-(u - centre).powi(2) / (2.0 * width * width)).exp()).unwrap(),
        ));
    }
    states.push(normalise(
        WaveFunction::from_fn(grid, Representation::Uv, |u| Complex64::from_polar((-u * u / 2.0).exp(), 0.7 * u)).unwrap(),
    ));
    for eps in [0.5, 1.0, 2.0] {
        states.push(bump_field(eps, &grid).unwrap());
    }
    for n in 1..=3 {
        states.push(normalise(
            WaveFunction::from_real_fn(grid, Representation::Uv, |u| {
                hermite_normalized(n, Complex64::new(u, 0.0)).unwrap().re * (-u * u / 2.0).exp()
            })
            .unwrap(),
        ));
    }
    states
}

#[test]
fn gaussian_maps_to_gaussian() {
    for gamma in [1.0, 2.5] {
        let params = TransformParams::new(gamma).unwrap();
        let source = Grid::default_uv();
        let target = params.default_target(&source).unwrap();
        let out = forward_transform(&gaussian_u(source), &params, &target).unwrap();
        assert_eq!(out.representation(), Representation::Xp);
        for (x, v) in target.points().into_iter().zip(out.samples()) {
            let expected = (gamma / PI).powf(0.25) * (-0.5 * gamma * x * x).exp();
            assert!((v - expected).norm() < 1e-6, "γ={gamma} x={x}: {v}");
        }
    }
}

#[test]
fn transform_is_unitary_on_the_battery() {
    let params = TransformParams::new(1.0).unwrap();
    for (k, phi) in battery(Grid::default_uv()).iter().enumerate() {
        let out = forward_transform(phi, &params, &wide_x()).unwrap();
        let ratio = norm(&out).unwrap() / norm(phi).unwrap();
        assert!((ratio - 1.0).abs() < 1e-6, "state {k}: {ratio}");
    }
}

#[test]
fn round_trips_recover_the_source() {
    let params = TransformParams::new(1.0).unwrap();
    let source = Grid::default_uv();
    let g = gaussian_u(source);
    let back = inverse_transform(&forward_transform(&g, &params, &wide_x()).unwrap(), &params, &source).unwrap();
    let err = relative_l2(&back, &g).unwrap();
    assert!(err < 1e-6, "gaussian round trip {err:e}");
    // Bump transforms decay like exp(-√|x|), so the x window is doubled.
    let b = bump_field(1.0, &source).unwrap();
    let x = Grid::symmetric(120.0, 0.01).unwrap();
    let back = inverse_transform(&forward_transform(&b, &params, &x).unwrap(), &params, &source).unwrap();
    let err = relative_l2(&back, &b).unwrap();
    assert!(err < 1e-5, "bump round trip {err:e}");
}

#[test]
fn inverse_maps_gaussian_back() {
    let params = TransformParams::new(1.0).unwrap();
    let x = Grid::default_uv();
    let gx = WaveFunction::from_real_fn(x, Representation::Xp, |x| PI.powf(-0.25) * (-0.5 * x * x).exp()).unwrap();
    let back = inverse_transform(&gx, &params, &x).unwrap();
    for (u, v) in x.points().into_iter().zip(back.samples()) {
        assert!((v - PI.powf(-0.25) * (-0.5 * u * u).exp()).norm() < 1e-6);
    }
}

#[test]
fn zero_maps_to_zero() {
    let params = TransformParams::new(1.0).unwrap();
    let g = Grid::default_uv();
    let out = forward_transform(&WaveFunction::zeros(g, Representation::Uv), &params, &g).unwrap();
    assert_eq!(out.max_abs(), 0.0);
    assert!(matches!(
        forward_transform(&WaveFunction::zeros(g, Representation::Xp), &params, &g),
        Err(Error::Structural(_))
    ));
}

#[test]
fn quadrature_paths_agree() {
    let source = Grid::symmetric(12.0, 0.02).unwrap();
    let target = Grid::symmetric(30.0, 0.02).unwrap();
    let direct = TransformParams::new(1.0).unwrap().with_quadrature(Quadrature::Direct);
    let fast = TransformParams::new(1.0).unwrap().with_self_check(true);
    for phi in battery(source) {
        let a = forward_transform(&phi, &direct, &target).unwrap();
        let b = forward_transform(&phi, &fast, &target).unwrap();
        assert!(relative_l2(&b, &a).unwrap() < 1e-10);
    }
}

#[test]
fn adjoint_kernel_acts_as_identity_on_test_functions() {
    // ⟨ψ, 𝒰^{-1}𝒰φ⟩ = ⟨ψ, φ⟩ weakly, for three test functions ψ.
    let params = TransformParams::new(1.0).unwrap();
    let source = Grid::default_uv();
    let phi = bump_field(1.5, &source).unwrap();
    let round = inverse_transform(&forward_transform(&phi, &params, &wide_x()).unwrap(), &params, &source).unwrap();
    for shift in [-0.5, 0.0, 0.7] {
        let psi = WaveFunction::from_real_fn(source, Representation::Uv, |u| (-(u - shift).powi(2)).exp()).unwrap();
        let lhs = inner_product(&psi, &round).unwrap();
        let rhs = inner_product(&psi, &phi).unwrap();
        assert!((lhs - rhs).norm() < 1e-6);
    }
}

#[test]
fn resonance_transform_factors() {
    let params = TransformParams::new(1.0).unwrap();
    for n in 0..=6 {
        for sign in [Sign::Plus, Sign::Minus] {
            let ratio = transform_resonance_check(n, sign, &params).unwrap();
            let expected = resonance_transform_factor(n, sign);
            // The minus family goes through a finite-difference stencil.
            let tol = if sign == Sign::Plus { 1e-6 } else { 2e-5 };
            assert!((ratio - expected).norm() < tol * expected.norm(), "n={n} {sign:?}: {ratio} vs {expected}");
        }
    }
    let plus0 = transform_resonance_check(0, Sign::Plus, &params).unwrap();
    assert!((plus0.re - (2.0 * PI).powf(-0.25)).abs() < 1e-6);
    let plus4 = transform_resonance_check(4, Sign::Plus, &params).unwrap();
    assert!((plus4.re + (2.0 * PI).powf(-0.25)).abs() < 1e-6);
    assert!((plus0.norm() - plus4.norm()).abs() < 1e-6);
}

#[test]
fn resonance_transform_factor_at_other_rates() {
    let params = TransformParams::new(2.0).unwrap();
    for n in [1usize, 3] {
        let ratio = transform_resonance_check(n, Sign::Plus, &params).unwrap();
        assert!((ratio - resonance_transform_factor(n, Sign::Plus)).norm() < 1e-6);
    }
}

#[test]
fn scaling_operators() {
    let grid = Grid::default_uv();
    let phi = gaussian_u(grid);
    assert_eq!(v_lambda(&phi, Complex64::new(0.0, 0.0)).unwrap(), phi);
    // Imaginary λ dilates along the real axis and preserves products.
    let psi = WaveFunction::from_real_fn(grid, Representation::Uv, |u| u * (-(u - 0.3).powi(2)).exp()).unwrap();
    let lambda = Complex64::new(0.0, 0.4);
    let a = inner_product(&v_lambda(&phi, lambda).unwrap(), &v_lambda(&psi, lambda).unwrap()).unwrap();
    let b = inner_product(&phi, &psi).unwrap();
    assert!((a - b).norm() < 1e-8);
    // V_{-π/4} of the oscillator ground state is f_0^+.
    let gamma = 1.3;
    let ground = move |z: Complex64| (gamma / PI).powf(0.25) * (-0.5 * gamma * z * z).exp();
    let rotated = v_lambda_analytic(ground, Complex64::new(-PI / 4.0, 0.0));
    for x in [-2.0, -0.3, 0.0, 1.1, 4.0] {
        assert!((rotated(x) - eval_f_pm_x(0, Sign::Plus, x, gamma).unwrap()).norm() < 1e-10);
    }
}

#[test]
fn real_rotations_do_not_act_as_a_phase() {
    // ⟨V_ω g|V_ω g⟩ = 1/√cos 2ω for the unit Gaussian, not e^{iω}.
    let omega: f64 = 0.3;
    let ground = |z: Complex64| PI.powf(-0.25) * (-0.5 * z * z).exp();
    let rotated = v_lambda_analytic(ground, Complex64::new(omega, 0.0));
    let grid = Grid::symmetric(20.0, 0.01).unwrap();
    let field = WaveFunction::from_fn(grid, Representation::Xp, rotated).unwrap();
    let product = inner_product(&field, &field).unwrap();
    assert!((product.re - 1.0 / (2.0 * omega).cos().sqrt()).abs() < 1e-8);
    assert!((product - Complex64::from_polar(1.0, omega)).norm() > 0.1);
}
