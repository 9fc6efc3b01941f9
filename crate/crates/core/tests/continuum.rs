use std::f64::consts::PI;

use gamowlab_core::continuum::*;
use gamowlab_core::grid::{Grid, Representation, WaveFunction};
use gamowlab_core::numerics::central_weights;
use gamowlab_core::resonances::{eval_f_pm_x, Sign};
use gamowlab_core::special::hermite;
use gamowlab_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn family(kind: FamilyKind, gamma: f64) -> ContinuumFamily {
    ContinuumFamily::new(kind, gamma).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn psi_families_are_one_sided_powers() {
    let plus = family(FamilyKind::PsiPlus, 1.5);
    let minus = family(FamilyKind::PsiMinus, 1.5);
    for e in [c(0.3, 0.0), c(-2.0, 0.4)] {
        assert_eq!(eval_psi(&plus, e, -1.0).unwrap(), c(0.0, 0.0));
        for u in [0.2, 1.0, 3.5] {
            assert_eq!(eval_psi(&minus, e, -u).unwrap(), eval_psi(&plus, e, u).unwrap());
        }
    }
    for u in [0.1, 1.0, 7.0] {
        let m = eval_psi(&plus, c(2.3, 0.0), u).unwrap().norm();
        assert!((m - (2.0 * PI * 1.5 * u).powf(-0.5)).abs() < 1e-14);
    }
    assert!(matches!(eval_psi(&plus, c(1.0, 0.0), 0.0), Err(Error::Domain(_))));
    assert!(matches!(eval_chi(&plus, c(1.0, 0.0), 1.0), Err(Error::Structural(_))));
}

#[test]
fn mirror_and_time_reversal_symmetries() {
    let gamma = 0.8;
    let grid = Grid::symmetric(12.0, 0.05).unwrap();
    for e in [-1.3, 0.0, 0.7, 2.5] {
        let energy = c(e, 0.0);
        for x in [-2.0, -0.4, 0.0, 1.1, 3.0] {
            let cp = eval_chi(&family(FamilyKind::ChiPlus, gamma), energy, x).unwrap();
            let cm = eval_chi(&family(FamilyKind::ChiMinus, gamma), energy, -x).unwrap();
            assert!((cp - cm).norm() <= 1e-14 * cp.norm());
            let ep = eval_eta(&family(FamilyKind::EtaPlus, gamma), energy, x).unwrap();
            let em = eval_eta(&family(FamilyKind::EtaMinus, gamma), energy, -x).unwrap();
            assert!((ep - em).norm() <= 1e-14 * ep.norm());
        }
        // T-symmetry on every grid point, including the continued tails.
        let chi = continuum_field(&family(FamilyKind::ChiPlus, gamma), energy, &grid).unwrap();
        let eta = continuum_field(&family(FamilyKind::EtaPlus, gamma), energy, &grid).unwrap();
        for (a, b) in chi.samples().iter().zip(eta.samples()) {
            assert!((a.conj() - b).norm() <= 1e-10 * a.norm().max(1e-3), "E={e}");
        }
    }
}

/// `(−½ d²/dx² − ½γ²x²) f` by an eighth-order stencil.
fn apply_h(f: &dyn Fn(f64) -> Complex64, x: f64, gamma: f64) -> Complex64 {
    let h = 0.02;
    let w = central_weights(2, 8);
    let r = (w.len() / 2) as i64;
    let second: Complex64 = (-r..=r).zip(&w).map(|(k, wk)| f(x + k as f64 * h) * *wk).sum::<Complex64>() / (h * h);
    -0.5 * second - 0.5 * gamma * gamma * x * x * f(x)
}

#[test]
fn fields_solve_the_eigenvalue_equation() {
    let gamma = 1.2;
    let points: Vec<f64> = (0..10).map(|k| -2.2 + 0.47 * k as f64).collect();
    for e in [c(0.6, 0.0), c(-1.1, 0.3)] {
        for kind in [FamilyKind::ChiPlus, FamilyKind::ChiMinus, FamilyKind::EtaPlus, FamilyKind::EtaMinus] {
            let fam = family(kind, gamma);
            let f = |x: f64| eval_family(&fam, e, x).unwrap();
            for &x in &points {
                let hf = apply_h(&f, x, gamma);
                let err = (hf - e * f(x)).norm() / (e * f(x)).norm();
                assert!(err <= 1e-5, "{kind:?} E={e} x={x}: {err:e}");
                if kind == FamilyKind::EtaPlus && e.im == 0.0 {
                    // The opposite eigenvalue is clearly violated.
                    assert!((hf + e * f(x)).norm() / (e * f(x)).norm() > 0.1);
                }
            }
        }
    }
}

#[test]
fn continuation_agrees_with_the_series() {
    let gamma = 1.0;
    let fam = family(FamilyKind::ChiPlus, gamma);
    let reach = series_reach(gamma);
    let grid = Grid::new(201, -0.999 * reach, 0.999 * reach).unwrap();
    let e = c(0.9, 0.0);
    let field = continuum_field(&fam, e, &grid).unwrap();
    // The outer 5% of this grid comes from the integrator.
    for k in [0usize, 2, 198, 200] {
        let x = grid.point(k);
        let direct = eval_chi(&fam, e, x).unwrap();
        assert!((field.samples()[k] - direct).norm() <= 1e-8 * direct.norm(), "x={x}");
    }
    assert!(matches!(eval_chi(&fam, e, 1.05 * reach), Err(Error::Capability(_))));
}

#[test]
fn chi_residues_are_closed_form_multiples_of_decaying_resonances() {
    let gamma = 1.0;
    let grid = Grid::symmetric(3.0, 0.05).unwrap();
    for kind in [FamilyKind::ChiPlus, FamilyKind::ChiMinus] {
        let fam = family(kind, gamma);
        for n in 0..=3 {
            let r = residue_at_pole(&fam, n, &grid, DEFAULT_DELTA * gamma).unwrap();
            assert_eq!(r.pole, c(0.0, -(n as f64 + 0.5)));
            assert!(r.max_rel_error <= 1e-4, "{kind:?} n={n}: {:e}", r.max_rel_error);
            let minus: Vec<Complex64> = grid.points().into_iter().map(|x| eval_f_pm_x(n, Sign::Minus, x, gamma).unwrap()).collect();
            let plus: Vec<Complex64> = grid.points().into_iter().map(|x| eval_f_pm_x(n, Sign::Plus, x, gamma).unwrap()).collect();
            let (scale, shape_err) = profile_error(r.estimate.samples(), &minus);
            assert!(shape_err <= 1e-4, "n={n}: {shape_err:e}");
            assert!((scale - residue_constant(&fam, n).unwrap()).norm() <= 1e-6 * scale.norm());
            let (_, wrong) = profile_error(r.estimate.samples(), &plus);
            assert!(wrong > 0.5, "n={n}: growing family fits to {wrong:e}");
        }
    }
}

#[test]
fn eta_residues_carry_growing_resonances() {
    let gamma = 1.0;
    let grid = Grid::symmetric(3.0, 0.05).unwrap();
    let fam = family(FamilyKind::EtaPlus, gamma);
    let r = residue_at_pole(&fam, 1, &grid, DEFAULT_DELTA).unwrap();
    assert_eq!(r.pole, c(0.0, 1.5));
    assert!(r.max_rel_error <= 1e-4);
    let plus: Vec<Complex64> = grid.points().into_iter().map(|x| eval_f_pm_x(1, Sign::Plus, x, gamma).unwrap()).collect();
    assert!(profile_error(r.estimate.samples(), &plus).1 <= 1e-4);
    let mirrored = residue_at_pole(&family(FamilyKind::EtaMinus, gamma), 1, &grid, DEFAULT_DELTA).unwrap();
    let scale = r.estimate.max_abs();
    for (a, b) in mirrored.estimate.samples().iter().zip(r.estimate.samples()) {
        assert!((a + b).norm() <= 1e-9 * scale, "{a} vs {b}");
    }
}

#[test]
fn circle_fluctuation_shrinks_with_the_radius() {
    let grid = Grid::symmetric(2.0, 0.1).unwrap();
    let fam = family(FamilyKind::ChiPlus, 1.0);
    let wide = residue_at_pole(&fam, 2, &grid, 2e-3).unwrap();
    let narrow = residue_at_pole(&fam, 2, &grid, 1e-3).unwrap();
    assert!(wide.fluctuation / narrow.fluctuation >= 1.9);
    assert!(matches!(residue_at_pole(&family(FamilyKind::PsiPlus, 1.0), 0, &grid, 1e-3), Err(Error::Capability(_))));
}

#[test]
fn pole_lattice_is_detected_exactly() {
    for (kind, sign) in [(FamilyKind::ChiPlus, -1.0), (FamilyKind::EtaPlus, 1.0)] {
        let gamma = 1.3;
        let poles = detect_poles(&family(kind, gamma), 10).unwrap();
        assert_eq!(poles.len(), 11, "{kind:?}: {poles:?}");
        let mut sorted: Vec<Complex64> = (0..=10).map(|n| c(0.0, sign * gamma * (n as f64 + 0.5))).collect();
        sorted.sort_by(|a, b| a.im.total_cmp(&b.im));
        for (p, q) in poles.iter().zip(&sorted) {
            assert!((p - q).norm() <= 1e-6 * gamma, "{p} vs {q}");
        }
    }
}

/// `d^n/du^n e^{−a(u−b)²}` at `u = 0`.
fn gaussian_derivative(n: usize, a: f64, b: f64) -> f64 {
    let s = a.sqrt();
    (-s).powi(n as i32) * hermite(n, c(-s * b, 0.0)).unwrap().re * (-a * b * b).exp()
}

#[test]
fn psi_residues_hold_weakly() {
    let grid = Grid::symmetric(12.0, 0.002).unwrap();
    let tests = [(1.0, 0.0), (0.5, 0.3), (2.0, -0.2), (0.8, 1.0), (1.5, 0.5)];
    let gamma = 1.4;
    for (a, b) in tests {
        let phi = WaveFunction::from_real_fn(grid, Representation::Uv, |u| (-a * (u - b) * (u - b)).exp()).unwrap();
        for n in 0..=3usize {
            let fact = (1..=n).product::<usize>() as f64;
            // ∫ f_n^− φ = φ^{(n)}(0)/√n!.
            let pairing = gaussian_derivative(n, a, b) / fact.sqrt();
            for (kind, parity) in [(FamilyKind::PsiPlus, 1.0), (FamilyKind::PsiMinus, (-1f64).powi(n as i32))] {
                let w = psi_weak_residue(&family(kind, gamma), n, &phi, 1e-3 * gamma).unwrap();
                let expected = c(0.0, parity * gamma.sqrt() / (2.0 * PI * fact).sqrt() * pairing);
                let tol = 1e-5 * expected.norm().max(1e-3);
                assert!((w.estimate - expected).norm() <= tol, "{kind:?} a={a} b={b} n={n}: {} vs {expected}", w.estimate);
                assert!((w.reference - expected).norm() <= tol);
            }
        }
    }
}

#[test]
fn windowed_products_show_delta_normalisation() {
    // |χ|² falls like 1/|x| with phase (E/γ) ln|x|, so the diagonal grows by
    // (2/πγ)·ln 2 per doubling of the window (each family is δ-normalised and
    // the sum over both carries 2δ), while off-diagonal products stay bounded
    // by the boundary terms 2/(π|E1−E2|).
    let gamma = 1.0;
    let (e1, e2) = (0.5, 1.5);
    let mut diag = Vec::new();
    let mut wave_ratio = Vec::new();
    for half in [10.0, 20.0, 40.0, 80.0] {
        let window = Grid::symmetric(half, 0.01).unwrap();
        let taper = 0.25 * half;
        let off = orthonormality_check_chi(gamma, e1, e2, &window, taper).unwrap().norm();
        assert!(off <= 2.0 / (PI * (e2 - e1)), "L={half}: {off}");
        diag.push(orthonormality_check_chi(gamma, e1, e1, &window, taper).unwrap().re);
        let w_off = orthonormality_check_plane_waves(e1, e2, &window, taper).unwrap().norm();
        let w_on = orthonormality_check_plane_waves(e1, e1, &window, taper).unwrap().re;
        wave_ratio.push(w_off / w_on);
    }
    let step = 2.0 * 2f64.ln() / (PI * gamma);
    for w in diag.windows(2) {
        assert!(((w[1] - w[0]) / step - 1.0).abs() < 0.01, "{diag:?}");
    }
    // Plane waves: the diagonal grows linearly and the ratio falls steadily.
    for w in wave_ratio.windows(2) {
        assert!(w[1] < w[0], "{wave_ratio:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn evaluation_near_any_pole_is_refused(n in 0usize..10, angle in 0.0f64..6.28, r in 0.0f64..0.9, eta in any::<bool>()) {
        let kind = if eta { FamilyKind::EtaPlus } else { FamilyKind::ChiPlus };
        let fam = family(kind, 1.7);
        let e = fam.pole(n) + Complex64::from_polar(r * POLE_GUARD * 1.7, angle);
        let refused = matches!(eval_family(&fam, e, 0.4), Err(Error::PoleProximity { .. }));
        prop_assert!(refused);
    }
}
