use gamowlab_core::grid::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn packet(grid: Grid, center: f64, width: f64, k: f64) -> WaveFunction {
    WaveFunction::from_fn(grid, Representation::Uv, |u| {
        let d = (u - center) / width;
        Complex64::from_polar((-0.5 * d * d).exp(), k * u)
    })
    .unwrap()
}

#[test]
fn default_domain_is_the_standard_uv_grid() {
    let g = Grid::default_uv();
    assert_eq!(g.n_points(), 4001);
    assert_eq!((g.u_min(), g.u_max()), (-20.0, 20.0));
    assert!((g.spacing() - 0.01).abs() < 1e-15);
    assert_eq!(g.origin_index(), Some(2000));
}

proptest! {
    #[test]
    fn inner_product_is_hermitian_and_sesquilinear(
        c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, w1 in 0.3f64..2.0, w2 in 0.3f64..2.0,
        k1 in -4.0f64..4.0, k2 in -4.0f64..4.0, ar in -2.0f64..2.0, ai in -2.0f64..2.0,
    ) {
        let grid = Grid::default_uv();
        let a = packet(grid, c1, w1, k1);
        let b = packet(grid, c2, w2, k2);
        let ab = inner_product(&a, &b).unwrap();
        let ba = inner_product(&b, &a).unwrap();
        prop_assert!((ab - ba.conj()).norm() <= 1e-12);
        let alpha = Complex64::new(ar, ai);
        let lhs = inner_product(&a, &b.axpy(alpha, &a).unwrap()).unwrap();
        let rhs = ab + alpha * inner_product(&a, &a).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        let scaled = inner_product(&a.scale(alpha).unwrap(), &b).unwrap();
        prop_assert!((scaled - alpha.conj() * ab).norm() <= 1e-12 * (1.0 + ab.norm()));
        prop_assert!(ab.norm() <= norm(&a).unwrap() * norm(&b).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn resample_on_a_refined_grid_preserves_the_norm(c1 in -2.0f64..2.0, w in 0.5f64..2.0) {
        let coarse = Grid::default_uv();
        let fine = Grid::symmetric(20.0, 0.005).unwrap();
        let a = packet(coarse, c1, w, 0.0);
        let r = resample(&a, &fine).unwrap();
        prop_assert!((norm(&r).unwrap() - norm(&a).unwrap()).abs() <= 1e-6);
    }
}
