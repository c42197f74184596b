use dsm_core::hilbert::{inner, norm, GridFunction, QuadratureGrid};
use proptest::prelude::*;

fn grid_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}

proptest! {
    #[test]
    fn inner_is_symmetric_and_positive(u in grid_values(40), v in grid_values(40)) {
        let g = QuadratureGrid::new(40).unwrap();
        let u = GridFunction::new(g.clone(), u).unwrap();
        let v = GridFunction::new(g, v).unwrap();
        let uv = inner(&u, &v).unwrap();
        let vu = inner(&v, &u).unwrap();
        prop_assert!((uv - vu).abs() <= 1e-12 * (1.0 + uv.abs()));
        prop_assert!(inner(&u, &u).unwrap() >= 0.0);
        prop_assert!(uv.abs() <= norm(&u) * norm(&v) + 1e-12);
    }

    #[test]
    fn norm_is_homogeneous(u in grid_values(25), c in -100.0..100.0f64) {
        let g = QuadratureGrid::new(25).unwrap();
        let u = GridFunction::new(g, u).unwrap();
        let lhs = norm(&(c * &u));
        let rhs = c.abs() * norm(&u);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn inner_is_bilinear(u in grid_values(15), v in grid_values(15), w in grid_values(15), a in -5.0..5.0f64) {
        let g = QuadratureGrid::new(15).unwrap();
        let u = GridFunction::new(g.clone(), u).unwrap();
        let v = GridFunction::new(g.clone(), v).unwrap();
        let w = GridFunction::new(g, w).unwrap();
        let lhs = inner(&u.axpy(a, &v), &w).unwrap();
        let rhs = inner(&u, &w).unwrap() + a * inner(&v, &w).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }
}
