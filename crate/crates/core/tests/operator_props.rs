use dsm_core::{inner, matvec, norm, GridFunction, OperatorKind, OperatorModel, QuadratureGrid};
use proptest::prelude::*;

const N: usize = 40;

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, N)
}

fn kinds() -> impl Strategy<Value = OperatorKind> {
    prop_oneof![
        Just(OperatorKind::ArctanCubed),
        Just(OperatorKind::Cubic),
        Just(OperatorKind::Linear),
    ]
}

fn gf(v: Vec<f64>) -> GridFunction {
    GridFunction::new(QuadratureGrid::new(N).unwrap(), v).unwrap()
}

fn model(kind: OperatorKind) -> OperatorModel {
    OperatorModel::new(kind, &QuadratureGrid::new(N).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn monotone(kind in kinds(), u in values(), v in values()) {
        let m = model(kind);
        let (u, v) = (gf(u), gf(v));
        let gap = inner(&(&m.apply(&u).unwrap() - &m.apply(&v).unwrap()), &(&u - &v)).unwrap();
        prop_assert!(gap >= -1e-10, "gap {gap}");
    }

    #[test]
    fn jacobian_is_positive_semidefinite(kind in kinds(), u in values(), w in values()) {
        let m = model(kind);
        let (u, w) = (gf(u), gf(w));
        let jw = matvec(&m.jacobian(&u).unwrap(), &w).unwrap();
        prop_assert!(inner(&jw, &w).unwrap() >= -1e-10);
    }

    #[test]
    fn injective_on_separated_pairs(kind in kinds(), u in values(), v in values()) {
        let (u, v) = (gf(u), gf(v));
        prop_assume!(norm(&(&u - &v)) >= 0.1);
        let m = model(kind);
        prop_assert!(norm(&(&m.apply(&u).unwrap() - &m.apply(&v).unwrap())) > 0.0);
    }

    #[test]
    fn jacobian_matches_central_difference(kind in kinds(), u in prop::collection::vec(-2.0..2.0f64, N), w in values()) {
        let m = model(kind);
        let (u, w) = (gf(u), gf(w));
        prop_assume!(norm(&w) > 1e-3);
        let w = (1.0 / norm(&w)) * &w;
        let eps = 1e-5;
        let fd = (0.5 / eps) * &(&m.apply(&u.axpy(eps, &w)).unwrap() - &m.apply(&u.axpy(-eps, &w)).unwrap());
        let jw = matvec(&m.jacobian(&u).unwrap(), &w).unwrap();
        prop_assert!(norm(&(&jw - &fd)) <= 1e-6 * norm(&jw).max(1e-3));
    }
}

#[test]
fn kernel_entries_bounded_by_weights() {
    for n in [5, 50, 200] {
        let g = QuadratureGrid::new(n).unwrap();
        let m = OperatorModel::new(OperatorKind::Linear, &g);
        let k = m.kernel().unwrap();
        for i in 0..n {
            for (j, &w) in g.weights().iter().enumerate() {
                assert!(k[(i, j)] > 0.0 && k[(i, j)] <= w);
            }
        }
    }
}
