use proptest::prelude::*;
use schac_core::greens::green_eval;
use schac_core::noise::CutoffSpec;
use schac_core::spectral::{semigroup_apply, CosineTransform, OperatorSpec, SpectralField};

fn field(dim: usize, n: usize) -> impl Strategy<Value = SpectralField> {
    prop::collection::vec(-1.0f64..1.0, n.pow(dim as u32))
        .prop_map(move |c| SpectralField::from_coeffs(dim, n, c).unwrap())
}

fn operator() -> impl Strategy<Value = OperatorSpec> {
    (0.1f64..3.0, 0.0f64..3.0).prop_map(|(r, q)| OperatorSpec::new(r, q).unwrap())
}

proptest! {
    #[test]
    fn semigroup_property(u in field(2, 6), op in operator(), t in 0.0f64..0.2, s in 0.0f64..0.2) {
        let a = semigroup_apply(&semigroup_apply(&u, s, &op).unwrap(), t, &op).unwrap();
        let b = semigroup_apply(&u, t + s, &op).unwrap();
        prop_assert!(a.distance_l2(&b) <= 1e-13 * (1.0 + u.l2_norm()));
    }

    #[test]
    fn semigroup_is_contractive(u in field(1, 16), op in operator(), t in 0.0f64..1.0) {
        let v = semigroup_apply(&u, t, &op).unwrap();
        prop_assert!(v.l2_norm() <= u.l2_norm() * (1.0 + 1e-15));
    }

    #[test]
    fn kernel_is_symmetric(x in 0.0..std::f64::consts::PI, y in 0.0..std::f64::consts::PI, t in 0.01f64..1.0) {
        let op = OperatorSpec::default();
        let a = green_eval(&[x], &[y], t, 40, &op).unwrap();
        let b = green_eval(&[y], &[x], t, 40, &op).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn cutoff_is_monotone_and_bounded(level in 1.0f64..20.0, a in 0.0f64..30.0, b in 0.0f64..30.0) {
        let chi = CutoffSpec::new(level, 4.0).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(chi.eval(lo) >= chi.eval(hi));
        prop_assert!((0.0..=1.0).contains(&chi.eval(a)));
        prop_assert!(chi.derivative(a).abs() <= 1.5);
    }

    #[test]
    fn transform_round_trip(u in field(1, 32)) {
        let t = CosineTransform::new(1, 32, 32).unwrap();
        let back = t.to_spectral(&t.to_nodal(&u).unwrap()).unwrap();
        prop_assert!(back.distance_l2(&u) <= 1e-12 * (1.0 + u.l2_norm()));
    }
}
