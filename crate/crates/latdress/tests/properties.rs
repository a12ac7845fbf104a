//! Property tests for the group numerics and lattice geometry.

use proptest::prelude::*;

use latdress::group::{exp_map, log_map, AlgebraElement, GroupElement, GroupKind};
use latdress::Lattice;

proptest! {
    #[test]
    fn exp_log_roundtrip_su2(
        a in -0.99f64..0.99,
        b in -0.99f64..0.99,
        c in -0.99f64..0.99,
        scale in 0.01f64..1.7,
    ) {
        // keep ||x|| strictly inside the principal ball
        let raw = [a, b, c];
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-6);
        let coeffs = raw.map(|x| x / norm * scale);
        let x = AlgebraElement::Su2 { coeffs };
        let back = log_map(&exp_map(&x)).unwrap();
        for (p, q) in x.coeffs().iter().zip(back.coeffs()) {
            prop_assert!((p - q).abs() <= 1e-10, "{p} vs {q}");
        }
    }

    #[test]
    fn exp_log_roundtrip_u1(theta in -3.1f64..3.1) {
        let x = AlgebraElement::U1 { coeff: theta };
        let back = log_map(&exp_map(&x)).unwrap();
        prop_assert!((back.coeffs()[0] - theta).abs() <= 1e-12);
    }

    #[test]
    fn group_closure_under_products(
        xs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 1..20),
    ) {
        let mut g = GroupElement::identity(GroupKind::Su2);
        for (a, b, c) in xs {
            let h = exp_map(&AlgebraElement::Su2 { coeffs: [a, b, c] });
            g = g.mul(&h).unwrap();
            prop_assert!(g.unitarity_defect() <= 1e-12);
        }
        let inv = g.inverse();
        prop_assert!(inv.unitarity_defect() <= 1e-12);
        let e = g.mul(&inv).unwrap();
        prop_assert!(e.distance(&GroupElement::identity(GroupKind::Su2)) <= 1e-12);
    }

    #[test]
    fn principal_angle_stays_principal(theta in -50.0f64..50.0) {
        let p = latdress::group::principal_angle(theta);
        prop_assert!(p > -std::f64::consts::PI && p <= std::f64::consts::PI);
        // same point on the circle
        let d = (theta - p).rem_euclid(2.0 * std::f64::consts::PI);
        prop_assert!(d.abs() < 1e-9 || (d - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn neighbor_is_a_bijection(
        dims in proptest::collection::vec(2usize..5, 1..4),
        dir_pick in 0usize..4,
        sign in prop_oneof![Just(1i32), Just(-1i32)],
    ) {
        let lat = Lattice::new(&dims).unwrap();
        let dir = dir_pick % dims.len();
        let mut seen = vec![false; lat.num_sites()];
        for s in 0..lat.num_sites() {
            let n = lat.neighbor(s, dir, sign).unwrap();
            prop_assert!(!seen[n]);
            seen[n] = true;
            prop_assert_eq!(lat.neighbor(n, dir, -sign).unwrap(), s);
        }
    }
}
