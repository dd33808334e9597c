use proptest::prelude::*;

use riotwave::equilibria::{excited_state, solve_ubar, ubar_residual, DEFAULT_ROOT_TOL};
use riotwave::kpp::{f_kpp, p_threshold};
use riotwave::reduced::rotation_angle;
use riotwave::spectra::{
    eigen_b, jacobian_reduced, omega_thresholds, partials_at_b, partials_at_b_simplified,
    Classification,
};
use riotwave::ModelParams;

fn params() -> impl Strategy<Value = ModelParams> {
    (2.05f64..30.0, 0.2f64..20.0, 0.1f64..4.0).prop_map(|(g, b, p)| ModelParams::new(g, b, p))
}

fn close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
    (a - b).abs() <= abs + rel * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn switch_is_increasing_and_bounded(b in 0.1f64..40.0, v1 in -3.0f64..3.0, dv in 1e-3f64..1.0) {
        let p = ModelParams::new(4.0, b, 2.0);
        let (s1, s2) = (p.switch(v1), p.switch(v1 + dv));
        prop_assert!((0.0..=1.0).contains(&s1));
        prop_assert!(s2 >= s1);
        prop_assert!(p.switch_prime(v1) >= 0.0);
    }

    #[test]
    fn reduced_rhs_is_scaled_components(p in params(), w in 0.01f64..50.0, c in 0.1f64..10.0,
                                        u in 0.0f64..1.0, v in 0.0f64..3.0) {
        let p = p.with_omega(w).with_speed(c);
        let [f1, f2] = p.wave_components(u, v).unwrap();
        let r = p.reduced_rhs(u, v).unwrap();
        prop_assert!(close(r[0], w * f1 / c, 1e-14, 1e-300));
        prop_assert!(close(r[1], f2 / c, 1e-14, 1e-300));
    }

    #[test]
    fn kinetics_vanish_on_u_zero(p in params(), w in 0.01f64..50.0, v in 0.0f64..3.0) {
        let p = p.with_omega(w);
        prop_assert_eq!(p.kinetics(0.0, v).unwrap().fu, 0.0);
        prop_assert_eq!(p.reduced_rhs(0.0, v).unwrap()[0], 0.0);
    }

    #[test]
    fn jacobian_matches_central_differences(p in params(), w in 0.05f64..20.0, c in 0.2f64..5.0,
                                            u in 0.01f64..0.9, v in 0.1f64..2.0) {
        let p = p.with_omega(w).with_speed(c);
        let j = jacobian_reduced(u, v, &p).unwrap();
        let h = 1e-6;
        let du = |k: usize| (p.reduced_rhs(u + h, v).unwrap()[k] - p.reduced_rhs(u - h, v).unwrap()[k]) / (2.0 * h);
        let dv = |k: usize| (p.reduced_rhs(u, v + h).unwrap()[k] - p.reduced_rhs(u, v - h).unwrap()[k]) / (2.0 * h);
        let scale = j.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
        for (k, row) in j.iter().enumerate() {
            prop_assert!((row[0] - du(k)).abs() <= 1e-6 * scale, "row {} du", k);
            prop_assert!((row[1] - dv(k)).abs() <= 1e-6 * scale, "row {} dv", k);
        }
    }

    #[test]
    fn ubar_is_a_bracketed_root(p in params()) {
        let u = solve_ubar(&p, DEFAULT_ROOT_TOL).unwrap();
        prop_assert!(u > 0.0 && u < (p.gamma - 1.0) / p.gamma);
        prop_assert!(ubar_residual(u, &p).abs() < 1e-10);
    }

    #[test]
    fn partial_forms_agree(p in params()) {
        let eq = excited_state(&p, DEFAULT_ROOT_TOL).unwrap();
        let a = partials_at_b(&p, &eq).unwrap();
        let b = partials_at_b_simplified(&p, eq.u_star).unwrap();
        for (x, y) in [(a.f1u, b.f1u), (a.f1v, b.f1v), (a.f2u, b.f2u), (a.f2v, b.f2v)] {
            prop_assert!(close(x, y, 1e-8, 1e-12), "{} vs {}", x, y);
        }
    }

    #[test]
    fn eigenvalues_at_b_scale_as_inverse_speed(p in params(), w in 0.05f64..50.0, c in 0.1f64..10.0) {
        let one = eigen_b(&p.with_omega(w).with_speed(1.0)).unwrap();
        let s = eigen_b(&p.with_omega(w).with_speed(c)).unwrap();
        prop_assert!((s.lambda1 * c - one.lambda1).norm() <= 1e-10 * one.lambda1.norm().max(1.0));
        prop_assert!((s.lambda2 * c - one.lambda2).norm() <= 1e-10 * one.lambda2.norm().max(1.0));
        prop_assert_eq!(s.classification, one.classification);
    }

    #[test]
    fn spiral_exactly_inside_window(p in params(), t in 0.0f64..1.0) {
        let th = omega_thresholds(&p).unwrap();
        prop_assume!(!th.degenerate);
        // omega drawn log-uniformly over two decades either side of the window
        let (lo, hi) = ((th.omega1 / 100.0).ln(), (th.omega2 * 100.0).ln());
        let w = (lo + t * (hi - lo)).exp();
        prop_assume!((w / th.omega1 - 1.0).abs() > 1e-6 && (w / th.omega2 - 1.0).abs() > 1e-6);
        let s = eigen_b(&p.with_omega(w)).unwrap();
        let inside = w > th.omega1 && w < th.omega2;
        prop_assert_eq!(s.classification == Classification::UnstableSpiral, inside);
    }

    #[test]
    fn decay_is_decreasing_and_convex(p in 0.1f64..5.0, u in 0.0f64..2.0, du in 1e-3f64..0.5) {
        let m = ModelParams::new(4.0, 1.0, p);
        let (a, b, c) = (m.decay_h(u).unwrap(), m.decay_h(u + du).unwrap(), m.decay_h(u + 2.0 * du).unwrap());
        prop_assert!(b < a);
        prop_assert!(a - 2.0 * b + c > -1e-15);
    }

    #[test]
    fn scalar_source_is_kinetics_on_slow_manifold(p in params(), w in 0.01f64..50.0, u in 0.0f64..1.0) {
        let p = p.with_omega(w);
        let v = p.decay_h(u).unwrap();
        let fu = p.kinetics(u, v).unwrap().fu;
        prop_assert!(close(f_kpp(u, &p).unwrap(), fu / w, 1e-12, 1e-15));
    }

    #[test]
    fn rotation_is_monotone_above_nullclines(p in params(), w in 0.01f64..100.0, t in 0.0f64..1.0, dv in 0.01f64..3.0) {
        let p = p.with_omega(w);
        let u = 0.01 + t * 0.9 * (1.0 - 1.0 / p.gamma - 0.01);
        let v_u = p.alpha - (p.gamma * (1.0 - u) - 1.0).ln() / p.beta;
        let v = v_u.max(p.decay_h(u).unwrap()) + dv;
        let (_, d) = rotation_angle(u, v, &p).unwrap();
        prop_assert!(d > 0.0);
    }

    #[test]
    fn threshold_is_positive_and_decreasing(b in 0.05f64..50.0, db in 0.01f64..5.0) {
        let (a, c) = (p_threshold(b).unwrap(), p_threshold(b + db).unwrap());
        prop_assert!(a > 0.0 && c < a);
    }
}
