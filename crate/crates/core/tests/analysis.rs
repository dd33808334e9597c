//! Equilibria, spectra, reduced-flow and scalar-front fixtures. Reference
//! values come from a separate bisection implementation.

use approx::assert_relative_eq;
use num_complex::Complex64;

use riotwave::equilibria::{excited_state, solve_ubar, DEFAULT_ROOT_TOL};
use riotwave::kpp::{
    concavity_scan, f_kpp, fprime_ubar, gamma0_search, kpp_limit_rhs, kpp_region_check,
    kpp_saddle_eigenvalues, min_speed, shoot_kpp_front,
};
use riotwave::reduced::{
    flow_omega0_rhs, flow_s2_rhs, shoot_heteroclinic_with, Approach, ShootOptions,
};
use riotwave::spectra::omega_thresholds;
use riotwave::{Error, ModelParams};

fn base() -> ModelParams {
    ModelParams::new(4.0, 1.0, 2.0)
}

#[test]
fn ubar_reference_values() {
    let cases = [
        ((4.0, 1.0, 2.0), 0.3556232347359527),
        ((1000.0, 20.0, 2.0), 0.22410516756001322),
        ((5.0, 20.0, 2.0), 0.0353150356880309),
        ((300.0, 20.0, 2.0), 0.17475097952203789),
    ];
    for ((g, b, p), want) in cases {
        let got = solve_ubar(&ModelParams::new(g, b, p), DEFAULT_ROOT_TOL).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-12);
    }
    let b = excited_state(&ModelParams::new(1000.0, 20.0, 2.0), DEFAULT_ROOT_TOL).unwrap();
    assert_relative_eq!(b.v_star, 0.6673636339966088, max_relative = 1e-12);
    let b = excited_state(&base(), DEFAULT_ROOT_TOL).unwrap();
    assert_relative_eq!(b.v_star, 0.5441542084714368, max_relative = 1e-12);
}

#[test]
fn ubar_grows_from_zero_with_gamma() {
    let mut prev = 0.0;
    for k in 1..40 {
        let g = 2.0 + 0.01 * k as f64;
        let u = solve_ubar(&ModelParams::new(g, 1.0, 2.0), DEFAULT_ROOT_TOL).unwrap();
        assert!(u > prev, "gamma {g}");
        prev = u;
    }
    assert!(solve_ubar(&ModelParams::new(2.001, 1.0, 2.0), DEFAULT_ROOT_TOL).unwrap() < 1e-2);
    assert!(matches!(
        solve_ubar(&ModelParams::new(2.0, 1.0, 2.0), DEFAULT_ROOT_TOL),
        Err(Error::NoPositiveEquilibrium { .. })
    ));
}

#[test]
fn tension_enhancing_regime_takes_smallest_root() {
    let p = ModelParams::new(4.0, 1.0, -1.0);
    let u = solve_ubar(&p, DEFAULT_ROOT_TOL).unwrap();
    let b = excited_state(&p, DEFAULT_ROOT_TOL).unwrap();
    assert!(u > 0.0 && b.residual < 1e-10);
}

#[test]
fn spiral_window_reference() {
    let th = omega_thresholds(&base()).unwrap();
    assert_relative_eq!(th.omega1, 1.1386128526, max_relative = 1e-9);
    assert_relative_eq!(th.omega2, 9.7382164277, max_relative = 1e-9);
}

#[test]
fn singular_flow_on_the_critical_manifold() {
    let p = base();
    let ubar = solve_ubar(&p, DEFAULT_ROOT_TOL).unwrap();
    for k in 1..20 {
        let u = ubar * k as f64 / 20.0;
        assert!(flow_omega0_rhs(u, &p).unwrap() < 0.0, "u = {u}");
    }
    for k in 1..10 {
        let u = ubar + (0.7 - ubar) * k as f64 / 10.0;
        assert!(flow_omega0_rhs(u, &p).unwrap() > 0.0, "u = {u}");
    }
}

#[test]
fn fast_limit_branch_repels_vbar_forward() {
    // Forward in xi the branch flow moves away from vbar; the branch is
    // attracting only when the orbit is traced backward from A.
    let p = base().with_omega(100.0);
    let vbar = excited_state(&p, DEFAULT_ROOT_TOL).unwrap().v_star;
    let h = 1e-6;
    let d = (flow_s2_rhs(vbar + h, &p, 1.0).unwrap() - flow_s2_rhs(vbar - h, &p, 1.0).unwrap())
        / (2.0 * h);
    assert!(d > 0.0, "{d}");
    assert!(flow_s2_rhs(vbar, &p, 1.0).unwrap().abs() < 1e-10);
}

#[test]
fn slow_orbits_stay_on_one_side_of_tension_nullcline() {
    for w in [1e-3, 1e-2] {
        let r = shoot_heteroclinic_with(&base().with_omega(w), &ShootOptions::default()).unwrap();
        assert!(r.connected);
        assert!(r.nullcline_crossing.is_none());
        let above = r
            .orbit
            .points
            .iter()
            .skip(1)
            .all(|pt| pt.state[1] >= base().decay_h(pt.state[0]).unwrap() - 1e-12);
        assert!(above, "omega {w}");
    }
}

#[test]
fn crossing_moves_down_nullcline_as_omega_decreases() {
    let mut prev = f64::INFINITY;
    for w in [100.0, 10.0, 9.0, 5.0, 3.3, 2.0] {
        let r = shoot_heteroclinic_with(&base().with_omega(w), &ShootOptions::default()).unwrap();
        let [u, v] = r.nullcline_crossing.expect("crossing above omega = 1");
        assert!(v < prev, "omega {w}: v = {v}");
        assert!(u > 0.0 && u < 0.5);
        prev = v;
    }
}

#[test]
fn approach_is_oscillatory_inside_window() {
    let th = omega_thresholds(&base()).unwrap();
    let w = (th.omega1 * th.omega2).sqrt();
    let r = shoot_heteroclinic_with(&base().with_omega(w), &ShootOptions::default()).unwrap();
    assert!(r.connected);
    assert_eq!(r.approach, Approach::Oscillatory);
    assert!(r.tail_sign_changes >= 2);
}

#[test]
fn scalar_front_is_monotone_above_min_speed() {
    let p = ModelParams::new(4.0, 3.0, 1.0).with_speed(1.25 * min_speed(4.0).unwrap());
    let front = shoot_kpp_front(&p, 1e-7).unwrap();
    let last = front.last();
    assert!(
        last.state[0].hypot(last.state[1]) < 1e-6,
        "{:?}",
        last.state
    );
    assert!(front.points.iter().all(|pt| pt.state[1] <= 1e-12));
    assert!(front
        .points
        .windows(2)
        .all(|w| w[1].state[0] <= w[0].state[0] + 1e-12));
}

#[test]
fn scalar_source_slope_at_ubar_matches_differences() {
    for (g, b, pp) in [(4.0, 3.0, 1.0), (10.0, 2.0, 2.0), (6.0, 0.5, 0.3)] {
        let p = ModelParams::new(g, b, pp);
        let u = solve_ubar(&p, DEFAULT_ROOT_TOL).unwrap();
        let h = 1e-6;
        let fd = (f_kpp(u + h, &p).unwrap() - f_kpp(u - h, &p).unwrap()) / (2.0 * h);
        assert_relative_eq!(fprime_ubar(&p).unwrap(), fd, max_relative = 1e-6);
    }
}

fn det3(m: [[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[test]
fn three_dimensional_saddle_spectrum() {
    for (w, c) in [(0.5, 1.0), (2.0, 3.0), (0.1, 0.7)] {
        let p = base().with_omega(w).with_speed(c);
        let y0 = [0.0, 0.0, 1.0];
        let h = 1e-7;
        let mut j = [[0.0; 3]; 3];
        for k in 0..3 {
            let (mut a, mut b) = (y0, y0);
            a[k] += h;
            b[k] -= h;
            let (fa, fb) = (kpp_limit_rhs(&a, &p), kpp_limit_rhs(&b, &p));
            for i in 0..3 {
                j[i][k] = (fa[i] - fb[i]) / (2.0 * h);
            }
        }
        for lam in kpp_saddle_eigenvalues(&p).unwrap() {
            let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
            for i in 0..3 {
                for k in 0..3 {
                    m[i][k] = Complex64::new(j[i][k], 0.0)
                        - if i == k {
                            lam
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                }
            }
            assert!(det3(m).norm() < 1e-6, "omega {w}, c {c}, lambda {lam}");
        }
    }
}

#[test]
fn region_admits_non_concave_source() {
    // A draw with p above the threshold whose source still bends upward
    // just below ubar.
    let p = ModelParams::new(19.07569004847039, 9.699027834309321, 0.5384320646268794);
    assert!(kpp_region_check(p.beta, p.p).unwrap().guaranteed);
    let scan = concavity_scan(&p, 1000).unwrap();
    assert!(!scan.is_concave);
    let u = 0.99 * solve_ubar(&p, DEFAULT_ROOT_TOL).unwrap();
    let h = 1e-4;
    let f2 = (f_kpp(u + h, &p).unwrap() - 2.0 * f_kpp(u, &p).unwrap() + f_kpp(u - h, &p).unwrap())
        / (h * h);
    assert!(f2 > 0.3, "{f2}");
}

#[test]
fn concavity_lost_beyond_gamma0() {
    // Steep switch: h(u) ~ exp(-beta p u) / 2 puts an inflection near
    // u = 2 / (beta p), inside (0, ubar) once gamma is large enough.
    let g0 = gamma0_search(20.0, 1.0, 200.0, 400).unwrap();
    assert!(g0 > 2.0 && g0 < 20.0, "{g0}");
    let below = concavity_scan(&ModelParams::new(0.5 * (2.0 + g0), 20.0, 1.0), 400).unwrap();
    let above = concavity_scan(&ModelParams::new(1.1 * g0, 20.0, 1.0), 400).unwrap();
    assert!(below.is_concave && !above.is_concave);
}
