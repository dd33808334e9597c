//! Singular-limit flows of the planar traveling-wave system, the rotated
//! vector field angle, and shooting for the front connecting `B` to `A`.

pub mod ode;
pub mod shoot;
pub mod slow;

use crate::equilibria::nullcline_u_of_v;
use crate::error::{Error, Result};
use crate::model::ModelParams;

pub use ode::{integrate, DormandPrince, Event, Termination, Trajectory, TrajectoryPoint};
pub use shoot::{
    shoot_heteroclinic, shoot_heteroclinic_with, stable_direction_at_a, Approach,
    HeteroclinicResult, ShootOptions,
};
pub use slow::SlowSystem;

fn require_speed(params: &ModelParams) -> Result<()> {
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidSpeed { c: params.c });
    }
    Ok(())
}

/// Flow on the critical manifold `v = (1 + u)^(-p)` in the limit `omega -> 0`,
/// in the slow variable `eta = omega * xi`.
pub fn flow_omega0_rhs(u: f64, params: &ModelParams) -> Result<f64> {
    require_speed(params)?;
    let v = params.decay_h(u)?;
    let s = params.switch(v);
    Ok(-(1.0 / params.c) * u * (params.gamma * s * (1.0 - u) - 1.0))
}

/// The critical manifold of the `omega -> 0` limit.
pub fn slow_manifold_v(u: f64, params: &ModelParams) -> Result<f64> {
    params.decay_h(u)
}

/// Eigenvalue of the `omega = 0` flow normal to the critical manifold.
///
/// With `omega = 0` the rioting level is frozen and
/// `dv/dxi = ((1 + u)^p v - 1) / c`, so the normal rate is `(1 + u)^p / c`.
pub fn slow_manifold_normal_eigenvalue(u: f64, params: &ModelParams) -> Result<f64> {
    require_speed(params)?;
    Ok(params.relief(u)? / params.c)
}

/// Reduced flow on the line `u = 0` in the limit `omega -> infinity`.
pub fn flow_s1_rhs(v: f64, params: &ModelParams) -> Result<f64> {
    require_speed(params)?;
    Ok(-(1.0 / params.c) * (1.0 - v))
}

/// The curve of non-trivial fast equilibria in the limit `omega -> infinity`.
pub fn s2_curve_u(v: f64, params: &ModelParams) -> f64 {
    nullcline_u_of_v(v, params)
}

/// Reduced flow along the curve [`s2_curve_u`], scaled by `delta = 1 / omega`.
pub fn flow_s2_rhs(v: f64, params: &ModelParams, delta: f64) -> Result<f64> {
    require_speed(params)?;
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "must be non-negative",
        });
    }
    let base = 1.0 + s2_curve_u(v, params);
    if !(base > 0.0) {
        return Err(Error::Domain {
            name: "v",
            value: v,
            reason: "curve leaves u > -1",
        });
    }
    Ok((delta / params.c) * (-1.0 + base.powf(params.p) * v))
}

/// Angle of the vector `(omega f1, f2)` and its derivative in `omega`.
pub fn rotation_angle(u: f64, v: f64, params: &ModelParams) -> Result<(f64, f64)> {
    let [f1, f2] = params.wave_components(u, v)?;
    let w = params.omega;
    let a = w * f1;
    if a == 0.0 && f2 == 0.0 {
        return Err(Error::UndefinedAngle { u, v });
    }
    let phi = f2.atan2(a);
    let dphi = -f1 * f2 / (a * a + f2 * f2);
    Ok((phi, dphi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{solve_ubar, vbar, DEFAULT_ROOT_TOL};

    fn fixture() -> ModelParams {
        ModelParams::new(4.0, 1.0, 2.0)
    }

    #[test]
    fn omega0_flow_vanishes_at_rest_states() {
        let params = fixture();
        let ubar = solve_ubar(&params, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(flow_omega0_rhs(0.0, &params).unwrap(), 0.0);
        assert!(flow_omega0_rhs(ubar, &params).unwrap().abs() < 1e-10);
        assert!(flow_omega0_rhs(0.01, &params).unwrap() < 0.0);
    }

    #[test]
    fn s1_flow() {
        let params = fixture();
        assert_eq!(flow_s1_rhs(1.0, &params).unwrap(), 0.0);
        assert_eq!(flow_s1_rhs(0.0, &params).unwrap(), -1.0);
    }

    #[test]
    fn s2_flow_vanishes_at_vbar() {
        let params = fixture();
        let ubar = solve_ubar(&params, DEFAULT_ROOT_TOL).unwrap();
        let vb = vbar(ubar, &params).unwrap();
        assert!(flow_s2_rhs(vb, &params, 0.5).unwrap().abs() < 1e-10);
        assert!((s2_curve_u(vb, &params) - ubar).abs() < 1e-10);
        let expect = 0.5 * (-1.0 + (2.0f64 - 2.0 / 4.0).powi(2));
        assert!((flow_s2_rhs(1.0, &params, 0.5).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn s2_flow_domain_error() {
        let params = ModelParams::new(2.5, 1.0, 2.0);
        assert!(matches!(
            flow_s2_rhs(-5.0, &params, 1.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn rotation_angle_on_v_nullcline() {
        let params = fixture();
        let u = 0.2;
        let v = params.decay_h(u).unwrap();
        let (_, d) = rotation_angle(u, v, &params).unwrap();
        assert!(d.abs() < 1e-12, "{d}");
        assert!(matches!(
            rotation_angle(0.0, 1.0, &params),
            Err(Error::UndefinedAngle { .. })
        ));
    }

    #[test]
    fn normal_eigenvalue_matches_jacobian() {
        let params = fixture().with_speed(1.7);
        let u = 0.3;
        let v = params.decay_h(u).unwrap();
        let j = crate::spectra::jacobian_reduced(u, v, &params.with_omega(1e-300)).unwrap();
        let lam = slow_manifold_normal_eigenvalue(u, &params).unwrap();
        assert!((j[1][1] - lam).abs() < 1e-14);
        assert!(lam > 0.0);
    }
}
