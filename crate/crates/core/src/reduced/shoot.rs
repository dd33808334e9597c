//! Shooting for the front that leaves `B` and arrives at `A`.
//!
//! `A` is a saddle of the planar flow with a one-dimensional stable
//! manifold, so the front is the unique orbit obtained by seeding on the
//! stable eigenvector of `A` and integrating backward in `xi`. `B` is a
//! source, hence a sink in backward time, and every seeded orbit that stays
//! in the physical box is expected to reach it.
//!
//! Near `B` the orbit is followed into a shrinking ball in coordinates
//! relative to `B`. The number of sign changes of `u - ubar` inside that ball
//! separates spiral from node-like approach: a node gives at most one, a
//! focus gives one per half turn.

use serde::{Deserialize, Serialize};

use super::ode::{distance, DormandPrince, Event, Termination, Trajectory};
use crate::equilibria::{excited_state, DEFAULT_ROOT_TOL};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectra::eigen_b;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Approach {
    Monotone,
    Oscillatory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    /// Offset of the seed from `A` along the stable eigenvector.
    pub delta_seed: f64,
    /// Capture radius as a fraction of `|B - A|`.
    pub capture_radius: f64,
    /// Inner radius of the approach phase as a fraction of `|B - A|`.
    ///
    /// Bounds how weak a spiral can be and still be seen: with the defaults
    /// the orbit needs `|Im/Re|` of B's eigenvalues above about 0.45 to turn
    /// far enough, so omegas just inside the window may read as monotone.
    pub tail_radius: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Backward span in units of the slowest linear time scale.
    pub span_factor: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self {
            delta_seed: 1e-6,
            capture_radius: 1e-3,
            tail_radius: 1e-9,
            rtol: 1e-10,
            atol: 1e-12,
            span_factor: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeteroclinicResult {
    /// Orbit from the seed near `A` (at `xi = 0`) backward to the capture ball.
    pub orbit: Trajectory<2>,
    pub connected: bool,
    pub approach: Approach,
    /// Distance from the last orbit point to `B`.
    pub distance_to_b: f64,
    /// `|B - A|`, the length scale of the capture radii.
    pub separation: f64,
    /// Sign changes of `u - ubar` while closing in on `B`.
    pub tail_sign_changes: usize,
    /// First crossing of the rioting nullcline `f1 = 0`, if any.
    pub nullcline_crossing: Option<[f64; 2]>,
}

fn planar_rhs(params: ModelParams) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    let (w, c, g, p) = (params.omega, params.c, params.gamma, params.p);
    move |_, y| {
        let (u, v) = (y[0], y[1]);
        let s = params.switch(v);
        [
            -(w / c) * (g * s * u * (1.0 - u) - u),
            -(1.0 / c) * (1.0 - (1.0 + u).powf(p) * v),
        ]
    }
}

/// Unit stable eigenvector of `A`, oriented into `u > 0`.
pub fn stable_direction_at_a(params: &ModelParams) -> Result<[f64; 2]> {
    params.validate_wave()?;
    if params.gamma <= 2.0 {
        return Err(Error::NoPositiveEquilibrium {
            gamma: params.gamma,
        });
    }
    let a = (params.omega / params.c) * (2.0 - params.gamma) / 2.0;
    let b = params.p / params.c;
    let d = 1.0 / params.c;
    let (e0, e1) = (d - a, -b);
    let n = e0.hypot(e1);
    Ok([e0 / n, e1 / n])
}

/// Shoots with default tolerances and the given seed and capture radius.
pub fn shoot_heteroclinic(
    params: &ModelParams,
    delta_seed: f64,
    capture_radius: f64,
) -> Result<HeteroclinicResult> {
    shoot_heteroclinic_with(
        params,
        &ShootOptions {
            delta_seed,
            capture_radius,
            ..ShootOptions::default()
        },
    )
}

pub fn shoot_heteroclinic_with(
    params: &ModelParams,
    opts: &ShootOptions,
) -> Result<HeteroclinicResult> {
    let dir = stable_direction_at_a(params)?;
    for (name, value) in [
        ("delta_seed", opts.delta_seed),
        ("capture_radius", opts.capture_radius),
        ("tail_radius", opts.tail_radius),
        ("span_factor", opts.span_factor),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidParameter {
                name,
                value,
                reason: "must be positive",
            });
        }
    }
    let eq = excited_state(params, DEFAULT_ROOT_TOL)?;
    let b = [eq.u_star, eq.v_star];
    let a_pt = [0.0, 1.0];
    let separation = distance(&a_pt, &b);

    let seed = [opts.delta_seed * dir[0], 1.0 + opts.delta_seed * dir[1]];
    if !(seed[0] > 0.0 && seed[1] > 0.0) {
        return Err(Error::SeedBranch {
            u: seed[0],
            v: seed[1],
        });
    }

    // Slowest linear rates at A (stable) and B (unstable).
    let rate_a = (params.omega / params.c) * (params.gamma - 2.0) / 2.0;
    let spec_b = eigen_b(params)?;
    let rate_b = spec_b.lambda1.re.min(spec_b.lambda2.re);
    let span = opts.span_factor * (1.0 / rate_a + 1.0 / rate_b);

    let v_cap = 5.0 * eq.v_star.max(1.0);
    let capture = opts.capture_radius * separation;
    let events = [
        Event::enter_ball(b, capture),
        Event::leave_box([-0.05, 0.0], [1.5, v_cap]),
    ];
    let rhs = planar_rhs(*params);
    let mut dp = DormandPrince::new(opts.rtol, opts.atol)?;
    let orbit = dp.solve(&rhs, seed, (0.0, -span), &events)?;
    let end = orbit.last().state;
    let distance_to_b = distance(&end, &b);
    let connected = orbit.termination == Termination::ReachedTarget && distance_to_b <= capture;

    let tail_sign_changes = if connected {
        approach_sign_changes(&rhs, b, orbit.last().xi, end, span, separation, opts)?
    } else {
        0
    };
    let approach = if tail_sign_changes >= 2 {
        Approach::Oscillatory
    } else {
        Approach::Monotone
    };

    let nullcline_crossing = first_nullcline_crossing(params, &orbit)?;
    Ok(HeteroclinicResult {
        orbit,
        connected,
        approach,
        distance_to_b,
        separation,
        tail_sign_changes,
        nullcline_crossing,
    })
}

/// Follows the orbit from the capture ball toward `B` in coordinates
/// relative to `B` and counts sign changes of `u - ubar`.
fn approach_sign_changes(
    rhs: &impl Fn(f64, &[f64; 2]) -> [f64; 2],
    b: [f64; 2],
    xi0: f64,
    y0: [f64; 2],
    span: f64,
    separation: f64,
    opts: &ShootOptions,
) -> Result<usize> {
    let inner = opts.tail_radius * separation;
    let z0 = [y0[0] - b[0], y0[1] - b[1]];
    let rel = move |x: f64, z: &[f64; 2]| rhs(x, &[b[0] + z[0], b[1] + z[1]]);
    let events = [Event::enter_ball([0.0, 0.0], inner)];
    let mut dp = DormandPrince::new(1e-9, 1e-3 * inner)?;
    let tail = dp.solve(rel, z0, (xi0, xi0 - span), &events)?;
    let mut changes = 0;
    let mut prev = z0[0].signum();
    for p in &tail.points {
        let s = p.state[0];
        if s != 0.0 && s.signum() != prev {
            changes += 1;
            prev = s.signum();
        }
    }
    Ok(changes)
}

fn first_nullcline_crossing(
    params: &ModelParams,
    orbit: &Trajectory<2>,
) -> Result<Option<[f64; 2]>> {
    let mut prev: Option<([f64; 2], f64)> = None;
    for p in &orbit.points {
        let f1 = params.wave_components(p.state[0], p.state[1])?[0];
        if let Some((y, g)) = prev {
            if g != 0.0 && f1 != 0.0 && g.signum() != f1.signum() {
                let t = g / (g - f1);
                return Ok(Some([
                    y[0] + t * (p.state[0] - y[0]),
                    y[1] + t * (p.state[1] - y[1]),
                ]));
            }
        }
        prev = Some((p.state, f1));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_direction_is_eigenvector() {
        let params = ModelParams::new(4.0, 1.0, 2.0)
            .with_omega(0.7)
            .with_speed(1.3);
        let e = stable_direction_at_a(&params).unwrap();
        let j = crate::spectra::jacobian_reduced(0.0, 1.0, &params).unwrap();
        let lam = (params.omega / params.c) * (2.0 - params.gamma) / 2.0;
        let je = [
            j[0][0] * e[0] + j[0][1] * e[1],
            j[1][0] * e[0] + j[1][1] * e[1],
        ];
        assert!((je[0] - lam * e[0]).abs() < 1e-14);
        assert!((je[1] - lam * e[1]).abs() < 1e-14);
        assert!(e[0] > 0.0);
    }

    #[test]
    fn zero_omega_is_rejected() {
        let params = ModelParams::new(4.0, 1.0, 2.0).with_omega(0.0);
        assert!(matches!(
            shoot_heteroclinic(&params, 1e-6, 1e-3),
            Err(Error::InvalidOmega { .. })
        ));
    }

    #[test]
    fn connects_at_default_fixture() {
        let params = ModelParams::new(4.0, 1.0, 2.0).with_omega(0.1);
        let r = shoot_heteroclinic(&params, 1e-6, 1e-3).unwrap();
        assert!(r.connected);
        assert_eq!(r.approach, Approach::Monotone);
        assert!(r.distance_to_b <= 1e-3 * r.separation);
    }
}
