use serde::{Deserialize, Serialize};

use super::scheme::FieldState;
use crate::error::{Error, Result};

/// Least-squares fit of front position against time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontSpeed {
    pub speed: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of the positions from the fitted line.
    pub fit_residual: f64,
    /// `(tau, position)` pairs used in the fit.
    pub positions: Vec<(f64, f64)>,
}

/// Rightmost point where `u` drops from `>= level` to `< level`, found by
/// linear interpolation between nodes.
pub fn front_position(state: &FieldState, level: f64) -> Option<f64> {
    let u = &state.u;
    (0..u.len().saturating_sub(1)).rev().find_map(|i| {
        if u[i] >= level && u[i + 1] < level {
            let t = (u[i] - level) / (u[i] - u[i + 1]);
            Some(state.x(i) + t * state.dx)
        } else {
            None
        }
    })
}

/// Front speed from a linear fit of the level-crossing positions.
pub fn measure_front_speed(snapshots: &[FieldState], level: f64) -> Result<FrontSpeed> {
    if snapshots.len() < 5 {
        return Err(Error::InvalidParameter {
            name: "snapshots",
            value: snapshots.len() as f64,
            reason: "front speed needs at least 5 snapshots",
        });
    }
    if !level.is_finite() {
        return Err(Error::InvalidParameter {
            name: "level",
            value: level,
            reason: "must be finite",
        });
    }
    let positions = snapshots
        .iter()
        .map(|s| {
            front_position(s, level)
                .map(|x| (s.tau, x))
                .ok_or(Error::NoFront { level, tau: s.tau })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = positions.len() as f64;
    let mt = positions.iter().map(|p| p.0).sum::<f64>() / n;
    let mx = positions.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = positions.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if stt == 0.0 {
        return Err(Error::InvalidParameter {
            name: "snapshots",
            value: mt,
            reason: "snapshots share a single time stamp",
        });
    }
    let stx: f64 = positions.iter().map(|p| (p.0 - mt) * (p.1 - mx)).sum();
    let speed = stx / stt;
    let intercept = mx - speed * mt;
    let fit_residual = (positions
        .iter()
        .map(|p| (p.1 - intercept - speed * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(FrontSpeed {
        speed,
        intercept,
        fit_residual,
        positions,
    })
}

fn same_grid(s1: &FieldState, s2: &FieldState) -> Result<()> {
    if s1.u.len() != s2.u.len() || s1.v.len() != s2.v.len() || s1.dx != s2.dx {
        return Err(Error::GridMismatch(format!(
            "states with {} nodes (dx {}) and {} nodes (dx {})",
            s1.u.len(),
            s1.dx,
            s2.u.len(),
            s2.dx
        )));
    }
    Ok(())
}

/// `max |(w2 - w1) / (tau2 - tau1)|` over both fields.
pub fn stationarity_residual(s1: &FieldState, s2: &FieldState) -> Result<f64> {
    same_grid(s1, s2)?;
    let dt = s2.tau - s1.tau;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tau",
            value: s2.tau,
            reason: "second state must be later than the first",
        });
    }
    let du = s1.u.iter().zip(&s2.u).map(|(a, b)| (b - a).abs());
    let dv = s1.v.iter().zip(&s2.v).map(|(a, b)| (b - a).abs());
    Ok(du.chain(dv).fold(0.0, f64::max) / dt)
}

/// Residuals between consecutive snapshots.
pub fn stationarity_series(snapshots: &[FieldState]) -> Result<Vec<f64>> {
    snapshots
        .windows(2)
        .map(|w| stationarity_residual(&w[0], &w[1]))
        .collect()
}

/// Sign changes of the forward differences of `u`, ignoring differences no
/// larger than `tol`.
pub fn derivative_sign_changes(u: &[f64], tol: f64) -> usize {
    let mut changes = 0;
    let mut prev = 0.0f64;
    for w in u.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= tol {
            continue;
        }
        if prev != 0.0 && d.signum() != prev {
            changes += 1;
        }
        prev = d.signum();
    }
    changes
}

/// Largest one-sided difference at either end, for both fields.
pub fn neumann_defect(state: &FieldState) -> f64 {
    let end = |w: &[f64]| {
        let n = w.len();
        (w[1] - w[0]).abs().max((w[n - 1] - w[n - 2]).abs())
    };
    end(&state.u).max(end(&state.v))
}

/// `(|u(0) - ubar| / ubar, |u(L)| / ubar)`.
pub fn end_state_errors(state: &FieldState, ubar: f64) -> (f64, f64) {
    let n = state.u.len();
    (
        (state.u[0] - ubar).abs() / ubar,
        state.u[n - 1].abs() / ubar,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(shift: f64, tau: f64) -> FieldState {
        let dx = 0.05;
        let u: Vec<f64> = (0..801)
            .map(|i| 0.5 * (1.0 - ((i as f64 * dx - shift) / 2.0).tanh()))
            .collect();
        FieldState {
            v: vec![1.0; u.len()],
            u,
            tau,
            dx,
        }
    }

    #[test]
    fn translating_profile_speed() {
        let snaps: Vec<_> = (0..10)
            .map(|k| profile(5.0 + 2.0 * k as f64, k as f64))
            .collect();
        let fs = measure_front_speed(&snaps, 0.5).unwrap();
        assert!((fs.speed - 2.0).abs() < 1e-3);
        assert!(fs.fit_residual < 1e-3);
    }

    #[test]
    fn stationary_profile_speed() {
        let snaps: Vec<_> = (0..6).map(|k| profile(10.0, k as f64)).collect();
        assert!(measure_front_speed(&snaps, 0.25).unwrap().speed.abs() < 1e-12);
    }

    #[test]
    fn missing_front() {
        let snaps: Vec<_> = (0..6).map(|k| profile(10.0, k as f64)).collect();
        assert!(matches!(
            measure_front_speed(&snaps, 2.0),
            Err(Error::NoFront { .. })
        ));
    }

    #[test]
    fn residual_of_identical_states_is_zero() {
        let a = profile(3.0, 0.0);
        let mut b = a.clone();
        b.tau = 1.0;
        assert_eq!(stationarity_residual(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn shifted_profile_residual_tracks_slope() {
        let a = profile(10.0, 0.0);
        let b = profile(10.05, 0.05);
        // slope of 0.5 (1 - tanh(x / 2)) peaks at 1/4
        let r = stationarity_residual(&a, &b).unwrap();
        assert!((r - 0.25).abs() < 5e-3, "{r}");
    }

    #[test]
    fn mismatched_grids() {
        let a = profile(3.0, 0.0);
        let mut b = a.clone();
        b.u.pop();
        b.tau = 1.0;
        assert!(matches!(
            stationarity_residual(&a, &b),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn sign_changes_of_bump() {
        assert_eq!(derivative_sign_changes(&[0.0, 1.0, 2.0, 1.0, 0.0], 0.0), 1);
        assert_eq!(derivative_sign_changes(&[3.0, 2.0, 2.0, 1.0], 0.0), 0);
    }
}
