//! Constant states of the kinetics and the nullclines of the planar flow.
//!
//! The relaxed state `A = (0, 1)` exists for every parameter set. The excited
//! state `B = (ubar, vbar)` exists when `gamma > 2`; `ubar` is the root of
//!
//! ```text
//! g(u) = gamma - 1 - gamma * u - exp(-beta * ((1 + u)^(-p) - 1))
//! ```
//!
//! on `(0, (gamma - 1) / gamma)`, and `vbar = (1 + ubar)^(-p)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Default tolerance for the equilibrium root finder.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Number of sub-intervals scanned when the residual is not monotone.
const SCAN_INTERVALS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumLabel {
    RelaxedA,
    ExcitedB,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub u_star: f64,
    pub v_star: f64,
    pub label: EquilibriumLabel,
    /// Largest absolute kinetic term at the point.
    pub residual: f64,
}

/// Residual `g(u)` of the scalar equation for `ubar`.
pub fn ubar_residual(u: f64, params: &ModelParams) -> f64 {
    let gamma = params.gamma;
    let v = (1.0 + u).powf(-params.p);
    gamma - 1.0 - gamma * u - (-params.beta * (v - 1.0)).exp()
}

fn bisect(params: &ModelParams, mut lo: f64, mut hi: f64) -> f64 {
    let mut g_lo = ubar_residual(lo, params);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = ubar_residual(mid, params);
        if g_mid == 0.0 {
            return mid;
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    if ubar_residual(lo, params).abs() <= ubar_residual(hi, params).abs() {
        lo
    } else {
        hi
    }
}

/// Solves for `ubar` by bracketed bisection.
///
/// For `p >= 0` the residual is strictly decreasing on the bracket and the
/// root is unique. For `p < 0` the bracket is scanned and the smallest root
/// is returned.
pub fn solve_ubar(params: &ModelParams, tol: f64) -> Result<f64> {
    params.validate_analysis()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "must be positive",
        });
    }
    if params.gamma <= 2.0 {
        return Err(Error::NoPositiveEquilibrium {
            gamma: params.gamma,
        });
    }
    let upper = (params.gamma - 1.0) / params.gamma;
    let root = if params.p >= 0.0 {
        bisect(params, 0.0, upper)
    } else {
        // g(0) = gamma - 2 > 0; walk right until the sign first flips.
        let h = upper / SCAN_INTERVALS as f64;
        let mut found = None;
        let mut prev = 0.0;
        for i in 1..=SCAN_INTERVALS {
            let u = if i == SCAN_INTERVALS {
                upper
            } else {
                i as f64 * h
            };
            if ubar_residual(u, params) <= 0.0 {
                found = Some(bisect(params, prev, u));
                break;
            }
            prev = u;
        }
        found.ok_or(Error::NoPositiveEquilibrium {
            gamma: params.gamma,
        })?
    };
    Ok(root)
}

/// `vbar = (1 + ubar)^(-p)`, the tension nullcline.
pub fn vbar(u_bar: f64, params: &ModelParams) -> Result<f64> {
    params.decay_h(u_bar)
}

/// The non-trivial rioting nullcline `u = 1 - (1 + exp(-beta (v - 1))) / gamma`.
pub fn nullcline_u_of_v(v: f64, params: &ModelParams) -> f64 {
    let e = (-params.beta * (v - params.alpha)).exp();
    1.0 - (1.0 + e) / params.gamma
}

fn kinetic_residual(u: f64, v: f64, params: &ModelParams) -> Result<f64> {
    let k = params.kinetics(u, v)?;
    // Compare in the omega-free scaling so the residual does not shrink with omega.
    Ok((k.fu / params.omega).abs().max(k.fv.abs()))
}

/// The relaxed state `A = (0, 1)`.
pub fn relaxed_state() -> Equilibrium {
    Equilibrium {
        u_star: 0.0,
        v_star: 1.0,
        label: EquilibriumLabel::RelaxedA,
        residual: 0.0,
    }
}

/// The excited state `B = (ubar, vbar)`.
pub fn excited_state(params: &ModelParams, tol: f64) -> Result<Equilibrium> {
    let u = solve_ubar(params, tol)?;
    let v = vbar(u, params)?;
    Ok(Equilibrium {
        u_star: u,
        v_star: v,
        label: EquilibriumLabel::ExcitedB,
        residual: kinetic_residual(u, v, params)?,
    })
}
