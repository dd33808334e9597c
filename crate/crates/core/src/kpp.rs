//! Scalar Fisher-KPP reduction in the limit of fast tension relaxation.
//!
//! With `v` slaved to `(1 + u)^(-p)` the rioting level obeys
//! `u_t = u_xx + f(u)` with
//!
//! ```text
//! f(u) = -u * (1 - gamma * h(u) * (1 - u)),   h(u) = s((1 + u)^(-p))
//! ```
//!
//! `f` vanishes at `0` and `ubar`, grows at `0` with rate `gamma / 2 - 1`, and
//! fronts exist for every speed `c >= sqrt(2 (gamma - 2))` when `f` is
//! concave on `(0, ubar)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::{solve_ubar, DEFAULT_ROOT_TOL};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::reduced::ode::{DormandPrince, Event, Trajectory};

/// Smallest grid accepted by [`concavity_scan`].
pub const MIN_SCAN_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCheck {
    pub guaranteed: bool,
    pub p_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcavityScan {
    pub is_concave: bool,
    pub max_f2: f64,
    /// Grid point where the largest second difference occurs.
    pub argmax: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KppVerdict {
    /// The sufficient `(beta, p)` condition holds.
    pub guaranteed_by_region: bool,
    /// Second differences of `f` are negative on a grid of `(0, ubar)`.
    pub numeric_concave: bool,
    pub p_threshold: f64,
    pub min_speed: f64,
    pub max_f2: f64,
}

/// `h(u) = 1 / (1 + exp(-beta ((1 + u)^(-p) - 1)))`.
pub fn kpp_switch(u: f64, params: &ModelParams) -> Result<f64> {
    Ok(params.switch(params.decay_h(u)?))
}

/// The scalar source term `f(u)`.
pub fn f_kpp(u: f64, params: &ModelParams) -> Result<f64> {
    let h = kpp_switch(u, params)?;
    Ok(-u * (1.0 - params.gamma * h * (1.0 - u)))
}

/// `f'(0) = gamma / 2 - 1`.
pub fn fprime_zero(params: &ModelParams) -> f64 {
    params.gamma / 2.0 - 1.0
}

/// Closed form of `f'(ubar)`.
///
/// Uses `gamma h(ubar) (1 - ubar) = 1` and
/// `h' = -beta p (1 + u)^(-p-1) h (1 - h)`, which gives
/// `f'(ubar) = -ubar (1 / (1 - ubar) + p beta (1 - h) / (1 + ubar)^(p+1))`.
pub fn fprime_ubar(params: &ModelParams) -> Result<f64> {
    let ubar = solve_ubar(params, DEFAULT_ROOT_TOL)?;
    let h = 1.0 / (params.gamma * (1.0 - ubar));
    Ok(-ubar
        * (1.0 / (1.0 - ubar)
            + params.p * params.beta * (1.0 - h) / (1.0 + ubar).powf(params.p + 1.0)))
}

/// Lower bound on `p` above which concavity is claimed for every `gamma > 2`.
pub fn p_threshold(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain {
            name: "beta",
            value: beta,
            reason: "requires beta > 0",
        });
    }
    let b = 2.0 * beta + 1.0;
    Ok((b + (b * b + 4.0 * beta * (beta + 1.0)).sqrt()) / (2.0 * beta * (beta + 1.0)))
}

pub fn kpp_region_check(beta: f64, p: f64) -> Result<RegionCheck> {
    let p_threshold = p_threshold(beta)?;
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::Domain {
            name: "p",
            value: p,
            reason: "requires p > 0",
        });
    }
    Ok(RegionCheck {
        guaranteed: p >= p_threshold,
        p_threshold,
    })
}

/// Roots of the quadratic upper bound
/// `beta p (3 - (beta + 1) p) u^2 + (3 + (beta + 1) p) u - 2 (1 + beta p)`,
/// ordered as `(rho_minus, rho_plus)` per the `+/-` sign of the square root.
pub fn quadratic_bound_roots(beta: f64, p: f64) -> Option<(f64, f64)> {
    let a = beta * p * (3.0 - (beta + 1.0) * p);
    let b = 3.0 + (beta + 1.0) * p;
    let c = -2.0 * (1.0 + beta * p);
    let disc = b * b - 4.0 * a * c;
    if a == 0.0 || disc < 0.0 {
        return None;
    }
    let r = disc.sqrt();
    Some(((-b - r) / (2.0 * a), (-b + r) / (2.0 * a)))
}

/// Value of the quadratic upper bound at `u`.
pub fn quadratic_bound(beta: f64, p: f64, u: f64) -> f64 {
    beta * p * (3.0 - (beta + 1.0) * p) * u * u + (3.0 + (beta + 1.0) * p) * u
        - 2.0 * (1.0 + beta * p)
}

/// Central second difference of `f` on a uniform interior grid of `(0, ubar)`.
///
/// Any `p > -1 / beta` is accepted; negative `p` uses the smallest positive
/// root for `ubar`.
pub fn concavity_scan(params: &ModelParams, n_samples: usize) -> Result<ConcavityScan> {
    if n_samples < MIN_SCAN_SAMPLES {
        return Err(Error::InvalidParameter {
            name: "n_samples",
            value: n_samples as f64,
            reason: "concavity scan needs at least 100 samples",
        });
    }
    if !(params.beta * params.p + 1.0 > 0.0) {
        return Err(Error::Domain {
            name: "p",
            value: params.p,
            reason: "requires beta * p + 1 > 0",
        });
    }
    let ubar = solve_ubar(params, DEFAULT_ROOT_TOL)?;
    let h = ubar / (10.0 * n_samples as f64);
    let mut max_f2 = f64::NEG_INFINITY;
    let mut argmax = 0.0;
    for i in 1..=n_samples {
        let u = ubar * i as f64 / (n_samples + 1) as f64;
        let f2 =
            (f_kpp(u + h, params)? - 2.0 * f_kpp(u, params)? + f_kpp(u - h, params)?) / (h * h);
        if f2 > max_f2 {
            max_f2 = f2;
            argmax = u;
        }
    }
    Ok(ConcavityScan {
        is_concave: max_f2 < 0.0,
        max_f2,
        argmax,
    })
}

/// Minimal front speed `sqrt(2 (gamma - 2))` of the scalar equation.
pub fn min_speed(gamma: f64) -> Result<f64> {
    if !(gamma >= 2.0 && gamma.is_finite()) {
        return Err(Error::Domain {
            name: "gamma",
            value: gamma,
            reason: "requires gamma >= 2",
        });
    }
    Ok((2.0 * (gamma - 2.0)).sqrt())
}

pub fn kpp_verdict(params: &ModelParams, n_samples: usize) -> Result<KppVerdict> {
    let region = kpp_region_check(params.beta, params.p)?;
    let scan = concavity_scan(params, n_samples)?;
    Ok(KppVerdict {
        guaranteed_by_region: region.guaranteed,
        numeric_concave: scan.is_concave,
        p_threshold: region.p_threshold,
        min_speed: min_speed(params.gamma)?,
        max_f2: scan.max_f2,
    })
}

/// Traveling-wave flow `u1' = u2`, `u2' = u1 - c u2 - gamma s(v) u1 (1 - u1)`
/// with `v = (1 + u1)^(-p)`.
pub fn kpp_phase_rhs(u1: f64, u2: f64, params: &ModelParams) -> Result<[f64; 2]> {
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidSpeed { c: params.c });
    }
    let h = kpp_switch(u1, params)?;
    Ok([u2, u1 - params.c * u2 - params.gamma * h * u1 * (1.0 - u1)])
}

/// Three-dimensional flow in `z = omega xi` where `v` relaxes at finite rate.
pub fn kpp_limit_rhs(y: &[f64; 3], params: &ModelParams) -> [f64; 3] {
    let [u1, u2, v1] = *y;
    let (w, c) = (params.omega, params.c);
    let s = params.switch(v1);
    [
        w * u2,
        w * (u1 - c * u2 - params.gamma * s * u1 * (1.0 - u1)),
        (1.0 / c) * ((1.0 + u1).powf(params.p) * v1 - 1.0),
    ]
}

/// Eigenvalues of [`kpp_limit_rhs`] linearized at `(0, 0, 1)`: the pair
/// `(-omega c +/- sqrt(omega^2 c^2 - 2 omega^2 (gamma - 2))) / 2` followed by `1 / c`.
pub fn kpp_saddle_eigenvalues(params: &ModelParams) -> Result<[Complex64; 3]> {
    params.validate_wave()?;
    let (w, c) = (params.omega, params.c);
    let disc = Complex64::new(w * w * c * c - 2.0 * w * w * (params.gamma - 2.0), 0.0).sqrt();
    let base = Complex64::new(-w * c, 0.0);
    Ok([
        (base - disc) / 2.0,
        (base + disc) / 2.0,
        Complex64::new(1.0 / c, 0.0),
    ])
}

/// Front of the scalar equation shot from `(ubar, 0)` along the unstable
/// direction with `u` decreasing; stops within `1e-8` of the origin, on
/// overshoot below `u = 0`, or after a long span.
pub fn shoot_kpp_front(params: &ModelParams, delta_seed: f64) -> Result<Trajectory<2>> {
    params.validate_wave()?;
    if !(delta_seed > 0.0 && delta_seed.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "delta_seed",
            value: delta_seed,
            reason: "must be positive",
        });
    }
    let ubar = solve_ubar(params, DEFAULT_ROOT_TOL)?;
    let fp = fprime_ubar(params)?;
    let c = params.c;
    let lam = 0.5 * (-c + (c * c - 4.0 * fp).sqrt());
    let n = 1.0f64.hypot(lam);
    let seed = [ubar - delta_seed / n, -delta_seed * lam / n];
    let rhs = |_: f64, y: &[f64; 2]| kpp_phase_rhs(y[0], y[1], params).unwrap_or([f64::NAN; 2]);
    let events = [
        Event::enter_ball([0.0, 0.0], 1e-8),
        Event::leave_box([-1e-6, -10.0], [1.0, 1e-6]),
    ];
    let span = 200.0 * (1.0 / lam + c / fprime_zero(params).max(1e-12));
    DormandPrince::new(1e-10, 1e-13)?.solve(rhs, seed, (0.0, span), &events)
}

/// Largest `gamma` in `(2, gamma_max]` with a concave scan, found by bisection
/// under the assumption that concavity is lost only once as `gamma` grows.
/// Heuristic: the scan is sampled, not exhaustive.
pub fn gamma0_search(beta: f64, p: f64, gamma_max: f64, n_samples: usize) -> Result<f64> {
    if !(gamma_max > 2.0) {
        return Err(Error::InvalidParameter {
            name: "gamma_max",
            value: gamma_max,
            reason: "must exceed 2",
        });
    }
    let concave = |g: f64| -> Result<bool> {
        let params = ModelParams::new(g, beta, p);
        Ok(concavity_scan(&params, n_samples)?.is_concave)
    };
    if concave(gamma_max)? {
        return Ok(gamma_max);
    }
    let mut lo = 2.0 + 1e-6 * (gamma_max - 2.0);
    if !concave(lo)? {
        return Err(Error::Domain {
            name: "gamma",
            value: lo,
            reason: "source is not concave even next to gamma = 2",
        });
    }
    let mut hi = gamma_max;
    while hi - lo > 1e-8 * hi {
        let mid = 0.5 * (lo + hi);
        if concave(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
