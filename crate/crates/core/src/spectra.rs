//! Linearizations of the planar traveling-wave flow at `A` and `B`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::{excited_state, Equilibrium, EquilibriumLabel, DEFAULT_ROOT_TOL};
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Imaginary parts below this are treated as zero when classifying.
pub const IMAG_TOL: f64 = 1e-12;

pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Saddle,
    UnstableNode,
    UnstableSpiral,
    StableNode,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub classification: Classification,
}

/// Partial derivatives of `(f1, f2)` at `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialsAtB {
    pub f1u: f64,
    pub f1v: f64,
    pub f2u: f64,
    pub f2v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaThresholds {
    pub omega1: f64,
    pub omega2: f64,
    /// Set when `p = 0`, where the spiral window closes to a point.
    pub degenerate: bool,
}

/// Analytic Jacobian of [`ModelParams::reduced_rhs`].
pub fn jacobian_reduced(u: f64, v: f64, params: &ModelParams) -> Result<Mat2> {
    if !(params.c != 0.0 && params.c.is_finite()) {
        return Err(Error::InvalidSpeed { c: params.c });
    }
    let relief = params.relief(u)?;
    let s = params.switch(v);
    let ds = params.switch_prime(v);
    let g = params.gamma;
    let (w, c) = (params.omega, params.c);
    Ok([
        [
            -(w / c) * (g * s * (1.0 - 2.0 * u) - 1.0),
            -(w / c) * g * ds * u * (1.0 - u),
        ],
        [
            (1.0 / c) * params.p * relief / (1.0 + u) * v,
            (1.0 / c) * relief,
        ],
    ])
}

/// Classifies a pair of eigenvalues.
pub fn classify(l1: Complex64, l2: Complex64) -> Classification {
    let complex = l1.im.abs() > IMAG_TOL || l2.im.abs() > IMAG_TOL;
    if complex {
        return if l1.re > 0.0 && l2.re > 0.0 {
            Classification::UnstableSpiral
        } else {
            Classification::Degenerate
        };
    }
    let (a, b) = (l1.re, l2.re);
    if a == 0.0 || b == 0.0 {
        Classification::Degenerate
    } else if (a > 0.0) != (b > 0.0) {
        Classification::Saddle
    } else if a > 0.0 {
        Classification::UnstableNode
    } else {
        Classification::StableNode
    }
}

/// Eigenvalues of a real 2x2 matrix, ordered with the smaller real part first.
pub fn eigen_2x2(m: &Mat2) -> Spectrum {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let diff = m[0][0] - m[1][1];
    let disc = diff * diff + 4.0 * m[0][1] * m[1][0];
    let (l1, l2) = if disc >= 0.0 {
        let r = disc.sqrt();
        // Avoid cancellation in the smaller-magnitude root.
        let big = 0.5 * (tr + tr.signum() * r);
        let small = if big != 0.0 {
            det / big
        } else {
            0.5 * (tr - r)
        };
        let (a, b) = if big <= small {
            (big, small)
        } else {
            (small, big)
        };
        (Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    } else {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(0.5 * tr, -im), Complex64::new(0.5 * tr, im))
    };
    Spectrum {
        lambda1: l1,
        lambda2: l2,
        classification: classify(l1, l2),
    }
}

/// Spectrum of the linearization at `A = (0, 1)`.
pub fn eigen_a(params: &ModelParams) -> Result<Spectrum> {
    params.validate_wave()?;
    Ok(eigen_2x2(&jacobian_reduced(0.0, 1.0, params)?))
}

/// Partials at `B` from the direct (unsimplified) expressions.
pub fn partials_at_b(params: &ModelParams, eq: &Equilibrium) -> Result<PartialsAtB> {
    let (u, v) = (eq.u_star, eq.v_star);
    if eq.label != EquilibriumLabel::ExcitedB || !(u < 1.0) {
        return Err(Error::Domain {
            name: "ubar",
            value: u,
            reason: "partials are defined at the excited state with ubar < 1",
        });
    }
    let e = (-params.beta * (v - 1.0)).exp();
    let relief = params.relief(u)?;
    Ok(PartialsAtB {
        f1u: (params.gamma - 1.0 - e) / (1.0 + e),
        f1v: -u * params.beta * e / (1.0 + e),
        f2u: params.p * relief / (1.0 + u) * v,
        f2v: relief,
    })
}

/// Partials at `B` from the closed forms that use the equilibrium relations.
pub fn partials_at_b_simplified(params: &ModelParams, u_bar: f64) -> Result<PartialsAtB> {
    if !(u_bar < 1.0 && u_bar > -1.0) {
        return Err(Error::Domain {
            name: "ubar",
            value: u_bar,
            reason: "requires -1 < ubar < 1",
        });
    }
    let g = params.gamma;
    Ok(PartialsAtB {
        f1u: u_bar / (1.0 - u_bar),
        f1v: -(params.beta * u_bar / g) * (g - 1.0 / (1.0 - u_bar)),
        f2u: params.p / (1.0 + u_bar),
        f2v: params.relief(u_bar)?,
    })
}

/// Discriminant `D(omega) = (f2v - omega f1u)^2 + 4 omega f1v f2u`.
pub fn discriminant(b: &PartialsAtB, omega: f64) -> f64 {
    let d = b.f2v - omega * b.f1u;
    d * d + 4.0 * omega * b.f1v * b.f2u
}

/// Spectrum at `B` from the closed-form eigenvalue expression.
pub fn eigen_b(params: &ModelParams) -> Result<Spectrum> {
    params.validate_wave()?;
    let eq = excited_state(params, DEFAULT_ROOT_TOL)?;
    let b = partials_at_b(params, &eq)?;
    let w = params.omega;
    let tr = b.f2v + w * b.f1u;
    let disc = discriminant(&b, w);
    let two_c = 2.0 * params.c;
    let (l1, l2) = if disc >= 0.0 {
        let r = disc.sqrt();
        (
            Complex64::new((tr - r) / two_c, 0.0),
            Complex64::new((tr + r) / two_c, 0.0),
        )
    } else {
        let im = (-disc).sqrt() / two_c;
        (
            Complex64::new(tr / two_c, -im),
            Complex64::new(tr / two_c, im),
        )
    };
    Ok(Spectrum {
        lambda1: l1,
        lambda2: l2,
        classification: classify(l1, l2),
    })
}

/// Closed-form zeros of the discriminant in `omega`.
pub fn omega_thresholds_closed_form(b: &PartialsAtB) -> OmegaThresholds {
    let a = b.f1u * b.f1u;
    let mid = b.f1u * b.f2v - 2.0 * b.f1v * b.f2u;
    let rad = (-b.f1u * b.f1v * b.f2u * b.f2v + b.f1v * b.f1v * b.f2u * b.f2u).max(0.0);
    let r = 2.0 * rad.sqrt();
    OmegaThresholds {
        omega1: (mid - r) / a,
        omega2: (mid + r) / a,
        degenerate: b.f2u == 0.0,
    }
}

fn bisect_disc(b: &PartialsAtB, mut lo: f64, mut hi: f64) -> f64 {
    let s_lo = discriminant(b, lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (discriminant(b, mid) > 0.0) == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Zeros of the discriminant located by bracketing around its minimum.
///
/// `D` is a convex quadratic in `omega`, minimal at
/// `omega_m = (f1u f2v - 2 f1v f2u) / f1u^2`; each root is bisected on one
/// side of `omega_m`.
pub fn omega_thresholds_by_root_find(b: &PartialsAtB) -> Option<(f64, f64)> {
    let wm = (b.f1u * b.f2v - 2.0 * b.f1v * b.f2u) / (b.f1u * b.f1u);
    if !(wm > 0.0) || discriminant(b, wm) >= 0.0 {
        return None;
    }
    let lo = bisect_disc(b, 0.0, wm);
    let mut hi_end = 2.0 * wm;
    while discriminant(b, hi_end) < 0.0 {
        hi_end *= 2.0;
    }
    let hi = bisect_disc(b, wm, hi_end);
    Some((lo, hi))
}

/// The spiral window `(omega1, omega2)` for the current `gamma, beta, p`.
pub fn omega_thresholds(params: &ModelParams) -> Result<OmegaThresholds> {
    params.validate_analysis()?;
    let eq = excited_state(params, DEFAULT_ROOT_TOL)?;
    let b = partials_at_b(params, &eq)?;
    let closed = omega_thresholds_closed_form(&b);
    if closed.degenerate {
        return Ok(closed);
    }
    if let Some((w1, w2)) = omega_thresholds_by_root_find(&b) {
        let scale = closed.omega2.abs().max(1.0);
        debug_assert!((w1 - closed.omega1).abs() <= 1e-8 * scale);
        debug_assert!((w2 - closed.omega2).abs() <= 1e-8 * scale);
    }
    Ok(closed)
}
