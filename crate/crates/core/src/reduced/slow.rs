//! The four-dimensional traveling-wave system with small diffusion.
//!
//! With `epsilon = d1` and `mu = d2 / d1` the profile equations are
//!
//! ```text
//! u1' = u2
//! epsilon u2' = -c u2 - omega (gamma s(v1) u1 (1 - u1) - u1)
//! v1' = v2
//! epsilon mu v2' = -c v2 - 1 + (1 + u1)^p v1
//! ```
//!
//! As `epsilon -> 0` solutions collapse onto the critical manifold where
//! `u2` and `v2` are slaved to `(u1, v1)`, and the flow there is the planar
//! reduced flow.

use super::ode::DormandPrince;
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowSystem {
    pub params: ModelParams,
    pub epsilon: f64,
    pub mu: f64,
}

impl SlowSystem {
    pub fn new(params: ModelParams, epsilon: f64, mu: f64) -> Result<Self> {
        params.validate_wave()?;
        for (name, value) in [("epsilon", epsilon), ("mu", mu)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
        }
        Ok(Self {
            params,
            epsilon,
            mu,
        })
    }

    fn bracket(&self, u1: f64, v1: f64) -> (f64, f64) {
        let p = &self.params;
        let ru = p.gamma * p.switch(v1) * u1 * (1.0 - u1) - u1;
        let rv = -1.0 + (1.0 + u1).powf(p.p) * v1;
        (ru, rv)
    }

    /// Right-hand side in the slow variable `xi`.
    pub fn rhs(&self, y: &[f64; 4]) -> [f64; 4] {
        let [u1, u2, v1, v2] = *y;
        let (ru, rv) = self.bracket(u1, v1);
        let c = self.params.c;
        [
            u2,
            (-c * u2 - self.params.omega * ru) / self.epsilon,
            v2,
            (-c * v2 + rv) / (self.epsilon * self.mu),
        ]
    }

    /// Lifts a planar point onto the critical manifold.
    pub fn embed(&self, u: f64, v: f64) -> [f64; 4] {
        let (ru, rv) = self.bracket(u, v);
        let c = self.params.c;
        [u, -(self.params.omega / c) * ru, v, rv / c]
    }

    /// Distance of a state from the critical manifold in the slaved components.
    pub fn critical_residual(&self, y: &[f64; 4]) -> f64 {
        let m = self.embed(y[0], y[2]);
        (y[1] - m[1]).abs().max((y[3] - m[3]).abs())
    }

    /// Largest distance between the four-dimensional flow started on the
    /// critical manifold at `start` and the planar reduced flow started at
    /// the same point, compared at `samples` equally spaced values of `xi`
    /// in `(0, length]`.
    pub fn orbit_deviation(&self, start: [f64; 2], length: f64, samples: usize) -> Result<f64> {
        if !(length > 0.0) || samples == 0 {
            return Err(Error::InvalidParameter {
                name: "length",
                value: length,
                reason: "needs a positive window and at least one sample",
            });
        }
        let params = self.params;
        let planar =
            move |_: f64, y: &[f64; 2]| params.reduced_rhs(y[0], y[1]).unwrap_or([f64::NAN; 2]);
        let full = |_: f64, y: &[f64; 4]| self.rhs(y);
        let mut dp2 = DormandPrince::<2>::new(1e-12, 1e-14)?;
        let mut dp4 = DormandPrince::<4>::new(1e-10, 1e-13)?;
        let mut y2 = start;
        let mut y4 = self.embed(start[0], start[1]);
        let mut x = 0.0;
        let mut worst = 0.0f64;
        for k in 1..=samples {
            let xe = length * k as f64 / samples as f64;
            y2 = dp2.advance(planar, x, y2, xe)?;
            y4 = dp4.advance(full, x, y4, xe)?;
            x = xe;
            let d = (y4[0] - y2[0]).hypot(y4[2] - y2[1]);
            worst = worst.max(d);
        }
        Ok(worst)
    }
}
