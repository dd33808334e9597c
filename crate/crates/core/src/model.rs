//! Model parameters and kinetic terms.
//!
//! `u` is the level of rioting activity and `v` the social tension. The
//! kinetics are written in the tension-time scaling used by the PDE solver:
//!
//! ```text
//! f_u = omega * (gamma * s(v) * u * (1 - u) - u)
//! f_v = 1 - (1 + u)^p * v
//! s(v) = 1 / (1 + exp(-beta * (v - alpha)))
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent magnitude beyond which the logistic switch is taken as saturated.
const LOGISTIC_CUTOFF: f64 = 700.0;

/// Physical and wave parameters of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    /// Recruitment gain.
    pub gamma: f64,
    /// Steepness of the tension switch.
    pub beta: f64,
    /// Strength of the tension relief produced by rioting.
    pub p: f64,
    /// Ratio of tension to rioting time scales.
    pub omega: f64,
    /// Tension threshold of the switch.
    pub alpha: f64,
    /// Traveling-wave speed.
    pub c: f64,
    /// Diffusivity of the rioting field.
    pub d1: f64,
    /// Diffusivity of the tension field.
    pub d2: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            gamma: 4.0,
            beta: 1.0,
            p: 2.0,
            omega: 0.1,
            alpha: 1.0,
            c: 1.0,
            d1: 1e-3,
            d2: 2e-3,
        }
    }
}

/// Values of both kinetic terms at one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KineticsValue {
    pub fu: f64,
    pub fv: f64,
}

/// Numerically safe logistic function `1 / (1 + exp(-x))`.
pub fn logistic(x: f64) -> f64 {
    if x > LOGISTIC_CUTOFF {
        1.0
    } else if x < -LOGISTIC_CUTOFF {
        0.0
    } else if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}

impl ModelParams {
    pub fn new(gamma: f64, beta: f64, p: f64) -> Self {
        Self {
            gamma,
            beta,
            p,
            ..Self::default()
        }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_speed(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_diffusion(mut self, d1: f64, d2: f64) -> Self {
        self.d1 = d1;
        self.d2 = d2;
        self
    }

    /// Checks finiteness and sign constraints shared by every operation.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma", self.gamma),
            ("beta", self.beta),
            ("p", self.p),
            ("alpha", self.alpha),
            ("c", self.c),
            ("d1", self.d1),
            ("d2", self.d2),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(invalid(name, value, "must be finite"));
            }
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidOmega { omega: self.omega });
        }
        if self.beta <= 0.0 {
            return Err(invalid("beta", self.beta, "must be positive"));
        }
        if self.d1 < 0.0 {
            return Err(invalid("d1", self.d1, "must be non-negative"));
        }
        if self.d2 < 0.0 {
            return Err(invalid("d2", self.d2, "must be non-negative"));
        }
        Ok(())
    }

    /// Validation for the equilibrium and wave analysis, which assumes the
    /// switch threshold sits at the relaxed tension `v = 1`.
    pub fn validate_analysis(&self) -> Result<()> {
        self.validate()?;
        if self.alpha != 1.0 {
            return Err(invalid(
                "alpha",
                self.alpha,
                "equilibrium and wave analysis requires alpha = 1",
            ));
        }
        Ok(())
    }

    /// Like [`validate_analysis`](Self::validate_analysis), additionally
    /// requiring a positive finite wave speed.
    pub fn validate_wave(&self) -> Result<()> {
        self.validate_analysis()?;
        if !(self.c > 0.0) {
            return Err(Error::InvalidSpeed { c: self.c });
        }
        Ok(())
    }

    /// The logistic switch `s(v)`.
    pub fn switch(&self, v: f64) -> f64 {
        logistic(self.beta * (v - self.alpha))
    }

    /// Derivative `s'(v) = beta * s * (1 - s)`.
    pub fn switch_prime(&self, v: f64) -> f64 {
        let s = self.switch(v);
        self.beta * s * (1.0 - s)
    }

    /// Recruitment rate `r(v) = omega * gamma * s(v)`.
    pub fn sigmoid_r(&self, v: f64) -> f64 {
        self.omega * self.gamma * self.switch(v)
    }

    /// Tension relief factor `(1 + u)^p`.
    pub fn relief(&self, u: f64) -> Result<f64> {
        if u <= -1.0 || !u.is_finite() {
            return Err(Error::Domain {
                name: "u",
                value: u,
                reason: "requires u > -1",
            });
        }
        Ok((1.0 + u).powf(self.p))
    }

    /// Tension decay factor `h(u) = (1 + u)^(-p)`, the tension nullcline.
    pub fn decay_h(&self, u: f64) -> Result<f64> {
        Ok(1.0 / self.relief(u)?)
    }

    /// Both kinetic terms in the tension-time scaling.
    pub fn kinetics(&self, u: f64, v: f64) -> Result<KineticsValue> {
        let relief = self.relief(u)?;
        Ok(KineticsValue {
            fu: self.omega * (self.gamma * self.switch(v) * u * (1.0 - u) - u),
            fv: 1.0 - relief * v,
        })
    }

    /// Kinetics in the rioting-time scaling, where the tension equation
    /// carries the factor `1 / omega` instead.
    pub fn tension_scaled_kinetics(&self, u: f64, v: f64) -> Result<KineticsValue> {
        let k = self.kinetics(u, v)?;
        Ok(KineticsValue {
            fu: k.fu / self.omega,
            fv: k.fv / self.omega,
        })
    }

    /// The rioting-free components `(f1, f2)` of the traveling-wave flow,
    /// before division by the speed.
    pub fn wave_components(&self, u: f64, v: f64) -> Result<[f64; 2]> {
        let relief = self.relief(u)?;
        let f1 = -(self.gamma * self.switch(v) * u * (1.0 - u) - u);
        let f2 = relief * v - 1.0;
        Ok([f1, f2])
    }

    /// Right-hand side of the planar traveling-wave flow in the limit of
    /// vanishing diffusion.
    pub fn reduced_rhs(&self, u: f64, v: f64) -> Result<[f64; 2]> {
        if !(self.c != 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidSpeed { c: self.c });
        }
        let [f1, f2] = self.wave_components(u, v)?;
        Ok([self.omega * f1 / self.c, f2 / self.c])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_is_symmetric_and_saturates() {
        assert_eq!(logistic(0.0), 0.5);
        for x in [0.3, 2.0, 40.0, 710.0] {
            assert!((logistic(x) + logistic(-x) - 1.0).abs() < 1e-15);
        }
        assert_eq!(logistic(1e6), 1.0);
        assert_eq!(logistic(-1e6), 0.0);
    }

    #[test]
    fn kinetics_vanish_at_relaxed_state() {
        let params = ModelParams::default();
        let k = params.kinetics(0.0, 1.0).unwrap();
        assert_eq!(k.fu, 0.0);
        assert_eq!(k.fv, 0.0);
    }

    #[test]
    fn switch_is_half_at_threshold() {
        let params = ModelParams::default();
        assert_eq!(params.switch(1.0), 0.5);
        assert!((params.sigmoid_r(1.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn decay_rejects_u_below_minus_one() {
        let params = ModelParams::default();
        assert!(matches!(params.decay_h(-1.0), Err(Error::Domain { .. })));
        assert!((params.decay_h(1.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn reduced_rhs_rejects_zero_speed() {
        let params = ModelParams::default().with_speed(0.0);
        assert!(matches!(
            params.reduced_rhs(0.1, 0.9),
            Err(Error::InvalidSpeed { .. })
        ));
    }

    #[test]
    fn reduced_rhs_matches_negated_kinetics() {
        let params = ModelParams::new(4.0, 1.0, 2.0)
            .with_omega(0.7)
            .with_speed(1.3);
        let (u, v) = (0.2, 0.8);
        let k = params.kinetics(u, v).unwrap();
        let f = params.reduced_rhs(u, v).unwrap();
        assert!((f[0] + k.fu / params.c).abs() < 1e-15);
        assert!((f[1] + k.fv / params.c).abs() < 1e-15);
    }

    #[test]
    fn validation_flags_bad_fields() {
        let params = ModelParams {
            omega: 0.0,
            ..Default::default()
        };
        assert!(matches!(params.validate(), Err(Error::InvalidOmega { .. })));
        let params = ModelParams {
            beta: f64::NAN,
            ..Default::default()
        };
        assert!(params.validate().is_err());
        let params = ModelParams {
            alpha: 0.5,
            ..Default::default()
        };
        assert!(params.validate().is_ok());
        assert!(params.validate_analysis().is_err());
    }
}
