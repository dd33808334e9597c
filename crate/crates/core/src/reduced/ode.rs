//! Adaptive Dormand–Prince 5(4) integrator over fixed-size states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
/// Steps shorter than this fraction of the span are treated as underflow.
const UNDERFLOW_FRACTION: f64 = 1e-14;
pub const DEFAULT_MAX_STEPS: usize = 2_000_000;

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// A target event (for example entry into a capture ball) fired.
    ReachedTarget,
    /// A domain guard fired.
    LeftDomain,
    /// The end of the requested span was reached.
    SpanEnd,
    /// The step budget was exhausted.
    MaxSteps,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint<const N: usize> {
    pub xi: f64,
    #[serde(with = "serde_arrays")]
    pub state: [f64; N],
}

mod serde_arrays {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer, const N: usize>(a: &[f64; N], s: S) -> Result<S::Ok, S::Error> {
        a.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>, const N: usize>(
        d: D,
    ) -> Result<[f64; N], D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        v.try_into()
            .map_err(|_| serde::de::Error::custom("wrong state dimension"))
    }
}

/// Accepted integration steps in order of the independent variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<const N: usize> {
    pub points: Vec<TrajectoryPoint<N>>,
    pub termination: Termination,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> &TrajectoryPoint<N> {
        self.points
            .last()
            .expect("trajectory holds at least the initial point")
    }
}

type Trigger<'a, const N: usize> = Box<dyn Fn(f64, &[f64; N]) -> bool + 'a>;

/// A stopping condition checked after every accepted step.
pub struct Event<'a, const N: usize> {
    pub kind: Termination,
    trigger: Trigger<'a, N>,
}

impl<'a, const N: usize> Event<'a, N> {
    pub fn new(kind: Termination, trigger: impl Fn(f64, &[f64; N]) -> bool + 'a) -> Self {
        Self {
            kind,
            trigger: Box::new(trigger),
        }
    }

    /// Fires once the Euclidean distance to `center` drops to `radius`.
    pub fn enter_ball(center: [f64; N], radius: f64) -> Self {
        Self::new(Termination::ReachedTarget, move |_, y| {
            distance(y, &center) <= radius
        })
    }

    /// Fires when any component leaves the box `[lo, hi]`.
    pub fn leave_box(lo: [f64; N], hi: [f64; N]) -> Self {
        Self::new(Termination::LeftDomain, move |_, y| {
            y.iter()
                .zip(lo.iter().zip(hi.iter()))
                .any(|(v, (a, b))| *v < *a || *v > *b)
        })
    }

    fn fires(&self, xi: f64, y: &[f64; N]) -> bool {
        (self.trigger)(xi, y)
    }
}

/// Euclidean distance between two states.
pub fn distance<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (w, k) in terms {
            acc += w * k[i];
        }
        *o += h * acc;
    }
    out
}

/// Integrator holding the adaptive step-size state of one run.
#[derive(Debug, Clone)]
pub struct DormandPrince<const N: usize> {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub max_step: f64,
    h: Option<f64>,
    accepted: usize,
    rejected: usize,
}

impl<const N: usize> DormandPrince<N> {
    pub fn new(rtol: f64, atol: f64) -> Result<Self> {
        for (name, value) in [("rtol", rtol), ("atol", atol)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "tolerance must be positive",
                });
            }
        }
        Ok(Self {
            rtol,
            atol,
            max_steps: DEFAULT_MAX_STEPS,
            max_step: f64::INFINITY,
            h: None,
            accepted: 0,
            rejected: 0,
        })
    }

    pub fn with_max_steps(mut self, n: usize) -> Self {
        self.max_steps = n;
        self
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h.abs();
        self
    }

    pub fn accepted_steps(&self) -> usize {
        self.accepted
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    fn error_norm(&self, y: &[f64; N], y_new: &[f64; N], err: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            let e = err[i] / sc;
            acc += e * e;
        }
        (acc / N as f64).sqrt()
    }

    fn initial_step<F>(&self, rhs: &mut F, x: f64, y: &[f64; N], f0: &[f64; N], dir: f64) -> f64
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let scale = |i: usize| self.atol + self.rtol * y[i].abs();
        let d0 = (0..N)
            .map(|i| (y[i] / scale(i)).powi(2))
            .sum::<f64>()
            .sqrt();
        let d1 = (0..N)
            .map(|i| (f0[i] / scale(i)).powi(2))
            .sum::<f64>()
            .sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1 = axpy(y, dir * h0, &[(1.0, f0)]);
        let f1 = rhs(x + dir * h0, &y1);
        let d2 = (0..N)
            .map(|i| ((f1[i] - f0[i]) / scale(i)).powi(2))
            .sum::<f64>()
            .sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.max_step)
    }

    /// One trial step; returns the new state, its derivative and the error norm.
    fn trial<F>(
        &self,
        rhs: &mut F,
        x: f64,
        y: &[f64; N],
        k1: &[f64; N],
        h: f64,
    ) -> ([f64; N], [f64; N], f64)
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let k2 = rhs(x + C2 * h, &axpy(y, h, &[(A21, k1)]));
        let k3 = rhs(x + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = rhs(
            x + C4 * h,
            &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            x + C5 * h,
            &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            x + h,
            &axpy(
                y,
                h,
                &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            y,
            h,
            &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = rhs(x + h, &y_new);
        let mut err = [0.0; N];
        for i in 0..N {
            err[i] =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let norm = if y_new.iter().chain(k7.iter()).all(|v| v.is_finite()) {
            self.error_norm(y, &y_new, &err)
        } else {
            f64::INFINITY
        };
        (y_new, k7, norm)
    }

    /// Integrates from `x0` over `span`, recording every accepted step and
    /// stopping at the first event that fires.
    pub fn solve<F>(
        &mut self,
        mut rhs: F,
        y0: [f64; N],
        span: (f64, f64),
        events: &[Event<'_, N>],
    ) -> Result<Trajectory<N>>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let (x0, x1) = span;
        if let Some(i) = y0.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                field: "y0",
                index: i,
                tau: x0,
            });
        }
        let mut points = vec![TrajectoryPoint { xi: x0, state: y0 }];
        if x1 == x0 {
            return Ok(Trajectory {
                points,
                termination: Termination::SpanEnd,
            });
        }
        let dir = (x1 - x0).signum();
        let length = (x1 - x0).abs();
        let h_min = UNDERFLOW_FRACTION * length;
        let mut x = x0;
        let mut y = y0;
        let mut k1 = rhs(x, &y);
        let mut h = self
            .h
            .unwrap_or_else(|| self.initial_step(&mut rhs, x, &y, &k1, dir))
            .abs()
            .min(self.max_step);
        let mut steps = 0usize;
        loop {
            if steps >= self.max_steps {
                return Ok(Trajectory {
                    points,
                    termination: Termination::MaxSteps,
                });
            }
            let remaining = (x1 - x).abs();
            let last = h >= remaining;
            let h_try = if last { remaining } else { h };
            let (y_new, k7, err) = self.trial(&mut rhs, x, &y, &k1, dir * h_try);
            if err <= 1.0 {
                steps += 1;
                self.accepted += 1;
                x = if last { x1 } else { x + dir * h_try };
                y = y_new;
                k1 = k7;
                points.push(TrajectoryPoint { xi: x, state: y });
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // A truncated final step says nothing about the natural step size.
                if !(last && h_try < h) {
                    h = (h_try * factor).min(self.max_step);
                }
                self.h = Some(h);
                if let Some(ev) = events.iter().find(|e| e.fires(x, &y)) {
                    return Ok(Trajectory {
                        points,
                        termination: ev.kind,
                    });
                }
                if last {
                    return Ok(Trajectory {
                        points,
                        termination: Termination::SpanEnd,
                    });
                }
            } else {
                self.rejected += 1;
                let factor = if err.is_finite() {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0)
                } else {
                    MIN_FACTOR
                };
                h = h_try * factor;
                if h < h_min {
                    if !err.is_finite() {
                        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
                            return Err(Error::NonFinite {
                                field: "state",
                                index: i,
                                tau: x,
                            });
                        }
                    }
                    return Err(Error::StepUnderflow { xi: x, h });
                }
            }
        }
    }

    /// Integrates from `x` to exactly `x_end` and returns the final state,
    /// keeping the step size for the next call.
    pub fn advance<F>(&mut self, rhs: F, x: f64, y: [f64; N], x_end: f64) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        let budget = self.max_steps;
        let traj = self.solve(rhs, y, (x, x_end), &[])?;
        match traj.termination {
            Termination::SpanEnd => Ok(traj.last().state),
            _ => Err(Error::StepUnderflow {
                xi: traj.last().xi,
                h: (x_end - traj.last().xi).abs() / budget as f64,
            }),
        }
    }
}

/// Integrates `rhs` over `span` with a fresh Dormand–Prince integrator.
pub fn integrate<F, const N: usize>(
    rhs: F,
    y0: [f64; N],
    span: (f64, f64),
    rtol: f64,
    atol: f64,
    events: &[Event<'_, N>],
) -> Result<Trajectory<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    DormandPrince::new(rtol, atol)?.solve(rhs, y0, span, events)
}
