//! Crank–Nicolson discretization with explicit reaction.
//!
//! For `w_t = d w_xx + c w_x + r` on `[0, L]` with zero-flux ends, each step
//! solves `M w^{l+1} = N w^l + 4 dtau r(w^l)` where, with `lambda = d dtau / dx^2`,
//! the interior rows are
//!
//! ```text
//! M: ( -lambda (2 - c dx),  4 (1 + lambda),  -lambda (2 + c dx) )
//! N: (  lambda (2 - c dx),  4 (1 - lambda),   lambda (2 + c dx) )
//! ```
//!
//! The end rows fold the ghost node `w_{-1} = w_1` (and likewise at `x = L`)
//! onto the single interior neighbor.

use serde::{Deserialize, Serialize};

use super::tridiag::{ThomasSolver, Tridiagonal};
use crate::equilibria::{solve_ubar, DEFAULT_ROOT_TOL};
use crate::error::{Error, Result};
use crate::kpp::f_kpp;
use crate::model::{logistic, ModelParams};

/// Largest allowed `dtau * |df/du|` before a step-size warning is raised.
pub const REACTION_STIFFNESS_LIMIT: f64 = 0.5;
/// Negative values down to this size are accepted by the positivity monitor.
pub const POSITIVITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Domain length `L`.
    pub length: f64,
    /// Number of grid nodes including both ends.
    pub nx: usize,
    pub dtau: f64,
    pub t_end: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            length: 20.0,
            nx: 2001,
            dtau: 1e-3,
            t_end: 20.0,
        }
    }
}

impl GridConfig {
    pub fn new(length: f64, nx: usize, dtau: f64, t_end: f64) -> Result<Self> {
        let g = Self {
            length,
            nx,
            dtau,
            t_end,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 3 {
            return Err(Error::InvalidParameter {
                name: "nx",
                value: self.nx as f64,
                reason: "needs at least 3 nodes",
            });
        }
        for (name, value) in [("length", self.length), ("dtau", self.dtau)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t_end",
                value: self.t_end,
                reason: "must be non-negative",
            });
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.nx - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    /// Number of steps needed to reach `t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dtau).round() as usize
    }
}

/// Exponential front `u = A exp(-k x)` and uniform tension `v = B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub amplitude: f64,
    pub decay: f64,
    pub tension: f64,
}

impl InitialData {
    /// `A = ubar`, `k = 5`, `B = 1`.
    pub fn standard(params: &ModelParams) -> Result<Self> {
        Ok(Self {
            amplitude: solve_ubar(params, DEFAULT_ROOT_TOL)?,
            decay: 5.0,
            tension: 1.0,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("amplitude", self.amplitude),
            ("decay", self.decay),
            ("tension", self.tension),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
        }
        Ok(())
    }
}

/// Discrete profiles at one time level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub tau: f64,
    pub dx: f64,
}

impl FieldState {
    pub fn initial(grid: &GridConfig, init: &InitialData) -> Result<Self> {
        grid.validate()?;
        init.validate()?;
        let u = (0..grid.nx)
            .map(|i| init.amplitude * (-init.decay * grid.x(i)).exp())
            .collect();
        Ok(Self {
            u,
            v: vec![init.tension; grid.nx],
            tau: 0.0,
            dx: grid.dx(),
        })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    fn check_finite(&self) -> Result<()> {
        for (field, data) in [("u", &self.u), ("v", &self.v)] {
            if let Some(index) = data.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    field,
                    index,
                    tau: self.tau,
                });
            }
        }
        Ok(())
    }
}

/// How the advection term is scaled relative to diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Stencil {
    /// Off-diagonals `lambda (2 +/- c dx)`. The advective part
    /// scales with `d`, so it represents speed `d * c`; identical to
    /// [`Stencil::Consistent`] when `d = 1`.
    #[default]
    DiffusionScaled,
    /// Off-diagonals `2 lambda +/- c dtau / dx`, which represents speed `c`
    /// for every `d`.
    Consistent,
}

/// Which time scaling the kinetics use in the full system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Scaling {
    /// `f = omega (gamma s u (1 - u) - u)`, `g = 1 - (1 + u)^p v`.
    #[default]
    Bandwagon,
    /// `f = gamma s u (1 - u) - u`, `g = (1 - (1 + u)^p v) / omega`.
    Tension,
}

/// Single-field or coupled evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Mode {
    /// Both fields evolve.
    #[default]
    System,
    /// Only `u` evolves under the scalar KPP source; `v` is slaved to
    /// `(1 + u)^(-p)` for output.
    Scalar,
}

/// The matrices `M` and `N` for one field.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalPair {
    pub m: Tridiagonal,
    pub n: Tridiagonal,
    pub lambda: f64,
}

/// Operators with the default stencil.
pub fn build_operators(grid: &GridConfig, d: f64, c: f64) -> Result<TridiagonalPair> {
    build_operators_with(grid, d, c, Stencil::DiffusionScaled)
}

pub fn build_operators_with(
    grid: &GridConfig,
    d: f64,
    c: f64,
    stencil: Stencil,
) -> Result<TridiagonalPair> {
    grid.validate()?;
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "d",
            value: d,
            reason: "diffusion must be non-negative",
        });
    }
    if !c.is_finite() {
        return Err(Error::InvalidSpeed { c });
    }
    let dx = grid.dx();
    let lambda = d * grid.dtau / (dx * dx);
    let sigma = match stencil {
        Stencil::DiffusionScaled => {
            if (c * dx).abs() >= 2.0 {
                return Err(Error::StabilityGuard {
                    reason: "|c dx| must stay below 2",
                    value: c * dx,
                });
            }
            lambda * c * dx
        }
        Stencil::Consistent => {
            let sigma = c * grid.dtau / dx;
            if sigma != 0.0 && sigma.abs() >= 2.0 * lambda {
                return Err(Error::StabilityGuard {
                    reason: "cell Peclet number |c dx / d| must stay below 2",
                    value: if d > 0.0 { c * dx / d } else { f64::INFINITY },
                });
            }
            sigma
        }
    };
    let lo = 2.0 * lambda - sigma;
    let hi = 2.0 * lambda + sigma;
    let n = grid.nx;
    let mut m = Tridiagonal::new(vec![-lo; n], vec![4.0 * (1.0 + lambda); n], vec![-hi; n])?;
    let mut nn = Tridiagonal::new(vec![lo; n], vec![4.0 * (1.0 - lambda); n], vec![hi; n])?;
    m.sub[0] = 0.0;
    nn.sub[0] = 0.0;
    m.sup[n - 1] = 0.0;
    nn.sup[n - 1] = 0.0;
    m.sup[0] = -(lo + hi);
    nn.sup[0] = lo + hi;
    m.sub[n - 1] = -(lo + hi);
    nn.sub[n - 1] = lo + hi;
    Ok(TridiagonalPair { m, n: nn, lambda })
}

/// Reaction terms `(f, g)` evaluated explicitly at the old time level.
pub trait Reaction {
    fn rates(&self, u: f64, v: f64) -> [f64; 2];

    /// `df/du`, used only for the step-size warning.
    fn du_partial(&self, u: f64, v: f64) -> f64 {
        let h = 1e-6 * (1.0 + u.abs());
        (self.rates(u + h, v)[0] - self.rates(u - h, v)[0]) / (2.0 * h)
    }
}

impl<F: Fn(f64, f64) -> [f64; 2]> Reaction for F {
    fn rates(&self, u: f64, v: f64) -> [f64; 2] {
        self(u, v)
    }
}

/// Model kinetics in one of the two time scalings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinetics {
    pub params: ModelParams,
    pub scaling: Scaling,
}

impl Kinetics {
    pub fn new(params: ModelParams, scaling: Scaling) -> Self {
        Self { params, scaling }
    }
}

impl Reaction for Kinetics {
    fn rates(&self, u: f64, v: f64) -> [f64; 2] {
        let p = &self.params;
        let s = logistic(p.beta * (v - p.alpha));
        let f = p.gamma * s * u * (1.0 - u) - u;
        let g = 1.0 - (1.0 + u).powf(p.p) * v;
        match self.scaling {
            Scaling::Bandwagon => [p.omega * f, g],
            Scaling::Tension => [f, g / p.omega],
        }
    }

    fn du_partial(&self, u: f64, v: f64) -> f64 {
        let p = &self.params;
        let s = logistic(p.beta * (v - p.alpha));
        let d = p.gamma * s * (1.0 - 2.0 * u) - 1.0;
        match self.scaling {
            Scaling::Bandwagon => p.omega * d,
            Scaling::Tension => d,
        }
    }
}

/// Reusable buffers and operators for repeated steps on one grid.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub pair_u: TridiagonalPair,
    pub pair_v: TridiagonalPair,
    pub dtau: f64,
    solver: ThomasSolver,
    rhs: Vec<f64>,
    out: Vec<f64>,
}

impl Stepper {
    pub fn new(
        pair_u: TridiagonalPair,
        pair_v: TridiagonalPair,
        grid: &GridConfig,
    ) -> Result<Self> {
        let n = grid.nx;
        for (name, pair) in [("u", &pair_u), ("v", &pair_v)] {
            if pair.m.len() != n || pair.n.len() != n {
                return Err(Error::GridMismatch(format!(
                    "{name}-operators have size {} but the grid has {n} nodes",
                    pair.m.len()
                )));
            }
        }
        Ok(Self {
            pair_u,
            pair_v,
            dtau: grid.dtau,
            solver: ThomasSolver::new(n),
            rhs: vec![0.0; n],
            out: vec![0.0; n],
        })
    }

    fn check_len(&self, state: &FieldState) -> Result<()> {
        if state.u.len() != self.rhs.len() || state.v.len() != self.rhs.len() {
            return Err(Error::GridMismatch(format!(
                "state has {} / {} nodes, operators {}",
                state.u.len(),
                state.v.len(),
                self.rhs.len()
            )));
        }
        Ok(())
    }

    /// Advances both fields by one step in place.
    pub fn advance(&mut self, state: &mut FieldState, reaction: &impl Reaction) -> Result<()> {
        self.check_len(state)?;
        let four_dt = 4.0 * self.dtau;
        // Reaction at level l for both fields before either is overwritten.
        let (fu, fv): (Vec<f64>, Vec<f64>) = state
            .u
            .iter()
            .zip(&state.v)
            .map(|(&u, &v)| {
                let [f, g] = reaction.rates(u, v);
                (f, g)
            })
            .unzip();

        self.pair_u.n.apply(&state.u, &mut self.rhs);
        for (r, f) in self.rhs.iter_mut().zip(&fu) {
            *r += four_dt * f;
        }
        self.solver
            .solve(&self.pair_u.m, &self.rhs, &mut self.out)?;
        std::mem::swap(&mut state.u, &mut self.out);

        self.pair_v.n.apply(&state.v, &mut self.rhs);
        for (r, g) in self.rhs.iter_mut().zip(&fv) {
            *r += four_dt * g;
        }
        self.solver
            .solve(&self.pair_v.m, &self.rhs, &mut self.out)?;
        std::mem::swap(&mut state.v, &mut self.out);

        state.tau += self.dtau;
        state.check_finite()
    }

    /// Advances `u` under the scalar source and re-slaves `v = (1 + u)^(-p)`.
    pub fn advance_scalar(&mut self, state: &mut FieldState, params: &ModelParams) -> Result<()> {
        self.check_len(state)?;
        let four_dt = 4.0 * self.dtau;
        self.pair_u.n.apply(&state.u, &mut self.rhs);
        for (r, &u) in self.rhs.iter_mut().zip(&state.u) {
            *r += four_dt * f_kpp(u, params).unwrap_or(f64::NAN);
        }
        self.solver
            .solve(&self.pair_u.m, &self.rhs, &mut self.out)?;
        std::mem::swap(&mut state.u, &mut self.out);
        for (v, &u) in state.v.iter_mut().zip(&state.u) {
            *v = (1.0 + u).powf(-params.p);
        }
        state.tau += self.dtau;
        state.check_finite()
    }
}

/// One step from `state`, returning the new state.
pub fn step(
    state: &FieldState,
    pair_u: &TridiagonalPair,
    pair_v: &TridiagonalPair,
    reaction: &impl Reaction,
    grid: &GridConfig,
) -> Result<FieldState> {
    let mut stepper = Stepper::new(pair_u.clone(), pair_v.clone(), grid)?;
    let mut next = state.clone();
    stepper.advance(&mut next, reaction)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub params: ModelParams,
    pub grid: GridConfig,
    pub initial: InitialData,
    /// Steps between stored snapshots.
    pub snapshot_every: usize,
    pub mode: Mode,
    pub stencil: Stencil,
    pub scaling: Scaling,
}

impl SimulationConfig {
    /// Coupled run with the standard initial data and the default stencil.
    pub fn new(params: ModelParams, grid: GridConfig) -> Result<Self> {
        Ok(Self {
            params,
            grid,
            initial: InitialData::standard(&params)?,
            snapshot_every: 1000,
            mode: Mode::System,
            stencil: Stencil::DiffusionScaled,
            scaling: Scaling::Bandwagon,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRun {
    /// The initial state, every `snapshot_every`-th step, and the final state.
    pub snapshots: Vec<FieldState>,
    /// Smallest values reached by either field over all steps.
    pub min_u: f64,
    pub min_v: f64,
    pub warnings: Vec<String>,
}

impl SimulationRun {
    pub fn positivity_holds(&self) -> bool {
        self.min_u >= -POSITIVITY_TOL && self.min_v >= -POSITIVITY_TOL
    }

    pub fn last(&self) -> &FieldState {
        self.snapshots
            .last()
            .expect("a run stores at least the initial state")
    }
}

fn min_of(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::INFINITY, f64::min)
}

fn stiffness(state: &FieldState, reaction: &impl Reaction, dtau: f64) -> f64 {
    state
        .u
        .iter()
        .zip(&state.v)
        .map(|(&u, &v)| dtau * reaction.du_partial(u, v).abs())
        .fold(0.0, f64::max)
}

/// Runs the configured simulation to `t_end`.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationRun> {
    let params = &config.params;
    params.validate()?;
    if params.c < 0.0 {
        return Err(Error::InvalidSpeed { c: params.c });
    }
    if config.snapshot_every == 0 {
        return Err(Error::InvalidParameter {
            name: "snapshot_every",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    let grid = &config.grid;
    let pair_u = build_operators_with(grid, params.d1, params.c, config.stencil)?;
    let pair_v = build_operators_with(grid, params.d2, params.c, config.stencil)?;
    let mut stepper = Stepper::new(pair_u, pair_v, grid)?;
    let mut state = FieldState::initial(grid, &config.initial)?;
    let kinetics = Kinetics::new(*params, config.scaling);
    let scalar_source = |u: f64, _v: f64| [f_kpp(u, params).unwrap_or(f64::NAN), 0.0];
    if config.mode == Mode::Scalar {
        for (v, &u) in state.v.iter_mut().zip(&state.u) {
            *v = (1.0 + u).powf(-params.p);
        }
    }

    let mut warnings = Vec::new();
    let mut warned = false;
    let mut check_stiffness = |state: &FieldState, warnings: &mut Vec<String>| {
        if warned {
            return;
        }
        let s = match config.mode {
            Mode::System => stiffness(state, &kinetics, grid.dtau),
            Mode::Scalar => stiffness(state, &scalar_source, grid.dtau),
        };
        if s > REACTION_STIFFNESS_LIMIT {
            warned = true;
            warnings.push(format!(
                "dtau * |df/du| reaches {s:.3} at tau = {} (explicit reaction may be unstable)",
                state.tau
            ));
        }
    };

    let mut min_u = min_of(&state.u);
    let mut min_v = min_of(&state.v);
    check_stiffness(&state, &mut warnings);
    let mut snapshots = vec![state.clone()];
    let steps = grid.steps();
    for n in 1..=steps {
        match config.mode {
            Mode::System => stepper.advance(&mut state, &kinetics)?,
            Mode::Scalar => stepper.advance_scalar(&mut state, params)?,
        }
        min_u = min_u.min(min_of(&state.u));
        min_v = min_v.min(min_of(&state.v));
        if n % config.snapshot_every == 0 || n == steps {
            check_stiffness(&state, &mut warnings);
            snapshots.push(state.clone());
        }
    }
    Ok(SimulationRun {
        snapshots,
        min_u,
        min_v,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, dtau: f64) -> GridConfig {
        GridConfig::new(1.0, nx, dtau, 1.0).unwrap()
    }

    #[test]
    fn no_transport_gives_scaled_identity() {
        let pair = build_operators(&grid(11, 0.01), 0.0, 0.0).unwrap();
        assert!(pair.m.diag.iter().all(|&d| d == 4.0));
        assert!(pair.m.sub.iter().chain(&pair.m.sup).all(|&x| x == 0.0));
        assert_eq!(pair.m, pair.n);
    }

    #[test]
    fn row_sums_without_advection() {
        let pair = build_operators(&grid(11, 0.01), 0.7, 0.0).unwrap();
        for s in pair.m.row_sums() {
            assert!((s - 4.0).abs() < 1e-12);
        }
        for s in pair.n.row_sums() {
            assert!((s - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interior_row_example() {
        // dx = 0.1, d dtau / dx^2 = 0.5
        let g = GridConfig::new(1.0, 11, 0.005, 1.0).unwrap();
        let pair = build_operators(&g, 1.0, 2.0).unwrap();
        assert!((pair.lambda - 0.5).abs() < 1e-14);
        assert!((pair.m.sub[5] + 0.9).abs() < 1e-12);
        assert!((pair.m.diag[5] - 6.0).abs() < 1e-12);
        assert!((pair.m.sup[5] + 1.1).abs() < 1e-12);
        assert!((pair.m.sup[0] + 2.0).abs() < 1e-12);
        assert!((pair.n.sup[0] - 2.0).abs() < 1e-12);
        assert!(pair.m.strictly_diagonally_dominant());
    }

    #[test]
    fn guard_rejects_large_cell_speed() {
        let g = GridConfig::new(1.0, 11, 0.005, 1.0).unwrap();
        assert!(matches!(
            build_operators(&g, 1.0, 20.0),
            Err(Error::StabilityGuard { .. })
        ));
        assert!(matches!(
            build_operators_with(&g, 0.01, 1.0, Stencil::Consistent),
            Err(Error::StabilityGuard { .. })
        ));
    }

    #[test]
    fn consistent_matches_scaled_for_unit_diffusion() {
        let g = GridConfig::new(1.0, 11, 0.005, 1.0).unwrap();
        let a = build_operators_with(&g, 1.0, 2.0, Stencil::DiffusionScaled).unwrap();
        let b = build_operators_with(&g, 1.0, 2.0, Stencil::Consistent).unwrap();
        for (x, y) in a.m.sub.iter().zip(&b.m.sub) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_are_preserved_without_reaction() {
        let g = GridConfig::new(5.0, 51, 0.01, 1.0).unwrap();
        let pu = build_operators(&g, 0.3, 1.5).unwrap();
        let pv = build_operators(&g, 0.1, 1.5).unwrap();
        let zero = |_: f64, _: f64| [0.0, 0.0];
        let state = FieldState {
            u: vec![0.37; 51],
            v: vec![1.2; 51],
            tau: 0.0,
            dx: g.dx(),
        };
        let next = step(&state, &pu, &pv, &zero, &g).unwrap();
        assert!(next.u.iter().all(|&u| (u - 0.37).abs() < 1e-14));
        assert!(next.v.iter().all(|&v| (v - 1.2).abs() < 1e-14));
        assert!((next.tau - 0.01).abs() < 1e-15);
    }

    #[test]
    fn pure_reaction_is_forward_euler() {
        let g = GridConfig::new(5.0, 21, 0.01, 1.0).unwrap();
        let params = ModelParams::new(4.0, 1.0, 2.0)
            .with_omega(0.5)
            .with_speed(0.0);
        let pu = build_operators(&g, 0.0, 0.0).unwrap();
        let pv = build_operators(&g, 0.0, 0.0).unwrap();
        let kin = Kinetics::new(params, Scaling::Bandwagon);
        let state = FieldState {
            u: (0..21).map(|i| 0.05 * i as f64 / 2.0).collect(),
            v: (0..21).map(|i| 0.5 + 0.05 * i as f64).collect(),
            tau: 0.0,
            dx: g.dx(),
        };
        let next = step(&state, &pu, &pv, &kin, &g).unwrap();
        for i in 0..21 {
            let k = params.kinetics(state.u[i], state.v[i]).unwrap();
            assert!((next.u[i] - (state.u[i] + g.dtau * k.fu)).abs() < 1e-12);
            assert!((next.v[i] - (state.v[i] + g.dtau * k.fv)).abs() < 1e-12);
        }
    }

    #[test]
    fn nan_is_reported_with_index() {
        let g = GridConfig::new(1.0, 5, 0.1, 1.0).unwrap();
        let pu = build_operators(&g, 0.0, 0.0).unwrap();
        let bad = |u: f64, _: f64| [if u > 0.5 { f64::NAN } else { 0.0 }, 0.0];
        let state = FieldState {
            u: vec![0.0, 0.0, 0.0, 1.0, 0.0],
            v: vec![0.0; 5],
            tau: 0.0,
            dx: g.dx(),
        };
        assert!(matches!(
            step(&state, &pu, &pu, &bad, &g),
            Err(Error::NonFinite { field: "u", .. })
        ));
    }
}
