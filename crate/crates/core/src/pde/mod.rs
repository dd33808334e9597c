//! Finite-difference solver for the moving-frame reaction-diffusion system
//! and diagnostics for the fronts it produces.

pub mod diagnostics;
pub mod scheme;
pub mod tridiag;

pub use diagnostics::{
    derivative_sign_changes, end_state_errors, front_position, measure_front_speed, neumann_defect,
    stationarity_residual, stationarity_series, FrontSpeed,
};
pub use scheme::{
    build_operators, build_operators_with, simulate, step, FieldState, GridConfig, InitialData,
    Kinetics, Mode, Reaction, Scaling, SimulationConfig, SimulationRun, Stencil, Stepper,
    TridiagonalPair, POSITIVITY_TOL,
};
pub use tridiag::{thomas_solve, ThomasSolver, Tridiagonal};
