//! Traveling fronts of a reaction-diffusion model of civil unrest.
//!
//! The crate covers the constant states of the kinetics, their linear
//! stability in the traveling-wave frame, shooting for heteroclinic fronts,
//! the scalar Fisher-KPP reduction, and a Crank–Nicolson solver for the
//! full system.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod equilibria;
pub mod error;
pub mod kpp;
pub mod model;
pub mod pde;
pub mod reduced;
pub mod spectra;

pub use error::{Error, Result};
pub use model::{KineticsValue, ModelParams};
