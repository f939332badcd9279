//! Action-minimizing heteroclinic fronts in FPU-type chains.
//!
//! A front of the chain with speed σ = 1 between the strains ∓1 solves the
//! fixed-point problem W = 𝒜Φ′(𝒜W), where 𝒜 is the unit-window average.
//! The solutions are computed as minimizers of the action ℒ = 𝒩 + 𝒫 by an
//! explicit Euler gradient flow on a uniform grid, checked against the
//! macroscopic jump conditions, and replayed on the lattice.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x <= tol)` also rejects NaN

pub mod action;
pub mod cli;
pub mod grid;
pub mod lattice;
pub mod macroscopic;
pub mod phases;
pub mod potential;
pub mod solver;

pub use action::{ActionError, ActionReport};
pub use grid::{GridError, GridProfile, GridSpec};
pub use macroscopic::{FrontData, MacroError};
pub use potential::{Family, Potential, PotentialError};
pub use solver::{Outcome, RunResult, SolverConfig, SolverError};
