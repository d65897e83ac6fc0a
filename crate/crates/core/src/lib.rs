//! Spin-selective radical-pair reaction dynamics.
//!
//! Four competing master equations ([`master`]), their quantum-jump
//! unravelings ([`jump`]), yield and coherence observables
//! ([`observables`]) and a scenario runner ([`cli`]).
//!
//! All numerical code is generic over a [`Real`] scalar; the aliases below
//! fix it to `f64`, which is what the command-line tool uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod jump;
pub mod linalg;
pub mod master;
pub mod observables;
pub mod scalar;
pub mod spin;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex64 = scalar::C<f64>;
pub type Matrix64 = linalg::CMatrix<f64>;
pub type Operator64 = spin::Operator<f64>;
pub type DensityMatrix64 = master::DensityMatrix<f64>;
pub type ModelSpec64 = master::ModelSpec<f64>;
pub type EvolutionTrace64 = master::EvolutionTrace<f64>;
pub type PureState64 = jump::PureState<f64>;
pub type EnsembleResult64 = jump::EnsembleResult<f64>;
pub type Superoperator64 = jump::Superoperator<f64>;

pub type Matrix32 = linalg::CMatrix<f32>;
pub type DensityMatrix32 = master::DensityMatrix<f32>;
pub type PureState32 = jump::PureState<f32>;
