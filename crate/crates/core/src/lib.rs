//! Numerical analysis of the axially symmetric one-phase Bernoulli cones:
//! profile construction, Robin spectra of the link, strong integrability,
//! Weiss energies and decaying particular solutions of the linearized
//! problem.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod boundary;
pub mod cauchy_euler;
pub mod cli;
pub mod cone;
pub mod error;
pub mod fd;
pub mod grid;
pub mod ode;
pub mod particular;
pub mod sl;
pub mod spectrum;
pub mod sphere;
pub mod weiss;

pub use config::SolverConfig;
pub use cone::{solve_profile, ConeProfile};
pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
