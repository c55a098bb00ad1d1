//! Simulation and analysis of reaction-diffusion equations with nonlocal,
//! norm-coupled nonlinearities whose exponents vary in time.
//!
//! The crate is organised bottom-up: [`model`] describes a scenario,
//! [`regimes`] classifies its phases, [`energy`] and [`blowup`] work with
//! scalar comparison problems for the squared norm, [`spectral`] runs the
//! Galerkin system and [`oracle`] cross-checks it with finite differences.

// NaN must fail range checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod energy;
pub mod error;
pub mod io;
pub mod manifest;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod regimes;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
