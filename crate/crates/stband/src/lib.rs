//! Numerical toolkit for spacetime harmonic functions `Δu + n f |∇u| = 0` on
//! warped-product bands.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: metric families with exact warping derivatives and curvature,
//! * [`potentials`]: piecewise-analytic potentials `f` and their ODE certificates,
//! * [`solver`]: closed-form 1D reduction, fixed-point grid solver, AF Green's function,
//!   barrier and gradient-estimate checks,
//! * [`identities`]: integral identities evaluated on solved profiles,
//! * [`experiments`]: width bounds, waist averages, dice decompositions and audits.

pub mod experiments;
pub mod geometry;
pub mod identities;
pub mod linalg;
pub mod potentials;
pub mod quad;
pub mod solver;

mod error;

pub use error::{Error, Result};
