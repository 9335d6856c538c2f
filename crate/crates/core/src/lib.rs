//! Simulation toolkit for long-term coastal ocean perturbation dynamics.
//!
//! The crate has three layers:
//!
//! * [`scales`] reproduces the dimensional analysis that classifies every
//!   coefficient of the perturbation systems as `c * eps^p` for the small
//!   parameter `eps` (tide period over observation window), for the three
//!   geometric regimes (continental shelf, coastal zone, coastal layer).
//! * [`spectral`] and [`grid`] provide the periodic-grid numerical backbone:
//!   Fourier transforms, exact spectral derivatives, Helmholtz inversion,
//!   2/3-rule dealiasing, Sobolev norms and space-time pairings.
//! * [`full_solver`] integrates the stiff eps-dependent perturbation system
//!   in symmetric hyperbolic form, [`limit_solver`] integrates the
//!   oscillation-free effective equation for the stream function, and
//!   [`testfn`] supplies the constraint-satisfying test functions used to
//!   compare the two through weak pairings.
//!
//! Prescribed tide, depth and wind forcing lives in [`fields`]: closed-form
//! fields that are 1-periodic in the fast phase with modulated amplitude, so
//! that phase averages and spatial derivatives are exact.

pub mod error;
pub mod fields;
pub mod full_solver;
pub mod grid;
pub mod init;
pub mod io;
pub mod limit_solver;
pub mod scales;
pub mod spectral;
pub mod testfn;

pub use error::CoreError;
pub use grid::{ScalarField, TorusGrid, VectorField};
