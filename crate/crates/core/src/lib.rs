//! Numerical engine for a damped diffusion equation on [0, 1] with
//! non-local (voltage-driven) boundary conditions: spectrum, resolvent,
//! heat kernel, plus three independent oracles (a discrete boundary-value
//! solve, finite-difference time evolution, and Monte Carlo jump-diffusion)
//! that cross-validate every closed form.
//!
//! Layout:
//! - [`entire`], [`aseries`]: branch-free special functions;
//! - [`spectral`]: characteristic determinant, eigenvalue families,
//!   eigenfunctions, steady state;
//! - [`resolvent`]: Neumann and non-local resolvents plus the BVP oracle;
//! - [`kernel`], [`bromwich`]: spectral heat kernel, calibration, contour
//!   inversion, Laplace-transform check;
//! - [`oracle`]: finite-difference evolution oracle;
//! - [`mc`]: jump-diffusion Monte Carlo;
//! - [`validation`]: the cross-check suite and discrepancy ledger.

pub mod aseries;
pub mod bromwich;
pub mod entire;
pub mod error;
pub mod field;
pub mod kernel;
pub mod mc;
pub mod oracle;
pub mod params;
pub mod resolvent;
pub mod spectral;
pub mod validation;

pub use error::{Error, Result};
pub use field::ScalarField;
pub use params::ModelParams;
pub use spectral::{Family, Spectrum};
