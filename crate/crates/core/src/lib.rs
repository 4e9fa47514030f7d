//! Calibration of independent, non-identically distributed Gaussian and
//! Laplace noise from per-coordinate sensitivity profiles.
//!
//! The usual entry points are [`GaussianCalibrator`] and
//! [`calibrate_laplace`]. Both return [`NoiseScales`], which can be fed to
//! [`mechanism::sample_noise`] or audited with [`mechanism::audit`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod applications;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod laplace;
pub mod mechanism;
pub mod numerics;
pub mod profile;
pub mod scales;

pub use error::{Error, Result};
pub use gaussian::{calibrate_gaussian, privacy_profile, solve_mu0, GaussianCalibrator, GaussianSolverResult, PrivacyBudget};
pub use laplace::{calibrate_laplace, calibrate_laplace_approx_dp, pure_dp_check};
pub use mechanism::{AuditReport, SeededRng};
pub use numerics::BisectionConfig;
pub use profile::{majorizes, Normalization, ProfileFamily, ProfileKind, SensitivityProfile};
pub use scales::{Mechanism, Mode, NoiseScales};
