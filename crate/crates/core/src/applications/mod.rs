//! Desk-scale private learning tasks built on the calibrators.

pub mod dpcd;
pub mod dppca;
pub mod smoothness;

pub use dpcd::{dpcd_run, DpCdConfig, DpCdProblem, DpCdRun, Dataset, Loss, Regularizer, SmoothnessSource};
pub use dppca::{dppca_run, DpPcaConfig, DpPcaResult};
pub use smoothness::estimate_smoothness_private;
