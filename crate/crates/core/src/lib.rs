//! Performance-triggered adaptive model reduction for soil-moisture estimation.
//!
//! * [`hydrology`] — cylindrical Richards equation, explicit stepper, sensors.
//! * [`reduction`] — trajectory snapshots, average-linkage clustering, cluster projections.
//! * [`estimation`] — reduced-order EKF, model transfer, prediction-error trigger.
//! * [`scenario`] — configuration, twin experiment, scheme runner and CSV export.

pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod hydrology;
pub mod reduction;
pub mod scenario;

pub use dynamics::Dynamics;
pub use error::{Error, Result};
