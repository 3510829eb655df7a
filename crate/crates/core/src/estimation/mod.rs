//! Reduced-order EKF, cross-model transfer and the e_L trigger.

mod adaptive;
mod ekf;
mod metric;

pub use adaptive::{
    run_adaptive_estimation, AdaptiveEstimator, EstimationTrace, EstimatorSettings, ModelChange,
    StepRecord, TriggerMode,
};
pub use ekf::{
    ekf_predict, ekf_update, fd_jacobian, reconstruct, transfer_model, Covariance, NoiseConfig,
    ReducedEkfState,
};
pub use metric::{compute_error_metric, TriggerState, SLOPE_WINDOW};
