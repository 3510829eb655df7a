//! The performance-triggered reduced EKF loop.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ekf::{ekf_predict, ekf_update, reconstruct, transfer_model, NoiseConfig, ReducedEkfState};
use super::metric::{compute_error_metric, TriggerState};
use crate::dynamics::Dynamics;
use crate::error::{Error, Result};
use crate::hydrology::SensorLayout;
use crate::reduction::{identify_model, ProjectionMatrix, ReducedModel};

/// When the reduced model is (re-)identified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerMode {
    /// Scheme I: at k = 0 and whenever `e_L > th_e ∧ ė_L ≥ slope_limit`.
    Performance,
    /// Scheme II: once, at k = 0.
    Static,
    /// Scheme III: every `period` steps.
    TimeTriggered { period: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSettings {
    pub mode: TriggerMode,
    pub n_fd: usize,
    pub th_e: f64,
    pub th_c: f64,
    pub slope_limit: f64,
    /// Evaluate e_L every `stride` steps.
    pub stride: usize,
    /// Snapshot horizon for identification; defaults to `n_fd`.
    pub identification_horizon: Option<usize>,
}

impl EstimatorSettings {
    fn horizon(&self) -> usize {
        self.identification_horizon.unwrap_or(self.n_fd)
    }
}

/// Per-step output of the estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub e_l: f64,
    pub edot_l: f64,
    pub r_m: usize,
    pub model_index: usize,
    pub trigger: bool,
    /// e_L of a freshly identified model over the window it was built from.
    pub e_l_refit: Option<f64>,
    /// e_L value that fired the trigger (performance mode).
    pub e_l_fired: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelChange {
    pub step: usize,
    pub model_index: usize,
    pub r_m: usize,
    pub e_l_fired: Option<f64>,
    pub e_l_refit: f64,
}

#[derive(Debug, Clone, Default)]
pub struct EstimationTrace {
    pub records: Vec<StepRecord>,
    pub estimates: Vec<DVector<f64>>,
    pub model_changes: Vec<ModelChange>,
    pub iter_seconds: Vec<f64>,
}

/// Reduced EKF with adaptive re-identification. Drive it with [`AdaptiveEstimator::step`]
/// once per sampling instant, in order.
pub struct AdaptiveEstimator<'a, D: ?Sized> {
    model: &'a D,
    sensors: &'a SensorLayout,
    noise: NoiseConfig,
    r: DMatrix<f64>,
    settings: EstimatorSettings,
    projection: Option<ProjectionMatrix>,
    ekf: Option<ReducedEkfState>,
    x_hat: DVector<f64>,
    trigger: TriggerState,
    models_built: usize,
    /// e_L has been evaluated since the last identification
    fresh: bool,
    next_step: usize,
}

impl<'a, D: Dynamics + ?Sized> AdaptiveEstimator<'a, D> {
    pub fn new(
        model: &'a D,
        sensors: &'a SensorLayout,
        noise: NoiseConfig,
        settings: EstimatorSettings,
        x0_guess: DVector<f64>,
    ) -> Result<Self> {
        if x0_guess.len() != model.dim() {
            return Err(Error::DimensionMismatch {
                what: "initial guess",
                expected: model.dim(),
                got: x0_guess.len(),
            });
        }
        if let TriggerMode::TimeTriggered { period: 0 } = settings.mode {
            return Err(Error::validation("time_trigger_period", "must be >= 1"));
        }
        let r = noise.r.dense(sensors.n_y());
        Ok(Self {
            model,
            sensors,
            noise,
            r,
            trigger: TriggerState::new(settings.th_e, settings.slope_limit),
            settings,
            projection: None,
            ekf: None,
            x_hat: x0_guess,
            models_built: 0,
            fresh: false,
            next_step: 0,
        })
    }

    /// Use a fixed projection instead of identifying one from snapshots. The filter is
    /// initialised on it at k = 0 and no re-identification happens.
    pub fn with_fixed_projection(mut self, u: ProjectionMatrix) -> Result<Self> {
        let ekf = ReducedEkfState::initialize(&u, &self.x_hat, &self.noise, self.sensors)?;
        self.x_hat = reconstruct(&ekf, &u)?;
        self.models_built = u.model_index.max(1);
        self.projection = Some(u);
        self.ekf = Some(ekf);
        self.settings.mode = TriggerMode::Static;
        Ok(self)
    }

    pub fn estimate(&self) -> &DVector<f64> {
        &self.x_hat
    }

    pub fn filter(&self) -> Option<&ReducedEkfState> {
        self.ekf.as_ref()
    }

    pub fn projection(&self) -> Option<&ProjectionMatrix> {
        self.projection.as_ref()
    }

    pub fn trigger_state(&self) -> &TriggerState {
        &self.trigger
    }

    fn wants_identification(&self, k: usize) -> bool {
        if self.projection.is_none() {
            return true;
        }
        match self.settings.mode {
            TriggerMode::Static => false,
            TriggerMode::TimeTriggered { period } => k % period == 0,
            TriggerMode::Performance => self.fresh && self.trigger.should_fire(),
        }
    }

    /// One iteration: optional re-identification, predict, update with `y`, reconstruct,
    /// then e_L and ė_L.
    pub fn step(&mut self, y: &DVector<f64>) -> Result<StepRecord> {
        let k = self.next_step;
        self.step_inner(k, y).map_err(|e| e.at_step(k))
    }

    fn step_inner(&mut self, k: usize, y: &DVector<f64>) -> Result<StepRecord> {
        // the current estimate refers to t_{k-1}, except at k = 0
        let origin = k.saturating_sub(1);
        let mut triggered = false;
        let mut e_l_refit = None;
        let mut e_l_fired = None;

        if self.wants_identification(k) {
            triggered = true;
            if self.projection.is_some() && self.settings.mode == TriggerMode::Performance {
                e_l_fired = self.trigger.latest();
            }
            let m = self.models_built + 1;
            let u_new = identify_model(
                self.model,
                origin,
                &self.x_hat,
                self.settings.horizon(),
                self.settings.th_c,
                m,
            )?;
            let ekf = match (&self.ekf, &self.projection) {
                (Some(s), Some(u_old)) => {
                    transfer_model(s, u_old, &u_new, &self.noise, self.sensors)?
                }
                _ => ReducedEkfState::initialize(&u_new, &self.x_hat, &self.noise, self.sensors)?,
            };
            e_l_refit = Some(compute_error_metric(
                self.model,
                origin,
                &self.x_hat,
                self.settings.n_fd,
                &u_new,
            )?);
            self.models_built = m;
            self.projection = Some(u_new);
            self.ekf = Some(ekf);
            self.fresh = false;
        }

        let u = self.projection.as_ref().expect("projection identified at k = 0");
        let mut ekf = self.ekf.take().expect("filter initialised with projection");
        if k > 0 {
            let f_rd = ReducedModel::new(self.model, u)?;
            ekf = ekf_predict(&ekf, &f_rd, k - 1)?;
        }
        ekf = ekf_update(&ekf, y, &self.r)?;
        self.x_hat = reconstruct(&ekf, u)?;
        let (r_m, model_index) = (ekf.r_m(), ekf.model_index);
        self.ekf = Some(ekf);

        let stride = self.settings.stride.max(1);
        if k % stride == 0 || triggered {
            let e_l = compute_error_metric(self.model, k, &self.x_hat, self.settings.n_fd, u)?;
            self.trigger.push(e_l);
            self.fresh = true;
        }
        self.next_step = k + 1;

        Ok(StepRecord {
            step: k,
            e_l: self.trigger.latest().unwrap_or(0.0),
            edot_l: self.trigger.slope_estimate(),
            r_m,
            model_index,
            trigger: triggered,
            e_l_refit,
            e_l_fired,
        })
    }
}

/// Runs the estimator over a measurement stream aligned with the sampling grid.
pub fn run_adaptive_estimation<D: Dynamics + ?Sized>(
    model: &D,
    sensors: &SensorLayout,
    noise: NoiseConfig,
    settings: EstimatorSettings,
    x0_guess: DVector<f64>,
    measurements: &[DVector<f64>],
) -> Result<EstimationTrace> {
    let mut est = AdaptiveEstimator::new(model, sensors, noise, settings, x0_guess)?;
    let mut trace = EstimationTrace::default();
    for y in measurements {
        let started = Instant::now();
        let rec = est.step(y)?;
        trace.iter_seconds.push(started.elapsed().as_secs_f64());
        if rec.trigger {
            trace.model_changes.push(ModelChange {
                step: rec.step,
                model_index: rec.model_index,
                r_m: rec.r_m,
                e_l_fired: rec.e_l_fired,
                e_l_refit: rec.e_l_refit.unwrap_or(0.0),
            });
        }
        trace.estimates.push(est.estimate().clone());
        trace.records.push(rec);
    }
    Ok(trace)
}
