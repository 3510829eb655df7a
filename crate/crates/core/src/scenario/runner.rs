use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::{ScenarioConfig, Scheme};
use crate::dynamics::Dynamics;
use crate::error::{Error, Result};
use crate::estimation::{run_adaptive_estimation, EstimatorSettings, ModelChange, StepRecord};
use crate::hydrology::ScheduledModel;

/// Ground-truth trajectory and the sensor stream it produced; both have one entry per step.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRun {
    pub states: Vec<DVector<f64>>,
    pub measurements: Vec<DVector<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateSnapshot {
    pub step: usize,
    pub h_true: DVector<f64>,
    pub h_est: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub scheme: Scheme,
    pub dt: f64,
    pub records: Vec<StepRecord>,
    pub percent_mae: Vec<f64>,
    pub model_changes: Vec<ModelChange>,
    pub snapshots: Vec<StateSnapshot>,
    /// Wall-clock seconds per estimator iteration; empty unless timing was requested.
    pub iter_seconds: Vec<f64>,
}

impl RunArtifacts {
    pub fn identifications(&self) -> usize {
        self.model_changes.len()
    }
}

/// Relative mean absolute error in percent: `100 Σ|x̂ − x| / Σ|x|`.
pub fn percent_mae(x_hat: &DVector<f64>, x_true: &DVector<f64>) -> Result<f64> {
    if x_hat.len() != x_true.len() {
        return Err(Error::DimensionMismatch {
            what: "estimate vs truth",
            expected: x_true.len(),
            got: x_hat.len(),
        });
    }
    let reference: f64 = x_true.iter().map(|v| v.abs()).sum();
    if reference == 0.0 {
        return Err(Error::DegenerateReference);
    }
    let err: f64 = x_hat.iter().zip(x_true.iter()).map(|(a, b)| (a - b).abs()).sum();
    Ok(100.0 * err / reference)
}

/// Truth-side dynamics: real inputs, truth soil, scheduled soil shift.
pub fn truth_dynamics(cfg: &ScenarioConfig) -> Result<ScheduledModel> {
    let mut dynamics = ScheduledModel::new(cfg.truth_model()?, cfg.inputs(false)?, cfg.dt);
    if let Some(shift) = &cfg.shift {
        let mut shifted = dynamics.base().clone();
        shifted.zones[shift.zone] = shift.params;
        dynamics = dynamics.with_phase(shift.step, shifted);
    }
    Ok(dynamics)
}

/// Estimator-side dynamics: forecast inputs, nominal soil, and the shift only when the
/// scenario makes it known to the estimator.
pub fn estimator_dynamics(cfg: &ScenarioConfig) -> Result<ScheduledModel> {
    let mut dynamics = ScheduledModel::new(cfg.estimator_model()?, cfg.inputs(true)?, cfg.dt);
    if let Some(shift) = cfg.shift.as_ref().filter(|s| s.apply_to_estimator) {
        let mut shifted = dynamics.base().clone();
        shifted.zones[shift.zone] = shift.params;
        dynamics = dynamics.with_phase(shift.step, shifted);
    }
    Ok(dynamics)
}

/// Simulates the truth twin: `x(k+1) = step(x(k)) + w(k)`, `y(k) = C x(k) + v(k)`,
/// with seeded Gaussian `w` and `v`.
pub fn run_truth(cfg: &ScenarioConfig) -> Result<TruthRun> {
    let dynamics = truth_dynamics(cfg)?;
    let sensors = cfg.sensor_layout()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let w_dist = gaussian(cfg.noise.process_variance)?;
    let v_dist = gaussian(cfg.noise.measurement_variance)?;

    let mut x = cfg.quadrant_state(&cfg.initial.truth)?;
    let mut states = Vec::with_capacity(cfg.steps);
    let mut measurements = Vec::with_capacity(cfg.steps);
    for k in 0..cfg.steps {
        let v = DVector::from_fn(sensors.n_y(), |_, _| sample(&v_dist, &mut rng));
        measurements.push(sensors.observe(&x, &v)?);
        let next = dynamics.advance(k, &x).map_err(|e| e.at_step(k))?;
        states.push(std::mem::replace(&mut x, next));
        if let Some(d) = &w_dist {
            for xi in x.iter_mut() {
                *xi += d.sample(&mut rng);
            }
        }
    }
    Ok(TruthRun {
        states,
        measurements,
    })
}

fn gaussian(variance: f64) -> Result<Option<Normal<f64>>> {
    if variance == 0.0 {
        return Ok(None);
    }
    Normal::new(0.0, variance.sqrt())
        .map(Some)
        .map_err(|e| Error::validation("noise", e.to_string()))
}

fn sample(d: &Option<Normal<f64>>, rng: &mut ChaCha8Rng) -> f64 {
    d.as_ref().map_or(0.0, |d| d.sample(rng))
}

pub fn estimator_settings(cfg: &ScenarioConfig, scheme: Scheme) -> EstimatorSettings {
    EstimatorSettings {
        mode: cfg.trigger_mode(scheme),
        n_fd: cfg.n_fd,
        th_e: cfg.th_e,
        th_c: cfg.th_c,
        slope_limit: cfg.slope_limit,
        stride: cfg.stride,
        identification_horizon: match scheme {
            Scheme::Static => Some(cfg.static_horizon.unwrap_or(cfg.n_fd)),
            _ => None,
        },
    }
}

/// Runs one estimation scheme against a truth run.
pub fn run_scheme(cfg: &ScenarioConfig, scheme: Scheme, truth: &TruthRun) -> Result<RunArtifacts> {
    let dynamics = estimator_dynamics(cfg)?;
    let sensors = cfg.sensor_layout()?;
    let guess = cfg.quadrant_state(&cfg.initial.guess)?;
    let trace = run_adaptive_estimation(
        &dynamics,
        &sensors,
        cfg.noise_config(),
        estimator_settings(cfg, scheme),
        guess,
        &truth.measurements,
    )?;

    let percent_mae = trace
        .estimates
        .iter()
        .zip(&truth.states)
        .map(|(est, x)| percent_mae(est, x))
        .collect::<Result<Vec<_>>>()?;
    let snapshots = cfg
        .snapshot_steps
        .iter()
        .filter(|&&s| s < trace.estimates.len())
        .map(|&s| StateSnapshot {
            step: s,
            h_true: truth.states[s].clone(),
            h_est: trace.estimates[s].clone(),
        })
        .collect();
    Ok(RunArtifacts {
        scheme,
        dt: cfg.dt,
        records: trace.records,
        percent_mae,
        model_changes: trace.model_changes,
        snapshots,
        iter_seconds: if cfg.record_timing {
            trace.iter_seconds
        } else {
            Vec::new()
        },
    })
}

/// Runs every scheme against one shared truth run.
pub fn compare_schemes(cfg: &ScenarioConfig) -> Result<(TruthRun, Vec<RunArtifacts>)> {
    let truth = run_truth(cfg)?;
    let runs = Scheme::ALL
        .iter()
        .map(|&s| run_scheme(cfg, s, &truth))
        .collect::<Result<Vec<_>>>()?;
    Ok((truth, runs))
}
