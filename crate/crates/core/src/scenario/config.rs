//! TOML scenario schema, defaults and validation.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{Covariance, NoiseConfig, TriggerMode};
use crate::hydrology::{
    BottomBoundary, CylindricalGrid, EnvironmentForcing, InputSeries, RichardsModel, SensorLayout,
    SinkParams, SurfaceInput, VanGenuchtenParams, DEFAULT_CAPACITY_CUTOFF,
    DEFAULT_SPECIFIC_STORAGE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Performance,
    Static,
    #[serde(alias = "time-triggered")]
    TimeTriggered,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Performance, Scheme::Static, Scheme::TimeTriggered];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Performance => "performance",
            Scheme::Static => "static",
            Scheme::TimeTriggered => "time_triggered",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "performance" => Ok(Scheme::Performance),
            "static" => Ok(Scheme::Static),
            "time_triggered" | "time-triggered" => Ok(Scheme::TimeTriggered),
            _ => Err(Error::validation(
                "scheme",
                format!("unknown scheme `{s}` (performance | static | time_triggered)"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "N_r")]
    pub n_r: usize,
    #[serde(rename = "N_theta")]
    pub n_theta: usize,
    #[serde(rename = "N_z")]
    pub n_z: usize,
    pub radius: f64,
    pub depth: f64,
    #[serde(default = "default_n_sub")]
    pub n_sub: usize,
    #[serde(default)]
    pub bottom: BottomBoundary,
    #[serde(default = "default_specific_storage")]
    pub specific_storage: f64,
    /// Head [m] above which capillary capacity is frozen.
    #[serde(default = "default_capacity_cutoff")]
    pub capacity_cutoff: f64,
}

fn default_capacity_cutoff() -> f64 {
    DEFAULT_CAPACITY_CUTOFF
}

fn default_n_sub() -> usize {
    40
}

fn default_specific_storage() -> f64 {
    DEFAULT_SPECIFIC_STORAGE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoilLayout {
    #[default]
    Uniform,
    Quadrants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoilConfig {
    #[serde(default)]
    pub layout: SoilLayout,
    pub zones: Vec<VanGenuchtenParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    /// Per-quadrant truth pressure head [m].
    pub truth: [f64; 4],
    /// Per-quadrant estimator guess [m].
    pub guess: [f64; 4],
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            truth: [-13.5, -14.0, -12.7, -11.5],
            guess: [-10.0, -12.0, -9.0, -14.0],
        }
    }
}

/// Sensors at every combination of the listed rings, sectors and layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorLattice {
    pub rings: Vec<usize>,
    pub sectors: Vec<usize>,
    pub layers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    #[serde(default)]
    pub nodes: Vec<usize>,
    #[serde(default)]
    pub lattice: Option<SensorLattice>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSettings {
    /// Variance of the truth model's additive process disturbance [m²].
    #[serde(default = "default_process_variance")]
    pub process_variance: f64,
    /// Variance of the sensor noise [m²].
    #[serde(default = "default_measurement_variance")]
    pub measurement_variance: f64,
    #[serde(rename = "Q", default = "default_q")]
    pub q: Covariance,
    #[serde(rename = "R", default = "default_r")]
    pub r: Covariance,
    #[serde(rename = "P0", default = "default_p0")]
    pub p0: Covariance,
}

fn default_process_variance() -> f64 {
    1e-7
}
fn default_measurement_variance() -> f64 {
    0.8
}
fn default_q() -> Covariance {
    NoiseConfig::default().q
}
fn default_r() -> Covariance {
    NoiseConfig::default().r
}
fn default_p0() -> Covariance {
    NoiseConfig::default().p0
}

impl Default for NoiseSettings {
    fn default() -> Self {
        Self {
            process_variance: default_process_variance(),
            measurement_variance: default_measurement_variance(),
            q: default_q(),
            r: default_r(),
            p0: default_p0(),
        }
    }
}

impl NoiseSettings {
    pub fn filter(&self) -> NoiseConfig {
        NoiseConfig {
            q: self.q,
            r: self.r,
            p0: self.p0,
        }
    }
}

/// `[start, end, rate]`: `rate` [m/s] over steps `start..end`.
pub type RateWindow = [f64; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    /// Pivot application rate on the active sector [m/s].
    #[serde(default)]
    pub irrigation_rate: f64,
    /// `[start, end)` step ranges during which the pivot runs; empty means always.
    #[serde(default)]
    pub irrigation_windows: Vec<[usize; 2]>,
    /// Daily reference ET depth [m/day], distributed as a half-sine over daylight hours.
    #[serde(default)]
    pub et_daily: f64,
    /// Crop coefficient as `[from_step, value]` pairs.
    #[serde(rename = "K_c", default = "default_kc")]
    pub k_c: Vec<[f64; 2]>,
    #[serde(default)]
    pub rain: Vec<RateWindow>,
}

fn default_kc() -> Vec<[f64; 2]> {
    vec![[0.0, 1.0]]
}

impl Default for ForcingConfig {
    fn default() -> Self {
        Self {
            irrigation_rate: 0.0,
            irrigation_windows: Vec::new(),
            et_daily: 0.0,
            k_c: default_kc(),
            rain: Vec::new(),
        }
    }
}

/// Perturbation of the inputs the estimator sees (forecast and scheduling error).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastError {
    #[serde(default = "one")]
    pub irrigation_scale: f64,
    #[serde(default = "one")]
    pub rain_scale: f64,
    #[serde(default = "one")]
    pub et_scale: f64,
    /// Rain the estimator expects but which never falls.
    #[serde(default)]
    pub extra_rain: Vec<RateWindow>,
}

fn one() -> f64 {
    1.0
}

/// Soil-parameter change of one zone from `step` onward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoilShift {
    pub step: usize,
    pub zone: usize,
    pub params: VanGenuchtenParams,
    #[serde(default = "yes")]
    pub apply_to_estimator: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default)]
    pub seed: u64,
    /// Sampling interval Δ [s].
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Run length [steps].
    pub steps: usize,
    #[serde(rename = "N_fd")]
    pub n_fd: usize,
    pub th_e: f64,
    #[serde(rename = "th_C")]
    pub th_c: f64,
    #[serde(default = "default_slope_limit")]
    pub slope_limit: f64,
    /// Defaults to `N_fd`.
    #[serde(default)]
    pub time_trigger_period: Option<usize>,
    /// Snapshot horizon for the static scheme; defaults to `N_fd`.
    #[serde(default)]
    pub static_horizon: Option<usize>,
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Steps at which full-grid state snapshots are exported.
    #[serde(default)]
    pub snapshot_steps: Vec<usize>,
    /// Fill `iter_seconds` with wall-clock times; off by default so output is reproducible.
    #[serde(default)]
    pub record_timing: bool,
    pub grid: GridConfig,
    pub soil: SoilConfig,
    #[serde(default)]
    pub estimator_soil: Option<SoilConfig>,
    #[serde(default)]
    pub sink: SinkParams,
    #[serde(default)]
    pub initial: InitialConfig,
    pub sensors: SensorConfig,
    #[serde(default)]
    pub noise: NoiseSettings,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default)]
    pub forecast_error: Option<ForecastError>,
    #[serde(default)]
    pub shift: Option<SoilShift>,
}

fn default_scheme() -> Scheme {
    Scheme::Performance
}
fn default_dt() -> f64 {
    1800.0
}
fn default_slope_limit() -> f64 {
    0.05
}
fn default_stride() -> usize {
    1
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::validation(key, format!("must be > 0, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(key, format!("must be >= 0, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        positive("dt", self.dt)?;
        if self.steps == 0 {
            return Err(Error::validation("steps", "must be >= 1"));
        }
        if self.n_fd == 0 {
            return Err(Error::validation("N_fd", "must be >= 1"));
        }
        positive("th_e", self.th_e)?;
        positive("th_C", self.th_c)?;
        positive("slope_limit", self.slope_limit)?;
        if self.time_trigger_period == Some(0) {
            return Err(Error::validation("time_trigger_period", "must be >= 1"));
        }
        if self.static_horizon == Some(0) {
            return Err(Error::validation("static_horizon", "must be >= 1"));
        }
        if self.stride == 0 {
            return Err(Error::validation("stride", "must be >= 1"));
        }
        if self.grid.n_sub == 0 {
            return Err(Error::validation("grid.n_sub", "must be >= 1"));
        }
        non_negative("grid.specific_storage", self.grid.specific_storage)?;
        if !(self.grid.capacity_cutoff <= 0.0) {
            return Err(Error::validation("grid.capacity_cutoff", "must be <= 0"));
        }
        let grid = self.grid()?;
        self.validate_soil("soil", &self.soil)?;
        if let Some(est) = &self.estimator_soil {
            self.validate_soil("estimator_soil", est)?;
        }
        self.sink.validate(grid.depth)?;
        for (i, v) in self.initial.truth.iter().chain(&self.initial.guess).enumerate() {
            if !v.is_finite() {
                let key = if i < 4 { "initial.truth" } else { "initial.guess" };
                return Err(Error::validation(key, "entries must be finite"));
            }
        }
        let sensors = self.sensor_nodes(&grid)?;
        if sensors.is_empty() {
            return Err(Error::validation("sensors", "at least one sensor is required"));
        }
        let n = &self.noise;
        non_negative("noise.process_variance", n.process_variance)?;
        non_negative("noise.measurement_variance", n.measurement_variance)?;
        non_negative("noise.Q.diag", n.q.diag)?;
        positive("noise.R.diag", n.r.diag)?;
        non_negative("noise.P0.diag", n.p0.diag)?;
        let f = &self.forcing;
        non_negative("forcing.irrigation_rate", f.irrigation_rate)?;
        non_negative("forcing.et_daily", f.et_daily)?;
        for kc in &f.k_c {
            non_negative("forcing.K_c", kc[1])?;
        }
        for w in &f.rain {
            non_negative("forcing.rain", w[2])?;
        }
        if let Some(fe) = &self.forecast_error {
            non_negative("forecast_error.irrigation_scale", fe.irrigation_scale)?;
            non_negative("forecast_error.rain_scale", fe.rain_scale)?;
            non_negative("forecast_error.et_scale", fe.et_scale)?;
        }
        if let Some(shift) = &self.shift {
            if shift.zone >= self.soil.zones.len() {
                return Err(Error::validation("shift.zone", "no such soil zone"));
            }
            shift.params.validate("shift.params")?;
        }
        Ok(())
    }

    fn validate_soil(&self, key: &str, soil: &SoilConfig) -> Result<()> {
        let expected = match soil.layout {
            SoilLayout::Uniform => 1,
            SoilLayout::Quadrants => 4,
        };
        if soil.zones.len() != expected {
            return Err(Error::validation(
                &format!("{key}.zones"),
                format!("layout needs {expected} zone(s), got {}", soil.zones.len()),
            ));
        }
        for (i, z) in soil.zones.iter().enumerate() {
            z.validate(&format!("{key}.zones[{i}]"))?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<CylindricalGrid> {
        let g = &self.grid;
        CylindricalGrid::new(g.n_r, g.n_theta, g.n_z, g.radius, g.depth)
    }

    pub fn sensor_nodes(&self, grid: &CylindricalGrid) -> Result<Vec<usize>> {
        let mut nodes = self.sensors.nodes.clone();
        if let Some(l) = &self.sensors.lattice {
            for &iz in &l.layers {
                for &it in &l.sectors {
                    for &ir in &l.rings {
                        if ir >= grid.n_r || it >= grid.n_theta || iz >= grid.n_z {
                            return Err(Error::validation(
                                "sensors.lattice",
                                format!("({ir}, {it}, {iz}) lies outside the grid"),
                            ));
                        }
                        nodes.push(grid.index(ir, it, iz));
                    }
                }
            }
        }
        if let Some(&bad) = nodes.iter().find(|&&i| i >= grid.n_x()) {
            return Err(Error::validation(
                "sensors.nodes",
                format!("node {bad} out of range for {} nodes", grid.n_x()),
            ));
        }
        Ok(nodes)
    }

    pub fn sensor_layout(&self) -> Result<SensorLayout> {
        let grid = self.grid()?;
        SensorLayout::new(self.sensor_nodes(&grid)?, grid.n_x())
    }

    pub fn noise_config(&self) -> NoiseConfig {
        self.noise.filter()
    }

    pub fn time_trigger_period(&self) -> usize {
        self.time_trigger_period.unwrap_or(self.n_fd)
    }

    pub fn trigger_mode(&self, scheme: Scheme) -> TriggerMode {
        match scheme {
            Scheme::Performance => TriggerMode::Performance,
            Scheme::Static => TriggerMode::Static,
            Scheme::TimeTriggered => TriggerMode::TimeTriggered {
                period: self.time_trigger_period(),
            },
        }
    }

    /// Longest look-ahead any scheme may need past the final step.
    pub fn schedule_len(&self) -> usize {
        let ahead = self.n_fd.max(self.static_horizon.unwrap_or(self.n_fd));
        self.steps + ahead + 1
    }

    fn model_from(&self, soil: &SoilConfig) -> Result<RichardsModel> {
        let grid = self.grid()?;
        let mut m = match soil.layout {
            SoilLayout::Uniform => RichardsModel::homogeneous(grid, soil.zones[0], self.grid.n_sub),
            SoilLayout::Quadrants => {
                RichardsModel::quadrants(grid, soil.zones.clone(), self.grid.n_sub)
            }
        };
        m.sink = self.sink;
        m.bottom = self.grid.bottom;
        m.specific_storage = self.grid.specific_storage;
        m.capacity_cutoff = self.grid.capacity_cutoff;
        Ok(m)
    }

    pub fn truth_model(&self) -> Result<RichardsModel> {
        self.model_from(&self.soil)
    }

    pub fn estimator_model(&self) -> Result<RichardsModel> {
        self.model_from(self.estimator_soil.as_ref().unwrap_or(&self.soil))
    }

    /// Per-quadrant constants expanded to a full state.
    pub fn quadrant_state(&self, values: &[f64; 4]) -> Result<nalgebra::DVector<f64>> {
        let g = self.grid()?;
        Ok(nalgebra::DVector::from_fn(g.n_x(), |i, _| {
            values[g.quadrant(g.node(i).itheta)]
        }))
    }

    /// Input schedule as seen by the truth (`forecast = false`) or the estimator.
    pub fn inputs(&self, forecast: bool) -> Result<InputSeries> {
        let grid = self.grid()?;
        let f = &self.forcing;
        let fe = if forecast {
            self.forecast_error.clone()
        } else {
            None
        };
        let (irr_scale, rain_scale, et_scale) = fe
            .as_ref()
            .map_or((1.0, 1.0, 1.0), |e| (e.irrigation_scale, e.rain_scale, e.et_scale));
        let len = self.schedule_len();
        let mut series = InputSeries::default();
        for k in 0..len {
            let t_mid = (k as f64 + 0.5) * self.dt;
            let pivot_on = f.irrigation_windows.is_empty()
                || f
                    .irrigation_windows
                    .iter()
                    .any(|w| (w[0]..w[1]).contains(&k));
            let rate = if pivot_on {
                f.irrigation_rate * irr_scale
            } else {
                0.0
            };
            series
                .surface
                .push(SurfaceInput::uniform(grid.n_r, rate, k % grid.n_theta));

            let rain_at = |windows: &[RateWindow]| -> f64 {
                windows
                    .iter()
                    .filter(|w| (w[0] as usize..w[1] as usize).contains(&k))
                    .map(|w| w[2])
                    .sum()
            };
            let mut rain = rain_at(&f.rain) * rain_scale;
            if let Some(e) = &fe {
                rain += rain_at(&e.extra_rain);
            }
            // half-sine between 06:00 and 18:00 integrating to et_daily per day
            let day_phase = (t_mid / 86_400.0).fract();
            let shape = (2.0 * PI * (day_phase - 0.25)).sin().max(0.0);
            let et = f.et_daily / 86_400.0 * PI * shape * et_scale;
            let k_c = f
                .k_c
                .iter()
                .filter(|p| p[0] as usize <= k)
                .last()
                .map_or(1.0, |p| p[1]);
            series.forcing.push(EnvironmentForcing { et, k_c, rain });
        }
        Ok(series)
    }
}
