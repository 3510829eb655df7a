//! Cylindrical Richards-equation model in state-space form.

mod forcing;
mod grid;
mod model;
mod soil;

pub use forcing::{EnvironmentForcing, SinkParams, SurfaceInput};
pub use grid::{CylindricalGrid, NodeIndex};
pub use model::{
    BottomBoundary, RichardsModel, SensorLayout, DEFAULT_CAPACITY_CUTOFF, DEFAULT_SPECIFIC_STORAGE,
};
pub use soil::{Hydraulics, VanGenuchtenParams};

use nalgebra::DVector;

use crate::dynamics::Dynamics;
use crate::error::{Error, Result};

/// Piecewise-constant inputs, one entry per sampling interval.
#[derive(Debug, Clone, Default)]
pub struct InputSeries {
    pub surface: Vec<SurfaceInput>,
    pub forcing: Vec<EnvironmentForcing>,
}

impl InputSeries {
    pub fn len(&self) -> usize {
        self.surface.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surface.is_empty()
    }

    pub fn at(&self, k: usize) -> Result<(&SurfaceInput, &EnvironmentForcing)> {
        match (self.surface.get(k), self.forcing.get(k)) {
            (Some(u), Some(f)) => Ok((u, f)),
            _ => Err(Error::DimensionMismatch {
                what: "input schedule length",
                expected: k + 1,
                got: self.len(),
            }),
        }
    }

    /// Constant inputs over `len` intervals.
    pub fn constant(len: usize, surface: SurfaceInput, forcing: EnvironmentForcing) -> Self {
        Self {
            surface: vec![surface; len],
            forcing: vec![forcing; len],
        }
    }
}

/// A Richards model driven by an input schedule, optionally switching to other
/// soil parameterisations from given step indices onward.
#[derive(Debug, Clone)]
pub struct ScheduledModel {
    /// `(first step, model)` sorted by first step; the first entry starts at 0.
    phases: Vec<(usize, RichardsModel)>,
    pub inputs: InputSeries,
    pub dt: f64,
}

impl ScheduledModel {
    pub fn new(model: RichardsModel, inputs: InputSeries, dt: f64) -> Self {
        Self {
            phases: vec![(0, model)],
            inputs,
            dt,
        }
    }

    /// Use `model` for every interval starting at `from_step` or later.
    pub fn with_phase(mut self, from_step: usize, model: RichardsModel) -> Self {
        assert_eq!(model.n_x(), self.base().n_x());
        if from_step == 0 {
            self.phases = vec![(0, model)];
        } else {
            self.phases.retain(|(s, _)| *s < from_step);
            self.phases.push((from_step, model));
        }
        self
    }

    pub fn base(&self) -> &RichardsModel {
        &self.phases[0].1
    }

    pub fn model_at(&self, k: usize) -> &RichardsModel {
        self.phases
            .iter()
            .rev()
            .find(|(s, _)| *s <= k)
            .map(|(_, m)| m)
            .unwrap_or(&self.phases[0].1)
    }
}

impl Dynamics for ScheduledModel {
    fn dim(&self) -> usize {
        self.base().n_x()
    }

    fn advance(&self, k: usize, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (u, f) = self.inputs.at(k)?;
        self.model_at(k).step(x, u, f, self.dt)
    }
}
