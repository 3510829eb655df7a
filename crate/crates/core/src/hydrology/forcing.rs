use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pivot irrigation applied at the surface during one sampling interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceInput {
    /// Application rate per radial ring [m/s], length `N_r`.
    pub u: Vec<f64>,
    /// Azimuthal index currently under the pivot arm.
    pub active_sector: usize,
}

impl SurfaceInput {
    pub fn none(n_r: usize) -> Self {
        Self {
            u: vec![0.0; n_r],
            active_sector: 0,
        }
    }

    pub fn uniform(n_r: usize, rate: f64, sector: usize) -> Self {
        Self {
            u: vec![rate; n_r],
            active_sector: sector,
        }
    }

    #[inline]
    pub fn rate_at(&self, ir: usize, itheta: usize) -> f64 {
        if itheta == self.active_sector {
            self.u[ir]
        } else {
            0.0
        }
    }
}

/// Weather forcing, constant over one sampling interval.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnvironmentForcing {
    /// Reference evapotranspiration [m/s].
    pub et: f64,
    /// Crop coefficient [-].
    pub k_c: f64,
    /// Precipitation [m/s], applied uniformly over the surface.
    pub rain: f64,
}

impl EnvironmentForcing {
    pub fn validate(&self) -> Result<()> {
        if !(self.et >= 0.0 && self.k_c >= 0.0 && self.rain >= 0.0) {
            return Err(Error::validation("forcing", "ET, K_c and rain must be >= 0"));
        }
        Ok(())
    }
}

/// Root-water-uptake parameters: uniform root density down to `root_depth` and
/// a Feddes-type stress factor.
///
/// The stress factor is 0 above `h_anaerobic`, rises linearly to 1 at
/// `h_field_capacity`, stays 1 down to `h_stress`, then falls linearly to 0 at
/// `h_wilting`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SinkParams {
    pub root_depth: f64,
    pub h_anaerobic: f64,
    pub h_field_capacity: f64,
    pub h_stress: f64,
    pub h_wilting: f64,
}

impl Default for SinkParams {
    fn default() -> Self {
        Self {
            root_depth: 0.3,
            h_anaerobic: -0.1,
            h_field_capacity: -0.25,
            h_stress: -5.0,
            h_wilting: -150.0,
        }
    }
}

impl SinkParams {
    pub fn validate(&self, depth: f64) -> Result<()> {
        if !(self.root_depth > 0.0 && self.root_depth <= depth) {
            return Err(Error::validation("sink.root_depth", "must lie in (0, grid.depth]"));
        }
        if !(self.h_anaerobic > self.h_field_capacity
            && self.h_field_capacity >= self.h_stress
            && self.h_stress > self.h_wilting)
        {
            return Err(Error::validation(
                "sink",
                "requires h_anaerobic > h_field_capacity >= h_stress > h_wilting",
            ));
        }
        Ok(())
    }

    pub fn stress_factor(&self, h: f64) -> f64 {
        if h >= self.h_anaerobic || h <= self.h_wilting {
            0.0
        } else if h > self.h_field_capacity {
            (self.h_anaerobic - h) / (self.h_anaerobic - self.h_field_capacity)
        } else if h >= self.h_stress {
            1.0
        } else {
            (h - self.h_wilting) / (self.h_stress - self.h_wilting)
        }
    }

    /// Fraction of a cell spanning depths `[top, top + dz]` that lies in the root zone,
    /// normalised by `dz`.
    pub fn root_fraction(&self, top: f64, dz: f64) -> f64 {
        let overlap = (self.root_depth.min(top + dz) - top).max(0.0);
        overlap / dz
    }

    /// Volumetric sink S [1/s] (non-positive) for a cell whose top lies `top`
    /// below the surface.
    pub fn sink(&self, h: f64, top: f64, dz: f64, forcing: &EnvironmentForcing) -> f64 {
        let frac = self.root_fraction(top, dz);
        if frac == 0.0 || forcing.et == 0.0 {
            return 0.0;
        }
        -self.stress_factor(h) * forcing.k_c * forcing.et * frac / self.root_depth
    }
}
