use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::forcing::{EnvironmentForcing, SinkParams, SurfaceInput};
use super::grid::CylindricalGrid;
use super::soil::{Hydraulics, VanGenuchtenParams};
use crate::error::{Error, Result};

/// Lower boundary of the soil column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BottomBoundary {
    /// Unit-gradient free drainage: outflow equals K(h) of the bottom layer.
    #[default]
    FreeDrainage,
    /// Zero pressure head (water table) at the bottom face.
    WaterTable,
    /// Impermeable bottom.
    NoFlux,
}

/// Spatially discretised Richards equation on a cylindrical grid, advanced with
/// sub-stepped explicit Euler.
#[derive(Debug, Clone)]
pub struct RichardsModel {
    pub grid: CylindricalGrid,
    pub zones: Vec<VanGenuchtenParams>,
    /// Zone index per node, length `N_x`.
    pub zone_of: Vec<usize>,
    pub sink: SinkParams,
    pub bottom: BottomBoundary,
    /// Explicit Euler sub-steps per sampling interval.
    pub n_sub: usize,
    /// Storage floor added to c(h) [1/m]; keeps the pressure form defined at saturation.
    pub specific_storage: f64,
    /// Above this head [m] the capillary capacity is held at its value here, which
    /// bounds the diffusivity of near-saturated states for the explicit stepper.
    pub capacity_cutoff: f64,
}

pub const DEFAULT_SPECIFIC_STORAGE: f64 = 1e-6;
pub const DEFAULT_CAPACITY_CUTOFF: f64 = -0.05;

impl RichardsModel {
    /// Single soil zone everywhere.
    pub fn homogeneous(grid: CylindricalGrid, soil: VanGenuchtenParams, n_sub: usize) -> Self {
        let n = grid.n_x();
        Self {
            grid,
            zones: vec![soil],
            zone_of: vec![0; n],
            sink: SinkParams::default(),
            bottom: BottomBoundary::FreeDrainage,
            n_sub,
            specific_storage: DEFAULT_SPECIFIC_STORAGE,
            capacity_cutoff: DEFAULT_CAPACITY_CUTOFF,
        }
    }

    /// One zone per azimuthal quadrant (`zones.len() == 4`).
    pub fn quadrants(grid: CylindricalGrid, zones: Vec<VanGenuchtenParams>, n_sub: usize) -> Self {
        assert_eq!(zones.len(), 4, "quadrant layout needs four zones");
        let zone_of = (0..grid.n_x())
            .map(|i| grid.quadrant(grid.node(i).itheta))
            .collect();
        Self {
            grid,
            zones,
            zone_of,
            sink: SinkParams::default(),
            bottom: BottomBoundary::FreeDrainage,
            n_sub,
            specific_storage: DEFAULT_SPECIFIC_STORAGE,
            capacity_cutoff: DEFAULT_CAPACITY_CUTOFF,
        }
    }

    pub fn n_x(&self) -> usize {
        self.grid.n_x()
    }

    #[inline]
    pub fn soil_at(&self, node: usize) -> &VanGenuchtenParams {
        &self.zones[self.zone_of[node]]
    }

    fn check_state(&self, h: &[f64]) -> Result<()> {
        if h.len() != self.n_x() {
            return Err(Error::DimensionMismatch {
                what: "state",
                expected: self.n_x(),
                got: h.len(),
            });
        }
        if let Some(node) = h.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { node });
        }
        Ok(())
    }

    fn check_input(&self, input: &SurfaceInput) -> Result<()> {
        if input.u.len() != self.grid.n_r {
            return Err(Error::DimensionMismatch {
                what: "surface input",
                expected: self.grid.n_r,
                got: input.u.len(),
            });
        }
        if input.active_sector >= self.grid.n_theta {
            return Err(Error::DimensionMismatch {
                what: "active sector",
                expected: self.grid.n_theta,
                got: input.active_sector,
            });
        }
        Ok(())
    }

    /// Time derivative of the pressure head, dh/dt [m/s].
    pub fn rhs(
        &self,
        h: &DVector<f64>,
        input: &SurfaceInput,
        forcing: &EnvironmentForcing,
    ) -> Result<DVector<f64>> {
        self.check_state(h.as_slice())?;
        self.check_input(input)?;
        let mut hyd = vec![
            Hydraulics {
                capacity: 0.0,
                conductivity: 0.0
            };
            self.n_x()
        ];
        let mut out = DVector::zeros(self.n_x());
        self.rhs_into(h.as_slice(), input, forcing, &mut hyd, out.as_mut_slice());
        Ok(out)
    }

    fn rhs_into(
        &self,
        h: &[f64],
        input: &SurfaceInput,
        forcing: &EnvironmentForcing,
        hyd: &mut [Hydraulics],
        out: &mut [f64],
    ) {
        let g = &self.grid;
        for (i, slot) in hyd.iter_mut().enumerate() {
            *slot = self.soil_at(i).evaluate(h[i]);
        }
        let (nr, nt, nz) = (g.n_r, g.n_theta, g.n_z);
        let dth2 = g.dtheta * g.dtheta;
        let layer = g.layer_size();
        let surface_flux = forcing.rain;

        for iz in 0..nz {
            let top = iz as f64 * g.dz;
            for it in 0..nt {
                let itp = if it + 1 == nt { 0 } else { it + 1 };
                let itm = if it == 0 { nt - 1 } else { it - 1 };
                for ir in 0..nr {
                    let i = g.index(ir, it, iz);
                    let hi = h[i];
                    let ki = hyd[i].conductivity;
                    let ri = g.r(ir);

                    // radial: (1/r) d/dr (r K dh/dr), no flux through the inner and outer faces
                    let f_out = if ir + 1 < nr {
                        let j = i + 1;
                        g.r_face_outer(ir) * 0.5 * (ki + hyd[j].conductivity) * (h[j] - hi) / g.dr
                    } else {
                        0.0
                    };
                    let f_in = if ir > 0 {
                        let j = i - 1;
                        g.r_face_outer(ir - 1) * 0.5 * (hyd[j].conductivity + ki) * (hi - h[j]) / g.dr
                    } else {
                        0.0
                    };
                    let radial = (f_out - f_in) / (ri * g.dr);

                    // azimuthal, periodic
                    let azimuthal = if nt > 1 {
                        let jp = g.index(ir, itp, iz);
                        let jm = g.index(ir, itm, iz);
                        let fp = 0.5 * (ki + hyd[jp].conductivity) * (h[jp] - hi);
                        let fm = 0.5 * (hyd[jm].conductivity + ki) * (hi - h[jm]);
                        (fp - fm) / (ri * ri * dth2)
                    } else {
                        0.0
                    };

                    // vertical: downward flux F = K (dh/dz + 1) with z pointing up
                    let f_above = if iz == 0 {
                        surface_flux + input.rate_at(ir, it)
                    } else {
                        let j = i - layer;
                        0.5 * (hyd[j].conductivity + ki) * ((h[j] - hi) / g.dz + 1.0)
                    };
                    let f_below = if iz + 1 < nz {
                        let j = i + layer;
                        0.5 * (ki + hyd[j].conductivity) * ((hi - h[j]) / g.dz + 1.0)
                    } else {
                        self.bottom_flux(i, hi, ki)
                    };
                    let vertical = (f_above - f_below) / g.dz;

                    let sink = self.sink.sink(hi, top, g.dz, forcing);
                    let storage = self.storage(i, hi, hyd[i].capacity);
                    out[i] = (radial + azimuthal + vertical + sink) / storage;
                }
            }
        }
    }

    #[inline]
    fn storage(&self, i: usize, h: f64, capacity: f64) -> f64 {
        let c = if h > self.capacity_cutoff {
            self.soil_at(i).capillary_capacity(self.capacity_cutoff)
        } else {
            capacity
        };
        c + self.specific_storage
    }

    /// Downward flux through the bottom face of a bottom-layer node [m/s].
    #[inline]
    pub fn bottom_flux(&self, node: usize, h: f64, k: f64) -> f64 {
        match self.bottom {
            BottomBoundary::FreeDrainage => k,
            BottomBoundary::WaterTable => {
                let ks = self.soil_at(node).k_s;
                0.5 * (k + ks) * (h / (0.5 * self.grid.dz) + 1.0)
            }
            BottomBoundary::NoFlux => 0.0,
        }
    }

    /// Advance `h` across one sampling interval `dt` with `n_sub` explicit Euler sub-steps.
    pub fn step(
        &self,
        h: &DVector<f64>,
        input: &SurfaceInput,
        forcing: &EnvironmentForcing,
        dt: f64,
    ) -> Result<DVector<f64>> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::validation("dt", "must be > 0"));
        }
        self.check_state(h.as_slice())?;
        self.check_input(input)?;
        let n = self.n_x();
        let sub = dt / self.n_sub.max(1) as f64;
        let mut state = h.clone();
        let mut rate = vec![0.0; n];
        let mut hyd = vec![
            Hydraulics {
                capacity: 0.0,
                conductivity: 0.0
            };
            n
        ];
        for s in 0..self.n_sub.max(1) {
            self.rhs_into(state.as_slice(), input, forcing, &mut hyd, &mut rate);
            for (x, r) in state.iter_mut().zip(&rate) {
                *x += sub * r;
            }
            if state.iter().any(|v| !v.is_finite()) {
                return Err(Error::UnstableStep { substep: s });
            }
        }
        Ok(state)
    }

    /// Total water stored in the column [m³].
    pub fn water_storage(&self, h: &DVector<f64>) -> f64 {
        h.iter()
            .enumerate()
            .map(|(i, &hi)| {
                let ir = self.grid.node(i).ir;
                self.soil_at(i).water_content(hi) * self.grid.cell_volume(ir)
            })
            .sum()
    }

    /// Largest explicit diffusion number `dt_sub · D_max · (1/Δz² + 1/Δr² + 1/(r₀Δθ)²)`
    /// over the given state, with `D = K/c`.
    pub fn diffusion_cfl(&self, h: &DVector<f64>, dt: f64) -> f64 {
        let g = &self.grid;
        let sub = dt / self.n_sub.max(1) as f64;
        let r0 = g.r(0);
        let geom = 1.0 / (g.dz * g.dz)
            + 1.0 / (g.dr * g.dr)
            + if g.n_theta > 1 {
                1.0 / (r0 * r0 * g.dtheta * g.dtheta)
            } else {
                0.0
            };
        h.iter()
            .enumerate()
            .map(|(i, &hi)| {
                let hy = self.soil_at(i).evaluate(hi);
                hy.conductivity / self.storage(i, hi, hy.capacity)
            })
            .fold(0.0, f64::max)
            * sub
            * geom
    }
}

/// Point sensors: one state node per measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorLayout {
    pub nodes: Vec<usize>,
}

impl SensorLayout {
    pub fn new(nodes: Vec<usize>, n_x: usize) -> Result<Self> {
        if let Some(&index) = nodes.iter().find(|&&i| i >= n_x) {
            return Err(Error::BadSensorIndex { index, n_x });
        }
        Ok(Self { nodes })
    }

    pub fn n_y(&self) -> usize {
        self.nodes.len()
    }

    /// `y = C x + v`.
    pub fn observe(&self, x: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.n_y() {
            return Err(Error::DimensionMismatch {
                what: "measurement noise",
                expected: self.n_y(),
                got: v.len(),
            });
        }
        let mut y = DVector::zeros(self.n_y());
        for (k, &node) in self.nodes.iter().enumerate() {
            if node >= x.len() {
                return Err(Error::BadSensorIndex {
                    index: node,
                    n_x: x.len(),
                });
            }
            y[k] = x[node] + v[k];
        }
        Ok(y)
    }

    /// Dense selection matrix C (N_y × N_x).
    pub fn selection_matrix(&self, n_x: usize) -> nalgebra::DMatrix<f64> {
        let mut c = nalgebra::DMatrix::zeros(self.n_y(), n_x);
        for (k, &node) in self.nodes.iter().enumerate() {
            c[(k, node)] = 1.0;
        }
        c
    }
}
