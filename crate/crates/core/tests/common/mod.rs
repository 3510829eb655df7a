//! Fixtures and independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use soilrom::hydrology::{
    CylindricalGrid, EnvironmentForcing, RichardsModel, SinkParams, SurfaceInput, VanGenuchtenParams,
};
use soilrom::Dynamics;

pub fn silty_clay_loam() -> VanGenuchtenParams {
    VanGenuchtenParams {
        alpha: 1.0,
        n_vg: 1.23,
        theta_r: 0.089,
        theta_s: 0.43,
        k_s: 1.94e-7,
    }
}

pub fn loam() -> VanGenuchtenParams {
    VanGenuchtenParams {
        alpha: 3.6,
        n_vg: 1.56,
        theta_r: 0.078,
        theta_s: 0.43,
        k_s: 2.89e-6,
    }
}

pub fn sand() -> VanGenuchtenParams {
    VanGenuchtenParams {
        alpha: 14.5,
        n_vg: 2.68,
        theta_r: 0.045,
        theta_s: 0.43,
        k_s: 8.25e-5,
    }
}

pub fn desk_grid() -> CylindricalGrid {
    CylindricalGrid::new(10, 12, 6, 50.0, 0.4).unwrap()
}

pub fn desk_model(n_sub: usize) -> RichardsModel {
    RichardsModel::homogeneous(desk_grid(), silty_clay_loam(), n_sub)
}

pub fn config_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

/// 64-node scenario that runs in well under a second per scheme.
pub const TINY_CONFIG: &str = r#"
seed = 3
steps = 30
N_fd = 5
th_e = 0.5
th_C = 0.5
snapshot_steps = [0, 29]

[grid]
N_r = 4
N_theta = 4
N_z = 4
radius = 20.0
depth = 0.4
n_sub = 20

[soil]
layout = "quadrants"
zones = [
  { alpha = 1.0, n_vg = 1.23, theta_r = 0.089, theta_s = 0.43, K_s = 1.94e-7 },
  { alpha = 1.2, n_vg = 1.25, theta_r = 0.090, theta_s = 0.42, K_s = 2.5e-7 },
  { alpha = 0.8, n_vg = 1.21, theta_r = 0.085, theta_s = 0.44, K_s = 1.5e-7 },
  { alpha = 1.4, n_vg = 1.28, theta_r = 0.080, theta_s = 0.41, K_s = 3.5e-7 },
]

[sensors.lattice]
rings = [1]
sectors = [0, 1, 2, 3]
layers = [0, 2]

[forcing]
irrigation_rate = 7.0e-7
et_daily = 0.003
"#;

/// Textbook dense extended Kalman filter over the full state, with forward-difference
/// Jacobians using the same perturbation rule as the library.
pub struct FullOrderEkf {
    pub x: DVector<f64>,
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

impl FullOrderEkf {
    pub fn predict<D: Dynamics>(&mut self, model: &D, k: usize) {
        let n = self.x.len();
        let fx = model.advance(k, &self.x).unwrap();
        let mut a = DMatrix::zeros(n, n);
        for j in 0..n {
            let h = f64::max(1e-6, 1e-6 * self.x[j].abs());
            let mut xp = self.x.clone();
            xp[j] += h;
            let step = xp[j] - self.x[j];
            let fp = model.advance(k, &xp).unwrap();
            for i in 0..n {
                a[(i, j)] = (fp[i] - fx[i]) / step;
            }
        }
        self.x = fx;
        let p = &a * &self.p * a.transpose() + &self.q;
        self.p = (&p + p.transpose()) * 0.5;
    }

    pub fn update(&mut self, y: &DVector<f64>) {
        let cp = &self.c * &self.p;
        let s = &cp * self.c.transpose() + &self.r;
        let s = (&s + s.transpose()) * 0.5;
        let chol = s.cholesky().expect("innovation covariance positive definite");
        let gain = chol.solve(&cp).transpose();
        self.x = &self.x + &gain * (y - &self.c * &self.x);
        let p = &self.p - &gain * cp;
        self.p = (&p + p.transpose()) * 0.5;
    }
}

/// Exhaustive average-linkage reference: every iteration recomputes all inter-cluster
/// averages from the raw pairwise distances. Cluster identity is the smallest member;
/// ties go to the lexicographically smallest pair of identities.
pub fn reference_clustering(columns: &[Vec<f64>], th_c: f64) -> Vec<usize> {
    let n = columns.len();
    let dist = |a: usize, b: usize| -> f64 {
        columns[a]
            .iter()
            .zip(&columns[b])
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut total = 0.0;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        total += dist(i, j);
                    }
                }
                let avg = total / (clusters[a].len() * clusters[b].len()) as f64;
                let key = (clusters[a][0].min(clusters[b][0]), clusters[a][0].max(clusters[b][0]));
                let better = match best {
                    None => true,
                    Some((d, ia, ib)) => {
                        let bkey = (clusters[ia][0].min(clusters[ib][0]), clusters[ia][0].max(clusters[ib][0]));
                        avg < d || (avg == d && key < bkey)
                    }
                };
                if better {
                    best = Some((avg, a, b));
                }
            }
        }
        match best {
            Some((d, a, b)) if d < th_c => {
                let moved = clusters.remove(b);
                clusters[a].extend(moved);
                clusters[a].sort_unstable();
            }
            _ => break,
        }
    }
    clusters.sort_by_key(|c| c[0]);
    let mut labels = vec![0; n];
    for (id, c) in clusters.iter().enumerate() {
        for &i in c {
            labels[i] = id;
        }
    }
    labels
}

/// Cumulative surface inflow, bottom drainage and root extraction [m³] over `steps`
/// intervals, integrated at sub-step resolution from closures evaluated in this file.
pub fn water_budget(
    model: &RichardsModel,
    h0: &DVector<f64>,
    steps: usize,
    dt: f64,
    input: impl Fn(usize) -> (SurfaceInput, EnvironmentForcing),
) -> (f64, f64, f64, f64, f64) {
    let g = &model.grid;
    let mut one = model.clone();
    one.n_sub = 1;
    let sub = dt / model.n_sub as f64;
    let (mut inflow, mut drain, mut uptake) = (0.0, 0.0, 0.0);
    let mut h = h0.clone();
    for k in 0..steps {
        let (u, f) = input(k);
        for _ in 0..model.n_sub {
            for ir in 0..g.n_r {
                for it in 0..g.n_theta {
                    let area = g.column_area(ir);
                    inflow += (f.rain + u.u[ir] * f64::from(it == u.active_sector)) * area * sub;
                    let b = g.index(ir, it, g.n_z - 1);
                    drain += model.soil_at(b).hydraulic_conductivity(h[b]) * area * sub;
                }
            }
            for i in 0..g.n_x() {
                let n = g.node(i);
                let top = n.iz as f64 * g.dz;
                let overlap = (model.sink.root_depth.min(top + g.dz) - top).max(0.0);
                let beta = feddes(h[i], &model.sink);
                uptake += beta * f.k_c * f.et * overlap / model.sink.root_depth
                    * g.column_area(n.ir)
                    * sub;
            }
            h = one.step(&h, &u, &f, sub).unwrap();
        }
    }
    let d_storage = model.water_storage(&h) - model.water_storage(h0);
    let residual = d_storage - (inflow - drain - uptake);
    (d_storage, inflow, drain, uptake, residual)
}

pub fn feddes(h: f64, s: &SinkParams) -> f64 {
    let pts = [
        (s.h_wilting, 0.0),
        (s.h_stress, 1.0),
        (s.h_field_capacity, 1.0),
        (s.h_anaerobic, 0.0),
    ];
    if h <= pts[0].0 || h >= pts[3].0 {
        return 0.0;
    }
    for w in pts.windows(2) {
        let ((h0, b0), (h1, b1)) = (w[0], w[1]);
        if h <= h1 {
            return b0 + (b1 - b0) * (h - h0) / (h1 - h0);
        }
    }
    0.0
}
