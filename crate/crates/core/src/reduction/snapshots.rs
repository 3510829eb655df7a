use nalgebra::{DMatrix, DVector};

use crate::dynamics::Dynamics;
use crate::error::{Error, Result};

/// Time-by-node trajectory matrix; row `j` is the state `j` intervals after `origin_time`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    pub data: DMatrix<f64>,
    pub origin_time: usize,
}

impl SnapshotMatrix {
    pub fn from_rows(rows: &[DVector<f64>], origin_time: usize) -> Result<Self> {
        let n_x = rows.first().map_or(0, |r| r.len());
        if let Some(bad) = rows.iter().find(|r| r.len() != n_x) {
            return Err(Error::DimensionMismatch {
                what: "snapshot row",
                expected: n_x,
                got: bad.len(),
            });
        }
        let data = DMatrix::from_fn(rows.len(), n_x, |t, i| rows[t][i]);
        if let Some(node) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState {
                node: node / data.nrows().max(1),
            });
        }
        Ok(Self { data, origin_time })
    }

    /// Number of time samples (`N_fd + 1`).
    pub fn n_samples(&self) -> usize {
        self.data.nrows()
    }

    /// Number of trajectories (`N_x`).
    pub fn n_nodes(&self) -> usize {
        self.data.ncols()
    }

    /// The full trajectory of one node; contiguous because storage is column-major.
    pub fn trajectory(&self, node: usize) -> &[f64] {
        let t = self.n_samples();
        &self.data.as_slice()[node * t..(node + 1) * t]
    }
}

/// Noise-free simulation of `n_fd` intervals from `x0` starting at sampling index `k0`.
pub fn generate_snapshots<D: Dynamics + ?Sized>(
    dynamics: &D,
    k0: usize,
    x0: &DVector<f64>,
    n_fd: usize,
) -> Result<SnapshotMatrix> {
    if n_fd == 0 {
        return Err(Error::validation("N_fd", "must be >= 1"));
    }
    let rows = crate::dynamics::trajectory(dynamics, k0, x0, n_fd)?;
    SnapshotMatrix::from_rows(&rows, k0)
}
