//! Trajectory-clustering model reduction.

mod cluster;
mod projection;
mod reduced;
mod snapshots;

pub use cluster::{
    cluster_trajectories, cluster_with_dendrogram, trajectory_distance, Clustering, Dendrogram,
    Merge,
};
pub use projection::{build_projection, ProjectionMatrix, ReducedState};
pub use reduced::{reduced_step, ReducedModel};
pub use snapshots::{generate_snapshots, SnapshotMatrix};

use nalgebra::DVector;

use crate::dynamics::Dynamics;
use crate::error::Result;

/// Snapshot generation, clustering and projection in one call.
pub fn identify_model<D: Dynamics + ?Sized>(
    dynamics: &D,
    k0: usize,
    x0: &DVector<f64>,
    n_fd: usize,
    th_c: f64,
    model_index: usize,
) -> Result<ProjectionMatrix> {
    let snapshots = generate_snapshots(dynamics, k0, x0, n_fd)?;
    let clustering = cluster_trajectories(&snapshots, th_c)?;
    Ok(build_projection(&clustering, model_index))
}
