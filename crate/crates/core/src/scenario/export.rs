//! CSV export of run artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::runner::RunArtifacts;
use crate::error::Result;
use crate::hydrology::CylindricalGrid;

pub const METRICS_HEADER: &str =
    "step,time_s,percent_mae,e_L,edot_L,r_m,model_index,trigger,iter_seconds";
pub const MODEL_CHANGES_HEADER: &str = "step,time_s,model_index,r_m,e_L_fired,e_L_refit";
pub const SNAPSHOT_HEADER: &str = "node,r,theta,z,h_true,h_est,abs_err";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn metrics_csv(a: &RunArtifacts) -> String {
    let mut s = String::from(METRICS_HEADER);
    s.push('\n');
    for (i, rec) in a.records.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            rec.step,
            rec.step as f64 * a.dt,
            a.percent_mae[i],
            rec.e_l,
            rec.edot_l,
            rec.r_m,
            rec.model_index,
            u8::from(rec.trigger),
            opt(a.iter_seconds.get(i).copied()),
        );
    }
    s
}

pub fn model_changes_csv(a: &RunArtifacts) -> String {
    let mut s = String::from(MODEL_CHANGES_HEADER);
    s.push('\n');
    for c in &a.model_changes {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            c.step,
            c.step as f64 * a.dt,
            c.model_index,
            c.r_m,
            opt(c.e_l_fired),
            c.e_l_refit
        );
    }
    s
}

pub fn snapshot_csv(grid: &CylindricalGrid, h_true: &[f64], h_est: &[f64]) -> String {
    let mut s = String::from(SNAPSHOT_HEADER);
    s.push('\n');
    for i in 0..grid.n_x() {
        let n = grid.node(i);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            i,
            grid.r(n.ir),
            grid.theta(n.itheta),
            grid.z(n.iz),
            h_true[i],
            h_est[i],
            (h_true[i] - h_est[i]).abs()
        );
    }
    s
}

/// Writes `metrics.csv`, `model_changes.csv` and one `state_snapshot_<step>.csv` per
/// recorded snapshot into `outdir`. Returns the paths written.
pub fn export_artifacts(a: &RunArtifacts, grid: &CylindricalGrid, outdir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(outdir)?;
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = outdir.join(name);
        fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    put("metrics.csv".into(), metrics_csv(a))?;
    put("model_changes.csv".into(), model_changes_csv(a))?;
    for snap in &a.snapshots {
        put(
            format!("state_snapshot_{}.csv", snap.step),
            snapshot_csv(grid, snap.h_true.as_slice(), snap.h_est.as_slice()),
        )?;
    }
    Ok(written)
}

/// Side-by-side %MAE and model order of several runs on the same step axis.
pub fn comparison_csv(runs: &[RunArtifacts]) -> String {
    let mut s = String::from("step,time_s");
    for r in runs {
        let _ = write!(s, ",percent_mae_{}", r.scheme.name());
    }
    for r in runs {
        let _ = write!(s, ",r_m_{}", r.scheme.name());
    }
    s.push('\n');
    let n = runs.iter().map(|r| r.records.len()).min().unwrap_or(0);
    let dt = runs.first().map_or(0.0, |r| r.dt);
    for i in 0..n {
        let _ = write!(s, "{},{}", i, i as f64 * dt);
        for r in runs {
            let _ = write!(s, ",{}", r.percent_mae[i]);
        }
        for r in runs {
            let _ = write!(s, ",{}", r.records[i].r_m);
        }
        s.push('\n');
    }
    s
}
