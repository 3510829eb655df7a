//! Acceptance suite. Every criterion runs in turn inside one test so the timing
//! comparison is not disturbed by other tests, and each prints a PASS/FAIL line.

mod common;

use std::collections::HashMap;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soilrom::estimation::*;
use soilrom::hydrology::*;
use soilrom::reduction::*;
use soilrom::scenario::*;
use soilrom::Dynamics;

const ORACLE_TOL: f64 = 1e-8;
const ORACLE_STEPS: usize = 100;
const ORTHONORMAL_TOL: f64 = 1e-12;
const AVERAGING_TOL: f64 = 1e-12;
const PARTITIONS: usize = 1000;
const MAX_PARTITION_NODES: usize = 500;
const CLUSTER_FIXTURES: usize = 30;
const CLUSTER_THRESHOLDS: [f64; 3] = [0.1, 1.0, 10.0];
const BUDGET_REL_TOL: f64 = 0.01;
const HYDROSTATIC_TOL: f64 = 1e-8;
const AXISYMMETRY_TOL: f64 = 1e-12;
const MIN_MAE_DROP: f64 = 0.5;
const FULL_EKF_ITERATIONS: usize = 3;

const LIMIT_1: Duration = Duration::from_secs(60);
const LIMIT_2: Duration = Duration::from_secs(10);
const LIMIT_3: Duration = Duration::from_secs(30);
const LIMIT_4: Duration = Duration::from_secs(120);
const LIMIT_5: Duration = Duration::from_secs(600);
const LIMIT_6: Duration = Duration::from_secs(1200);

type Verdict = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Runs `f`, adding `shared` (time spent on inputs common to several criteria) to its runtime.
fn timed(limit: Option<Duration>, shared: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed() + shared;
    let out = out.map(|s| format!("{s}; {:.1} s", took.as_secs_f64()));
    match (out, limit) {
        (Ok(s), Some(lim)) if took > lim => Err(format!("{s}, over the {} s limit", lim.as_secs())),
        (out, _) => out,
    }
}

fn oracle_fixture() -> ScenarioConfig {
    let text = TINY_CONFIG
        .replace("steps = 30", &format!("steps = {ORACLE_STEPS}"))
        .replace("N_theta = 4", "N_theta = 6")
        .replace("N_z = 4", "N_z = 5")
        .replace("sectors = [0, 1, 2, 3]", "sectors = [0, 2, 4]")
        .replace("layers = [0, 2]", "layers = [0, 2, 4]");
    parse_config(&text).unwrap()
}

fn criterion_1() -> Verdict {
    let cfg = oracle_fixture();
    let n = cfg.grid().unwrap().n_x();
    ensure!(n <= 200, "fixture has {n} nodes");
    let truth = run_truth(&cfg).unwrap();
    let dynamics = estimator_dynamics(&cfg).unwrap();
    let sensors = cfg.sensor_layout().unwrap();
    let noise = cfg.noise_config();
    let x0 = cfg.quadrant_state(&cfg.initial.guess).unwrap();

    let mut reduced = AdaptiveEstimator::new(
        &dynamics,
        &sensors,
        noise,
        estimator_settings(&cfg, Scheme::Static),
        x0.clone(),
    )
    .unwrap()
    .with_fixed_projection(ProjectionMatrix::identity(n))
    .unwrap();
    let mut full = FullOrderEkf {
        x: x0,
        p: noise.p0.dense(n),
        q: noise.q.dense(n),
        r: noise.r.dense(sensors.n_y()),
        c: sensors.selection_matrix(n),
    };

    let mut worst: f64 = 0.0;
    for (k, y) in truth.measurements.iter().enumerate() {
        if k > 0 {
            full.predict(&dynamics, k - 1);
        }
        full.update(y);
        reduced.step(y).map_err(|e| e.to_string())?;
        let gap = (reduced.estimate() - &full.x).amax();
        worst = worst.max(gap);
        ensure!(gap <= ORACLE_TOL, "step {k}: estimate differs by {gap:e}");
    }
    Ok(format!("{n} nodes, {ORACLE_STEPS} steps, max deviation {worst:.2e}"))
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst_gram: f64 = 0.0;
    let mut worst_avg: f64 = 0.0;
    for case in 0..PARTITIONS {
        let n = rng.random_range(1..=MAX_PARTITION_NODES);
        let k = rng.random_range(1..=n);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let u = build_projection(&Clustering::from_labels(&labels), 1);
        let r = u.r_m();

        // rows of U recovered through lift of unit reduced vectors
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut e = DVector::zeros(r);
        for a in 0..r {
            e[a] = 1.0;
            let col = u.lift(&e).unwrap();
            e[a] = 0.0;
            for (i, &v) in col.iter().enumerate() {
                if v != 0.0 {
                    rows[i].push((a, v));
                }
            }
        }
        let mut gram: HashMap<(usize, usize), f64> = HashMap::new();
        for row in &rows {
            for &(a, va) in row {
                for &(b, vb) in row {
                    *gram.entry((a, b)).or_default() += va * vb;
                }
            }
        }
        for a in 0..r {
            gram.entry((a, a)).or_default();
        }
        for (&(a, b), &v) in &gram {
            let err = (v - f64::from(u8::from(a == b))).abs();
            worst_gram = worst_gram.max(err);
            ensure!(err <= ORTHONORMAL_TOL, "case {case}: (UᵀU)[{a},{b}] = {v}");
        }

        let x = DVector::from_fn(n, |_, _| rng.random_range(-20.0..0.0));
        let projected = u.lift(&u.reduce(&x).unwrap()).unwrap();
        for i in 0..n {
            let (mut sum, mut count) = (0.0, 0usize);
            for j in 0..n {
                if labels[j] == labels[i] {
                    sum += x[j];
                    count += 1;
                }
            }
            let err = (projected[i] - sum / count as f64).abs();
            worst_avg = worst_avg.max(err);
            ensure!(err <= AVERAGING_TOL, "case {case}: node {i} average off by {err:e}");
        }
    }
    Ok(format!(
        "{PARTITIONS} partitions, max |UᵀU − I| {worst_gram:.1e}, max averaging error {worst_avg:.1e}"
    ))
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut orders = Vec::new();
    for case in 0..CLUSTER_FIXTURES {
        let samples = rng.random_range(2..8);
        let scale = [0.2, 1.0, 5.0][case % 3];
        let cols: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..samples).map(|_| scale * rng.random_range(-1.0..1.0)).collect())
            .collect();
        let x = SnapshotMatrix {
            data: DMatrix::from_fn(samples, 12, |t, c| cols[c][t]),
            origin_time: 0,
        };
        for th in CLUSTER_THRESHOLDS {
            let got = cluster_trajectories(&x, th).map_err(|e| e.to_string())?;
            let expect = reference_clustering(&cols, th);
            ensure!(got.assignment == expect, "fixture {case}, th_C {th}: {:?} vs {expect:?}", got.assignment);
            orders.push(got.r_m);
        }
    }
    let (lo, hi) = (orders.iter().min().unwrap(), orders.iter().max().unwrap());
    Ok(format!("{} comparisons, r_m from {lo} to {hi}", orders.len()))
}

fn criterion_4() -> Verdict {
    let day = 48;
    let dt = 1800.0;
    let model = desk_model(40);
    let g = model.grid.clone();
    let h0 = DVector::from_fn(g.n_x(), |i, _| [-13.5, -14.0, -12.7, -11.5][g.quadrant(g.node(i).itheta)]);
    let (_, inflow, _, _, residual) = water_budget(&model, &h0, day, dt, |k| {
        (
            SurfaceInput::uniform(g.n_r, 7e-7, k % g.n_theta),
            EnvironmentForcing {
                et: 0.003 / 86_400.0,
                k_c: 1.0,
                rain: 0.0,
            },
        )
    });
    ensure!(inflow > 0.0, "no inflow");
    let budget = residual.abs() / inflow;
    ensure!(budget <= BUDGET_REL_TOL, "budget residual {budget:.3e} of inflow");

    let quiet = EnvironmentForcing {
        et: 0.0,
        k_c: 1.0,
        rain: 0.0,
    };
    let mut wt = desk_model(40);
    wt.bottom = BottomBoundary::WaterTable;
    let still = DVector::from_iterator(g.n_x(), g.elevations().into_iter().map(|z| -z));
    let mut h = still.clone();
    for _ in 0..day {
        h = wt.step(&h, &SurfaceInput::none(g.n_r), &quiet, dt).map_err(|e| e.to_string())?;
    }
    let drift = (&h - &still).amax();
    ensure!(drift <= HYDROSTATIC_TOL, "hydrostatic drift {drift:e}");

    let wet = EnvironmentForcing {
        et: 0.003 / 86_400.0,
        k_c: 1.0,
        rain: 2e-7,
    };
    let mut h = DVector::from_fn(g.n_x(), |i, _| {
        let n = g.node(i);
        -2.0 - 0.5 * n.iz as f64 - 0.1 * n.ir as f64
    });
    for _ in 0..day {
        h = model.step(&h, &SurfaceInput::none(g.n_r), &wet, dt).map_err(|e| e.to_string())?;
    }
    let mut spread: f64 = 0.0;
    for iz in 0..g.n_z {
        for ir in 0..g.n_r {
            let first = h[g.index(ir, 0, iz)];
            for it in 1..g.n_theta {
                spread = spread.max((h[g.index(ir, it, iz)] - first).abs());
            }
        }
    }
    ensure!(spread <= AXISYMMETRY_TOL, "azimuthal spread {spread:e}");
    Ok(format!(
        "budget residual {budget:.2e} of inflow, hydrostatic drift {drift:.1e}, azimuthal spread {spread:.1e}"
    ))
}

struct DeskRun {
    cfg: ScenarioConfig,
    runs: Vec<RunArtifacts>,
}

impl DeskRun {
    fn scheme(&self, s: Scheme) -> &RunArtifacts {
        self.runs.iter().find(|a| a.scheme == s).unwrap()
    }
}

fn desk_compare() -> Result<DeskRun, String> {
    let mut cfg = load_config(&config_path("desk_shift.toml")).map_err(|e| e.to_string())?;
    cfg.record_timing = true;
    let (_, runs) = compare_schemes(&cfg).map_err(|e| e.to_string())?;
    Ok(DeskRun { cfg, runs })
}

fn criterion_5(desk: &DeskRun) -> Verdict {
    let cfg = &desk.cfg;
    let shift = cfg.shift.as_ref().ok_or("desk scenario has no shift")?.step;
    let perf = desk.scheme(Scheme::Performance);
    let after = perf.model_changes.iter().filter(|c| c.step >= shift).count();
    ensure!(after >= 1, "no re-identification after the shift at step {shift}");

    let first_exceed = perf.records.iter().position(|r| r.e_l > cfg.th_e);
    for c in perf.model_changes.iter().skip(1) {
        ensure!(
            first_exceed.is_some_and(|f| f < c.step),
            "re-identification at step {} before e_L first exceeded th_e",
            c.step
        );
        let fired = c.e_l_fired.ok_or("missing firing value")?;
        ensure!(fired > cfg.th_e, "step {}: fired at e_L {fired} <= th_e", c.step);
        ensure!(c.e_l_refit <= fired, "step {}: refit e_L {} above {fired}", c.step, c.e_l_refit);
    }
    for c in &perf.model_changes {
        let window = &perf.records[c.step..perf.records.len().min(c.step + cfg.n_fd + 1)];
        let best = window.iter().map(|r| r.e_l).fold(f64::INFINITY, f64::min);
        ensure!(best < cfg.th_e, "e_L stayed above th_e for N_fd steps after step {}", c.step);
    }
    let steps: Vec<usize> = perf.model_changes.iter().map(|c| c.step).collect();
    Ok(format!("identifications at {steps:?}, {after} after shift at {shift}"))
}

fn criterion_6(desk: &DeskRun) -> Verdict {
    let perf = desk.scheme(Scheme::Performance);
    let stat = desk.scheme(Scheme::Static);
    let timed_scheme = desk.scheme(Scheme::TimeTriggered);
    let last = |a: &RunArtifacts| *a.percent_mae.last().unwrap();
    ensure!(
        last(perf) < last(stat),
        "final %MAE performance {:.3} vs static {:.3}",
        last(perf),
        last(stat)
    );
    ensure!(
        desk.cfg.time_trigger_period() == desk.cfg.n_fd,
        "time-triggered period is not N_fd"
    );
    ensure!(
        perf.identifications() <= timed_scheme.identifications(),
        "changes performance {} vs time-triggered {}",
        perf.identifications(),
        timed_scheme.identifications()
    );
    let first = perf.percent_mae[0];
    let drop = 1.0 - last(perf) / first;
    ensure!(drop >= MIN_MAE_DROP, "%MAE fell only {:.1}% ({first:.3} -> {:.3})", 100.0 * drop, last(perf));
    Ok(format!(
        "final %MAE performance {:.3}, static {:.3}, time-triggered {:.3}; changes {} vs {}; drop {:.1}%",
        last(perf),
        last(stat),
        last(timed_scheme),
        perf.identifications(),
        timed_scheme.identifications(),
        100.0 * drop
    ))
}

fn criterion_7(desk: &DeskRun) -> Verdict {
    let perf = desk.scheme(Scheme::Performance);
    ensure!(!perf.iter_seconds.is_empty(), "timing was not recorded");
    let reduced = perf.iter_seconds.iter().sum::<f64>() / perf.iter_seconds.len() as f64;

    let cfg = &desk.cfg;
    let dynamics = estimator_dynamics(cfg).unwrap();
    let sensors = cfg.sensor_layout().unwrap();
    let noise = cfg.noise_config();
    let n = dynamics.dim();
    let mut full = FullOrderEkf {
        x: cfg.quadrant_state(&cfg.initial.guess).unwrap(),
        p: noise.p0.dense(n),
        q: noise.q.dense(n),
        r: noise.r.dense(sensors.n_y()),
        c: sensors.selection_matrix(n),
    };
    let truth = run_truth(cfg).unwrap();
    let start = Instant::now();
    for k in 0..FULL_EKF_ITERATIONS {
        if k > 0 {
            full.predict(&dynamics, k - 1);
        }
        full.update(&truth.measurements[k]);
    }
    // the first iteration has no prediction, so average over the predicting ones
    let full_mean = start.elapsed().as_secs_f64() / (FULL_EKF_ITERATIONS - 1) as f64;
    ensure!(reduced < full_mean, "reduced {reduced:.4} s vs full {full_mean:.4} s per iteration");
    Ok(format!(
        "{n} nodes: reduced {reduced:.3} s vs full-order {full_mean:.3} s per iteration ({:.1}x)",
        full_mean / reduced
    ))
}

fn criterion_8() -> Verdict {
    let text = std::fs::read_to_string(config_path("desk_shift.toml")).unwrap();
    let short = text
        .replace("steps = 480", "steps = 48")
        .replace("snapshot_steps = [0, 239, 479]", "snapshot_steps = [0, 47]")
        .replace("step = 240", "step = 24");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("desk_short.toml");
    std::fs::write(&cfg, short).unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_soilrom"))
            .arg("compare")
            .arg(&cfg)
            .arg("--outdir")
            .arg(&out)
            .args(["--seed", "7"])
            .output()
            .unwrap();
        ensure!(status.status.success(), "compare failed: {}", String::from_utf8_lossy(&status.stderr));
        outputs.push(out);
    }
    for s in Scheme::ALL {
        let a = std::fs::read(outputs[0].join(s.name()).join("metrics.csv")).unwrap();
        let b = std::fs::read(outputs[1].join(s.name()).join("metrics.csv")).unwrap();
        ensure!(a == b, "{} metrics.csv differs between runs", s.name());
        ensure!(a.len() > 100, "{} metrics.csv is nearly empty", s.name());
    }
    let a = std::fs::read(outputs[0].join("compare.csv")).unwrap();
    let b = std::fs::read(outputs[1].join("compare.csv")).unwrap();
    ensure!(a == b, "compare.csv differs between runs");
    Ok("metrics.csv byte-identical for all three schemes".into())
}

fn main() {
    let mut verdicts: Vec<(usize, Verdict)> = Vec::new();
    let mut report = |n: usize, v: Verdict| {
        match &v {
            Ok(s) => println!("criterion {n}: PASS ({s})"),
            Err(s) => println!("criterion {n}: FAIL ({s})"),
        }
        verdicts.push((n, v));
    };
    report(1, timed(Some(LIMIT_1), Duration::ZERO, criterion_1));
    report(2, timed(Some(LIMIT_2), Duration::ZERO, criterion_2));
    report(3, timed(Some(LIMIT_3), Duration::ZERO, criterion_3));
    report(4, timed(Some(LIMIT_4), Duration::ZERO, criterion_4));

    let started = Instant::now();
    match desk_compare() {
        Ok(desk) => {
            let compare_time = started.elapsed();
            report(5, timed(Some(LIMIT_5), compare_time, || criterion_5(&desk)));
            report(6, timed(Some(LIMIT_6), compare_time, || criterion_6(&desk)));
            report(7, timed(None, Duration::ZERO, || criterion_7(&desk)));
            println!("desk comparison took {:.1} s", compare_time.as_secs_f64());
        }
        Err(e) => {
            for n in 5..=7 {
                report(n, Err(format!("desk scenario failed: {e}")));
            }
        }
    }
    report(8, timed(None, Duration::ZERO, criterion_8));

    let failed: Vec<usize> = verdicts.iter().filter(|(_, v)| v.is_err()).map(|(n, _)| *n).collect();
    if failed.is_empty() {
        println!("all criteria passed");
    } else {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
