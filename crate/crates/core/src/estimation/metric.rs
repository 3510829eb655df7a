use std::collections::VecDeque;

use nalgebra::DVector;

use crate::dynamics::Dynamics;
use crate::error::Result;
use crate::reduction::{ProjectionMatrix, ReducedModel};

/// Prediction-error metric e_L: both the full model and the reduced model are run
/// `n_fd` intervals from `x_hat` (starting at sampling index `k`), and the absolute
/// deviations are summed over nodes and horizon, then divided by N_x.
pub fn compute_error_metric<D: Dynamics + ?Sized>(
    full: &D,
    k: usize,
    x_hat: &DVector<f64>,
    n_fd: usize,
    u: &ProjectionMatrix,
) -> Result<f64> {
    let reduced = ReducedModel::new(full, u)?;
    let mut x = x_hat.clone();
    let mut xi = u.reduce(x_hat)?;
    let mut total = 0.0;
    for j in 0..n_fd {
        x = full.advance(k + j, &x)?;
        xi = reduced.advance(k + j, &xi)?;
        let approx = u.lift(&xi)?;
        total += approx
            .iter()
            .zip(x.iter())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
    }
    Ok(total / x_hat.len() as f64)
}

/// Rolling e_L history and the re-identification rule
/// `e_L > th_e ∧ ė_L ≥ slope_limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriggerState {
    history: VecDeque<f64>,
    pub th_e: f64,
    pub slope_limit: f64,
}

/// Differences averaged by the slope filter.
pub const SLOPE_WINDOW: usize = 10;

impl TriggerState {
    pub fn new(th_e: f64, slope_limit: f64) -> Self {
        Self {
            history: VecDeque::with_capacity(SLOPE_WINDOW + 1),
            th_e,
            slope_limit,
        }
    }

    pub fn push(&mut self, e_l: f64) {
        if self.history.len() == SLOPE_WINDOW + 1 {
            self.history.pop_front();
        }
        self.history.push_back(e_l);
    }

    pub fn latest(&self) -> Option<f64> {
        self.history.back().copied()
    }

    pub fn history(&self) -> impl Iterator<Item = f64> + '_ {
        self.history.iter().copied()
    }

    /// Mean of the last ten first differences, falling differences counted as 0.
    /// Zero until eleven samples exist.
    pub fn slope_estimate(&self) -> f64 {
        if self.history.len() < SLOPE_WINDOW + 1 {
            return 0.0;
        }
        let rises: f64 = self
            .history
            .iter()
            .zip(self.history.iter().skip(1))
            .map(|(a, b)| (b - a).max(0.0))
            .sum();
        rises / SLOPE_WINDOW as f64
    }

    pub fn should_fire(&self) -> bool {
        self.latest()
            .is_some_and(|e| e > self.th_e && self.slope_estimate() >= self.slope_limit)
    }
}
