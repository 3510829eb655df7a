use nalgebra::DVector;

use crate::error::Result;

/// A discrete-time map advancing a state across one sampling interval.
///
/// `k` is the sampling index of the interval start, so `advance(k, x)` maps
/// `x(t_k)` to `x(t_{k+1})` using whatever inputs are scheduled for interval `k`.
pub trait Dynamics: Sync {
    fn dim(&self) -> usize;

    fn advance(&self, k: usize, x: &DVector<f64>) -> Result<DVector<f64>>;
}

impl<D: Dynamics + ?Sized> Dynamics for &D {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn advance(&self, k: usize, x: &DVector<f64>) -> Result<DVector<f64>> {
        (**self).advance(k, x)
    }
}

/// Simulate `steps` intervals starting at index `k0`; returns all `steps + 1` states.
pub fn trajectory<D: Dynamics + ?Sized>(
    dynamics: &D,
    k0: usize,
    x0: &DVector<f64>,
    steps: usize,
) -> Result<Vec<DVector<f64>>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x0.clone());
    for j in 0..steps {
        let next = dynamics.advance(k0 + j, &out[j])?;
        out.push(next);
    }
    Ok(out)
}
