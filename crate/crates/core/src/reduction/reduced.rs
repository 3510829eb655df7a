use nalgebra::DVector;

use super::projection::ProjectionMatrix;
use crate::dynamics::Dynamics;
use crate::error::{Error, Result};

/// Petrov-Galerkin reduced map `ξ' = Uᵀ f_d(U ξ)` with identical trial and test bases.
pub struct ReducedModel<'a, D: ?Sized> {
    pub full: &'a D,
    pub projection: &'a ProjectionMatrix,
}

impl<'a, D: Dynamics + ?Sized> ReducedModel<'a, D> {
    pub fn new(full: &'a D, projection: &'a ProjectionMatrix) -> Result<Self> {
        if full.dim() != projection.n_x() {
            return Err(Error::DimensionMismatch {
                what: "projection rows vs model states",
                expected: full.dim(),
                got: projection.n_x(),
            });
        }
        Ok(Self { full, projection })
    }
}

impl<D: Dynamics + ?Sized> Dynamics for ReducedModel<'_, D> {
    fn dim(&self) -> usize {
        self.projection.r_m()
    }

    fn advance(&self, k: usize, xi: &DVector<f64>) -> Result<DVector<f64>> {
        let x = self.projection.lift(xi)?;
        let next = self.full.advance(k, &x)?;
        self.projection.reduce(&next)
    }
}

/// One reduced step from sampling index `k`.
pub fn reduced_step<D: Dynamics + ?Sized>(
    full: &D,
    projection: &ProjectionMatrix,
    k: usize,
    xi: &DVector<f64>,
) -> Result<DVector<f64>> {
    ReducedModel::new(full, projection)?.advance(k, xi)
}
