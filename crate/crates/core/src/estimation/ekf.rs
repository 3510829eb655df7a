//! Extended Kalman filter operating in reduced coordinates.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::Dynamics;
use crate::error::{Error, Result};
use crate::hydrology::SensorLayout;
use crate::reduction::ProjectionMatrix;

/// Covariance of the form `(diag − offdiag) I + offdiag 11ᵀ`, never materialised at full order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Covariance {
    pub diag: f64,
    #[serde(default)]
    pub offdiag: f64,
}

impl Covariance {
    pub fn diagonal(diag: f64) -> Self {
        Self { diag, offdiag: 0.0 }
    }

    pub fn dense(&self, n: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| if i == j { self.diag } else { self.offdiag })
    }

    /// `Uᵀ Σ U`.
    pub fn reduce(&self, u: &ProjectionMatrix) -> DMatrix<f64> {
        u.sandwich_structured(self.diag, self.offdiag)
    }
}

/// Full-order tuning covariances of the filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    #[serde(rename = "Q")]
    pub q: Covariance,
    #[serde(rename = "R")]
    pub r: Covariance,
    #[serde(rename = "P0")]
    pub p0: Covariance,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            q: Covariance::diagonal(1.0),
            r: Covariance::diagonal(0.08),
            p0: Covariance {
                diag: 1.0,
                offdiag: 5e-5,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedEkfState {
    pub xi_hat: DVector<f64>,
    pub p_r: DMatrix<f64>,
    pub q_r: DMatrix<f64>,
    pub c_r: DMatrix<f64>,
    pub model_index: usize,
}

impl ReducedEkfState {
    /// Project an initial full-order estimate and `P(t₀)` onto `u`.
    pub fn initialize(
        u: &ProjectionMatrix,
        x0: &DVector<f64>,
        noise: &NoiseConfig,
        sensors: &SensorLayout,
    ) -> Result<Self> {
        Ok(Self {
            xi_hat: u.reduce(x0)?,
            p_r: noise.p0.reduce(u),
            q_r: noise.q.reduce(u),
            c_r: u.output_map(&sensors.nodes)?,
            model_index: u.model_index,
        })
    }

    pub fn r_m(&self) -> usize {
        self.xi_hat.len()
    }
}

pub(crate) fn symmetrize(p: &mut DMatrix<f64>) {
    let n = p.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (p[(i, j)] + p[(j, i)]);
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
}

/// Forward-difference Jacobian of `f` at `x`, given `fx = f(x)`.
/// Perturbation for column `i` is `max(1e-6, 1e-6·|x_i|)`.
pub fn fd_jacobian<D: Dynamics + ?Sized>(
    f: &D,
    k: usize,
    x: &DVector<f64>,
    fx: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut jac = DMatrix::zeros(fx.len(), n);
    let mut xp = x.clone();
    for col in 0..n {
        let h = (1e-6 * x[col].abs()).max(1e-6);
        xp[col] = x[col] + h;
        let step = xp[col] - x[col];
        let fp = f.advance(k, &xp).map_err(|e| match e {
            Error::UnstableStep { .. } | Error::NonFiniteState { .. } => {
                Error::JacobianFailure { column: col }
            }
            other => other,
        })?;
        xp[col] = x[col];
        for row in 0..fx.len() {
            let v = (fp[row] - fx[row]) / step;
            if !v.is_finite() {
                return Err(Error::JacobianFailure { column: col });
            }
            jac[(row, col)] = v;
        }
    }
    Ok(jac)
}

/// Prediction across interval `k` with the reduced map `f_rd` (zero disturbance).
pub fn ekf_predict<D: Dynamics + ?Sized>(
    s: &ReducedEkfState,
    f_rd: &D,
    k: usize,
) -> Result<ReducedEkfState> {
    if f_rd.dim() != s.r_m() {
        return Err(Error::DimensionMismatch {
            what: "reduced dynamics",
            expected: s.r_m(),
            got: f_rd.dim(),
        });
    }
    let xi_pred = f_rd.advance(k, &s.xi_hat)?;
    let a_d = fd_jacobian(f_rd, k, &s.xi_hat, &xi_pred)?;
    let mut p = &a_d * &s.p_r * a_d.transpose() + &s.q_r;
    symmetrize(&mut p);
    Ok(ReducedEkfState {
        xi_hat: xi_pred,
        p_r: p,
        ..s.clone()
    })
}

/// Measurement update with measurement covariance `r` (N_y × N_y).
pub fn ekf_update(s: &ReducedEkfState, y: &DVector<f64>, r: &DMatrix<f64>) -> Result<ReducedEkfState> {
    let n_y = s.c_r.nrows();
    if y.len() != n_y {
        return Err(Error::DimensionMismatch {
            what: "measurement",
            expected: n_y,
            got: y.len(),
        });
    }
    if r.nrows() != n_y || r.ncols() != n_y {
        return Err(Error::DimensionMismatch {
            what: "measurement covariance",
            expected: n_y,
            got: r.nrows(),
        });
    }
    let cp = &s.c_r * &s.p_r;
    let mut innov_cov = r + &cp * s.c_r.transpose();
    symmetrize(&mut innov_cov);
    let scale = innov_cov.diagonal().amax();
    let chol = Cholesky::new(innov_cov).ok_or(Error::SingularInnovation)?;
    let l_min = chol.l_dirty().diagonal().iter().fold(f64::INFINITY, |a, &b| a.min(b.abs()));
    if !(scale > 0.0) || l_min * l_min <= 1e-14 * scale {
        return Err(Error::SingularInnovation);
    }
    // K = P Cᵀ S⁻¹ = (S⁻¹ C P)ᵀ
    let gain = chol.solve(&cp).transpose();
    let innovation = y - &s.c_r * &s.xi_hat;
    let xi = &s.xi_hat + &gain * innovation;
    let mut p = &s.p_r - &gain * cp;
    symmetrize(&mut p);
    Ok(ReducedEkfState {
        xi_hat: xi,
        p_r: p,
        ..s.clone()
    })
}

/// Full-grid estimate `U ξ̂`.
pub fn reconstruct(s: &ReducedEkfState, u: &ProjectionMatrix) -> Result<DVector<f64>> {
    u.lift(&s.xi_hat)
}

/// Move the filter from `u_old` to `u_new` through the full space:
/// `ξ' = U_newᵀ U_old ξ`, `P' = (U_newᵀ U_old) P_r (U_newᵀ U_old)ᵀ`.
pub fn transfer_model(
    s: &ReducedEkfState,
    u_old: &ProjectionMatrix,
    u_new: &ProjectionMatrix,
    noise: &NoiseConfig,
    sensors: &SensorLayout,
) -> Result<ReducedEkfState> {
    if s.r_m() != u_old.r_m() {
        return Err(Error::DimensionMismatch {
            what: "filter order vs old projection",
            expected: u_old.r_m(),
            got: s.r_m(),
        });
    }
    let x_full = u_old.lift(&s.xi_hat)?;
    let xi = u_new.reduce(&x_full)?;
    let t = u_new.cross(u_old)?;
    let mut p = &t * &s.p_r * t.transpose();
    symmetrize(&mut p);
    Ok(ReducedEkfState {
        xi_hat: xi,
        p_r: p,
        q_r: noise.q.reduce(u_new),
        c_r: u_new.output_map(&sensors.nodes)?,
        model_index: u_new.model_index,
    })
}
