use nalgebra::{DMatrix, DVector};

use super::cluster::Clustering;
use crate::error::{Error, Result};

/// Cluster-supported projection `U` (N_x × r_m) with one nonzero per row:
/// `U[i, c(i)] = 1/√|C_c(i)|`. Columns are orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionMatrix {
    pub assignment: Vec<usize>,
    pub weights: Vec<f64>,
    pub sizes: Vec<usize>,
    pub model_index: usize,
}

/// Newtype over the reduced coordinates ξ.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState(pub DVector<f64>);

impl std::ops::Deref for ReducedState {
    type Target = DVector<f64>;
    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

pub fn build_projection(c: &Clustering, model_index: usize) -> ProjectionMatrix {
    let sizes = c.sizes();
    let weights = c
        .assignment
        .iter()
        .map(|&j| 1.0 / (sizes[j] as f64).sqrt())
        .collect();
    ProjectionMatrix {
        assignment: c.assignment.clone(),
        weights,
        sizes,
        model_index,
    }
}

impl ProjectionMatrix {
    pub fn identity(n: usize) -> Self {
        build_projection(&Clustering::singletons(n), 0)
    }

    pub fn n_x(&self) -> usize {
        self.assignment.len()
    }

    pub fn r_m(&self) -> usize {
        self.sizes.len()
    }

    /// ξ = Uᵀ x
    pub fn reduce(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.n_x() {
            return Err(Error::DimensionMismatch {
                what: "full state",
                expected: self.n_x(),
                got: x.len(),
            });
        }
        let mut xi = DVector::zeros(self.r_m());
        for (i, (&c, &w)) in self.assignment.iter().zip(&self.weights).enumerate() {
            xi[c] += w * x[i];
        }
        Ok(xi)
    }

    /// x̃ = U ξ
    pub fn lift(&self, xi: &DVector<f64>) -> Result<DVector<f64>> {
        if xi.len() != self.r_m() {
            return Err(Error::DimensionMismatch {
                what: "reduced state",
                expected: self.r_m(),
                got: xi.len(),
            });
        }
        Ok(DVector::from_iterator(
            self.n_x(),
            self.assignment
                .iter()
                .zip(&self.weights)
                .map(|(&c, &w)| w * xi[c]),
        ))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut u = DMatrix::zeros(self.n_x(), self.r_m());
        for (i, (&c, &w)) in self.assignment.iter().zip(&self.weights).enumerate() {
            u[(i, c)] = w;
        }
        u
    }

    /// `selfᵀ · other` (r_self × r_other), computed row by row without forming either matrix.
    pub fn cross(&self, other: &ProjectionMatrix) -> Result<DMatrix<f64>> {
        if other.n_x() != self.n_x() {
            return Err(Error::DimensionMismatch {
                what: "projection rows",
                expected: self.n_x(),
                got: other.n_x(),
            });
        }
        let mut t = DMatrix::zeros(self.r_m(), other.r_m());
        for i in 0..self.n_x() {
            t[(self.assignment[i], other.assignment[i])] += self.weights[i] * other.weights[i];
        }
        Ok(t)
    }

    /// `Uᵀ M U` for a dense N_x × N_x matrix.
    pub fn sandwich(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if m.nrows() != self.n_x() || m.ncols() != self.n_x() {
            return Err(Error::DimensionMismatch {
                what: "covariance",
                expected: self.n_x(),
                got: m.nrows(),
            });
        }
        let r = self.r_m();
        // (M U) first, then Uᵀ (M U)
        let mut mu = DMatrix::<f64>::zeros(self.n_x(), r);
        for (i, (&c, &w)) in self.assignment.iter().zip(&self.weights).enumerate() {
            for row in 0..self.n_x() {
                mu[(row, c)] += m[(row, i)] * w;
            }
        }
        let mut out = DMatrix::zeros(r, r);
        for (i, (&c, &w)) in self.assignment.iter().zip(&self.weights).enumerate() {
            for col in 0..r {
                out[(c, col)] += w * mu[(i, col)];
            }
        }
        Ok(out)
    }

    /// `Uᵀ ((d − o) I + o 11ᵀ) U = (d − o) I + o s sᵀ` with `s_j = √|C_j|`.
    pub fn sandwich_structured(&self, diag: f64, offdiag: f64) -> DMatrix<f64> {
        let s: Vec<f64> = self.sizes.iter().map(|&n| (n as f64).sqrt()).collect();
        DMatrix::from_fn(self.r_m(), self.r_m(), |a, b| {
            let base = offdiag * s[a] * s[b];
            if a == b {
                base + (diag - offdiag)
            } else {
                base
            }
        })
    }

    /// `C U` for a sensor selection C (N_y × r_m).
    pub fn output_map(&self, sensors: &[usize]) -> Result<DMatrix<f64>> {
        let mut c = DMatrix::zeros(sensors.len(), self.r_m());
        for (k, &node) in sensors.iter().enumerate() {
            if node >= self.n_x() {
                return Err(Error::BadSensorIndex {
                    index: node,
                    n_x: self.n_x(),
                });
            }
            c[(k, self.assignment[node])] = self.weights[node];
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_projection_is_identity() {
        let u = ProjectionMatrix::identity(5);
        assert_eq!(u.to_dense(), DMatrix::identity(5, 5));
        let x = DVector::from_vec(vec![1.0, -2.0, 3.5, 0.25, -7.0]);
        assert_eq!(u.lift(&u.reduce(&x).unwrap()).unwrap(), x);
    }

    #[test]
    fn one_cluster_of_four_has_half_weights() {
        let u = build_projection(&Clustering::from_labels(&[0, 0, 0, 0]), 1);
        assert!(u.to_dense().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn lifted_pair_is_its_mean() {
        let u = build_projection(&Clustering::from_labels(&[0, 0]), 1);
        let x = DVector::from_vec(vec![2.0, 4.0]);
        let back = u.lift(&u.reduce(&x).unwrap()).unwrap();
        assert!((back[0] - 3.0).abs() < 1e-14 && (back[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn dimension_errors() {
        let u = ProjectionMatrix::identity(3);
        assert!(matches!(
            u.reduce(&DVector::zeros(4)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            u.lift(&DVector::zeros(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn structured_sandwich_matches_dense() {
        let u = build_projection(&Clustering::from_labels(&[0, 1, 0, 2, 1, 0]), 1);
        let n = 6;
        let m = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 5e-5 });
        let dense = u.sandwich(&m).unwrap();
        let structured = u.sandwich_structured(1.0, 5e-5);
        assert!((dense - structured).amax() < 1e-14);
        let ud = u.to_dense();
        assert!((u.sandwich(&m).unwrap() - ud.transpose() * &m * &ud).amax() < 1e-14);
    }
}
