use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Cell-centred cylindrical grid over a circular field.
///
/// Rings sit at `r_i = (i + 1/2) Δr`, so no node lies on the axis. Layer `iz = 0`
/// is the surface layer; elevation `z` is measured upward from the bottom of
/// the soil column, so the surface is at `z = depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylindricalGrid {
    pub n_r: usize,
    pub n_theta: usize,
    pub n_z: usize,
    pub radius: f64,
    pub depth: f64,
    pub dr: f64,
    pub dtheta: f64,
    pub dz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeIndex {
    pub ir: usize,
    pub itheta: usize,
    pub iz: usize,
}

impl CylindricalGrid {
    pub fn new(n_r: usize, n_theta: usize, n_z: usize, radius: f64, depth: f64) -> Result<Self> {
        if n_r == 0 {
            return Err(Error::validation("grid.N_r", "must be >= 1"));
        }
        if n_theta == 0 {
            return Err(Error::validation("grid.N_theta", "must be >= 1"));
        }
        if n_z == 0 {
            return Err(Error::validation("grid.N_z", "must be >= 1"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::validation("grid.radius", "must be > 0"));
        }
        if !(depth > 0.0 && depth.is_finite()) {
            return Err(Error::validation("grid.depth", "must be > 0"));
        }
        Ok(Self {
            n_r,
            n_theta,
            n_z,
            radius,
            depth,
            dr: radius / n_r as f64,
            dtheta: 2.0 * PI / n_theta as f64,
            dz: depth / n_z as f64,
        })
    }

    #[inline]
    pub fn n_x(&self) -> usize {
        self.n_r * self.n_theta * self.n_z
    }

    #[inline]
    pub fn layer_size(&self) -> usize {
        self.n_r * self.n_theta
    }

    #[inline]
    pub fn index(&self, ir: usize, itheta: usize, iz: usize) -> usize {
        debug_assert!(ir < self.n_r && itheta < self.n_theta && iz < self.n_z);
        (iz * self.n_theta + itheta) * self.n_r + ir
    }

    #[inline]
    pub fn node(&self, idx: usize) -> NodeIndex {
        let ir = idx % self.n_r;
        let rest = idx / self.n_r;
        NodeIndex {
            ir,
            itheta: rest % self.n_theta,
            iz: rest / self.n_theta,
        }
    }

    #[inline]
    pub fn r(&self, ir: usize) -> f64 {
        (ir as f64 + 0.5) * self.dr
    }

    /// Radius of the outer face of ring `ir`.
    #[inline]
    pub fn r_face_outer(&self, ir: usize) -> f64 {
        (ir as f64 + 1.0) * self.dr
    }

    #[inline]
    pub fn theta(&self, itheta: usize) -> f64 {
        (itheta as f64 + 0.5) * self.dtheta
    }

    /// Elevation above the column bottom.
    #[inline]
    pub fn z(&self, iz: usize) -> f64 {
        self.depth - (iz as f64 + 0.5) * self.dz
    }

    /// Depth below the surface.
    #[inline]
    pub fn node_depth(&self, iz: usize) -> f64 {
        (iz as f64 + 0.5) * self.dz
    }

    /// Horizontal area of one cell column in ring `ir` [m²].
    #[inline]
    pub fn column_area(&self, ir: usize) -> f64 {
        self.r(ir) * self.dr * self.dtheta
    }

    #[inline]
    pub fn cell_volume(&self, ir: usize) -> f64 {
        self.column_area(ir) * self.dz
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.n_r).map(|ir| self.column_area(ir)).sum::<f64>() * self.n_theta as f64
    }

    /// Quadrant (0..4) of an azimuthal index, by the angle of the node centre.
    pub fn quadrant(&self, itheta: usize) -> usize {
        ((4.0 * self.theta(itheta) / (2.0 * PI)).floor() as usize).min(3)
    }

    /// Per-node elevation vector.
    pub fn elevations(&self) -> Vec<f64> {
        (0..self.n_x()).map(|i| self.z(self.node(i).iz)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn innermost_ring_is_offset_from_axis() {
        let g = CylindricalGrid::new(10, 12, 6, 50.0, 0.4).unwrap();
        assert_eq!(g.n_x(), 720);
        assert!((g.r(0) - 2.5).abs() < 1e-12);
        assert!((g.surface_area() - PI * 2500.0).abs() < 1e-9);
        assert!((g.z(0) - (0.4 - 0.4 / 12.0)).abs() < 1e-15);
    }

    #[test]
    fn quadrants_split_sectors_evenly() {
        let g = CylindricalGrid::new(2, 12, 1, 1.0, 1.0).unwrap();
        let q: Vec<_> = (0..12).map(|j| g.quadrant(j)).collect();
        assert_eq!(q, vec![0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3]);
    }

    #[test]
    fn rejects_zero_counts() {
        let err = CylindricalGrid::new(0, 4, 4, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("grid.N_r"));
    }

    proptest! {
        #[test]
        fn flat_index_is_bijective(nr in 1usize..7, nt in 1usize..7, nz in 1usize..7) {
            let g = CylindricalGrid::new(nr, nt, nz, 10.0, 1.0).unwrap();
            let mut seen = vec![false; g.n_x()];
            for iz in 0..nz { for it in 0..nt { for ir in 0..nr {
                let i = g.index(ir, it, iz);
                prop_assert!(i < g.n_x());
                prop_assert!(!seen[i]);
                seen[i] = true;
                prop_assert_eq!(g.node(i), NodeIndex { ir, itheta: it, iz });
            }}}
        }
    }
}
