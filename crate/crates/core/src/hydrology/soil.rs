//! van Genuchten–Mualem constitutive relations.
//!
//! All three closures are total on finite inputs: for `h >= 0` they are clamped
//! at their saturated values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VanGenuchtenParams {
    /// Inverse air-entry head [1/m].
    pub alpha: f64,
    /// Shape exponent [-], must exceed 1.
    pub n_vg: f64,
    pub theta_r: f64,
    pub theta_s: f64,
    /// Saturated conductivity [m/s].
    #[serde(rename = "K_s")]
    pub k_s: f64,
}

impl VanGenuchtenParams {
    pub fn validate(&self, key: &str) -> Result<()> {
        let bad = |field: &str, why: &str| Err(Error::validation(&format!("{key}.{field}"), why));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha", "must be > 0");
        }
        if !(self.n_vg > 1.0 && self.n_vg.is_finite()) {
            return bad("n_vg", "must be > 1");
        }
        if !(self.k_s > 0.0 && self.k_s.is_finite()) {
            return bad("K_s", "must be > 0");
        }
        if !(0.0 <= self.theta_r && self.theta_r < self.theta_s && self.theta_s <= 1.0) {
            return bad("theta_s", "requires 0 <= theta_r < theta_s <= 1");
        }
        Ok(())
    }

    #[inline]
    fn m(&self) -> f64 {
        1.0 - 1.0 / self.n_vg
    }

    /// Effective saturation S_e in [0, 1].
    #[inline]
    pub fn effective_saturation(&self, h: f64) -> f64 {
        if h >= 0.0 {
            return 1.0;
        }
        let p = (self.alpha * -h).powf(self.n_vg);
        (1.0 + p).powf(-self.m())
    }

    pub fn water_content(&self, h: f64) -> f64 {
        self.theta_r + (self.theta_s - self.theta_r) * self.effective_saturation(h)
    }

    pub fn capillary_capacity(&self, h: f64) -> f64 {
        self.evaluate(h).capacity
    }

    pub fn hydraulic_conductivity(&self, h: f64) -> f64 {
        self.evaluate(h).conductivity
    }

    /// Capacity and conductivity together, sharing the expensive powers.
    #[inline]
    pub fn evaluate(&self, h: f64) -> Hydraulics {
        if h >= 0.0 {
            return Hydraulics {
                capacity: 0.0,
                conductivity: self.k_s,
            };
        }
        let m = self.m();
        let ah = self.alpha * -h;
        let p = ah.powf(self.n_vg);
        let one_p = 1.0 + p;
        let se = one_p.powf(-m);
        // dθ/dh = (θs-θr) m n α (α|h|)^(n-1) (1+p)^(-m-1)
        let capacity = if ah > 0.0 {
            (self.theta_s - self.theta_r) * m * self.n_vg * self.alpha * (p / ah) * (se / one_p)
        } else {
            0.0
        };
        // S_e^(1/m) = 1/(1+p), so 1 - S_e^(1/m) = p/(1+p)
        let bracket = 1.0 - (p / one_p).powf(m);
        let conductivity = self.k_s * se.sqrt() * bracket * bracket;
        Hydraulics {
            capacity,
            conductivity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hydraulics {
    /// dθ/dh [1/m]
    pub capacity: f64,
    /// K(h) [m/s]
    pub conductivity: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loam() -> VanGenuchtenParams {
        VanGenuchtenParams {
            alpha: 3.6,
            n_vg: 1.56,
            theta_r: 0.078,
            theta_s: 0.43,
            k_s: 2.89e-6,
        }
    }

    #[test]
    fn saturation_and_residual_limits() {
        let p = loam();
        assert_eq!(p.water_content(0.0), p.theta_s);
        assert_eq!(p.water_content(2.0), p.theta_s);
        assert!((p.water_content(-1e12) - p.theta_r).abs() < 1e-6);
        assert_eq!(p.hydraulic_conductivity(0.0), p.k_s);
        assert!(p.hydraulic_conductivity(-1e6) < 1e-20);
        assert_eq!(p.capillary_capacity(0.0), 0.0);
        assert_eq!(p.capillary_capacity(0.5), 0.0);
    }

    #[test]
    fn closed_form_at_unit_scaled_head() {
        let p = loam();
        let h = -1.0 / p.alpha;
        let m = 1.0 - 1.0 / p.n_vg;
        let expect = p.theta_r + (p.theta_s - p.theta_r) * 2f64.powf(-m);
        assert!((p.water_content(h) - expect).abs() < 1e-14);
        // d/dh at α|h| = 1: (θs-θr) m n α 2^(-m-1)
        let dexpect = (p.theta_s - p.theta_r) * m * p.n_vg * p.alpha * 2f64.powf(-m - 1.0);
        assert!((p.capillary_capacity(h) - dexpect).abs() < 1e-12 * dexpect.abs().max(1.0));
    }

    #[test]
    fn capacity_vanishes_at_both_ends() {
        let p = loam();
        assert!(p.capillary_capacity(-1e-9) < 1e-4);
        assert!(p.capillary_capacity(-1e5) < 1e-6);
    }

    #[test]
    fn validation_names_field() {
        let mut p = loam();
        p.n_vg = 0.9;
        let err = p.validate("soil.zones[0]").unwrap_err();
        assert!(err.to_string().contains("soil.zones[0].n_vg"));
    }
}
