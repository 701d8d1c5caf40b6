//! Biological and economic model parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All biological and economic constants of the plant–nematode model.
///
/// Units: time in days, biomass in grams, currency in XAF. The defaults are
/// the reference parameter set used throughout the crate.
///
/// ```
/// use fallowopt::ModelParams;
/// let p = ModelParams::default();
/// assert_eq!(p.cap_d, 330.0);
/// assert!(p.validate().is_ok());
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Infestation rate of free nematodes (per nematode per gram per day).
    pub beta: f64,
    /// Consumption rate of infesting nematodes on fresh roots (g/day).
    pub a: f64,
    /// Conversion rate of ingested roots (per gram).
    pub alpha: f64,
    /// Proportion of eggs laid inside the roots (dimensionless).
    pub gamma: f64,
    /// Mortality rate of infesting pests (per day).
    pub mu: f64,
    /// Mortality rate of free pests (per day).
    pub omega: f64,
    /// Half-saturation constant of root consumption (g).
    pub delta: f64,
    /// Logistic root growth rate before flowering (per day).
    pub rho: f64,
    /// Maximum root biomass K (g).
    pub cap_k: f64,
    /// Root growth duration d: time from planting to flowering (days).
    pub d: f64,
    /// Cropping season duration D: time from planting to harvest (days).
    pub cap_d: f64,
    /// Fraction of infesting pests released into the soil at uprooting.
    pub q: f64,
    /// Root biomass of a freshly planted sucker (g).
    pub s0: f64,
    /// Initial soil infestation at the start of the first season (count).
    pub p0: f64,
    /// Root-to-yield conversion rate (XAF per gram per day).
    pub m: f64,
    /// Cost of a healthy sucker (XAF).
    pub c: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            beta: 1e-1,
            a: 2e-4,
            alpha: 400.0,
            gamma: 0.5,
            mu: 0.04,
            omega: 0.0495,
            delta: 60.0,
            rho: 0.025,
            cap_k: 150.0,
            d: 210.0,
            cap_d: 330.0,
            q: 0.05,
            s0: 60.0,
            p0: 100.0,
            m: 0.3,
            c: 230.0,
        }
    }
}

impl ModelParams {
    /// Checks every invariant of the parameter set.
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("beta", self.beta),
            ("a", self.a),
            ("alpha", self.alpha),
            ("mu", self.mu),
            ("omega", self.omega),
            ("rho", self.rho),
            ("p0", self.p0),
            ("m", self.m),
            ("c", self.c),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.cap_k.is_finite() && self.cap_k > 0.0) {
            return Err(Error::invalid(format!("cap_k must be > 0, got {}", self.cap_k)));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::invalid(format!("delta must be > 0, got {}", self.delta)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::invalid(format!("gamma must lie in [0, 1], got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::invalid(format!("q must lie in [0, 1], got {}", self.q)));
        }
        if !(self.d > 0.0 && self.d < self.cap_d) {
            return Err(Error::invalid(format!(
                "need 0 < d < cap_d, got d = {}, cap_d = {}",
                self.d, self.cap_d
            )));
        }
        if !(self.s0 > 0.0 && self.s0 <= self.cap_k) {
            return Err(Error::invalid(format!(
                "need 0 < s0 <= cap_k, got s0 = {}, cap_k = {}",
                self.s0, self.cap_k
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_reference_values() {
        let p = ModelParams::default();
        assert_eq!(p.beta, 0.1);
        assert_eq!(p.a, 2e-4);
        assert_eq!(p.alpha, 400.0);
        assert_eq!(p.gamma, 0.5);
        assert_eq!(p.mu, 0.04);
        assert_eq!(p.omega, 0.0495);
        assert_eq!(p.delta, 60.0);
        assert_eq!(p.rho, 0.025);
        assert_eq!(p.cap_k, 150.0);
        assert_eq!(p.d, 210.0);
        assert_eq!(p.cap_d, 330.0);
        assert_eq!(p.q, 0.05);
        assert_eq!(p.s0, 60.0);
        assert_eq!(p.p0, 100.0);
        assert_eq!(p.m, 0.3);
        assert_eq!(p.c, 230.0);
        p.validate().unwrap();
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let mut p = ModelParams::default();
        p.gamma = 1.5;
        assert!(p.validate().is_err());

        let mut p = ModelParams::default();
        p.d = 400.0; // >= cap_d
        assert!(p.validate().is_err());

        let mut p = ModelParams::default();
        p.s0 = 200.0; // > cap_k
        assert!(p.validate().is_err());

        let mut p = ModelParams::default();
        p.q = -0.01;
        assert!(p.validate().is_err());

        let mut p = ModelParams::default();
        p.beta = f64::NAN;
        assert!(p.validate().is_err());
    }
}
