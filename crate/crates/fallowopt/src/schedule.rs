//! Fallow schedules over a fixed time horizon.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the simplex sum constraint.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// An ordered sequence of fallow durations under a horizon `t_max`.
///
/// A schedule with `n` fallows spans `n + 1` cropping seasons; season `k`
/// starts at `t_k = k * D + sum of the first k fallows`. A schedule is
/// *simplex-valid* when the fallows sum to `t_max - (n + 1) * D`, i.e. the
/// last harvest lands exactly on the horizon.
///
/// ```
/// use fallowopt::FallowSchedule;
/// let sched = FallowSchedule::constant(37.0, 10, 4000.0).unwrap();
/// assert_eq!(sched.season_count(), 11);
/// assert!(sched.is_simplex_valid(330.0));
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallowSchedule {
    taus: Vec<f64>,
    t_max: f64,
}

impl FallowSchedule {
    /// Builds a schedule, checking that every duration is finite and nonnegative.
    pub fn new(taus: Vec<f64>, t_max: f64) -> Result<Self> {
        for (i, tau) in taus.iter().enumerate() {
            if !(tau.is_finite() && *tau >= 0.0) {
                return Err(Error::invalid(format!("tau_{} must be finite and >= 0, got {tau}", i + 1)));
            }
        }
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::invalid(format!("t_max must be > 0, got {t_max}")));
        }
        Ok(FallowSchedule { taus, t_max })
    }

    /// `n` fallows of identical duration.
    pub fn constant(tau: f64, n: usize, t_max: f64) -> Result<Self> {
        FallowSchedule::new(vec![tau; n], t_max)
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    /// Number of fallow periods `n`.
    pub fn fallow_count(&self) -> usize {
        self.taus.len()
    }

    /// Number of cropping seasons, `n + 1`.
    pub fn season_count(&self) -> usize {
        self.taus.len() + 1
    }

    /// Start times `t_k` of each season.
    pub fn season_starts(&self, cap_d: f64) -> Vec<f64> {
        let mut starts = Vec::with_capacity(self.season_count());
        let mut t = 0.0;
        starts.push(t);
        for tau in &self.taus {
            t += cap_d + tau;
            starts.push(t);
        }
        starts
    }

    /// Harvest time of the last season.
    pub fn last_harvest(&self, cap_d: f64) -> f64 {
        self.season_count() as f64 * cap_d + self.taus.iter().sum::<f64>()
    }

    /// True when the fallows fill the horizon exactly (sum within [`SIMPLEX_TOL`]).
    pub fn is_simplex_valid(&self, cap_d: f64) -> bool {
        (self.last_harvest(cap_d) - self.t_max).abs() <= SIMPLEX_TOL
    }

    /// Checks that the last harvest does not exceed the horizon.
    ///
    /// The two-season horizon assumption (`t_max > 2D`) applies to the
    /// optimization problem and is enforced by the optimizer, not here:
    /// degenerate single-season simulations are legitimate.
    pub fn validate(&self, cap_d: f64) -> Result<()> {
        let last = self.last_harvest(cap_d);
        if last > self.t_max + SIMPLEX_TOL {
            return Err(Error::invalid(format!(
                "last harvest at {last} exceeds horizon t_max = {}",
                self.t_max
            )));
        }
        Ok(())
    }
}
