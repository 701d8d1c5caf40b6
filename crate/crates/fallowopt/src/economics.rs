//! Seasonal and cumulative profit, plus the dispersion penalty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::simulate_schedule;
use crate::params::ModelParams;
use crate::schedule::FallowSchedule;

/// Default fraction of the centroid profit allotted to the penalty magnitude.
pub const PENALTY_FRACTION: f64 = 0.1;

/// Regularization applied to the fallow optimization.
///
/// ```
/// use fallowopt::RegularizationSpec;
///
/// let bounded = RegularizationSpec::Bounded { tau_sup: 60.0 };
/// let penalized = RegularizationSpec::penalized(); // 10 % penalty fraction
/// let constant = RegularizationSpec::Constant { grid_step: 1.0 };
/// assert!(bounded.validate().is_ok());
/// # let _ = (penalized, constant);
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum RegularizationSpec {
    /// Unregularized search over every simplex.
    Free,
    /// Every fallow duration bounded above by `tau_sup` days.
    Bounded { tau_sup: f64 },
    /// Profit penalized by the distance to the simplex centroid.
    Penalized { fraction: f64 },
    /// All fallow durations equal; scanned over the set of season-count
    /// breakpoints plus a verification grid of the given step.
    Constant { grid_step: f64 },
}

impl RegularizationSpec {
    pub fn penalized() -> Self {
        RegularizationSpec::Penalized { fraction: PENALTY_FRACTION }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RegularizationSpec::Bounded { tau_sup } if !(tau_sup > 0.0) => {
                Err(Error::invalid(format!("tau_sup must be > 0, got {tau_sup}")))
            }
            RegularizationSpec::Penalized { fraction } if !(fraction > 0.0) => {
                Err(Error::invalid(format!("penalty fraction must be > 0, got {fraction}")))
            }
            RegularizationSpec::Constant { grid_step } if !(grid_step > 0.0) => {
                Err(Error::invalid(format!("grid_step must be > 0, got {grid_step}")))
            }
            _ => Ok(()),
        }
    }
}

/// Cumulated profit of a schedule: sum over seasons of `m * int S dt - c`.
///
/// ```
/// use fallowopt::{total_profit, FallowSchedule, ModelParams};
///
/// let params = ModelParams::default();
/// let schedule = FallowSchedule::constant(37.0, 10, 4000.0)?;
/// let profit = total_profit(&params, &schedule)?;
/// assert!(profit > 50_000.0 && profit < 55_000.0);
/// # Ok::<(), fallowopt::Error>(())
/// ```
pub fn total_profit(params: &ModelParams, schedule: &FallowSchedule) -> Result<f64> {
    Ok(simulate_schedule(params, schedule, None)?.total_profit)
}

/// Dispersion penalty for a fixed simplex dimension `n`.
///
/// Holds the centroid `tau_0 = (L/n, ..., L/n)`, the centroid profit
/// `R(tau_0)` and the regulation term `r = fraction * R(tau_0) / d_max`,
/// where `d_max = L * sqrt((n - 1) / n)` is the centroid-to-vertex distance.
/// Build it once per dimension; the centroid simulation is the only
/// expensive part.
#[derive(Debug, Clone)]
pub struct Penalty {
    centroid: Vec<f64>,
    centroid_profit: f64,
    r: f64,
}

impl Penalty {
    pub fn for_simplex(params: &ModelParams, t_max: f64, n: usize, fraction: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("penalty is undefined for an empty schedule"));
        }
        let size = t_max - (n as f64 + 1.0) * params.cap_d;
        if size < 0.0 {
            return Err(Error::invalid(format!("simplex of dimension {n} has negative size {size}")));
        }
        let centroid = vec![size / n as f64; n];
        let schedule = FallowSchedule::new(centroid.clone(), t_max)?;
        let centroid_profit = total_profit(params, &schedule)?;
        let d_max = size * ((n as f64 - 1.0) / n as f64).sqrt();
        // In dimension 1 the simplex is a point and the penalty vanishes.
        let r = if d_max > 0.0 { fraction * centroid_profit / d_max } else { 0.0 };
        Ok(Penalty { centroid, centroid_profit, r })
    }

    pub fn centroid(&self) -> &[f64] {
        &self.centroid
    }

    pub fn centroid_profit(&self) -> f64 {
        self.centroid_profit
    }

    /// Regulation term `r` (XAF per day of distance).
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Euclidean distance from `taus` to the centroid.
    pub fn distance(&self, taus: &[f64]) -> f64 {
        taus.iter()
            .zip(&self.centroid)
            .map(|(t, c)| (t - c) * (t - c))
            .sum::<f64>()
            .sqrt()
    }

    /// `R(tau) - r * d(tau, tau_0)` given the raw profit of `taus`.
    pub fn apply(&self, raw_profit: f64, taus: &[f64]) -> f64 {
        raw_profit - self.r * self.distance(taus)
    }
}

/// Penalized profit of a simplex-valid schedule with `n` fallows.
///
/// ```
/// use fallowopt::{penalized_profit, FallowSchedule, ModelParams};
///
/// let params = ModelParams::default();
/// let sched = FallowSchedule::constant(37.0, 10, 4000.0)?;
/// // The all-equal schedule pays no penalty at all.
/// let penalized = penalized_profit(&params, &sched, 10)?;
/// assert!(penalized > 50_000.0);
/// # Ok::<(), fallowopt::Error>(())
/// ```
pub fn penalized_profit(params: &ModelParams, schedule: &FallowSchedule, n: usize) -> Result<f64> {
    if schedule.fallow_count() != n {
        return Err(Error::invalid(format!(
            "schedule has {} fallows, expected {n}",
            schedule.fallow_count()
        )));
    }
    let penalty = Penalty::for_simplex(params, schedule.t_max(), n, PENALTY_FRACTION)?;
    let raw = total_profit(params, schedule)?;
    Ok(penalty.apply(raw, schedule.taus()))
}
