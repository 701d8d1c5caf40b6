//! Numerical verification of the trajectory-ordering assumption and
//! strategy comparison tables.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{integrate_season, simulate_schedule, TrajectoryPoint};
use crate::params::ModelParams;
use crate::schedule::FallowSchedule;

/// First detected ordering violation.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub t: f64,
    /// Which variable lost its ordering: "P", "S" or "X".
    pub variable: String,
    /// The adjacent pair of initial infestations involved.
    pub p_pair: (f64, f64),
}

/// Result of the trajectory-ordering check.
///
/// The system is considered monotone when trajectories started from larger
/// initial soil infestations stay pointwise higher in `P` and `X` and lower
/// in `S` over the whole season.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub p_grid: Vec<f64>,
    pub sample_step: f64,
    pub ordered_p: bool,
    pub ordered_x: bool,
    pub ordered_s: bool,
    pub first_violation: Option<Violation>,
}

impl MonotonicityReport {
    pub fn is_monotone(&self) -> bool {
        self.ordered_p && self.ordered_x && self.ordered_s
    }
}

/// Simulates one season per grid value and checks the pairwise ordering of
/// the sampled trajectories.
///
/// Orderings carry a slack of `1e-9` relative to the trajectory scale, to
/// separate integrator noise from genuine curve crossings.
pub fn check_monotonicity(
    params: &ModelParams,
    p_grid: &[f64],
    sample_step: f64,
) -> Result<MonotonicityReport> {
    if !(sample_step > 0.0) {
        return Err(Error::invalid(format!("sample_step must be > 0, got {sample_step}")));
    }
    if p_grid.windows(2).any(|w| w[0] > w[1]) || p_grid.iter().any(|&p| p < 0.0) {
        return Err(Error::invalid("p_grid must be sorted ascending and nonnegative"));
    }

    let trajectories: Vec<Vec<TrajectoryPoint>> = p_grid
        .par_iter()
        .map(|&p0| {
            integrate_season(p0, params, Some(sample_step))
                .map(|o| o.trajectory.expect("sampling was requested"))
        })
        .collect::<Result<_>>()?;

    let mut report = MonotonicityReport {
        p_grid: p_grid.to_vec(),
        sample_step,
        ordered_p: true,
        ordered_x: true,
        ordered_s: true,
        first_violation: None,
    };

    'outer: for (pair, (lo, hi)) in trajectories.iter().zip(&trajectories[1..]).enumerate() {
        for (a, b) in lo.iter().zip(hi) {
            debug_assert!((a.t - b.t).abs() < 1e-9);
            let checks = [
                ("P", b.p - a.p, a.p.abs().max(b.p.abs())),
                ("X", b.x - a.x, a.x.abs().max(b.x.abs())),
                ("S", a.s - b.s, a.s.abs().max(b.s.abs())),
            ];
            for (var, diff, scale) in checks {
                if diff < -1e-9 * scale.max(1.0) {
                    match var {
                        "P" => report.ordered_p = false,
                        "X" => report.ordered_x = false,
                        _ => report.ordered_s = false,
                    }
                    if report.first_violation.is_none() {
                        report.first_violation = Some(Violation {
                            t: a.t,
                            variable: var.to_string(),
                            p_pair: (p_grid[pair], p_grid[pair + 1]),
                        });
                    }
                    break 'outer;
                }
            }
        }
    }

    Ok(report)
}

/// Outcome of the two-season monotonicity counterexample scenario.
#[derive(Debug, Clone, Serialize)]
pub struct TwoSeasonScenario {
    pub tau_short: f64,
    pub tau_long: f64,
    /// Second-season infestations at planting, for the two fallows.
    pub p_start: (f64, f64),
    /// Two-season total profits, for the two fallows.
    pub profit: (f64, f64),
    /// True when the second-season `S` curves cross.
    pub s_curves_cross: bool,
}

/// Runs two two-season simulations differing only in the first fallow and
/// reports whether the second-season biomass curves cross.
///
/// With no uprooting (`q = 1`) and a heavy initial infestation, the shorter
/// fallow can end up more profitable, breaking the ordering assumption.
pub fn two_season_scenario(
    params: &ModelParams,
    tau_short: f64,
    tau_long: f64,
) -> Result<TwoSeasonScenario> {
    let run = |tau: f64| -> Result<_> {
        let first = integrate_season(params.p0, params, None)?;
        let p1 = crate::model::apply_fallow(first.p_after_harvest, params.omega, tau)?;
        let second = integrate_season(p1, params, Some(1.0))?;
        Ok((p1, first.profit_k + second.profit_k, second.trajectory.expect("sampled")))
    };
    let (p_short, profit_short, traj_short) = run(tau_short)?;
    let (p_long, profit_long, traj_long) = run(tau_long)?;

    // A crossing exists when the biomass difference changes sign.
    let mut saw_below = false;
    let mut saw_above = false;
    for (a, b) in traj_short.iter().zip(&traj_long) {
        let diff = a.s - b.s;
        if diff < -1e-6 {
            saw_below = true;
        }
        if diff > 1e-6 {
            saw_above = true;
        }
    }

    Ok(TwoSeasonScenario {
        tau_short,
        tau_long,
        p_start: (p_short, p_long),
        profit: (profit_short, profit_long),
        s_curves_cross: saw_below && saw_above,
    })
}

/// One row of the strategy comparison table.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub strategy: String,
    /// Season index, starting at 0.
    pub k: usize,
    /// Season start time (days).
    pub t_k: f64,
    /// Fallow duration following season `k`, zero for the last season.
    pub tau_k: f64,
    pub yield_k: f64,
    pub profit_k: f64,
    pub p_after_harvest: f64,
}

/// Per-strategy simulation results keyed by season index.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    /// Total profit per strategy, in input order.
    pub totals: Vec<(String, f64)>,
    /// Final soil infestation per strategy, in input order.
    pub final_infestations: Vec<(String, f64)>,
}

/// Simulates each named schedule and tabulates per-season outcomes.
///
/// All schedules must share the same horizon; rows are keyed by season
/// index, not absolute time, since season starts differ across strategies.
pub fn strategy_comparison(
    params: &ModelParams,
    strategies: &[(String, FallowSchedule)],
) -> Result<ComparisonTable> {
    if let Some((_, first)) = strategies.first() {
        for (name, s) in strategies {
            if s.t_max() != first.t_max() {
                return Err(Error::invalid(format!(
                    "strategy '{name}' has horizon {} but expected {}",
                    s.t_max(),
                    first.t_max()
                )));
            }
        }
    }

    let outcomes: Vec<_> = strategies
        .par_iter()
        .map(|(_, sched)| simulate_schedule(params, sched, None))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut totals = Vec::new();
    let mut final_infestations = Vec::new();
    for ((name, sched), out) in strategies.iter().zip(&outcomes) {
        let starts = sched.season_starts(params.cap_d);
        for (k, season) in out.seasons.iter().enumerate() {
            rows.push(ComparisonRow {
                strategy: name.clone(),
                k,
                t_k: starts[k],
                tau_k: sched.taus().get(k).copied().unwrap_or(0.0),
                yield_k: season.yield_k,
                profit_k: season.profit_k,
                p_after_harvest: season.p_after_harvest,
            });
        }
        totals.push((name.clone(), out.total_profit));
        final_infestations.push((name.clone(), out.final_infestation));
    }

    Ok(ComparisonTable { rows, totals, final_infestations })
}
