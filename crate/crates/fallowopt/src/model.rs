//! Within-season plant–nematode dynamics and between-season switching.
//!
//! A cropping season of length `D` starts with a pest-free sucker
//! (`S = S0`, `X = 0`) planted into soil carrying `P` free pests. Roots grow
//! logistically until flowering at `t = d`, after which growth stops and the
//! root biomass integral accumulates the yield. At harvest the plant is
//! uprooted, a fraction `q` of infesting pests joins the soil pool, and free
//! pests decay exponentially over the following fallow.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{self, Options, State};
use crate::params::ModelParams;
use crate::schedule::FallowSchedule;

/// Instantaneous state within a cropping season.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeasonState {
    /// Free soil nematodes (count).
    pub p: f64,
    /// Fresh root biomass (g).
    pub s: f64,
    /// Infesting nematodes (count).
    pub x: f64,
    /// Accumulated yield integrand `m * S` over the post-flowering window (XAF).
    pub y_acc: f64,
}

impl SeasonState {
    fn from_array(y: State) -> Self {
        SeasonState { p: y[0], s: y[1], x: y[2], y_acc: y[3] }
    }

    fn is_finite(&self) -> bool {
        self.p.is_finite() && self.s.is_finite() && self.x.is_finite() && self.y_acc.is_finite()
    }
}

/// Time derivative of a [`SeasonState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRate {
    pub dp: f64,
    pub ds: f64,
    pub dx: f64,
    pub dy: f64,
}

/// One sampled trajectory point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub p: f64,
    pub s: f64,
    pub x: f64,
}

/// Outcome of a single cropping season.
#[derive(Debug, Clone, Serialize)]
pub struct SeasonOutcome {
    /// Seasonal yield `m * integral of S` over `(d, D]` (XAF).
    pub yield_k: f64,
    /// Seasonal profit: yield minus the sucker cost (XAF).
    pub profit_k: f64,
    /// Soil infestation right after uprooting: `P(D) + q * X(D)`.
    pub p_after_harvest: f64,
    /// State at harvest time `D`.
    pub end_state: SeasonState,
    /// Sampled `(t, P, S, X)` series when recording was requested.
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

/// Outcome of a full multi-season simulation.
#[derive(Debug, Clone, Serialize)]
pub struct MultiSeasonOutcome {
    pub seasons: Vec<SeasonOutcome>,
    /// Sum of seasonal profits (XAF).
    pub total_profit: f64,
    /// Soil infestation right after the last harvest, `P(Tmax+)`.
    pub final_infestation: f64,
}

fn rhs(y: &State, p: &ModelParams, in_growth: bool) -> State {
    let (pop, s, x) = (y[0], y[1], y[2]);
    let feed = s * x / (s + p.delta);
    let infest = p.beta * pop * s;
    let growth = if in_growth { p.rho * s * (1.0 - s / p.cap_k) } else { 0.0 };
    [
        -infest + p.alpha * p.a * (1.0 - p.gamma) * feed - p.omega * pop,
        growth - p.a * feed,
        infest + p.alpha * p.a * p.gamma * feed - p.mu * x,
        if in_growth { 0.0 } else { p.m * s },
    ]
}

/// Right-hand side of the within-season system.
///
/// `in_growth` selects the pre-flowering subsystem (logistic root growth,
/// no yield accumulation) versus the post-flowering one (growth rate zero,
/// `dY/dt = m * S`).
///
/// ```
/// use fallowopt::{derivative, ModelParams, SeasonState};
///
/// let p = ModelParams::default();
/// let state = SeasonState { p: 100.0, s: 60.0, x: 0.0, y_acc: 0.0 };
/// let rate = derivative(&state, &p, true)?; // true: pre-flowering phase
/// assert!(rate.dp < 0.0); // infestation and mortality deplete the soil pool
/// assert!(rate.dx > 0.0); // ... and fill the roots
/// # Ok::<(), fallowopt::Error>(())
/// ```
pub fn derivative(state: &SeasonState, params: &ModelParams, in_growth: bool) -> Result<StateRate> {
    if !state.is_finite() {
        return Err(Error::invalid("non-finite state component"));
    }
    let y = rhs(&[state.p, state.s, state.x, state.y_acc], params, in_growth);
    Ok(StateRate { dp: y[0], ds: y[1], dx: y[2], dy: y[3] })
}

/// Simulates one cropping season starting from soil infestation `p_init`.
///
/// The integration is split exactly at the flowering time `d`; when `sample`
/// is set, the trajectory is recorded at that interval (season-local times,
/// shifted by `t_offset`).
pub fn integrate_season(
    p_init: f64,
    params: &ModelParams,
    sample: Option<f64>,
) -> Result<SeasonOutcome> {
    integrate_season_at(p_init, params, sample, 0.0)
}

/// [`integrate_season`] with an absolute time offset applied to recorded samples.
pub fn integrate_season_at(
    p_init: f64,
    params: &ModelParams,
    sample: Option<f64>,
    t_offset: f64,
) -> Result<SeasonOutcome> {
    if !(p_init.is_finite() && p_init >= 0.0) {
        return Err(Error::invalid(format!("p_init must be finite and >= 0, got {p_init}")));
    }
    params.validate()?;

    let opts = Options { sample_step: sample, t_offset, ..Options::default() };
    let mut samples = Vec::new();

    let y0 = [p_init, params.s0, 0.0, 0.0];
    let at_flowering =
        ode::integrate(|y| rhs(y, params, true), y0, 0.0, params.d, &opts, &mut samples)?;
    let at_harvest = ode::integrate(
        |y| rhs(y, params, false),
        at_flowering,
        params.d,
        params.cap_d,
        &opts,
        &mut samples,
    )?;

    let end_state = SeasonState::from_array(at_harvest);
    let yield_k = end_state.y_acc;
    let trajectory = sample.map(|_| {
        samples
            .into_iter()
            .map(|(t, y)| TrajectoryPoint { t, p: y[0], s: y[1], x: y[2] })
            .collect()
    });

    Ok(SeasonOutcome {
        yield_k,
        profit_k: yield_k - params.c,
        p_after_harvest: apply_uprooting(end_state.p, end_state.x, params.q)?,
        end_state,
        trajectory,
    })
}

/// Exponential decay of free soil pests over a fallow of length `tau`.
pub fn apply_fallow(p: f64, omega: f64, tau: f64) -> Result<f64> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::invalid(format!("fallow duration must be >= 0, got {tau}")));
    }
    if !(p.is_finite() && p >= 0.0) {
        return Err(Error::invalid(format!("p must be finite and >= 0, got {p}")));
    }
    Ok(p * (-omega * tau).exp())
}

/// Uprooting at harvest: a fraction `q` of infesting pests joins the soil pool.
pub fn apply_uprooting(p: f64, x: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("q must lie in [0, 1], got {q}")));
    }
    if p < 0.0 || x < 0.0 {
        return Err(Error::invalid("p and x must be >= 0"));
    }
    Ok(p + q * x)
}

/// Runs the full multi-season model over a fallow schedule.
///
/// Season `k + 1` starts from `(P(t_k + D) + q X(t_k + D)) * exp(-omega tau_{k+1})`
/// with a fresh sucker. The reported final infestation is the soil pool right
/// after the last uprooting; no decay past the last harvest is applied.
pub fn simulate_schedule(
    params: &ModelParams,
    schedule: &FallowSchedule,
    sample: Option<f64>,
) -> Result<MultiSeasonOutcome> {
    params.validate()?;
    schedule.validate(params.cap_d)?;

    let starts = schedule.season_starts(params.cap_d);
    let mut seasons = Vec::with_capacity(starts.len());
    let mut p = params.p0;
    for (k, &t_k) in starts.iter().enumerate() {
        let outcome = integrate_season_at(p, params, sample, t_k)?;
        p = outcome.p_after_harvest;
        if let Some(&tau) = schedule.taus().get(k) {
            p = apply_fallow(p, params.omega, tau)?;
        }
        seasons.push(outcome);
    }

    let total_profit = seasons.iter().map(|s| s.profit_k).sum();
    let final_infestation = seasons.last().map(|s| s.p_after_harvest).unwrap_or(params.p0);
    Ok(MultiSeasonOutcome { seasons, total_profit, final_infestation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::default()
    }

    /// Closed-form logistic biomass at time `t` (pest-free root growth).
    pub(crate) fn logistic(s0: f64, rho: f64, k: f64, t: f64) -> f64 {
        let e = (rho * t).exp();
        k * s0 * e / (k + s0 * (e - 1.0))
    }

    #[test]
    fn derivative_without_roots_is_pure_mortality() {
        let p = params();
        let st = SeasonState { p: 5.0, s: 0.0, x: 3.0, y_acc: 0.0 };
        let r = derivative(&st, &p, true).unwrap();
        assert_eq!(r.dp, -p.omega * 5.0);
        assert_eq!(r.ds, 0.0);
        assert_eq!(r.dx, -p.mu * 3.0);
    }

    #[test]
    fn pest_free_carrying_capacity_is_equilibrium() {
        let p = params();
        let st = SeasonState { p: 0.0, s: p.cap_k, x: 0.0, y_acc: 0.0 };
        let r = derivative(&st, &p, true).unwrap();
        assert_eq!((r.dp, r.ds, r.dx), (0.0, 0.0, 0.0));
    }

    #[test]
    fn derivative_hand_evaluation() {
        // P=100, S=60, X=0 under reference parameters.
        let p = params();
        let st = SeasonState { p: 100.0, s: 60.0, x: 0.0, y_acc: 0.0 };
        let r = derivative(&st, &p, true).unwrap();
        assert!((r.dp - (-604.95)).abs() < 1e-10, "dp = {}", r.dp);
        assert!((r.ds - 0.9).abs() < 1e-10, "ds = {}", r.ds);
        assert!((r.dx - 600.0).abs() < 1e-10, "dx = {}", r.dx);
    }

    #[test]
    fn derivative_rejects_non_finite_state() {
        let st = SeasonState { p: f64::NAN, s: 1.0, x: 0.0, y_acc: 0.0 };
        assert!(derivative(&st, &params(), true).is_err());
    }

    #[test]
    fn pest_free_season_matches_logistic_oracle() {
        let p = params();
        let out = integrate_season(0.0, &p, None).unwrap();
        // With X = 0 and rho = 0 after flowering, S stays at its flowering value.
        let s_d = logistic(p.s0, p.rho, p.cap_k, p.d);
        let expected_yield = p.m * (p.cap_d - p.d) * s_d;
        let rel = (out.yield_k - expected_yield).abs() / expected_yield;
        assert!(rel < 1e-4, "yield {} vs oracle {expected_yield}", out.yield_k);
        assert!(expected_yield > 5300.0 && expected_yield < 5400.0);
        assert_eq!(out.p_after_harvest, 0.0);
        assert!((out.profit_k - (out.yield_k - p.c)).abs() < 1e-12);
    }

    #[test]
    fn fallow_decay_is_closed_form() {
        assert_eq!(apply_fallow(120.0, 0.0495, 0.0).unwrap(), 120.0);
        let half = apply_fallow(100.0, 0.0495, 14.0).unwrap();
        assert!((half - 100.0 * (-0.0495f64 * 14.0).exp()).abs() == 0.0);
        assert!((half - 50.01).abs() < 0.01);
        assert_eq!(apply_fallow(0.0, 0.0495, 99.0).unwrap(), 0.0);
        assert!(apply_fallow(10.0, 0.0495, -1.0).is_err());
    }

    #[test]
    fn uprooting_arithmetic() {
        assert_eq!(apply_uprooting(10.0, 100.0, 0.05).unwrap(), 15.0);
        assert_eq!(apply_uprooting(10.0, 100.0, 0.0).unwrap(), 10.0);
        assert_eq!(apply_uprooting(0.0, 300.0, 1.0).unwrap(), 300.0);
        assert!(apply_uprooting(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn trajectories_are_ordered_in_initial_infestation() {
        // Larger p_init gives pointwise larger P, X and smaller S.
        let p = params();
        let lo = integrate_season(50.0, &p, Some(1.0)).unwrap();
        let hi = integrate_season(200.0, &p, Some(1.0)).unwrap();
        let (lo, hi) = (lo.trajectory.unwrap(), hi.trajectory.unwrap());
        assert_eq!(lo.len(), hi.len());
        for (a, b) in lo.iter().zip(&hi) {
            assert!(b.p >= a.p - 1e-6);
            assert!(b.x >= a.x - 1e-6);
            assert!(b.s <= a.s + 1e-6);
        }
    }

    #[test]
    fn single_season_schedule_degenerates() {
        let p = params();
        let sched = FallowSchedule::new(vec![], 400.0).unwrap();
        let multi = simulate_schedule(&p, &sched, None).unwrap();
        let single = integrate_season(p.p0, &p, None).unwrap();
        assert_eq!(multi.seasons.len(), 1);
        assert_eq!(multi.total_profit, single.profit_k);
        assert_eq!(multi.final_infestation, single.p_after_harvest);
    }

    #[test]
    fn schedule_past_horizon_is_rejected() {
        let sched = FallowSchedule::new(vec![100.0], 700.0).unwrap();
        // last harvest at 2*330 + 100 = 760 > 700
        assert!(simulate_schedule(&params(), &sched, None).is_err());
    }

    #[test]
    fn biomass_stays_bounded_and_nonnegative() {
        let p = params();
        let out = integrate_season(200.0, &p, Some(1.0)).unwrap();
        for pt in out.trajectory.unwrap() {
            assert!(pt.p >= 0.0 && pt.s >= 0.0 && pt.x >= 0.0);
            assert!(pt.s <= p.s0.max(p.cap_k) + 1e-6);
        }
    }
}
