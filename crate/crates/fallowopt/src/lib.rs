//! Multi-seasonal banana/nematode crop dynamics and fallow-schedule
//! optimization.
//!
//! The model follows a single banana plant over successive cropping seasons.
//! Within a season, free soil nematodes (`P`), infesting nematodes (`X`) and
//! fresh root biomass (`S`) interact through an ODE system; between seasons
//! the plant is uprooted, part of the infesting pests returns to the soil,
//! and the soil population decays exponentially over a fallow period. The
//! seasonal profit is the root-biomass integral after flowering, converted
//! to currency, minus the cost of a fresh sucker.
//!
//! Given a fixed time horizon, the crate searches for the allocation of
//! fallow durations that maximizes the cumulated profit, using an adaptive
//! random search over the simplex of feasible schedules, with optional
//! bounded, penalized and constant-duration regularizations.
//!
//! # Quick start
//!
//! ```
//! use fallowopt::{simulate_schedule, FallowSchedule, ModelParams};
//!
//! let params = ModelParams::default();
//! // 11 seasons separated by ten 37-day fallows fill a 4000-day horizon.
//! let schedule = FallowSchedule::constant(37.0, 10, 4000.0)?;
//! let outcome = simulate_schedule(&params, &schedule, None)?;
//! assert_eq!(outcome.seasons.len(), 11);
//! assert!(outcome.total_profit > 50_000.0);
//! # Ok::<(), fallowopt::Error>(())
//! ```
//!
//! Optimization is deterministic given a seed:
//!
//! ```no_run
//! use fallowopt::{optimize, ArsConfig, ModelParams, RegularizationSpec};
//!
//! let params = ModelParams::default();
//! let cfg = ArsConfig::with_seed(1);
//! let out = optimize(&params, 4000.0, &RegularizationSpec::Free, &cfg, None)?;
//! println!("{} fallows, profit {:.0} XAF", out.n_star, out.profit_star);
//! # Ok::<(), fallowopt::Error>(())
//! ```

pub mod analysis;
pub mod config;
pub mod economics;
pub mod error;
pub mod model;
mod ode;
pub mod optimizer;
pub mod params;
pub mod schedule;

pub use analysis::{check_monotonicity, strategy_comparison, two_season_scenario, MonotonicityReport};
pub use economics::{penalized_profit, total_profit, Penalty, RegularizationSpec};
pub use error::{Error, Result};
pub use model::{
    apply_fallow, apply_uprooting, derivative, integrate_season, simulate_schedule,
    MultiSeasonOutcome, SeasonOutcome, SeasonState,
};
pub use optimizer::{
    ars_optimize, draw_direction, max_fallow_count, min_fallow_count_bounded, optimize,
    optimize_constant, season_count_constant, simplex_size, xi_set, ArsConfig, ConstantScan, IterateLog,
    OptimizationOutcome, SimplexSpec,
};
pub use params::ModelParams;
pub use schedule::FallowSchedule;
