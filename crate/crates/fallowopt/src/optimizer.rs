//! Fallow-schedule optimization: dimension loop, adaptive random search on
//! the simplex, and the bounded / penalized / constant regularizations.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::economics::{total_profit, Penalty, RegularizationSpec};
use crate::error::{Error, Result};
use crate::model::simulate_schedule;
use crate::params::ModelParams;
use crate::schedule::FallowSchedule;

/// A simplex of fallow schedules with a fixed dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimplexSpec {
    /// Number of fallow periods.
    pub n: usize,
    /// Total fallow budget `L = t_max - (n + 1) * D` (days).
    pub size: f64,
}

impl SimplexSpec {
    pub fn new(t_max: f64, cap_d: f64, n: usize) -> Result<Self> {
        Ok(SimplexSpec { n, size: simplex_size(t_max, cap_d, n)? })
    }
}

/// Tuning of the adaptive random search. Batch sizes and the evaluation
/// budget scale with `n^2`; the stored values are the multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArsConfig {
    /// Standard-deviation decay factor between cascade levels.
    pub shrink: f64,
    /// Number of cascade levels in a variance-selection phase.
    pub levels: usize,
    /// Candidates per selection level, times `n^2`.
    pub sel_batch: usize,
    /// Candidates per exploitation phase, times `n^2`.
    pub expl_batch: usize,
    /// Phases a stopping counter must exceed before the search stops.
    pub stall_limit: usize,
    /// Objective evaluation budget, times `n^2`.
    pub eval_budget: usize,
    /// RNG seed; identical seed and config reproduce the run exactly.
    pub seed: u64,
    /// Maximum rejected radii per direction, and maximum fresh directions
    /// per candidate, before the candidate is skipped.
    pub reject_cap: usize,
}

impl ArsConfig {
    pub fn with_seed(seed: u64) -> Self {
        ArsConfig {
            shrink: 0.3,
            levels: 5,
            sel_batch: 2,
            expl_batch: 5,
            stall_limit: 4,
            eval_budget: 100,
            seed,
            reject_cap: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::invalid(format!("shrink must lie in (0, 1), got {}", self.shrink)));
        }
        for (name, v) in [
            ("levels", self.levels),
            ("sel_batch", self.sel_batch),
            ("expl_batch", self.expl_batch),
            ("stall_limit", self.stall_limit),
            ("eval_budget", self.eval_budget),
            ("reject_cap", self.reject_cap),
        ] {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be >= 1")));
            }
        }
        Ok(())
    }

    fn sel_batch_for(&self, n: usize) -> usize {
        self.sel_batch * n * n
    }

    fn expl_batch_for(&self, n: usize) -> usize {
        self.expl_batch * n * n
    }

    /// Objective evaluation budget for dimension `n`.
    pub fn eval_budget_for(&self, n: usize) -> usize {
        self.eval_budget * n * n
    }
}

/// Search phase an iterate belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Init,
    Selection,
    Exploitation,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Init => write!(f, "init"),
            Phase::Selection => write!(f, "selection"),
            Phase::Exploitation => write!(f, "exploitation"),
        }
    }
}

/// One evaluated candidate.
#[derive(Debug, Clone, Serialize)]
pub struct IterateRecord {
    /// Simplex dimension the iterate belongs to.
    pub n: usize,
    pub phase: Phase,
    pub sigma: f64,
    pub taus: Vec<f64>,
    pub objective: f64,
    /// True when the candidate replaced the incumbent.
    pub accepted: bool,
}

/// Stream of evaluated candidates, for diagnostics and property checks.
#[derive(Debug, Default, Clone)]
pub struct IterateLog {
    pub records: Vec<IterateRecord>,
}

impl IterateLog {
    /// Writes the log as CSV; schedule coordinates are ';'-joined.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,phase,sigma,taus,objective,accepted")?;
        for r in &self.records {
            let taus =
                r.taus.iter().map(|t| format!("{t:.6}")).collect::<Vec<_>>().join(";");
            writeln!(w, "{},{},{},{},{},{}", r.n, r.phase, r.sigma, taus, r.objective, r.accepted)?;
        }
        Ok(())
    }
}

/// Result of an optimization run.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizationOutcome {
    /// Chosen number of fallow periods.
    pub n_star: usize,
    /// Optimal fallow durations (days).
    pub tau_star: Vec<f64>,
    /// Raw profit of the optimum, re-verified by simulation (XAF).
    pub profit_star: f64,
    /// Penalized profit of the optimum, in penalized mode.
    pub penalized_star: Option<f64>,
    /// Soil infestation right after the last harvest.
    pub final_infestation: f64,
    /// Total objective evaluations across all dimensions.
    pub evaluations: usize,
    pub seed: u64,
}

/// Maximum number of fallow periods deployable on `[0, t_max]`.
pub fn max_fallow_count(t_max: f64, cap_d: f64) -> Result<usize> {
    if !(t_max > 2.0 * cap_d) {
        return Err(Error::invalid(format!(
            "time horizon must span at least two seasons: t_max = {t_max} <= 2D = {}",
            2.0 * cap_d
        )));
    }
    Ok((t_max / cap_d + 1e-9).floor() as usize - 1)
}

/// Total fallow budget of the `n`-simplex: `t_max - (n + 1) * D`.
pub fn simplex_size(t_max: f64, cap_d: f64, n: usize) -> Result<f64> {
    let n_max = max_fallow_count(t_max, cap_d)?;
    if n < 1 || n > n_max {
        return Err(Error::invalid(format!("n must lie in 1..={n_max}, got {n}")));
    }
    Ok(t_max - (n as f64 + 1.0) * cap_d)
}

/// Smallest dimension for which `n` fallows bounded by `tau_sup` can fill
/// the horizon: `ceil((t_max - D) / (tau_sup + D))`.
pub fn min_fallow_count_bounded(t_max: f64, cap_d: f64, tau_sup: f64) -> Result<usize> {
    if !(tau_sup > 0.0) {
        return Err(Error::invalid(format!("tau_sup must be > 0, got {tau_sup}")));
    }
    Ok(((t_max - cap_d) / (tau_sup + cap_d) - 1e-9).ceil().max(1.0) as usize)
}

/// Uniform random unit direction in the zero-sum hyperplane.
///
/// Draws uniformly on `[0, 1]^n`, removes the component mean and normalizes;
/// degenerate draws (projection shorter than 1e-12) are redrawn.
pub fn draw_direction<R: Rng>(n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::invalid("no nontrivial direction exists for n < 2"));
    }
    loop {
        let mut d: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let mean = d.iter().sum::<f64>() / n as f64;
        for v in &mut d {
            *v -= mean;
        }
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        for v in &mut d {
            *v /= norm;
        }
        return Ok(d);
    }
}

fn feasible(taus: &[f64], bound: Option<f64>) -> bool {
    taus.iter().all(|&t| t >= 0.0 && bound.is_none_or(|b| t <= b))
}

/// Draws one feasible candidate around `center`, or gives up after
/// `reject_cap` radii per direction and `reject_cap` fresh directions.
fn draw_candidate<R: Rng>(
    center: &[f64],
    sigma: f64,
    bound: Option<f64>,
    reject_cap: usize,
    rng: &mut R,
) -> Result<Option<Vec<f64>>> {
    let n = center.len();
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    for _ in 0..reject_cap {
        let dir = draw_direction(n, rng)?;
        for _ in 0..reject_cap {
            let r = normal.sample(rng);
            let cand: Vec<f64> =
                center.iter().zip(&dir).map(|(c, d)| c + r * d).collect();
            if feasible(&cand, bound) {
                return Ok(Some(cand));
            }
        }
    }
    Ok(None)
}

/// Best value found so far, with the schedule that achieved it.
#[derive(Debug, Clone)]
pub struct ArsResult {
    pub taus: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Adaptive random search on the simplex `A^n`, maximizing `objective`.
///
/// Starts at the centroid with `sigma = L`. A variance-selection phase
/// evaluates `levels` decreasing deviations (`sel_batch * n^2` candidates
/// each) around the incumbent frozen at phase start, retaining the deviation
/// of the best candidate. A variance-exploitation phase then draws
/// `expl_batch * n^2` candidates at the retained deviation, re-centering on
/// every improvement. Phases alternate until the smallest deviation keeps
/// being selected, the incumbent stalls, or the evaluation budget is spent.
///
/// Candidates leaving the feasible region (or exceeding `bound` per
/// coordinate) are redrawn; objective failures discard the candidate but
/// count against the budget.
pub fn ars_optimize<F>(
    spec: &SimplexSpec,
    objective: F,
    bound: Option<f64>,
    cfg: &ArsConfig,
    rng: &mut ChaCha8Rng,
    mut log: Option<&mut IterateLog>,
) -> Result<ArsResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    let n = spec.n;
    if n < 2 {
        return Err(Error::invalid(
            "ars_optimize requires n >= 2; n = 1 has the unique solution t_max - 2D",
        ));
    }
    if spec.size < 0.0 {
        return Err(Error::invalid(format!("simplex size must be >= 0, got {}", spec.size)));
    }

    let mut incumbent = vec![spec.size / n as f64; n];
    if !feasible(&incumbent, bound) {
        return Err(Error::Infeasible(format!(
            "simplex centroid violates the per-coordinate bound {bound:?} for n = {n}"
        )));
    }

    let sigma0 = spec.size;
    let sigma_min = cfg.shrink.powi(cfg.levels as i32) * sigma0;
    let budget = cfg.eval_budget_for(n);

    let mut best = objective(&incumbent)?;
    let mut evaluations = 1usize;
    if let Some(log) = log.as_deref_mut() {
        log.records.push(IterateRecord {
            n,
            phase: Phase::Init,
            sigma: sigma0,
            taus: incumbent.clone(),
            objective: best,
            accepted: true,
        });
    }

    let mut sigma_star = sigma0;
    let mut stall_sigma_min = 0usize;
    let mut stall_unimproved = 0usize;

    'search: loop {
        // Variance selection: the center is frozen for the whole phase.
        let center = incumbent.clone();
        let mut sigma = sigma0;
        for _ in 0..cfg.levels {
            sigma *= cfg.shrink;
            for _ in 0..cfg.sel_batch_for(n) {
                if evaluations >= budget {
                    break 'search;
                }
                let Some(cand) = draw_candidate(&center, sigma, bound, cfg.reject_cap, rng)?
                else {
                    continue;
                };
                evaluations += 1;
                let value = match objective(&cand) {
                    Ok(v) => v,
                    Err(_) => continue, // discarded, already counted
                };
                let accepted = value > best;
                if let Some(log) = log.as_deref_mut() {
                    log.records.push(IterateRecord {
                        n,
                        phase: Phase::Selection,
                        sigma,
                        taus: cand.clone(),
                        objective: value,
                        accepted,
                    });
                }
                if accepted {
                    best = value;
                    incumbent = cand;
                    sigma_star = sigma;
                }
            }
        }

        // Variance exploitation at the retained deviation, re-centering on
        // every improvement.
        let mut improved = false;
        for _ in 0..cfg.expl_batch_for(n) {
            let Some(cand) = draw_candidate(&incumbent, sigma_star, bound, cfg.reject_cap, rng)?
            else {
                continue;
            };
            evaluations += 1;
            let value = match objective(&cand) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let accepted = value > best;
            if let Some(log) = log.as_deref_mut() {
                log.records.push(IterateRecord {
                    n,
                    phase: Phase::Exploitation,
                    sigma: sigma_star,
                    taus: cand.clone(),
                    objective: value,
                    accepted,
                });
            }
            if accepted {
                best = value;
                incumbent = cand;
                improved = true;
            }
        }

        if sigma_star <= sigma_min * (1.0 + 1e-12) {
            stall_sigma_min += 1;
        } else {
            stall_sigma_min = 0;
        }
        if improved {
            stall_unimproved = 0;
        } else {
            stall_unimproved += 1;
        }
        if stall_sigma_min > cfg.stall_limit
            || stall_unimproved > cfg.stall_limit
            || evaluations > budget
        {
            break;
        }
    }

    Ok(ArsResult { taus: incumbent, value: best, evaluations })
}

/// Candidate optimum for one dimension, before the cross-dimension compare.
struct DimOptimum {
    n: usize,
    taus: Vec<f64>,
    /// Comparison value: raw profit, or penalized profit in penalized mode.
    value: f64,
}

/// Solves the fallow allocation problem over every admissible dimension.
///
/// For `n = 1` the solution is the single fallow `t_max - 2D`; larger
/// dimensions run the adaptive random search. The best dimension wins by
/// objective value; exact ties prefer fewer cropping seasons, then the
/// schedule closer to the simplex centroid.
pub fn optimize(
    params: &ModelParams,
    t_max: f64,
    reg: &RegularizationSpec,
    cfg: &ArsConfig,
    mut log: Option<&mut IterateLog>,
) -> Result<OptimizationOutcome> {
    params.validate()?;
    reg.validate()?;
    cfg.validate()?;

    if let RegularizationSpec::Constant { grid_step } = *reg {
        let scan = optimize_constant(params, t_max, grid_step)?;
        let n = scan.n_seasons.saturating_sub(1);
        return Ok(OptimizationOutcome {
            n_star: n,
            tau_star: vec![scan.tau_star; n],
            profit_star: scan.profit,
            penalized_star: None,
            final_infestation: scan.final_infestation,
            evaluations: scan.evaluations,
            seed: cfg.seed,
        });
    }

    let cap_d = params.cap_d;
    let n_max = max_fallow_count(t_max, cap_d)?;
    let (n_min, bound) = match *reg {
        RegularizationSpec::Bounded { tau_sup } => {
            let n_min = min_fallow_count_bounded(t_max, cap_d, tau_sup)?;
            if n_min > n_max {
                return Err(Error::Infeasible(format!(
                    "bound tau_sup = {tau_sup} requires at least {n_min} fallows, \
                     but only {n_max} fit in the horizon"
                )));
            }
            (n_min, Some(tau_sup))
        }
        _ => (1, None),
    };
    let fraction = match *reg {
        RegularizationSpec::Penalized { fraction } => Some(fraction),
        _ => None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut evaluations = 0usize;
    let mut best: Option<DimOptimum> = None;

    for n in n_min..=n_max {
        let dim = if n == 1 {
            // Unique point of the 1-simplex.
            let taus = vec![t_max - 2.0 * cap_d];
            let schedule = FallowSchedule::new(taus.clone(), t_max)?;
            let raw = total_profit(params, &schedule)?;
            evaluations += 1;
            // The 1-simplex is a point, so the penalty distance is zero and
            // the penalized profit equals the raw profit.
            DimOptimum { n, taus, value: raw }
        } else {
            let spec = SimplexSpec::new(t_max, cap_d, n)?;
            let penalty = match fraction {
                Some(f) => Some(Penalty::for_simplex(params, t_max, n, f)?),
                None => None,
            };
            let objective = |taus: &[f64]| -> Result<f64> {
                let schedule = FallowSchedule::new(taus.to_vec(), t_max)?;
                let raw = total_profit(params, &schedule)?;
                Ok(match &penalty {
                    Some(p) => p.apply(raw, taus),
                    None => raw,
                })
            };
            let res = ars_optimize(&spec, objective, bound, cfg, &mut rng, log.as_deref_mut())?;
            evaluations += res.evaluations;
            DimOptimum { n, taus: res.taus, value: res.value }
        };

        best = Some(match best {
            None => dim,
            Some(cur) => {
                if dim.value > cur.value
                    || (dim.value == cur.value && prefer_on_tie(&dim, &cur, t_max, cap_d))
                {
                    dim
                } else {
                    cur
                }
            }
        });
    }

    let best = best.ok_or_else(|| Error::Infeasible("no admissible dimension".into()))?;
    let schedule = FallowSchedule::new(best.taus.clone(), t_max)?;
    let outcome = simulate_schedule(params, &schedule, None)?;
    let penalized_star = match fraction {
        Some(f) if best.n >= 1 => {
            let p = Penalty::for_simplex(params, t_max, best.n, f)?;
            Some(p.apply(outcome.total_profit, &best.taus))
        }
        _ => None,
    };

    Ok(OptimizationOutcome {
        n_star: best.n,
        tau_star: best.taus,
        profit_star: outcome.total_profit,
        penalized_star,
        final_infestation: outcome.final_infestation,
        evaluations,
        seed: cfg.seed,
    })
}

/// Tie-break: fewer cropping seasons first, then smaller distance to the
/// centroid of the candidate's own simplex.
fn prefer_on_tie(cand: &DimOptimum, cur: &DimOptimum, t_max: f64, cap_d: f64) -> bool {
    if cand.n != cur.n {
        return cand.n < cur.n;
    }
    let dist = |o: &DimOptimum| {
        let c = (t_max - (o.n as f64 + 1.0) * cap_d) / o.n as f64;
        o.taus.iter().map(|t| (t - c) * (t - c)).sum::<f64>().sqrt()
    };
    dist(cand) < dist(cur)
}

/// A constant fallow duration at which the season count changes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XiPoint {
    /// Number of fallow periods deployed at this duration.
    pub n: usize,
    /// Fallow duration (days), `(t_max - (n + 1) D) / n`.
    pub tau: f64,
}

/// The set of constant fallow durations for which the last harvest lands
/// exactly on the horizon, sorted ascending.
///
/// ```
/// use fallowopt::xi_set;
///
/// let xi = xi_set(4000.0, 330.0)?;
/// // Ten fallows of 37 days: the classic 11-season deployment.
/// assert!(xi.iter().any(|p| p.n == 10 && p.tau == 37.0));
/// # Ok::<(), fallowopt::Error>(())
/// ```
pub fn xi_set(t_max: f64, cap_d: f64) -> Result<Vec<XiPoint>> {
    let n_max = max_fallow_count(t_max, cap_d)?;
    let mut xs: Vec<XiPoint> = (1..=n_max)
        .map(|n| XiPoint { n, tau: (t_max - (n as f64 + 1.0) * cap_d) / n as f64 })
        .collect();
    xs.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    Ok(xs)
}

/// Number of complete cropping seasons under a constant fallow `tau`:
/// the largest `N` with `N * D + (N - 1) * tau <= t_max`.
pub fn season_count_constant(t_max: f64, cap_d: f64, tau: f64) -> usize {
    if t_max < cap_d {
        return 0;
    }
    (((t_max + tau) / (cap_d + tau)) + 1e-9).floor() as usize
}

/// One evaluated point of the constant-fallow scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanPoint {
    pub tau: f64,
    pub seasons: usize,
    pub profit: f64,
    pub final_infestation: f64,
    /// True when `tau` is an element of the breakpoint set.
    pub in_xi: bool,
}

/// Result of the constant-fallow optimization.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantScan {
    pub tau_star: f64,
    pub n_seasons: usize,
    pub profit: f64,
    pub final_infestation: f64,
    pub xi: Vec<XiPoint>,
    pub scan: Vec<ScanPoint>,
    /// Set when a grid point strictly beats every breakpoint, which signals
    /// a monotonicity failure.
    pub grid_beats_xi: bool,
    pub evaluations: usize,
}

/// Maximizes the profit over constant fallow durations.
///
/// Evaluates every breakpoint exactly, plus a verification grid over
/// `[0, t_max - 2D]` with the given step; incomplete trailing seasons are
/// not planted.
pub fn optimize_constant(params: &ModelParams, t_max: f64, grid_step: f64) -> Result<ConstantScan> {
    params.validate()?;
    if !(grid_step > 0.0) {
        return Err(Error::invalid(format!("grid_step must be > 0, got {grid_step}")));
    }
    let cap_d = params.cap_d;
    let xi = xi_set(t_max, cap_d)?;

    let mut points: Vec<(f64, bool)> = xi.iter().map(|x| (x.tau, true)).collect();
    let upper = t_max - 2.0 * cap_d;
    let mut tau = 0.0;
    while tau <= upper + 1e-9 {
        // skip grid points that coincide with a breakpoint
        if !xi.iter().any(|x| (x.tau - tau).abs() < 1e-9) {
            points.push((tau, false));
        }
        tau += grid_step;
    }

    let scan: Vec<ScanPoint> = points
        .par_iter()
        .map(|&(tau, in_xi)| {
            let seasons = season_count_constant(t_max, cap_d, tau);
            let schedule = FallowSchedule::constant(tau, seasons.saturating_sub(1), t_max)?;
            let out = simulate_schedule(params, &schedule, None)?;
            Ok(ScanPoint {
                tau,
                seasons,
                profit: out.total_profit,
                final_infestation: out.final_infestation,
                in_xi,
            })
        })
        .collect::<Result<_>>()?;

    let best_xi = scan
        .iter()
        .filter(|p| p.in_xi)
        .max_by(|a, b| a.profit.total_cmp(&b.profit))
        .ok_or_else(|| Error::Infeasible("empty breakpoint set".into()))?;
    let best_any = scan
        .iter()
        .max_by(|a, b| a.profit.total_cmp(&b.profit))
        .expect("scan is nonempty");
    let grid_beats_xi = best_any.profit > best_xi.profit;
    let best = if grid_beats_xi { best_any } else { best_xi };

    let evaluations = scan.len();
    let mut scan_sorted = scan.clone();
    scan_sorted.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    Ok(ConstantScan {
        tau_star: best.tau,
        n_seasons: best.seasons,
        profit: best.profit,
        final_infestation: best.final_infestation,
        xi,
        scan: scan_sorted,
        grid_beats_xi,
        evaluations,
    })
}
