//! Adaptive Dormand–Prince 5(4) integrator for the 4-state season system.
//!
//! The state vector is `[P, S, X, Y]`: free pests, root biomass, infesting
//! pests and the accumulated yield integrand. Switch times are known a
//! priori, so the caller splits the integration at them and no event
//! detection is needed.

use crate::error::{Error, Result};

pub(crate) const DIM: usize = 4;
pub(crate) type State = [f64; DIM];

/// Default relative tolerance of the season integrator.
pub const RTOL: f64 = 1e-8;
/// Default absolute tolerance of the season integrator.
pub const ATOL: f64 = 1e-10;

/// Components may undershoot zero by at most this much before the run is
/// treated as a solver failure; smaller undershoots are clamped to zero.
pub(crate) const UNDERSHOOT: f64 = 1e-9;

// Dormand-Prince RK5(4)7M coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order solution weights equal the last A row (FSAL scheme).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

pub(crate) struct Options {
    pub rtol: f64,
    pub atol: f64,
    /// Sampling interval for the recorded trajectory; `None` records nothing.
    pub sample_step: Option<f64>,
    /// Offset added to local times in the recorded samples.
    pub t_offset: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options { rtol: RTOL, atol: ATOL, sample_step: None, t_offset: 0.0 }
    }
}

/// Integrates `dy/dt = rhs(y)` from `t0` to `t1` (autonomous system).
///
/// Returns the final state; sampled `(t, state)` points are appended to
/// `samples` at multiples of `sample_step` in `(t0, t1]` when requested.
pub(crate) fn integrate<F>(
    rhs: F,
    y0: State,
    t0: f64,
    t1: f64,
    opts: &Options,
    samples: &mut Vec<(f64, State)>,
) -> Result<State>
where
    F: Fn(&State) -> State,
{
    debug_assert!(t1 > t0);
    let span = t1 - t0;
    let h_min = span * 1e-14;

    let mut t = t0;
    let mut y = y0;
    let mut k0 = rhs(&y);
    let mut h = (span / 100.0).min(1.0);

    // Next sample time, if sampling.
    let mut next_sample = opts.sample_step.map(|step| {
        // first multiple of `step` strictly greater than t0
        let k = (t0 / step).floor() + 1.0;
        k * step
    });

    let mut k = [[0.0; DIM]; 7];
    loop {
        if t >= t1 {
            break;
        }
        let mut h_eff = h.min(t1 - t);
        if let Some(ts) = next_sample {
            if ts < t1 {
                h_eff = h_eff.min(ts - t);
            }
        }
        if h_eff < h_min {
            return Err(Error::Numerical {
                t,
                reason: format!("step size underflow (h = {h_eff:.3e})"),
            });
        }

        k[0] = k0;
        for s in 1..7 {
            let mut ys = y;
            for (r, kr) in k.iter().enumerate().take(s) {
                let a = A[s][r] * h_eff;
                if a != 0.0 {
                    for i in 0..DIM {
                        ys[i] += a * kr[i];
                    }
                }
            }
            let _ = C; // stages are autonomous; C kept for reference
            k[s] = rhs(&ys);
        }

        let mut y5 = y;
        let mut err_sq = 0.0;
        for i in 0..DIM {
            let mut sum5 = 0.0;
            let mut sum4 = 0.0;
            for s in 0..7 {
                sum5 += B5[s] * k[s][i];
                sum4 += B4[s] * k[s][i];
            }
            y5[i] += h_eff * sum5;
            let e = h_eff * (sum5 - sum4);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y5[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / DIM as f64).sqrt();

        if err <= 1.0 {
            t += h_eff;
            y = y5;
            for v in &mut y {
                if *v < 0.0 {
                    if *v < -UNDERSHOOT {
                        return Err(Error::Numerical {
                            t,
                            reason: format!("state component undershot zero ({v:.3e})"),
                        });
                    }
                    *v = 0.0;
                }
            }
            // FSAL: last stage of an accepted step is the first of the next.
            k0 = k[6];
            if let (Some(ts), Some(step)) = (next_sample, opts.sample_step) {
                if (t - ts).abs() < 1e-9 {
                    samples.push((opts.t_offset + ts, y));
                    next_sample = Some(ts + step);
                }
            }
        }

        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h_eff * factor).min(span);
    }

    Ok(y)
}
