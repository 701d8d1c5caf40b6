//! Flat `key=value` run configuration.
//!
//! Model keys are named after the usual parameter symbols: `beta`, `a`,
//! `alpha`, `gamma`, `mu`, `omega`, `delta`, `rho`, `K`, `d`, `D`, `q`,
//! `S0`, `P0`, `m`, `c`. Run keys: `tmax`, `mode` (free | bounded |
//! penalized | constant), `tau_sup`, `penalty_fraction`, `grid_step`,
//! `seed`, `taus` (comma-separated days). Lines starting with `#` and blank
//! lines are ignored. Unset keys keep their defaults.

use std::collections::HashMap;
use std::path::Path;

use crate::economics::{RegularizationSpec, PENALTY_FRACTION};
use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Everything a batch run needs, with reference defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub t_max: f64,
    pub mode: RegularizationSpec,
    pub seed: u64,
    pub grid_step: f64,
    /// Explicit schedule for `simulate`, if given.
    pub taus: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::default(),
            t_max: 4000.0,
            mode: RegularizationSpec::Free,
            seed: 0,
            grid_step: 1.0,
            taus: None,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str_contents(&text)
    }

    pub fn from_str_contents(text: &str) -> Result<Self> {
        let mut kv = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got '{line}'", lineno + 1))
            })?;
            kv.insert(key.trim().to_string(), value.trim().to_string());
        }
        Self::from_map(kv)
    }

    fn from_map(mut kv: HashMap<String, String>) -> Result<Self> {
        let mut cfg = RunConfig::default();

        fn parse_f64(key: &str, v: &str) -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("key '{key}': expected a number, got '{v}'")))
        }

        let mut take = |key: &str| kv.remove(key);

        macro_rules! num {
            ($key:literal, $target:expr) => {
                if let Some(v) = take($key) {
                    $target = parse_f64($key, &v)?;
                }
            };
        }

        num!("beta", cfg.params.beta);
        num!("a", cfg.params.a);
        num!("alpha", cfg.params.alpha);
        num!("gamma", cfg.params.gamma);
        num!("mu", cfg.params.mu);
        num!("omega", cfg.params.omega);
        num!("delta", cfg.params.delta);
        num!("rho", cfg.params.rho);
        num!("K", cfg.params.cap_k);
        num!("d", cfg.params.d);
        num!("D", cfg.params.cap_d);
        num!("q", cfg.params.q);
        num!("S0", cfg.params.s0);
        num!("P0", cfg.params.p0);
        num!("m", cfg.params.m);
        num!("c", cfg.params.c);
        num!("tmax", cfg.t_max);
        num!("grid_step", cfg.grid_step);

        if let Some(v) = take("seed") {
            cfg.seed = v
                .parse()
                .map_err(|_| Error::Config(format!("key 'seed': expected an integer, got '{v}'")))?;
        }

        let tau_sup = take("tau_sup").map(|v| parse_f64("tau_sup", &v)).transpose()?;
        let fraction =
            take("penalty_fraction").map(|v| parse_f64("penalty_fraction", &v)).transpose()?;
        if let Some(v) = take("mode") {
            cfg.mode = parse_mode(&v, tau_sup, fraction, cfg.grid_step)?;
        }

        if let Some(v) = take("taus") {
            cfg.taus = Some(parse_taus(&v)?);
        }

        if let Some(key) = kv.keys().next() {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        cfg.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}

/// Parses a mode name into a [`RegularizationSpec`].
pub fn parse_mode(
    mode: &str,
    tau_sup: Option<f64>,
    fraction: Option<f64>,
    grid_step: f64,
) -> Result<RegularizationSpec> {
    match mode {
        "free" => Ok(RegularizationSpec::Free),
        "bounded" => {
            let tau_sup = tau_sup
                .ok_or_else(|| Error::Config("mode 'bounded' requires tau_sup".into()))?;
            Ok(RegularizationSpec::Bounded { tau_sup })
        }
        "penalized" => Ok(RegularizationSpec::Penalized {
            fraction: fraction.unwrap_or(PENALTY_FRACTION),
        }),
        "constant" => Ok(RegularizationSpec::Constant { grid_step }),
        other => Err(Error::Config(format!(
            "unknown mode '{other}' (expected free, bounded, penalized or constant)"
        ))),
    }
}

/// Parses a comma-separated list of fallow durations.
pub fn parse_taus(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Config(format!("taus: expected a number, got '{s}'")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_reference_defaults() {
        let cfg = RunConfig::from_str_contents("").unwrap();
        assert_eq!(cfg.params, ModelParams::default());
        assert_eq!(cfg.t_max, 4000.0);
        assert_eq!(cfg.mode, RegularizationSpec::Free);
    }

    #[test]
    fn keys_override_defaults() {
        let cfg = RunConfig::from_str_contents(
            "# comment\n\
             P0 = 10000\n\
             tmax = 1340\n\
             mode = bounded\n\
             tau_sup = 60\n\
             seed = 7\n\
             taus = 332, 18\n",
        )
        .unwrap();
        assert_eq!(cfg.params.p0, 10000.0);
        assert_eq!(cfg.t_max, 1340.0);
        assert_eq!(cfg.mode, RegularizationSpec::Bounded { tau_sup: 60.0 });
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.taus, Some(vec![332.0, 18.0]));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(RunConfig::from_str_contents("nonsense").is_err());
        assert!(RunConfig::from_str_contents("unknown_key = 3").is_err());
        assert!(RunConfig::from_str_contents("beta = abc").is_err());
        assert!(RunConfig::from_str_contents("mode = bounded").is_err()); // missing tau_sup
        assert!(RunConfig::from_str_contents("gamma = 2").is_err()); // invariant violated
    }
}
