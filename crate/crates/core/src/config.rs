//! Flat `key = value` configuration files.
//!
//! Keys are the CLI flag names without the leading dashes (`p-dbm`, `max-inner`,
//! ...); underscores are accepted in place of dashes. `#` starts a comment.

use std::path::Path;

use crate::error::{OutageError, Result};
use crate::experiments::{ExperimentConfig, SweepParam, SweepSpec};
use crate::objective::MarginScale;
use crate::solver::DecaySchedule;

/// Every key understood by [`apply_setting`].
pub const KEYS: &[&str] = &[
    "profile",
    "m",
    "n",
    "gamma",
    "p-dbm",
    "noise-dbm",
    "margin-scale",
    "t-train",
    "t-eval",
    "eval-on-train",
    "realizations",
    "l-w",
    "l-v",
    "decay",
    "decay-schedule",
    "max-outer",
    "max-inner",
    "epsilon",
    "methods",
    "seed",
    "param",
    "values",
    "user-side",
    "beta-direct",
    "beta-bs-irs",
    "beta-irs-user",
];

pub fn normalize_key(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('_', "-")
}

/// Parses `key = value` lines, keeping order so later entries win.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            OutageError::InvalidConfig(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = normalize_key(k);
        if !KEYS.contains(&key.as_str()) {
            return Err(OutageError::InvalidConfig(format!(
                "line {}: unknown key '{}'",
                lineno + 1,
                k.trim()
            )));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(|e| OutageError::io(path, e))?;
    parse_config_text(&text).map_err(|e| match e {
        OutageError::InvalidConfig(msg) => {
            OutageError::InvalidConfig(format!("{}: {msg}", path.display()))
        }
        other => other,
    })
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| OutageError::InvalidConfig(format!("invalid value '{value}' for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(OutageError::InvalidConfig(format!(
            "invalid boolean '{value}' for {key}"
        ))),
    }
}

pub fn profile(name: &str) -> Result<ExperimentConfig> {
    match name {
        "full" => Ok(ExperimentConfig::full_scale()),
        "desk" => Ok(ExperimentConfig::desk_scale()),
        other => Err(OutageError::InvalidConfig(format!(
            "unknown profile '{other}' (expected full or desk)"
        ))),
    }
}

/// Applies one setting. `profile` must come first since it replaces everything.
pub fn apply_setting(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    let key = normalize_key(key);
    let k = key.as_str();
    match k {
        "profile" => *cfg = profile(value)?,
        "m" => cfg.m = parse(k, value)?,
        "n" => cfg.n = parse(k, value)?,
        "gamma" => cfg.gamma = parse(k, value)?,
        "p-dbm" => cfg.p_dbm = parse(k, value)?,
        "noise-dbm" => cfg.noise_dbm = parse(k, value)?,
        "margin-scale" => {
            cfg.margin_scale = match value {
                "inverse-noise" | "auto" => MarginScale::InverseNoise,
                other => MarginScale::Fixed(parse(k, other)?),
            }
        }
        "t-train" => cfg.t_train = parse(k, value)?,
        "t-eval" => cfg.t_eval = parse(k, value)?,
        "eval-on-train" => cfg.eval_on_train = parse_bool(k, value)?,
        "realizations" => cfg.realizations = parse(k, value)?,
        "l-w" => cfg.solver.l_w = parse(k, value)?,
        "l-v" => cfg.solver.l_v = parse(k, value)?,
        "decay" => cfg.solver.decay = parse(k, value)?,
        "decay-schedule" => {
            cfg.solver.decay_schedule = match value {
                "outer" => DecaySchedule::PerOuter,
                "inner" => DecaySchedule::PerInner,
                _ => {
                    return Err(OutageError::InvalidConfig(format!(
                        "decay-schedule must be outer or inner, got '{value}'"
                    )))
                }
            }
        }
        "max-outer" => cfg.solver.max_outer = parse(k, value)?,
        "max-inner" => cfg.solver.max_inner = parse(k, value)?,
        "epsilon" => cfg.solver.epsilon = parse(k, value)?,
        "methods" => {
            cfg.methods = value
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(str::parse)
                .collect::<Result<_>>()?
        }
        "seed" => cfg.seed = parse(k, value)?,
        "param" => {
            let param: SweepParam = value.parse()?;
            let values = cfg.sweep.take().map(|s| s.values).unwrap_or_default();
            cfg.sweep = Some(SweepSpec { param, values });
        }
        "values" => {
            let values = value
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| parse::<f64>(k, s.trim()))
                .collect::<Result<Vec<_>>>()?;
            let param = cfg
                .sweep
                .take()
                .map(|s| s.param)
                .unwrap_or(SweepParam::Elements);
            cfg.sweep = Some(SweepSpec { param, values });
        }
        "user-side" => cfg.geometry.user_region_side = parse(k, value)?,
        "beta-direct" => cfg.geometry.beta_direct = parse(k, value)?,
        "beta-bs-irs" => cfg.geometry.beta_bs_irs = parse(k, value)?,
        "beta-irs-user" => cfg.geometry.beta_irs_user = parse(k, value)?,
        _ => {
            return Err(OutageError::InvalidConfig(format!(
                "unknown setting '{key}'"
            )))
        }
    }
    Ok(())
}

/// Builds a config from `base`, then `file_settings`, then `overrides`.
/// A `profile` entry anywhere is applied first.
pub fn build_config(
    base: ExperimentConfig,
    file_settings: &[(String, String)],
    overrides: &[(String, String)],
) -> Result<ExperimentConfig> {
    let all: Vec<&(String, String)> = file_settings.iter().chain(overrides).collect();
    let mut cfg = base;
    if let Some((_, name)) = all.iter().rev().find(|(k, _)| k == "profile") {
        cfg = profile(name)?;
    }
    for (k, v) in all.iter().filter(|(k, _)| k != "profile") {
        apply_setting(&mut cfg, k, v)?;
    }
    Ok(cfg)
}
