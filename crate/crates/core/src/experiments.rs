//! Monte Carlo realizations, baseline methods and parameter sweeps.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{
    dbm_to_watts, draw_user_position, generate_sample_set, ChannelSampleSet, ScenarioGeometry,
};
use crate::error::{OutageError, Result};
use crate::objective::{empirical_outage, MarginScale, PhaseShiftVector, SystemParams};
use crate::seed::{self, tags};
use crate::solver::{alternating_sgd, beamforming_sgd, init_point, SolverConfig, SolverResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Alternating SGD over beamformer and phase shifts.
    Proposed,
    /// Phase shifts drawn once and frozen; beamformer SGD only.
    RandomPhase,
    /// IRS removed; beamformer SGD on the direct channel.
    NoIrs,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Proposed, Method::RandomPhase, Method::NoIrs];

    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::RandomPhase => "random_phase",
            Method::NoIrs => "no_irs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = OutageError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "proposed" => Ok(Method::Proposed),
            "random_phase" | "random-phase" => Ok(Method::RandomPhase),
            "no_irs" | "no-irs" => Ok(Method::NoIrs),
            other => Err(OutageError::InvalidConfig(format!(
                "unknown method '{other}' (expected proposed, random_phase or no_irs)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// IRS element count N.
    Elements,
    /// SNR threshold gamma.
    Gamma,
    /// BS antenna count M.
    Antennas,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Elements => "N",
            SweepParam::Gamma => "gamma",
            SweepParam::Antennas => "M",
        }
    }
}

impl FromStr for SweepParam {
    type Err = OutageError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "N" | "n" => Ok(SweepParam::Elements),
            "gamma" => Ok(SweepParam::Gamma),
            "M" | "m" => Ok(SweepParam::Antennas),
            other => Err(OutageError::InvalidConfig(format!(
                "unknown sweep parameter '{other}' (expected N, gamma or M)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub geometry: ScenarioGeometry,
    pub m: usize,
    pub n: usize,
    pub gamma: f64,
    pub p_dbm: f64,
    pub noise_dbm: f64,
    pub margin_scale: MarginScale,
    pub t_train: usize,
    pub t_eval: usize,
    /// Score on the training samples instead of a fresh evaluation set.
    pub eval_on_train: bool,
    pub realizations: usize,
    pub solver: SolverConfig,
    pub methods: Vec<Method>,
    pub sweep: Option<SweepSpec>,
    /// Master seed; realization seeds are derived from it.
    pub seed: u64,
}

impl ExperimentConfig {
    /// Full-scale setup: M = 15, N = 50, gamma = 3, T = 250, P = 30 dBm,
    /// noise -80 dBm, 60 realizations, full-scale solver settings.
    pub fn full_scale() -> Self {
        Self {
            geometry: ScenarioGeometry::standard(),
            m: 15,
            n: 50,
            gamma: 3.0,
            p_dbm: 30.0,
            noise_dbm: -80.0,
            margin_scale: MarginScale::InverseNoise,
            t_train: 250,
            t_eval: 1000,
            eval_on_train: false,
            realizations: 60,
            solver: SolverConfig::full_scale(),
            methods: Method::ALL.to_vec(),
            sweep: None,
            seed: 0,
        }
    }

    /// Reduced scale that runs in seconds: M = 8, N = 16, T = 100, J = 50,
    /// K = 200, l_w = 0.01, 20 realizations, scored on the training samples.
    /// Noise is raised to -10 dBm; at -80 dBm this geometry is essentially
    /// never in outage.
    pub fn desk_scale() -> Self {
        Self {
            m: 8,
            n: 16,
            noise_dbm: -10.0,
            t_train: 100,
            eval_on_train: true,
            realizations: 20,
            solver: SolverConfig::desk_scale(),
            ..Self::full_scale()
        }
    }

    pub fn params(&self) -> Result<SystemParams> {
        Ok(SystemParams::new(
            dbm_to_watts(self.p_dbm),
            dbm_to_watts(self.noise_dbm),
            self.gamma,
        )?
        .with_margin_scale(self.margin_scale))
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.params()?;
        self.solver.validate()?;
        let bad = |msg: &str| Err(OutageError::InvalidConfig(msg.into()));
        if self.m == 0 {
            return bad("m must be >= 1");
        }
        if self.t_train == 0 || self.t_eval == 0 {
            return bad("t-train and t-eval must be >= 1");
        }
        if self.realizations == 0 {
            return bad("realizations must be >= 1");
        }
        if self.methods.is_empty() {
            return bad("at least one method is required");
        }
        Ok(())
    }

    /// Copy with the swept parameter set to `value`.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<Self> {
        let mut cfg = self.clone();
        let as_count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(OutageError::InvalidConfig(format!(
                    "{} must be a non-negative integer, got {v}",
                    param.name()
                )))
            }
        };
        match param {
            SweepParam::Elements => cfg.n = as_count(value)?,
            SweepParam::Antennas => cfg.m = as_count(value)?,
            SweepParam::Gamma => cfg.gamma = value,
        }
        Ok(cfg)
    }
}

/// Proposed method on a training set from the given init seed.
pub fn run_method_proposed(
    train: &ChannelSampleSet,
    p: &SystemParams,
    solver: &SolverConfig,
    init_seed: u64,
) -> Result<SolverResult> {
    let (w0, v0) = init_point(train.m(), train.n(), p, &mut seed::rng_from_seed(init_seed));
    alternating_sgd(train, p, solver, &w0, &v0)
}

/// Draws `v` once and keeps it fixed; only the beamformer is optimized.
pub fn run_method_random_phase(
    train: &ChannelSampleSet,
    p: &SystemParams,
    solver: &SolverConfig,
    init_seed: u64,
) -> Result<SolverResult> {
    if train.n() == 0 {
        return Err(OutageError::InvalidConfig(
            "random_phase needs N >= 1; use no_irs for the IRS-free baseline".into(),
        ));
    }
    let (w0, v0) = init_point(train.m(), train.n(), p, &mut seed::rng_from_seed(init_seed));
    beamforming_sgd(train, p, solver, &w0, &v0)
}

/// Drops the reflected path and optimizes the beamformer on `h_d` alone.
pub fn run_method_no_irs(
    train: &ChannelSampleSet,
    p: &SystemParams,
    solver: &SolverConfig,
    init_seed: u64,
) -> Result<SolverResult> {
    let direct = train.without_irs();
    // same w0 as the other methods: init_point draws w before the phases
    let (w0, _) = init_point(train.m(), train.n(), p, &mut seed::rng_from_seed(init_seed));
    alternating_sgd(&direct, p, solver, &w0, &PhaseShiftVector::empty())
}

/// One Monte Carlo realization: drop the user, draw training and evaluation
/// sets, run `method`, return the empirical outage on the evaluation set.
///
/// All randomness derives from `realization_seed` independently of `method`,
/// so the methods see the same channels and starting point.
pub fn run_realization(
    cfg: &ExperimentConfig,
    method: Method,
    realization_seed: u64,
) -> Result<f64> {
    let p = cfg.params()?;
    let user = draw_user_position(
        &cfg.geometry,
        &mut seed::rng_from_seed(seed::derive(realization_seed, tags::USER_POSITION)),
    );
    let train = generate_sample_set(
        &cfg.geometry,
        cfg.m,
        cfg.n,
        cfg.t_train,
        &user,
        &mut seed::rng_from_seed(seed::derive(realization_seed, tags::TRAIN_SET)),
    )?;
    let solver = SolverConfig {
        seed: seed::derive(realization_seed, tags::SGD),
        ..cfg.solver.clone()
    };
    let init_seed = seed::derive(realization_seed, tags::INIT_POINT);
    let result = match method {
        Method::Proposed => run_method_proposed(&train, &p, &solver, init_seed)?,
        Method::RandomPhase => run_method_random_phase(&train, &p, &solver, init_seed)?,
        Method::NoIrs => run_method_no_irs(&train, &p, &solver, init_seed)?,
    };

    let eval = if cfg.eval_on_train {
        train
    } else {
        generate_sample_set(
            &cfg.geometry,
            cfg.m,
            cfg.n,
            cfg.t_eval,
            &user,
            &mut seed::rng_from_seed(seed::derive(realization_seed, tags::EVAL_SET)),
        )?
    };
    let eval = if method == Method::NoIrs {
        eval.without_irs()
    } else {
        eval
    };
    empirical_outage(&result.w, &result.v, &eval, &p)
}

/// Seed of realization `index` under master seed `master`.
pub fn realization_seed(master: u64, index: usize) -> u64 {
    seed::derive(master, index as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub method: Method,
    pub mean_outage: f64,
    pub std_outage: f64,
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub param: SweepParam,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, value: f64, method: Method) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.value == value && r.method == method)
    }

    /// Mean outage per sweep value for one method, in sweep order.
    pub fn series(&self, method: Method) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.method == method)
            .map(|r| r.mean_outage)
            .collect()
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_outage: f64,
    pub std_outage: f64,
    pub realizations: usize,
}

/// Mean and sample standard deviation of the outage over `cfg.realizations`
/// seeds, for every method in `cfg.methods`. Realizations run in parallel;
/// the result does not depend on scheduling.
pub fn run_point(cfg: &ExperimentConfig) -> Result<Vec<MethodSummary>> {
    cfg.validate()?;
    cfg.methods
        .iter()
        .map(|&method| {
            let outages = (0..cfg.realizations)
                .into_par_iter()
                .map(|r| run_realization(cfg, method, realization_seed(cfg.seed, r)))
                .collect::<Result<Vec<f64>>>()?;
            let (mean_outage, std_outage) = mean_std(&outages);
            Ok(MethodSummary {
                method,
                mean_outage,
                std_outage,
                realizations: cfg.realizations,
            })
        })
        .collect()
}

/// [`run_point`] for every value of `cfg.sweep`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| OutageError::InvalidConfig("no sweep specified".into()))?;
    let mut rows = Vec::with_capacity(spec.values.len() * cfg.methods.len());
    for &value in &spec.values {
        let cell_cfg = cfg.with_param(spec.param, value)?;
        for s in run_point(&cell_cfg)? {
            rows.push(SweepRow {
                value,
                method: s.method,
                mean_outage: s.mean_outage,
                std_outage: s.std_outage,
                realizations: s.realizations,
            });
        }
    }
    Ok(SweepResult {
        param: spec.param,
        rows,
    })
}

pub const CSV_HEADER: &str = "sweep_param,sweep_value,method,mean_outage,std_outage,realizations";

/// Plain decimal with at most six significant digits, trailing zeros trimmed.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            "0".into()
        } else {
            format!("{x}")
        };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).clamp(0, 40) as usize;
    let mut s = format!("{x:.decimals$}");
    // rounding may carry into a new digit (9.999995 -> 10.00000)
    let digits = s.chars().filter(|c| c.is_ascii_digit()).count();
    let leading_zeros = s
        .trim_start_matches('-')
        .chars()
        .take_while(|&c| c == '0' || c == '.')
        .filter(|&c| c == '0')
        .count();
    if digits - leading_zeros > 6 && decimals > 0 {
        let d = decimals - 1;
        s = format!("{x:.d$}");
    }
    if s.contains('.') {
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in &result.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            result.param.name(),
            format_sig6(r.value),
            r.method,
            format_sig6(r.mean_outage),
            format_sig6(r.std_outage),
            r.realizations
        )?;
    }
    Ok(())
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| OutageError::io(path, e))?;
    let mut buf = std::io::BufWriter::new(file);
    write_csv(result, &mut buf).map_err(|e| OutageError::io(path, e))?;
    buf.flush().map_err(|e| OutageError::io(path, e))
}
