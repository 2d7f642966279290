use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use irs_outage::config::{build_config, read_config_file};
use irs_outage::experiments::{run_point, run_sweep, write_csv, ExperimentConfig};
use irs_outage::gradcheck::run_gradcheck;
use irs_outage::sample_io::write_sample_set;
use irs_outage::seed::{self, tags};
use irs_outage::{draw_user_position, generate_sample_set, OutageError};

/// Outage-probability minimization for IRS-aided MISO links.
#[derive(Parser)]
#[command(name = "irs-outage", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo outage of each method at a single operating point.
    Run(Settings),
    /// Sweep one parameter and print (or write) a CSV table.
    Sweep {
        #[command(flatten)]
        settings: Settings,
        /// Swept parameter: N, gamma or M.
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated values of the swept parameter.
        #[arg(long)]
        values: Option<String>,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the closed-form gradients with central differences.
    Gradcheck {
        /// Random instances per shape.
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fail when the max relative error reaches this value.
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Draw a training set for realization 0 and write it in binary form.
    GenSamples {
        #[command(flatten)]
        settings: Settings,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Experiment settings. Precedence: flags, then `--config`, then the profile.
#[derive(Args)]
struct Settings {
    /// `key = value` file using the flag names below as keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base profile: full or desk.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    p_dbm: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    noise_dbm: Option<String>,
    /// inverse-noise or a positive constant.
    #[arg(long)]
    margin_scale: Option<String>,
    #[arg(long)]
    t_train: Option<String>,
    #[arg(long)]
    t_eval: Option<String>,
    /// Score on the training samples instead of a fresh evaluation set.
    #[arg(long)]
    eval_on_train: Option<String>,
    #[arg(long)]
    realizations: Option<String>,
    #[arg(long)]
    l_w: Option<String>,
    #[arg(long)]
    l_v: Option<String>,
    #[arg(long)]
    decay: Option<String>,
    /// outer or inner.
    #[arg(long)]
    decay_schedule: Option<String>,
    #[arg(long)]
    max_outer: Option<String>,
    #[arg(long)]
    max_inner: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Comma-separated subset of proposed, random_phase, no_irs.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    user_side: Option<String>,
    #[arg(long)]
    beta_direct: Option<String>,
    #[arg(long)]
    beta_bs_irs: Option<String>,
    #[arg(long)]
    beta_irs_user: Option<String>,
}

impl Settings {
    fn overrides(&self) -> Vec<(String, String)> {
        let pairs = [
            ("profile", &self.profile),
            ("m", &self.m),
            ("n", &self.n),
            ("gamma", &self.gamma),
            ("p-dbm", &self.p_dbm),
            ("noise-dbm", &self.noise_dbm),
            ("margin-scale", &self.margin_scale),
            ("t-train", &self.t_train),
            ("t-eval", &self.t_eval),
            ("eval-on-train", &self.eval_on_train),
            ("realizations", &self.realizations),
            ("l-w", &self.l_w),
            ("l-v", &self.l_v),
            ("decay", &self.decay),
            ("decay-schedule", &self.decay_schedule),
            ("max-outer", &self.max_outer),
            ("max-inner", &self.max_inner),
            ("epsilon", &self.epsilon),
            ("methods", &self.methods),
            ("seed", &self.seed),
            ("user-side", &self.user_side),
            ("beta-direct", &self.beta_direct),
            ("beta-bs-irs", &self.beta_bs_irs),
            ("beta-irs-user", &self.beta_irs_user),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }

    fn resolve(&self, extra: Vec<(String, String)>) -> Result<ExperimentConfig, OutageError> {
        let file = match &self.config {
            Some(path) => read_config_file(path)?,
            None => Vec::new(),
        };
        let mut overrides = self.overrides();
        overrides.extend(extra);
        let cfg = build_config(ExperimentConfig::full_scale(), &file, &overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

enum Failure {
    Usage(OutageError),
    Runtime(OutageError),
}

fn usage(e: OutageError) -> Failure {
    Failure::Usage(e)
}

fn runtime(e: OutageError) -> Failure {
    match e {
        OutageError::InvalidConfig(_) | OutageError::Infeasible(_) => Failure::Usage(e),
        other => Failure::Runtime(other),
    }
}

fn stdout_error(e: std::io::Error) -> Failure {
    Failure::Runtime(OutageError::Io {
        path: "<stdout>".into(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(settings) => {
            let cfg = settings.resolve(Vec::new()).map_err(usage)?;
            let summaries = run_point(&cfg).map_err(runtime)?;
            let mut out = std::io::stdout().lock();
            writeln!(out, "method,mean_outage,std_outage,realizations").map_err(stdout_error)?;
            for s in summaries {
                writeln!(
                    out,
                    "{},{},{},{}",
                    s.method,
                    irs_outage::experiments::format_sig6(s.mean_outage),
                    irs_outage::experiments::format_sig6(s.std_outage),
                    s.realizations
                )
                .map_err(stdout_error)?;
            }
        }
        Command::Sweep {
            settings,
            param,
            values,
            out,
        } => {
            let mut extra = Vec::new();
            if let Some(p) = param {
                extra.push(("param".to_string(), p));
            }
            if let Some(v) = values {
                extra.push(("values".to_string(), v));
            }
            let cfg = settings.resolve(extra).map_err(usage)?;
            match &cfg.sweep {
                Some(s) if !s.values.is_empty() => {}
                _ => {
                    return Err(Failure::Usage(OutageError::InvalidConfig(
                        "sweep needs --param and --values (or param/values in the config file)"
                            .into(),
                    )))
                }
            }
            let result = run_sweep(&cfg).map_err(runtime)?;
            match out {
                Some(path) => {
                    irs_outage::emit_csv(&result, &path).map_err(Failure::Runtime)?;
                }
                None => {
                    write_csv(&result, std::io::stdout().lock()).map_err(stdout_error)?;
                }
            }
        }
        Command::Gradcheck {
            instances,
            seed,
            tolerance,
        } => {
            let report = run_gradcheck(&[(2, 3), (8, 16)], instances, seed);
            println!(
                "instances={} max_rel_err_w={:.3e} max_rel_err_v={:.3e}",
                report.instances, report.max_rel_err_w, report.max_rel_err_v
            );
            if report.max_rel_err() >= tolerance {
                return Err(Failure::Runtime(OutageError::InvalidConfig(format!(
                    "gradient check failed: {:.3e} >= {tolerance:e}",
                    report.max_rel_err()
                ))));
            }
        }
        Command::GenSamples { settings, out } => {
            let cfg = settings.resolve(Vec::new()).map_err(usage)?;
            let r = irs_outage::realization_seed(cfg.seed, 0);
            let user = draw_user_position(
                &cfg.geometry,
                &mut seed::rng_from_seed(seed::derive(r, tags::USER_POSITION)),
            );
            let train_seed = seed::derive(r, tags::TRAIN_SET);
            let mut set = generate_sample_set(
                &cfg.geometry,
                cfg.m,
                cfg.n,
                cfg.t_train,
                &user,
                &mut seed::rng_from_seed(train_seed),
            )
            .map_err(runtime)?;
            set.meta.seed = Some(train_seed);
            write_sample_set(&set, &out).map_err(Failure::Runtime)?;
            eprintln!(
                "wrote {} samples (M={}, N={}) to {}",
                set.len(),
                set.m(),
                set.n(),
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
