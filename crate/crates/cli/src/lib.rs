//! Command-line experiment runner for offensive tweet detection.
//!
//! ```text
//! offd run --config exp.conf [--seed N] [--out DIR] [--sweep-C 0.1,1,1000]
//! offd sweep --config exp.conf [--sweep-C LIST] [--sweep-dim LIST]
//! offd export-features --config exp.conf [--split train|test|all]
//! offd inspect-model out/model.offd
//! offd normalize tweets.tsv
//! ```
//!
//! `OFFD_THREADS` caps the worker pool. Exit codes: 0 success, 1 usage,
//! 2 data error, 3 numeric failure.

pub mod config;
pub mod error;
pub mod pipeline;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use offd_core::corpus::{load_olid_tsv, normalize_social, Split};
use offd_core::learn::{load_model, LinearHyper, Model};

pub use config::ExperimentConfig;
pub use error::{CliError, EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE};
pub use pipeline::{export_features, run_experiment, run_sweep, Inputs, RunOutcome, SweepOutcome};

use error::CoreContext;

pub const THREADS_ENV: &str = "OFFD_THREADS";

#[derive(Debug, Parser)]
#[command(name = "offd", version, about = "Offensive tweet detection experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train, evaluate and write report, model and manifest.
    Run(RunArgs),
    /// Sweep the SVM control parameter and/or the kitchen-sink dimension.
    Sweep(SweepArgs),
    /// Dump sentence features in the precomputed-vector format.
    ExportFeatures(ExportArgs),
    /// Describe a saved model file.
    InspectModel {
        model: PathBuf,
    },
    /// Rewrite the tweet column of a TSV with hashtag, mention and URL
    /// placeholders.
    Normalize {
        tsv: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Overrides the config's classifier seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also write an SVM accuracy-versus-C table.
    #[arg(long = "sweep-C", value_name = "LIST")]
    pub sweep_c: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long = "sweep-C", value_name = "LIST")]
    pub sweep_c: Option<String>,
    #[arg(long = "sweep-dim", value_name = "LIST")]
    pub sweep_dim: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
    All,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "all")]
    pub split: SplitArg,
}

impl CommonArgs {
    pub fn load(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.hyper.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        Ok(cfg)
    }
}

/// Parses arguments, runs the command and returns the exit status.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    match configure_threads().and_then(|()| dispatch(cli.command, stdout)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "offd: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{value}`")))?;
    // the global pool can only be built once per process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    let out_err = |e| CliError::io(Path::new("<stdout>"), e);
    match command {
        Command::Run(args) => {
            let cfg = args.common.load()?;
            let sweep = args.sweep_c.as_deref().map(|s| config::parse_list::<f64>(s, "--sweep-C")).transpose()?;
            let outcome = run_experiment(&cfg, sweep.as_deref())?;
            write!(stdout, "{}", outcome.rendered).map_err(out_err)?;
            for path in &outcome.written {
                writeln!(stdout, "wrote {}", path.display()).map_err(out_err)?;
            }
        }
        Command::Sweep(args) => {
            let cfg = args.common.load()?;
            let c = args.sweep_c.as_deref().map(|s| config::parse_list::<f64>(s, "--sweep-C")).transpose()?;
            let dims = args
                .sweep_dim
                .as_deref()
                .map(|s| config::parse_list::<usize>(s, "--sweep-dim"))
                .transpose()?;
            let outcome = run_sweep(&cfg, c.as_deref(), dims.as_deref())?;
            if let Some(points) = &outcome.c {
                write!(stdout, "{}", offd_core::eval::sweep_csv(points)).map_err(out_err)?;
            }
            if let Some(rows) = &outcome.dims {
                let named: Vec<_> = rows.iter().map(|(d, r)| (format!("D={d}"), *r)).collect();
                write!(stdout, "{}", offd_core::eval::render_report(&named).text).map_err(out_err)?;
            }
            for path in &outcome.written {
                writeln!(stdout, "wrote {}", path.display()).map_err(out_err)?;
            }
        }
        Command::ExportFeatures(args) => {
            let cfg = args.common.load()?;
            let splits: &[(Split, &str)] = match args.split {
                SplitArg::Train => &[(Split::Train, "features_train.txt")],
                SplitArg::Test => &[(Split::Test, "features_test.txt")],
                SplitArg::All => &[(Split::Train, "features_train.txt"), (Split::Test, "features_test.txt")],
            };
            let mut files = Vec::new();
            for (split, name) in splits {
                let mut buf = Vec::new();
                export_features(&cfg, *split, &mut buf)?;
                files.push((*name, buf));
            }
            for path in pipeline::write_atomically(&cfg.out, &files)? {
                writeln!(stdout, "wrote {}", path.display()).map_err(out_err)?;
            }
        }
        Command::InspectModel { model } => {
            let file = std::fs::File::open(&model).map_err(|e| CliError::io(&model, e))?;
            let loaded = load_model(std::io::BufReader::new(file)).during(model.display().to_string())?;
            write!(stdout, "{}", describe_model(&loaded)).map_err(out_err)?;
        }
        Command::Normalize { tsv } => {
            let file = std::fs::File::open(&tsv).map_err(|e| CliError::io(&tsv, e))?;
            let corpus = load_olid_tsv(file, None::<&[u8]>, Split::Train).during(tsv.display().to_string())?;
            let labeled = corpus.records.iter().any(|r| r.label.is_some());
            let mut text = String::from(if labeled { "id\ttweet\tsubtask_a\n" } else { "id\ttweet\n" });
            for r in &corpus.records {
                let _ = write!(text, "{}\t{}", r.id, normalize_social(&r.text));
                if labeled {
                    let _ = write!(text, "\t{}", r.label.map_or("", |l| l.as_str()));
                }
                text.push('\n');
            }
            stdout.write_all(text.as_bytes()).map_err(out_err)?;
        }
    }
    Ok(())
}

/// `key = value` summary of a model's classifier and kitchen-sink map.
pub fn describe_model(model: &Model) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    match model {
        Model::Linear(m) => {
            match m.hyper {
                LinearHyper::Rlsc { lambda } => {
                    line("classifier", "rlsc".into());
                    line("lambda", lambda.to_string());
                }
                LinearHyper::Svm { c, epochs, seed } => {
                    line("classifier", "svm".into());
                    line("C", c.to_string());
                    line("svm_epochs", epochs.to_string());
                    line("seed", seed.to_string());
                }
                LinearHyper::Logreg { lr, epochs, l2, seed } => {
                    line("classifier", "logreg".into());
                    line("lr", lr.to_string());
                    line("epochs", epochs.to_string());
                    line("l2", l2.to_string());
                    line("seed", seed.to_string());
                }
            }
            line("weights", m.weights.len().to_string());
            line("bias", m.bias.to_string());
        }
        Model::Gnb(m) => {
            line("classifier", "gnb".into());
            line("var_floor", m.var_floor.to_string());
            line("prior_off", m.priors[0].to_string());
            line("dim", m.dim().to_string());
        }
    }
    line("input_dim", model.input_dim().to_string());
    match model.rks() {
        Some(map) => {
            line("rks_dim", map.output_dim().to_string());
            line("rks_sigma", map.sigma().to_string());
            line("rks_seed", map.seed().to_string());
            line("prng", offd_core::rks::PRNG_ALGORITHM.to_string());
        }
        None => line("rks", "none".into()),
    }
    out
}
