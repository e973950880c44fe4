//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use coopsense_core::dataset::generate_range;
use coopsense_core::metrics::evaluate;
use coopsense_core::{Metrics, ReportMode};

use crate::bench::run_bench;
use crate::checkpoint::Checkpoint;
use crate::config::FileConfig;
use crate::error::{Error, Result};
use crate::fit::{as_mode, fit_model};
use crate::io::{load_dataset, save_dataset, write_dataset};
use crate::sweep::{run_sweep, Experiment, Method};

#[derive(Debug, Parser)]
#[command(name = "coopsense", version, about = "Cooperative spectrum sensing lab")]
pub struct Cli {
    /// JSON configuration file; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override every seed in the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report type: soft energies or hard decisions.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Output file; stdout when omitted (except for `train`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Sd,
    Hd,
}

impl From<ModeArg> for ReportMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sd => ReportMode::Sd,
            ModeArg::Hd => ReportMode::Hd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Eval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dcs,
    Kon,
    Svm,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a labelled dataset.
    Generate {
        /// Training snapshots come first on the trajectory, evaluation ones follow.
        #[arg(long, value_enum, default_value = "train")]
        split: SplitArg,
    },
    /// Fit a detector and write a checkpoint.
    Train {
        /// Training data; simulated from the configuration when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "dcs")]
        method: MethodArg,
    },
    /// Score a checkpoint and print its metrics.
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// Evaluation data; simulated from the configuration when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run the configured parameter sweep and write the results CSV.
    Sweep,
    /// Time per-decision inference and write the latency CSV.
    Bench,
}

impl FileConfig {
    pub fn experiment(&self) -> Experiment {
        Experiment {
            scenario: self.scenario.clone(),
            data: self.data.clone(),
            arch: self.arch.clone(),
            train: self.train.clone(),
            svm: self.svm.clone(),
            kon_statistic: self.kon_statistic,
        }
    }
}

fn method_for(m: MethodArg, mode: ReportMode) -> Method {
    match (m, mode) {
        (MethodArg::Dcs, ReportMode::Sd) => Method::DcsSd,
        (MethodArg::Dcs, ReportMode::Hd) => Method::DcsHd,
        (MethodArg::Kon, _) => Method::Kon,
        (MethodArg::Svm, ReportMode::Sd) => Method::SvmSd,
        (MethodArg::Svm, ReportMode::Hd) => Method::SvmHd,
    }
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

pub fn metrics_line(m: &Metrics) -> String {
    let f = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "NA".into());
    format!(
        "p_fa={} p_md={} sensing_error={} n_h0={} n_h1={}",
        f(m.p_fa),
        f(m.p_md),
        f(m.sensing_error),
        m.n_h0,
        m.n_h1
    )
}

/// Execute a parsed command. Results without an `--out` path, the metrics
/// line and warnings go to the given streams.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let console = |e: std::io::Error| Error::io("<stdout>", e);
    let mut cfg = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let mode: ReportMode = cli.mode.map(Into::into).unwrap_or(ReportMode::Sd);
    let out = cli.out.as_deref();
    let sc = &cfg.scenario;
    let (n_train, n_eval) = (cfg.data.n_train, cfg.data.n_eval);

    match cli.command {
        Command::Generate { split } => {
            let (start, n) = match split {
                SplitArg::Train => (0, n_train),
                SplitArg::Eval => (n_train as u64, n_eval),
            };
            let ds = generate_range(sc, start, n, mode, sc.seed)?;
            match out {
                Some(p) => save_dataset(&ds, p)?,
                None => write_dataset(&ds, &mut *stdout).map_err(console)?,
            }
        }
        Command::Train { data, method } => {
            let out = out.ok_or_else(|| Error::Invalid("train needs --out <checkpoint path>".into()))?;
            let train = match &data {
                Some(p) => load_dataset(p)?,
                None => generate_range(sc, 0, n_train, ReportMode::Sd, sc.seed)?,
            };
            let mut exp = cfg.experiment();
            exp.scenario = train.scenario.clone();
            let model = fit_model(&exp, method_for(method, mode), &train)?;
            Checkpoint::new(train.scenario.clone(), model).save(out)?;
        }
        Command::Eval { model, data } => {
            let ck = Checkpoint::load(&model)?;
            let eval = match &data {
                Some(p) => load_dataset(p)?,
                None => generate_range(sc, n_train as u64, n_eval, ReportMode::Sd, sc.seed)?,
            };
            let eval = as_mode(&eval, ck.model.mode(), ck.scenario.gamma_dbm)?;
            let m = evaluate(&ck.model, &eval)?;
            writeln!(stdout, "{} {}", ck.model.tag(), metrics_line(&m)).map_err(console)?;
            if let Some(p) = out {
                let text = serde_json::to_string_pretty(&m).map_err(|e| Error::Invalid(e.to_string()))?;
                std::fs::write(p, text + "\n").map_err(|e| Error::io(p, e))?;
            }
        }
        Command::Sweep => {
            let result = run_sweep(&cfg.sweep, &cfg.experiment())?;
            for f in result.failures() {
                let _ = writeln!(stderr, "warning: {f}");
            }
            emit(out, &result.to_csv(), stdout)?;
        }
        Command::Bench => {
            let report = run_bench(&cfg.bench, &cfg.experiment())?;
            emit(out, &report.to_csv(), stdout)?;
        }
    }
    Ok(())
}

/// Parse `args` and run against the process streams; returns the exit code
/// (2 for usage errors).
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_args(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

pub fn run_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return e.exit_code();
        }
    };
    match run(cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
