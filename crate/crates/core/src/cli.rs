//! Command-line front end.
//!
//! Exit codes: 0 when every verdict passes, 1 when at least one fails,
//! 2 on configuration or usage errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::experiments::suite::{run_suite, SuiteConfig, SuiteReport};
use crate::experiments::{
    apply_override, parse_json, ExperimentConfig, ExperimentKind, Harness, Relation, Report,
};
use crate::rng::derive_seed;
use crate::spectral::SpectralModel;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

pub const WORKERS_ENV: &str = "SPECTRAL_CLT_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "spectral-clt",
    version,
    about = "Monte Carlo checks of limit laws for Fourier transforms of stationary processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Set a configuration field, e.g. `n=2048` or `tolerances.ks_crit=1.358`.
    #[arg(long = "override", value_name = "K=V")]
    pub overrides: Vec<String>,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long, value_name = "N", env = WORKERS_ENV)]
    pub workers: Option<usize>,
    /// Master seed, replacing the configured one.
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one sample path as `index,value` CSV.
    Generate(CommonArgs),
    /// Write `theta,g` CSV over the frequency grid.
    Spectrum(CommonArgs),
    /// Fixed-frequency CLT.
    Clt(CommonArgs),
    /// Cross-frequency correlations (first two thetas).
    Cross(CommonArgs),
    /// Random-frequency (annealed) CLT.
    Annealed(CommonArgs),
    /// Periodogram against chi-square(2).
    Periodogram(CommonArgs),
    /// Max-functional identity.
    Invariance(CommonArgs),
    /// Convergence of E|S_n|^2/n.
    Variance(CommonArgs),
    /// Conditional-norm diagnostics.
    Diag(CommonArgs),
    /// Full acceptance battery over the seed panel.
    Suite(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Generate(a)
            | Command::Spectrum(a)
            | Command::Clt(a)
            | Command::Cross(a)
            | Command::Annealed(a)
            | Command::Periodogram(a)
            | Command::Invariance(a)
            | Command::Variance(a)
            | Command::Diag(a)
            | Command::Suite(a) => a,
        }
    }

    fn experiment(&self) -> Option<ExperimentKind> {
        Some(match self {
            Command::Clt(_) => ExperimentKind::FixedFreqClt,
            Command::Cross(_) => ExperimentKind::CrossFreq,
            Command::Annealed(_) => ExperimentKind::Annealed,
            Command::Periodogram(_) => ExperimentKind::PeriodogramChi2,
            Command::Invariance(_) => ExperimentKind::InvarianceIdentity,
            Command::Variance(_) => ExperimentKind::VarianceConvergence,
            Command::Diag(_) => ExperimentKind::RegularityDiag,
            _ => return None,
        })
    }
}

fn read_config_value(args: &CommonArgs, required: bool) -> Result<Value> {
    let mut value = match &args.config {
        Some(path) => {
            let bytes = std::fs::read(path)
                .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
            parse_json(&bytes)?
        }
        None if required => return Err(Error::config("--config is required")),
        None => json!({}),
    };
    for o in &args.overrides {
        apply_override(&mut value, o)?;
    }
    Ok(value)
}

/// Effective experiment configuration: file, then overrides, then `--seed`.
/// The subcommand, when it names an experiment, fixes `kind`.
pub fn load_experiment_config(
    args: &CommonArgs,
    kind: Option<ExperimentKind>,
) -> Result<ExperimentConfig> {
    let mut value = read_config_value(args, true)?;
    if let Some(obj) = value.as_object_mut() {
        if let Some(seed) = args.seed {
            obj.insert("master_seed".into(), json!(seed));
        }
        if let Some(k) = kind {
            obj.insert("kind".into(), json!(k));
        }
    }
    ExperimentConfig::from_json(&value)
}

/// Suite configuration; `--seed S` runs the panel `[S]` alone.
pub fn load_suite_config(args: &CommonArgs) -> Result<SuiteConfig> {
    let mut value = read_config_value(args, false)?;
    if let (Some(seed), Some(obj)) = (args.seed, value.as_object_mut()) {
        obj.insert("seeds".into(), json!([seed]));
        obj.insert("min_passing".into(), json!(1));
    }
    SuiteConfig::from_json(&value)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn report_summary(report: &Report) -> String {
    let total = report.verdicts.len();
    let failed = report.failed();
    let mut s = format!(
        "{}: {}/{} verdicts passed",
        report.kind,
        total - failed.len(),
        total
    );
    for name in failed {
        let v = &report.verdicts[name];
        let stat = report.statistics[&v.statistic];
        let thr = report.thresholds[&v.threshold];
        let rel = match v.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        let _ = write!(s, "\n  FAIL {name}: {stat} {rel} {thr} does not hold");
    }
    s
}

fn suite_summary(report: &SuiteReport) -> String {
    let mut s = String::new();
    for c in &report.criteria {
        let runs = c.runs.len();
        let _ = writeln!(
            s,
            "[{}] criterion {:>2} {}: {}/{} runs passed",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.passing_runs,
            runs
        );
    }
    let _ = write!(
        s,
        "suite {}",
        if report.passed { "passed" } else { "failed" }
    );
    s
}

fn spectrum_csv(cfg: &ExperimentConfig) -> Result<String> {
    let spec = cfg.validate()?;
    let model = SpectralModel::new(&spec, 0)?;
    let mut out = String::from("theta,g\n");
    for j in 0..cfg.n_grid {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / cfg.n_grid as f64;
        let _ = writeln!(out, "{theta},{}", model.g(theta)?);
    }
    Ok(out)
}

fn execute(cli: &Cli) -> Result<u8> {
    let args = cli.command.common();
    let harness = Harness::new(args.workers.unwrap_or(0))?;
    let out = args.out.as_deref();
    match &cli.command {
        Command::Generate(_) => {
            let cfg = load_experiment_config(args, None)?;
            let spec = cfg.validate()?;
            let path = spec.sampler(cfg.n)?.path(derive_seed(cfg.master_seed, 0));
            emit(out, &path.to_csv())?;
            Ok(EXIT_PASS)
        }
        Command::Spectrum(_) => {
            let cfg = load_experiment_config(args, None)?;
            emit(out, &spectrum_csv(&cfg)?)?;
            Ok(EXIT_PASS)
        }
        Command::Suite(_) => {
            let cfg = load_suite_config(args)?;
            let report = run_suite(&harness, &cfg)?;
            emit(out, &report.to_json_string())?;
            eprintln!("{}", suite_summary(&report));
            Ok(if report.passed { EXIT_PASS } else { EXIT_FAIL })
        }
        cmd => {
            let kind = cmd
                .experiment()
                .expect("remaining subcommands run experiments");
            let cfg = load_experiment_config(args, Some(kind))?;
            let report = harness.run(&cfg)?;
            let text = report.to_json_string();
            emit(out, &text)?;
            if let Some(path) = &cfg.output.report {
                std::fs::write(path, &text)?;
            }
            eprintln!("{}", report_summary(&report));
            Ok(if report.all_passed() {
                EXIT_PASS
            } else {
                EXIT_FAIL
            })
        }
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common(config: Option<PathBuf>) -> CommonArgs {
        CommonArgs {
            config,
            out: None,
            overrides: vec![],
            workers: None,
            seed: None,
        }
    }

    #[test]
    fn subcommands_parse() {
        for sub in [
            "generate",
            "spectrum",
            "clt",
            "cross",
            "annealed",
            "periodogram",
            "invariance",
            "variance",
            "diag",
            "suite",
        ] {
            let cli = Cli::try_parse_from([
                "spectral-clt",
                sub,
                "--override",
                "n=64",
                "--override",
                "replicates=100",
                "--seed",
                "3",
            ])
            .unwrap();
            let c = cli.command.common();
            assert_eq!(c.overrides, vec!["n=64", "replicates=100"]);
            assert_eq!(c.seed, Some(3));
        }
        assert!(Cli::try_parse_from(["spectral-clt", "bogus"]).is_err());
    }

    #[test]
    fn subcommand_and_seed_take_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"kind":"annealed","process":"ma1","thetas":[1.0],"master_seed":9}"#,
        )
        .unwrap();
        let mut args = common(Some(path));
        args.seed = Some(4);
        args.overrides = vec!["n=128".into()];
        let cfg = load_experiment_config(&args, Some(ExperimentKind::RegularityDiag)).unwrap();
        assert_eq!(cfg.kind, Some(ExperimentKind::RegularityDiag));
        assert_eq!(cfg.master_seed, 4);
        assert_eq!(cfg.n, 128);
    }

    #[test]
    fn suite_seed_flag_runs_single_seed() {
        let mut args = common(None);
        args.seed = Some(11);
        let cfg = load_suite_config(&args).unwrap();
        assert_eq!((cfg.seeds, cfg.min_passing), (vec![11], 1));
        assert_eq!(
            load_suite_config(&common(None)).unwrap(),
            SuiteConfig::default()
        );
    }

    #[test]
    fn missing_config_is_usage_error() {
        assert_eq!(run(["spectral-clt", "clt"]), EXIT_USAGE);
        assert_eq!(
            run(["spectral-clt", "clt", "--config", "/nonexistent/c.json"]),
            EXIT_USAGE
        );
        assert_eq!(run(["spectral-clt"]), EXIT_USAGE);
    }
}
