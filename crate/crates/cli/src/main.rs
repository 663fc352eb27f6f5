//! Command-line front end: single runs, replicated studies and figures.
//!
//! Exit status is 0 on success, 1 when a run fails and 2 for usage or
//! configuration errors.

mod config;
mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use mmfbo::bench::study::write_study;
use mmfbo::bench::{run_study, Method, StudyConfig, StudySummary};
use mmfbo::oracles::OracleSpec;

use crate::config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "mmfbo", version, about = "Min-max functional Bayesian optimization benchmarks")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One replication of each method.
    Run(ExperimentArgs),
    /// Paired replications with aggregated metrics.
    Study {
        #[command(flatten)]
        args: ExperimentArgs,
        #[arg(short = 'r', long)]
        replications: Option<usize>,
    },
    /// Render SVG figures from a summary.json.
    Plot {
        summary: PathBuf,
        /// Defaults to a `figures` directory next to the summary.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// List the built-in oracles.
    Catalog,
    /// Print a complete default configuration.
    Defaults {
        #[arg(long, default_value = "msd")]
        oracle: String,
        #[arg(long, default_value_t = 30)]
        budget: usize,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment file; flags and environment override it.
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long)]
    oracle: Option<String>,
    #[arg(long)]
    budget: Option<usize>,
    /// Comma-separated subset of mmfbo, gp_on_g, sfd.
    #[arg(long, alias = "method", value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long, env = "MMFBO_SEED")]
    seed: Option<u64>,
    #[arg(short, long, env = "MMFBO_OUT")]
    out: Option<PathBuf>,
    #[arg(short, long, env = "MMFBO_JOBS")]
    jobs: Option<usize>,
    #[arg(long)]
    noise_sd: Option<f64>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    dry: bool,
}

enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl ExperimentArgs {
    fn resolve(&self, replications: Option<usize>) -> Result<ExperimentConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).map_err(Failure::Usage)?,
            None => {
                let (Some(oracle), Some(budget)) = (&self.oracle, self.budget) else {
                    return Err(Failure::Usage("either --config or both --oracle and --budget are required".into()));
                };
                ExperimentConfig::new(oracle, budget)
            }
        };
        if let Some(o) = &self.oracle {
            cfg.oracle = o.clone();
        }
        if let Some(b) = self.budget {
            cfg.budget = b;
        }
        if let Some(m) = &self.methods {
            cfg.methods = m.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if self.jobs.is_some() {
            cfg.jobs = self.jobs;
        }
        if let Some(sd) = self.noise_sd {
            cfg.noise_sd = sd;
        }
        if let Some(r) = replications {
            cfg.replications = r;
        }
        cfg.validate().map_err(Failure::Usage)?;
        Ok(cfg)
    }
}

fn print_summary(summary: &StudySummary) {
    println!("{} budget={} n0={} R={}", summary.oracle, summary.budget, summary.n0, summary.replications);
    for m in &summary.methods {
        let tt: Vec<String> = m.tt.iter().map(|a| format!("tt@{}={:.2}", a.epsilon, a.success_fraction)).collect();
        println!(
            "  {:<8} final_regret={:.4e} auoc={:.4} {}",
            m.method.as_str(),
            m.final_regret.median,
            m.auoc.median,
            tt.join(" ")
        );
    }
}

fn experiment(cfg: &ExperimentConfig, study: &StudyConfig, record_json: bool) -> Result<(), Failure> {
    let out = &cfg.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let result = match run_study(study) {
        Ok(r) => r,
        Err(failure) => {
            let _ = mmfbo::bench::study::write_runs(out, study, &failure.partial);
            return Err(Failure::Runtime(anyhow::Error::new(failure)));
        }
    };
    let written = write_study(out, study, &result).with_context(|| format!("writing results to {}", out.display()))?;
    fs::write(out.join("config.toml"), cfg.to_toml()).context("writing config.toml")?;
    if record_json {
        for r in &result.records {
            let path = out.join(format!("runs/{}_rep0.json", r.method));
            let json = serde_json::to_string_pretty(r).context("serializing run record")?;
            fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
        }
    }
    log::info!("wrote {} files under {}", written.len() + 1, out.display());
    print_summary(&result.summary);
    Ok(())
}

fn plot(summary_path: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let text = fs::read_to_string(summary_path).map_err(|e| Failure::Usage(format!("{}: {e}", summary_path.display())))?;
    let summary = StudySummary::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", summary_path.display())))?;
    if summary.methods.is_empty() {
        eprintln!("warning: summary lists no methods; no figures written");
        return Ok(());
    }
    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => summary_path.parent().unwrap_or(Path::new(".")).join("figures"),
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, svg) in svg::figures(&summary) {
        let path = dir.join(name);
        fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(())
}

/// Writes to stdout, tolerating a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn catalog() -> String {
    let mut s = String::new();
    for spec in OracleSpec::catalog() {
        s += &format!("{} (d = {}, t in [{}, {}])\n", spec.name, spec.dim(), spec.grid.lo(), spec.grid.hi());
        for (i, p) in spec.parameters.iter().enumerate() {
            s += &format!(
                "  {:<10} [{}, {}]  reference {}\n",
                p,
                spec.design_box.lower()[i],
                spec.design_box.upper()[i],
                spec.reference[i]
            );
        }
    }
    s
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve(Some(1))?;
            if args.dry {
                emit(&cfg.to_toml());
                return Ok(());
            }
            let study = cfg.study(1).map_err(Failure::Usage)?;
            experiment(&cfg, &study, true)
        }
        Command::Study { args, replications } => {
            let cfg = args.resolve(replications)?;
            if args.dry {
                emit(&cfg.to_toml());
                return Ok(());
            }
            let study = cfg.study(cfg.replications).map_err(Failure::Usage)?;
            experiment(&cfg, &study, false)
        }
        Command::Plot { summary, out } => plot(&summary, out.as_deref()),
        Command::Catalog => {
            emit(&catalog());
            Ok(())
        }
        Command::Defaults { oracle, budget } => {
            let cfg = ExperimentConfig::new(&oracle, budget);
            cfg.validate().map_err(Failure::Usage)?;
            emit(&cfg.to_toml());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
