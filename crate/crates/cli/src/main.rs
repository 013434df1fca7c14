use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anosov_core::config::{load_config, RunConfig, TaskSpec};
use anosov_core::reference::reproduce_reference;
use anosov_core::report::Report;
use anosov_core::runner::run;
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "anosov", version, about = "Certify dominated splittings of free group representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Restrict to tasks of these kinds.
    #[arg(long = "task")]
    tasks: Vec<String>,
    /// Print nothing on success paths.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every task of the configuration.
    Run(Common),
    /// Domination certificates.
    Certify(Common),
    /// Limit-map values at boundary points.
    LimitMap(Common),
    /// Transversality of upper and lower limit maps.
    Transversality(Common),
    /// Strongly dynamics-preserving convergence curves.
    Sdp(Common),
    /// Hölder exponent estimate of the limit map.
    Holder(Common),
    /// Dominated splittings along the shift.
    Splitting(Common),
    /// Re-certification under random perturbations.
    Stability(Common),
    /// Built-in reference runs with known outcomes.
    #[command(name = "reproduce-paper", alias = "reproduce")]
    Reproduce(Common),
    /// Pretty-print a saved report.
    Report {
        path: PathBuf,
    },
}

fn fail_input(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn configured(common: &Common, kind: Option<&str>) -> Result<RunConfig, String> {
    let path = common.config.as_deref().ok_or("--config is required")?;
    let mut cfg = load_config(path).map_err(|e| e.to_string())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let mut wanted: Vec<String> = common.tasks.iter().map(|t| t.replace('-', "_")).collect();
    if let Some(kind) = kind {
        wanted = vec![kind.to_string()];
    }
    if !wanted.is_empty() {
        let keep: Vec<TaskSpec> = cfg
            .tasks
            .iter()
            .filter(|t| wanted.iter().any(|w| w == t.name()))
            .cloned()
            .collect();
        cfg.tasks = if keep.is_empty() {
            wanted
                .iter()
                .map(|w| TaskSpec::default_for(w).ok_or_else(|| format!("no `{w}` task in the configuration")))
                .collect::<Result<_, _>>()?
        } else {
            keep
        };
    }
    Ok(cfg)
}

fn emit(report: &Report, common: &Common) -> ExitCode {
    match &common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, report.to_json()) {
                return fail_input(format!("{}: {e}", path.display()));
            }
            if !common.quiet {
                print!("{}", report.render());
            }
        }
        None => {
            if !common.quiet {
                println!("{}", report.to_json());
                eprint!("{}", report.render());
            }
        }
    }
    ExitCode::from(report.exit_code() as u8)
}

fn show(path: &Path) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail_input(format!("{}: {e}", path.display())),
    };
    match serde_json::from_str::<Report>(&text) {
        Ok(r) => {
            print!("{}", r.render());
            ExitCode::SUCCESS
        }
        Err(e) => fail_input(format!("{}: {e}", path.display())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, kind) = match &cli.command {
        Command::Report { path } => return show(path),
        Command::Reproduce(c) => return emit(&reproduce_reference(), c),
        Command::Run(c) => (c, None),
        Command::Certify(c) => (c, Some("certify")),
        Command::LimitMap(c) => (c, Some("limit_map")),
        Command::Transversality(c) => (c, Some("transversality")),
        Command::Sdp(c) => (c, Some("sdp")),
        Command::Holder(c) => (c, Some("holder")),
        Command::Splitting(c) => (c, Some("splitting")),
        Command::Stability(c) => (c, Some("stability")),
    };
    let cfg = match configured(common, kind) {
        Ok(c) => c,
        Err(e) => return fail_input(e),
    };
    match run(&cfg) {
        Ok(report) => emit(&report, common),
        Err(e) => fail_input(e),
    }
}
