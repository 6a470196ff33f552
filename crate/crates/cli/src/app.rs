//! Command line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{execute, write_artifacts};
use crate::config::{parse_assignment, Command, ExperimentConfig};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "kpplab", version, about = "Fisher-KPP front propagation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Least, average and greatest windowed means of the growth rate.
    Mean(Common),
    /// Front speed from Heaviside data and the takeover check.
    Takeover(Common),
    /// Spreading-speed interval by probing rays under shifted paths.
    Interval(Common),
    /// Exponential decay of the distance to 1 for positive data.
    Stability(Common),
    /// Ordering of a run against the exponential super- and lower solutions.
    Certify(Common),
    /// One command over seeds and config variants, aggregated.
    Sweep(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML experiment config; defaults apply to every missing key.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory (config key `output`).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Noise seed (config key `path.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Final time (config key `solver.t_end`).
    #[arg(long)]
    t_end: Option<f64>,
    /// Time step (config key `solver.dt`).
    #[arg(long)]
    dt: Option<f64>,
    /// Override any config key, e.g. `--set path.a=1.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the resolved config as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

impl Sub {
    fn split(self) -> (Command, Common) {
        match self {
            Sub::Mean(c) => (Command::Mean, c),
            Sub::Takeover(c) => (Command::Takeover, c),
            Sub::Interval(c) => (Command::Interval, c),
            Sub::Stability(c) => (Command::Stability, c),
            Sub::Certify(c) => (Command::Certify, c),
            Sub::Sweep(c) => (Command::Sweep, c),
        }
    }
}

impl Common {
    fn overrides(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut o = Vec::new();
        if let Some(p) = &self.out {
            o.push(("output".into(), format!("{:?}", p.display().to_string())));
        }
        if let Some(s) = self.seed {
            o.push(("path.seed".into(), s.to_string()));
        }
        if let Some(t) = self.t_end {
            o.push(("solver.t_end".into(), format!("{t:?}")));
        }
        if let Some(dt) = self.dt {
            o.push(("solver.dt".into(), format!("{dt:?}")));
        }
        for s in &self.set {
            o.push(parse_assignment(s)?);
        }
        Ok(o)
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let (command, common) = cli.command.split();
    match run_command(command, &common) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("kpplab {}: {e}", command.name());
            e.exit_code()
        }
    }
}

fn run_command(command: Command, common: &Common) -> Result<i32, CliError> {
    let config = ExperimentConfig::load(common.config.as_deref(), &common.overrides()?)?;
    if common.print_config {
        let mut resolved = config;
        resolved.command = Some(command);
        print!("{}", resolved.to_toml());
        return Ok(0);
    }
    let outcome = execute(command, &config)?;
    let paths = write_artifacts(&config, &outcome)?;
    println!("{}: {:?}; {}", command.name(), outcome.status, outcome.summary);
    for p in paths {
        println!("  wrote {}", p.display());
    }
    Ok(outcome.status.exit_code())
}
