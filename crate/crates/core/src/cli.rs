//! Command-line front end.
//!
//! Exit codes: 0 when every gate and check passed, 1 when a check or gate
//! failed or the run hit a numerical/physical error (e.g. an unstable frame),
//! 2 for usage and configuration errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::config::{Override, RunConfig};
use crate::error::Error;
use crate::scenarios::{self, list_scenarios, Relation, ScenarioId, ScenarioReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "kerr-magnon",
    version,
    about = "Squeezed Kerr-magnon spin coupling experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write its results directory.
    Run(RunArgs),
    /// List the available scenarios.
    List,
    /// Check a configuration file without running anything.
    Validate { config: PathBuf },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario id (see `list`).
    pub scenario: String,
    /// TOML or JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output root; defaults to the config value, then $KERR_MAGNON_OUT, then ./results.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set dissipation.kappa_m=2e6` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<Override>,
    /// Magnon Fock cutoff.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Explicit integrator step (s).
    #[arg(long)]
    pub step: Option<f64>,
    /// Derive the squeezed frame from the device model instead of quoted values.
    #[arg(long)]
    pub from_device: bool,
}

impl RunArgs {
    /// File < `--set` < dedicated flags.
    fn overrides(&self, id: ScenarioId) -> Vec<Override> {
        let mut ov = self.set.clone();
        ov.push(Override::new("scenario", id.as_str()));
        if let Some(out) = &self.out {
            ov.push(Override::new("output.dir", out.display().to_string()));
        }
        if let Some(c) = self.cutoff {
            ov.push(Override::new("numerics.cutoff", c));
        }
        if let Some(h) = self.step {
            ov.push(Override::new("numerics.step", h));
        }
        if self.from_device {
            ov.push(Override::new("frame.source", "device"));
        }
        ov
    }
}

fn describe(value: &Value) -> String {
    match value.as_f64() {
        Some(x) => format!("{x:.6e}"),
        None => value.to_string(),
    }
}

/// Human-readable summary of a report.
pub fn summarize(report: &ScenarioReport) -> String {
    let mut out = String::new();
    for g in &report.gates {
        let observed = g.observed.map_or("n/a".to_string(), |v| format!("{v:.3e}"));
        out.push_str(&format!(
            "{} gate {}: {} (tolerance {:.0e})\n",
            if g.passed { "PASS" } else { "FAIL" },
            g.name,
            observed,
            g.tolerance
        ));
    }
    for c in &report.checks {
        let relation = match c.relation {
            Relation::AtLeast => format!(">= {}", describe(&c.expected.into())),
            Relation::AtMost => format!("<= {}", describe(&c.expected.into())),
            Relation::Within => format!(
                "= {} +/- {}",
                describe(&c.expected.into()),
                describe(&c.tolerance.unwrap_or(0.0).into())
            ),
        };
        out.push_str(&format!(
            "{} [{}] {}: {} (expected {})\n",
            if c.passed { "PASS" } else { "FAIL" },
            serde_json::to_value(c.provenance)
                .unwrap_or_default()
                .as_str()
                .unwrap_or(""),
            c.name,
            describe(&c.observed.into()),
            relation
        ));
    }
    for a in &report.advisories {
        out.push_str(&format!("advisory: {a}\n"));
    }
    if let Some(e) = &report.error {
        out.push_str(&format!("error: {e}\n"));
    }
    out
}

fn run(args: &RunArgs, out: &mut impl Write, err: &mut impl Write) -> i32 {
    let id: ScenarioId = match args.scenario.parse() {
        Ok(id) => id,
        Err(_) => {
            let _ = writeln!(
                err,
                "error: unknown scenario `{}`; available:\n{}",
                args.scenario,
                list_scenarios()
            );
            return EXIT_USAGE;
        }
    };
    let cfg = match RunConfig::load(args.config.as_deref(), &args.overrides(id)) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    match scenarios::run(&cfg) {
        Ok(outcome) => {
            let r = &outcome.report;
            let _ = write!(out, "{}", summarize(r));
            let _ = writeln!(
                out,
                "{} {}: report written to {}",
                if r.passed { "PASSED" } else { "FAILED" },
                id,
                outcome.report_path().display()
            );
            if r.passed {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(e @ Error::Config { .. }) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILED
        }
    }
}

/// Parse `argv` and execute; returns the process exit code.
pub fn main_with<I, T>(argv: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match &cli.command {
        Command::List => {
            let _ = write!(out, "{}", list_scenarios());
            EXIT_OK
        }
        Command::Validate { config } => match RunConfig::load(Some(config), &[]) {
            Ok(cfg) => {
                let scenario = cfg.scenario.map_or("none".to_string(), |s| s.to_string());
                let _ = writeln!(
                    out,
                    "{} is valid (scenario: {scenario}; output root: {})",
                    config.display(),
                    cfg.output_root().display()
                );
                EXIT_OK
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_USAGE
            }
        },
        Command::Run(args) => run(args, out, err),
    }
}
