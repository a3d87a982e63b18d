//! `pendctl`: model, check, place, discretize, simulate and sweep the
//! cart-pendulum controller from the command line.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_periods, parse_poles, InitialCondition, PlantKind, Pole, RunConfig};
use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "pendctl",
    version,
    about = "State-feedback design for an inverted pendulum on a cart"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Linearize about the upright equilibrium and print A, B, C.
    Linearize,
    /// Controllability and observability rank tests.
    Check,
    /// Canonical-form pole placement (and its sampled counterpart with --T).
    Place,
    /// Zero-order-hold discretization at --T.
    Discretize,
    /// Closed-loop simulation; sampled when --T is given.
    Simulate,
    /// Sampled-control performance over a grid of periods (--Ts).
    Sweep,
}

#[derive(Debug, Clone)]
struct PoleList(Vec<Pole>);

fn pole_list(s: &str) -> Result<PoleList, String> {
    parse_poles(s).map(PoleList)
}

#[derive(Debug, Clone)]
struct PeriodGrid(Vec<f64>);

fn period_grid(s: &str) -> Result<PeriodGrid, String> {
    parse_periods(s).map(PeriodGrid)
}

/// Flags override the configuration file field by field.
#[derive(Debug, Args)]
struct Overrides {
    /// JSON configuration (a bare config or an earlier summary).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// JSON summary destination; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// CSV trajectory destination (simulate).
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Desired poles, e.g. "-2,-3+0.5i,-3-0.5i,-4".
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = pole_list)]
    poles: Option<PoleList>,
    /// x_u, x_c, x_s or four comma-separated numbers.
    #[arg(long, global = true, allow_hyphen_values = true)]
    initial: Option<InitialCondition>,
    /// Sampling period.
    #[arg(long = "T", global = true)]
    period: Option<f64>,
    /// Period grid, "start:stop:step" or "a,b,c".
    #[arg(long = "Ts", global = true, value_parser = period_grid)]
    periods: Option<PeriodGrid>,
    #[arg(long, global = true, value_enum)]
    plant: Option<PlantKind>,
    /// Re-place the poles at e^(sT) on the discretized model.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    redesign: Option<bool>,
    /// Rank tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    t_final: Option<f64>,
    /// Integrator step.
    #[arg(long, global = true)]
    step: Option<f64>,
    #[arg(long, global = true)]
    divergence_bound: Option<f64>,
    /// Constant reference for y1.
    #[arg(long, global = true, allow_hyphen_values = true)]
    reference: Option<f64>,
    /// Cart mass M.
    #[arg(long, global = true)]
    mass: Option<f64>,
    /// Pendulum length L.
    #[arg(long, global = true)]
    length: Option<f64>,
    /// Cart friction F.
    #[arg(long, global = true)]
    friction: Option<f64>,
    #[arg(long, global = true)]
    gravity: Option<f64>,
}

impl Overrides {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag { cfg.$($field).+ = v; })*
            };
        }
        if let Some(PoleList(p)) = self.poles {
            cfg.poles = p;
        }
        if let Some(PeriodGrid(ts)) = self.periods {
            cfg.periods = Some(ts);
        }
        set! {
            initial => initial,
            plant => plant,
            redesign => redesign,
            tol => tol,
            t_final => t_final,
            step => step,
            divergence_bound => divergence_bound,
            reference => reference,
            mass => params.cart_mass,
            length => params.length,
            friction => params.friction,
            gravity => params.gravity,
        }
        if self.period.is_some() {
            cfg.period = self.period;
        }
        if self.output.is_some() {
            cfg.output = self.output;
        }
        if self.csv.is_some() {
            cfg.csv = self.csv;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.opts.resolve()?;
    let outcome = match cli.command {
        Command::Linearize => commands::linearize_cmd(&cfg),
        Command::Check => commands::check_cmd(&cfg),
        Command::Place => commands::place_cmd(&cfg),
        Command::Discretize => commands::discretize_cmd(&cfg),
        Command::Simulate => commands::simulate_cmd(&cfg),
        Command::Sweep => commands::sweep_cmd(&cfg),
    }?;
    if let (Some(path), Some(traj)) = (&cfg.csv, &outcome.trajectory) {
        output::write_csv_file(traj, path)?;
    }
    outcome.summary.emit(cfg.output.as_deref())?;
    outcome.failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pendctl: {e}");
            e.exit_code()
        }
    }
}
