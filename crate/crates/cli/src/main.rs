//! `ratetip` command-line front end.

// `!(a < b)` comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ratetip::shift::ShiftKind;

use crate::config::{GapModeChoice, RunConfig, ZInit};
use crate::error::CliError;

/// Critical rates and weak tracking in the parameter-shifted Rössler system.
#[derive(Debug, Parser)]
#[command(name = "ratetip", version)]
struct Cli {
    /// JSON run configuration; flags override its keys.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for rate scans.
    #[arg(long, global = true, env = "RATETIP_JOBS")]
    jobs: Option<usize>,

    /// Log more to stderr (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Equilibria, eigenvalues and Hopf point of the frozen system.
    Frozen {
        #[command(flatten)]
        system: SystemArgs,
        /// Also locate the Hopf point of the inner equilibrium.
        #[arg(long)]
        hopf: bool,
        /// Bracket in `a` for the Hopf search.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, default_values_t = [-0.05, 0.05])]
        hopf_range: Vec<f64>,
    },
    /// Period-one unstable orbit of the frozen system.
    Upo {
        #[command(subcommand)]
        command: UpoCommand,
    },
    /// One pullback run at a fixed rate, written as CSV files.
    Simulate {
        #[command(flatten)]
        common: TrackingArgs,
        /// Shift rate.
        #[arg(long)]
        r: Option<f64>,
        /// End of the run (defaults to T).
        #[arg(long, allow_negative_numbers = true)]
        t_end: Option<f64>,
        /// Resample the trajectory on a uniform grid instead of step ends.
        #[arg(long)]
        dt: Option<f64>,
        /// Directory for trajectory.csv and crossings.csv.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Gap function on a uniform rate grid, as CSV.
    EtaScan {
        #[command(flatten)]
        common: TrackingArgs,
        #[command(flatten)]
        scan: ScanArgs,
        /// CSV destination (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the run metadata as JSON here.
        #[arg(long)]
        meta: Option<PathBuf>,
    },
    /// Scan, refine and confirm critical rates; JSON report.
    CriticalRates {
        #[command(flatten)]
        common: TrackingArgs,
        #[command(flatten)]
        scan: ScanArgs,
        #[command(flatten)]
        refine: RefineArgs,
        /// Report destination (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum UpoCommand {
    /// Newton search for the fixed point of the return map.
    Find {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        integ: IntegArgs,
    },
}

#[derive(Debug, Args)]
struct SystemArgs {
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum ShiftKindArg {
    Tanh,
    PiecewiseLinear,
    Constant,
}

#[derive(Debug, Args)]
struct TrackingArgs {
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long)]
    shift_kind: Option<ShiftKindArg>,
    #[arg(long, allow_negative_numbers = true)]
    lambda_minus: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    lambda_plus: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// `x,y,z` or `auto` for the past equilibrium.
    #[arg(long, allow_hyphen_values = true)]
    z_init: Option<ZInit>,
    #[arg(long, allow_negative_numbers = true)]
    t_start: Option<f64>,
    /// Horizon T.
    #[arg(long = "T", visible_alias = "horizon")]
    horizon: Option<f64>,
    #[arg(long)]
    gap_mode: Option<GapModeChoice>,
    #[command(flatten)]
    integ: IntegArgs,
}

#[derive(Debug, Args)]
struct IntegArgs {
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    h_max: Option<f64>,
    #[arg(long)]
    max_steps: Option<u64>,
}

#[derive(Debug, Args)]
struct ScanArgs {
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Debug, Args)]
struct RefineArgs {
    #[arg(long)]
    tol_r: Option<f64>,
    #[arg(long)]
    tol_eta: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Consecutive returns inside the tube needed to confirm a root.
    #[arg(long)]
    shadow_periods: Option<usize>,
    #[arg(long)]
    tube_eps: Option<f64>,
}

fn set<T: Copy>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

impl SystemArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if self.a.is_some() {
            cfg.system.a = self.a;
        }
        set(&mut cfg.system.b, self.b);
        set(&mut cfg.system.c, self.c);
    }
}

impl IntegArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.integrate.rtol, self.rtol);
        set(&mut cfg.integrate.atol, self.atol);
        set(&mut cfg.integrate.h_max, self.h_max);
        set(&mut cfg.integrate.max_steps, self.max_steps);
    }
}

impl TrackingArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.system.b, self.b);
        set(&mut cfg.system.c, self.c);
        if let Some(kind) = self.shift_kind {
            cfg.shift.kind = match kind {
                ShiftKindArg::Tanh => ShiftKind::Tanh,
                ShiftKindArg::PiecewiseLinear => ShiftKind::PiecewiseLinear,
                ShiftKindArg::Constant => ShiftKind::Constant,
            };
        }
        set(&mut cfg.shift.lambda_minus, self.lambda_minus);
        set(&mut cfg.shift.lambda_plus, self.lambda_plus);
        set(&mut cfg.shift.delta, self.delta);
        set(&mut cfg.run.z_init, self.z_init);
        set(&mut cfg.run.t_start, self.t_start);
        set(&mut cfg.run.horizon, self.horizon);
        set(&mut cfg.gap_mode, self.gap_mode);
        self.integ.apply(cfg);
    }
}

impl ScanArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.rate.scan.r_min, self.r_min);
        set(&mut cfg.rate.scan.r_max, self.r_max);
        set(&mut cfg.rate.scan.samples, self.samples);
    }
}

impl RefineArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.refine.tol_r, self.tol_r);
        set(&mut cfg.refine.tol_eta, self.tol_eta);
        set(&mut cfg.refine.max_iter, self.max_iter);
        set(&mut cfg.confirm.shadow_periods, self.shadow_periods);
        set(&mut cfg.confirm.tube_eps, self.tube_eps);
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Command::Frozen { system, hopf, hopf_range } => {
            system.apply(&mut cfg);
            cfg.validate()?;
            commands::frozen(&cfg, hopf.then_some((hopf_range[0], hopf_range[1])))
        }
        Command::Upo { command: UpoCommand::Find { system, integ } } => {
            system.apply(&mut cfg);
            integ.apply(&mut cfg);
            cfg.validate()?;
            commands::upo_find(&cfg)
        }
        Command::Simulate { common, r, t_end, dt, out_dir } => {
            common.apply(&mut cfg);
            cfg.validate()?;
            let rate =
                r.or(cfg.rate.r).ok_or_else(|| CliError::Config("simulate needs a rate (--r or rate.r)".into()))?;
            commands::simulate(&cfg, &commands::SimulateOptions { rate, t_end, dt, out_dir })
        }
        Command::EtaScan { common, scan, out, meta } => {
            common.apply(&mut cfg);
            scan.apply(&mut cfg);
            cfg.validate()?;
            commands::eta_scan(&cfg, &commands::ScanOptions { out, meta })
        }
        Command::CriticalRates { common, scan, refine, out } => {
            common.apply(&mut cfg);
            scan.apply(&mut cfg);
            refine.apply(&mut cfg);
            cfg.validate()?;
            commands::critical_rates(&cfg, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.jobs {
        Some(0) => Err(CliError::Config("--jobs must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => Err(CliError::Config(format!("cannot start {n} workers: {e}"))),
        },
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ratetip: {e}");
            e.exit_code()
        }
    }
}
