//! `lrchain`: command-line front end. Every subcommand writes a CSV (or JSON)
//! table plus a JSON sidecar echoing the effective configuration.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid arguments or input,
//! 3 numerical failure, 4 resource budget exceeded.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lrchain::meanfield::ConfigMode;
use lrchain::spinwaves::StationaryKind;
use lrchain::{Alpha, Boundary, ErrorClass, Sites};

use config::{Format, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(lrchain::Error),
    Io(std::io::Error),
}

impl From<lrchain::Error> for CliError {
    fn from(e: lrchain::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
            CliError::Lib(e) => match e.class() {
                ErrorClass::Input => 2,
                ErrorClass::Numerical => 3,
                ErrorClass::Resource => 4,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "lrchain", version, about = "Spectra of transverse-field spin chains with J0/|i-j|^alpha couplings")]
struct Cli {
    #[command(flatten)]
    common: Common,

    /// Report how runs are seeded and exit.
    #[arg(long, global = true)]
    seed_info: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Number of sites, or `inf` for the thermodynamic limit.
    #[arg(long = "n", global = true, value_name = "N|inf")]
    n_sites: Option<Sites>,
    /// Twice the spin length.
    #[arg(long, global = true)]
    spin2: Option<u32>,
    /// Decay exponent, or `inf` for nearest-neighbour coupling.
    #[arg(long, global = true, value_name = "ALPHA|inf")]
    alpha: Option<Alpha>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    j0: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    b: Option<f64>,
    /// `open` or `periodic`.
    #[arg(long, global = true)]
    boundary: Option<Boundary>,
    /// Divide couplings by N.
    #[arg(long, global = true, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    kac: Option<bool>,
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Report energies in input units instead of |J0|.
    #[arg(long, global = true, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    raw_units: Option<bool>,
}

#[derive(Args, Debug, Default)]
struct Grid {
    #[arg(long, allow_hyphen_values = true)]
    b_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b_max: Option<f64>,
    #[arg(long)]
    b_steps: Option<usize>,
    /// Logarithmic spacing.
    #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
    b_log: Option<bool>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact spectrum at one field.
    Spectrum,
    /// Exact spectra along a field grid.
    Sweep {
        #[command(flatten)]
        grid: Grid,
        /// Keep only the lowest levels.
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Semiclassical levels of all configurations.
    Semiclassical {
        /// eps, eps-xi or full.
        #[arg(long)]
        mode: Option<ConfigMode>,
    },
    /// Spin-wave dispersion on a ring.
    Dispersion {
        /// uniform or alternating.
        #[arg(long)]
        kind: Option<StationaryKind>,
    },
    /// Spin-wave gap along a field grid.
    Gap {
        #[arg(long)]
        kind: Option<StationaryKind>,
        #[command(flatten)]
        grid: Grid,
    },
    /// Log-binned histogram of bifurcation fields.
    Bifurcations {
        #[arg(long)]
        bins_per_decade: Option<u32>,
        #[arg(long, num_args = 0..=1, require_equals = true, default_missing_value = "true")]
        stable_only: Option<bool>,
    },
    /// Relative deviation of the semiclassical ground energy.
    Deviation {
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        mode: Option<ConfigMode>,
    },
    /// Two-sublattice Bogoliubov-de Gennes bands.
    Sublattice {
        /// Newton start for the B angle.
        #[arg(long, allow_hyphen_values = true)]
        phi_b: Option<f64>,
        /// Newton start for the C angle.
        #[arg(long, allow_hyphen_values = true)]
        phi_c: Option<f64>,
    },
    /// Zeta, eta and Clausen-type sums.
    Special {
        #[arg(long, allow_hyphen_values = true)]
        zeta: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        eta: Option<f64>,
        /// Evaluate sum_r cos(k r)/|r|^alpha / 2 at this k (uses --alpha, --n).
        #[arg(long, allow_hyphen_values = true)]
        clausen_k: Option<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Sweep { .. } => "sweep",
            Command::Semiclassical { .. } => "semiclassical",
            Command::Dispersion { .. } => "dispersion",
            Command::Gap { .. } => "gap",
            Command::Bifurcations { .. } => "bifurcations",
            Command::Deviation { .. } => "deviation",
            Command::Sublattice { .. } => "sublattice",
            Command::Special { .. } => "special",
        }
    }

    fn apply(&self, c: &mut RunConfig) {
        let grid = |c: &mut RunConfig, g: &Grid| {
            c.b_min = g.b_min.or(c.b_min);
            c.b_max = g.b_max.or(c.b_max);
            c.b_steps = g.b_steps.or(c.b_steps);
            c.b_log = g.b_log.or(c.b_log);
        };
        match self {
            Command::Spectrum => {}
            Command::Sweep { grid: g, levels } => {
                grid(c, g);
                c.levels = levels.or(c.levels);
            }
            Command::Semiclassical { mode } => c.mode = mode.or(c.mode),
            Command::Dispersion { kind } => c.kind = kind.or(c.kind),
            Command::Gap { kind, grid: g } => {
                c.kind = kind.or(c.kind);
                grid(c, g);
            }
            Command::Bifurcations {
                bins_per_decade,
                stable_only,
            } => {
                c.bins_per_decade = bins_per_decade.or(c.bins_per_decade);
                c.stable_only = stable_only.or(c.stable_only);
            }
            Command::Deviation { grid: g, mode } => {
                grid(c, g);
                c.mode = mode.or(c.mode);
            }
            Command::Sublattice { phi_b, phi_c } => {
                c.phi_b = phi_b.or(c.phi_b);
                c.phi_c = phi_c.or(c.phi_c);
            }
            Command::Special {
                zeta,
                eta,
                clausen_k,
            } => {
                c.zeta = zeta.or(c.zeta);
                c.eta = eta.or(c.eta);
                c.clausen_k = clausen_k.or(c.clausen_k);
            }
        }
    }
}

fn effective_config(cli: &Cli, command: &Command) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let c = &cli.common;
    cfg.overlay(&RunConfig {
        n_sites: c.n_sites,
        spin2: c.spin2,
        alpha: c.alpha,
        j0: c.j0,
        b: c.b,
        boundary: c.boundary,
        kac_rescale: c.kac,
        output_dir: c.out_dir.clone(),
        format: c.format,
        threads: c.threads,
        raw_units: c.raw_units,
        ..Default::default()
    });
    command.apply(&mut cfg);
    cfg.resolve(command.name());
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.seed_info {
        println!("lrchain {}: no random numbers are drawn; outputs depend only on the configuration", env!("CARGO_PKG_VERSION"));
        return Ok(());
    }
    let Some(command) = &cli.command else {
        return Err(CliError::Usage("no subcommand given (see --help)".into()));
    };
    let cfg = effective_config(&cli, command)?;
    if let Some(t) = cfg.threads.filter(|&t| t > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))?;
    }
    let report = commands::run(&cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let path = output::write(&cfg, &report.table, report.summary)?;
    println!("{}: {} -> {}", command.name(), report.line, path.display());
    Ok(())
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
