//! Command-line front end for `ssh2d`.
//!
//! Every flag maps onto a config-file key of the same name with dashes
//! replaced by underscores, so `--beta-x 0.8` and `beta_x = 0.8` are
//! interchangeable; flags win.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, CommandFactory, Parser, Subcommand};

pub use config::{RunConfig, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<ssh2d::error::Error> for CliError {
    fn from(e: ssh2d::error::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(name = "ssh2d", version, about = "Band structure, topology and finite-lattice spectra of the dipolar 2D SSH model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args)]
pub struct Common {
    /// Flat `key = value` file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sublattice offset along x, in lattice constants [default: 0.5]
    #[arg(long)]
    beta_x: Option<String>,
    /// Sublattice offset along y, in lattice constants [default: 0.5]
    #[arg(long)]
    beta_y: Option<String>,
    /// Dipole angle in radians [default: arccos(1/sqrt 3)]
    #[arg(long)]
    theta_m: Option<String>,
    /// Energy scale J in MHz; adds `_mhz` columns next to every energy
    #[arg(long)]
    scale_mhz: Option<String>,
    /// csv or json [default: csv]
    #[arg(long)]
    format: Option<String>,
    /// Output file [default: stdout]
    #[arg(long)]
    output: Option<String>,
    /// Also write a gnuplot script next to the output file
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
pub struct Overrides {
    #[arg(long)]
    override_jxp: Option<String>,
    #[arg(long)]
    override_jx: Option<String>,
    #[arg(long)]
    override_jyp: Option<String>,
    #[arg(long)]
    override_jy: Option<String>,
    #[arg(long)]
    override_j2x: Option<String>,
    #[arg(long)]
    override_j2y: Option<String>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Bloch bands along G-X-M-G-Y or on a k-grid
    Bands {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
        /// path or grid [default: path]
        #[arg(long)]
        mode: Option<String>,
        /// Samples per path segment [default: 100]
        #[arg(long)]
        per_segment: Option<String>,
        /// Points per axis in grid mode [default: 101]
        #[arg(long)]
        grid: Option<String>,
    },
    /// Symmetry residuals and the gap at the high-symmetry points
    Symm {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
        /// Samples per path segment [default: 50]
        #[arg(long)]
        per_segment: Option<String>,
    },
    /// Zak phase vector from averaged Wilson loops
    Zak {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
        /// Wilson lines per direction [default: 201]
        #[arg(long)]
        lines: Option<String>,
        /// k-steps per line [default: 401]
        #[arg(long)]
        steps: Option<String>,
    },
    /// Dirac points with charges, tilt and velocities
    Dirac {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
        /// Seed grid per axis [default: 301]
        #[arg(long)]
        seed_grid: Option<String>,
        /// Winding loop radius [default: 0.1]
        #[arg(long)]
        radius: Option<String>,
        /// Winding loop samples [default: 256]
        #[arg(long)]
        samples: Option<String>,
    },
    /// Nodal lines traced as polylines
    Nodal {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
        /// Grid per axis [default: 301]
        #[arg(long)]
        grid: Option<String>,
        /// Gap tolerance [default: 1e-6]
        #[arg(long)]
        tol: Option<String>,
    },
    /// Plaquette Berry curvature and Chern number
    Curvature {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
        /// Grid per axis [default: 101]
        #[arg(long)]
        grid: Option<String>,
    },
    /// Finite-lattice spectrum with edge and corner classification
    Finite {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
        /// Cells as "N M" [default: 6 6]
        #[arg(long)]
        cells: Option<String>,
        /// open or periodic [default: open]
        #[arg(long)]
        boundary: Option<String>,
        /// nearest, longrange or longrange:Rc [default: nearest]
        #[arg(long)]
        coupling: Option<String>,
        /// states (all) or summary (mid-gap only) [default: states]
        #[arg(long)]
        report: Option<String>,
    },
    /// Ribbon band structure with edge-state flags
    Ribbon {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
        /// x (infinite along x) or y [default: x]
        #[arg(long)]
        orientation: Option<String>,
        /// Width in unit cells [default: 8]
        #[arg(long)]
        width: Option<String>,
        /// Momentum samples [default: 256]
        #[arg(long)]
        k_samples: Option<String>,
    },
    /// Phase labels over a (beta_x, beta_y) grid
    PhaseDiagram {
        #[command(flatten)]
        common: Common,
        /// Points per axis [default: 61]
        #[arg(long)]
        resolution: Option<String>,
        #[arg(long)]
        beta_min: Option<String>,
        #[arg(long)]
        beta_max: Option<String>,
        /// Gap below which a point is gapless [default: 1e-6]
        #[arg(long)]
        gap_tol: Option<String>,
        /// Gap-scan grid per axis [default: 301]
        #[arg(long)]
        grid: Option<String>,
    },
}

/// Merges the optional config file with flags given on the command line.
pub fn settings_from_matches(name: &str, sub: &ArgMatches) -> Result<Settings, CliError> {
    let mut settings = match sub.get_one::<PathBuf>("config") {
        Some(path) => Settings::read_file(path)?,
        None => Settings::default(),
    };
    let cli = Cli::command();
    let args = cli
        .find_subcommand(name)
        .ok_or_else(|| CliError::Config(format!("unknown command `{name}`")))?
        .get_arguments();
    for arg in args {
        let id = arg.get_id().as_str();
        if id == "config" || sub.value_source(id) != Some(ValueSource::CommandLine) {
            continue;
        }
        let value = if id == "plot" {
            "true".to_string()
        } else {
            let Ok(Some(mut raw)) = sub.try_get_raw(id) else { continue };
            raw.next().map(|v| v.to_string_lossy().into_owned()).unwrap_or_default()
        };
        settings.set_flag(id, value);
    }
    Ok(settings)
}

pub fn parse<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = Cli::command()
        .try_get_matches_from(args)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let (name, sub) = matches
        .subcommand()
        .ok_or_else(|| CliError::Config("no subcommand given".into()))?;
    RunConfig::from_settings(name, settings_from_matches(name, sub)?)
}

/// Parses, runs and emits; returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 2;
            }
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    let result = (|| {
        let (name, sub) = matches
            .subcommand()
            .ok_or_else(|| CliError::Config("no subcommand given".into()))?;
        let config = RunConfig::from_settings(name, settings_from_matches(name, sub)?)?;
        let results = commands::run(&config)?;
        output::emit(&config, &results, stdout)?;
        Ok::<_, CliError>(results.summary)
    })();
    match result {
        Ok(summary) => {
            let _ = writeln!(stderr, "{summary}");
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "ssh2d: {e}");
            e.exit_code()
        }
    }
}
