//! Run configuration: flat `key = value` files merged under command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use ssh2d::lattice::{magic_angle, GeometryConfig, HoppingSet};
use ssh2d::realspace::{Boundary, CouplingModel, DEFAULT_CUTOFF};
use ssh2d::ribbon::Orientation;

use crate::CliError;

/// Where a setting came from, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    File { path: String, line: usize },
    Flag(String),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::File { path, line } => write!(f, "{path}:{line}"),
            Origin::Flag(flag) => write!(f, "--{flag}"),
        }
    }
}

/// Raw settings keyed by their snake_case name.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, (String, Origin)>,
}

impl Settings {
    pub fn parse_file(text: &str, path: &str) -> Result<Self, CliError> {
        let mut settings = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = Origin::File {
                path: path.to_string(),
                line: i + 1,
            };
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!("{origin}: expected `key = value`, got `{line}`")));
            };
            let key = key.trim().replace('-', "_");
            if key.is_empty() {
                return Err(CliError::Config(format!("{origin}: empty key")));
            }
            if settings.values.contains_key(&key) {
                return Err(CliError::Config(format!("{origin}: duplicate key `{key}`")));
            }
            settings.values.insert(key, (value.trim().to_string(), origin));
        }
        Ok(settings)
    }

    pub fn read_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_file(&text, &path.display().to_string())
    }

    /// Sets a value from a flag, replacing any file value.
    pub fn set_flag(&mut self, key: &str, value: String) {
        let key = key.replace('-', "_");
        let origin = Origin::Flag(key.replace('_', "-"));
        self.values.insert(key, (value, origin));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|v| v.0.as_str())
    }
}

/// Consumes settings by key; whatever is left over is unknown.
struct Reader {
    values: BTreeMap<String, (String, Origin)>,
}

impl Reader {
    fn raw(&mut self, key: &str) -> Option<(String, Origin)> {
        self.values.remove(key)
    }

    fn parse<T>(&mut self, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some((value, origin)) => f(&value).map(Some).ok_or_else(|| {
                CliError::Config(format!("{origin}: `{key}` expects {what}, got `{value}`"))
            }),
        }
    }

    fn real(&mut self, key: &str, default: f64, range: (f64, f64)) -> Result<f64, CliError> {
        let origin = self.values.get(key).map(|v| v.1.clone());
        let v = self
            .parse(key, "a number", |s| s.parse::<f64>().ok().filter(|x| x.is_finite()))?
            .unwrap_or(default);
        check_range(key, v, range, origin)?;
        Ok(v)
    }

    fn opt_real(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        self.parse(key, "a number", |s| s.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    fn count(&mut self, key: &str, default: usize, min: usize) -> Result<usize, CliError> {
        let origin = self.values.get(key).map(|v| v.1.clone());
        let v = self.parse(key, "a whole number", |s| s.parse::<usize>().ok())?.unwrap_or(default);
        if v < min {
            let at = origin.map(|o| format!("{o}: ")).unwrap_or_default();
            return Err(CliError::Config(format!("{at}`{key}` must be at least {min}, got {v}")));
        }
        Ok(v)
    }

    fn flag(&mut self, key: &str) -> Result<bool, CliError> {
        Ok(self
            .parse(key, "true or false", |s| match s {
                "true" | "yes" | "1" => Some(true),
                "false" | "no" | "0" => Some(false),
                _ => None,
            })?
            .unwrap_or(false))
    }

    fn choice<T: Copy>(&mut self, key: &str, default: T, options: &[(&str, T)]) -> Result<T, CliError> {
        let names: Vec<&str> = options.iter().map(|o| o.0).collect();
        let what = format!("one of {}", names.join("|"));
        Ok(self
            .parse(key, &what, |s| options.iter().find(|o| o.0 == s).map(|o| o.1))?
            .unwrap_or(default))
    }

    fn finish(self) -> Result<(), CliError> {
        match self.values.into_iter().next() {
            None => Ok(()),
            Some((key, (_, origin))) => Err(CliError::Config(format!("{origin}: unknown key `{key}`"))),
        }
    }
}

fn check_range(key: &str, v: f64, (lo, hi): (f64, f64), origin: Option<Origin>) -> Result<(), CliError> {
    if v < lo || v > hi {
        let at = origin.map(|o| format!("{o}: ")).unwrap_or_default();
        return Err(CliError::Config(format!("{at}`{key}` = {v} outside [{lo}, {hi}]")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandsMode {
    Path,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Report {
    States,
    Summary,
}

/// Manual replacements for the geometry-derived hoppings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub jxp: Option<f64>,
    pub jx: Option<f64>,
    pub jyp: Option<f64>,
    pub jy: Option<f64>,
    pub j2x: Option<f64>,
    pub j2y: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, mut h: HoppingSet) -> HoppingSet {
        let slots = [
            (&mut h.jxp, self.jxp),
            (&mut h.jx, self.jx),
            (&mut h.jyp, self.jyp),
            (&mut h.jy, self.jy),
            (&mut h.j2x, self.j2x),
            (&mut h.j2y, self.j2y),
        ];
        for (slot, value) in slots {
            if let Some(v) = value {
                *slot = v;
            }
        }
        h
    }

    pub fn touches_inter(&self) -> bool {
        self.jxp.is_some() || self.jx.is_some() || self.jyp.is_some() || self.jy.is_some()
    }

    pub fn is_empty(&self) -> bool {
        *self == Overrides::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandOptions {
    Bands { mode: BandsMode, per_segment: usize, grid: usize },
    Symm { per_segment: usize },
    Zak { lines: usize, steps: usize },
    Dirac { seed_grid: usize, radius: f64, samples: usize },
    Nodal { grid: usize, tol: f64 },
    Curvature { grid: usize },
    Finite {
        cells_x: usize,
        cells_y: usize,
        boundary: Boundary,
        coupling: CouplingModel,
        report: Report,
    },
    Ribbon { orientation: Orientation, width: usize, k_samples: usize },
    PhaseDiagram { resolution: usize, beta_min: f64, beta_max: f64, gap_tol: f64, grid: usize },
}

impl CommandOptions {
    pub fn name(&self) -> &'static str {
        match self {
            CommandOptions::Bands { .. } => "bands",
            CommandOptions::Symm { .. } => "symm",
            CommandOptions::Zak { .. } => "zak",
            CommandOptions::Dirac { .. } => "dirac",
            CommandOptions::Nodal { .. } => "nodal",
            CommandOptions::Curvature { .. } => "curvature",
            CommandOptions::Finite { .. } => "finite",
            CommandOptions::Ribbon { .. } => "ribbon",
            CommandOptions::PhaseDiagram { .. } => "phase-diagram",
        }
    }
}

/// Everything a run depends on. Serialized verbatim into JSON metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub options: CommandOptions,
    pub beta_x: f64,
    pub beta_y: f64,
    pub theta_m: f64,
    pub overrides: Overrides,
    pub scale_mhz: Option<f64>,
    pub format: Format,
    pub output: Option<String>,
    pub plot: bool,
}

impl RunConfig {
    pub fn geometry(&self) -> GeometryConfig {
        GeometryConfig::new(self.beta_x, self.beta_y, self.theta_m)
    }

    pub fn from_settings(command: &str, settings: Settings) -> Result<Self, CliError> {
        let mut r = Reader {
            values: settings.values,
        };
        let beta_x = r.real("beta_x", 0.5, (0.0, 1.0))?;
        let beta_y = r.real("beta_y", 0.5, (0.0, 1.0))?;
        let theta_m = r.real("theta_m", magic_angle(), (0.0, std::f64::consts::FRAC_PI_2))?;
        let mut overrides = Overrides::default();
        if command != "phase-diagram" {
            overrides = Overrides {
                jxp: r.opt_real("override_jxp")?,
                jx: r.opt_real("override_jx")?,
                jyp: r.opt_real("override_jyp")?,
                jy: r.opt_real("override_jy")?,
                j2x: r.opt_real("override_j2x")?,
                j2y: r.opt_real("override_j2y")?,
            };
        }
        let scale_mhz = r.opt_real("scale_mhz")?;
        if let Some(s) = scale_mhz {
            if s <= 0.0 {
                return Err(CliError::Config(format!("`scale_mhz` must be positive, got {s}")));
            }
        }
        let format = r.choice("format", Format::Csv, &[("csv", Format::Csv), ("json", Format::Json)])?;
        let output = r.raw("output").map(|v| v.0);
        let plot = r.flag("plot")?;

        let options = match command {
            "bands" => CommandOptions::Bands {
                mode: r.choice("mode", BandsMode::Path, &[("path", BandsMode::Path), ("grid", BandsMode::Grid)])?,
                per_segment: r.count("per_segment", 100, 1)?,
                grid: r.count("grid", 101, 2)?,
            },
            "symm" => CommandOptions::Symm {
                per_segment: r.count("per_segment", 50, 1)?,
            },
            "zak" => CommandOptions::Zak {
                lines: r.count("lines", 201, 1)?,
                steps: r.count("steps", 401, 64)?,
            },
            "dirac" => CommandOptions::Dirac {
                seed_grid: r.count("seed_grid", 301, 16)?,
                radius: r.real("radius", 0.1, (1e-6, std::f64::consts::PI))?,
                samples: r.count("samples", 256, 64)?,
            },
            "nodal" => CommandOptions::Nodal {
                grid: r.count("grid", 301, 3)?,
                tol: r.real("tol", 1e-6, (0.0, f64::MAX))?,
            },
            "curvature" => CommandOptions::Curvature {
                grid: r.count("grid", 101, 2)?,
            },
            "finite" => {
                let (cells_x, cells_y) = match r.raw("cells") {
                    None => (6, 6),
                    Some((value, origin)) => parse_cells(&value)
                        .ok_or_else(|| CliError::Config(format!("{origin}: `cells` expects two whole numbers >= 2, got `{value}`")))?,
                };
                let coupling = match r.raw("coupling") {
                    None => CouplingModel::Nearest,
                    Some((value, origin)) => parse_coupling(&value).ok_or_else(|| {
                        CliError::Config(format!("{origin}: `coupling` expects nearest or longrange[:Rc] with Rc >= 1, got `{value}`"))
                    })?,
                };
                if matches!(coupling, CouplingModel::LongRange { .. }) && overrides.touches_inter() {
                    return Err(CliError::Config(
                        "inter-sublattice overrides need the nearest coupling model".into(),
                    ));
                }
                CommandOptions::Finite {
                    cells_x,
                    cells_y,
                    boundary: r.choice("boundary", Boundary::Open, &[("open", Boundary::Open), ("periodic", Boundary::Periodic)])?,
                    coupling,
                    report: r.choice("report", Report::States, &[("states", Report::States), ("summary", Report::Summary)])?,
                }
            }
            "ribbon" => CommandOptions::Ribbon {
                orientation: r.choice("orientation", Orientation::XInfinite, &[("x", Orientation::XInfinite), ("y", Orientation::YInfinite)])?,
                width: r.count("width", 8, 2)?,
                k_samples: r.count("k_samples", 256, 16)?,
            },
            "phase-diagram" => {
                let beta_min = r.real("beta_min", 0.0, (0.0, 1.0))?;
                let beta_max = r.real("beta_max", 1.0, (0.0, 1.0))?;
                if beta_min >= beta_max {
                    return Err(CliError::Config(format!("`beta_min` ({beta_min}) must be below `beta_max` ({beta_max})")));
                }
                CommandOptions::PhaseDiagram {
                    resolution: r.count("resolution", 61, 11)?,
                    beta_min,
                    beta_max,
                    gap_tol: r.real("gap_tol", 1e-6, (0.0, f64::MAX))?,
                    grid: r.count("grid", 301, 16)?,
                }
            }
            other => return Err(CliError::Config(format!("unknown command `{other}`"))),
        };
        r.finish()?;
        let config = RunConfig {
            options,
            beta_x,
            beta_y,
            theta_m,
            overrides,
            scale_mhz,
            format,
            output,
            plot,
        };
        if config.plot && (config.output.is_none() || config.format != Format::Csv) {
            return Err(CliError::Config("`plot` needs `output` and csv format".into()));
        }
        Ok(config)
    }
}

fn parse_cells(value: &str) -> Option<(usize, usize)> {
    let parts: Vec<usize> = value
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().ok())
        .collect::<Option<_>>()?;
    match parts[..] {
        [n, m] if n >= 2 && m >= 2 => Some((n, m)),
        _ => None,
    }
}

fn parse_coupling(value: &str) -> Option<CouplingModel> {
    match value.split_once(':') {
        None if value == "nearest" => Some(CouplingModel::Nearest),
        None if value == "longrange" => Some(CouplingModel::LongRange { cutoff: DEFAULT_CUTOFF }),
        Some(("longrange", rc)) => {
            let cutoff: f64 = rc.parse().ok()?;
            (cutoff >= 1.0 && cutoff.is_finite()).then_some(CouplingModel::LongRange { cutoff })
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_syntax() {
        let s = Settings::parse_file("# header\nbeta_x = 0.8  # trailing\n\nbeta-y=0.2\n", "f").unwrap();
        assert_eq!(s.get("beta_x"), Some("0.8"));
        assert_eq!(s.get("beta_y"), Some("0.2"));
        assert!(Settings::parse_file("beta_x 0.8", "f").is_err());
        assert!(Settings::parse_file("a=1\na=2", "f").is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut s = Settings::parse_file("beta_x = 0.8", "f").unwrap();
        s.set_flag("beta_x", "0.2".into());
        let c = RunConfig::from_settings("bands", s).unwrap();
        assert_eq!(c.beta_x, 0.2);
        assert_eq!(c.theta_m, magic_angle());
    }

    #[test]
    fn diagnostics_name_the_line() {
        let s = Settings::parse_file("\nbeta_x = 1.5", "cfg.txt").unwrap();
        let err = RunConfig::from_settings("zak", s).unwrap_err().to_string();
        assert!(err.contains("cfg.txt:2"), "{err}");
        let s = Settings::parse_file("colour = red", "cfg.txt").unwrap();
        assert!(RunConfig::from_settings("zak", s).unwrap_err().to_string().contains("unknown key"));
    }

    #[test]
    fn command_specific_keys() {
        let s = Settings::parse_file("lines = 11", "f").unwrap();
        assert!(RunConfig::from_settings("bands", s.clone()).is_err());
        assert!(RunConfig::from_settings("zak", s).is_ok());
    }

    #[test]
    fn finite_parsing() {
        let s = Settings::parse_file("cells = 4 5\ncoupling = longrange:2.5\nboundary = periodic", "f").unwrap();
        let c = RunConfig::from_settings("finite", s).unwrap();
        match c.options {
            CommandOptions::Finite { cells_x, cells_y, coupling, boundary, .. } => {
                assert_eq!((cells_x, cells_y), (4, 5));
                assert_eq!(coupling, CouplingModel::LongRange { cutoff: 2.5 });
                assert_eq!(boundary, Boundary::Periodic);
            }
            _ => unreachable!(),
        }
        let s = Settings::parse_file("coupling = longrange:0.5", "f").unwrap();
        assert!(RunConfig::from_settings("finite", s).is_err());
    }

    #[test]
    fn overrides_apply() {
        let o = Overrides {
            j2x: Some(0.0),
            jy: Some(-1.0),
            ..Overrides::default()
        };
        let h = o.apply(HoppingSet::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0));
        assert_eq!(h, HoppingSet::new(1.0, 2.0, 3.0, -1.0, 0.0, 6.0));
    }
}
