//! Run configuration: a TOML file with `[chain]`, `[preparation]`, `[time]`,
//! `[quadrature]`, `[continuum]`, `[sweep]` and `[output]` tables, all
//! optional, plus command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use harmonic_chain::chain::epsilon_from_gamma;
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_MAX_SITES: usize = 5000;
pub const MIN_TOL: f64 = 1e-14;
pub const MAX_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Finite,
    Continuum,
    Steady,
    Sweep,
    Check,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Mode::Finite => "finite",
            Mode::Continuum => "continuum",
            Mode::Steady => "steady",
            Mode::Sweep => "sweep",
            Mode::Check => "check",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub sites: Option<usize>,
    pub epsilon: Option<f64>,
    pub gamma: Option<f64>,
    /// Bare on-site frequency.
    pub omega: Option<f64>,
    pub max_sites: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreparationSection {
    pub eta: Option<f64>,
    pub mu: Option<f64>,
    pub system_sites: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumSection {
    pub weak_coupling: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub eta_start: Option<f64>,
    pub eta_stop: Option<f64>,
    pub eta_points: Option<usize>,
    pub gammas: Option<Vec<f64>>,
    pub bisection_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// The file as written, before defaults and validation.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub mode: Option<Mode>,
    /// Reserved; nothing stochastic reads it except the `check` suites.
    pub seed: Option<u64>,
    #[serde(default)]
    pub chain: ChainSection,
    #[serde(default)]
    pub preparation: PreparationSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub continuum: ContinuumSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl TimeGrid {
    /// `steps + 1` equally spaced points including both ends.
    pub fn points(&self) -> Vec<f64> {
        let h = (self.stop - self.start) / self.steps as f64;
        (0..=self.steps)
            .map(|k| if k == self.steps { self.stop } else { self.start + k as f64 * h })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub etas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub bisection_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    pub epsilon: f64,
    pub omega: f64,
}

impl Coupling {
    pub fn gamma(&self) -> f64 {
        self.epsilon / (1.0 + 2.0 * self.epsilon)
    }

    pub fn big_omega(&self) -> f64 {
        self.omega * (1.0 + 2.0 * self.epsilon).sqrt()
    }
}

/// Validated settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub sites: Option<usize>,
    pub coupling: Coupling,
    pub eta: f64,
    pub mu: f64,
    pub system_sites: Vec<usize>,
    pub time: TimeGrid,
    pub quadrature_tol: f64,
    pub weak_coupling: bool,
    pub sweep: Option<SweepGrid>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    pub seed: u64,
}

fn bad(field: &str, reason: impl fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {reason}"))
}

fn finite(field: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad(field, format!("must be finite, got {x}")))
    }
}

impl RunConfig {
    pub fn resolve(raw: RawConfig, mode: Mode, flags: &Overrides) -> Result<Self, CliError> {
        if let Some(file_mode) = raw.mode {
            if file_mode != mode {
                return Err(bad("mode", format!("config says {file_mode} but the subcommand is {mode}")));
            }
        }

        let coupling = resolve_coupling(&raw.chain)?;
        let sites = raw.chain.sites;
        if sites == Some(0) {
            return Err(bad("chain.sites", "must be at least 1"));
        }
        let max_sites = raw.chain.max_sites.unwrap_or(DEFAULT_MAX_SITES);
        if mode == Mode::Finite {
            let n = sites.ok_or_else(|| bad("chain.sites", "required in finite mode"))?;
            if n > max_sites {
                return Err(bad("chain.sites", format!("{n} exceeds chain.max_sites = {max_sites}")));
            }
        }

        let eta = finite("preparation.eta", raw.preparation.eta.unwrap_or(1.0))?;
        let mu = finite("preparation.mu", raw.preparation.mu.unwrap_or(0.0))?;
        let system_sites = match raw.preparation.system_sites {
            Some(list) => list,
            None => match sites {
                Some(n) => vec![n.div_ceil(2)],
                None if matches!(mode, Mode::Continuum) => {
                    return Err(bad("preparation.system_sites", "required when chain.sites is not given"));
                }
                None => vec![1],
            },
        };
        if system_sites.is_empty() {
            return Err(bad("preparation.system_sites", "must name at least one site"));
        }
        if system_sites.contains(&0) || system_sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(bad("preparation.system_sites", "must be 1-based and strictly increasing"));
        }
        if let (Some(n), Some(&last)) = (sites, system_sites.last()) {
            if last > n {
                return Err(bad("preparation.system_sites", format!("site {last} outside a chain of {n}")));
            }
        }

        let time = TimeGrid {
            start: finite("time.start", raw.time.start.unwrap_or(0.0))?,
            stop: finite("time.stop", raw.time.stop.unwrap_or(10.0))?,
            steps: raw.time.steps.unwrap_or(10),
        };
        if time.steps < 1 {
            return Err(bad("time.steps", "must be at least 1"));
        }

        let quadrature_tol = flags
            .tol
            .or(raw.quadrature.tol)
            .unwrap_or(harmonic_chain::quadrature::DEFAULT_TOLERANCE);
        if !(MIN_TOL..=MAX_TOL).contains(&quadrature_tol) {
            return Err(bad(
                "quadrature.tol",
                format!("must lie in [{MIN_TOL:e}, {MAX_TOL:e}], got {quadrature_tol:e}"),
            ));
        }

        let sweep = if mode == Mode::Sweep {
            Some(resolve_sweep(&raw.sweep)?)
        } else {
            None
        };

        let threads = flags.threads;
        if threads == Some(0) {
            return Err(bad("--threads", "must be at least 1"));
        }

        Ok(Self {
            mode,
            sites,
            coupling,
            eta,
            mu,
            system_sites,
            time,
            quadrature_tol,
            weak_coupling: raw.continuum.weak_coupling.unwrap_or(true),
            sweep,
            output: flags.out.clone().or(raw.output.path),
            format: flags.format.or(raw.output.format).unwrap_or_default(),
            threads,
            seed: raw.seed.unwrap_or(0),
        })
    }
}

fn resolve_coupling(chain: &ChainSection) -> Result<Coupling, CliError> {
    let omega = finite("chain.omega", chain.omega.unwrap_or(1.0))?;
    if omega <= 0.0 {
        return Err(bad("chain.omega", "must be positive"));
    }
    let epsilon = match (chain.epsilon, chain.gamma) {
        (Some(_), Some(_)) => return Err(bad("chain.gamma", "give either chain.epsilon or chain.gamma, not both")),
        (Some(eps), None) => {
            if !(eps.is_finite() && eps >= 0.0) {
                return Err(bad("chain.epsilon", format!("must be finite and >= 0, got {eps}")));
            }
            eps
        }
        (None, Some(g)) => {
            if !(g.is_finite() && (0.0..0.5).contains(&g)) {
                return Err(bad("chain.gamma", format!("must lie in [0, 1/2), got {g}")));
            }
            epsilon_from_gamma(g)
        }
        (None, None) => 0.0,
    };
    Ok(Coupling { epsilon, omega })
}

fn resolve_sweep(sweep: &SweepSection) -> Result<SweepGrid, CliError> {
    let start = finite("sweep.eta_start", sweep.eta_start.unwrap_or(0.0))?;
    let stop = finite("sweep.eta_stop", sweep.eta_stop.unwrap_or(2.0))?;
    let points = sweep.eta_points.unwrap_or(21);
    if points == 0 {
        return Err(bad("sweep.eta_points", "empty grid"));
    }
    let etas = if points == 1 {
        vec![start]
    } else {
        let h = (stop - start) / (points - 1) as f64;
        (0..points)
            .map(|k| if k == points - 1 { stop } else { start + k as f64 * h })
            .collect()
    };
    let gammas = sweep.gammas.clone().unwrap_or_else(|| vec![0.01, 0.05, 0.1]);
    if gammas.is_empty() {
        return Err(bad("sweep.gammas", "empty grid"));
    }
    if let Some(g) = gammas.iter().find(|g| !(g.is_finite() && (0.0..0.5).contains(*g))) {
        return Err(bad("sweep.gammas", format!("each gamma must lie in [0, 1/2), got {g}")));
    }
    let bisection_tol = sweep.bisection_tol.unwrap_or(1e-6);
    if !(bisection_tol.is_finite() && bisection_tol > 0.0) {
        return Err(bad("sweep.bisection_tol", "must be positive"));
    }
    Ok(SweepGrid {
        etas,
        gammas,
        bisection_tol,
    })
}
