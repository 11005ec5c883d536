//! TOML experiment files and their resolution into a runnable experiment.

use std::path::PathBuf;

use qle_core::generator::{CouplingRange, DriveSpec, MediumSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Incident intensity used when the `[drive]` table is omitted.
pub const DEFAULT_INTENSITY: f64 = 1.6e-5;

/// Raw contents of a config file. Every table is optional except `[medium]`;
/// the subcommand decides which experiment table is read.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub medium: Option<MediumConfig>,
    pub drive: Option<DriveConfig>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub transient: Option<TransientConfig>,
    pub sweep_freq: Option<SweepConfig>,
    pub sweep_power: Option<SweepConfig>,
    pub scaling: Option<ScalingConfig>,
    pub scatter: Option<ScatterConfig>,
    pub fit_longrange: Option<FitConfig>,
    pub validate: Option<ValidateConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Frequencies {
    Uniform(f64),
    PerSite(Vec<f64>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub n: i64,
    #[serde(default = "one")]
    pub omega: Frequencies,
    #[serde(default = "default_coupling")]
    pub jx: f64,
    #[serde(default = "default_coupling")]
    pub jz: f64,
    #[serde(default = "default_bath")]
    pub gamma_l: f64,
    #[serde(default = "default_bath")]
    pub gamma_r: f64,
    #[serde(default)]
    pub gamma_lambda: f64,
    #[serde(default)]
    pub gamma_gamma: f64,
    pub long_range: Option<LongRangeConfig>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LongRangeConfig {
    pub alpha: f64,
    pub beta: f64,
    pub terms: usize,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    #[serde(default = "default_omega_p")]
    pub omega_p: f64,
    /// Incident intensity `I_in`.
    pub intensity: Option<f64>,
    /// Field amplitude `E_p`; `I_in = E_p² / 2π`.
    pub amplitude: Option<f64>,
}

/// Either an explicit list or `points` samples between `start` and `stop`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    #[serde(default)]
    pub log: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    #[default]
    Ground,
    Excited,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransientConfig {
    pub t_end: Option<f64>,
    pub dt_out: Option<f64>,
    #[serde(default)]
    pub initial: InitialState,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub grid: Option<GridConfig>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub ns: Option<Vec<usize>>,
    /// Ratios `Jz/Jx`; the medium's own `jz` is used when absent.
    pub jz_over_jx: Option<Vec<f64>>,
    pub fit_window: Option<[usize; 2]>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterConfig {
    pub ns: Option<Vec<usize>>,
    pub grid: Option<GridConfig>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub u: Option<Vec<f64>>,
    pub terms: Option<Vec<usize>>,
    pub rmax: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub draws: Option<usize>,
    pub max_n: Option<usize>,
}

fn one() -> Frequencies {
    Frequencies::Uniform(1.0)
}

fn default_coupling() -> f64 {
    0.05
}

fn default_bath() -> f64 {
    0.1
}

fn default_omega_p() -> f64 {
    1.0
}

/// Parses a TOML experiment file. Syntax errors and unknown keys carry the
/// line and column of the offending text.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = match e.span() {
            Some(span) => line_column(text, span.start),
            None => (0, 0),
        };
        CliError::Parse { line, column, message: e.message().trim().to_string() }
    })
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Subcommand being resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Steady,
    Transient,
    SweepFreq,
    SweepPower,
    Scaling,
    Scatter,
    FitLongrange,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Steady => "steady",
            Command::Transient => "transient",
            Command::SweepFreq => "sweep-freq",
            Command::SweepPower => "sweep-power",
            Command::Scaling => "scaling",
            Command::Scatter => "scatter",
            Command::FitLongrange => "fit-longrange",
            Command::Validate => "validate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Steady,
    Transient { t_end: f64, dt_out: f64, initial: InitialState },
    FrequencySweep { omega_p: Vec<f64> },
    PowerSweep { intensity: Vec<f64> },
    LengthScaling { ns: Vec<usize>, jz: Vec<f64>, fit_window: [usize; 2] },
    SinglePhoton { ns: Vec<usize>, omega_p: Vec<f64> },
    LongRangeFit { u: Vec<f64>, terms: Vec<usize>, rmax: usize },
    Validate { draws: usize, max_n: usize },
}

/// Fully resolved run description, echoed into the metadata sidecar.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub medium: MediumSpec,
    pub drive: DriveSpec,
    pub experiment: Experiment,
    pub output: PathBuf,
    pub seed: u64,
}

/// Overrides taken from the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub fit_window: Option<[usize; 2]>,
}

impl ExperimentConfig {
    pub fn resolve(file: &ConfigFile, command: Command, overrides: &Overrides) -> Result<Self> {
        let medium = match &file.medium {
            Some(m) => resolve_medium(m)?,
            None => return Err(CliError::field("medium", "missing [medium] table (at least `n`)")),
        };
        let drive = resolve_drive(file.drive.as_ref())?;
        let experiment = resolve_experiment(file, command, &medium, overrides)?;
        let output = overrides
            .output
            .clone()
            .or_else(|| file.output.clone())
            .unwrap_or_else(|| PathBuf::from(format!("{}.csv", command.name())));
        Ok(Self { medium, drive, experiment, output, seed: file.seed.unwrap_or(0) })
    }
}

fn resolve_medium(m: &MediumConfig) -> Result<MediumSpec> {
    if m.n < 1 {
        return Err(CliError::field("medium.n", format!("chain length must be at least 1, got {}", m.n)));
    }
    let n = m.n as usize;
    let omega = match &m.omega {
        Frequencies::Uniform(w) => vec![*w; n],
        Frequencies::PerSite(ws) if ws.len() == n => ws.clone(),
        Frequencies::PerSite(ws) => {
            return Err(CliError::field("medium.omega", format!("{} frequencies for {n} sites", ws.len())))
        }
    };
    for (name, v) in [
        ("medium.gamma_l", m.gamma_l),
        ("medium.gamma_r", m.gamma_r),
        ("medium.gamma_lambda", m.gamma_lambda),
        ("medium.gamma_gamma", m.gamma_gamma),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(CliError::field(name, format!("rates must be finite and non-negative, got {v}")));
        }
    }
    let mut spec = MediumSpec::uniform(n, 1.0)
        .with_couplings(m.jx, m.jz)
        .with_baths(m.gamma_l, m.gamma_r)
        .with_losses(m.gamma_lambda, m.gamma_gamma);
    spec.omega = omega;
    if let Some(lr) = m.long_range {
        spec = spec.with_range(CouplingRange::LongRange { alpha: lr.alpha, beta: lr.beta, terms: lr.terms });
    }
    spec.validate().map_err(|e| CliError::field("medium", e.to_string()))?;
    Ok(spec)
}

fn resolve_drive(d: Option<&DriveConfig>) -> Result<DriveSpec> {
    let drive = match d {
        None => DriveSpec::from_intensity(1.0, DEFAULT_INTENSITY),
        Some(d) => match (d.intensity, d.amplitude) {
            (Some(i), None) => DriveSpec::from_intensity(d.omega_p, i),
            (None, Some(e)) => DriveSpec::from_amplitude(d.omega_p, e),
            (Some(_), Some(_)) => {
                return Err(CliError::field("drive", "give either `intensity` or `amplitude`, not both"))
            }
            (None, None) => return Err(CliError::field("drive", "one of `intensity` or `amplitude` is required")),
        },
    };
    drive.map_err(|e| CliError::field("drive", e.to_string()))
}

fn resolve_experiment(
    file: &ConfigFile,
    command: Command,
    medium: &MediumSpec,
    overrides: &Overrides,
) -> Result<Experiment> {
    Ok(match command {
        Command::Steady => Experiment::Steady,
        Command::Transient => {
            let t = file.transient.clone().unwrap_or_default();
            let t_end = t.t_end.unwrap_or(300.0);
            let dt_out = t.dt_out.unwrap_or(0.5);
            if !(t_end.is_finite() && t_end >= 0.0) {
                return Err(CliError::field("transient.t_end", "must be finite and non-negative"));
            }
            if !(dt_out.is_finite() && dt_out > 0.0) {
                return Err(CliError::field("transient.dt_out", "must be positive"));
            }
            Experiment::Transient { t_end, dt_out, initial: t.initial }
        }
        Command::SweepFreq => {
            let grid = file.sweep_freq.as_ref().and_then(|s| s.grid.as_ref());
            Experiment::FrequencySweep { omega_p: resolve_grid("sweep_freq.grid", grid, (0.6, 1.4, 201, false))? }
        }
        Command::SweepPower => {
            let grid = file.sweep_power.as_ref().and_then(|s| s.grid.as_ref());
            let intensity = resolve_grid("sweep_power.grid", grid, (1e-5, 1.0, 26, true))?;
            if intensity.iter().any(|&i| i <= 0.0) {
                return Err(CliError::field("sweep_power.grid", "intensities must be positive"));
            }
            Experiment::PowerSweep { intensity }
        }
        Command::Scaling => {
            let s = file.scaling.clone().unwrap_or_default();
            let ns = s.ns.unwrap_or_else(|| (2..=8).collect());
            check_lengths("scaling.ns", &ns)?;
            let jz = match s.jz_over_jx {
                Some(r) if r.is_empty() => return Err(CliError::field("scaling.jz_over_jx", "empty list")),
                Some(r) => r.iter().map(|x| x * medium.jx).collect(),
                None => vec![medium.jz],
            };
            let fit_window = overrides.fit_window.or(s.fit_window).unwrap_or([4, 8]);
            let inside = ns.iter().filter(|&&n| n >= fit_window[0] && n <= fit_window[1]).count();
            if inside < 3 {
                return Err(CliError::field(
                    "scaling.fit_window",
                    format!("{fit_window:?} contains {inside} of the lengths; the fit needs at least 3"),
                ));
            }
            Experiment::LengthScaling { ns, jz, fit_window }
        }
        Command::Scatter => {
            let s = file.scatter.clone().unwrap_or_default();
            let ns = s.ns.unwrap_or_else(|| vec![medium.n()]);
            check_lengths("scatter.ns", &ns)?;
            Experiment::SinglePhoton {
                ns,
                omega_p: resolve_grid("scatter.grid", s.grid.as_ref(), (0.6, 1.4, 401, false))?,
            }
        }
        Command::FitLongrange => {
            let f = file.fit_longrange.clone().unwrap_or_default();
            let u = f.u.unwrap_or_else(|| vec![1.0, 2.0, 3.0]);
            let terms = f.terms.unwrap_or_else(|| vec![1, 2, 3, 4]);
            let rmax = f.rmax.unwrap_or(20);
            if u.is_empty() || u.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(CliError::field("fit_longrange.u", "need non-negative exponents"));
            }
            if terms.is_empty() || terms.contains(&0) {
                return Err(CliError::field("fit_longrange.terms", "need positive term counts"));
            }
            if rmax == 0 {
                return Err(CliError::field("fit_longrange.rmax", "must be positive"));
            }
            Experiment::LongRangeFit { u, terms, rmax }
        }
        Command::Validate => {
            let v = file.validate.clone().unwrap_or_default();
            let max_n = v.max_n.unwrap_or(4);
            if !(2..=qle_core::spin_ops::BRUTE_FORCE_MAX_SITES).contains(&max_n) {
                return Err(CliError::field(
                    "validate.max_n",
                    format!("must lie in 2..={}", qle_core::spin_ops::BRUTE_FORCE_MAX_SITES),
                ));
            }
            Experiment::Validate { draws: v.draws.unwrap_or(20).max(1), max_n }
        }
    })
}

fn check_lengths(field: &str, ns: &[usize]) -> Result<()> {
    if ns.is_empty() || ns.contains(&0) {
        return Err(CliError::field(field, "need a nonempty list of positive lengths"));
    }
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::field(field, "lengths must be strictly increasing"));
    }
    Ok(())
}

fn resolve_grid(field: &str, grid: Option<&GridConfig>, default: (f64, f64, usize, bool)) -> Result<Vec<f64>> {
    let values = match grid {
        Some(GridConfig { values: Some(v), start: None, stop: None, points: None, log: false }) => v.clone(),
        Some(GridConfig { values: Some(_), .. }) => {
            return Err(CliError::field(field, "`values` cannot be combined with a range"));
        }
        Some(g) => {
            let (start, stop, points) =
                (g.start.unwrap_or(default.0), g.stop.unwrap_or(default.1), g.points.unwrap_or(default.2));
            linspace(field, start, stop, points, g.log)?
        }
        None => linspace(field, default.0, default.1, default.2, default.3)?,
    };
    if values.is_empty() {
        return Err(CliError::field(field, "grid is empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::field(field, "grid values must be finite"));
    }
    Ok(values)
}

fn linspace(field: &str, start: f64, stop: f64, points: usize, log: bool) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(CliError::field(field, "`points` must be positive"));
    }
    if log && !(start > 0.0 && stop > 0.0) {
        return Err(CliError::field(field, "a log grid needs positive end points"));
    }
    let (a, b) = if log { (start.ln(), stop.ln()) } else { (start, stop) };
    let step = if points > 1 { (b - a) / (points - 1) as f64 } else { 0.0 };
    Ok((0..points)
        .map(|k| {
            let x = if k + 1 == points && points > 1 { b } else { a + step * k as f64 };
            if log {
                x.exp()
            } else {
                x
            }
        })
        .collect())
}
