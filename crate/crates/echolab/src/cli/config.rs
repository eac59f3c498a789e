use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::table::Format;
use super::CliError;
use crate::echoes::{DisplacementKind, EnvSampler};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Loschmidt,
    Prepared,
    Displacement,
    Boltzmann,
    Purity,
    Ldos,
    Lyapunov,
    Wigner,
    ClassicalFidelity,
    SpinToy,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Loschmidt => "loschmidt",
            Experiment::Prepared => "prepared",
            Experiment::Displacement => "displacement",
            Experiment::Boltzmann => "boltzmann",
            Experiment::Purity => "purity",
            Experiment::Ldos => "ldos",
            Experiment::Lyapunov => "lyapunov",
            Experiment::Wigner => "wigner",
            Experiment::ClassicalFidelity => "classical_fidelity",
            Experiment::SpinToy => "spin_toy",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    #[default]
    Rotator,
    Top,
}

/// Keys accepted in a config file or as KEY=VALUE overrides.
pub const KNOWN_KEYS: &[&str] = &[
    "experiment", "seed", "model", "n", "n2", "s", "k", "k2", "dk", "dk2", "phi", "eps", "x0", "p0", "nu",
    "m", "shift", "t_prep", "n_max", "n_samples", "n_steps", "chaotic", "env", "sigma", "cell", "d",
    "coupling", "dt", "out", "format",
];

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<Experiment>,
    seed: Option<u64>,
    model: Option<Model>,
    n: Option<usize>,
    n2: Option<usize>,
    s: Option<f64>,
    k: Option<f64>,
    k2: Option<f64>,
    dk: Option<f64>,
    dk2: Option<f64>,
    phi: Option<f64>,
    eps: Option<f64>,
    x0: Option<f64>,
    p0: Option<f64>,
    nu: Option<f64>,
    m: Option<f64>,
    shift: Option<DisplacementKind>,
    t_prep: Option<usize>,
    n_max: Option<usize>,
    n_samples: Option<usize>,
    n_steps: Option<usize>,
    chaotic: Option<bool>,
    env: Option<EnvSampler>,
    sigma: Option<f64>,
    cell: Option<f64>,
    d: Option<usize>,
    coupling: Option<f64>,
    dt: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

/// Fully resolved configuration; every field has its effective value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub model: Model,
    /// grid size of the rotator, or of each coupled rotator
    pub n: usize,
    pub n2: usize,
    pub s: f64,
    pub k: f64,
    pub k2: f64,
    pub dk: f64,
    pub dk2: f64,
    pub phi: f64,
    pub eps: f64,
    /// packet center; drawn per sample from the seed when absent
    pub x0: Option<f64>,
    pub p0: Option<f64>,
    pub nu: Option<f64>,
    pub m: f64,
    pub shift: DisplacementKind,
    pub t_prep: usize,
    pub n_max: usize,
    pub n_samples: usize,
    pub n_steps: usize,
    pub chaotic: bool,
    pub env: EnvSampler,
    pub sigma: f64,
    pub cell: Option<f64>,
    pub d: usize,
    pub coupling: f64,
    pub dt: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configs serialize")
    }
}

fn scalar(key: &str, text: &str) -> Result<toml::Value, CliError> {
    // bare words are taken as strings, so `model=top` works without quotes
    match format!("v = {text}").parse::<toml::Table>() {
        Ok(mut t) => Ok(t.remove("v").expect("parsed key")),
        Err(_) if !text.is_empty() && text.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') => {
            Ok(toml::Value::String(text.into()))
        }
        Err(e) => Err(CliError::Parse(format!("{key}: {}", e.message()))),
    }
}

/// Splits `key=value`.
pub fn parse_override(arg: &str) -> Result<(String, String), CliError> {
    let (k, v) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Parse(format!("expected KEY=VALUE, got {arg:?}")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Merges the config text (if any) with overrides, later entries winning, then validates.
pub fn parse_config(text: Option<&str>, overrides: &[(String, String)]) -> Result<ExperimentConfig, CliError> {
    let mut table: toml::Table = match text {
        Some(t) => t.parse().map_err(|e: toml::de::Error| CliError::Parse(e.message().to_string()))?,
        None => toml::Table::new(),
    };
    for (k, v) in overrides {
        table.insert(k.clone(), scalar(k, v)?);
    }
    if let Some(k) = table.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(CliError::UnknownKey(k.clone()));
    }
    // integers are accepted where floats are expected
    for (k, v) in table.iter_mut() {
        if let toml::Value::Integer(i) = v {
            if FLOAT_KEYS.contains(&k.as_str()) {
                *v = toml::Value::Float(*i as f64);
            }
        }
    }
    let raw: RawConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Parse(e.message().to_string()))?;
    resolve(raw)
}

pub fn parse_config_file(path: &std::path::Path, overrides: &[(String, String)]) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    parse_config(Some(&text), overrides)
}

const FLOAT_KEYS: &[&str] = &[
    "s", "k", "k2", "dk", "dk2", "phi", "eps", "x0", "p0", "nu", "m", "sigma", "cell", "coupling", "dt",
];

fn range(msg: String) -> CliError {
    CliError::Range(msg)
}

fn resolve(r: RawConfig) -> Result<ExperimentConfig, CliError> {
    use Experiment::*;
    let experiment = r.experiment.ok_or_else(|| range("experiment is required".into()))?;
    let seed = r.seed.ok_or_else(|| range("seed is required".into()))?;
    let model = r.model.unwrap_or_default();
    let (n_def, k_def) = match experiment {
        Boltzmann | Purity => (256, 10.0),
        Ldos => (512, 9.95),
        Wigner => (64, 9.95),
        _ => (1024, 9.95),
    };
    let c = ExperimentConfig {
        experiment,
        seed,
        model,
        n: r.n.unwrap_or(n_def),
        n2: r.n2.or(r.n).unwrap_or(n_def),
        s: r.s.unwrap_or(100.0),
        k: r.k.unwrap_or(if model == Model::Top { 13.1 } else { k_def }),
        k2: r.k2.or(r.k).unwrap_or(k_def),
        dk: r.dk.unwrap_or(0.0),
        dk2: r.dk2.unwrap_or(0.0),
        phi: r.phi.unwrap_or(0.0),
        eps: r.eps.unwrap_or(0.0),
        x0: r.x0,
        p0: r.p0,
        nu: r.nu,
        m: r.m.unwrap_or(1.0),
        shift: r.shift.unwrap_or(DisplacementKind::Momentum),
        t_prep: r.t_prep.unwrap_or(0),
        n_max: r.n_max.unwrap_or(if experiment == Wigner { 0 } else { 100 }),
        n_samples: r.n_samples.unwrap_or(match experiment {
            Lyapunov => 1000,
            ClassicalFidelity => 100_000,
            Boltzmann => 10,
            _ => 1,
        }),
        n_steps: r.n_steps.unwrap_or(1000),
        chaotic: r.chaotic.unwrap_or(false),
        env: r.env.unwrap_or(EnvSampler::Random),
        sigma: r.sigma.unwrap_or(1e-3),
        cell: r.cell,
        d: r.d.unwrap_or(64),
        coupling: r.coupling.unwrap_or(0.1),
        dt: r.dt.unwrap_or(1.0),
        out: r.out,
        format: r.format.unwrap_or_default(),
    };
    validate(&c)?;
    Ok(c)
}

fn validate(c: &ExperimentConfig) -> Result<(), CliError> {
    use Experiment::*;
    let finite = [c.k, c.k2, c.dk, c.dk2, c.phi, c.eps, c.m, c.sigma, c.coupling, c.dt, c.s];
    if finite.iter().any(|v| !v.is_finite()) {
        return Err(range("parameters must be finite".into()));
    }
    for (name, v) in [("x0", c.x0), ("p0", c.p0)] {
        if let Some(v) = v {
            if !(0.0..std::f64::consts::TAU).contains(&v) {
                return Err(range(format!("{name} = {v} outside [0, 2π)")));
            }
        }
    }
    if let Some(nu) = c.nu {
        if !(nu > 0.0 && nu <= std::f64::consts::PI) {
            return Err(range(format!("nu = {nu} outside (0, π]")));
        }
    }
    let torus = match c.experiment {
        Loschmidt | Prepared | Ldos | ClassicalFidelity | Lyapunov => c.model == Model::Rotator,
        Displacement | Wigner | Boltzmann | Purity => true,
        SpinToy => false,
    };
    let max_n = match c.experiment {
        Ldos => 1024,
        Wigner => 4096,
        Boltzmann | Purity => 1024,
        _ => 1 << 20,
    };
    if torus && !matches!(c.experiment, ClassicalFidelity | Lyapunov) {
        for (name, n) in [("n", c.n), ("n2", c.n2)] {
            if n < 2 || n % 2 == 1 || n > max_n {
                return Err(range(format!("{name} = {n} must be even and in [2, {max_n}]")));
            }
        }
    }
    if c.model == Model::Top && !matches!(c.experiment, Displacement | Wigner | Boltzmann | Purity | SpinToy) {
        let two_s = 2.0 * c.s;
        let max_s = if c.experiment == Ldos { 511.5 } else { 2000.0 };
        if !(c.s >= 0.5 && c.s <= max_s && (two_s - two_s.round()).abs() < 1e-9) {
            return Err(range(format!("S = {} must be a half-integer in [1/2, {max_s}]", c.s)));
        }
    }
    if c.n_samples == 0 {
        return Err(range("n_samples must be at least 1".into()));
    }
    match c.experiment {
        Lyapunov if c.n_steps < 1000 => return Err(range(format!("n_steps = {} below 1000", c.n_steps))),
        SpinToy if !(2..=512).contains(&c.d) => return Err(range(format!("d = {} outside [2, 512]", c.d))),
        SpinToy if !(c.dt > 0.0) => return Err(range("dt must be positive".into())),
        ClassicalFidelity if !(c.sigma > 0.0) => return Err(range("sigma must be positive".into())),
        Displacement if c.shift == DisplacementKind::Spatial && c.m.fract() != 0.0 => {
            return Err(range(format!("spatial shift m = {} must be whole", c.m)));
        }
        _ => {}
    }
    if let Some(cell) = c.cell {
        if !(cell > 0.0) {
            return Err(range("cell must be positive".into()));
        }
    }
    Ok(())
}
