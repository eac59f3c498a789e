//! Experiment runner: configs in, tables out.

mod config;
mod table;

pub use config::{parse_config, parse_config_file, parse_override, Experiment, ExperimentConfig, Model, KNOWN_KEYS};
pub use table::{emit, emit_string, parse_csv, Format, ResultTable, Value};

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::analysis::{ldos, lorentzian_bins, lorentzian_fit, predicted_gamma, GammaModel};
use crate::dynamics::{
    apply, benettin_lyapunov, ClassicalMap, CoupledRotatorFloquet, Floquet, KickedRotatorFloquet, KickedTopFloquet,
};
use crate::echoes::{
    boltzmann_echo, displacement_echo, ensemble_stats, loschmidt, prepared_echo, DisplacementSpec, InitialSampler,
};
use crate::entanglement::{mean_purity, purity_series, spin_dephasing_toy};
use crate::phasespace::{classical_fidelity, default_cell, liouville_propagate, wigner, PointCloud};
use crate::qstate::{gaussian_torus, random_state, StateVector, TorusGrid, WavepacketSpec};
use crate::{Error, C64, VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Range(String),
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error(transparent)]
    Module(#[from] Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "E_PARSE",
            CliError::Range(_) => "E_RANGE",
            CliError::UnknownKey(_) => "E_UNKNOWN_KEY",
            CliError::Module(e) => e.code(),
            CliError::Io(_) => "E_IO",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Range(_) => 3,
            CliError::UnknownKey(_) => 4,
            CliError::Module(_) => 5,
            CliError::Io(_) => 6,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.code(), "message": self.to_string() }).to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn grid(n: usize) -> CliResult<TorusGrid> {
    Ok(TorusGrid::new(n)?)
}

fn rows_mean_var(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let len = rows.first().map_or(0, |r| r.len());
    let mut mean = vec![0.0; len];
    for r in rows {
        mean.iter_mut().zip(r).for_each(|(m, v)| *m += v / n);
    }
    let mut var = vec![0.0; len];
    if rows.len() > 1 {
        for r in rows {
            var.iter_mut().zip(r.iter().zip(&mean)).for_each(|(s, (v, m))| *s += (v - m).powi(2) / (n - 1.0));
        }
    }
    (mean, var)
}

fn series_table(name: &str, times: &[u64], mean: &[f64], var: &[f64]) -> ResultTable {
    let mut t = ResultTable::new(name, &["t", "value", "variance"]);
    for ((&ti, &m), &v) in times.iter().zip(mean).zip(var) {
        t.push(vec![ti.into(), m.into(), v.into()]);
    }
    t
}

/// Packet of width ν (default coherent) centered at the configured point, or at a
/// point drawn from ChaCha20 stream `index` of the seed.
fn packet(c: &ExperimentConfig, g: &TorusGrid, index: usize) -> CliResult<StateVector> {
    let mut rng = ChaCha20Rng::seed_from_u64(c.seed);
    rng.set_stream(index as u64);
    let x0 = c.x0.unwrap_or_else(|| rng.random::<f64>() * TAU);
    let p0 = c.p0.unwrap_or_else(|| rng.random::<f64>() * TAU);
    let spec = match c.nu {
        Some(nu) => WavepacketSpec::new(x0, p0, nu)?,
        None => WavepacketSpec::coherent(g, x0, p0)?,
    };
    Ok(gaussian_torus(g, &spec)?)
}

fn pinned(c: &ExperimentConfig) -> bool {
    c.x0.is_some() && c.p0.is_some()
}

type EnginePair = (Box<dyn Floquet>, Box<dyn Floquet>, InitialSampler);

fn echo_engines(c: &ExperimentConfig) -> CliResult<EnginePair> {
    Ok(match c.model {
        Model::Rotator => {
            let g = grid(c.n)?;
            let f0 = KickedRotatorFloquet::new(g, c.k)?;
            let f = f0.with_kick(c.k + c.dk)?;
            (Box::new(f0), Box::new(f), InitialSampler::TorusCoherent { grid: g })
        }
        Model::Top => {
            let f0 = KickedTopFloquet::new(c.s, c.k, 0.0)?;
            let f = f0.perturbed(c.phi)?;
            let sampler = if c.chaotic {
                InitialSampler::SpinCoherentChaotic { s: c.s, k: c.k }
            } else {
                InitialSampler::SpinCoherent { s: c.s }
            };
            (Box::new(f0), Box::new(f), sampler)
        }
    })
}

fn run_echo(c: &ExperimentConfig) -> CliResult<ResultTable> {
    let (f0, f, sampler) = echo_engines(c)?;
    let f0 = f0.as_ref();
    let f = f.as_ref();
    let single = |psi: &StateVector| -> CliResult<Vec<f64>> {
        Ok(match c.experiment {
            Experiment::Prepared => prepared_echo(psi, f0, f, c.t_prep, c.n_max)?.values,
            _ => loschmidt(psi, f0, f, c.n_max)?.values,
        })
    };
    let times: Vec<u64> = (0..=c.n_max as u64).collect();
    let name = c.experiment.name();
    if c.model == Model::Rotator && pinned(c) {
        let psi = packet(c, &grid(c.n)?, 0)?;
        let v = single(&psi)?;
        return Ok(series_table(name, &times, &v, &vec![0.0; v.len()]));
    }
    if c.n_samples == 1 {
        let v = single(&sampler.sample(c.seed, 0)?)?;
        return Ok(series_table(name, &times, &v, &vec![0.0; v.len()]));
    }
    if c.experiment == Experiment::Loschmidt {
        let s = ensemble_stats(&sampler, f0, f, c.n_max, c.n_samples, c.seed)?;
        return Ok(series_table(name, &s.times, &s.mean, &s.variance));
    }
    let rows: Vec<Vec<f64>> = (0..c.n_samples)
        .into_par_iter()
        .map(|i| single(&sampler.sample(c.seed, i)?))
        .collect::<CliResult<_>>()?;
    let (m, v) = rows_mean_var(&rows);
    Ok(series_table(name, &times, &m, &v))
}

fn run_displacement(c: &ExperimentConfig) -> CliResult<ResultTable> {
    let g = grid(c.n)?;
    let f0 = KickedRotatorFloquet::new(g, c.k)?;
    let spec = DisplacementSpec { kind: c.shift, m: c.m };
    let rows: Vec<Vec<f64>> = (0..c.n_samples)
        .into_par_iter()
        .map(|i| Ok(displacement_echo(&packet(c, &g, i)?, &f0, &spec, c.n_max)?.values))
        .collect::<CliResult<_>>()?;
    let (m, v) = rows_mean_var(&rows);
    let times: Vec<u64> = (0..=c.n_max as u64).collect();
    Ok(series_table("displacement", &times, &m, &v))
}

fn run_boltzmann(c: &ExperimentConfig) -> CliResult<ResultTable> {
    let (g1, g2) = (grid(c.n)?, grid(c.n2)?);
    let hf = CoupledRotatorFloquet::new(g1, g2, c.k, c.k2, c.eps)?;
    let hb = CoupledRotatorFloquet::backward(g1, g2, c.k + c.dk, c.k2 + c.dk2, c.eps)?;
    let psi1 = packet(c, &g1, 0)?;
    let s = boltzmann_echo(&psi1, c.env, &hf, &hb, c.n_max, c.n_samples, c.seed)?;
    let mut t = ResultTable::new("boltzmann", &["t", "value"]);
    for (&ti, &v) in s.times.iter().zip(&s.values) {
        t.push(vec![ti.into(), v.into()]);
    }
    Ok(t)
}

fn run_purity(c: &ExperimentConfig) -> CliResult<ResultTable> {
    let (g1, g2) = (grid(c.n)?, grid(c.n2)?);
    let f = CoupledRotatorFloquet::new(g1, g2, c.k, c.k2, c.eps)?;
    let s = if pinned(c) {
        purity_series(&packet(c, &g1, 0)?, &packet(c, &g2, 0)?, &f, c.n_max)?
    } else {
        mean_purity(&f, c.n_max, c.n_samples, c.seed)?
    };
    let mut t = ResultTable::new("purity", &["t", "value"]);
    for (&ti, &v) in s.times.iter().zip(&s.values) {
        t.push(vec![ti.into(), v.into()]);
    }
    t.note("saturation", format!("{:?}", 1.0 / c.n as f64 + 1.0 / c.n2 as f64));
    Ok(t)
}

fn run_ldos(c: &ExperimentConfig) -> CliResult<ResultTable> {
    let (f0, f, _) = echo_engines(c)?;
    let h = ldos(f0.as_ref(), f.as_ref())?;
    let mut t = ResultTable::new("ldos", &["phase", "weight", "lorentzian"]);
    let (fit, model) = match lorentzian_fit(&h) {
        Ok(fit) => (Some(fit), lorentzian_bins(&h, fit.gamma)),
        Err(_) => (None, vec![f64::NAN; h.weights.len()]),
    };
    for ((&a, &w), &l) in h.centers.iter().zip(&h.weights).zip(&model) {
        t.push(vec![a.into(), w.into(), l.into()]);
    }
    if let Some(fit) = fit {
        t.note("fit", serde_json::to_string(&fit).expect("fit serializes"));
    }
    let gm = match c.model {
        Model::Rotator => GammaModel::Rotator { dk: c.dk, n: c.n },
        Model::Top => GammaModel::Top { phi: c.phi, s: c.s },
    };
    if let Ok(g) = predicted_gamma(gm) {
        t.note("predicted_gamma", format!("{g:?}"));
    }
    Ok(t)
}

fn run_lyapunov(c: &ExperimentConfig) -> CliResult<ResultTable> {
    let map = match c.model {
        Model::Rotator => ClassicalMap::Standard,
        Model::Top => ClassicalMap::Top,
    };
    let est = benettin_lyapunov(map, c.k, c.n_samples, c.n_steps, c.seed)?;
    let mut t = ResultTable::new("lyapunov", &["k", "lambda", "stderr", "ln_k_over_2"]);
    let reference = if map == ClassicalMap::Standard { (c.k / 2.0).ln() } else { f64::NAN };
    t.push(vec![c.k.into(), est.lambda.into(), est.stderr.into(), reference.into()]);
    Ok(t)
}

fn run_wigner(c: &ExperimentConfig) -> CliResult<ResultTable> {
    let g = grid(c.n)?;
    let f0 = KickedRotatorFloquet::new(g, c.k)?;
    let psi = apply(&f0, &packet(c, &g, 0)?, c.n_max)?;
    let w = wigner(&psi)?;
    let h = std::f64::consts::PI / c.n as f64;
    let mut t = ResultTable::new("wigner", &["q", "p", "value"]);
    for a in 0..w.side() {
        for b in 0..w.side() {
            t.push(vec![(a as f64 * h).into(), (b as f64 * h).into(), w.at(a, b).into()]);
        }
    }
    t.note("total", format!("{:?}", w.total()));
    Ok(t)
}

fn run_classical_fidelity(c: &ExperimentConfig) -> CliResult<ResultTable> {
    let mut rng = ChaCha20Rng::seed_from_u64(c.seed);
    let (map, mut a, k_pert, phi) = match c.model {
        Model::Rotator => {
            let x0 = c.x0.unwrap_or_else(|| rng.random::<f64>() * TAU);
            let p0 = c.p0.unwrap_or_else(|| rng.random::<f64>() * TAU);
            let cloud = PointCloud::torus_patch(x0, p0, c.sigma, c.n_samples, c.seed)?;
            (ClassicalMap::Standard, cloud, c.k + c.dk, 0.0)
        }
        Model::Top => {
            // x0/2 is the polar angle and p0 the azimuth of the cap center
            let theta = c.x0.map_or_else(|| (2.0 * rng.random::<f64>() - 1.0).acos(), |v| v / 2.0);
            let az = c.p0.unwrap_or_else(|| rng.random::<f64>() * TAU);
            let cloud = PointCloud::sphere_patch(theta, az, c.sigma, c.n_samples, c.seed)?;
            (ClassicalMap::Top, cloud, c.k, c.phi)
        }
    };
    let cell = c.cell.unwrap_or_else(|| default_cell(c.n_samples));
    let mut b = a.clone();
    let mut t = ResultTable::new("classical_fidelity", &["t", "value"]);
    for n in 0..=c.n_max {
        if n > 0 {
            a = liouville_propagate(&a, map, c.k, 0.0, 1)?;
            b = liouville_propagate(&b, map, k_pert, phi, 1)?;
        }
        t.push(vec![(n as u64).into(), classical_fidelity(&a, &b, cell)?.into()]);
    }
    t.note("cell", format!("{cell:?}"));
    Ok(t)
}

/// Hermitian matrix with independent Gaussian entries, scaled by 1/√d.
pub fn gue(d: usize, seed: u64, stream: u64) -> Mat<C64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut h = Mat::<C64>::zeros(d, d);
    let s = 1.0 / (d as f64).sqrt();
    for i in 0..d {
        let v: f64 = rng.sample(StandardNormal);
        h[(i, i)] = C64::new(v * s, 0.0);
        for j in 0..i {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = C64::new(re, im) * (s / 2f64.sqrt());
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

fn run_spin_toy(c: &ExperimentConfig) -> CliResult<ResultTable> {
    let h_env = gue(c.d, c.seed, 0);
    let v = gue(c.d, c.seed, 1);
    let h_up = Mat::from_fn(c.d, c.d, |i, j| v[(i, j)] * c.coupling);
    let h_down = Mat::from_fn(c.d, c.d, |i, j| -v[(i, j)] * c.coupling);
    let mut rng = ChaCha20Rng::seed_from_u64(c.seed);
    rng.set_stream(2);
    let phi0 = random_state(c.d, rng.random())?;
    let times: Vec<f64> = (0..=c.n_max).map(|i| i as f64 * c.dt).collect();
    let a = C64::new(FRAC_1_SQRT_2, 0.0);
    let r = spin_dephasing_toy(a, a, &h_env, &h_up, &h_down, &phi0, &times)?;
    let mut t = ResultTable::new("spin_toy", &["t", "f_re", "f_im", "purity"]);
    for ((&ti, f), &p) in times.iter().zip(&r.f).zip(&r.purity) {
        t.push(vec![ti.into(), f.re.into(), f.im.into(), p.into()]);
    }
    Ok(t)
}

/// Runs one experiment. Rows depend only on the config; provenance adds the
/// config echo, the library version and the wall time.
pub fn run(c: &ExperimentConfig) -> CliResult<ResultTable> {
    let start = Instant::now();
    let mut t = match c.experiment {
        Experiment::Loschmidt | Experiment::Prepared => run_echo(c)?,
        Experiment::Displacement => run_displacement(c)?,
        Experiment::Boltzmann => run_boltzmann(c)?,
        Experiment::Purity => run_purity(c)?,
        Experiment::Ldos => run_ldos(c)?,
        Experiment::Lyapunov => run_lyapunov(c)?,
        Experiment::Wigner => run_wigner(c)?,
        Experiment::ClassicalFidelity => run_classical_fidelity(c)?,
        Experiment::SpinToy => run_spin_toy(c)?,
    };
    let mut head = vec![
        ("echolab".to_string(), VERSION.to_string()),
        ("config".to_string(), c.to_json()),
        ("rng".to_string(), "ChaCha20, stream i per sample".to_string()),
    ];
    head.append(&mut t.provenance);
    head.push(("wall_time_s".into(), format!("{:?}", start.elapsed().as_secs_f64())));
    t.provenance = head;
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Recipe {
    /// Benettin exponents of the standard map at K = 10, 20, 50
    Lyapunov,
    /// rotator echoes at N = 1024 for three perturbations spanning a factor 3
    GoldenRule,
    /// long-time rotator echo floor at N = 1024
    Saturation,
    /// coupled-rotator purity at N1 = N2 = 256
    Purity,
    /// Boltzmann echo at N = 128
    Boltzmann,
    /// displacement echo plateau at N = 4096
    Displacement,
    /// Wigner function of an evolved packet at N = 64
    Wigner,
    /// spin-1/2 dephasing toy at d = 64
    SpinToy,
}

/// Scaled-down versions of the acceptance experiments.
pub fn recipe(r: Recipe, seed: u64) -> CliResult<Vec<ExperimentConfig>> {
    let s = |e: &str, kv: &[(&str, String)]| -> CliResult<ExperimentConfig> {
        let mut o: Vec<(String, String)> = vec![("experiment".into(), e.into()), ("seed".into(), seed.to_string())];
        o.extend(kv.iter().map(|(k, v)| (k.to_string(), v.clone())));
        parse_config(None, &o)
    };
    let f = |v: f64| format!("{v:?}");
    match r {
        Recipe::Lyapunov => [10.0, 20.0, 50.0]
            .iter()
            .map(|&k| s("lyapunov", &[("k", f(k)), ("n_samples", "1000".into())]))
            .collect(),
        Recipe::GoldenRule => [1.2, 2.08, 3.6]
            .iter()
            .map(|&x| {
                s("loschmidt", &[("n", "1024".into()), ("dk", f(x / 1024.0)), ("n_max", "60".into()), ("n_samples", "40".into())])
            })
            .collect(),
        Recipe::Saturation => Ok(vec![s(
            "loschmidt",
            &[("n", "1024".into()), ("dk", f(0.05)), ("n_max", "200".into()), ("n_samples", "100".into())],
        )?]),
        Recipe::Purity => Ok(vec![s(
            "purity",
            &[("n", "256".into()), ("k", f(50.09)), ("k2", f(50.09)), ("eps", f(1.0 / 256.0)), ("n_max", "40".into()), ("n_samples", "4".into())],
        )?]),
        Recipe::Boltzmann => Ok(vec![s(
            "boltzmann",
            &[("n", "128".into()), ("k", f(10.0)), ("k2", f(10.0)), ("dk", f(0.01)), ("eps", f(1.0 / 128.0)), ("n_max", "30".into()), ("n_samples", "4".into())],
        )?]),
        Recipe::Displacement => Ok(vec![s(
            "displacement",
            &[("n", "4096".into()), ("k", f(10.0)), ("m", f(0.5)), ("n_max", "40".into()), ("n_samples", "20".into())],
        )?]),
        Recipe::Wigner => Ok(vec![s("wigner", &[("n", "64".into()), ("n_max", "5".into())])?]),
        Recipe::SpinToy => Ok(vec![s("spin_toy", &[("d", "64".into()), ("n_max", "50".into()), ("dt", f(0.5))])?]),
    }
}

#[derive(Debug, Parser)]
#[command(name = "echolab", version, about = "Echo, purity and phase-space experiments on kicked quantum maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// experiment kind when no subcommand is given
    #[arg(long, global = true, value_enum)]
    pub experiment: Option<Experiment>,
    /// TOML file of key = value settings; flags and KEY=VALUE arguments override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// output file (a directory for `repro`); stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// worker threads; defaults to all cores
    #[arg(long, global = true, env = "ECHOLAB_JOBS")]
    pub jobs: Option<usize>,
    /// ordered reductions (always the case; recorded in the provenance)
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// KEY=VALUE settings
    #[arg(value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct Overrides {
    #[arg(value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Loschmidt echo of the rotator or the top
    Loschmidt(Overrides),
    /// echo of a state prepared by t_prep unperturbed kicks
    Prepared(Overrides),
    /// displacement echo under a momentum boost or spatial shift
    Displacement(Overrides),
    /// Boltzmann echo of two coupled rotators
    Boltzmann(Overrides),
    /// purity of two coupled rotators
    Purity(Overrides),
    /// local density of states and its Lorentzian width
    Ldos(Overrides),
    /// Benettin Lyapunov exponent of the classical map
    Lyapunov(Overrides),
    /// discrete Wigner function of an evolved packet
    Wigner(Overrides),
    /// overlap of classical clouds under perturbed and unperturbed maps
    ClassicalFidelity(Overrides),
    /// spin-1/2 dephasing toy model
    SpinToy(Overrides),
    /// scaled-down acceptance recipes
    Repro {
        #[arg(value_enum)]
        recipe: Recipe,
    },
}

fn experiment_of(c: &Command) -> Option<(Experiment, &[String])> {
    use Command::*;
    let (e, o) = match c {
        Loschmidt(o) => (Experiment::Loschmidt, o),
        Prepared(o) => (Experiment::Prepared, o),
        Displacement(o) => (Experiment::Displacement, o),
        Boltzmann(o) => (Experiment::Boltzmann, o),
        Purity(o) => (Experiment::Purity, o),
        Ldos(o) => (Experiment::Ldos, o),
        Lyapunov(o) => (Experiment::Lyapunov, o),
        Wigner(o) => (Experiment::Wigner, o),
        ClassicalFidelity(o) => (Experiment::ClassicalFidelity, o),
        SpinToy(o) => (Experiment::SpinToy, o),
        Repro { .. } => return None,
    };
    Some((e, &o.set))
}

fn write_table(t: &ResultTable, format: Format, out: Option<&std::path::Path>) -> CliResult<()> {
    match out {
        Some(p) => emit(t, format, std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => emit(t, format, std::io::stdout().lock()),
    }
}

/// Executes a parsed command line.
pub fn execute(cli: Cli) -> CliResult<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Range("jobs must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| CliError::Range(e.to_string()))?;
    let jobs = pool.current_num_threads();
    pool.install(|| {
        if let Some(Command::Repro { recipe: r }) = &cli.command {
            let seed = cli.seed.ok_or_else(|| CliError::Range("seed is required".into()))?;
            let format = cli.format.unwrap_or_default();
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir)?;
            }
            for (i, c) in recipe(*r, seed)?.iter().enumerate() {
                let mut t = run(c)?;
                t.note("jobs", jobs.to_string());
                let ext = if format == Format::Json { "json" } else { "csv" };
                let path = cli.out.as_ref().map(|d| d.join(format!("{}-{i}.{ext}", c.experiment.name())));
                write_table(&t, format, path.as_deref())?;
            }
            return Ok(());
        }
        let mut overrides = Vec::new();
        let positional: &[String] = match cli.command.as_ref().and_then(experiment_of) {
            Some((e, set)) => {
                overrides.push(("experiment".to_string(), e.name().to_string()));
                set
            }
            None => &cli.set,
        };
        if let Some(e) = cli.experiment {
            overrides.push(("experiment".into(), e.name().into()));
        }
        for s in positional {
            overrides.push(parse_override(s)?);
        }
        if let Some(s) = cli.seed {
            overrides.push(("seed".into(), s.to_string()));
        }
        if let Some(o) = &cli.out {
            overrides.push(("out".into(), toml::Value::String(o.display().to_string()).to_string()));
        }
        if let Some(f) = cli.format {
            overrides.push(("format".into(), if f == Format::Json { "json" } else { "csv" }.into()));
        }
        let cfg = match &cli.config {
            Some(p) => parse_config_file(p, &overrides)?,
            None => parse_config(None, &overrides)?,
        };
        let mut t = run(&cfg)?;
        t.note("jobs", jobs.to_string());
        t.note("deterministic", cli.deterministic.to_string());
        write_table(&t, cfg.format, cfg.out.as_deref())
    })
}
