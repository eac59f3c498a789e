//! Echo observables: Loschmidt, prepared-state, displacement and Boltzmann echoes.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    apply, dense_matrix, finite_time_lyapunov, ClassicalMap, ClassicalState, CoupledRotatorFloquet, Floquet,
};
use crate::error::domain;
use crate::linalg::{columns, unitary_eigen, SpectralPair, SpectralStates};
use crate::qstate::{
    check_basis, compass_pure, dot, gaussian_torus, random_state, spin_coherent, Basis,
    PureEnsemble, StateVector, TorusGrid, WavepacketSpec,
};
use crate::{Error, Result, C64};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EchoMeta {
    pub observable: String,
    pub params: BTreeMap<String, f64>,
    pub seed: Option<u64>,
}

impl EchoMeta {
    pub fn new(observable: &str) -> Self {
        Self { observable: observable.into(), ..Self::default() }
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.into(), v);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoSeries {
    pub times: Vec<u64>,
    pub values: Vec<f64>,
    #[serde(skip)]
    pub amplitude: Option<Vec<C64>>,
    pub meta: EchoMeta,
}

impl EchoSeries {
    pub fn from_amplitudes(times: Vec<u64>, amps: Vec<C64>, meta: EchoMeta) -> Self {
        let values = amps.iter().map(|f| f.norm_sqr().min(1.0)).collect();
        Self { times, values, amplitude: Some(amps), meta }
    }

    pub fn from_values(times: Vec<u64>, values: Vec<f64>, meta: EchoMeta) -> Self {
        Self { times, values, amplitude: None, meta }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoEnsembleStats {
    pub times: Vec<u64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub n_samples: usize,
    pub sampler: String,
    pub seed: u64,
}

impl EchoEnsembleStats {
    fn reduce(times: Vec<u64>, rows: &[Vec<f64>], sampler: String, seed: u64) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return domain("ensemble statistics need at least two samples");
        }
        let len = times.len();
        let mut mean = vec![0.0; len];
        for r in rows {
            mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut variance = vec![0.0; len];
        for r in rows {
            variance.iter_mut().zip(r.iter().zip(&mean)).for_each(|(s, (v, m))| *s += (v - m).powi(2));
        }
        variance.iter_mut().for_each(|s| *s /= (n - 1) as f64);
        Ok(Self { times, mean, variance, n_samples: n, sampler, seed })
    }

    pub fn mean_series(&self) -> EchoSeries {
        EchoSeries::from_values(
            self.times.clone(),
            self.mean.clone(),
            EchoMeta { observable: "mean".into(), params: BTreeMap::new(), seed: Some(self.seed) },
        )
    }
}

/// Random initial states for ensembles. Sample i draws from ChaCha20 stream i of the seed.
#[derive(Clone, Debug)]
pub enum InitialSampler {
    /// Coherent packets with uniformly distributed centers.
    TorusCoherent { grid: TorusGrid },
    /// Compass superpositions with fixed separations and uniformly distributed centers.
    TorusCompass { grid: TorusGrid, r0: f64, dp: f64 },
    /// Spin coherent states uniformly distributed on the sphere.
    SpinCoherent { s: f64 },
    /// Spin coherent states centered in the chaotic sea of the top with torsion k:
    /// centers whose 200-kick finite-time exponent is below 0.05 are redrawn.
    SpinCoherentChaotic { s: f64, k: f64 },
    /// Random pure states of the given dimension.
    Random { basis: Basis },
    /// Cycles through a fixed list.
    Listed(Vec<StateVector>),
}

impl InitialSampler {
    pub fn describe(&self) -> String {
        match self {
            Self::TorusCoherent { grid } => format!("torus-coherent N={}", grid.n()),
            Self::TorusCompass { grid, r0, dp } => format!("torus-compass N={} r0={r0} dp={dp}", grid.n()),
            Self::SpinCoherent { s } => format!("spin-coherent S={s}"),
            Self::SpinCoherentChaotic { s, k } => format!("spin-coherent-chaotic S={s} K={k}"),
            Self::Random { basis } => format!("random dim={}", basis.dim()),
            Self::Listed(v) => format!("listed n={}", v.len()),
        }
    }

    pub fn sample(&self, seed: u64, index: usize) -> Result<StateVector> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        match self {
            Self::TorusCoherent { grid } => {
                let spec = WavepacketSpec::coherent(grid, rng.random::<f64>() * TAU, rng.random::<f64>() * TAU)?;
                gaussian_torus(grid, &spec)
            }
            Self::TorusCompass { grid, r0, dp } => {
                let spec = WavepacketSpec::coherent(grid, rng.random::<f64>() * TAU, rng.random::<f64>() * TAU)?;
                compass_pure(grid, &spec, *r0, *dp)
            }
            Self::SpinCoherent { s } => {
                let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
                spin_coherent(*s, z.clamp(-1.0, 1.0).acos(), rng.random::<f64>() * TAU)
            }
            Self::SpinCoherentChaotic { s, k } => {
                for _ in 0..1000 {
                    let z: f64 = (2.0 * rng.random::<f64>() - 1.0).clamp(-1.0, 1.0);
                    let az = rng.random::<f64>() * TAU;
                    let r = (1.0 - z * z).sqrt();
                    let start = ClassicalState::Sphere { x: r * az.cos(), y: r * az.sin(), z };
                    if finite_time_lyapunov(ClassicalMap::Top, *k, start, 200)? >= 0.05 {
                        return spin_coherent(*s, z.acos(), az);
                    }
                }
                domain(format!("no chaotic initial condition found at K = {k}"))
            }
            Self::Random { basis } => random_state(basis.dim(), rng.random())?.relabel(*basis),
            Self::Listed(v) => {
                if v.is_empty() {
                    return domain("empty sampler");
                }
                Ok(v[index % v.len()].clone())
            }
        }
    }
}

fn same_family(f0: &dyn Floquet, f: &dyn Floquet, psi: &StateVector) -> Result<()> {
    if f0.dim() != f.dim() {
        return Err(Error::Basis(format!("engines of dimension {} and {}", f0.dim(), f.dim())));
    }
    check_basis(&f0.basis(), &f.basis())?;
    check_basis(&f0.basis(), &psi.basis())
}

fn kick_range(n_max: usize) -> Vec<u64> {
    (0..=n_max as u64).collect()
}

/// f(n) = ⟨ψ0|F†ⁿ F0ⁿ|ψ0⟩ for n = 0..=n_max, with M_L = |f|².
pub fn loschmidt(psi0: &StateVector, f0: &dyn Floquet, f: &dyn Floquet, n_max: usize) -> Result<EchoSeries> {
    same_family(f0, f, psi0)?;
    let mut a = psi0.amplitudes().to_vec();
    let mut b = a.clone();
    let mut amps = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            f0.step(&mut a);
            f.step(&mut b);
        }
        amps.push(dot(&b, &a));
    }
    Ok(EchoSeries::from_amplitudes(kick_range(n_max), amps, EchoMeta::new("loschmidt")))
}

/// Loschmidt echo of ψ_T = F0ᵀψ0; T = 0 is exactly `loschmidt`.
pub fn prepared_echo(
    psi0: &StateVector,
    f0: &dyn Floquet,
    f: &dyn Floquet,
    t_prep: usize,
    n_max: usize,
) -> Result<EchoSeries> {
    let psi_t = apply(f0, psi0, t_prep)?;
    let mut s = loschmidt(&psi_t, f0, f, n_max)?;
    s.meta = EchoMeta::new("prepared").with("T", t_prep as f64);
    Ok(s)
}

/// 4·Tr[ρ(t)ρ'(t)] for the compass mixture, written for general weights as
/// Σ_jk w_j w_k |⟨F^t ψ_j|F0^t ψ_k⟩|² / Σ_j w_j².
pub fn mixed_loschmidt(ens: &PureEnsemble, f0: &dyn Floquet, f: &dyn Floquet, n_max: usize) -> Result<EchoSeries> {
    for s in &ens.states {
        same_family(f0, f, s)?;
    }
    let wsum: f64 = ens.weights.iter().sum();
    let w: Vec<f64> = ens.weights.iter().map(|v| v / wsum).collect();
    let norm: f64 = w.iter().map(|v| v * v).sum();
    let mut a: Vec<Vec<C64>> = ens.states.iter().map(|s| s.amplitudes().to_vec()).collect();
    let mut b = a.clone();
    let mut vals = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            a.iter_mut().for_each(|v| f0.step(v));
            b.iter_mut().for_each(|v| f.step(v));
        }
        let mut acc = 0.0;
        for (j, bj) in b.iter().enumerate() {
            for (k, ak) in a.iter().enumerate() {
                acc += w[j] * w[k] * dot(bj, ak).norm_sqr();
            }
        }
        vals.push((acc / norm).min(1.0));
    }
    Ok(EchoSeries::from_values(kick_range(n_max), vals, EchoMeta::new("mixed-loschmidt")))
}

/// Mean and unbiased variance of M_L over sampled initial states.
pub fn ensemble_stats(
    sampler: &InitialSampler,
    f0: &dyn Floquet,
    f: &dyn Floquet,
    n_max: usize,
    n_samples: usize,
    seed: u64,
) -> Result<EchoEnsembleStats> {
    if n_samples < 2 {
        return domain("ensemble statistics need n_samples ≥ 2");
    }
    let rows: Vec<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| loschmidt(&sampler.sample(seed, i)?, f0, f, n_max).map(|s| s.values))
        .collect::<Result<_>>()?;
    EchoEnsembleStats::reduce(kick_range(n_max), &rows, sampler.describe(), seed)
}

/// Echo evaluated through the eigenbases of both engines, so that arbitrary
/// (sparse, very long) times cost one matrix product each.
pub struct SpectralEcho {
    pair: SpectralPair,
    dim: usize,
    basis: Basis,
}

impl SpectralEcho {
    /// `f0` drives the reference leg, `f` the perturbed leg. Dimension ≤ 4096.
    pub fn new(f0: &dyn Floquet, f: &dyn Floquet) -> Result<Self> {
        check_basis(&f0.basis(), &f.basis())?;
        let u0 = dense_matrix(f0)?;
        let u = dense_matrix(f)?;
        let e0 = unitary_eigen(u0.as_ref())?;
        let e = unitary_eigen(u.as_ref())?;
        // U v = e^{iθ} v, so evolution by t kicks is e^{-i(-θ)t}
        let neg = |v: Vec<f64>| v.into_iter().map(|x| -x).collect::<Vec<_>>();
        let pair = SpectralPair::new(neg(e.phases), e.vectors, neg(e0.phases), e0.vectors);
        Ok(Self { pair, dim: f0.dim(), basis: f0.basis() })
    }

    fn project(&self, states: &[StateVector], t_prep: u64) -> Result<SpectralStates> {
        for s in states {
            check_basis(&self.basis, &s.basis())?;
        }
        let cols: Vec<&[C64]> = states.iter().map(|s| s.amplitudes()).collect();
        let m: Mat<C64> = columns(&cols);
        let mut st = self.pair.project(m.as_ref(), m.as_ref());
        if t_prep > 0 {
            // ψ_T = F0ᵀψ: advance the reference leg, then re-project onto the perturbed basis
            self.pair.advance_right(&mut st, t_prep as f64);
            st = self.pair.reproject_left(st);
        }
        Ok(st)
    }

    /// Fidelity amplitudes, one row per time, one column per state.
    pub fn amplitudes(&self, states: &[StateVector], t_prep: u64, times: &[u64]) -> Result<Vec<Vec<C64>>> {
        let st = self.project(states, t_prep)?;
        Ok(times.iter().map(|&t| self.pair.amplitudes(&st, t as f64)).collect())
    }

    pub fn echo(&self, psi0: &StateVector, t_prep: u64, times: &[u64]) -> Result<EchoSeries> {
        let rows = self.amplitudes(std::slice::from_ref(psi0), t_prep, times)?;
        let amps = rows.into_iter().map(|r| r[0]).collect();
        let meta = EchoMeta::new("spectral-loschmidt").with("T", t_prep as f64);
        Ok(EchoSeries::from_amplitudes(times.to_vec(), amps, meta))
    }

    /// Mean and variance of M over `n_samples` sampled states, batched in blocks.
    pub fn ensemble(
        &self,
        sampler: &InitialSampler,
        n_samples: usize,
        seed: u64,
        t_prep: u64,
        times: &[u64],
    ) -> Result<EchoEnsembleStats> {
        if n_samples < 2 {
            return domain("ensemble statistics need n_samples ≥ 2");
        }
        let states: Vec<StateVector> = (0..n_samples)
            .into_par_iter()
            .map(|i| sampler.sample(seed, i))
            .collect::<Result<_>>()?;
        let mut rows = vec![Vec::with_capacity(times.len()); n_samples];
        for (bi, block) in states.chunks(128).enumerate() {
            let amps = self.amplitudes(block, t_prep, times)?;
            for row in &amps {
                for (j, f) in row.iter().enumerate() {
                    rows[bi * 128 + j].push(f.norm_sqr().min(1.0));
                }
            }
        }
        EchoEnsembleStats::reduce(times.to_vec(), &rows, sampler.describe(), seed)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DisplacementKind {
    Momentum,
    Spatial,
}

/// Displacement by m lattice units: P = m·2π/N (momentum) or X = m·2π/N (position).
/// Momentum boosts may be fractional; spatial shifts must be whole sites.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementSpec {
    pub kind: DisplacementKind,
    pub m: f64,
}

impl DisplacementSpec {
    pub fn momentum(m: f64) -> Self {
        Self { kind: DisplacementKind::Momentum, m }
    }

    pub fn spatial(m: f64) -> Self {
        Self { kind: DisplacementKind::Spatial, m }
    }

    fn operator(&self, grid: &TorusGrid) -> Result<Displacer> {
        if !self.m.is_finite() {
            return Err(Error::Incommensurate(self.m));
        }
        match self.kind {
            DisplacementKind::Momentum => Ok(Displacer::Boost(
                (0..grid.n()).map(|l| C64::from_polar(1.0, self.m * grid.x(l))).collect(),
            )),
            DisplacementKind::Spatial => {
                if (self.m - self.m.round()).abs() > 1e-12 {
                    return Err(Error::Incommensurate(self.m));
                }
                let n = grid.n() as i64;
                Ok(Displacer::Shift((self.m.round() as i64).rem_euclid(n) as usize))
            }
        }
    }
}

enum Displacer {
    Boost(Vec<C64>),
    Shift(usize),
}

impl Displacer {
    fn apply(&self, a: &[C64]) -> Vec<C64> {
        match self {
            Displacer::Boost(ph) => a.iter().zip(ph).map(|(z, p)| z * p).collect(),
            Displacer::Shift(s) => {
                let mut out = a.to_vec();
                out.rotate_right(*s);
                out
            }
        }
    }
}

/// M_D(n) = |⟨ψ0|D† F0†ⁿ D F0ⁿ|ψ0⟩|² = |⟨F0ⁿDψ0|D F0ⁿψ0⟩|².
pub fn displacement_echo(
    psi0: &StateVector,
    f0: &dyn Floquet,
    disp: &DisplacementSpec,
    n_max: usize,
) -> Result<EchoSeries> {
    check_basis(&f0.basis(), &psi0.basis())?;
    let Basis::TorusPosition(grid) = psi0.basis() else {
        return Err(Error::Basis("displacements act on the torus position grid".into()));
    };
    let d = disp.operator(&grid)?;
    let mut a = psi0.amplitudes().to_vec();
    let mut b = d.apply(&a);
    let mut amps = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            f0.step(&mut a);
            f0.step(&mut b);
        }
        amps.push(dot(&b, &d.apply(&a)));
    }
    let kind = match disp.kind {
        DisplacementKind::Momentum => 0.0,
        DisplacementKind::Spatial => 1.0,
    };
    let meta = EchoMeta::new("displacement").with("m", disp.m).with("spatial", kind);
    Ok(EchoSeries::from_amplitudes(kick_range(n_max), amps, meta))
}

/// Environment initial states for the Boltzmann echo.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvSampler {
    /// Random pure states.
    Random,
    /// Coherent packets at uniformly drawn centers.
    Gaussian,
}

/// Boltzmann echo at the requested kicks: the first particle is reversed with
/// `hb` after `hf`, the second is traced out and averaged over `n_env` states.
pub fn boltzmann_echo_at(
    psi1: &StateVector,
    env: EnvSampler,
    hf: &CoupledRotatorFloquet,
    hb: &CoupledRotatorFloquet,
    times: &[u64],
    n_env: usize,
    seed: u64,
) -> Result<EchoSeries> {
    let (g1, g2) = hf.grids();
    if hb.grids() != (g1, g2) {
        return Err(Error::Basis("forward and backward engines factor differently".into()));
    }
    check_basis(&Basis::TorusPosition(g1), &psi1.basis())?;
    if n_env == 0 {
        return domain("Boltzmann echo needs n_env ≥ 1");
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return domain("times must be strictly increasing");
    }
    let sampler = match env {
        EnvSampler::Random => InitialSampler::Random { basis: Basis::TorusPosition(g2) },
        EnvSampler::Gaussian => InitialSampler::TorusCoherent { grid: g2 },
    };
    let (n1, n2) = (g1.n(), g2.n());
    let rows: Vec<Vec<f64>> = (0..n_env)
        .into_par_iter()
        .map(|e| {
            let psi2 = sampler.sample(seed, e)?;
            let mut fwd = StateVector::product(psi1, &psi2)?.into_amplitudes();
            let mut at = 0u64;
            let mut out = Vec::with_capacity(times.len());
            for &t in times {
                while at < t {
                    hf.step(&mut fwd);
                    at += 1;
                }
                let mut back = fwd.clone();
                for _ in 0..t {
                    hb.step(&mut back);
                }
                let mut m = 0.0;
                for i2 in 0..n2 {
                    let mut s = C64::new(0.0, 0.0);
                    for i1 in 0..n1 {
                        s += psi1.amplitudes()[i1].conj() * back[i1 * n2 + i2];
                    }
                    m += s.norm_sqr();
                }
                out.push(m.min(1.0));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; times.len()];
    for r in &rows {
        values.iter_mut().zip(r).for_each(|(v, x)| *v += x / n_env as f64);
    }
    let (k1, k2, eps) = hf.params();
    let (kb1, kb2, _) = hb.params();
    let meta = EchoMeta {
        observable: "boltzmann".into(),
        params: BTreeMap::from([
            ("K1".into(), k1),
            ("K2".into(), k2),
            ("eps".into(), eps),
            ("dK1".into(), kb1 - k1),
            ("dK2".into(), kb2 - k2),
            ("n_env".into(), n_env as f64),
        ]),
        seed: Some(seed),
    };
    Ok(EchoSeries::from_values(times.to_vec(), values, meta))
}

pub fn boltzmann_echo(
    psi1: &StateVector,
    env: EnvSampler,
    hf: &CoupledRotatorFloquet,
    hb: &CoupledRotatorFloquet,
    n_max: usize,
    n_env: usize,
    seed: u64,
) -> Result<EchoSeries> {
    boltzmann_echo_at(psi1, env, hf, hb, &kick_range(n_max), n_env, seed)
}

/// First recorded time with value ≤ mc; one past the last time if never crossed.
pub fn threshold_time(series: &EchoSeries, mc: f64) -> Result<u64> {
    if !(mc > 0.0 && mc < 1.0) {
        return domain(format!("threshold {mc} outside (0, 1)"));
    }
    let sentinel = series.times.last().map_or(0, |t| t + 1);
    Ok(series
        .times
        .iter()
        .zip(&series.values)
        .find(|(_, v)| **v <= mc)
        .map_or(sentinel, |(t, _)| *t))
}

/// S(ω) = Re Σ_t f(t) e^{-iωt} / (2π n_max) over the recorded window.
pub fn response_spectrum(series: &EchoSeries, omegas: &[f64]) -> Result<Vec<f64>> {
    let amp = series.amplitude.as_ref().ok_or(Error::MissingAmplitude)?;
    let n_max = series.times.last().copied().unwrap_or(0).max(1) as f64;
    Ok(omegas
        .iter()
        .map(|w| {
            let s: C64 = series
                .times
                .iter()
                .zip(amp)
                .map(|(t, f)| f * C64::from_polar(1.0, -w * *t as f64))
                .sum();
            s.re / (TAU * n_max)
        })
        .collect())
}
