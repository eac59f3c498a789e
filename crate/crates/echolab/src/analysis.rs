//! Energy scales, regime classification, reference curves and fits.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::dynamics::{dense_matrix, Floquet};
use crate::echoes::{EchoMeta, EchoSeries};
use crate::error::domain;
use crate::linalg::unitary_eigen;
use crate::qstate::check_basis;
use crate::{Error, Result};

pub const LDOS_GUARD: usize = 1024;
pub const LDOS_BINS: usize = 101;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub gamma: f64,
    pub delta: f64,
    pub bandwidth: f64,
    pub lambda: f64,
    pub n: f64,
    pub tau_e: f64,
}

impl RegimeParams {
    pub fn new(gamma: f64, delta: f64, bandwidth: f64, lambda: f64, n: f64) -> Result<Self> {
        if ![gamma, delta, bandwidth, lambda, n].iter().all(|v| *v > 0.0 && v.is_finite()) {
            return domain("regime parameters must be positive");
        }
        if delta > bandwidth {
            return domain("level spacing exceeds the bandwidth");
        }
        if n < 2.0 {
            return domain("dimension must be at least 2");
        }
        Ok(Self { gamma, delta, bandwidth, lambda, n, tau_e: ehrenfest_time(lambda, n)? })
    }

    /// Rotator: δ = 2π/N, B = 2π.
    pub fn rotator(gamma: f64, lambda: f64, n: usize) -> Result<Self> {
        Self::new(gamma, TAU / n as f64, TAU, lambda, n as f64)
    }

    /// Top: B = π/2, δ = B/2S, N = 2S + 1.
    pub fn top(gamma: f64, lambda: f64, s: f64) -> Result<Self> {
        Self::new(gamma, PI / 2.0 / (2.0 * s), PI / 2.0, lambda, 2.0 * s + 1.0)
    }

    /// Perturbative Gaussian rate σ₁² taken as Γδ/2π, the golden-rule matrix element.
    pub fn sigma1_sq(&self) -> f64 {
        self.gamma * self.delta / TAU
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    Perturbative,
    GoldenRule,
    LyapunovDominated,
    StrongPerturbation,
}

impl Regime {
    /// Position in Perturbative < GoldenRule/Lyapunov < Strong.
    pub fn rank(&self) -> u8 {
        match self {
            Regime::Perturbative => 0,
            Regime::GoldenRule | Regime::LyapunovDominated => 1,
            Regime::StrongPerturbation => 2,
        }
    }
}

pub fn classify_regime(rp: &RegimeParams) -> Regime {
    if rp.gamma < rp.delta {
        Regime::Perturbative
    } else if rp.gamma > rp.bandwidth {
        Regime::StrongPerturbation
    } else if rp.gamma < rp.lambda {
        Regime::GoldenRule
    } else {
        Regime::LyapunovDominated
    }
}

/// Leading decay of the regime, floored at 1/N.
pub fn reference_curve(rp: &RegimeParams, regime: Regime, n_max: usize) -> EchoSeries {
    let f = |t: f64| match regime {
        Regime::Perturbative => (-rp.sigma1_sq() * t * t).exp(),
        Regime::GoldenRule => (-rp.gamma * t).exp(),
        Regime::LyapunovDominated => (-rp.lambda * t).exp(),
        Regime::StrongPerturbation => (-(rp.bandwidth * t).powi(2)).exp(),
    };
    curve(n_max, 1.0 / rp.n, f, &format!("{regime:?}"))
}

/// Regular-regime power laws: t^{-d} classically, t^{-3d/2} quantum, floored at 1/N.
pub fn power_reference(d: f64, quantum: bool, n: f64, n_max: usize) -> EchoSeries {
    let e = if quantum { 1.5 * d } else { d };
    curve(n_max, 1.0 / n, |t| if t < 1.0 { 1.0 } else { t.powf(-e) }, "power")
}

/// exp[-min(λ1, λ2, 2Γ2) t] + 1/N1 + 1/N2
pub fn purity_reference(lambda1: f64, lambda2: f64, gamma2: f64, n1: f64, n2: f64, n_max: usize) -> EchoSeries {
    let r = lambda1.min(lambda2).min(2.0 * gamma2);
    let floor = 1.0 / n1 + 1.0 / n2;
    let mut s = curve(n_max, 0.0, |t| (-r * t).exp() + floor, "purity");
    s.values.iter_mut().for_each(|v| *v = v.min(1.0));
    s
}

fn curve(n_max: usize, floor: f64, f: impl Fn(f64) -> f64, name: &str) -> EchoSeries {
    let times: Vec<u64> = (0..=n_max as u64).collect();
    let values = times.iter().map(|&t| f(t as f64).max(floor)).collect();
    EchoSeries::from_values(times, values, EchoMeta::new(name))
}

/// τ_E = λ⁻¹ ln N
pub fn ehrenfest_time(lambda: f64, n: f64) -> Result<f64> {
    ehrenfest_time_with(lambda, n)
}

/// τ_E = λ⁻¹ ln(arg); the paper uses N, 2S or L/ν as the argument.
pub fn ehrenfest_time_with(lambda: f64, arg: f64) -> Result<f64> {
    if !(lambda > 0.0) || !(arg >= 2.0) {
        return domain("Ehrenfest time needs λ > 0 and a log argument ≥ 2");
    }
    Ok(arg.ln() / lambda)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum GammaModel {
    Rotator { dk: f64, n: usize },
    Top { phi: f64, s: f64 },
    Coupled { eps: f64, n1: usize, n2: usize },
}

/// 0.024(δK N)², 0.84 φ²S² or 0.43 ε²N1N2.
pub fn predicted_gamma(model: GammaModel) -> Result<f64> {
    let v = match model {
        GammaModel::Rotator { dk, n } => 0.024 * (dk * n as f64).powi(2),
        GammaModel::Top { phi, s } => 0.84 * (phi * s).powi(2),
        GammaModel::Coupled { eps, n1, n2 } => 0.43 * eps * eps * n1 as f64 * n2 as f64,
    };
    if !(v > 0.0 && v.is_finite()) {
        return domain("predicted Γ needs positive parameters");
    }
    Ok(v)
}

/// Long-time displacement echo for a boost of m lattice units on a packet of width ν:
/// max(e^{-(mν)²/2} sin²(πm)/(πm)², 1/N).
pub fn freeze_plateau(m: f64, nu: f64, n: usize) -> f64 {
    let x = PI * m;
    let sinc2 = if x.abs() < 1e-12 { 1.0 } else { (x.sin() / x).powi(2) };
    ((-(m * nu).powi(2) / 2.0).exp() * sinc2).max(1.0 / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdosHistogram {
    pub centers: Vec<f64>,
    pub weights: Vec<f64>,
    pub bin_width: f64,
}

impl LdosHistogram {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { weights: self.weights.iter().map(|w| w * c).collect(), ..self.clone() }
    }
}

fn wrap_pm_pi(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

fn bin_of(a: f64, width: f64) -> usize {
    (((a + PI) / width).ceil() as usize).clamp(1, LDOS_BINS) - 1
}

/// Mean |⟨α|β⁽⁰⁾⟩|² resolved in the eigenphase difference θ_α − θ_β⁽⁰⁾, averaged over β.
/// 101 bins over (-π, π]. Floquet phases fill the circle uniformly, so no unfolding is applied.
pub fn ldos(f0: &dyn Floquet, f: &dyn Floquet) -> Result<LdosHistogram> {
    check_basis(&f0.basis(), &f.basis())?;
    let n = f0.dim();
    if n > LDOS_GUARD {
        return Err(Error::DimGuard { dim: n, max: LDOS_GUARD });
    }
    let e0 = unitary_eigen(dense_matrix(f0)?.as_ref())?;
    let e = unitary_eigen(dense_matrix(f)?.as_ref())?;
    let w = e.vectors.adjoint() * &e0.vectors;
    let width = TAU / LDOS_BINS as f64;
    let mut weights = vec![0.0; LDOS_BINS];
    for b in 0..n {
        for a in 0..n {
            let d = wrap_pm_pi(e.phases[a] - e0.phases[b]);
            weights[bin_of(d, width)] += w[(a, b)].norm_sqr() / n as f64;
        }
    }
    let centers = (0..LDOS_BINS).map(|i| -PI + (i as f64 + 0.5) * width).collect();
    Ok(LdosHistogram { centers, weights, bin_width: width })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzianFit {
    pub gamma: f64,
    /// relative RMS misfit of the bin weights
    pub residual: f64,
    /// width hit the one-bin floor
    pub at_floor: bool,
    pub converged: bool,
}

/// Wrapped Lorentzian of FWHM Γ on the circle, unit area.
fn wrapped_lorentzian(a: f64, gamma: f64) -> f64 {
    let g = gamma / 2.0;
    g.sinh() / (g.cosh() - a.cos()) / TAU
}

/// Bin-integrated wrapped Lorentzian with the histogram's total weight.
pub fn lorentzian_bins(h: &LdosHistogram, gamma: f64) -> Vec<f64> {
    const SUB: usize = 8;
    let total = h.total();
    h.centers
        .iter()
        .map(|c| {
            let s: f64 = (0..SUB)
                .map(|k| wrapped_lorentzian(c - h.bin_width / 2.0 + (k as f64 + 0.5) * h.bin_width / SUB as f64, gamma))
                .sum();
            total * s * h.bin_width / SUB as f64
        })
        .collect()
}

/// Least-squares width of a Lorentzian whose area is pinned to the histogram total.
/// Golden-section search over ln Γ; the width is floored at one bin.
pub fn lorentzian_fit(h: &LdosHistogram) -> Result<LorentzianFit> {
    if h.weights.iter().filter(|w| **w > 0.0).count() < 1 || h.centers.len() < 8 {
        return domain("Lorentzian fit needs at least 8 bins with weight");
    }
    let total = h.total();
    if !(total > 0.0) {
        return domain("histogram carries no weight");
    }
    let cost = |lg: f64| -> f64 {
        let m = lorentzian_bins(h, lg.exp());
        m.iter().zip(&h.weights).map(|(a, b)| (a - b).powi(2)).sum()
    };
    let floor = h.bin_width;
    let (mut lo, mut hi) = (floor.ln(), (4.0 * TAU).ln());
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut c1, mut c2) = (cost(x1), cost(x2));
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        if c1 < c2 {
            hi = x2;
            x2 = x1;
            c2 = c1;
            x1 = hi - r * (hi - lo);
            c1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            c1 = c2;
            x2 = lo + r * (hi - lo);
            c2 = cost(x2);
        }
    }
    let lg = 0.5 * (lo + hi);
    let gamma = lg.exp();
    let norm: f64 = h.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    let residual = cost(lg).sqrt() / norm;
    Ok(LorentzianFit {
        gamma: gamma.max(floor),
        residual,
        at_floor: gamma <= floor * (1.0 + 1e-6),
        converged: residual < 0.5,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitKind {
    Exponential,
    Gaussian,
    Power,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub start: u64,
    pub end: u64,
}

impl FitWindow {
    pub fn new(start: u64, end: u64) -> Self {
        Self { start, end }
    }
}

/// Exponential: rate γ in e^{-γt}; Gaussian: σ in e^{-(σt)²}; power: exponent d in t^d.
/// `offset` is the intercept of the log-linear fit, `residual` the RMS log misfit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: FitKind,
    pub rate: f64,
    pub offset: f64,
    pub window: [u64; 2],
    pub residual: f64,
    pub r_squared: f64,
}

impl FitResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("fit results serialize")
    }
}

/// [2, t_sat) where t_sat is the first recorded time with value below 5·floor.
pub fn saturation_window(series: &EchoSeries, floor: f64) -> FitWindow {
    let end = series
        .times
        .iter()
        .zip(&series.values)
        .find(|(t, v)| **t >= 2 && **v < 5.0 * floor)
        .map_or_else(|| series.times.last().copied().unwrap_or(0), |(t, _)| t.saturating_sub(1));
    FitWindow::new(2, end)
}

struct Line {
    slope: f64,
    intercept: f64,
    rms: f64,
    r2: f64,
}

fn least_squares(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - ss / syy } else { 1.0 };
    Line { slope, intercept, rms: (ss / n).sqrt(), r2 }
}

fn fit(series: &EchoSeries, window: FitWindow, kind: FitKind) -> Result<FitResult> {
    if window.end < window.start {
        return Err(Error::Fit(format!("empty window [{}, {}]", window.start, window.end)));
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (&t, &v) in series.times.iter().zip(&series.values) {
        if t < window.start || t > window.end {
            continue;
        }
        if !(v > 0.0) {
            return Err(Error::Fit(format!("non-positive value {v} at t = {t}")));
        }
        let tf = t as f64;
        xs.push(match kind {
            FitKind::Exponential => tf,
            FitKind::Gaussian => tf * tf,
            FitKind::Power => {
                if t == 0 {
                    return Err(Error::Fit("power-law window must start after t = 0".into()));
                }
                tf.ln()
            }
        });
        ys.push(v.ln());
    }
    if xs.len() < 4 {
        return Err(Error::Fit(format!("{} points in window, need 4", xs.len())));
    }
    let l = least_squares(&xs, &ys);
    let rate = match kind {
        FitKind::Exponential => -l.slope,
        FitKind::Gaussian => (-l.slope).max(0.0).sqrt(),
        FitKind::Power => l.slope,
    };
    Ok(FitResult {
        kind,
        rate,
        offset: l.intercept,
        window: [window.start, window.end],
        residual: l.rms,
        r_squared: l.r2,
    })
}

pub fn fit_exponential(series: &EchoSeries, window: FitWindow) -> Result<FitResult> {
    fit(series, window, FitKind::Exponential)
}

pub fn fit_gaussian(series: &EchoSeries, window: FitWindow) -> Result<FitResult> {
    fit(series, window, FitKind::Gaussian)
}

pub fn fit_power(series: &EchoSeries, window: FitWindow) -> Result<FitResult> {
    fit(series, window, FitKind::Power)
}

/// Like the plain fitters but rejects windows that reach within 3× of the floor.
pub fn fit_above_floor(series: &EchoSeries, window: FitWindow, kind: FitKind, floor: f64) -> Result<FitResult> {
    for (&t, &v) in series.times.iter().zip(&series.values) {
        if t >= window.start && t <= window.end && v <= 3.0 * floor {
            return Err(Error::Fit(format!("value {v} at t = {t} within 3× of the floor {floor}")));
        }
    }
    fit(series, window, kind)
}
