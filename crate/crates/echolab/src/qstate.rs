//! States and density matrices on the torus grid and on the spin ladder.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::{Error, Result, C64};

/// Largest dimension for which a dense density matrix is built.
pub const DENSE_GUARD: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return domain(format!("torus dimension must be at least 2, got {n}"));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hbar_eff(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Lattice spacing 2π/N, shared by positions and momenta.
    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn x(&self, l: usize) -> f64 {
        TAU * l as f64 / self.n as f64
    }

    pub fn p(&self, l: usize) -> f64 {
        self.x(l)
    }

    /// Width of the coherent state with equal position and momentum spread.
    pub fn coherent_width(&self) -> f64 {
        self.spacing().sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    TorusPosition(TorusGrid),
    /// |S,m⟩ ladder stored from m = S down to m = -S; `two_s` = 2S.
    SpinLadder { two_s: u32 },
    /// Joint position grid of two rotators, first index slowest.
    Product(TorusGrid, TorusGrid),
    Generic(usize),
}

impl Basis {
    pub fn dim(&self) -> usize {
        match *self {
            Basis::TorusPosition(g) => g.n(),
            Basis::SpinLadder { two_s } => two_s as usize + 1,
            Basis::Product(a, b) => a.n() * b.n(),
            Basis::Generic(d) => d,
        }
    }

    pub fn spin(two_s: u32) -> Self {
        Basis::SpinLadder { two_s }
    }
}

pub(crate) fn check_basis(a: &Basis, b: &Basis) -> Result<()> {
    if a != b {
        return Err(Error::Basis(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
    basis: Basis,
}

impl StateVector {
    /// Normalizes the amplitudes; rejects a zero vector or a length that does not fit the basis.
    pub fn new(mut amps: Vec<C64>, basis: Basis) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::Basis(format!(
                "{} amplitudes for a basis of dimension {}",
                amps.len(),
                basis.dim()
            )));
        }
        let nrm = norm_sqr(&amps).sqrt();
        if !(nrm.is_finite() && nrm > 0.0) {
            return domain("state has zero or non-finite norm");
        }
        amps.iter_mut().for_each(|z| *z /= nrm);
        Ok(Self { amps, basis })
    }

    pub fn basis_state(basis: Basis, index: usize) -> Result<Self> {
        if index >= basis.dim() {
            return domain(format!("basis index {index} out of range"));
        }
        let mut amps = vec![C64::new(0.0, 0.0); basis.dim()];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { amps, basis })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_basis(&self.basis, &other.basis)?;
        Ok(dot(&self.amps, &other.amps))
    }

    /// Same amplitudes under a different label of equal dimension.
    pub fn relabel(self, basis: Basis) -> Result<Self> {
        if basis.dim() != self.dim() {
            return Err(Error::Basis(format!("cannot relabel {:?} as {basis:?}", self.basis)));
        }
        Ok(Self { amps: self.amps, basis })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    /// |a⟩⊗|b⟩ on the joint torus grid.
    pub fn product(a: &StateVector, b: &StateVector) -> Result<Self> {
        let (Basis::TorusPosition(ga), Basis::TorusPosition(gb)) = (a.basis, b.basis) else {
            return Err(Error::Basis("product states need two torus factors".into()));
        };
        let mut amps = Vec::with_capacity(a.dim() * b.dim());
        for x in &a.amps {
            amps.extend(b.amps.iter().map(|y| x * y));
        }
        Ok(Self { amps, basis: Basis::Product(ga, gb) })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<C64>,
    basis: Basis,
}

impl DensityMatrix {
    /// Validates hermiticity and unit trace (1e-10) on a row-major matrix.
    pub fn from_entries(basis: Basis, data: Vec<C64>) -> Result<Self> {
        let dim = basis.dim();
        if data.len() != dim * dim {
            return Err(Error::Basis(format!("{} entries for dimension {dim}", data.len())));
        }
        let rho = Self { dim, data, basis };
        if rho.hermiticity_defect() > 1e-10 {
            return domain("density matrix is not Hermitian");
        }
        if (rho.trace() - 1.0).abs() > 1e-10 {
            return domain("density matrix does not have unit trace");
        }
        Ok(rho)
    }

    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        guard(psi.dim())?;
        let dim = psi.dim();
        let a = psi.amplitudes();
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            data.extend(a.iter().map(|aj| a[i] * aj.conj()));
        }
        Ok(Self { dim, data, basis: psi.basis() })
    }

    /// Σ_k w_k |ψ_k⟩⟨ψ_k| with the weights renormalized to sum to one.
    pub fn from_ensemble(ens: &PureEnsemble) -> Result<Self> {
        let basis = ens.states[0].basis();
        let dim = basis.dim();
        guard(dim)?;
        let total: f64 = ens.weights.iter().sum();
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for (w, psi) in ens.weights.iter().zip(&ens.states) {
            let a = psi.amplitudes();
            let w = w / total;
            for i in 0..dim {
                let ai = a[i] * w;
                for (d, aj) in data[i * dim..(i + 1) * dim].iter_mut().zip(a) {
                    *d += ai * aj.conj();
                }
            }
        }
        Ok(Self { dim, data, basis })
    }

    pub fn maximally_mixed(basis: Basis) -> Result<Self> {
        let dim = basis.dim();
        guard(dim)?;
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self { dim, data, basis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// ⟨a|ρ|b⟩
    pub fn matrix_element(&self, a: &StateVector, b: &StateVector) -> Result<C64> {
        check_basis(&self.basis, &a.basis())?;
        check_basis(&self.basis, &b.basis())?;
        let (a, b) = (a.amplitudes(), b.amplitudes());
        let mut acc = C64::new(0.0, 0.0);
        for (row, ai) in self.data.chunks_exact(self.dim).zip(a) {
            let rb: C64 = row.iter().zip(b).map(|(r, y)| r * y).sum();
            acc += ai.conj() * rb;
        }
        Ok(acc)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).collect()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let n = self.dim;
        let m = faer::Mat::<C64>::from_fn(n, n, |i, j| self.data[i * n + j]);
        let ev = m
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|_| Error::Eigen)?;
        Ok(ev.into_iter().fold(f64::INFINITY, f64::min))
    }
}

fn guard(dim: usize) -> Result<()> {
    if dim > DENSE_GUARD {
        return Err(Error::DimGuard { dim, max: DENSE_GUARD });
    }
    Ok(())
}

/// Equal-footing list of pure states with weights; the cheap form of a mixture.
#[derive(Clone, Debug)]
pub struct PureEnsemble {
    pub weights: Vec<f64>,
    pub states: Vec<StateVector>,
}

impl PureEnsemble {
    pub fn new(weights: Vec<f64>, states: Vec<StateVector>) -> Result<Self> {
        if states.is_empty() || weights.len() != states.len() {
            return domain("ensemble needs one weight per state and at least one state");
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || weights.iter().sum::<f64>() <= 0.0 {
            return domain("ensemble weights must be non-negative with positive sum");
        }
        for s in &states[1..] {
            check_basis(&states[0].basis(), &s.basis())?;
        }
        Ok(Self { weights, states })
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        DensityMatrix::from_ensemble(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavepacketSpec {
    pub x0: f64,
    pub p0: f64,
    pub nu: f64,
}

impl WavepacketSpec {
    pub fn new(x0: f64, p0: f64, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return domain(format!("wavepacket width must be positive, got {nu}"));
        }
        for (name, v) in [("x0", x0), ("p0", p0)] {
            if !(0.0..TAU).contains(&v) {
                return domain(format!("{name} = {v} outside [0, 2π)"));
            }
        }
        Ok(Self { x0, p0, nu })
    }

    /// Coherent-state packet; centers are wrapped onto the torus.
    pub fn coherent(grid: &TorusGrid, x0: f64, p0: f64) -> Result<Self> {
        Self::new(wrap(x0), wrap(p0), grid.coherent_width())
    }
}

pub(crate) fn wrap(v: f64) -> f64 {
    let w = v.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Periodic Gaussian, summed over winding images until they drop below 1e-14 in amplitude.
pub fn gaussian_torus(grid: &TorusGrid, spec: &WavepacketSpec) -> Result<StateVector> {
    let WavepacketSpec { x0, p0, nu } = WavepacketSpec::new(spec.x0, spec.p0, spec.nu)?;
    if nu > PI {
        return domain(format!("width {nu} exceeds π; the packet is not localized"));
    }
    let n = grid.n();
    let k0 = p0 * n as f64 / TAU;
    // image w sits at least 2π(|w|-1) away from every lattice point
    let mut wmax = 1i64;
    while (-(TAU * wmax as f64).powi(2) / (2.0 * nu * nu)).exp() >= 1e-14 {
        wmax += 1;
    }
    let amps = (0..n)
        .map(|l| {
            let x = grid.x(l);
            (-wmax..=wmax)
                .map(|w| {
                    let d = x + TAU * w as f64 - x0;
                    C64::from_polar((-d * d / (2.0 * nu * nu)).exp(), k0 * d)
                })
                .sum()
        })
        .collect();
    StateVector::new(amps, Basis::TorusPosition(*grid))
}

/// The four cardinal packets of a compass: (x0±r0, p0) and (x0, p0±dp).
pub fn compass_components(
    grid: &TorusGrid,
    spec: &WavepacketSpec,
    r0: f64,
    dp: f64,
) -> Result<[StateVector; 4]> {
    let centers = [
        (spec.x0 + r0, spec.p0),
        (spec.x0 - r0, spec.p0),
        (spec.x0, spec.p0 + dp),
        (spec.x0, spec.p0 - dp),
    ];
    let mut out = Vec::with_capacity(4);
    for (x, p) in centers {
        out.push(gaussian_torus(grid, &WavepacketSpec::new(wrap(x), wrap(p), spec.nu)?)?);
    }
    Ok(out.try_into().expect("four components"))
}

/// Largest |⟨a|b⟩| among distinct compass components.
pub fn compass_overlap(parts: &[StateVector; 4]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in i + 1..4 {
            worst = worst.max(dot(parts[i].amplitudes(), parts[j].amplitudes()).norm());
        }
    }
    worst
}

/// Coherent compass superposition. Always renormalized exactly, so overlapping
/// packets (small r0) still give a unit vector.
pub fn compass_pure(
    grid: &TorusGrid,
    spec: &WavepacketSpec,
    r0: f64,
    dp: f64,
) -> Result<StateVector> {
    let parts = compass_components(grid, spec, r0, dp)?;
    let mut amps = vec![C64::new(0.0, 0.0); grid.n()];
    for p in &parts {
        for (a, b) in amps.iter_mut().zip(p.amplitudes()) {
            *a += b;
        }
    }
    StateVector::new(amps, Basis::TorusPosition(*grid))
}

pub fn compass_ensemble(
    grid: &TorusGrid,
    spec: &WavepacketSpec,
    r0: f64,
    dp: f64,
) -> Result<PureEnsemble> {
    let parts = compass_components(grid, spec, r0, dp)?;
    PureEnsemble::new(vec![0.25; 4], parts.into())
}

pub fn compass_mixture(
    grid: &TorusGrid,
    spec: &WavepacketSpec,
    r0: f64,
    dp: f64,
) -> Result<DensityMatrix> {
    compass_ensemble(grid, spec, r0, dp)?.to_density()
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(n + 1);
    t.push(0.0);
    for k in 1..=n {
        t.push(t[k - 1] + (k as f64).ln());
    }
    t
}

/// Validates a spin length and returns 2S.
pub fn two_s(s: f64) -> Result<u32> {
    let t = 2.0 * s;
    if !(s >= 0.5) || (t - t.round()).abs() > 1e-9 || t > 1e7 {
        return domain(format!("spin {s} is not a positive half-integer"));
    }
    Ok(t.round() as u32)
}

/// |θ,φ⟩ from the binomial amplitudes, evaluated in log space.
pub fn spin_coherent(s: f64, theta: f64, phi: f64) -> Result<StateVector> {
    let ts = two_s(s)?;
    if !theta.is_finite() || !phi.is_finite() {
        return domain("non-finite angle");
    }
    let n = ts as usize;
    let lf = ln_factorials(n);
    let (c, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let (lc, ls) = (c.abs().ln(), sn.abs().ln());
    let amps = (0..=n)
        .map(|i| {
            // i = S - m, so S + m = 2S - i
            let up = n - i;
            let m = s - i as f64;
            let mut lmag = 0.5 * (lf[n] - lf[up] - lf[i]);
            if up > 0 {
                lmag += up as f64 * lc;
            }
            if i > 0 {
                lmag += i as f64 * ls;
            }
            let sign = if (c < 0.0 && up % 2 == 1) ^ (sn < 0.0 && i % 2 == 1) { -1.0 } else { 1.0 };
            C64::from_polar(sign * lmag.exp(), -m * phi)
        })
        .collect();
    StateVector::new(amps, Basis::spin(ts))
}

pub fn overlap(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    First,
    Second,
}

pub fn partial_trace(
    rho: &DensityMatrix,
    n1: usize,
    n2: usize,
    keep: Subsystem,
) -> Result<DensityMatrix> {
    if n1 == 0 || n2 == 0 || n1 * n2 != rho.dim() {
        return Err(Error::Basis(format!(
            "dimension {} does not factor as {n1}×{n2}",
            rho.dim()
        )));
    }
    let d = rho.dim();
    let r = rho.entries();
    let zero = C64::new(0.0, 0.0);
    let (kd, basis) = match (keep, rho.basis()) {
        (Subsystem::First, Basis::Product(g, _)) => (n1, Basis::TorusPosition(g)),
        (Subsystem::Second, Basis::Product(_, g)) => (n2, Basis::TorusPosition(g)),
        (Subsystem::First, _) => (n1, Basis::Generic(n1)),
        (Subsystem::Second, _) => (n2, Basis::Generic(n2)),
    };
    let mut out = vec![zero; kd * kd];
    match keep {
        Subsystem::First => {
            for i in 0..n1 {
                for j in 0..n1 {
                    out[i * n1 + j] = (0..n2).map(|k| r[(i * n2 + k) * d + j * n2 + k]).sum();
                }
            }
        }
        Subsystem::Second => {
            for i in 0..n2 {
                for j in 0..n2 {
                    out[i * n2 + j] = (0..n1).map(|k| r[(k * n2 + i) * d + k * n2 + j]).sum();
                }
            }
        }
    }
    Ok(DensityMatrix { dim: kd, data: out, basis })
}

/// Tr ρ² in Frobenius form.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.entries().iter().map(|z| z.norm_sqr()).sum()
}

/// Independent complex Gaussians from ChaCha20 seeded with `seed`, normalized.
pub fn random_state(dim: usize, seed: u64) -> Result<StateVector> {
    if dim == 0 {
        return domain("random state needs dim ≥ 1");
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let amps = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        })
        .collect();
    StateVector::new(amps, Basis::Generic(dim))
}
