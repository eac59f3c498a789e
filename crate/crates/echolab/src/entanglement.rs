//! Purity of coupled rotators and the spin-1/2 dephasing toy model.

use std::collections::BTreeMap;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{CoupledRotatorFloquet, Floquet};
use crate::echoes::{EchoMeta, InitialSampler};
use crate::error::domain;
use crate::linalg::{columns, hermitian_eigen, SpectralPair};
use crate::qstate::{Basis, DensityMatrix, StateVector, Subsystem, TorusGrid, DENSE_GUARD};
use crate::{Error, Result, C64};

/// Pure state on the joint grid of two rotators, first index slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    psi: StateVector,
    g1: TorusGrid,
    g2: TorusGrid,
}

impl BipartiteState {
    pub fn product(a: &StateVector, b: &StateVector) -> Result<Self> {
        Self::from_state(StateVector::product(a, b)?)
    }

    pub fn from_state(psi: StateVector) -> Result<Self> {
        let Basis::Product(g1, g2) = psi.basis() else {
            return Err(Error::Basis("bipartite states live on a product grid".into()));
        };
        Ok(Self { psi, g1, g2 })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.g1.n(), self.g2.n())
    }

    pub fn state(&self) -> &StateVector {
        &self.psi
    }

    pub fn into_state(self) -> StateVector {
        self.psi
    }

    fn gram(&self, keep: Subsystem) -> Mat<C64> {
        gram(self.psi.amplitudes(), self.g1.n(), self.g2.n(), keep)
    }
}

/// ρ1 = M M† or ρ2 = (M†M)ᵀ for the amplitude matrix M[i1, i2].
fn gram(a: &[C64], n1: usize, n2: usize, keep: Subsystem) -> Mat<C64> {
    let m = Mat::from_fn(n1, n2, |i, j| a[i * n2 + j]);
    match keep {
        Subsystem::First => &m * m.adjoint(),
        Subsystem::Second => m.transpose() * m.conjugate(),
    }
}

fn frobenius_sqr(m: &Mat<C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s
}

/// Tr ρ1² through the smaller Gram matrix; equals Tr ρ2² exactly in theory.
pub fn bipartite_purity(state: &BipartiteState) -> f64 {
    let (n1, n2) = state.dims();
    let keep = if n1 <= n2 { Subsystem::First } else { Subsystem::Second };
    frobenius_sqr(&state.gram(keep))
}

pub fn subsystem_purity(state: &BipartiteState, keep: Subsystem) -> f64 {
    frobenius_sqr(&state.gram(keep))
}

/// Partial trace of |ψ⟩⟨ψ| contracted directly from the amplitudes.
pub fn reduced_density(state: &BipartiteState, keep: Subsystem) -> Result<DensityMatrix> {
    let (g, n) = match keep {
        Subsystem::First => (state.g1, state.g1.n()),
        Subsystem::Second => (state.g2, state.g2.n()),
    };
    if n > DENSE_GUARD {
        return Err(Error::DimGuard { dim: n, max: DENSE_GUARD });
    }
    let m = state.gram(keep);
    let data = (0..n * n).map(|k| m[(k / n, k % n)]).collect();
    DensityMatrix::from_entries(Basis::TorusPosition(g), data)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PuritySeries {
    pub times: Vec<u64>,
    pub values: Vec<f64>,
    pub meta: EchoMeta,
}

fn meta(f: &CoupledRotatorFloquet) -> EchoMeta {
    let (k1, k2, eps) = f.params();
    let (g1, g2) = f.grids();
    EchoMeta {
        observable: "purity".into(),
        params: BTreeMap::from([
            ("K1".into(), k1),
            ("K2".into(), k2),
            ("eps".into(), eps),
            ("N1".into(), g1.n() as f64),
            ("N2".into(), g2.n() as f64),
        ]),
        seed: None,
    }
}

/// P(n) = Tr ρ1(n)² for n = 0..=n_max from the product state ψ1⊗ψ2.
pub fn purity_series(
    psi1: &StateVector,
    psi2: &StateVector,
    f: &CoupledRotatorFloquet,
    n_max: usize,
) -> Result<PuritySeries> {
    let mut st = BipartiteState::product(psi1, psi2)?;
    if st.psi.basis() != f.basis() {
        return Err(Error::Basis("initial state does not match the coupled engine".into()));
    }
    let mut values = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            f.step(st.psi.amplitudes_mut());
        }
        values.push(bipartite_purity(&st).min(1.0));
    }
    Ok(PuritySeries { times: (0..=n_max as u64).collect(), values, meta: meta(f) })
}

/// Mean purity over product coherent states with uniformly drawn centers.
/// Sample i draws particle 1 from stream 2i and particle 2 from stream 2i+1.
pub fn mean_purity(f: &CoupledRotatorFloquet, n_max: usize, n_samples: usize, seed: u64) -> Result<PuritySeries> {
    if n_samples == 0 {
        return domain("mean purity needs at least one sample");
    }
    let (g1, g2) = f.grids();
    let s1 = InitialSampler::TorusCoherent { grid: g1 };
    let s2 = InitialSampler::TorusCoherent { grid: g2 };
    let rows: Vec<Vec<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let a = s1.sample(seed, 2 * i)?;
            let b = s2.sample(seed, 2 * i + 1)?;
            Ok(purity_series(&a, &b, f, n_max)?.values)
        })
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; n_max + 1];
    for r in &rows {
        values.iter_mut().zip(r).for_each(|(v, x)| *v += x / n_samples as f64);
    }
    let mut m = meta(f);
    m.seed = Some(seed);
    m.params.insert("n_samples".into(), n_samples as f64);
    Ok(PuritySeries { times: (0..=n_max as u64).collect(), values, meta: m })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpinToyResult {
    pub f: Vec<C64>,
    pub purity: Vec<f64>,
}

fn check_hermitian(h: &Mat<C64>, name: &str) -> Result<()> {
    let scale = frobenius_sqr(h).sqrt().max(1.0);
    for i in 0..h.nrows() {
        for j in 0..h.ncols() {
            if (h[(i, j)] - h[(j, i)].conj()).norm() > 1e-12 * scale {
                return domain(format!("{name} is not Hermitian"));
            }
        }
    }
    Ok(())
}

/// Spin-1/2 coupled to a d-level environment, spin up/down feeling H_env + H_↑/↓.
/// f(t) = ⟨φ0|e^{i(H_env+H_↓)t} e^{-i(H_env+H_↑)t}|φ0⟩ and
/// P(t) = |α|⁴ + |β|⁴ + 2|α|²|β|²|f(t)|².
pub fn spin_dephasing_toy(
    alpha: C64,
    beta: C64,
    h_env: &Mat<C64>,
    h_up: &Mat<C64>,
    h_down: &Mat<C64>,
    phi0: &StateVector,
    times: &[f64],
) -> Result<SpinToyResult> {
    let d = phi0.dim();
    if d > 512 {
        return Err(Error::DimGuard { dim: d, max: 512 });
    }
    for (h, name) in [(h_env, "H_env"), (h_up, "H_up"), (h_down, "H_down")] {
        if h.nrows() != d || h.ncols() != d {
            return Err(Error::Basis(format!("{name} is not {d}×{d}")));
        }
        check_hermitian(h, name)?;
    }
    let (pa, pb) = (alpha.norm_sqr(), beta.norm_sqr());
    if (pa + pb - 1.0).abs() > 1e-12 {
        return domain("|α|² + |β|² must equal 1");
    }
    let hu = h_env + h_up;
    let hd = h_env + h_down;
    let (eu, vu) = hermitian_eigen(hu.as_ref())?;
    let (ed, vd) = hermitian_eigen(hd.as_ref())?;
    let pair = SpectralPair::new(ed, vd, eu, vu);
    let col = columns(&[phi0.amplitudes()]);
    let st = pair.project(col.as_ref(), col.as_ref());
    let f: Vec<C64> = times.iter().map(|&t| pair.amplitudes(&st, t)[0]).collect();
    let purity = f.iter().map(|z| pa * pa + pb * pb + 2.0 * pa * pb * z.norm_sqr()).collect();
    Ok(SpinToyResult { f, purity })
}
