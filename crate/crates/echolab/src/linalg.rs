//! Dense helpers on top of faer.

use std::f64::consts::{PI, TAU};

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef, Side};

use crate::{Error, Result, C64};

pub(crate) fn max_abs_diff(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// max |U†U - I|
pub(crate) fn unitarity_defect(u: MatRef<'_, C64>) -> f64 {
    let p = u.adjoint() * u;
    let id = Mat::<C64>::identity(u.nrows(), u.ncols());
    max_abs_diff(p.as_ref(), id.as_ref())
}

pub(crate) struct UnitaryEigen {
    /// eigenphases in (-π, π], so that U v = e^{iθ} v
    pub phases: Vec<f64>,
    pub vectors: Mat<C64>,
}

/// Eigendecomposition of a unitary with an orthonormal eigenbasis.
///
/// The spectrum is located with a general eigenvalue pass, rotated so that the
/// widest gap sits at -1, and mapped to a Hermitian matrix by the Cayley
/// transform. The Hermitian solver keeps near-degenerate eigenvectors
/// orthogonal; phases are recovered from Rayleigh quotients on the original U.
pub(crate) fn unitary_eigen(u: MatRef<'_, C64>) -> Result<UnitaryEigen> {
    let n = u.nrows();
    if n == 1 {
        return Ok(UnitaryEigen {
            phases: vec![u[(0, 0)].arg()],
            vectors: Mat::identity(1, 1),
        });
    }
    let ev = u.eigenvalues().map_err(|_| Error::Eigen)?;
    let mut ph: Vec<f64> = ev.iter().map(|z| z.arg()).collect();
    ph.sort_by(f64::total_cmp);
    let (mut best, mut centre) = (ph[0] + TAU - ph[n - 1], ph[n - 1] + 0.5 * (ph[0] + TAU - ph[n - 1]));
    for w in ph.windows(2) {
        if w[1] - w[0] > best {
            best = w[1] - w[0];
            centre = 0.5 * (w[0] + w[1]);
        }
    }
    // e^{-iα} U has the gap centre at π
    let rot = C64::from_polar(1.0, PI - centre);
    let one = C64::new(1.0, 0.0);
    let up = Mat::from_fn(n, n, |i, j| u[(i, j)] * rot + if i == j { one } else { C64::new(0.0, 0.0) });
    let um = Mat::from_fn(n, n, |i, j| u[(i, j)] * rot - if i == j { one } else { C64::new(0.0, 0.0) });
    let x = up.partial_piv_lu().solve(&um);
    // H = -i X, symmetrised
    let h = Mat::from_fn(n, n, |i, j| {
        let a = x[(i, j)] * C64::new(0.0, -1.0);
        let b = (x[(j, i)] * C64::new(0.0, -1.0)).conj();
        (a + b) * 0.5
    });
    let eig = h.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
    let vectors = eig.U().to_owned();
    let uv = u * &vectors;
    let phases = (0..n)
        .map(|k| {
            let mut q = C64::new(0.0, 0.0);
            for i in 0..n {
                q += vectors[(i, k)].conj() * uv[(i, k)];
            }
            q.arg()
        })
        .collect();
    Ok(UnitaryEigen { phases, vectors })
}

/// Hermitian eigendecomposition H = V diag(E) V†.
pub(crate) fn hermitian_eigen(h: MatRef<'_, C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    let eig = h.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
    let vals = eig.S().column_vector().iter().map(|z| z.re).collect();
    Ok((vals, eig.U().to_owned()))
}

/// Overlaps ⟨a_t|b_t⟩ where |a_t⟩ = e^{-i A t}|ψ⟩ and |b_t⟩ = e^{-i B t}|ψ'⟩,
/// evaluated in the two eigenbases: f(t) = (Λ_a^t a)† W (Λ_b^t b), W = V_a†V_b.
pub(crate) struct SpectralPair {
    ea: Vec<f64>,
    eb: Vec<f64>,
    w: Mat<C64>,
    va: Mat<C64>,
    vb: Mat<C64>,
}

pub(crate) struct SpectralStates {
    a: Mat<C64>,
    b: Mat<C64>,
}

impl SpectralPair {
    pub fn new(ea: Vec<f64>, va: Mat<C64>, eb: Vec<f64>, vb: Mat<C64>) -> Self {
        let w = va.adjoint() * &vb;
        Self { ea, eb, w, va, vb }
    }

    /// Projects column states onto both eigenbases; `left` evolves with A, `right` with B.
    pub fn project(&self, left: MatRef<'_, C64>, right: MatRef<'_, C64>) -> SpectralStates {
        SpectralStates { a: self.va.adjoint() * left, b: self.vb.adjoint() * right }
    }

    /// Shifts the right-hand states by extra evolution e^{-i B s}.
    pub fn advance_right(&self, st: &mut SpectralStates, s: f64) {
        scale_rows(&mut st.b, &self.eb, s);
    }

    /// Replaces the left components by those of the right-hand states, a = W b.
    pub fn reproject_left(&self, st: SpectralStates) -> SpectralStates {
        SpectralStates { a: &self.w * &st.b, b: st.b }
    }

    /// One amplitude per column at time t.
    pub fn amplitudes(&self, st: &SpectralStates, t: f64) -> Vec<C64> {
        let mut a = st.a.clone();
        let mut b = st.b.clone();
        scale_rows(&mut a, &self.ea, t);
        scale_rows(&mut b, &self.eb, t);
        let wb = &self.w * &b;
        (0..a.ncols())
            .map(|j| {
                let mut s = C64::new(0.0, 0.0);
                for i in 0..a.nrows() {
                    s += a[(i, j)].conj() * wb[(i, j)];
                }
                s
            })
            .collect()
    }
}

fn scale_rows(m: &mut Mat<C64>, e: &[f64], t: f64) {
    for (i, &ei) in e.iter().enumerate() {
        let ph = C64::from_polar(1.0, -ei * t);
        for j in 0..m.ncols() {
            m[(i, j)] *= ph;
        }
    }
}

pub(crate) fn columns(vs: &[&[C64]]) -> Mat<C64> {
    let n = vs.first().map_or(0, |v| v.len());
    Mat::from_fn(n, vs.len(), |i, j| vs[j][i])
}
