use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use faer::{Mat, Side};

use super::{Floquet, UnitaryMatrix};
use crate::error::domain;
use crate::qstate::{two_s, Basis};
use crate::{Error, Result, C64};

/// Eigenbasis of S_x for one spin length, shared between the perturbed and
/// unperturbed tops. S_x is real tridiagonal in the |S,m⟩ basis and
/// S_y = D S_x D† with D = diag(e^{-iπm/2}), so one real diagonalization serves both.
pub struct SxEigenbasis {
    two_s: u32,
    q: Mat<f64>,
    lambda: Vec<f64>,
    d: Vec<C64>,
}

impl SxEigenbasis {
    pub fn new(s: f64) -> Result<Arc<Self>> {
        let ts = two_s(s)?;
        let n = ts as usize + 1;
        let off = sx_offdiag(ts);
        let sx = Mat::<f64>::from_fn(n, n, |i, j| {
            if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        });
        let eig = sx.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
        let lambda = eig.S().column_vector().iter().copied().collect();
        let q = eig.U().to_owned();
        let d = (0..n)
            .map(|i| C64::from_polar(1.0, -FRAC_PI_2 * m_of(ts, i)))
            .collect();
        Ok(Arc::new(Self { two_s: ts, q, lambda, d }))
    }

    pub fn spin(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_s as usize + 1
    }

    /// z ← exp(-iθ S_x) z, or with S_y when `about_y` is set.
    fn rotate(&self, z: &mut Mat<C64>, theta: f64, about_y: bool) {
        if about_y {
            scale(z, self.d.iter().map(|c| c.conj()));
        }
        real_left_mul(self.q.transpose(), z);
        scale(z, self.lambda.iter().map(|l| C64::from_polar(1.0, -theta * l)));
        real_left_mul(self.q.as_ref(), z);
        if about_y {
            scale(z, self.d.iter().copied());
        }
    }
}

fn m_of(two_s: u32, i: usize) -> f64 {
    two_s as f64 / 2.0 - i as f64
}

/// ⟨m+1|S_x|m⟩ along the ladder stored from m = S downwards.
fn sx_offdiag(two_s: u32) -> Vec<f64> {
    let s = two_s as f64 / 2.0;
    (0..two_s as usize)
        .map(|i| {
            let m = m_of(two_s, i + 1);
            0.5 * (s * (s + 1.0) - m * (m + 1.0)).sqrt()
        })
        .collect()
}

/// (S_x, S_y, S_z) as dense matrices on the ladder m = S..-S.
pub fn spin_matrices(s: f64) -> Result<[Mat<C64>; 3]> {
    let ts = two_s(s)?;
    let n = ts as usize + 1;
    let off = sx_offdiag(ts);
    let sx = Mat::from_fn(n, n, |i, j| match () {
        _ if i + 1 == j => C64::new(off[i], 0.0),
        _ if j + 1 == i => C64::new(off[j], 0.0),
        _ => C64::new(0.0, 0.0),
    });
    // S_y = (S+ - S-)/2i, S+ raises m, i.e. moves to the lower index
    let sy = Mat::from_fn(n, n, |i, j| match () {
        _ if i + 1 == j => C64::new(0.0, -off[i]),
        _ if j + 1 == i => C64::new(0.0, off[j]),
        _ => C64::new(0.0, 0.0),
    });
    let sz = Mat::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(m_of(ts, i), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok([sx, sy, sz])
}

fn scale(z: &mut Mat<C64>, f: impl Iterator<Item = C64>) {
    for (i, c) in f.enumerate() {
        for j in 0..z.ncols() {
            z[(i, j)] *= c;
        }
    }
}

fn real_left_mul(q: faer::MatRef<'_, f64>, z: &mut Mat<C64>) {
    let (n, m) = (z.nrows(), z.ncols());
    let x = Mat::<f64>::from_fn(n, 2 * m, |i, j| if j < m { z[(i, j)].re } else { z[(i, j - m)].im });
    let y = q * &x;
    for j in 0..m {
        for i in 0..n {
            z[(i, j)] = C64::new(y[(i, j)], y[(i, j + m)]);
        }
    }
}

/// Kicked top F = exp(-iφS_x) exp[-i(K/2S)S_z²] exp[-i(π/2)S_y].
#[derive(Clone)]
pub struct KickedTopFloquet {
    basis: Arc<SxEigenbasis>,
    k: f64,
    phi: f64,
    torsion: Vec<C64>,
}

impl KickedTopFloquet {
    pub fn new(s: f64, k: f64, phi: f64) -> Result<Self> {
        Self::with_basis(SxEigenbasis::new(s)?, k, phi)
    }

    pub fn with_basis(basis: Arc<SxEigenbasis>, k: f64, phi: f64) -> Result<Self> {
        if !k.is_finite() || !phi.is_finite() {
            return domain("top parameters must be finite");
        }
        let ts = basis.two_s;
        let s = basis.spin();
        let torsion = (0..basis.dim())
            .map(|i| {
                let m = m_of(ts, i);
                C64::from_polar(1.0, -k / (2.0 * s) * m * m)
            })
            .collect();
        Ok(Self { basis, k, phi, torsion })
    }

    /// Same spin and torsion with a different perturbation angle.
    pub fn perturbed(&self, phi: f64) -> Result<Self> {
        Self::with_basis(self.basis.clone(), self.k, phi)
    }

    pub fn spin(&self) -> f64 {
        self.basis.spin()
    }

    pub fn torsion(&self) -> f64 {
        self.k
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Applies one period to every column.
    pub fn step_columns(&self, z: &mut Mat<C64>) {
        self.basis.rotate(z, FRAC_PI_2, true);
        scale(z, self.torsion.iter().copied());
        if self.phi != 0.0 {
            self.basis.rotate(z, self.phi, false);
        }
    }

    pub fn step_columns_adjoint(&self, z: &mut Mat<C64>) {
        if self.phi != 0.0 {
            self.basis.rotate(z, -self.phi, false);
        }
        scale(z, self.torsion.iter().map(|c| c.conj()));
        self.basis.rotate(z, -FRAC_PI_2, true);
    }
}

fn with_column(a: &mut [C64], f: impl FnOnce(&mut Mat<C64>)) {
    let mut z = Mat::from_fn(a.len(), 1, |i, _| a[i]);
    f(&mut z);
    for (i, v) in a.iter_mut().enumerate() {
        *v = z[(i, 0)];
    }
}

impl Floquet for KickedTopFloquet {
    fn basis(&self) -> Basis {
        Basis::spin(self.basis.two_s)
    }

    fn step(&self, a: &mut [C64]) {
        with_column(a, |z| self.step_columns(z));
    }

    fn step_adjoint(&self, a: &mut [C64]) {
        with_column(a, |z| self.step_columns_adjoint(z));
    }

    fn build_dense(&self) -> UnitaryMatrix {
        let n = self.basis.dim();
        let mut z = Mat::<C64>::identity(n, n);
        self.step_columns(&mut z);
        z
    }
}
