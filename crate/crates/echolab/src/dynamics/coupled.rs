use std::f64::consts::TAU;
use std::sync::Arc;

use faer::Mat;
use rustfft::{Fft, FftPlanner};

use super::rotator::{kinetic_dense, kinetic_phases};
use super::{Floquet, UnitaryMatrix};
use crate::error::domain;
use crate::qstate::{Basis, TorusGrid};
use crate::{Result, C64};

/// Phase offset inside the coupling sin(x1 - x2 - 0.33).
pub const COUPLING_OFFSET: f64 = 0.33;

/// Two kicked rotators coupled by ε sin(x1 - x2 - 0.33), evolved on the joint
/// N1×N2 position grid with a two-dimensional FFT per period.
///
/// The coupling phase is √(N1N2)·ε·sin(...), i.e. ε/ħ_eff with ħ_eff = 1/N for
/// equal dimensions, while the single-particle kicks keep the N K/2π scaling.
/// A backward engine conjugates the kinetic and kick phases of particle 1,
/// swaps their order so that it undoes a forward period exactly, and leaves
/// particle 2 and the coupling unreversed.
#[derive(Clone)]
pub struct CoupledRotatorFloquet {
    g1: TorusGrid,
    g2: TorusGrid,
    k1: f64,
    k2: f64,
    eps: f64,
    backward: bool,
    kick: Vec<C64>,
    // transposed layout [i2 * n1 + i1], normalization folded in
    kinetic_t: Vec<C64>,
    fft1: Arc<dyn Fft<f64>>,
    ifft1: Arc<dyn Fft<f64>>,
    fft2: Arc<dyn Fft<f64>>,
    ifft2: Arc<dyn Fft<f64>>,
}

impl CoupledRotatorFloquet {
    pub fn new(g1: TorusGrid, g2: TorusGrid, k1: f64, k2: f64, eps: f64) -> Result<Self> {
        Self::build(g1, g2, k1, k2, eps, false)
    }

    /// Engine for the return leg of a Boltzmann echo.
    pub fn backward(g1: TorusGrid, g2: TorusGrid, k1: f64, k2: f64, eps: f64) -> Result<Self> {
        Self::build(g1, g2, k1, k2, eps, true)
    }

    fn build(g1: TorusGrid, g2: TorusGrid, k1: f64, k2: f64, eps: f64, backward: bool) -> Result<Self> {
        if g1.n() % 2 != 0 || g2.n() % 2 != 0 {
            return domain("coupled rotators need even dimensions");
        }
        if ![k1, k2, eps].iter().all(|v| v.is_finite()) {
            return domain("coupled rotator parameters must be finite");
        }
        let (n1, n2) = (g1.n(), g2.n());
        let (f1, f2) = (n1 as f64, n2 as f64);
        let ce = (f1 * f2).sqrt() * eps;
        let mut kick = Vec::with_capacity(n1 * n2);
        for i1 in 0..n1 {
            let x1 = g1.x(i1);
            let mut p1 = -f1 * k1 / TAU * x1.cos();
            if backward {
                p1 = -p1;
            }
            for i2 in 0..n2 {
                let x2 = g2.x(i2);
                let ph = p1 - f2 * k2 / TAU * x2.cos() - ce * (x1 - x2 - COUPLING_OFFSET).sin();
                kick.push(C64::from_polar(1.0, ph));
            }
        }
        let mut l1 = kinetic_phases(n1);
        if backward {
            l1.iter_mut().for_each(|z| *z = z.conj());
        }
        let l2 = kinetic_phases(n2);
        let inv = 1.0 / (f1 * f2);
        let mut kinetic_t = Vec::with_capacity(n1 * n2);
        for b in &l2 {
            kinetic_t.extend(l1.iter().map(|a| a * b * inv));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            g1,
            g2,
            k1,
            k2,
            eps,
            backward,
            kick,
            kinetic_t,
            fft1: planner.plan_fft_forward(n1),
            ifft1: planner.plan_fft_inverse(n1),
            fft2: planner.plan_fft_forward(n2),
            ifft2: planner.plan_fft_inverse(n2),
        })
    }

    pub fn grids(&self) -> (TorusGrid, TorusGrid) {
        (self.g1, self.g2)
    }

    pub fn params(&self) -> (f64, f64, f64) {
        (self.k1, self.k2, self.eps)
    }

    pub fn is_backward(&self) -> bool {
        self.backward
    }

    fn free(&self, a: &mut [C64], conj: bool) {
        let (n1, n2) = (self.g1.n(), self.g2.n());
        self.fft2.process(a);
        let mut t = transpose(a, n1, n2);
        self.fft1.process(&mut t);
        if conj {
            t.iter_mut().zip(&self.kinetic_t).for_each(|(z, k)| *z *= k.conj());
        } else {
            t.iter_mut().zip(&self.kinetic_t).for_each(|(z, k)| *z *= k);
        }
        self.ifft1.process(&mut t);
        transpose_into(&t, a, n2, n1);
        self.ifft2.process(a);
    }

    fn kick(&self, a: &mut [C64], conj: bool) {
        if conj {
            a.iter_mut().zip(&self.kick).for_each(|(z, k)| *z *= k.conj());
        } else {
            a.iter_mut().zip(&self.kick).for_each(|(z, k)| *z *= k);
        }
    }
}

fn transpose(a: &[C64], rows: usize, cols: usize) -> Vec<C64> {
    let mut t = vec![C64::new(0.0, 0.0); a.len()];
    transpose_into(a, &mut t, rows, cols);
    t
}

fn transpose_into(a: &[C64], t: &mut [C64], rows: usize, cols: usize) {
    const B: usize = 32;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    t[c * rows + r] = a[r * cols + c];
                }
            }
        }
    }
}

impl Floquet for CoupledRotatorFloquet {
    fn basis(&self) -> Basis {
        Basis::Product(self.g1, self.g2)
    }

    fn step(&self, a: &mut [C64]) {
        if self.backward {
            self.free(a, false);
            self.kick(a, false);
        } else {
            self.kick(a, false);
            self.free(a, false);
        }
    }

    fn step_adjoint(&self, a: &mut [C64]) {
        if self.backward {
            self.kick(a, true);
            self.free(a, true);
        } else {
            self.free(a, true);
            self.kick(a, true);
        }
    }

    fn build_dense(&self) -> UnitaryMatrix {
        let (n1, n2) = (self.g1.n(), self.g2.n());
        let mut c1 = kinetic_dense(n1);
        if self.backward {
            c1 = Mat::from_fn(n1, n1, |i, j| c1[(i, j)].conj());
        }
        let c2 = kinetic_dense(n2);
        let n = n1 * n2;
        Mat::from_fn(n, n, |r, c| {
            let free = c1[(r / n2, c / n2)] * c2[(r % n2, c % n2)];
            if self.backward {
                self.kick[r] * free
            } else {
                free * self.kick[c]
            }
        })
    }
}
