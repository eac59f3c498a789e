use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::sync::Arc;

use faer::Mat;
use rustfft::{Fft, FftPlanner};

use super::{Floquet, UnitaryMatrix};
use crate::error::domain;
use crate::qstate::{Basis, TorusGrid};
use crate::{Result, C64};

/// Kicked rotator on the torus: kick exp[-i (NK/2π) cos x], then the free rotation.
#[derive(Clone)]
pub struct KickedRotatorFloquet {
    grid: TorusGrid,
    k: f64,
    kick: Vec<C64>,
    // e^{iπ/4} e^{-iπ m²/N} / N; the Gauss-sum phase makes the FFT path match
    // the position-space matrix elements exactly, 1/N undoes the unnormalized inverse FFT
    kinetic: Vec<C64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

pub(crate) fn kick_phases(grid: &TorusGrid, k: f64) -> Vec<C64> {
    let n = grid.n() as f64;
    (0..grid.n())
        .map(|l| C64::from_polar(1.0, -n * k / TAU * grid.x(l).cos()))
        .collect()
}

/// Eigenvalues of the circulant free-rotation matrix, m = 0..N-1.
pub(crate) fn kinetic_phases(n: usize) -> Vec<C64> {
    (0..n)
        .map(|m| {
            // reduce m² mod 2N before scaling to keep the phase argument small
            let r = ((m as u128 * m as u128) % (2 * n as u128)) as f64;
            C64::from_polar(1.0, FRAC_PI_4 - PI * r / n as f64)
        })
        .collect()
}

/// (1/√N) exp[iπ(l-l')²/N]
pub(crate) fn kinetic_dense(n: usize) -> Mat<C64> {
    let s = 1.0 / (n as f64).sqrt();
    Mat::from_fn(n, n, |l, lp| {
        let d = l.abs_diff(lp) as u128;
        let r = ((d * d) % (2 * n as u128)) as f64;
        C64::from_polar(s, PI * r / n as f64)
    })
}

impl KickedRotatorFloquet {
    pub fn new(grid: TorusGrid, k: f64) -> Result<Self> {
        if grid.n() % 2 != 0 {
            return domain(format!("rotator needs an even dimension, got {}", grid.n()));
        }
        if !k.is_finite() {
            return domain("kick strength must be finite");
        }
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let inv = 1.0 / n as f64;
        Ok(Self {
            grid,
            k,
            kick: kick_phases(&grid, k),
            kinetic: kinetic_phases(n).into_iter().map(|z| z * inv).collect(),
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        })
    }

    /// Same grid and plans, different kick strength.
    pub fn with_kick(&self, k: f64) -> Result<Self> {
        if !k.is_finite() {
            return domain("kick strength must be finite");
        }
        Ok(Self { k, kick: kick_phases(&self.grid, k), ..self.clone() })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn kick_strength(&self) -> f64 {
        self.k
    }
}

impl Floquet for KickedRotatorFloquet {
    fn basis(&self) -> Basis {
        Basis::TorusPosition(self.grid)
    }

    fn step(&self, a: &mut [C64]) {
        a.iter_mut().zip(&self.kick).for_each(|(z, k)| *z *= k);
        self.fft.process(a);
        a.iter_mut().zip(&self.kinetic).for_each(|(z, k)| *z *= k);
        self.ifft.process(a);
    }

    fn step_adjoint(&self, a: &mut [C64]) {
        self.fft.process(a);
        a.iter_mut().zip(&self.kinetic).for_each(|(z, k)| *z *= k.conj());
        self.ifft.process(a);
        a.iter_mut().zip(&self.kick).for_each(|(z, k)| *z *= k.conj());
    }

    fn build_dense(&self) -> UnitaryMatrix {
        let n = self.grid.n();
        let kin = kinetic_dense(n);
        Mat::from_fn(n, n, |l, lp| kin[(l, lp)] * self.kick[lp])
    }
}
