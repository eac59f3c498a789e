//! Discrete Wigner functions on the doubled torus lattice, classical clouds and
//! the classical fidelity.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynamics::{standard_map, top_map, ClassicalMap};
use crate::error::domain;
use crate::qstate::{wrap, Basis, DensityMatrix, StateVector, TorusGrid};
use crate::{Error, Result, C64};

pub const WIGNER_GUARD: usize = 4096;

/// W on the 2N×2N lattice (q, p) = (π/N)(a, b), stored as a density so that
/// Σ W · cell_area = 1. Images of the physical cell appear four times.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    grid: TorusGrid,
    values: Vec<f64>,
    max_imag: f64,
}

impl WignerGrid {
    pub fn side(&self) -> usize {
        2 * self.grid.n()
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// Area of one lattice cell, (π/N)².
    pub fn cell_area(&self) -> f64 {
        (PI / self.grid.n() as f64).powi(2)
    }

    /// W at q = aπ/N, p = bπ/N.
    pub fn at(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.side() + b]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest imaginary part discarded when forming the grid.
    pub fn max_imag(&self) -> f64 {
        self.max_imag
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// Σ_b W(a, b)·cell for each column a; position density at even a.
    pub fn q_marginal(&self) -> Vec<f64> {
        let s = self.side();
        let c = self.cell_area();
        (0..s).map(|a| self.values[a * s..(a + 1) * s].iter().sum::<f64>() * c).collect()
    }

    /// Σ_a W(a, b)·cell for each row b; momentum density at even b.
    pub fn p_marginal(&self) -> Vec<f64> {
        let s = self.side();
        let c = self.cell_area();
        (0..s).map(|b| (0..s).map(|a| self.values[a * s + b]).sum::<f64>() * c).collect()
    }

    /// Dense CSV, one row per lattice point, header "q,p,value".
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let s = self.side();
        let h = PI / self.grid.n() as f64;
        writeln!(out, "q,p,value")?;
        for a in 0..s {
            for b in 0..s {
                writeln!(out, "{:?},{:?},{:?}", a as f64 * h, b as f64 * h, self.at(a, b))?;
            }
        }
        Ok(())
    }
}

/// Either a pure state or a density matrix on the torus.
pub enum WignerSource<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a StateVector> for WignerSource<'a> {
    fn from(s: &'a StateVector) -> Self {
        WignerSource::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for WignerSource<'a> {
    fn from(r: &'a DensityMatrix) -> Self {
        WignerSource::Mixed(r)
    }
}

/// W(a, b) = Re[e^{iπab/N} Σ_y ρ(a-y, y) e^{-2πi b y/N}] / (2N), indices mod N,
/// one FFT per column.
pub fn wigner<'a>(src: impl Into<WignerSource<'a>>) -> Result<WignerGrid> {
    let src = src.into();
    let basis = match &src {
        WignerSource::Pure(s) => s.basis(),
        WignerSource::Mixed(r) => r.basis(),
    };
    let Basis::TorusPosition(grid) = basis else {
        return Err(Error::Basis("Wigner functions need a torus position basis".into()));
    };
    let n = grid.n();
    if n > WIGNER_GUARD {
        return Err(Error::DimGuard { dim: n, max: WIGNER_GUARD });
    }
    let rho = |i: usize, j: usize| -> C64 {
        match &src {
            WignerSource::Pure(s) => s.amplitudes()[i] * s.amplitudes()[j].conj(),
            WignerSource::Mixed(r) => r.entry(i, j),
        }
    };
    let side = 2 * n;
    let fft = FftPlanner::new().plan_fft_forward(n);
    let cell = (PI / n as f64).powi(2);
    let scale = 1.0 / (2.0 * n as f64 * cell);
    let mut values = vec![0.0; side * side];
    let mut max_imag = 0.0f64;
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for a in 0..side {
        for (y, v) in buf.iter_mut().enumerate() {
            *v = rho((a + n - y) % n, y);
        }
        fft.process(&mut buf);
        for b in 0..side {
            let ph = ((a * b) % side) as f64 * PI / n as f64;
            let z = C64::from_polar(1.0, ph) * buf[b % n];
            values[a * side + b] = z.re * scale;
            max_imag = max_imag.max(z.im.abs() * scale * cell);
        }
    }
    Ok(WignerGrid { grid, values, max_imag })
}

/// Tr[ρ_a ρ_b] = (π²/N) Σ W_a W_b · cell_area on the doubled lattice.
pub fn trace_product(wa: &WignerGrid, wb: &WignerGrid) -> Result<f64> {
    if wa.grid != wb.grid {
        return Err(Error::Basis("Wigner grids differ".into()));
    }
    let n = wa.grid.n() as f64;
    let s: f64 = wa.values.iter().zip(&wb.values).map(|(x, y)| x * y).sum();
    Ok(PI * PI / n * s * wa.cell_area())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PointCloud {
    Torus(Vec<[f64; 2]>),
    Sphere(Vec<[f64; 3]>),
}

impl PointCloud {
    pub fn len(&self) -> usize {
        match self {
            PointCloud::Torus(v) => v.len(),
            PointCloud::Sphere(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Uniform square of side `sigma` centered at (x, p), wrapped.
    pub fn torus_patch(x: f64, p: f64, sigma: f64, n: usize, seed: u64) -> Result<Self> {
        if n == 0 || !(sigma > 0.0) {
            return domain("point cloud needs n ≥ 1 and positive size");
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        Ok(PointCloud::Torus(
            (0..n)
                .map(|_| {
                    [
                        wrap(x + sigma * (rng.random::<f64>() - 0.5)),
                        wrap(p + sigma * (rng.random::<f64>() - 0.5)),
                    ]
                })
                .collect(),
        ))
    }

    /// Uniform cap of angular size `sigma` around the direction (θ, φ).
    pub fn sphere_patch(theta: f64, phi: f64, sigma: f64, n: usize, seed: u64) -> Result<Self> {
        if n == 0 || !(sigma > 0.0) {
            return domain("point cloud needs n ≥ 1 and positive size");
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let c = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let e1 = [theta.cos() * phi.cos(), theta.cos() * phi.sin(), -theta.sin()];
        let e2 = [-phi.sin(), phi.cos(), 0.0];
        Ok(PointCloud::Sphere(
            (0..n)
                .map(|_| {
                    let u = sigma * (rng.random::<f64>() - 0.5);
                    let v = sigma * (rng.random::<f64>() - 0.5);
                    let p = [0, 1, 2].map(|i| c[i] + u * e1[i] + v * e2[i]);
                    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                    p.map(|x| x / r)
                })
                .collect(),
        ))
    }
}

/// Rotation by φ about x applied after the top map, the classical image of exp(-iφS_x).
pub fn perturbed_top_map(v: [f64; 3], k: f64, phi: f64) -> [f64; 3] {
    let [x, y, z] = top_map(v, k);
    let (s, c) = phi.sin_cos();
    [x, c * y + s * z, -s * y + c * z]
}

/// n iterations of the map applied pointwise. `phi` perturbs the top map and is ignored for the standard map.
pub fn liouville_propagate(cloud: &PointCloud, map: ClassicalMap, k: f64, phi: f64, n: usize) -> Result<PointCloud> {
    match (cloud, map) {
        (PointCloud::Torus(pts), ClassicalMap::Standard) => Ok(PointCloud::Torus(
            pts.iter()
                .map(|&[x, p]| {
                    let (mut x, mut p) = (x, p);
                    for _ in 0..n {
                        (x, p) = standard_map(x, p, k);
                    }
                    [x, p]
                })
                .collect(),
        )),
        (PointCloud::Sphere(pts), ClassicalMap::Top) => Ok(PointCloud::Sphere(
            pts.iter()
                .map(|&v| {
                    let mut v = v;
                    for _ in 0..n {
                        v = if phi == 0.0 { top_map(v, k) } else { perturbed_top_map(v, k, phi) };
                    }
                    v
                })
                .collect(),
        )),
        _ => domain("cloud and map live on different phase spaces"),
    }
}

/// Default cell side 2π/√n clipped to [2π/256, 2π/16].
pub fn default_cell(n_points: usize) -> f64 {
    (TAU / (n_points.max(1) as f64).sqrt()).clamp(TAU / 256.0, TAU / 16.0)
}

fn histogram(cloud: &PointCloud, cell: f64) -> HashMap<(i64, i64), f64> {
    let mut h = HashMap::new();
    let mut add = |u: f64, v: f64| {
        *h.entry(((u / cell).floor() as i64, (v / cell).floor() as i64)).or_insert(0.0) += 1.0;
    };
    match cloud {
        PointCloud::Torus(p) => p.iter().for_each(|&[x, q]| add(x, q)),
        // equal-area cylinder (azimuth, z)
        PointCloud::Sphere(p) => p.iter().for_each(|&[x, y, z]| add(wrap(y.atan2(x)), z + 1.0)),
    }
    h
}

/// Normalized overlap Σ h_A h_B / (‖h_A‖‖h_B‖) of the two cloud histograms.
/// Sphere points are binned in the equal-area coordinates (azimuth, z).
pub fn classical_fidelity(a: &PointCloud, b: &PointCloud, cell: f64) -> Result<f64> {
    if !(cell > 0.0 && cell.is_finite()) || cell < 1e-9 {
        return domain(format!("degenerate cell size {cell}"));
    }
    if std::mem::discriminant(a) != std::mem::discriminant(b) {
        return domain("clouds live on different phase spaces");
    }
    if a.is_empty() || b.is_empty() {
        return domain("empty cloud");
    }
    let ha = histogram(a, cell);
    let hb = histogram(b, cell);
    let na: f64 = ha.values().map(|v| v * v).sum::<f64>().sqrt();
    let nb: f64 = hb.values().map(|v| v * v).sum::<f64>().sqrt();
    let cross: f64 = ha.iter().filter_map(|(k, v)| hb.get(k).map(|w| v * w)).sum();
    Ok((cross / (na * nb)).clamp(0.0, 1.0))
}
