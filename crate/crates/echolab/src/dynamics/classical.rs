use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::qstate::wrap;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ClassicalState {
    Torus { x: f64, p: f64 },
    Sphere { x: f64, y: f64, z: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassicalMap {
    Standard,
    Top,
}

/// p' = p + K sin x, x' = x + p' (mod 2π)
#[inline]
pub fn standard_map(x: f64, p: f64, k: f64) -> (f64, f64) {
    let p1 = wrap(p + k * x.sin());
    (wrap(x + p1), p1)
}

/// Classical kicked top; maps the unit sphere onto itself.
#[inline]
pub fn top_map(v: [f64; 3], k: f64) -> [f64; 3] {
    let [x, y, z] = v;
    let (s, c) = (k * x).sin_cos();
    let out = [z * c + y * s, -z * s + y * c, -x];
    let n = (out[0] * out[0] + out[1] * out[1] + out[2] * out[2]).sqrt();
    [out[0] / n, out[1] / n, out[2] / n]
}

pub fn standard_map_step(pt: ClassicalState, k: f64) -> Result<ClassicalState> {
    match pt {
        ClassicalState::Torus { x, p } => {
            let (x, p) = standard_map(x, p, k);
            Ok(ClassicalState::Torus { x, p })
        }
        _ => domain("standard map acts on torus points"),
    }
}

pub fn top_map_step(pt: ClassicalState, k: f64) -> Result<ClassicalState> {
    match pt {
        ClassicalState::Sphere { x, y, z } => {
            let r = (x * x + y * y + z * z).sqrt();
            if !(r > 0.0) {
                return domain("top map needs a non-zero vector");
            }
            let [x, y, z] = top_map([x / r, y / r, z / r], k);
            Ok(ClassicalState::Sphere { x, y, z })
        }
        _ => domain("top map acts on sphere points"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub lambda: f64,
    pub stderr: f64,
    pub n_init: usize,
    pub n_steps: usize,
    pub transient: usize,
}

const TRANSIENT: usize = 100;
const FILTER_KICKS: usize = 200;
const FILTER_MIN: f64 = 0.05;
const MAX_REDRAWS: usize = 10_000;

/// Point plus tangent vector; three slots cover both phase spaces.
#[derive(Clone, Copy)]
struct Orbit {
    map: ClassicalMap,
    k: f64,
    q: [f64; 3],
    dq: [f64; 3],
}

impl Orbit {
    fn new(map: ClassicalMap, k: f64, q: [f64; 3]) -> Self {
        let dq = match map {
            ClassicalMap::Standard => [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt(), 0.0],
            ClassicalMap::Top => {
                // any direction orthogonal to q
                let a = if q[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
                let d = dot3(a, q);
                let t = [a[0] - d * q[0], a[1] - d * q[1], a[2] - d * q[2]];
                let n = dot3(t, t).sqrt();
                [t[0] / n, t[1] / n, t[2] / n]
            }
        };
        Self { map, k, q, dq }
    }

    /// One kick; returns ln of the tangent stretch and renormalizes it.
    fn kick(&mut self) -> f64 {
        let k = self.k;
        match self.map {
            ClassicalMap::Standard => {
                let [x, p, _] = self.q;
                let [dx, dp, _] = self.dq;
                let dp1 = dp + k * x.cos() * dx;
                let dx1 = dx + dp1;
                let (x1, p1) = standard_map(x, p, k);
                self.q = [x1, p1, 0.0];
                let n = (dx1 * dx1 + dp1 * dp1).sqrt();
                self.dq = [dx1 / n, dp1 / n, 0.0];
                n.ln()
            }
            ClassicalMap::Top => {
                let [x, y, z] = self.q;
                let [dx, dy, dz] = self.dq;
                let (s, c) = (k * x).sin_cos();
                let xn = z * c + y * s;
                let yn = -z * s + y * c;
                let t = [k * yn * dx + s * dy + c * dz, -k * xn * dx + c * dy - s * dz, -dx];
                self.q = top_map(self.q, k);
                // keep the tangent vector in the tangent plane
                let d = dot3(t, self.q);
                let t = [t[0] - d * self.q[0], t[1] - d * self.q[1], t[2] - d * self.q[2]];
                let n = dot3(t, t).sqrt();
                self.dq = [t[0] / n, t[1] / n, t[2] / n];
                n.ln()
            }
        }
    }

    fn run(&mut self, n: usize) -> f64 {
        (0..n).map(|_| self.kick()).sum::<f64>() / n as f64
    }
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn draw(map: ClassicalMap, rng: &mut ChaCha20Rng) -> [f64; 3] {
    match map {
        ClassicalMap::Standard => [rng.random::<f64>() * TAU, rng.random::<f64>() * TAU, 0.0],
        ClassicalMap::Top => {
            let z = 2.0 * rng.random::<f64>() - 1.0;
            let ph = rng.random::<f64>() * TAU;
            let r = (1.0 - z * z).max(0.0).sqrt();
            [r * ph.cos(), r * ph.sin(), z]
        }
    }
}

/// Mean tangent stretch rate along one orbit of `n` kicks, no transient.
pub fn finite_time_lyapunov(map: ClassicalMap, k: f64, start: ClassicalState, n: usize) -> Result<f64> {
    let q = match (map, start) {
        (ClassicalMap::Standard, ClassicalState::Torus { x, p }) => [x, p, 0.0],
        (ClassicalMap::Top, ClassicalState::Sphere { x, y, z }) => {
            let r = (x * x + y * y + z * z).sqrt();
            [x / r, y / r, z / r]
        }
        _ => return domain("initial condition does not live on the map's phase space"),
    };
    if n == 0 {
        return domain("need at least one kick");
    }
    Ok(Orbit::new(map, k, q).run(n))
}

/// Benettin estimate averaged over `n_init` initial conditions in the chaotic sea.
///
/// Initial conditions whose 200-kick exponent is below 0.05 are redrawn; each
/// accepted orbit discards 100 kicks before accumulating `n_steps`.
/// Initial condition i uses ChaCha20 stream i of `seed`, so the result does
/// not depend on the thread count.
pub fn benettin_lyapunov(
    map: ClassicalMap,
    k: f64,
    n_init: usize,
    n_steps: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    if n_init == 0 || n_steps == 0 {
        return domain("Benettin needs positive counts");
    }
    if n_steps < 1000 {
        return domain(format!("Benettin needs at least 1000 steps, got {n_steps}"));
    }
    if !k.is_finite() {
        return domain("kick strength must be finite");
    }
    let per: Vec<Option<f64>> = (0..n_init)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            for _ in 0..MAX_REDRAWS {
                let q = draw(map, &mut rng);
                if Orbit::new(map, k, q).run(FILTER_KICKS) < FILTER_MIN {
                    continue;
                }
                let mut o = Orbit::new(map, k, q);
                o.run(TRANSIENT);
                return Some(o.run(n_steps));
            }
            None
        })
        .collect();
    let vals: Vec<f64> = per.into_iter().collect::<Option<_>>().ok_or_else(|| {
        Error::Domain(format!("no chaotic initial condition found at K = {k}"))
    })?;
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = if vals.len() > 1 {
        vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(LyapunovEstimate {
        lambda: mean,
        stderr: (var / n).sqrt(),
        n_init,
        n_steps,
        transient: TRANSIENT,
    })
}
