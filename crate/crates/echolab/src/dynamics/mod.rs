//! Floquet engines for the three quantum models and the matching classical maps.

mod classical;
mod coupled;
mod rotator;
mod top;

pub use classical::{
    benettin_lyapunov, finite_time_lyapunov, standard_map, standard_map_step, top_map,
    top_map_step, ClassicalMap, ClassicalState, LyapunovEstimate,
};
pub use coupled::CoupledRotatorFloquet;
pub use rotator::KickedRotatorFloquet;
pub use top::{spin_matrices, KickedTopFloquet, SxEigenbasis};

use faer::Mat;

use crate::linalg;
use crate::qstate::{check_basis, norm_sqr, Basis, StateVector};
use crate::{Error, Result, C64};

pub type UnitaryMatrix = Mat<C64>;

/// Largest dimension for which `dense_matrix` will materialize an operator.
pub const DENSE_GUARD: usize = 4096;

/// One period of a kicked system acting in place on amplitudes.
pub trait Floquet: Send + Sync {
    fn basis(&self) -> Basis;

    fn dim(&self) -> usize {
        self.basis().dim()
    }

    fn step(&self, amps: &mut [C64]);

    fn step_adjoint(&self, amps: &mut [C64]);

    /// The one-period matrix in the engine's basis, built without the fast path.
    fn build_dense(&self) -> UnitaryMatrix;
}

fn renormalize(amps: &mut [C64]) {
    let n = norm_sqr(amps).sqrt();
    amps.iter_mut().for_each(|z| *z /= n);
}

pub fn apply<F: Floquet + ?Sized>(f: &F, psi: &StateVector, n: usize) -> Result<StateVector> {
    check_basis(&f.basis(), &psi.basis())?;
    let mut out = psi.clone();
    if n == 0 {
        return Ok(out);
    }
    for _ in 0..n {
        f.step(out.amplitudes_mut());
    }
    renormalize(out.amplitudes_mut());
    Ok(out)
}

pub fn adjoint_apply<F: Floquet + ?Sized>(
    f: &F,
    psi: &StateVector,
    n: usize,
) -> Result<StateVector> {
    check_basis(&f.basis(), &psi.basis())?;
    let mut out = psi.clone();
    if n == 0 {
        return Ok(out);
    }
    for _ in 0..n {
        f.step_adjoint(out.amplitudes_mut());
    }
    renormalize(out.amplitudes_mut());
    Ok(out)
}

pub fn dense_matrix<F: Floquet + ?Sized>(f: &F) -> Result<UnitaryMatrix> {
    let dim = f.dim();
    if dim > DENSE_GUARD {
        return Err(Error::DimGuard { dim, max: DENSE_GUARD });
    }
    Ok(f.build_dense())
}

/// max |U†U - I|
pub fn unitarity_defect(u: &UnitaryMatrix) -> f64 {
    linalg::unitarity_defect(u.as_ref())
}

/// Largest entrywise distance between two operators of equal shape.
pub fn max_entry_diff(a: &UnitaryMatrix, b: &UnitaryMatrix) -> f64 {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return f64::INFINITY;
    }
    linalg::max_abs_diff(a.as_ref(), b.as_ref())
}
