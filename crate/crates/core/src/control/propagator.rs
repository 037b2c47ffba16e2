use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::operator::{Basis, Operator};
use crate::scalar::{Cx, Real};

/// Asymmetry above which an input is rejected as non-Hermitian.
fn hermitian_tolerance<T: Real>(h: &Operator<T>) -> T {
    let scale = T::one().max(h.max_abs());
    T::lit(1e-9).max(T::lit(1e3) * T::eps() * scale)
}

/// Eigendecomposition of a Hermitian operator, cached so that
/// `exp(-iHτ)` can be evaluated for many `τ`.
#[derive(Clone, Debug)]
pub struct SpectralPropagator<T: Real> {
    basis: Basis,
    hamiltonian: DMatrix<Cx<T>>,
    vectors: DMatrix<Cx<T>>,
    values: DVector<T>,
}

impl<T: Real> SpectralPropagator<T> {
    pub fn new(h: &Operator<T>) -> Result<Self> {
        let defect = h.hermiticity_defect();
        if defect > hermitian_tolerance(h) {
            return Err(Error::NotHermitian { defect: defect.as_f64() });
        }
        let half = T::lit(0.5);
        let sym = (h.matrix() + h.matrix().adjoint()).map(|z| z * half);
        let eig = SymmetricEigen::new(sym.clone());
        Ok(SpectralPropagator {
            basis: h.basis(),
            hamiltonian: sym,
            vectors: eig.eigenvectors,
            values: eig.eigenvalues,
        })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn hamiltonian(&self) -> &DMatrix<Cx<T>> {
        &self.hamiltonian
    }

    pub fn eigenvalues(&self) -> &DVector<T> {
        &self.values
    }

    /// `exp(-iHτ)` as a matrix.
    pub fn matrix_at(&self, tau: T) -> DMatrix<Cx<T>> {
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let arg = -lam * tau;
            let phase = Cx::new(arg.cos(), arg.sin());
            for x in scaled.column_mut(j).iter_mut() {
                *x *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn at(&self, tau: T) -> Operator<T> {
        Operator::new(self.basis, self.matrix_at(tau)).expect("same dimension")
    }
}

/// `exp(-iHτ)` for Hermitian `H`, via eigendecomposition.
pub fn propagator<T: Real>(h: &Operator<T>, tau: T) -> Result<Operator<T>> {
    Ok(SpectralPropagator::new(h)?.at(tau))
}
