//! Dense complex operators that carry the basis they act on.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{ComplexField, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{re, Cx, Real};
use crate::spin_algebra::HalfInt;

/// Label of an ordered basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// Anonymous basis of the given dimension.
    Generic(usize),
    /// `|j, m>` with `m` ascending.
    Multiplet { j: HalfInt },
    /// `|m_L> ⊗ |m_S>`, `m_L` slow and `m_S` fast, both ascending.
    Uncoupled { l: HalfInt, s: HalfInt },
    /// `|J, m_J>`, `J` descending from `L+S`, `m_J` ascending within `J`.
    Coupled { l: HalfInt, s: HalfInt },
}

impl Basis {
    pub fn dimension(&self) -> usize {
        match *self {
            Basis::Generic(n) => n,
            Basis::Multiplet { j } => j.multiplicity(),
            Basis::Uncoupled { l, s } | Basis::Coupled { l, s } => l.multiplicity() * s.multiplicity(),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Generic(n) => write!(f, "generic({n})"),
            Basis::Multiplet { j } => write!(f, "multiplet(j={j})"),
            Basis::Uncoupled { l, s } => write!(f, "uncoupled(L={l}, S={s})"),
            Basis::Coupled { l, s } => write!(f, "coupled(L={l}, S={s})"),
        }
    }
}

/// A square complex matrix together with its basis label.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<T: Real> {
    basis: Basis,
    matrix: DMatrix<Cx<T>>,
}

impl<T: Real> Operator<T> {
    pub fn new(basis: Basis, matrix: DMatrix<Cx<T>>) -> Result<Self> {
        let n = basis.dimension();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Dimension { expected: n, got: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Operator { basis, matrix })
    }

    pub fn zeros(basis: Basis) -> Self {
        let n = basis.dimension();
        Operator { basis, matrix: DMatrix::zeros(n, n) }
    }

    pub fn identity(basis: Basis) -> Self {
        let n = basis.dimension();
        Operator { basis, matrix: DMatrix::identity(n, n) }
    }

    pub fn from_real_diagonal(basis: Basis, diag: &[T]) -> Result<Self> {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| re(x)));
        Operator::new(basis, DMatrix::from_diagonal(&d))
    }

    #[inline]
    pub fn basis(&self) -> Basis {
        self.basis
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<Cx<T>> {
        &self.matrix
    }

    #[inline]
    pub fn into_matrix(self) -> DMatrix<Cx<T>> {
        self.matrix
    }

    /// Same matrix, relabeled.
    pub fn with_basis(self, basis: Basis) -> Result<Self> {
        Operator::new(basis, self.matrix)
    }

    pub fn check_same_basis(&self, other: &Self) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch { left: self.basis.to_string(), right: other.basis.to_string() });
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Operator { basis: self.basis, matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, factor: T) -> Self {
        Operator { basis: self.basis, matrix: self.matrix.map(|z| z * factor) }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(Operator { basis: self.basis, matrix: &self.matrix + &other.matrix })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(Operator { basis: self.basis, matrix: &self.matrix - &other.matrix })
    }

    /// Matrix product `self * other`.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(Operator { basis: self.basis, matrix: &self.matrix * &other.matrix })
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        let ab = &self.matrix * &other.matrix;
        let ba = &other.matrix * &self.matrix;
        Ok(Operator { basis: self.basis, matrix: ab - ba })
    }

    pub fn apply(&self, v: &DVector<Cx<T>>) -> Result<DVector<Cx<T>>> {
        if v.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: v.len() });
        }
        Ok(&self.matrix * v)
    }

    pub fn trace(&self) -> Cx<T> {
        self.matrix.trace()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.matrix.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.matrix.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> T {
        if self.dim() == 0 {
            return T::zero();
        }
        let sv = self.matrix.clone().svd(false, false).singular_values;
        sv.iter().fold(T::zero(), |acc, &s| acc.max(s))
    }

    /// `max |A - A†|` over entries.
    pub fn hermiticity_defect(&self) -> T {
        let n = self.dim();
        let mut worst = T::zero();
        for i in 0..n {
            for j in i..n {
                let d = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).modulus();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `max |U†U - I|` over entries.
    pub fn unitarity_defect(&self) -> T {
        let n = self.dim();
        let g = self.matrix.adjoint() * &self.matrix;
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { T::one() } else { T::zero() };
                worst = worst.max((g[(i, j)] - re(target)).modulus());
            }
        }
        worst
    }

    /// Entry-wise max distance to another operator on the same basis.
    pub fn max_distance(&self, other: &Self) -> Result<T> {
        Ok(self.try_sub(other)?.max_abs())
    }

    /// Tensor product `self ⊗ other`, labeled with `basis`.
    pub fn kron(&self, other: &Self, basis: Basis) -> Result<Self> {
        Operator::new(basis, self.matrix.kronecker(&other.matrix))
    }

    /// Converts the scalar type.
    pub fn cast<U: Real>(&self) -> Operator<U> {
        Operator {
            basis: self.basis,
            matrix: self.matrix.map(|z| Cx::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64()))),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl<T: Real> $tr<&Operator<T>> for &Operator<T> {
            type Output = Operator<T>;
            /// Panics on basis mismatch; use the `try_` variant to handle it.
            fn $method(self, rhs: &Operator<T>) -> Operator<T> {
                self.$inner(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl<T: Real> Neg for &Operator<T> {
    type Output = Operator<T>;
    fn neg(self) -> Operator<T> {
        Operator { basis: self.basis, matrix: -&self.matrix }
    }
}

/// A unitary change of basis `from -> to`; coordinates transform as
/// `c_to = U c_from`.
#[derive(Clone, Debug)]
pub struct BasisChange<T: Real> {
    pub from: Basis,
    pub to: Basis,
    matrix: DMatrix<Cx<T>>,
}

impl<T: Real> BasisChange<T> {
    pub fn new(from: Basis, to: Basis, matrix: DMatrix<Cx<T>>) -> Result<Self> {
        let (n, m) = (to.dimension(), from.dimension());
        if matrix.nrows() != n || matrix.ncols() != m {
            return Err(Error::Dimension { expected: n, got: matrix.nrows() });
        }
        Ok(BasisChange { from, to, matrix })
    }

    pub fn matrix(&self) -> &DMatrix<Cx<T>> {
        &self.matrix
    }

    /// `U A U†`.
    pub fn transform(&self, op: &Operator<T>) -> Result<Operator<T>> {
        if op.basis != self.from {
            return Err(Error::BasisMismatch { left: self.from.to_string(), right: op.basis.to_string() });
        }
        Operator::new(self.to, &self.matrix * &op.matrix * self.matrix.adjoint())
    }

    pub fn inverse(&self) -> Self {
        BasisChange { from: self.to, to: self.from, matrix: self.matrix.adjoint() }
    }

    pub fn unitarity_defect(&self) -> T {
        Operator { basis: self.from, matrix: self.matrix.clone() }.unitarity_defect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    fn pauli_x() -> Operator<f64> {
        let m = DMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
        Operator::new(Basis::Generic(2), m).unwrap()
    }

    #[test]
    fn dimension_checked() {
        let m = DMatrix::<Cx<f64>>::zeros(3, 3);
        assert!(Operator::new(Basis::Generic(2), m).is_err());
    }

    #[test]
    fn basis_mismatch_detected() {
        let a = pauli_x();
        let b = Operator::<f64>::identity(Basis::Multiplet { j: HalfInt::HALF });
        assert!(matches!(a.try_mul(&b), Err(Error::BasisMismatch { .. })));
    }

    #[test]
    fn norms_and_flags() {
        let x = pauli_x();
        assert!(x.is_hermitian(0.0));
        assert!((x.spectral_norm() - 1.0).abs() < 1e-14);
        assert!(x.unitarity_defect() < 1e-15);
        let y = Operator::new(
            Basis::Generic(2),
            DMatrix::from_row_slice(2, 2, &[re(0.0), cx(0.0, -1.0), cx(0.0, 1.0), re(0.0)]),
        )
        .unwrap();
        let c = x.commutator(&y).unwrap();
        assert!((c.matrix()[(0, 0)] - cx(0.0, 2.0)).norm() < 1e-15);
        assert!(c.scale(0.5).hermiticity_defect() > 1.0);
    }
}
