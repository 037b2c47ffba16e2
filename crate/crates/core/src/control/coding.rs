//! The coding-condition objective and its timing derivatives.
//!
//! For each error `E_m` the decoded error block on the code space
//! `G_m = P U† E_m U P` must be a multiple of the identity. The residual is
//! `Σ_m ‖G_m - (tr G_m / 2) I‖²_F`.

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::Serialize;

use super::propagator::SpectralPropagator;
use crate::error::{Error, Result};
use crate::operator::Operator;
use crate::scalar::{cx, Cx, Real};
use crate::system_model::{ErrorModel, LevelSpace, PulseTag};

type C64 = Cx<f64>;

/// Outcome of checking a coding unitary against the correction conditions.
#[derive(Clone, Debug)]
pub struct CodingReport<T: Real> {
    pub residual: T,
    /// `‖G_m - (tr G_m / 2) I‖_F` per error.
    pub condition_norms: Vec<T>,
    pub unitarity_defect: T,
    pub coding_matrix: Operator<T>,
}

/// Serializable summary of a [`CodingReport`].
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct CodingSummary {
    pub residual: f64,
    pub condition_norms: Vec<f64>,
    pub unitarity_defect: f64,
}

impl<T: Real> CodingReport<T> {
    pub fn summary(&self) -> CodingSummary {
        CodingSummary {
            residual: self.residual.as_f64(),
            condition_norms: self.condition_norms.iter().map(|x| x.as_f64()).collect(),
            unitarity_defect: self.unitarity_defect.as_f64(),
        }
    }
}

/// `G_m = P U† E_m U P` as 2×2 blocks, one per error.
pub fn condition_blocks<T: Real>(
    u: &Operator<T>,
    errors: &[Operator<T>],
    code: [usize; 2],
) -> Result<Vec<Matrix2<Cx<T>>>> {
    let up = u.matrix().select_columns(&code);
    errors
        .iter()
        .map(|e| {
            u.check_same_basis(e)?;
            let g = up.adjoint() * e.matrix() * &up;
            Ok(Matrix2::new(g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]))
        })
        .collect()
}

/// `‖G - (tr G / 2) I‖²_F`.
pub fn traceless_deviation_sq<T: Real>(g: &Matrix2<Cx<T>>) -> T {
    let half_tr = (g[(0, 0)] + g[(1, 1)]) * T::lit(0.5);
    (g[(0, 0)] - half_tr).norm_sqr() + (g[(1, 1)] - half_tr).norm_sqr() + g[(0, 1)].norm_sqr() + g[(1, 0)].norm_sqr()
}

pub fn coding_residual<T: Real>(
    u: &Operator<T>,
    errors: &ErrorModel<T>,
    space: &LevelSpace,
) -> Result<CodingReport<T>> {
    coding_residual_for(u, &errors.generators, space.code_indices())
}

pub fn coding_residual_for<T: Real>(
    u: &Operator<T>,
    errors: &[Operator<T>],
    code: [usize; 2],
) -> Result<CodingReport<T>> {
    let blocks = condition_blocks(u, errors, code)?;
    let sq: Vec<T> = blocks.iter().map(traceless_deviation_sq).collect();
    let residual = sq.iter().fold(T::zero(), |a, &b| a + b);
    Ok(CodingReport {
        residual,
        condition_norms: sq.into_iter().map(|x| x.sqrt()).collect(),
        unitarity_defect: u.unitarity_defect(),
        coding_matrix: u.clone(),
    })
}

/// The coding objective as a function of the timings of an alternating,
/// A-first sequence.
#[derive(Clone, Debug)]
pub struct CodingProblem {
    pa: SpectralPropagator<f64>,
    pb: SpectralPropagator<f64>,
    errors: Vec<DMatrix<C64>>,
    code: [usize; 2],
}

/// Residual-vector entries per error block.
pub const ENTRIES_PER_ERROR: usize = 3;

impl CodingProblem {
    pub fn new(ha: &Operator<f64>, hb: &Operator<f64>, errors: &ErrorModel<f64>, space: &LevelSpace) -> Result<Self> {
        CodingProblem::from_parts(ha, hb, &errors.generators, space.code_indices())
    }

    pub fn from_parts(
        ha: &Operator<f64>,
        hb: &Operator<f64>,
        errors: &[Operator<f64>],
        code: [usize; 2],
    ) -> Result<Self> {
        ha.check_same_basis(hb)?;
        for e in errors {
            ha.check_same_basis(e)?;
        }
        if code.iter().any(|&c| c >= ha.dim()) || code[0] == code[1] {
            return Err(Error::InvalidParameter(format!("bad code indices {code:?}")));
        }
        Ok(CodingProblem {
            pa: SpectralPropagator::new(ha)?,
            pb: SpectralPropagator::new(hb)?,
            errors: errors.iter().map(|e| e.matrix().clone()).collect(),
            code,
        })
    }

    pub fn n_errors(&self) -> usize {
        self.errors.len()
    }

    pub fn n_residuals(&self) -> usize {
        ENTRIES_PER_ERROR * self.errors.len()
    }

    fn tag(i: usize) -> PulseTag {
        if i.is_multiple_of(2) {
            PulseTag::A
        } else {
            PulseTag::B
        }
    }

    fn step(&self, i: usize, tau: f64) -> DMatrix<C64> {
        match Self::tag(i) {
            PulseTag::A => self.pa.matrix_at(tau),
            PulseTag::B => self.pb.matrix_at(tau),
        }
    }

    fn hamiltonian(&self, i: usize) -> &DMatrix<C64> {
        match Self::tag(i) {
            PulseTag::A => self.pa.hamiltonian(),
            PulseTag::B => self.pb.hamiltonian(),
        }
    }

    pub fn unitary(&self, timings: &[f64]) -> Operator<f64> {
        let n = self.pa.basis().dimension();
        let mut u = DMatrix::identity(n, n);
        for (i, &t) in timings.iter().enumerate() {
            u = self.step(i, t) * u;
        }
        Operator::new(self.pa.basis(), u).expect("same dimension")
    }

    fn code_columns(&self) -> DMatrix<C64> {
        let n = self.pa.basis().dimension();
        let mut p = DMatrix::zeros(n, 2);
        p[(self.code[0], 0)] = cx(1.0, 0.0);
        p[(self.code[1], 1)] = cx(1.0, 0.0);
        p
    }

    fn push_block(out: &mut [f64], g: &DMatrix<C64>) {
        let s2 = std::f64::consts::SQRT_2;
        out[0] = (g[(0, 0)].re - g[(1, 1)].re) / s2;
        // Hermitian blocks: use the symmetric average of the off-diagonal pair.
        let b = (g[(0, 1)] + g[(1, 0)].conj()) * 0.5;
        out[1] = s2 * b.re;
        out[2] = s2 * b.im;
    }

    /// Residual vector `r` with `‖r‖² = residual`.
    pub fn residual_vector(&self, timings: &[f64]) -> DVector<f64> {
        let mut v = self.code_columns();
        for (i, &t) in timings.iter().enumerate() {
            v = self.step(i, t) * v;
        }
        let mut r = DVector::zeros(self.n_residuals());
        for (m, e) in self.errors.iter().enumerate() {
            let g = v.adjoint() * e * &v;
            Self::push_block(&mut r.as_mut_slice()[3 * m..3 * m + 3], &g);
        }
        r
    }

    pub fn residual(&self, timings: &[f64]) -> f64 {
        self.residual_vector(timings).norm_squared()
    }

    /// Residual vector and its Jacobian with respect to the timings.
    ///
    /// `∂(UP)/∂τ_i = S_i (-iH_i) C_i` with `C_i = U_i … U_1 P` and
    /// `S_i = U_n … U_{i+1}`.
    pub fn residual_and_jacobian(&self, timings: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let n = timings.len();
        let steps: Vec<DMatrix<C64>> = timings.iter().enumerate().map(|(i, &t)| self.step(i, t)).collect();
        let mut fwd = Vec::with_capacity(n + 1);
        fwd.push(self.code_columns());
        for s in &steps {
            let next = s * fwd.last().expect("nonempty");
            fwd.push(next);
        }
        let up = fwd[n].clone();
        let a: Vec<DMatrix<C64>> = self.errors.iter().map(|e| up.adjoint() * e).collect();

        let mut r = DVector::zeros(self.n_residuals());
        for (m, am) in a.iter().enumerate() {
            let g = am * &up;
            Self::push_block(&mut r.as_mut_slice()[3 * m..3 * m + 3], &g);
        }

        let mut jac = DMatrix::zeros(self.n_residuals(), n);
        let dim = up.nrows();
        let mut suffix = DMatrix::<C64>::identity(dim, dim);
        let minus_i = cx(0.0, -1.0);
        let mut col = [0.0; 3];
        for i in (0..n).rev() {
            // fwd[i + 1] = U_i … U_1 P.
            let k = &suffix * (self.hamiltonian(i) * &fwd[i + 1]).map(|z| z * minus_i);
            for (m, am) in a.iter().enumerate() {
                let half = am * &k;
                let dg = &half + half.adjoint();
                Self::push_block(&mut col, &dg);
                for (q, &c) in col.iter().enumerate() {
                    jac[(3 * m + q, i)] = c;
                }
            }
            suffix *= &steps[i];
        }
        (r, jac)
    }

    /// Residual and its gradient `2 Jᵀ r`.
    pub fn residual_and_gradient(&self, timings: &[f64]) -> (f64, DVector<f64>) {
        let (r, j) = self.residual_and_jacobian(timings);
        (r.norm_squared(), j.transpose() * &r * 2.0)
    }

    pub fn report(&self, timings: &[f64]) -> CodingReport<f64> {
        let u = self.unitary(timings);
        let errors: Vec<Operator<f64>> =
            self.errors.iter().map(|e| Operator::new(u.basis(), e.clone()).expect("same dimension")).collect();
        coding_residual_for(&u, &errors, self.code).expect("consistent bases")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Basis;
    use crate::scalar::re;

    #[test]
    fn block_diagonal_identity_on_code_gives_zero() {
        // Errors vanish on the code block: any U preserving the code gives 0.
        let e = Operator::from_real_diagonal(Basis::Generic(4), &[0.0, 0.0, 1.0, -1.0]).unwrap();
        let u = Operator::identity(Basis::Generic(4));
        let rep = coding_residual_for(&u, &[e], [0, 1]).unwrap();
        assert_eq!(rep.residual, 0.0);
    }

    #[test]
    fn unequal_diagonal_is_penalized() {
        let e = Operator::from_real_diagonal(Basis::Generic(3), &[1.0, -1.0, 0.0]).unwrap();
        let u = Operator::<f64>::identity(Basis::Generic(3));
        let rep = coding_residual_for(&u, &[e], [0, 1]).unwrap();
        // G = diag(1, -1): deviation diag(1, -1), squared norm 2.
        assert!((rep.residual - 2.0).abs() < 1e-15);
    }

    #[test]
    fn residual_vector_matches_report() {
        let h1 = Operator::from_real_diagonal(Basis::Generic(3), &[0.2, 1.0, -0.7]).unwrap();
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 1)] = re(1.0);
        m[(1, 0)] = re(1.0);
        m[(1, 2)] = cx(0.0, 0.5);
        m[(2, 1)] = cx(0.0, -0.5);
        let h2 = Operator::new(Basis::Generic(3), m).unwrap();
        let e = Operator::from_real_diagonal(Basis::Generic(3), &[1.0, 0.0, -1.0]).unwrap();
        let p = CodingProblem::from_parts(&h1, &h2, &[e], [0, 2]).unwrap();
        let t = [0.4, 1.3, 0.8];
        assert!((p.residual(&t) - p.report(&t).residual).abs() < 1e-14);
    }
}
