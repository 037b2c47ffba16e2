use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Basis, BasisChange, Operator};
use crate::scalar::{re, Cx, Real};
use crate::spin_algebra::{angular_momentum_ops, couple_basis, coupled_labels, h, HalfInt};

/// Quantum-number label of one basis vector of a level manifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisState {
    pub n: u32,
    pub l: HalfInt,
    pub s: HalfInt,
    pub j: HalfInt,
    pub m_j: HalfInt,
}

impl std::fmt::Display for BasisState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|n={}, L={}, J={}, mJ={}>", self.n, self.l, self.j, self.m_j)
    }
}

/// `(J, m_J)` of a code state.
pub type CodeLabel = (HalfInt, HalfInt);

/// The 60f code states `|J=5/2, m_J=-3/2>` and `|J=5/2, m_J=-1/2>`.
pub const RYDBERG_CODE: [CodeLabel; 2] = [(h(5), h(-3)), (h(5), h(-1))];

/// Outcome of the ancilla-dimension check `A >= M + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AncillaBound {
    pub ancilla_dimension: usize,
    pub required: usize,
    pub passes: bool,
}

/// One `n L` manifold with spin `S`, in the coupled basis.
#[derive(Clone, Debug)]
pub struct LevelSpace {
    n: u32,
    l: HalfInt,
    s: HalfInt,
    basis: Vec<BasisState>,
    code: [usize; 2],
}

/// Builds the manifold `L ⊗ S` and resolves the two code states.
pub fn build_space(l: HalfInt, s: HalfInt, code: [CodeLabel; 2]) -> Result<LevelSpace> {
    LevelSpace::new(60, l, s, code)
}

impl LevelSpace {
    pub fn new(n: u32, l: HalfInt, s: HalfInt, code: [CodeLabel; 2]) -> Result<Self> {
        l.check_j()?;
        s.check_j()?;
        let basis: Vec<BasisState> =
            coupled_labels(l, s).into_iter().map(|(j, m_j)| BasisState { n, l, s, j, m_j }).collect();
        let find = |(j, m): CodeLabel| {
            basis
                .iter()
                .position(|b| b.j == j && b.m_j == m)
                .ok_or(Error::CodeStateAbsent { j: j.to_string(), m: m.to_string() })
        };
        let code = [find(code[0])?, find(code[1])?];
        if code[0] == code[1] {
            return Err(Error::InvalidParameter("code states must be distinct".into()));
        }
        Ok(LevelSpace { n, l, s, basis, code })
    }

    /// The 14-dimensional 60f manifold with the two J=5/2 code states.
    pub fn rydberg_60f() -> Self {
        LevelSpace::new(60, h(6), h(1), RYDBERG_CODE).expect("60f code states exist")
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn principal(&self) -> u32 {
        self.n
    }

    pub fn l(&self) -> HalfInt {
        self.l
    }

    pub fn s(&self) -> HalfInt {
        self.s
    }

    pub fn basis(&self) -> &[BasisState] {
        &self.basis
    }

    pub fn code_indices(&self) -> [usize; 2] {
        self.code
    }

    pub fn coupled(&self) -> Basis {
        Basis::Coupled { l: self.l, s: self.s }
    }

    pub fn uncoupled(&self) -> Basis {
        Basis::Uncoupled { l: self.l, s: self.s }
    }

    /// Orbital dimension `2L + 1`.
    pub fn ancilla_dimension(&self) -> usize {
        self.l.multiplicity()
    }

    /// Checks `A >= M + 1` for `n_errors` error generators.
    pub fn ancilla_bound(&self, n_errors: usize) -> AncillaBound {
        let a = self.ancilla_dimension();
        AncillaBound { ancilla_dimension: a, required: n_errors + 1, passes: a > n_errors }
    }

    /// Index ranges of the `J` multiplets, in basis order.
    pub fn multiplets(&self) -> Vec<(HalfInt, Range<usize>)> {
        let mut out: Vec<(HalfInt, Range<usize>)> = Vec::new();
        for (i, b) in self.basis.iter().enumerate() {
            match out.last_mut() {
                Some((j, r)) if *j == b.j => r.end = i + 1,
                _ => out.push((b.j, i..i + 1)),
            }
        }
        out
    }

    pub fn to_coupled<T: Real>(&self) -> BasisChange<T> {
        couple_basis(self.l, self.s).expect("validated quantum numbers")
    }

    /// `N × 2` isometry whose columns are the code states.
    pub fn code_isometry<T: Real>(&self) -> DMatrix<Cx<T>> {
        let mut p = DMatrix::zeros(self.dimension(), 2);
        p[(self.code[0], 0)] = re(T::one());
        p[(self.code[1], 1)] = re(T::one());
        p
    }

    /// Orbital operator `o ⊗ 1_spin`, expressed in the coupled basis.
    pub fn orbital<T: Real>(&self, o: &Operator<T>) -> Result<Operator<T>> {
        let id = Operator::identity(Basis::Multiplet { j: self.s });
        self.to_coupled().transform(&o.kron(&id, self.uncoupled())?)
    }

    /// Spin operator `1_orbital ⊗ o`, expressed in the coupled basis.
    pub fn spin<T: Real>(&self, o: &Operator<T>) -> Result<Operator<T>> {
        let id = Operator::identity(Basis::Multiplet { j: self.l });
        self.to_coupled().transform(&id.kron(o, self.uncoupled())?)
    }

    /// `[S_x, S_y, S_z]` in the coupled basis.
    pub fn spin_ops<T: Real>(&self) -> [Operator<T>; 3] {
        let s = angular_momentum_ops::<T>(self.s).expect("valid spin");
        [&s.jx, &s.jy, &s.jz].map(|o| self.spin(o).expect("matching dimensions"))
    }

    /// `[L_x, L_y, L_z]` in the coupled basis.
    pub fn orbital_ops<T: Real>(&self) -> [Operator<T>; 3] {
        let l = angular_momentum_ops::<T>(self.l).expect("valid orbital momentum");
        [&l.jx, &l.jy, &l.jz].map(|o| self.orbital(o).expect("matching dimensions"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rydberg_manifold_layout() {
        let sp = LevelSpace::rydberg_60f();
        assert_eq!(sp.dimension(), 14);
        let mult = sp.multiplets();
        assert_eq!(mult, vec![(h(7), 0..8), (h(5), 8..14)]);
        assert_eq!(sp.code_indices(), [9, 10]);
        assert_eq!(sp.basis()[9].m_j, h(-3));
    }

    #[test]
    fn ground_level_has_no_ancilla() {
        let sp = build_space(h(0), h(1), [(h(1), h(-1)), (h(1), h(1))]).unwrap();
        assert_eq!(sp.dimension(), 2);
        assert_eq!(sp.ancilla_dimension(), 1);
    }

    #[test]
    fn p_manifold_dimension() {
        let sp = build_space(h(2), h(1), [(h(3), h(-3)), (h(3), h(-1))]).unwrap();
        assert_eq!(sp.dimension(), 6);
    }

    #[test]
    fn absent_code_state_rejected() {
        assert!(matches!(build_space(h(2), h(1), RYDBERG_CODE), Err(Error::CodeStateAbsent { .. })));
    }

    #[test]
    fn hamming_style_bound() {
        assert!(LevelSpace::rydberg_60f().ancilla_bound(6).passes);
        let d = build_space(h(4), h(1), RYDBERG_CODE).unwrap();
        let b = d.ancilla_bound(6);
        assert_eq!((b.ancilla_dimension, b.required, b.passes), (5, 7, false));
    }
}
