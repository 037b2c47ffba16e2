//! Angular-momentum matrices, spherical tensor operators and the
//! uncoupled-to-coupled change of basis.

use nalgebra::{ComplexField, DMatrix};

use super::cg::clebsch_gordan;
use super::half_int::HalfInt;
use crate::error::{Error, Result};
use crate::operator::{Basis, BasisChange, Operator};
use crate::scalar::{cx, re, Cx, Real};

/// Angular-momentum operators of a single multiplet, basis `m = -j..j`.
#[derive(Clone, Debug)]
pub struct AngularMomentumOps<T: Real> {
    pub j: HalfInt,
    pub jx: Operator<T>,
    pub jy: Operator<T>,
    pub jz: Operator<T>,
    pub jplus: Operator<T>,
    pub jminus: Operator<T>,
}

impl<T: Real> AngularMomentumOps<T> {
    /// `[jx, jy, jz]`.
    pub fn cartesian(&self) -> [&Operator<T>; 3] {
        [&self.jx, &self.jy, &self.jz]
    }

    /// `jx² + jy² + jz²`.
    pub fn casimir(&self) -> Operator<T> {
        let sq = |o: &Operator<T>| o * o;
        &(&sq(&self.jx) + &sq(&self.jy)) + &sq(&self.jz)
    }
}

pub fn angular_momentum_ops<T: Real>(j: HalfInt) -> Result<AngularMomentumOps<T>> {
    j.check_j()?;
    let basis = Basis::Multiplet { j };
    let n = j.multiplicity();
    let jf = j.to_f64();
    let ms: Vec<f64> = j.projections().map(HalfInt::to_f64).collect();

    let mut jplus = DMatrix::<Cx<T>>::zeros(n, n);
    for (i, &m) in ms.iter().enumerate().take(n.saturating_sub(1)) {
        jplus[(i + 1, i)] = re(T::lit((jf * (jf + 1.0) - m * (m + 1.0)).sqrt()));
    }
    let jminus = jplus.adjoint();
    let half = T::lit(0.5);
    let jx = (&jplus + &jminus).map(|z| z * half);
    // jy = (J+ - J-) / 2i
    let jy = (&jplus - &jminus).map(|z| z * cx(T::zero(), -half));
    let jz = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, ms.iter().map(|&m| re(T::lit(m)))));
    let op = |m| Operator::new(basis, m);
    Ok(AngularMomentumOps { j, jx: op(jx)?, jy: op(jy)?, jz: op(jz)?, jplus: op(jplus)?, jminus: op(jminus)? })
}

/// `(m_L, m_S)` labels of the uncoupled basis, `m_L` slow.
pub fn uncoupled_labels(l: HalfInt, s: HalfInt) -> Vec<(HalfInt, HalfInt)> {
    l.projections().flat_map(|ml| s.projections().map(move |ms| (ml, ms))).collect()
}

/// `(J, m_J)` labels of the coupled basis, `J` descending, `m_J` ascending.
pub fn coupled_labels(l: HalfInt, s: HalfInt) -> Vec<(HalfInt, HalfInt)> {
    let top = (l + s).twice();
    let bottom = (l - s).abs().twice();
    (bottom..=top)
        .rev()
        .step_by(2)
        .map(HalfInt::from_twice)
        .flat_map(|j| j.projections().map(move |m| (j, m)))
        .collect()
}

/// Unitary taking uncoupled `|m_L>⊗|m_S>` coordinates to coupled `|J, m_J>`
/// coordinates. Entry `(row (J, M), col (m_L, m_S))` is `<L m_L; S m_S | J M>`.
pub fn couple_basis<T: Real>(l: HalfInt, s: HalfInt) -> Result<BasisChange<T>> {
    l.check_j()?;
    s.check_j()?;
    let rows = coupled_labels(l, s);
    let cols = uncoupled_labels(l, s);
    let mut u = DMatrix::<Cx<T>>::zeros(rows.len(), cols.len());
    for (r, &(j, m)) in rows.iter().enumerate() {
        for (c, &(ml, ms)) in cols.iter().enumerate() {
            if ml + ms == m {
                u[(r, c)] = re(clebsch_gordan(l, ml, s, ms, j, m)?);
            }
        }
    }
    BasisChange::new(Basis::Uncoupled { l, s }, Basis::Coupled { l, s }, u)
}

/// Component `q` of a rank-`k` tensor operator on the multiplet `j`, with
/// unit reduced matrix element: `<j m|T^k_q|j m'> = <j m'; k q | j m>`.
pub fn tensor_component<T: Real>(j: HalfInt, k: HalfInt, q: HalfInt) -> Result<Operator<T>> {
    k.check_projection(q)?;
    if !k.is_integer() {
        return Err(Error::QuantumNumber(format!("tensor rank {k} must be an integer")));
    }
    let ms: Vec<HalfInt> = j.projections().collect();
    let n = ms.len();
    let mut m = DMatrix::<Cx<T>>::zeros(n, n);
    for (a, &ma) in ms.iter().enumerate() {
        for (b, &mb) in ms.iter().enumerate() {
            if mb + q == ma {
                m[(a, b)] = re(clebsch_gordan(j, mb, k, q, j, ma)?);
            }
        }
    }
    Operator::new(Basis::Multiplet { j }, m)
}

/// Spherical-basis expansion of the Cartesian unit vectors: `e_k = Σ_q u[k][q+1] r_q`
/// with `r_{±1} = ∓(x ± iy)/√2`, `r_0 = z`.
fn cartesian_to_spherical<T: Real>() -> [[Cx<T>; 3]; 3] {
    let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
    let z = Cx::new(T::zero(), T::zero());
    [[re(s), z, re(-s)], [cx(T::zero(), s), z, cx(T::zero(), s)], [z, re(T::one()), z]]
}

/// Rank-2 part of the bilinear `Σ_kl a_kl r_k r_l` on the multiplet `j`,
/// with unit reduced matrix element. The rank-0 part is dropped; the rank-1
/// part vanishes because `r_k r_l` is symmetric.
pub fn cartesian_rank2<T: Real>(j: HalfInt, a: &[[T; 3]; 3]) -> Result<Operator<T>> {
    let u = cartesian_to_spherical::<T>();
    let mut b = [[Cx::new(T::zero(), T::zero()); 3]; 3];
    for k in 0..3 {
        for l in 0..3 {
            let sym = (a[k][l] + a[l][k]) * T::lit(0.5);
            if sym == T::zero() {
                continue;
            }
            for q1 in 0..3 {
                for q2 in 0..3 {
                    b[q1][q2] += u[k][q1] * u[l][q2] * sym;
                }
            }
        }
    }
    let mut out = Operator::zeros(Basis::Multiplet { j });
    for big_q in -2..=2 {
        let mut coeff = Cx::new(T::zero(), T::zero());
        for q1 in -1i32..=1 {
            let q2 = big_q - q1;
            if q2.abs() > 1 {
                continue;
            }
            let c: T = clebsch_gordan(
                HalfInt::ONE,
                HalfInt::integer(q1),
                HalfInt::ONE,
                HalfInt::integer(q2),
                HalfInt::integer(2),
                HalfInt::integer(big_q),
            )?;
            coeff += b[(q1 + 1) as usize][(q2 + 1) as usize] * c;
        }
        if coeff.modulus() == T::zero() {
            continue;
        }
        let t = tensor_component::<T>(j, HalfInt::integer(2), HalfInt::integer(big_q))?;
        let add = Operator::new(out.basis(), t.matrix().map(|z| z * coeff))?;
        out = &out + &add;
    }
    Ok(out)
}
