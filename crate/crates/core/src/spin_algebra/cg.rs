//! Clebsch-Gordan coefficients in exact arithmetic.
//!
//! A coefficient is `sign * sqrt(q)` with `q` rational, so it is stored as a
//! sign and an exact square. Products and quotients of coefficients stay
//! exact; conversion to floating point happens only in [`ExactCg::value`].

use std::ops::{Div, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::half_int::HalfInt;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// An exact Clebsch-Gordan coefficient (or product/quotient of them).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactCg {
    negative: bool,
    square: BigRational,
}

impl ExactCg {
    pub fn zero() -> Self {
        ExactCg { negative: false, square: BigRational::zero() }
    }

    pub fn one() -> Self {
        ExactCg { negative: false, square: BigRational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.square.is_zero()
    }

    /// The exact square of the coefficient.
    pub fn squared(&self) -> &BigRational {
        &self.square
    }

    /// -1, 0 or +1.
    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn to_f64(&self) -> f64 {
        let mag = self.square.to_f64().unwrap_or(f64::NAN).sqrt();
        if self.negative {
            -mag
        } else {
            mag
        }
    }

    pub fn value<T: Real>(&self) -> T {
        T::lit(self.to_f64())
    }
}

impl Mul for &ExactCg {
    type Output = ExactCg;
    fn mul(self, rhs: &ExactCg) -> ExactCg {
        let square = &self.square * &rhs.square;
        let negative = !square.is_zero() && (self.negative ^ rhs.negative);
        ExactCg { negative, square }
    }
}

impl Div for &ExactCg {
    type Output = ExactCg;
    /// Panics when `rhs` is zero.
    fn div(self, rhs: &ExactCg) -> ExactCg {
        assert!(!rhs.is_zero(), "division by a vanishing Clebsch-Gordan coefficient");
        let square = &self.square / &rhs.square;
        let negative = !square.is_zero() && (self.negative ^ rhs.negative);
        ExactCg { negative, square }
    }
}

fn factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    (2..=n.max(1)).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `(a + b + ...)` for half-integers whose sum must be an integer.
fn int_of(twice: i32) -> Option<i32> {
    (twice % 2 == 0).then_some(twice / 2)
}

/// Condon-Shortley coefficient `<j1 m1; j2 m2 | J M>` via the Racah sum.
///
/// Returns zero for non-conserved `M`, violated triangle rule or
/// projections outside their range; errors only on parity mismatches
/// between a `j` and its `m`, or on negative `j`.
pub fn clebsch_gordan_exact(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<ExactCg> {
    for (jj, mm) in [(j1, m1), (j2, m2), (j, m)] {
        jj.check_j()?;
        if (jj.twice() - mm.twice()).rem_euclid(2) != 0 {
            return Err(Error::QuantumNumber(format!("m = {mm} and j = {jj} have mismatched parity")));
        }
    }
    if m1 + m2 != m {
        return Ok(ExactCg::zero());
    }
    if m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return Ok(ExactCg::zero());
    }
    if j > j1 + j2 || j < (j1 - j2).abs() {
        return Ok(ExactCg::zero());
    }
    let (j1t, m1t, j2t, m2t, jt, mt) = (j1.twice(), m1.twice(), j2.twice(), m2.twice(), j.twice(), m.twice());
    // j1 + j2 + J must be an integer for the coupling to exist at all.
    let Some(sum_all) = int_of(j1t + j2t + jt) else {
        return Ok(ExactCg::zero());
    };
    let a = int_of(j1t + j2t - jt).expect("parity checked");
    let b = int_of(j1t - j2t + jt).expect("parity checked");
    let c = int_of(-j1t + j2t + jt).expect("parity checked");
    let i = |t: i32| int_of(t).expect("parity checked");
    let (jp_m, jm_m) = (i(jt + mt), i(jt - mt));
    let (j1_m1m, j1_m1p) = (i(j1t - m1t), i(j1t + m1t));
    let (j2_m2m, j2_m2p) = (i(j2t - m2t), i(j2t + m2t));

    let mut pref_num = BigInt::from(jt + 1) * factorial(a) * factorial(b) * factorial(c);
    for n in [jp_m, jm_m, j1_m1m, j1_m1p, j2_m2m, j2_m2p] {
        pref_num *= factorial(n);
    }
    let pref = BigRational::new(pref_num, factorial(sum_all + 1));

    // Denominator arguments: k, a-k, (j1-m1)-k, (j2+m2)-k, (J-j2+m1)+k, (J-j1-m2)+k.
    let d4 = i(jt - j2t + m1t);
    let d5 = i(jt - j1t - m2t);
    let k_min = 0.max(-d4).max(-d5);
    let k_max = a.min(j1_m1m).min(j2_m2p);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial(a - k)
            * factorial(j1_m1m - k)
            * factorial(j2_m2p - k)
            * factorial(d4 + k)
            * factorial(d5 + k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let negative = sum.is_negative();
    let square = pref * &sum * &sum;
    Ok(ExactCg { negative: negative && !square.is_zero(), square })
}

/// Floating-point Clebsch-Gordan coefficient, computed exactly and rounded once.
pub fn clebsch_gordan<T: Real>(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<T> {
    clebsch_gordan_exact(j1, m1, j2, m2, j, m).map(|c| c.value())
}
