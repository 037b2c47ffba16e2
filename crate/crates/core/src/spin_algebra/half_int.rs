use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integer or half-integer, stored as twice its value so that
/// angular-momentum quantum numbers are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    /// Builds the value `twice / 2`.
    #[inline]
    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    #[inline]
    pub const fn integer(n: i32) -> Self {
        HalfInt(2 * n)
    }

    #[inline]
    pub const fn twice(self) -> i32 {
        self.0
    }

    #[inline]
    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    #[inline]
    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// `2j + 1`, the multiplet size. Only meaningful for `j >= 0`.
    #[inline]
    pub fn multiplicity(self) -> usize {
        (self.0 + 1).max(0) as usize
    }

    /// The integer value when `self` is integral.
    #[inline]
    pub fn as_integer(self) -> Option<i32> {
        self.is_integer().then_some(self.0 / 2)
    }

    /// Projections `-j, -j+1, ..., j` in ascending order.
    pub fn projections(self) -> impl DoubleEndedIterator<Item = HalfInt> + Clone {
        let j = self.0;
        (0..self.multiplicity() as i32).map(move |k| HalfInt(-j + 2 * k))
    }

    /// Checks that `self` is a valid `j`-type quantum number.
    pub fn check_j(self) -> Result<()> {
        if self.0 < 0 {
            return Err(Error::QuantumNumber(format!("j = {self} is negative")));
        }
        Ok(())
    }

    /// Checks that `m` is a valid projection of `self`.
    pub fn check_projection(self, m: HalfInt) -> Result<()> {
        self.check_j()?;
        if (self.0 - m.0).rem_euclid(2) != 0 {
            return Err(Error::QuantumNumber(format!("m = {m} and j = {self} have mismatched parity")));
        }
        if m.0.abs() > self.0 {
            return Err(Error::QuantumNumber(format!("|m| = {} exceeds j = {self}", m.abs())));
        }
        Ok(())
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::QuantumNumber(format!("cannot parse `{s}` as a half-integer"));
        match s.split_once('/') {
            Some((num, "2")) => num.trim().parse::<i32>().map(HalfInt).map_err(|_| bad()),
            Some(_) => Err(bad()),
            None => s.parse::<i32>().map(HalfInt::integer).map_err(|_| bad()),
        }
    }
}

impl From<i32> for HalfInt {
    fn from(n: i32) -> Self {
        HalfInt::integer(n)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: Self) -> Self {
        HalfInt(self.0 + rhs.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: Self) -> Self {
        HalfInt(self.0 - rhs.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> Self {
        HalfInt(-self.0)
    }
}

/// Shorthand for `HalfInt::from_twice`.
#[inline]
pub const fn h(twice: i32) -> HalfInt {
    HalfInt::from_twice(twice)
}
