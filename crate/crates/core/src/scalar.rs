//! Entry types shared by the floating-point and exact construction paths.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{One, Zero};

/// Exact rationals used by the verification path.
pub type Rational = Ratio<i128>;

/// Field operations needed to assemble Hamiltonians and pseudometrics.
pub trait Entry:
    Clone
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    fn from_i32(value: i32) -> Self;

    fn magnitude(&self) -> f64;
}

impl Entry for f64 {
    fn from_i32(value: i32) -> Self {
        f64::from(value)
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Entry for Rational {
    fn from_i32(value: i32) -> Self {
        Ratio::from_integer(i128::from(value))
    }

    fn magnitude(&self) -> f64 {
        (*self.numer() as f64 / *self.denom() as f64).abs()
    }
}
