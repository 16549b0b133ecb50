//! Double-double scalar.
//!
//! A thin wrapper over [`twofloat::TwoFloat`] that reuses its addition,
//! multiplication and square root but replaces division: `TwoFloat / TwoFloat`
//! in twofloat 0.8 forms the reciprocal residual without a fused multiply-add
//! and returns quotients that are only correct to `f64` precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};

use num_traits::{Num, One, Zero};
use twofloat::TwoFloat;

#[derive(Clone, Copy, Default, PartialEq)]
pub struct Dd(TwoFloat);

impl Dd {
    pub const fn from_f64(x: f64) -> Self {
        Dd(TwoFloat::from_f64(x))
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.0.hi()
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.0.lo()
    }

    /// `hi + lo` rounded to the nearest `f64`.
    #[inline]
    pub fn to_f64(self) -> f64 {
        self.0.hi() + self.0.lo()
    }

    pub fn sqrt(self) -> Self {
        Dd(self.0.sqrt())
    }

    pub fn abs(self) -> Self {
        if self.0.hi() < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn recip(self) -> Self {
        Dd::from_f64(1.0) / self
    }

    pub fn powi(self, n: i32) -> Self {
        let mut base = self;
        let mut acc = Dd::from_f64(1.0);
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    pub fn floor(self) -> Self {
        let h = self.0.hi().floor();
        if h != self.0.hi() {
            return Dd::from_f64(h);
        }
        Dd(TwoFloat::new_add(h, self.0.lo().floor()))
    }

    pub fn is_finite(self) -> bool {
        self.0.hi().is_finite() && self.0.lo().is_finite()
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::from_f64(x)
    }
}

impl fmt::Debug for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.0.hi(), self.0.lo())
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        Dd(self.0 + rhs.0)
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        Dd(self.0 - rhs.0)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        Dd(self.0 * rhs.0)
    }
}

impl Div for Dd {
    type Output = Dd;
    /// Long division with two correction steps; each residual uses the exact
    /// `TwoFloat * f64` product.
    fn div(self, rhs: Dd) -> Dd {
        let b = rhs.0;
        let q1 = self.0.hi() / b.hi();
        if !q1.is_finite() {
            return Dd::from_f64(q1);
        }
        let r = self.0 - b * q1;
        let q2 = r.hi() / b.hi();
        let r = r - b * q2;
        let q3 = r.hi() / b.hi();
        Dd(TwoFloat::new_add(q1, q2) + q3)
    }
}

impl Rem for Dd {
    type Output = Dd;
    fn rem(self, rhs: Dd) -> Dd {
        let q = self / rhs;
        let t = if q.hi() < 0.0 {
            -(-q).floor()
        } else {
            q.floor()
        };
        self - t * rhs
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd(-self.0)
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, rhs: Dd) {
        *self = *self + rhs;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, rhs: Dd) {
        *self = *self - rhs;
    }
}

impl MulAssign for Dd {
    fn mul_assign(&mut self, rhs: Dd) {
        *self = *self * rhs;
    }
}

impl DivAssign for Dd {
    fn div_assign(&mut self, rhs: Dd) {
        *self = *self / rhs;
    }
}

impl Zero for Dd {
    fn zero() -> Self {
        Dd::from_f64(0.0)
    }

    fn is_zero(&self) -> bool {
        self.0.hi() == 0.0 && self.0.lo() == 0.0
    }
}

impl One for Dd {
    fn one() -> Self {
        Dd::from_f64(1.0)
    }
}

impl Num for Dd {
    type FromStrRadixErr = crate::error::Error;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(crate::error::Error::Parse(format!(
                "unsupported radix {radix}"
            )));
        }
        crate::numeric::parse_dd(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(x: f64) -> Dd {
        Dd::from_f64(x)
    }

    #[test]
    fn division_is_double_double_accurate() {
        let third = d(1.0) / d(3.0);
        assert!((third * d(3.0) - d(1.0)).abs().hi() < 1e-31);
        let x = d(2.0) / (d(3.0).powi(40) + d(1.0));
        let back = x * (d(3.0).powi(40) + d(1.0));
        assert!((back - d(2.0)).abs().hi() < 1e-30);
    }

    #[test]
    fn negative_powers_and_remainder() {
        let p = d(10.0).powi(-5);
        assert!((p * d(1e5) - d(1.0)).abs().hi() < 1e-31);
        assert_eq!((d(7.5) % d(2.0)).to_f64(), 1.5);
        assert_eq!((d(-7.5) % d(2.0)).to_f64(), -1.5);
    }

    #[test]
    fn floor_handles_low_word() {
        let x = d(5.0) - d(1e-20);
        assert_eq!(x.floor().to_f64(), 4.0);
        assert_eq!(d(5.25).floor().to_f64(), 5.0);
    }
}
