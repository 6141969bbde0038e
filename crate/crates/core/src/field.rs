//! Exact base field: Gaussian rationals `a + b i` with `a, b` in `Q`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational number.
pub type Q = BigRational;

/// Shorthand for building a rational from two machine integers.
pub fn q(num: i64, den: i64) -> Q {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn q_int(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

/// Writes `n` or `n/d` for a rational.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Element of `Q(i)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct FieldScalar {
    pub re: Q,
    pub im: Q,
}

impl FieldScalar {
    pub fn new(re: Q, im: Q) -> Self {
        Self { re, im }
    }

    pub fn real(re: Q) -> Self {
        Self { re, im: Q::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(q_int(n))
    }

    pub fn gaussian(re: i64, im: i64) -> Self {
        Self::new(q_int(re), q_int(im))
    }

    pub fn i() -> Self {
        Self::new(Q::zero(), Q::one())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// `|z|^2`, always rational.
    pub fn norm_sqr(&self) -> Q {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(Self::new(&self.re / &n, -&self.im / &n))
    }

    pub fn to_c64(&self) -> (f64, f64) {
        (rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

pub fn rat_to_f64(x: &Q) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl Zero for FieldScalar {
    fn zero() -> Self {
        Self::new(Q::zero(), Q::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for FieldScalar {
    fn one() -> Self {
        Self::real(Q::one())
    }
}

impl PartialOrd for FieldScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on `(re, im)`; only used for canonical ordering, not as a field order.
impl Ord for FieldScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.re.cmp(&other.re).then_with(|| self.im.cmp(&other.im))
    }
}

impl fmt::Display for FieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_q(&self.re)),
            (true, false) => write!(f, "{}i", fmt_q(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "{}{}{}i", fmt_q(&self.re), sign, fmt_q(&self.im.abs()))
            }
        }
    }
}

impl<'a> Add<&'a FieldScalar> for &'a FieldScalar {
    type Output = FieldScalar;
    fn add(self, rhs: &FieldScalar) -> FieldScalar {
        FieldScalar::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Add for FieldScalar {
    type Output = FieldScalar;
    fn add(self, rhs: FieldScalar) -> FieldScalar {
        &self + &rhs
    }
}

impl AddAssign<&FieldScalar> for FieldScalar {
    fn add_assign(&mut self, rhs: &FieldScalar) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl<'a> Sub<&'a FieldScalar> for &'a FieldScalar {
    type Output = FieldScalar;
    fn sub(self, rhs: &FieldScalar) -> FieldScalar {
        FieldScalar::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Sub for FieldScalar {
    type Output = FieldScalar;
    fn sub(self, rhs: FieldScalar) -> FieldScalar {
        &self - &rhs
    }
}

impl SubAssign<&FieldScalar> for FieldScalar {
    fn sub_assign(&mut self, rhs: &FieldScalar) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl<'a> Mul<&'a FieldScalar> for &'a FieldScalar {
    type Output = FieldScalar;
    fn mul(self, rhs: &FieldScalar) -> FieldScalar {
        FieldScalar::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Mul for FieldScalar {
    type Output = FieldScalar;
    fn mul(self, rhs: FieldScalar) -> FieldScalar {
        &self * &rhs
    }
}

impl MulAssign<&FieldScalar> for FieldScalar {
    fn mul_assign(&mut self, rhs: &FieldScalar) {
        *self = &*self * rhs;
    }
}

impl<'a> Div<&'a FieldScalar> for &'a FieldScalar {
    type Output = FieldScalar;
    /// Panics on division by zero, like the rational division it is built on.
    fn div(self, rhs: &FieldScalar) -> FieldScalar {
        self * &rhs.inv().expect("division by zero in Q(i)")
    }
}

impl Neg for FieldScalar {
    type Output = FieldScalar;
    fn neg(self) -> FieldScalar {
        FieldScalar::new(-self.re, -self.im)
    }
}

impl Neg for &FieldScalar {
    type Output = FieldScalar;
    fn neg(self) -> FieldScalar {
        FieldScalar::new(-&self.re, -&self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_arithmetic_is_exact() {
        let a = FieldScalar::new(q(1, 3), q(2, 5));
        let b = FieldScalar::new(q(-7, 2), q(1, 1));
        let prod = &a * &b;
        assert_eq!(&(&prod / &b), &a);
        assert_eq!(&a + &(-&a), FieldScalar::zero());
        assert_eq!(&FieldScalar::i() * &FieldScalar::i(), -FieldScalar::one());
    }

    #[test]
    fn zero_has_no_inverse() {
        assert!(FieldScalar::zero().inv().is_none());
    }

    #[test]
    fn display_forms() {
        assert_eq!(FieldScalar::gaussian(2, 0).to_string(), "2");
        assert_eq!(FieldScalar::new(q(0, 1), q(-1, 2)).to_string(), "-1/2i");
        assert_eq!(FieldScalar::gaussian(1, -3).to_string(), "1-3i");
    }
}
