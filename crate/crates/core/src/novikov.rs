//! The finite Novikov ring `Λ = k[Q≥0]`: finite sums `Σ c_a T^a`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{fmt_q, FieldScalar, Q};

/// Element of `Λ`, stored as `(exponent, coefficient)` pairs with strictly
/// increasing exponents and nonzero coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct NovikovScalar {
    terms: Vec<(Q, FieldScalar)>,
}

impl NovikovScalar {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(Q::zero(), FieldScalar::one())
    }

    /// `c · T^a`. Negative exponents are rejected.
    pub fn monomial(exponent: Q, coeff: FieldScalar) -> Self {
        Self::from_terms(vec![(exponent, coeff)]).expect("monomial exponent must be >= 0")
    }

    /// `T^a`.
    pub fn t_pow(exponent: Q) -> Self {
        Self::monomial(exponent, FieldScalar::one())
    }

    /// Builds a normalized element from arbitrary terms: duplicates are merged,
    /// zero coefficients dropped.
    pub fn from_terms(mut terms: Vec<(Q, FieldScalar)>) -> Result<Self> {
        if let Some((e, _)) = terms.iter().find(|(e, _)| e.is_negative()) {
            return Err(Error::InvalidInput(format!(
                "Novikov exponent {} is negative",
                fmt_q(e)
            )));
        }
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Q, FieldScalar)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match out.last_mut() {
                Some((le, lc)) if *le == e => *lc += &c,
                _ => out.push((e, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Ok(Self { terms: out })
    }

    pub fn terms(&self) -> &[(Q, FieldScalar)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Minimal exponent with nonzero coefficient; `None` stands for `+∞` (the zero element).
    pub fn valuation(&self) -> Option<Q> {
        self.terms.first().map(|(e, _)| e.clone())
    }

    /// The reduction `Λ → k`, `T^a ↦ 1`.
    pub fn reduce_at_t_equals_1(&self) -> FieldScalar {
        let mut acc = FieldScalar::zero();
        for (_, c) in &self.terms {
            acc += c;
        }
        acc
    }

    /// Multiplies by `T^a`.
    pub fn shift(&self, a: &Q) -> Self {
        assert!(!a.is_negative());
        Self {
            terms: self.terms.iter().map(|(e, c)| (e + a, c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &FieldScalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }
}

fn merge(a: &[(Q, FieldScalar)], b: &[(Q, FieldScalar)], negate_b: bool) -> NovikovScalar {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        let bj = |j: usize| {
            if negate_b {
                -&b[j].1
            } else {
                b[j].1.clone()
            }
        };
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0.clone(), bj(j)));
            j += 1;
        } else {
            let c = &a[i].1 + &bj(j);
            if !c.is_zero() {
                out.push((a[i].0.clone(), c));
            }
            i += 1;
            j += 1;
        }
    }
    NovikovScalar { terms: out }
}

impl Add for &NovikovScalar {
    type Output = NovikovScalar;
    fn add(self, rhs: &NovikovScalar) -> NovikovScalar {
        merge(&self.terms, &rhs.terms, false)
    }
}

impl Sub for &NovikovScalar {
    type Output = NovikovScalar;
    fn sub(self, rhs: &NovikovScalar) -> NovikovScalar {
        merge(&self.terms, &rhs.terms, true)
    }
}

impl Neg for &NovikovScalar {
    type Output = NovikovScalar;
    fn neg(self) -> NovikovScalar {
        NovikovScalar {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Mul for &NovikovScalar {
    type Output = NovikovScalar;
    fn mul(self, rhs: &NovikovScalar) -> NovikovScalar {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                terms.push((ea + eb, ca * cb));
            }
        }
        NovikovScalar::from_terms(terms).expect("sum of nonnegative exponents")
    }
}

impl Add for NovikovScalar {
    type Output = NovikovScalar;
    fn add(self, rhs: NovikovScalar) -> NovikovScalar {
        &self + &rhs
    }
}

impl Mul for NovikovScalar {
    type Output = NovikovScalar;
    fn mul(self, rhs: NovikovScalar) -> NovikovScalar {
        &self * &rhs
    }
}

impl fmt::Display for NovikovScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| format!("({})T^{}", c, fmt_q(e)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{q, q_int};
    use proptest::prelude::*;

    fn t(num: i64, den: i64) -> NovikovScalar {
        NovikovScalar::t_pow(q(num, den))
    }

    fn c(n: i64) -> FieldScalar {
        FieldScalar::from_int(n)
    }

    #[test]
    fn add_examples() {
        let two = &t(0, 1) + &t(0, 1);
        assert_eq!(two, NovikovScalar::monomial(q_int(0), c(2)));
        let neg = NovikovScalar::monomial(q(1, 2), c(-1));
        assert!((&t(1, 2) + &neg).is_zero());
        let lhs = &(&t(0, 1) + &t(1, 1)) + &t(1, 3);
        let exps: Vec<Q> = lhs.terms().iter().map(|(e, _)| e.clone()).collect();
        assert_eq!(exps, vec![q(0, 1), q(1, 3), q(1, 1)]);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(&t(1, 2) * &t(1, 2), t(1, 1));
        assert!((&NovikovScalar::zero() * &t(3, 7)).is_zero());
        let a = &t(0, 1) + &t(1, 1);
        let b = &t(0, 1) - &t(1, 1);
        assert_eq!(&a * &b, &t(0, 1) - &t(2, 1));
    }

    #[test]
    fn valuation_examples() {
        let x = &t(2, 1) + &NovikovScalar::monomial(q_int(5), c(3));
        assert_eq!(x.valuation(), Some(q_int(2)));
        assert_eq!(NovikovScalar::zero().valuation(), None);
        assert_eq!(NovikovScalar::one().valuation(), Some(q_int(0)));
    }

    #[test]
    fn reduction_examples() {
        assert_eq!((&t(0, 1) + &t(3, 2)).reduce_at_t_equals_1(), c(2));
        assert_eq!(t(17, 5).reduce_at_t_equals_1(), c(1));
        assert!((&t(0, 1) - &t(1, 1)).reduce_at_t_equals_1().is_zero());
    }

    #[test]
    fn negative_exponent_rejected() {
        assert!(NovikovScalar::from_terms(vec![(q(-1, 2), c(1))]).is_err());
    }

    fn arb_scalar() -> impl Strategy<Value = NovikovScalar> {
        prop::collection::vec((0i64..12, 1i64..4, -3i64..4, -2i64..3), 0..5).prop_map(|ts| {
            NovikovScalar::from_terms(
                ts.into_iter()
                    .map(|(n, d, re, im)| (q(n, d), FieldScalar::gaussian(re, im)))
                    .collect(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_scalar(), b in arb_scalar(), x in arb_scalar()) {
            prop_assert_eq!(&(&a * &b) * &x, &a * &(&b * &x));
            prop_assert_eq!(&a * &(&b + &x), &(&a * &b) + &(&a * &x));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a + &b, &b + &a);
        }

        #[test]
        fn valuation_is_additive(a in arb_scalar(), b in arb_scalar()) {
            prop_assume!(!a.is_zero() && !b.is_zero());
            let v = (&a * &b).valuation().unwrap();
            prop_assert_eq!(v, a.valuation().unwrap() + b.valuation().unwrap());
        }

        #[test]
        fn reduction_is_a_ring_map(a in arb_scalar(), b in arb_scalar()) {
            prop_assert_eq!(
                (&a * &b).reduce_at_t_equals_1(),
                &a.reduce_at_t_equals_1() * &b.reduce_at_t_equals_1()
            );
            prop_assert_eq!(
                (&a + &b).reduce_at_t_equals_1(),
                &a.reduce_at_t_equals_1() + &b.reduce_at_t_equals_1()
            );
        }
    }
}
