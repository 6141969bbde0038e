//! Certified sign of `Re(c · e^{-2πix})` for `c ∈ Q(i)` and rational `x`.
//!
//! When `arg c` is a multiple of `1/8` turn the sign is decided exactly; these
//! are the only Gaussian rationals with rational argument, so for any other
//! `c` the quantity is never zero and rational interval enclosures of
//! increasing precision eventually separate it from zero.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::field::{fmt_q, q, FieldScalar, Q};

pub const DEFAULT_MAX_PRECISION_BITS: u32 = 4096;
pub const PRECISION_ENV: &str = "NOVISTOKE_MAX_PRECISION";
const START_BITS: u32 = 48;

static MAX_BITS: AtomicU32 = AtomicU32::new(0);

/// Precision cap for interval refinement. Resolution order: an explicit
/// [`set_max_precision_bits`], then `NOVISTOKE_MAX_PRECISION`, then the default.
pub fn max_precision_bits() -> u32 {
    match MAX_BITS.load(AtomicOrdering::Relaxed) {
        0 => std::env::var(PRECISION_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
            .filter(|&b| b > 0)
            .unwrap_or(DEFAULT_MAX_PRECISION_BITS),
        b => b,
    }
}

pub fn set_max_precision_bits(bits: u32) {
    MAX_BITS.store(bits, AtomicOrdering::Relaxed);
}

/// Argument of `c` in turns when it is a multiple of `1/8`.
pub fn octant_turns(c: &FieldScalar) -> Option<Q> {
    let (re, im) = (&c.re, &c.im);
    let zero = Q::zero();
    let eighths = match (re.cmp(&zero), im.cmp(&zero)) {
        (Ordering::Equal, Ordering::Equal) => return None,
        (Ordering::Greater, Ordering::Equal) => 0,
        (Ordering::Equal, Ordering::Greater) => 2,
        (Ordering::Less, Ordering::Equal) => 4,
        (Ordering::Equal, Ordering::Less) => 6,
        _ if re.abs() == im.abs() => match (re.is_positive(), im.is_positive()) {
            (true, true) => 1,
            (false, true) => 3,
            (false, false) => 5,
            (true, false) => 7,
        },
        _ => return None,
    };
    Some(q(eighths, 8))
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: &Q) -> Q {
    x - x.floor()
}

/// Sign of `cos(2π y)` for rational `y`.
pub fn cos_turn_sign(y: &Q) -> Ordering {
    let f = frac(y);
    let quarter = q(1, 4);
    let three_quarters = q(3, 4);
    if f == quarter || f == three_quarters {
        Ordering::Equal
    } else if f < quarter || f > three_quarters {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

/// Sign of `Re(c · e^{-2πix})`, i.e. of `cos(arg c - 2πx)`.
pub fn sign_re_rotated(c: &FieldScalar, x: &Q) -> Result<Ordering> {
    if c.re.is_zero() && c.im.is_zero() {
        return Ok(Ordering::Equal);
    }
    if let Some(alpha) = octant_turns(c) {
        return Ok(cos_turn_sign(&(alpha - x)));
    }
    if let Some(o) = float_filter(c, x) {
        return Ok(o);
    }
    let cap = max_precision_bits();
    let mut bits = START_BITS.min(cap);
    loop {
        let iv = re_rotated_enclosure(c, x, bits);
        if iv.lo.is_positive() {
            return Ok(Ordering::Greater);
        }
        if iv.hi.is_negative() {
            return Ok(Ordering::Less);
        }
        if bits >= cap {
            return Err(Error::UndecidableSign {
                what: format!("Re(({}) e^(-2 pi i {}))", c, fmt_q(x)),
                max_bits: cap,
            });
        }
        bits = (bits * 2).min(cap);
    }
}

/// Double-precision evaluation, trusted only far from zero. The margin
/// exceeds the combined rounding and libm error by several orders.
fn float_filter(c: &FieldScalar, x: &Q) -> Option<Ordering> {
    let a = crate::field::rat_to_f64(&c.re);
    let b = crate::field::rat_to_f64(&c.im);
    let t = crate::field::rat_to_f64(&frac(x));
    if !(a.is_finite() && b.is_finite() && t.is_finite()) {
        return None;
    }
    let (s, co) = (std::f64::consts::TAU * t).sin_cos();
    let v = a * co + b * s;
    let margin = 1e-9 * (a.abs() + b.abs());
    if margin == 0.0 || !margin.is_normal() {
        return None;
    }
    if v > margin {
        Some(Ordering::Greater)
    } else if v < -margin {
        Some(Ordering::Less)
    } else {
        None
    }
}

/// Closed rational interval `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatInterval {
    pub lo: Q,
    pub hi: Q,
}

impl RatInterval {
    pub fn point(x: Q) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    fn add(&self, o: &Self) -> Self {
        Self {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    fn neg(&self) -> Self {
        Self {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    fn mul(&self, o: &Self) -> Self {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Self { lo, hi }
    }

    fn scale(&self, k: &Q) -> Self {
        self.mul(&Self::point(k.clone()))
    }

    fn widen(&self, e: &Q) -> Self {
        Self {
            lo: &self.lo - e,
            hi: &self.hi + e,
        }
    }

    /// Outward rounding to a dyadic grid of `bits` fractional bits.
    fn round_out(&self, bits: u32) -> Self {
        let scale = BigInt::one() << bits;
        let s = Q::from_integer(scale.clone());
        let lo = (&self.lo * &s).floor() / &s;
        let hi = (&self.hi * &s).ceil() / &s;
        Self { lo, hi }
    }

    fn abs_max(&self) -> Q {
        let a = self.lo.abs();
        let b = self.hi.abs();
        if a > b {
            a
        } else {
            b
        }
    }

    pub fn midpoint_f64(&self) -> f64 {
        crate::field::rat_to_f64(&((&self.lo + &self.hi) / Q::from_integer(2.into())))
    }
}

fn eps(bits: u32) -> Q {
    Q::new(BigInt::one(), BigInt::one() << bits)
}

/// Enclosure of `arctan(1/k)` for integer `k ≥ 2`.
fn arctan_inv(k: i64, bits: u32) -> RatInterval {
    let target = eps(bits + 4);
    let k2 = Q::from_integer(BigInt::from(k * k));
    let mut power = RatInterval::point(Q::new(BigInt::one(), BigInt::from(k)));
    let mut sum = RatInterval::point(Q::zero());
    let mut n: i64 = 0;
    loop {
        let term = power.scale(&Q::new(BigInt::one(), BigInt::from(2 * n + 1)));
        if term.hi < target {
            // alternating series with decreasing terms: remainder below the next term
            return sum.widen(&term.hi);
        }
        sum = if n.is_even() { sum.add(&term) } else { sum.add(&term.neg()) };
        sum = sum.round_out(bits + 8);
        power = power.scale(&(Q::one() / &k2)).round_out(bits + 8);
        n += 1;
    }
}

/// Enclosure of `π`, via `π = 16 atan(1/5) - 4 atan(1/239)`. Memoized per precision.
pub fn pi_enclosure(bits: u32) -> RatInterval {
    static CACHE: OnceLock<Mutex<HashMap<u32, RatInterval>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().expect("pi cache poisoned").get(&bits) {
        return p.clone();
    }
    let p = compute_pi(bits);
    cache
        .lock()
        .expect("pi cache poisoned")
        .insert(bits, p.clone());
    p
}

fn compute_pi(bits: u32) -> RatInterval {
    let a = arctan_inv(5, bits + 6).scale(&Q::from_integer(16.into()));
    let b = arctan_inv(239, bits + 6).scale(&Q::from_integer(4.into()));
    a.add(&b.neg()).round_out(bits + 2)
}

/// Enclosures of `(cos y, sin y)` for `y` in a small interval (`|y| ≤ 1`).
fn cos_sin_small(y: &RatInterval, bits: u32) -> (RatInterval, RatInterval) {
    let target = eps(bits + 4);
    let ymax = y.abs_max();
    let ymax2 = &ymax * &ymax;
    let y2 = y.mul(y);
    let mut cos = RatInterval::point(Q::one());
    let mut sin = y.clone();
    let mut cterm = RatInterval::point(Q::one());
    let mut sterm = y.clone();
    // |y|^{2n+2} / (2n+2)! bounds the first omitted term of both series
    let mut rem = &ymax2 / Q::from_integer(2.into());
    let mut n: i64 = 1;
    loop {
        let c_div = Q::from_integer(BigInt::from((2 * n - 1) * (2 * n)));
        let s_div = Q::from_integer(BigInt::from((2 * n) * (2 * n + 1)));
        cterm = cterm.mul(&y2).scale(&(-Q::one() / c_div)).round_out(bits + 8);
        sterm = sterm.mul(&y2).scale(&(-Q::one() / s_div)).round_out(bits + 8);
        cos = cos.add(&cterm).round_out(bits + 8);
        sin = sin.add(&sterm).round_out(bits + 8);
        rem = &rem * &ymax2 / Q::from_integer(BigInt::from((2 * n + 1) * (2 * n + 2)));
        if rem < target {
            return (cos.widen(&rem), sin.widen(&rem));
        }
        n += 1;
    }
}

/// Enclosures of `(cos 2πx, sin 2πx)` for rational `x`.
pub fn cos_sin_turn(x: &Q, bits: u32) -> (RatInterval, RatInterval) {
    let u = frac(x);
    let four_u = &u * Q::from_integer(4.into());
    let k = (&four_u + q(1, 2)).floor();
    let v = &u - &k / Q::from_integer(4.into());
    let pi = pi_enclosure(bits + 8);
    let y = pi.scale(&(v * Q::from_integer(2.into())));
    let (c, s) = cos_sin_small(&y, bits + 4);
    let quadrant = k.to_integer().mod_floor(&BigInt::from(4)).to_i64().unwrap_or(0);
    match quadrant {
        0 => (c, s),
        1 => (s.neg(), c),
        2 => (c.neg(), s.neg()),
        _ => (s, c.neg()),
    }
}

/// Enclosure of `Re(c · e^{-2πix}) = a cos 2πx + b sin 2πx` for `c = a + bi`.
pub fn re_rotated_enclosure(c: &FieldScalar, x: &Q, bits: u32) -> RatInterval {
    let (cs, sn) = cos_sin_turn(x, bits);
    cs.scale(&c.re).add(&sn.scale(&c.im))
}

/// `arg c / 2π` in `[0, 1)`, as an `f64` approximation.
pub fn arg_turns_f64(c: &FieldScalar) -> f64 {
    let (re, im) = c.to_c64();
    let t = im.atan2(re) / std::f64::consts::TAU;
    if t < 0.0 {
        t + 1.0
    } else {
        t
    }
}
