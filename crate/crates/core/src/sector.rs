//! Exponential factors at the puncture, angular sectors, and the dominance
//! classification of `Re φ` as `r → 0`.
//!
//! Angles are measured in turns. On a sector, `z = r e^{2πiθ}` and a term
//! `c z^{-q}` has real part `r^{-q} Re(c e^{-2πiqθ})`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::certified::{arg_turns_f64, frac, octant_turns, sign_re_rotated};
use crate::error::{Error, Result};
use crate::field::{fmt_q, q, rat_to_f64, FieldScalar, Q};

/// `φ(z) = Σ c_q z^{-q}` with `q > 0`, stored modulo bounded terms.
///
/// Orders are strictly decreasing and coefficients nonzero. The ramification
/// is kept minimal: the least common multiple of the order denominators.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PuiseuxFactor {
    ramification: u32,
    terms: Vec<(Q, FieldScalar)>,
}

impl PuiseuxFactor {
    /// Builds a factor from `(order, coefficient)` pairs. Orders `≤ 0` are
    /// dropped, every order denominator must divide `ramification`.
    pub fn new(ramification: u32, terms: Vec<(Q, FieldScalar)>) -> Result<Self> {
        if ramification == 0 {
            return Err(Error::InvalidInput("ramification must be positive".into()));
        }
        let r = BigInt::from(ramification);
        for (order, _) in &terms {
            if !(&r % order.denom()).is_zero() {
                return Err(Error::InvalidInput(format!(
                    "order {} is not compatible with ramification {}",
                    fmt_q(order),
                    ramification
                )));
            }
        }
        Ok(Self::normalized(terms))
    }

    fn normalized(mut terms: Vec<(Q, FieldScalar)>) -> Self {
        terms.retain(|(o, c)| o.is_positive() && !c.is_zero());
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Q, FieldScalar)> = Vec::with_capacity(terms.len());
        for (o, c) in terms {
            match out.last_mut() {
                Some((lo, lc)) if *lo == o => *lc += &c,
                _ => out.push((o, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        let ramification = out
            .iter()
            .fold(BigInt::one(), |acc, (o, _)| acc.lcm(o.denom()))
            .to_u32()
            .expect("ramification fits in u32");
        Self {
            ramification,
            terms: out,
        }
    }

    pub fn zero() -> Self {
        Self {
            ramification: 1,
            terms: Vec::new(),
        }
    }

    /// `c z^{-order}`.
    pub fn monomial(order: Q, coeff: FieldScalar) -> Self {
        Self::normalized(vec![(order, coeff)])
    }

    /// `k / z^n` for integers.
    pub fn pole(n: i64, k: i64) -> Self {
        Self::monomial(Q::from_integer(n.into()), FieldScalar::from_int(k))
    }

    pub fn ramification(&self) -> u32 {
        self.ramification
    }

    pub fn terms(&self) -> &[(Q, FieldScalar)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_unramified(&self) -> bool {
        self.ramification == 1
    }

    /// Highest-order term.
    pub fn leading(&self) -> Option<&(Q, FieldScalar)> {
        self.terms.first()
    }

    /// `φ(z^r)`.
    pub fn pullback(&self, r: u32) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidInput("pullback degree must be positive".into()));
        }
        let k = Q::from_integer(r.into());
        Ok(Self::normalized(
            self.terms.iter().map(|(o, c)| (o * &k, c.clone())).collect(),
        ))
    }

    /// Exact value at a nonzero Gaussian-rational point; unramified factors only.
    pub fn value_at(&self, z: &FieldScalar) -> Result<FieldScalar> {
        if !self.is_unramified() {
            return Err(Error::InvalidInput(
                "exact evaluation needs an unramified factor; pull back first".into(),
            ));
        }
        let w = z
            .inv()
            .ok_or_else(|| Error::OutsideSector("the puncture itself".into()))?;
        let mut acc = FieldScalar::zero();
        for (o, c) in &self.terms {
            let n = o.to_integer().to_u64().expect("small integer order");
            let mut p = FieldScalar::one();
            for _ in 0..n {
                p = &p * &w;
            }
            acc += &(c * &p);
        }
        Ok(acc)
    }

    /// Floating-point `Re φ(r e^{2πiθ})`, on the branch given by `θ`.
    pub fn re_f64(&self, radius: f64, theta: f64) -> f64 {
        self.terms
            .iter()
            .map(|(o, c)| {
                let qf = rat_to_f64(o);
                let (a, b) = c.to_c64();
                let ang = std::f64::consts::TAU * qf * theta;
                radius.powf(-qf) * (a * ang.cos() + b * ang.sin())
            })
            .sum()
    }
}

impl Add for &PuiseuxFactor {
    type Output = PuiseuxFactor;
    fn add(self, rhs: &PuiseuxFactor) -> PuiseuxFactor {
        PuiseuxFactor::normalized(self.terms.iter().chain(&rhs.terms).cloned().collect())
    }
}

impl Neg for &PuiseuxFactor {
    type Output = PuiseuxFactor;
    fn neg(self) -> PuiseuxFactor {
        PuiseuxFactor {
            ramification: self.ramification,
            terms: self.terms.iter().map(|(o, c)| (o.clone(), -c)).collect(),
        }
    }
}

impl Sub for &PuiseuxFactor {
    type Output = PuiseuxFactor;
    fn sub(self, rhs: &PuiseuxFactor) -> PuiseuxFactor {
        self + &(-rhs)
    }
}

impl Ord for PuiseuxFactor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.terms.len().cmp(&other.terms.len()).then_with(|| {
            for (a, b) in self.terms.iter().zip(&other.terms) {
                let o = a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1));
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for PuiseuxFactor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PuiseuxFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(o, c)| {
                let coeff = if c.im.is_zero() {
                    fmt_q(&c.re)
                } else {
                    format!("({})", c)
                };
                if o.is_one() {
                    format!("{}/z", coeff)
                } else {
                    format!("{}/z^{}", coeff, fmt_q(o))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Open arc of directions `(start, end)` in turns, `0 < end - start ≤ 1`.
/// The start is normalized into `[0, 1)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct SectorArc {
    start: Q,
    end: Q,
}

impl SectorArc {
    pub fn new(start: Q, end: Q) -> Result<Self> {
        let len = &end - &start;
        if !len.is_positive() || len > Q::one() {
            return Err(Error::InvalidInput(format!(
                "arc ({}, {}) must satisfy 0 < end - start <= 1",
                fmt_q(&start),
                fmt_q(&end)
            )));
        }
        let s = frac(&start);
        let e = &s + len;
        Ok(Self { start: s, end: e })
    }

    pub fn turns(sn: i64, sd: i64, en: i64, ed: i64) -> Result<Self> {
        Self::new(q(sn, sd), q(en, ed))
    }

    pub fn start(&self) -> &Q {
        &self.start
    }

    pub fn end(&self) -> &Q {
        &self.end
    }

    pub fn length(&self) -> Q {
        &self.end - &self.start
    }

    /// Lift of `θ` into `[start, start + 1)`.
    fn lift(&self, theta: &Q) -> Q {
        &self.start + frac(&(theta - &self.start))
    }

    /// Whether the direction `θ` lies in the open arc.
    pub fn contains(&self, theta: &Q) -> bool {
        let t = self.lift(theta);
        t > self.start && t < self.end
    }

    /// Whether the direction `θ` lies in the closed arc.
    pub fn contains_closed(&self, theta: &Q) -> bool {
        let t = self.lift(theta);
        t <= self.end || self.length().is_one()
    }

    /// Whether `other ⊆ self` as subsets of the circle.
    pub fn contains_arc(&self, other: &SectorArc) -> bool {
        if self.length().is_one() {
            let s = self.lift(&other.start);
            if s == self.start {
                return true;
            }
            return &s + other.length() <= &self.start + Q::one();
        }
        let s = self.lift(&other.start);
        s >= self.start && &s + other.length() <= self.end
    }

    /// Connected components of `self ∩ other`, each returned as an open arc.
    pub fn intersect(&self, other: &SectorArc) -> Vec<SectorArc> {
        let mut out = Vec::new();
        for shift in [-1i64, 0, 1] {
            let k = Q::from_integer(shift.into());
            let os = &other.start + &k;
            let oe = &other.end + &k;
            let s = if os > self.start { os } else { self.start.clone() };
            let e = if oe < self.end { oe } else { self.end.clone() };
            if s < e {
                out.push(SectorArc::new(s, e).expect("sub-arc of a valid arc"));
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for SectorArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_q(&self.start), fmt_q(&self.end))
    }
}

/// Where dominance is evaluated: an open sector at the puncture, or a single
/// ray `θ = angle`. A truncated ray `{r > b}` stays away from the puncture.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Region {
    Sector(SectorArc),
    Ray { angle: Q, truncated: Option<Q> },
}

impl Region {
    /// The positive real ray with boundary at the puncture.
    pub fn positive_real_ray() -> Self {
        Region::Ray {
            angle: Q::zero(),
            truncated: None,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Sector(a) => write!(f, "sector {}", a),
            Region::Ray {
                angle,
                truncated: None,
            } => write!(f, "ray {} from 0", fmt_q(angle)),
            Region::Ray {
                angle,
                truncated: Some(b),
            } => write!(f, "ray {} from {}", fmt_q(angle), fmt_q(b)),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, PartialOrd, Ord)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DominanceVerdict {
    Bounded,
    NegDivergent,
    PosDivergent,
    Zero,
}

impl DominanceVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            DominanceVerdict::Bounded => "BOUNDED",
            DominanceVerdict::NegDivergent => "NEG_DIVERGENT",
            DominanceVerdict::PosDivergent => "POS_DIVERGENT",
            DominanceVerdict::Zero => "ZERO",
        }
    }

    /// `max{0, Re φ}` stays bounded.
    pub fn is_bounded_above(self) -> bool {
        self != DominanceVerdict::PosDivergent
    }
}

impl fmt::Display for DominanceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sign of the `r^{-q}` coefficient of `Re φ` in direction `θ`.
fn term_sign(order: &Q, coeff: &FieldScalar, theta: &Q) -> Result<Ordering> {
    sign_re_rotated(coeff, &(order * theta))
}

/// Sign of the first term of `Re φ` that does not vanish in direction `θ`.
fn first_nonzero_sign(phi: &PuiseuxFactor, theta: &Q, skip: usize) -> Result<Ordering> {
    for (o, c) in &phi.terms[skip..] {
        let s = term_sign(o, c, theta)?;
        if s != Ordering::Equal {
            return Ok(s);
        }
    }
    Ok(Ordering::Equal)
}

/// Growth of `sup Re φ` as `r → 0` over the region.
pub fn dominance(phi: &PuiseuxFactor, region: &Region) -> Result<DominanceVerdict> {
    if phi.is_zero() {
        return Ok(DominanceVerdict::Zero);
    }
    match region {
        Region::Ray {
            truncated: Some(_), ..
        } => Ok(DominanceVerdict::Bounded),
        Region::Ray {
            angle,
            truncated: None,
        } => Ok(match first_nonzero_sign(phi, angle, 0)? {
            Ordering::Greater => DominanceVerdict::PosDivergent,
            Ordering::Less => DominanceVerdict::NegDivergent,
            Ordering::Equal => DominanceVerdict::Bounded,
        }),
        Region::Sector(arc) => dominance_on_arc(phi, arc),
    }
}

fn dominance_on_arc(phi: &PuiseuxFactor, arc: &SectorArc) -> Result<DominanceVerdict> {
    let (q0, c0) = phi.leading().expect("nonzero factor");
    // positive parts of the leading term have length 1/(2 q0); a grid finer
    // than that, together with both endpoints, meets every one of them
    let len = arc.length();
    let steps = (&len * q0 * Q::from_integer(2.into()))
        .floor()
        .to_integer()
        .to_u64()
        .expect("grid size")
        + 2;
    let n = Q::from_integer(steps.into());
    let mut endpoint_zero = Vec::new();
    for k in 0..=steps {
        let theta = arc.start() + &len * Q::from_integer(k.into()) / &n;
        match term_sign(q0, c0, &theta)? {
            Ordering::Greater => return Ok(DominanceVerdict::PosDivergent),
            Ordering::Equal if k == 0 || k == steps => endpoint_zero.push(theta),
            _ => {}
        }
    }
    for theta in &endpoint_zero {
        if first_nonzero_sign(phi, theta, 1)? == Ordering::Greater {
            return Ok(DominanceVerdict::PosDivergent);
        }
    }
    Ok(DominanceVerdict::NegDivergent)
}

/// A Stokes direction: exact when rational in turns, otherwise a certified
/// rational enclosure `lo < θ < hi`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StokesDirection {
    pub exact: Option<Q>,
    pub lo: Q,
    pub hi: Q,
    /// `(arg c, q)` descriptor of the leading term producing the direction.
    pub order: Q,
    pub coeff: FieldScalar,
}

impl StokesDirection {
    /// A rational representative inside the enclosure.
    pub fn representative(&self) -> Q {
        match &self.exact {
            Some(t) => t.clone(),
            None => (&self.lo + &self.hi) / Q::from_integer(2.into()),
        }
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn approx(&self) -> f64 {
        rat_to_f64(&self.representative())
    }
}

const ENCLOSURE_BITS: u32 = 40;

/// Directions in `[0, 1)` where the leading term of `Re(φ1 - φ2)` changes sign.
pub fn stokes_directions(
    phi1: &PuiseuxFactor,
    phi2: &PuiseuxFactor,
) -> Result<Vec<StokesDirection>> {
    let d = phi1 - phi2;
    let Some((order, coeff)) = d.leading().cloned() else {
        return Err(Error::IdenticalFactors);
    };
    // the leading sign is symmetric under swapping, so normalize the coefficient
    // orientation to make the descriptor independent of argument order
    let coeff = if (phi2 - phi1) < d { -&coeff } else { coeff };
    directions_of_term(&order, &coeff)
}

/// Zeros in `[0, 1)` of `θ ↦ Re(c e^{-2πiqθ})`: `θ = (α - 1/4 - k/2)/q`.
/// Memoized per term.
pub fn directions_of_term(order: &Q, coeff: &FieldScalar) -> Result<Vec<StokesDirection>> {
    type Cache = Mutex<HashMap<(Q, FieldScalar), Vec<StokesDirection>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (order.clone(), coeff.clone());
    if let Some(d) = cache.lock().expect("direction cache poisoned").get(&key) {
        return Ok(d.clone());
    }
    let d = compute_directions(order, coeff)?;
    cache.lock().expect("direction cache poisoned").insert(key, d.clone());
    Ok(d)
}

fn compute_directions(order: &Q, coeff: &FieldScalar) -> Result<Vec<StokesDirection>> {
    let two_q = order * Q::from_integer(2.into());
    let count = (two_q.ceil().to_integer()).to_i64().expect("small order") + 1;
    let mut out = Vec::new();
    match octant_turns(coeff) {
        Some(alpha) => {
            for k in -1..=count + 1 {
                let t = (&alpha - q(1, 4) - q(k, 2)) / order;
                let t = frac(&t);
                if !out.iter().any(|d: &StokesDirection| d.exact.as_ref() == Some(&t)) {
                    out.push(StokesDirection {
                        exact: Some(t.clone()),
                        lo: t.clone(),
                        hi: t,
                        order: order.clone(),
                        coeff: coeff.clone(),
                    });
                }
            }
        }
        None => {
            let alpha = arg_turns_f64(coeff);
            let qf = rat_to_f64(order);
            let mut approx: Vec<f64> = Vec::new();
            for k in -1..=count + 1 {
                let t = ((alpha - 0.25 - 0.5 * k as f64) / qf).rem_euclid(1.0);
                if !approx.iter().any(|a| circle_dist(*a, t) < 1e-9) {
                    approx.push(t);
                }
            }
            for t in approx {
                let (lo, hi) = enclose_zero(order, coeff, t)?;
                out.push(StokesDirection {
                    exact: None,
                    lo,
                    hi,
                    order: order.clone(),
                    coeff: coeff.clone(),
                });
            }
        }
    }
    out.sort_by_key(|a| a.representative());
    Ok(out)
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

fn f64_to_q(x: f64, bits: u32) -> Q {
    let scale = (1u64 << bits) as f64;
    Q::new(BigInt::from((x * scale).round() as i64), BigInt::one() << bits)
}

/// Certified bracket of a simple zero near `approx`, narrowed by bisection.
fn enclose_zero(order: &Q, coeff: &FieldScalar, approx: f64) -> Result<(Q, Q)> {
    let sign = |t: &Q| term_sign(order, coeff, t);
    let mut radius = 1e-9;
    let (mut lo, mut hi) = loop {
        let lo = f64_to_q(approx - radius, 52);
        let hi = f64_to_q(approx + radius, 52);
        let (sl, sh) = (sign(&lo)?, sign(&hi)?);
        if sl != sh && sl != Ordering::Equal && sh != Ordering::Equal {
            break (lo, hi);
        }
        radius *= 16.0;
        if radius > 0.01 {
            return Err(Error::UndecidableSign {
                what: format!("Stokes direction of ({}) z^-{}", coeff, fmt_q(order)),
                max_bits: crate::certified::max_precision_bits(),
            });
        }
    };
    let s_lo = sign(&lo)?;
    let width = Q::new(BigInt::one(), BigInt::one() << ENCLOSURE_BITS);
    while &hi - &lo > width {
        let mid = (&lo + &hi) / Q::from_integer(2.into());
        if sign(&mid)? == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Cyclic chain of open arcs covering the circle: arc `k` overlaps arc `k+1`
/// (indices mod `n`) and, for `n ≥ 3`, non-consecutive arcs are disjoint.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SectorCover {
    arcs: Vec<SectorArc>,
}

impl SectorCover {
    pub fn new(arcs: Vec<SectorArc>) -> Result<Self> {
        let n = arcs.len();
        if n < 2 {
            return Err(Error::InvalidCover(
                "a cover of the circle needs at least two arcs".into(),
            ));
        }
        let cover = Self { arcs };
        let mut pos = cover.arcs[0].start().clone();
        for k in 0..n {
            let a = &cover.arcs[k];
            let b = &cover.arcs[(k + 1) % n];
            let ov = cover.overlap(k);
            let Some(ov) = ov else {
                return Err(Error::InvalidCover(format!(
                    "arcs {} and {} do not overlap in order",
                    a,
                    b
                )));
            };
            // the chain must advance monotonically around the circle
            let step = frac(&(b.start() - a.start()));
            if step.is_zero() || ov.length() >= a.length() {
                return Err(Error::InvalidCover(format!(
                    "arc {} is not followed by a later arc",
                    a
                )));
            }
            pos += step;
        }
        if pos != cover.arcs[0].start() + Q::one() {
            return Err(Error::InvalidCover(
                "arcs wind around the circle more than once".into(),
            ));
        }
        if n >= 5 {
            // with monotone winding, reaching no further than the start of arc
            // k+2 keeps arc k clear of every non-adjacent arc
            for k in 0..n {
                let a = &cover.arcs[k];
                let c = &cover.arcs[(k + 2) % n];
                let c_start = a.start() + frac(&(c.start() - a.start()));
                if a.end() > &c_start || a.intersect(&cover.arcs[(k + 1) % n]).len() != 1 {
                    return Err(Error::InvalidCover(format!(
                        "arc {} meets a non-adjacent arc or its successor twice",
                        a
                    )));
                }
            }
            return Ok(cover);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let comps = cover.arcs[i].intersect(&cover.arcs[j]);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let expected = if n == 2 { 2 } else if adjacent { 1 } else { 0 };
                if comps.len() != expected {
                    return Err(Error::InvalidCover(format!(
                        "arcs {} and {} meet in {} components, expected {}",
                        cover.arcs[i],
                        cover.arcs[j],
                        comps.len(),
                        expected
                    )));
                }
            }
        }
        Ok(cover)
    }

    pub fn arcs(&self) -> &[SectorArc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// The overlap joining the end of arc `k` to the start of arc `k+1`.
    pub fn overlap(&self, k: usize) -> Option<SectorArc> {
        let n = self.arcs.len();
        let a = &self.arcs[k];
        let b = &self.arcs[(k + 1) % n];
        let s = a.start() + frac(&(b.start() - a.start()));
        let e_b = &s + b.length();
        let e = if a.end() < &e_b { a.end().clone() } else { e_b };
        if s > *a.start() && s < e {
            SectorArc::new(s, e).ok()
        } else {
            None
        }
    }

    pub fn overlaps(&self) -> Vec<SectorArc> {
        (0..self.len())
            .map(|k| self.overlap(k).expect("validated cover"))
            .collect()
    }

    /// Cover by two arcs, used when no Stokes direction needs isolating.
    pub fn trivial() -> Self {
        Self::new(vec![
            SectorArc::turns(-1, 8, 5, 8).unwrap(),
            SectorArc::turns(3, 8, 9, 8).unwrap(),
        ])
        .expect("valid two-arc cover")
    }

    /// Whether every arc of `self` lies in some arc of `coarse`.
    pub fn refines(&self, coarse: &SectorCover) -> bool {
        self.arcs
            .iter()
            .all(|a| coarse.arcs.iter().any(|c| c.contains_arc(a)))
    }
}

impl fmt::Display for SectorCover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.arcs.iter().map(|a| a.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// All Stokes directions of the pairwise differences, merged where their
/// enclosures cannot be separated.
pub fn all_directions(factors: &[PuiseuxFactor]) -> Result<Vec<StokesDirection>> {
    let mut distinct: Vec<PuiseuxFactor> = factors.to_vec();
    distinct.sort();
    distinct.dedup();
    let mut dirs: Vec<StokesDirection> = Vec::new();
    for i in 0..distinct.len() {
        for j in (i + 1)..distinct.len() {
            dirs.extend(stokes_directions(&distinct[i], &distinct[j])?);
        }
    }
    dirs.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut merged: Vec<StokesDirection> = Vec::new();
    for d in dirs {
        match merged.last_mut() {
            Some(m) if d.lo <= m.hi => {
                if d.hi > m.hi {
                    m.hi = d.hi.clone();
                }
                if m.exact != d.exact {
                    m.exact = None;
                }
            }
            _ => merged.push(d),
        }
    }
    Ok(merged)
}

/// Sector cover isolating every Stokes direction of every factor pair: one
/// small arc around each direction and one arc across each gap between them.
pub fn standard_cover(factors: &[PuiseuxFactor]) -> Result<SectorCover> {
    let dirs = all_directions(factors)?;
    if dirs.is_empty() {
        return Ok(SectorCover::trivial());
    }
    let m = dirs.len();
    let centers: Vec<Q> = dirs.iter().map(|d| d.representative()).collect();
    let mut min_gap = Q::one();
    for i in 0..m {
        let gap = if i + 1 < m {
            &centers[i + 1] - &centers[i]
        } else {
            &centers[0] + Q::one() - &centers[i]
        };
        if gap < min_gap {
            min_gap = gap;
        }
    }
    let mut delta = q(1, 16);
    let quarter_gap = min_gap / Q::from_integer(4.into());
    if quarter_gap < delta {
        delta = quarter_gap;
    }
    let half = &delta / Q::from_integer(2.into());
    let max_width = dirs.iter().map(|d| d.width()).max().unwrap();
    if max_width * Q::from_integer(4.into()) >= delta {
        return Err(Error::InvalidCover(
            "Stokes directions too close to separate".into(),
        ));
    }
    // endpoints snap to a dyadic grid finer than delta/8, which keeps every
    // containment and disjointness margin while keeping denominators small
    let mut grid = BigInt::from(8);
    while Q::new(BigInt::one(), grid.clone()) * Q::from_integer(8.into()) > delta {
        grid <<= 1;
    }
    let grid = Q::from_integer(grid);
    let snap = |x: Q| (x * &grid).round() / &grid;
    let mut arcs = Vec::with_capacity(2 * m);
    for i in 0..m {
        let c = &centers[i];
        let next = if i + 1 < m {
            centers[i + 1].clone()
        } else {
            &centers[0] + Q::one()
        };
        arcs.push(SectorArc::new(snap(c - &delta), snap(c + &delta))?);
        arcs.push(SectorArc::new(snap(c + &half), snap(&next - &half))?);
    }
    SectorCover::new(arcs)
}

/// Greedy cyclic chain through the components of pairwise arc intersections.
/// Returns the refined cover with, for each arc, its parent index in `a` and in `b`.
pub fn common_refinement(
    a: &SectorCover,
    b: &SectorCover,
) -> Result<(SectorCover, Vec<usize>, Vec<usize>)> {
    let mut cands: Vec<(SectorArc, usize, usize)> = Vec::new();
    for (i, x) in a.arcs.iter().enumerate() {
        for (j, y) in b.arcs.iter().enumerate() {
            for comp in x.intersect(y) {
                cands.push((comp, i, j));
            }
        }
    }
    cands.sort();
    cands.dedup_by(|p, q| p.0 == q.0);
    // every chain cover has an arc through a fixed point; start from those first
    let pin = cands
        .first()
        .map(|c| (c.0.start() + c.0.end()) / Q::from_integer(2.into()));
    let through_pin: Vec<usize> = (0..cands.len())
        .filter(|&k| pin.as_ref().is_some_and(|p| cands[k].0.contains(p)))
        .collect();
    let mut best = shortest_chain(&cands, through_pin);
    if best.is_none() {
        best = shortest_chain(&cands, 0..cands.len());
    }
    let chain = best.ok_or_else(|| {
        Error::InvalidCover("no common refinement forms a chain cover".into())
    })?;
    // rotate so the chain starts at the arc with the smallest start
    let first = (0..chain.len())
        .min_by(|&x, &y| cands[chain[x]].0.cmp(&cands[chain[y]].0))
        .unwrap();
    let chain: Vec<usize> = chain[first..].iter().chain(&chain[..first]).copied().collect();
    let cover = SectorCover::new(chain.iter().map(|&k| cands[k].0.clone()).collect())?;
    let pa = chain.iter().map(|&k| cands[k].1).collect();
    let pb = chain.iter().map(|&k| cands[k].2).collect();
    Ok((cover, pa, pb))
}

fn shortest_chain(
    cands: &[(SectorArc, usize, usize)],
    starts: impl IntoIterator<Item = usize>,
) -> Option<Vec<usize>> {
    let mut best: Option<Vec<usize>> = None;
    for start in starts {
        let Some(chain) = greedy_chain(cands, start) else { continue };
        if best.as_ref().is_some_and(|b| chain.len() >= b.len()) {
            continue;
        }
        let arcs: Vec<SectorArc> = chain.iter().map(|&k| cands[k].0.clone()).collect();
        if SectorCover::new(arcs).is_ok() {
            best = Some(chain);
        }
    }
    best
}

fn greedy_chain(cands: &[(SectorArc, usize, usize)], start: usize) -> Option<Vec<usize>> {
    let first = &cands[start].0;
    let base = first.start();
    let goal = base + Q::one();
    // every candidate lifted to start in (base, base + 1), in start order
    let mut lifted: Vec<(Q, Q, usize)> = cands
        .iter()
        .enumerate()
        .filter_map(|(k, (arc, _, _))| {
            let s = base + frac(&(arc.start() - base));
            (s > *base).then(|| {
                let e = &s + arc.length();
                (s, e, k)
            })
        })
        .collect();
    lifted.sort();
    let mut chain = vec![start];
    let mut reach = first.end().clone();
    let mut next = 0;
    let mut best: Option<(Q, usize)> = None;
    while reach < goal {
        while next < lifted.len() && lifted[next].0 < reach {
            let (_, e, k) = &lifted[next];
            let better = best
                .as_ref()
                .is_none_or(|(be, bk)| e > be || (e == be && k < bk));
            if better {
                best = Some((e.clone(), *k));
            }
            next += 1;
        }
        let (e, k) = best.clone()?;
        if e <= reach {
            return None;
        }
        chain.push(k);
        reach = e;
        if chain.len() > cands.len() + 1 {
            return None;
        }
    }
    Some(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::q_int;

    fn arc(sn: i64, sd: i64, en: i64, ed: i64) -> Region {
        Region::Sector(SectorArc::turns(sn, sd, en, ed).unwrap())
    }

    #[test]
    fn dominance_examples() {
        let inv_z = PuiseuxFactor::pole(1, 1);
        assert_eq!(
            dominance(&inv_z, &arc(1, 4, 3, 4)).unwrap(),
            DominanceVerdict::NegDivergent
        );
        assert_eq!(
            dominance(&inv_z, &arc(-1, 8, 1, 8)).unwrap(),
            DominanceVerdict::PosDivergent
        );
        assert_eq!(
            dominance(&PuiseuxFactor::zero(), &arc(0, 1, 1, 3)).unwrap(),
            DominanceVerdict::Zero
        );
    }

    #[test]
    fn endpoint_zero_defers_to_lower_terms() {
        // 1/z^2 is negative inside (1/8, 3/8) and vanishes at both ends
        let r = arc(1, 8, 3, 8);
        let i_over_z = PuiseuxFactor::monomial(q_int(1), FieldScalar::i());
        let up = &PuiseuxFactor::pole(2, 1) + &i_over_z;
        assert_eq!(dominance(&up, &r).unwrap(), DominanceVerdict::PosDivergent);
        let down = &PuiseuxFactor::pole(2, 1) - &i_over_z;
        assert_eq!(dominance(&down, &r).unwrap(), DominanceVerdict::NegDivergent);
        let mixed = &PuiseuxFactor::pole(2, 1) - &PuiseuxFactor::pole(1, 1);
        assert_eq!(dominance(&mixed, &r).unwrap(), DominanceVerdict::PosDivergent);
    }

    #[test]
    fn ray_classification() {
        let phi = &PuiseuxFactor::pole(2, 1) - &PuiseuxFactor::pole(1, 1);
        let ray = Region::positive_real_ray();
        assert_eq!(dominance(&phi, &ray).unwrap(), DominanceVerdict::PosDivergent);
        assert_eq!(dominance(&-&phi, &ray).unwrap(), DominanceVerdict::NegDivergent);
        let cut = Region::Ray {
            angle: Q::zero(),
            truncated: Some(q(1, 10)),
        };
        assert_eq!(dominance(&phi, &cut).unwrap(), DominanceVerdict::Bounded);
        let on_zero = Region::Ray {
            angle: q(1, 4),
            truncated: None,
        };
        assert_eq!(
            dominance(&PuiseuxFactor::pole(1, 1), &on_zero).unwrap(),
            DominanceVerdict::Bounded
        );
    }

    #[test]
    fn stokes_direction_examples() {
        let z = PuiseuxFactor::zero();
        let d: Vec<Q> = stokes_directions(&PuiseuxFactor::pole(1, 1), &z)
            .unwrap()
            .iter()
            .map(|d| d.exact.clone().unwrap())
            .collect();
        assert_eq!(d, vec![q(1, 4), q(3, 4)]);
        let d: Vec<Q> = stokes_directions(&PuiseuxFactor::pole(2, 1), &z)
            .unwrap()
            .iter()
            .map(|d| d.exact.clone().unwrap())
            .collect();
        assert_eq!(d, vec![q(1, 8), q(3, 8), q(5, 8), q(7, 8)]);
        assert_eq!(
            stokes_directions(&z, &z).unwrap_err(),
            Error::IdenticalFactors
        );
    }

    #[test]
    fn generic_direction_is_enclosed() {
        let phi = PuiseuxFactor::monomial(q_int(1), FieldScalar::gaussian(2, 1));
        let dirs = stokes_directions(&phi, &PuiseuxFactor::zero()).unwrap();
        assert_eq!(dirs.len(), 2);
        let alpha = arg_turns_f64(&FieldScalar::gaussian(2, 1));
        let expected = [alpha + 0.25, alpha + 0.75];
        for (d, e) in dirs.iter().zip(expected) {
            assert!(d.exact.is_none());
            assert!((d.approx() - e).abs() < 1e-10);
            assert!(d.width() < q(1, 1 << 30));
        }
    }

    #[test]
    fn standard_cover_examples() {
        let z = PuiseuxFactor::zero();
        let inv_z = PuiseuxFactor::pole(1, 1);
        let c = standard_cover(&[inv_z.clone(), z.clone()]).unwrap();
        assert_eq!(c.len(), 4);
        for a in c.arcs() {
            let n = [q(1, 4), q(3, 4)].iter().filter(|t| a.contains(t)).count();
            assert!(n <= 1);
        }
        assert_eq!(standard_cover(&[z]).unwrap().len(), 2);
        let c = standard_cover(&[inv_z, PuiseuxFactor::pole(2, 1)]).unwrap();
        assert!(c.len() >= 8);
    }

    #[test]
    fn pullback_examples() {
        let half = PuiseuxFactor::new(2, vec![(q(1, 2), FieldScalar::one())]).unwrap();
        assert_eq!(half.ramification(), 2);
        let p = half.pullback(2).unwrap();
        assert_eq!(p, PuiseuxFactor::pole(1, 1));
        assert!(p.is_unramified());
        assert_eq!(
            PuiseuxFactor::pole(1, 1).pullback(3).unwrap(),
            PuiseuxFactor::pole(3, 1)
        );
        assert!(PuiseuxFactor::zero().pullback(5).unwrap().is_zero());
    }

    #[test]
    fn bounded_terms_are_stripped() {
        let phi = PuiseuxFactor::new(
            1,
            vec![(q_int(0), FieldScalar::one()), (q_int(-2), FieldScalar::one())],
        )
        .unwrap();
        assert!(phi.is_zero());
        assert!(PuiseuxFactor::new(2, vec![(q(1, 3), FieldScalar::one())]).is_err());
    }

    #[test]
    fn cover_validation() {
        assert!(SectorCover::new(vec![SectorArc::turns(0, 1, 1, 1).unwrap()]).is_err());
        let gap = SectorCover::new(vec![
            SectorArc::turns(0, 1, 1, 4).unwrap(),
            SectorArc::turns(1, 2, 3, 4).unwrap(),
        ]);
        assert!(gap.is_err());
        let t = SectorCover::trivial();
        assert_eq!(t.overlaps().len(), 2);
    }

    #[test]
    fn refinement_of_trivial_and_standard() {
        let s = standard_cover(&[PuiseuxFactor::pole(1, 1), PuiseuxFactor::zero()]).unwrap();
        let (r, pa, pb) = common_refinement(&SectorCover::trivial(), &s).unwrap();
        assert!(r.refines(&SectorCover::trivial()));
        assert!(r.refines(&s));
        for (k, arc) in r.arcs().iter().enumerate() {
            assert!(SectorCover::trivial().arcs()[pa[k]].contains_arc(arc));
            assert!(s.arcs()[pb[k]].contains_arc(arc));
        }
        let (same, _, _) = common_refinement(&s, &s).unwrap();
        assert_eq!(same.len(), s.len());
    }
}
