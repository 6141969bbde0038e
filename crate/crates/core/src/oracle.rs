//! Floating-point sampling oracle for dominance verdicts. Used to cross-check
//! the exact classification; never consulted by it.

use num_traits::ToPrimitive;

use crate::certified::frac;
use crate::field::{rat_to_f64, Q};
use crate::sector::{DominanceVerdict, PuiseuxFactor, Region};

/// Radii `10^{-1}, …, 10^{-8}`.
pub const RADII_EXPONENTS: std::ops::RangeInclusive<i32> = 1..=8;

/// Growth ratio between `r = 10^{-5}` and `r = 10^{-8}` that counts as divergence.
pub const GROWTH_RATIO: f64 = 10.0;

/// Term values below this fraction of the coefficient size are treated as zero.
pub const ZERO_SNAP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleGrid {
    /// Number of angular samples on the closed arc, endpoints included.
    pub theta_samples: usize,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self { theta_samples: 257 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Clear(DominanceVerdict),
    Ambiguous,
}

/// `cos 2πx` and `sin 2πx`, with the quadrant reduction done exactly so that
/// quarter turns give exact zeros.
fn cos_sin_turn(x: &Q) -> (f64, f64) {
    let u = frac(x);
    let four = &u * Q::from_integer(4.into());
    let k = (&four + Q::new(1.into(), 2.into())).floor();
    let v = &u - &k / Q::from_integer(4.into());
    let y = std::f64::consts::TAU * rat_to_f64(&v);
    let (c, s) = (y.cos(), y.sin());
    match k.to_integer().to_i64().unwrap_or(0).rem_euclid(4) {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}

fn re_phi(phi: &PuiseuxFactor, radius: f64, theta: &Q) -> f64 {
    phi.terms()
        .iter()
        .map(|(o, c)| {
            let (cs, sn) = cos_sin_turn(&(o * theta));
            let (a, b) = c.to_c64();
            let mut t = a * cs + b * sn;
            if t.abs() < ZERO_SNAP * (a.abs() + b.abs()) {
                t = 0.0;
            }
            radius.powf(-rat_to_f64(o)) * t
        })
        .sum()
}

fn sample_angles(region: &Region, grid: OracleGrid) -> (Vec<Q>, f64) {
    match region {
        Region::Sector(arc) => {
            let n = grid.theta_samples.max(2) - 1;
            let len = arc.length();
            let angles = (0..=n)
                .map(|k| arc.start() + &len * Q::new(k.into(), n.into()))
                .collect();
            (angles, 0.0)
        }
        Region::Ray { angle, truncated } => {
            let floor = truncated.as_ref().map_or(0.0, rat_to_f64);
            (vec![angle.clone()], floor)
        }
    }
}

/// Classifies the growth of `max_θ Re φ(r e^{2πiθ})` along `r = 10^{-k}`.
pub fn oracle_dominance(phi: &PuiseuxFactor, region: &Region, grid: OracleGrid) -> OracleVerdict {
    if phi.is_zero() {
        return OracleVerdict::Clear(DominanceVerdict::Zero);
    }
    let (angles, floor) = sample_angles(region, grid);
    let maxima: Vec<f64> = RADII_EXPONENTS
        .map(|k| {
            let r = 10f64.powi(-k).max(floor);
            angles
                .iter()
                .map(|t| re_phi(phi, r, t))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let tail = &maxima[4..];
    let (m5, m8) = (maxima[4], maxima[7]);
    if tail.iter().all(|m| *m > 0.0) && m8 >= GROWTH_RATIO * m5 {
        OracleVerdict::Clear(DominanceVerdict::PosDivergent)
    } else if tail.iter().all(|m| *m < 0.0) && m8.abs() >= GROWTH_RATIO * m5.abs() {
        OracleVerdict::Clear(DominanceVerdict::NegDivergent)
    } else if m8.abs() < 1.0 && (m8 - m5).abs() < 1.0 {
        OracleVerdict::Clear(DominanceVerdict::Bounded)
    } else {
        OracleVerdict::Ambiguous
    }
}

/// The hom dimension `Hom(Λ^{φ1}, Λ^{φ2})` implied by an oracle verdict on `φ1 - φ2`.
pub fn oracle_hom(verdict: OracleVerdict) -> Option<usize> {
    match verdict {
        OracleVerdict::Clear(v) => Some(usize::from(v.is_bounded_above())),
        OracleVerdict::Ambiguous => None,
    }
}
