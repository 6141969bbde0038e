//! Constructible complexes on the pointed disk `(Δ, {0})`, built as direct
//! sums of shifted generators `j_! L`, `Rj_* L` and skyscrapers `i_* B`.
//!
//! A summand `(d, G)` stands for `G[-d]`, so its cohomology sits in degree `d`.
//! Perversity is the middle one: `j_! L[1]`, `Rj_* L[1]` and `i_* B` for free
//! `B` are perverse, i.e. summands `(-1, j_! L)`, `(-1, Rj_* L)` and `(0, i_* B)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::barcode::Barcode;
use crate::error::Result;
use crate::field::Q;
use crate::irregular::{ext_global, ext_rj_star_to_j_shriek, StokesLocalSystem};
use num_traits::Zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SummandKind {
    JShriek,
    JStar,
    Skyscraper,
}

impl SummandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SummandKind::JShriek => "J_SHRIEK",
            SummandKind::JStar => "J_STAR",
            SummandKind::Skyscraper => "SKYSCRAPER",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Summand {
    JShriek { degree: i64, system: StokesLocalSystem },
    JStar { degree: i64, system: StokesLocalSystem },
    Skyscraper { degree: i64, barcode: Barcode },
}

impl Summand {
    pub fn degree(&self) -> i64 {
        match self {
            Summand::JShriek { degree, .. }
            | Summand::JStar { degree, .. }
            | Summand::Skyscraper { degree, .. } => *degree,
        }
    }

    pub fn kind(&self) -> SummandKind {
        match self {
            Summand::JShriek { .. } => SummandKind::JShriek,
            Summand::JStar { .. } => SummandKind::JStar,
            Summand::Skyscraper { .. } => SummandKind::Skyscraper,
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Summand::JShriek { system, .. } | Summand::JStar { system, .. } => system.is_zero(),
            Summand::Skyscraper { barcode, .. } => barcode.is_empty(),
        }
    }

    /// Degree in the perverse t-structure.
    fn perverse_degree(&self) -> i64 {
        match self {
            Summand::JShriek { degree, .. } | Summand::JStar { degree, .. } => degree + 1,
            Summand::Skyscraper { degree, .. } => *degree,
        }
    }
}

impl fmt::Display for Summand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Summand::JShriek { degree, system } => write!(f, "j_!({})[{}]", system, -degree),
            Summand::JStar { degree, system } => write!(f, "Rj_*({})[{}]", system, -degree),
            Summand::Skyscraper { degree, barcode } => write!(f, "i_*({})[{}]", barcode, -degree),
        }
    }
}

/// Bounded complex as a canonically ordered list of summands.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CurveComplex {
    summands: Vec<Summand>,
}

impl CurveComplex {
    /// Normalizes: zero summands dropped, skyscrapers in equal degrees merged,
    /// stable sort by `(degree, kind)`.
    pub fn new(summands: Vec<Summand>) -> Self {
        let mut sky: BTreeMap<i64, Barcode> = BTreeMap::new();
        let mut out = Vec::new();
        for s in summands {
            if s.is_zero() {
                continue;
            }
            match s {
                Summand::Skyscraper { degree, barcode } => {
                    let e = sky.entry(degree).or_default();
                    *e = e.direct_sum(&barcode);
                }
                other => out.push(other),
            }
        }
        out.extend(
            sky.into_iter()
                .map(|(degree, barcode)| Summand::Skyscraper { degree, barcode }),
        );
        out.sort_by_key(|s| (s.degree(), s.kind()));
        Self { summands: out }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn j_shriek(system: StokesLocalSystem, degree: i64) -> Self {
        Self::new(vec![Summand::JShriek { degree, system }])
    }

    pub fn j_star(system: StokesLocalSystem, degree: i64) -> Self {
        Self::new(vec![Summand::JStar { degree, system }])
    }

    pub fn skyscraper(barcode: Barcode, degree: i64) -> Self {
        Self::new(vec![Summand::Skyscraper { degree, barcode }])
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn is_zero(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn direct_sum(&self, other: &CurveComplex) -> CurveComplex {
        Self::new(self.summands.iter().chain(&other.summands).cloned().collect())
    }

    /// `c[k]`: every degree lowered by `k`.
    pub fn shift(&self, k: i64) -> CurveComplex {
        Self::new(
            self.summands
                .iter()
                .map(|s| match s.clone() {
                    Summand::JShriek { degree, system } => Summand::JShriek {
                        degree: degree - k,
                        system,
                    },
                    Summand::JStar { degree, system } => Summand::JStar {
                        degree: degree - k,
                        system,
                    },
                    Summand::Skyscraper { degree, barcode } => Summand::Skyscraper {
                        degree: degree - k,
                        barcode,
                    },
                })
                .collect(),
        )
    }
}

impl fmt::Display for CurveComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.summands.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

/// Verdier dual, summand by summand:
/// `𝔻(j_! L[-d]) = Rj_* L^∨[d+2]`, `𝔻(Rj_* L[-d]) = j_! L^∨[d+2]`, and for a
/// skyscraper the free part dualizes in degree `-d`, the torsion part in `-d+1`.
pub fn verdier_dual(c: &CurveComplex) -> CurveComplex {
    let mut out = Vec::new();
    for s in &c.summands {
        match s {
            Summand::JShriek { degree, system } => out.push(Summand::JStar {
                degree: -degree - 2,
                system: system.dual(),
            }),
            Summand::JStar { degree, system } => out.push(Summand::JShriek {
                degree: -degree - 2,
                system: system.dual(),
            }),
            Summand::Skyscraper { degree, barcode } => {
                let (free, tors) = barcode.dual();
                out.push(Summand::Skyscraper {
                    degree: -degree,
                    barcode: free,
                });
                out.push(Summand::Skyscraper {
                    degree: -degree + 1,
                    barcode: tors,
                });
            }
        }
    }
    CurveComplex::new(out)
}

/// Dimension of the support of `𝔉(H^j)` per degree; absent degrees have empty support.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct SupportProfile {
    pub dims: BTreeMap<i64, u8>,
}

impl SupportProfile {
    /// `None` stands for the empty support.
    pub fn dim(&self, j: i64) -> Option<u8> {
        self.dims.get(&j).copied()
    }

    fn raise(&mut self, j: i64, d: u8) {
        let e = self.dims.entry(j).or_insert(d);
        *e = (*e).max(d);
    }
}

pub fn support_profile(c: &CurveComplex) -> Result<SupportProfile> {
    let mut p = SupportProfile::default();
    for s in &c.summands {
        match s {
            Summand::JShriek { degree, .. } => p.raise(*degree, 1),
            Summand::JStar { degree, system } => {
                p.raise(*degree, 1);
                if system.cohomology()?.1 > 0 {
                    p.raise(degree + 1, 0);
                }
            }
            Summand::Skyscraper { degree, barcode } => {
                if barcode.reduced_rank() > 0 {
                    p.raise(*degree, 0);
                }
            }
        }
    }
    Ok(p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Perversity {
    Yes,
    No { witness: i64 },
}

fn first_violation(p: &SupportProfile) -> Option<i64> {
    p.dims
        .iter()
        .find(|(j, d)| i64::from(**d) > -**j)
        .map(|(j, _)| *j)
}

/// `dim supp H^j ≤ -j` for the complex and for its dual; the witness is the
/// smallest violating degree.
pub fn is_perverse(c: &CurveComplex) -> Result<Perversity> {
    let a = first_violation(&support_profile(c)?);
    let b = first_violation(&support_profile(&verdier_dual(c))?);
    Ok(match (a, b) {
        (None, None) => Perversity::Yes,
        (Some(x), None) | (None, Some(x)) => Perversity::No { witness: x },
        (Some(x), Some(y)) => Perversity::No { witness: x.min(y) },
    })
}

/// Classical data of the image under the forgetful functor: ranks of the
/// cohomology local systems on the open stratum, and the cohomology of the
/// stalk and costalk at the puncture.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct ClassicalImage {
    pub open: BTreeMap<i64, usize>,
    pub stalk: BTreeMap<i64, usize>,
    pub costalk: BTreeMap<i64, usize>,
}

fn bump(m: &mut BTreeMap<i64, usize>, j: i64, v: usize) {
    if v > 0 {
        *m.entry(j).or_insert(0) += v;
    }
}

pub fn classical_image(c: &CurveComplex) -> ClassicalImage {
    let mut img = ClassicalImage::default();
    for s in &c.summands {
        match s {
            Summand::JShriek { degree, system } => {
                let ls = system.forget();
                let (h0, h1) = ls.cohomology();
                bump(&mut img.open, *degree, ls.rank());
                bump(&mut img.costalk, degree + 1, h0);
                bump(&mut img.costalk, degree + 2, h1);
            }
            Summand::JStar { degree, system } => {
                let ls = system.forget();
                let (h0, h1) = ls.cohomology();
                bump(&mut img.open, *degree, ls.rank());
                bump(&mut img.stalk, *degree, h0);
                bump(&mut img.stalk, degree + 1, h1);
            }
            Summand::Skyscraper { degree, barcode } => {
                bump(&mut img.stalk, *degree, barcode.reduced_rank());
                bump(&mut img.costalk, *degree, barcode.reduced_rank());
            }
        }
    }
    img
}

/// Classical criterion on a curve: the open part is a local system in degree
/// `-1`, the stalk at the puncture vanishes above degree 0 and the costalk below.
pub fn classical_is_perverse(img: &ClassicalImage) -> bool {
    img.open.keys().all(|&j| j == -1)
        && img.stalk.keys().all(|&j| j <= 0)
        && img.costalk.keys().all(|&j| j >= 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruncationSide {
    /// `τ^{≤0}`
    LeZero,
    /// `τ^{≥1}`
    GeOne,
}

/// Perverse truncation. Torsion skyscrapers vanish under the forgetful
/// functor and are kept on the `≤ 0` side.
pub fn truncate(c: &CurveComplex, side: TruncationSide) -> CurveComplex {
    let keep = |s: &Summand| {
        let low = match s {
            Summand::Skyscraper { barcode, .. } if barcode.reduced_rank() == 0 => true,
            _ => s.perverse_degree() <= 0,
        };
        match side {
            TruncationSide::LeZero => low,
            TruncationSide::GeOne => !low,
        }
    };
    CurveComplex::new(c.summands.iter().filter(|s| keep(s)).cloned().collect())
}

/// `Ext^m` between two generators, keyed by `m`; zero entries omitted.
fn generator_ext(a: &Summand, b: &Summand) -> Result<BTreeMap<i64, usize>> {
    let mut out = BTreeMap::new();
    match (a, b) {
        (Summand::JShriek { system: l, .. }, Summand::JShriek { system: lp, .. })
        | (Summand::JShriek { system: l, .. }, Summand::JStar { system: lp, .. })
        | (Summand::JStar { system: l, .. }, Summand::JStar { system: lp, .. }) => {
            let e = ext_global(l, lp)?;
            bump(&mut out, 0, e.ext0);
            bump(&mut out, 1, e.ext1);
        }
        (Summand::JStar { system: l, .. }, Summand::JShriek { system: lp, .. }) => {
            let e = ext_rj_star_to_j_shriek(l, lp)?;
            for (m, v) in e.iter().enumerate() {
                bump(&mut out, m as i64, *v);
            }
        }
        (Summand::JShriek { .. }, Summand::Skyscraper { .. })
        | (Summand::Skyscraper { .. }, Summand::JStar { .. }) => {}
        (Summand::JStar { system: l, .. }, Summand::Skyscraper { barcode, .. }) => {
            let r = barcode.reduced_rank();
            let (h0, h1) = l.cohomology()?;
            bump(&mut out, 0, r * h0);
            bump(&mut out, -1, r * h1);
        }
        (Summand::Skyscraper { barcode: b1, .. }, Summand::Skyscraper { barcode: b2, .. }) => {
            bump(&mut out, 0, b1.reduced_rank() * b2.reduced_rank());
        }
        (Summand::Skyscraper { barcode, .. }, Summand::JShriek { system: lp, .. }) => {
            let r = barcode.reduced_rank();
            let (h0, h1) = lp.cohomology()?;
            bump(&mut out, 1, r * h0);
            bump(&mut out, 2, r * h1);
        }
    }
    Ok(out)
}

/// `dim Hom(c1, c2[n])` per degree `n`; zero entries omitted.
pub fn hom_complex(c1: &CurveComplex, c2: &CurveComplex) -> Result<BTreeMap<i64, usize>> {
    let mut out = BTreeMap::new();
    for a in &c1.summands {
        for b in &c2.summands {
            for (m, v) in generator_ext(a, b)? {
                bump(&mut out, m - a.degree() + b.degree(), v);
            }
        }
    }
    Ok(out)
}

/// The recollement triangle `j_! j^{-1} c → c → i_* i^{-1} c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recollement {
    pub open: CurveComplex,
    pub closed: CurveComplex,
}

fn free_barcode(n: usize) -> Barcode {
    Barcode::new(vec![crate::barcode::Interval::free(Q::zero()); n])
}

pub fn recollement(c: &CurveComplex) -> Result<Recollement> {
    let mut open = Vec::new();
    let mut closed = Vec::new();
    for s in &c.summands {
        match s {
            Summand::JShriek { degree, system } => open.push(Summand::JShriek {
                degree: *degree,
                system: system.clone(),
            }),
            Summand::JStar { degree, system } => {
                open.push(Summand::JShriek {
                    degree: *degree,
                    system: system.clone(),
                });
                let (h0, h1) = system.cohomology()?;
                closed.push(Summand::Skyscraper {
                    degree: *degree,
                    barcode: free_barcode(h0),
                });
                closed.push(Summand::Skyscraper {
                    degree: degree + 1,
                    barcode: free_barcode(h1),
                });
            }
            Summand::Skyscraper { .. } => closed.push(s.clone()),
        }
    }
    Ok(Recollement {
        open: CurveComplex::new(open),
        closed: CurveComplex::new(closed),
    })
}

/// Restriction to the open stratum: `(degree, system)` pairs.
pub fn open_restriction(c: &CurveComplex) -> Vec<(i64, StokesLocalSystem)> {
    c.summands
        .iter()
        .filter_map(|s| match s {
            Summand::JShriek { degree, system } | Summand::JStar { degree, system } => {
                Some((*degree, system.clone()))
            }
            Summand::Skyscraper { .. } => None,
        })
        .collect()
}

/// Reduced dimensions of the stalk cohomology at the puncture.
pub fn stalk_at_puncture(c: &CurveComplex) -> Result<BTreeMap<i64, usize>> {
    let mut out = BTreeMap::new();
    for s in &c.summands {
        match s {
            Summand::JShriek { .. } => {}
            Summand::JStar { degree, system } => {
                let (h0, h1) = system.cohomology()?;
                bump(&mut out, *degree, h0);
                bump(&mut out, degree + 1, h1);
            }
            Summand::Skyscraper { degree, barcode } => bump(&mut out, *degree, barcode.reduced_rank()),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barcode::Interval;
    use crate::field::q;
    use crate::sector::PuiseuxFactor;

    fn unit() -> StokesLocalSystem {
        StokesLocalSystem::rank_one(PuiseuxFactor::zero())
    }

    fn inv_z() -> StokesLocalSystem {
        StokesLocalSystem::rank_one(PuiseuxFactor::pole(1, 1))
    }

    fn free0() -> Barcode {
        Barcode::free(q(0, 1))
    }

    #[test]
    fn dual_examples() {
        let c = CurveComplex::j_shriek(unit(), -1);
        assert_eq!(verdier_dual(&c), CurveComplex::j_star(unit(), -1));
        let s = CurveComplex::skyscraper(free0(), 0);
        assert_eq!(verdier_dual(&s), s);
        let mixed = CurveComplex::new(vec![
            Summand::JShriek { degree: 2, system: inv_z() },
            Summand::Skyscraper {
                degree: -1,
                barcode: Barcode::new(vec![
                    Interval::free(q(1, 2)),
                    Interval::torsion(q(0, 1), q(3, 2)).unwrap(),
                ]),
            },
        ]);
        assert_eq!(verdier_dual(&verdier_dual(&mixed)), mixed);
    }

    #[test]
    fn support_examples() {
        let c = CurveComplex::j_shriek(inv_z(), -1);
        let p = support_profile(&c).unwrap();
        assert_eq!(p.dims, BTreeMap::from([(-1, 1)]));
        let t = CurveComplex::skyscraper(
            Barcode::new(vec![Interval::torsion(q(0, 1), q(1, 1)).unwrap()]),
            0,
        );
        assert_eq!(support_profile(&t).unwrap().dim(0), None);
        assert!(support_profile(&CurveComplex::zero()).unwrap().dims.is_empty());
    }

    #[test]
    fn perversity_examples() {
        assert_eq!(is_perverse(&CurveComplex::j_shriek(unit(), -1)).unwrap(), Perversity::Yes);
        assert_eq!(is_perverse(&CurveComplex::skyscraper(free0(), 0)).unwrap(), Perversity::Yes);
        assert_eq!(
            is_perverse(&CurveComplex::j_shriek(unit(), 0)).unwrap(),
            Perversity::No { witness: 0 }
        );
    }

    #[test]
    fn truncation_examples() {
        let c = CurveComplex::j_shriek(unit(), 0);
        assert!(truncate(&c, TruncationSide::LeZero).is_zero());
        assert_eq!(truncate(&c, TruncationSide::GeOne), c);
        let p = CurveComplex::j_shriek(inv_z(), -1);
        assert_eq!(truncate(&p, TruncationSide::LeZero), p);
    }

    #[test]
    fn hom_examples() {
        let a = CurveComplex::j_shriek(unit(), -1);
        assert_eq!(hom_complex(&a, &a).unwrap().get(&0), Some(&1));
        let b = CurveComplex::j_shriek(inv_z(), -1);
        let c = CurveComplex::j_star(unit(), -1);
        assert_eq!(hom_complex(&b, &c).unwrap().get(&0), None);
        assert!(hom_complex(&CurveComplex::zero(), &a).unwrap().is_empty());
    }

    #[test]
    fn recollement_examples() {
        let c = CurveComplex::j_star(unit(), -1).direct_sum(&CurveComplex::skyscraper(free0(), 0));
        let r = recollement(&c).unwrap();
        assert_eq!(r.open, CurveComplex::j_shriek(unit(), -1));
        assert_eq!(stalk_at_puncture(&r.closed).unwrap(), stalk_at_puncture(&c).unwrap());
        assert_eq!(stalk_at_puncture(&c).unwrap(), BTreeMap::from([(-1, 1), (0, 2)]));
    }
}
