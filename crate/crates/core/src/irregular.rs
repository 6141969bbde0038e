//! Irregular constant sheaves `Λ^φ` and Stokes local systems on the punctured disk.
//!
//! A [`StokesLocalSystem`] is a cyclic chain cover of the circle of directions
//! together with a formal type `φ_1, …, φ_n` and gluing matrices `G_k` taking
//! the frame of arc `k` to the frame of arc `k+1` over their overlap. Entry
//! `(i, j)` of a gluing is a morphism `Λ^{φ_j} → Λ^{φ_i}` and may be nonzero
//! only when `Re(φ_j - φ_i)` is bounded above on the overlap.
//!
//! Morphism spaces and `Ext^1` are computed by the Čech complex of the cover
//! after refining it so that every arc holds at most one Stokes direction of
//! each factor pair; on such arcs the local hom sheaves are acyclic.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::barcode::Barcode;
use crate::certified::sign_re_rotated;
use crate::error::{Error, Result};
use crate::field::{FieldScalar, Q};
use crate::linalg::Matrix;
use crate::sector::{
    common_refinement, dominance, standard_cover, DominanceVerdict, PuiseuxFactor, Region,
    SectorArc, SectorCover,
};

/// `Λ^φ` restricted to a region at the puncture.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IrregularConstant {
    factor: PuiseuxFactor,
    region: Region,
}

impl IrregularConstant {
    pub fn new(factor: PuiseuxFactor, region: Region) -> Self {
        Self { factor, region }
    }

    pub fn factor(&self) -> &PuiseuxFactor {
        &self.factor
    }

    pub fn region(&self) -> &Region {
        &self.region
    }
}

impl fmt::Display for IrregularConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Λ^{{{}}} on {}", self.factor, self.region)
    }
}

fn same_region(a: &IrregularConstant, b: &IrregularConstant) -> Result<()> {
    if a.region != b.region {
        return Err(Error::RegionMismatch(format!("{} vs {}", a.region, b.region)));
    }
    Ok(())
}

/// `dim Hom(Λ^{φa}, Λ^{φb})`: 1 when `Re(φa - φb)` is bounded above, else 0.
pub fn hom_constant(a: &IrregularConstant, b: &IrregularConstant) -> Result<usize> {
    same_region(a, b)?;
    let v = dominance(&(&a.factor - &b.factor), &a.region)?;
    Ok(usize::from(v.is_bounded_above()))
}

/// `Λ^{φa} ⊗ Λ^{φb} ≅ Λ^{φa + φb}`.
pub fn tensor_constant(a: &IrregularConstant, b: &IrregularConstant) -> Result<IrregularConstant> {
    same_region(a, b)?;
    Ok(IrregularConstant::new(&a.factor + &b.factor, a.region.clone()))
}

/// Internal hom `ℛHom(Λ^{φa}, Λ^{φb}) ≅ Λ^{φb - φa}`.
pub fn sheafhom_constant(
    a: &IrregularConstant,
    b: &IrregularConstant,
) -> Result<IrregularConstant> {
    same_region(a, b)?;
    Ok(IrregularConstant::new(&b.factor - &a.factor, a.region.clone()))
}

/// Cohomological shift of the Verdier dual on the open stratum of a curve.
pub const DUAL_SHIFT: i64 = 2;

/// `𝔻Λ^φ ≅ Λ^{-φ}[2]`; returns the sheaf and the shift.
pub fn dual_constant(a: &IrregularConstant) -> (IrregularConstant, i64) {
    (
        IrregularConstant::new(-&a.factor, a.region.clone()),
        DUAL_SHIFT,
    )
}

/// Whether the nonzero Gaussian-rational point `z` lies in the region.
pub fn point_in_region(z: &FieldScalar, region: &Region) -> Result<bool> {
    if z.is_zero() {
        return Ok(false);
    }
    let minus_iz = &(-&FieldScalar::i()) * z;
    // sign of Re / Im of z e^{-2πiθ}
    let re_at = |t: &Q| sign_re_rotated(z, t);
    let im_at = |t: &Q| sign_re_rotated(&minus_iz, t);
    use std::cmp::Ordering::*;
    match region {
        Region::Ray { angle, truncated } => {
            let on_ray = im_at(angle)? == Equal && re_at(angle)? == Greater;
            let far = match truncated {
                Some(b) => z.norm_sqr() > b * b,
                None => true,
            };
            Ok(on_ray && far)
        }
        Region::Sector(arc) => {
            let len = arc.length();
            let (s, e) = (arc.start(), arc.end());
            if len.is_one() {
                return Ok(!(im_at(s)? == Equal && re_at(s)? == Greater));
            }
            if len <= Q::new(1.into(), 2.into()) {
                Ok(im_at(s)? == Greater && im_at(e)? == Less)
            } else {
                Ok(!(im_at(e)? != Less && im_at(s)? != Greater))
            }
        }
    }
}

/// Stalk at `z`: the free interval `[-Re φ(z), ∞)`. Needs an unramified factor.
pub fn stalk(a: &IrregularConstant, z: &FieldScalar) -> Result<Barcode> {
    if !point_in_region(z, &a.region)? {
        return Err(Error::OutsideSector(format!("{} is not in {}", z, a.region)));
    }
    let v = a.factor.value_at(z)?;
    Ok(Barcode::free(-v.re))
}

/// Whether `Hom(Λ^{src}, Λ^{tgt})` is nonzero over the arc.
pub fn permitted(src: &PuiseuxFactor, tgt: &PuiseuxFactor, arc: &SectorArc) -> Result<bool> {
    if src == tgt {
        return Ok(true);
    }
    let v = dominance(&(src - tgt), &Region::Sector(arc.clone()))?;
    Ok(v != DominanceVerdict::PosDivergent)
}

/// Permission pattern `P[i][j]` for matrices from `src` slots to `tgt` slots.
fn permission_pattern(
    src: &[PuiseuxFactor],
    tgt: &[PuiseuxFactor],
    arc: &SectorArc,
) -> Result<Vec<Vec<bool>>> {
    let mut memo: BTreeMap<(usize, usize), bool> = BTreeMap::new();
    let mut out = vec![vec![false; src.len()]; tgt.len()];
    for (i, ti) in tgt.iter().enumerate() {
        for (j, sj) in src.iter().enumerate() {
            let key_i = tgt.iter().position(|x| x == ti).unwrap();
            let key_j = src.iter().position(|x| x == sj).unwrap();
            let p = match memo.get(&(key_i, key_j)) {
                Some(p) => *p,
                None => {
                    let p = permitted(sj, ti, arc)?;
                    memo.insert((key_i, key_j), p);
                    p
                }
            };
            out[i][j] = p;
        }
    }
    Ok(out)
}

fn check_pattern(m: &Matrix, pattern: &[Vec<bool>], context: &str) -> Result<()> {
    for (i, row) in pattern.iter().enumerate() {
        for (j, ok) in row.iter().enumerate() {
            if !ok && !m.get(i, j).is_zero() {
                return Err(Error::ForbiddenEntry {
                    row: i,
                    col: j,
                    context: context.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Ordinary local system on the punctured disk: rank and monodromy.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LocalSystem {
    pub monodromy: Matrix,
}

impl LocalSystem {
    pub fn rank(&self) -> usize {
        self.monodromy.rows()
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    /// Isomorphism of local systems is similarity of monodromies.
    pub fn isomorphic(&self, other: &LocalSystem) -> bool {
        crate::linalg::similar(&self.monodromy, &other.monodromy)
    }

    /// `(h^0, h^1)` of the local system on the circle.
    pub fn cohomology(&self) -> (usize, usize) {
        let n = self.rank();
        let a = &self.monodromy - &Matrix::identity(n);
        let h0 = n - a.rank();
        (h0, h0)
    }
}

/// Morphism of local systems, in the frame of a base point.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LocalSystemMorphism {
    pub source: LocalSystem,
    pub target: LocalSystem,
    pub matrix: Matrix,
}

impl LocalSystemMorphism {
    pub fn kernel(&self) -> LocalSystem {
        let b = self.matrix.nullspace();
        let img = &self.source.monodromy * &b;
        let x = b.solve(&img).expect("kernel is monodromy invariant");
        LocalSystem { monodromy: x }
    }

    pub fn cokernel(&self) -> LocalSystem {
        let (proj, comp) = quotient_frame(&self.matrix);
        let m = &(&proj * &self.target.monodromy) * &comp;
        LocalSystem { monodromy: m }
    }
}

/// For a map `m` into `k^n`: a projection `k^n → k^n / im m` and a section
/// given by coordinate vectors complementary to the image.
fn quotient_frame(m: &Matrix) -> (Matrix, Matrix) {
    let n = m.rows();
    let img = m.select(&(0..n).collect::<Vec<_>>(), &m.column_basis());
    let aug = img.hstack(&Matrix::identity(n));
    let pivots = aug.column_basis();
    let comp_idx: Vec<usize> = pivots
        .iter()
        .filter(|&&p| p >= img.cols())
        .map(|&p| p - img.cols())
        .collect();
    let comp = Matrix::identity(n).select(&(0..n).collect::<Vec<_>>(), &comp_idx);
    let w = img.hstack(&comp);
    let winv = w.inverse().expect("image plus complement is a basis");
    let rows: Vec<usize> = (img.cols()..n).collect();
    let proj = winv.select(&rows, &(0..n).collect::<Vec<_>>());
    (proj, comp)
}

/// Irregular local system on the punctured disk.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StokesLocalSystem {
    cover: SectorCover,
    factors: Vec<PuiseuxFactor>,
    gluings: Vec<Matrix>,
}

impl StokesLocalSystem {
    pub fn new(cover: SectorCover, factors: Vec<PuiseuxFactor>, gluings: Vec<Matrix>) -> Result<Self> {
        let n = factors.len();
        if gluings.len() != cover.len() {
            return Err(Error::InvalidInput(format!(
                "{} gluings for a cover with {} overlaps",
                gluings.len(),
                cover.len()
            )));
        }
        for (k, g) in gluings.iter().enumerate() {
            if g.rows() != n || g.cols() != n {
                return Err(Error::InvalidInput(format!(
                    "gluing {} has size {}x{}, expected {}x{}",
                    k,
                    g.rows(),
                    g.cols(),
                    n,
                    n
                )));
            }
            if g.inverse().is_none() {
                return Err(Error::InvalidInput(format!("gluing {} is not invertible", k)));
            }
            let ov = cover.overlap(k).expect("validated cover");
            let pattern = permission_pattern(&factors, &factors, &ov)?;
            check_pattern(g, &pattern, &format!("gluing {} over {}", k, ov))?;
        }
        Ok(Self {
            cover,
            factors,
            gluings,
        })
    }

    /// Identity gluings on the given cover.
    pub fn trivial_on(cover: SectorCover, factors: Vec<PuiseuxFactor>) -> Self {
        let n = factors.len();
        let gluings = vec![Matrix::identity(n); cover.len()];
        Self {
            cover,
            factors,
            gluings,
        }
    }

    /// `⊕ Λ^{φ_i}` with identity gluings on the standard cover.
    pub fn split(factors: Vec<PuiseuxFactor>) -> Result<Self> {
        let cover = standard_cover(&factors)?;
        Ok(Self::trivial_on(cover, factors))
    }

    /// The rank-one system `Λ^φ`.
    pub fn rank_one(phi: PuiseuxFactor) -> Self {
        Self::trivial_on(SectorCover::trivial(), vec![phi])
    }

    pub fn zero() -> Self {
        Self::trivial_on(SectorCover::trivial(), Vec::new())
    }

    pub fn cover(&self) -> &SectorCover {
        &self.cover
    }

    pub fn factors(&self) -> &[PuiseuxFactor] {
        &self.factors
    }

    pub fn gluings(&self) -> &[Matrix] {
        &self.gluings
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn is_zero(&self) -> bool {
        self.factors.is_empty()
    }

    /// `G_{n-1} ⋯ G_0`, in the frame of arc 0.
    pub fn monodromy(&self) -> Matrix {
        self.gluings
            .iter()
            .fold(Matrix::identity(self.rank()), |acc, g| g * &acc)
    }

    /// The image under the grading-forgetting functor.
    pub fn forget(&self) -> LocalSystem {
        LocalSystem {
            monodromy: self.monodromy(),
        }
    }

    /// Dual system: factors `-φ`, gluings `G^{-T}`.
    pub fn dual(&self) -> Self {
        Self {
            cover: self.cover.clone(),
            factors: self.factors.iter().map(|f| -f).collect(),
            gluings: self
                .gluings
                .iter()
                .map(|g| g.inverse().expect("invertible gluing").transpose())
                .collect(),
        }
    }

    /// Transition from the frame of arc `a` to the frame of arc `b` over a
    /// region contained in both.
    fn transition(&self, a: usize, b: usize, region: &SectorArc) -> Result<Matrix> {
        let n = self.cover.len();
        if a == b {
            return Ok(Matrix::identity(self.rank()));
        }
        if (a + 1) % n == b && self.cover.overlap(a).is_some_and(|o| o.contains_arc(region)) {
            return Ok(self.gluings[a].clone());
        }
        if (b + 1) % n == a && self.cover.overlap(b).is_some_and(|o| o.contains_arc(region)) {
            return Ok(self.gluings[b].inverse().expect("invertible gluing"));
        }
        Err(Error::InvalidCover(format!(
            "region {} does not lie in an overlap of arcs {} and {}",
            region, a, b
        )))
    }

    /// Restriction to a finer cover.
    pub fn refine_to(&self, fine: &SectorCover) -> Result<Self> {
        let parents: Vec<usize> = fine
            .arcs()
            .iter()
            .map(|arc| {
                self.cover
                    .arcs()
                    .iter()
                    .position(|c| c.contains_arc(arc))
                    .ok_or_else(|| {
                        Error::InvalidCover(format!("{} is not inside any arc of {}", arc, self.cover))
                    })
            })
            .collect::<Result<_>>()?;
        let m = fine.len();
        let mut gluings = Vec::with_capacity(m);
        for k in 0..m {
            let ov = fine.overlap(k).expect("validated cover");
            gluings.push(self.transition(parents[k], parents[(k + 1) % m], &ov)?);
        }
        Self::new(fine.clone(), self.factors.clone(), gluings)
    }

    /// Direct sum; the second summand is moved to a common cover if needed.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        let (a, b) = on_common_cover(self, other)?;
        let factors = a.factors.iter().chain(&b.factors).cloned().collect();
        let gluings = a
            .gluings
            .iter()
            .zip(&b.gluings)
            .map(|(x, y)| x.direct_sum(y))
            .collect();
        Self::new(a.cover.clone(), factors, gluings)
    }

    /// `(dim H^0, dim H^1)` of the circle with coefficients in the system.
    pub fn cohomology(&self) -> Result<(usize, usize)> {
        let unit = Self::rank_one(PuiseuxFactor::zero());
        let e = ext_global(&unit, self)?;
        Ok((e.ext0, e.ext1))
    }
}

impl fmt::Display for StokesLocalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fs: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        write!(f, "[{}] on {}", fs.join(", "), self.cover)
    }
}

/// A cover refining the covers of all systems and isolating every Stokes
/// direction of every pair of their factors.
pub fn common_cover(systems: &[&StokesLocalSystem]) -> Result<SectorCover> {
    let mut factors: Vec<PuiseuxFactor> = systems
        .iter()
        .flat_map(|s| s.factors.iter().cloned())
        .collect();
    factors.push(PuiseuxFactor::zero());
    let mut cover = standard_cover(&factors)?;
    for s in systems {
        if !cover.refines(&s.cover) {
            cover = common_refinement(&cover, &s.cover)?.0;
        }
    }
    Ok(cover)
}

/// Both systems restricted to a shared refined cover.
pub fn on_common_cover(
    a: &StokesLocalSystem,
    b: &StokesLocalSystem,
) -> Result<(StokesLocalSystem, StokesLocalSystem)> {
    if a.cover == b.cover {
        return Ok((a.clone(), b.clone()));
    }
    let cover = common_cover(&[a, b])?;
    Ok((a.refine_to(&cover)?, b.refine_to(&cover)?))
}

/// Čech complex `C^0 → C^1` computing `Ext^*(source, target)` over the circle.
#[derive(Clone, Debug)]
pub struct CechComplex {
    source: StokesLocalSystem,
    target: StokesLocalSystem,
    arc_slots: Vec<Vec<(usize, usize)>>,
    overlap_slots: Vec<Vec<(usize, usize)>>,
    d: Matrix,
    kernel: Matrix,
    image: Matrix,
    complement: Vec<usize>,
}

fn slots(pattern: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, row) in pattern.iter().enumerate() {
        for (j, ok) in row.iter().enumerate() {
            if *ok {
                out.push((i, j));
            }
        }
    }
    out
}

fn offsets(blocks: &[Vec<(usize, usize)>]) -> Vec<usize> {
    let mut out = Vec::with_capacity(blocks.len() + 1);
    let mut acc = 0;
    out.push(0);
    for b in blocks {
        acc += b.len();
        out.push(acc);
    }
    out
}

impl CechComplex {
    /// Both systems must already share a cover on which the hom sheaves are acyclic.
    fn build(source: StokesLocalSystem, target: StokesLocalSystem) -> Result<Self> {
        let cover = source.cover.clone();
        let n = cover.len();
        let mut arc_slots = Vec::with_capacity(n);
        let mut overlap_slots = Vec::with_capacity(n);
        for k in 0..n {
            let p = permission_pattern(&source.factors, &target.factors, &cover.arcs()[k])?;
            arc_slots.push(slots(&p));
            let ov = cover.overlap(k).expect("validated cover");
            let p = permission_pattern(&source.factors, &target.factors, &ov)?;
            overlap_slots.push(slots(&p));
        }
        let c0_off = offsets(&arc_slots);
        let c1_off = offsets(&overlap_slots);
        let mut d = Matrix::zeros(c1_off[n], c0_off[n]);
        let nt = target.rank();
        let ns = source.rank();
        for k in 0..n {
            let prev = (k + n - 1) % n;
            for (col_local, &(i, j)) in arc_slots[k].iter().enumerate() {
                let col = c0_off[k] + col_local;
                // +G^T_k E_ij lands on overlap k
                let gt = &target.gluings[k];
                for r in 0..nt {
                    let v = gt.get(r, i);
                    if v.is_zero() {
                        continue;
                    }
                    let pos = locate(&overlap_slots[k], r, j)?;
                    let row = c1_off[k] + pos;
                    let nv = d.get(row, col) + v;
                    d.set(row, col, nv);
                }
                // -E_ij G^S_{k-1} lands on overlap k-1
                let gs = &source.gluings[prev];
                for c in 0..ns {
                    let v = gs.get(j, c);
                    if v.is_zero() {
                        continue;
                    }
                    let pos = locate(&overlap_slots[prev], i, c)?;
                    let row = c1_off[prev] + pos;
                    let nv = d.get(row, col) - v;
                    d.set(row, col, nv);
                }
            }
        }
        let (reduced, pivots) = d.rref();
        let kernel = Matrix::nullspace_from_rref(&reduced, &pivots);
        let rows: Vec<usize> = (0..d.rows()).collect();
        let image = d.select(&rows, &pivots);
        let complement = d.complement_coordinates();
        Ok(Self {
            source,
            target,
            arc_slots,
            overlap_slots,
            d,
            kernel,
            image,
            complement,
        })
    }

    pub fn new(source: &StokesLocalSystem, target: &StokesLocalSystem) -> Result<Self> {
        let cover = common_cover(&[source, target])?;
        Self::build(source.refine_to(&cover)?, target.refine_to(&cover)?)
    }

    pub fn cover(&self) -> &SectorCover {
        &self.source.cover
    }

    pub fn ext0(&self) -> usize {
        self.kernel.cols()
    }

    pub fn ext1(&self) -> usize {
        self.complement.len()
    }

    pub fn differential(&self) -> &Matrix {
        &self.d
    }

    fn c0_to_mats(&self, v: &[FieldScalar]) -> Vec<Matrix> {
        let off = offsets(&self.arc_slots);
        (0..self.arc_slots.len())
            .map(|k| {
                let mut m = Matrix::zeros(self.target.rank(), self.source.rank());
                for (t, &(i, j)) in self.arc_slots[k].iter().enumerate() {
                    m.set(i, j, v[off[k] + t].clone());
                }
                m
            })
            .collect()
    }

    fn c1_to_mats(&self, v: &[FieldScalar]) -> Vec<Matrix> {
        let off = offsets(&self.overlap_slots);
        (0..self.overlap_slots.len())
            .map(|k| {
                let mut m = Matrix::zeros(self.target.rank(), self.source.rank());
                for (t, &(i, j)) in self.overlap_slots[k].iter().enumerate() {
                    m.set(i, j, v[off[k] + t].clone());
                }
                m
            })
            .collect()
    }

    fn mats_to_coords(blocks: &[Vec<(usize, usize)>], mats: &[Matrix], what: &str) -> Result<Matrix> {
        let off = offsets(blocks);
        let mut v = Matrix::zeros(off[blocks.len()], 1);
        for (k, m) in mats.iter().enumerate() {
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    let x = m.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    let pos = blocks[k].iter().position(|&s| s == (i, j)).ok_or_else(|| {
                        Error::ForbiddenEntry {
                            row: i,
                            col: j,
                            context: format!("{} component {}", what, k),
                        }
                    })?;
                    v.set(off[k] + pos, 0, x.clone());
                }
            }
        }
        Ok(v)
    }

    /// Basis of `Ext^0 = Hom`, as per-arc matrices.
    pub fn hom_basis(&self) -> Vec<Vec<Matrix>> {
        (0..self.kernel.cols())
            .map(|c| self.c0_to_mats(&self.kernel.column(c)))
            .collect()
    }

    /// Coordinates of a global morphism in [`Self::hom_basis`].
    pub fn hom_coords(&self, mats: &[Matrix]) -> Result<Matrix> {
        let v = Self::mats_to_coords(&self.arc_slots, mats, "arc")?;
        self.kernel
            .solve(&v)
            .ok_or_else(|| Error::InvalidInput("not a global morphism".into()))
    }

    /// Cocycle representatives of a basis of `Ext^1`, as per-overlap matrices.
    pub fn ext1_basis(&self) -> Vec<Vec<Matrix>> {
        let rows = self.d.rows();
        self.complement
            .iter()
            .map(|&c| {
                let mut v = vec![FieldScalar::zero(); rows];
                v[c] = FieldScalar::one();
                self.c1_to_mats(&v)
            })
            .collect()
    }

    /// Coordinates of the class of a cochain in [`Self::ext1_basis`].
    pub fn ext1_coords(&self, mats: &[Matrix]) -> Result<Matrix> {
        let v = Self::mats_to_coords(&self.overlap_slots, mats, "overlap")?;
        let rows = self.d.rows();
        let comp = Matrix::identity(rows).select(&(0..rows).collect::<Vec<_>>(), &self.complement);
        let w = self.image.hstack(&comp);
        let x = w.solve(&v).expect("image plus complement spans the cochains");
        let sel: Vec<usize> = (self.image.cols()..w.cols()).collect();
        Ok(x.select(&sel, &[0]))
    }
}

fn locate(slots: &[(usize, usize)], i: usize, j: usize) -> Result<usize> {
    slots.iter().position(|&s| s == (i, j)).ok_or_else(|| {
        Error::InvalidCover(format!(
            "composite entry ({}, {}) is not permitted on the overlap",
            i, j
        ))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtGroups {
    pub ext0: usize,
    pub ext1: usize,
}

/// Dimensions of `Ext^0` and `Ext^1` between two systems on the punctured disk.
pub fn ext_global(source: &StokesLocalSystem, target: &StokesLocalSystem) -> Result<ExtGroups> {
    let c = CechComplex::new(source, target)?;
    Ok(ExtGroups {
        ext0: c.ext0(),
        ext1: c.ext1(),
    })
}

/// Global morphisms: dimension and a basis of per-arc matrices on the refined cover.
#[derive(Clone, Debug)]
pub struct HomGlobal {
    pub dimension: usize,
    pub cover: SectorCover,
    pub basis: Vec<Vec<Matrix>>,
}

pub fn hom_global(source: &StokesLocalSystem, target: &StokesLocalSystem) -> Result<HomGlobal> {
    let c = CechComplex::new(source, target)?;
    Ok(HomGlobal {
        dimension: c.ext0(),
        cover: c.cover().clone(),
        basis: c.hom_basis(),
    })
}

/// Dimensions of `Ext^n(Rj_* L, j_! L')`, `n = 0, 1, 2`, from the triangle
/// `j_! L' → Rj_* L' → i_* RΓ(L')` and the maps `Ext^n(L, L') → Hom^n(RΓ L, RΓ L')`.
pub fn ext_rj_star_to_j_shriek(l: &StokesLocalSystem, lp: &StokesLocalSystem) -> Result<[usize; 3]> {
    let unit = StokesLocalSystem::rank_one(PuiseuxFactor::zero());
    let cover = common_cover(&[l, lp, &unit])?;
    let (l, lp, unit) = (l.refine_to(&cover)?, lp.refine_to(&cover)?, unit.refine_to(&cover)?);
    let hom = CechComplex::build(l.clone(), lp.clone())?;
    let rl = CechComplex::build(unit.clone(), l)?;
    let rlp = CechComplex::build(unit, lp)?;
    let (h0, h1) = (rl.ext0(), rl.ext1());
    let (h0p, h1p) = (rlp.ext0(), rlp.ext1());
    let n = cover.len();

    // δ_0 : Hom(L, L') → Hom(H^0, H^0') ⊕ Hom(H^1, H^1')
    let sections = rl.hom_basis();
    let cocycles = rl.ext1_basis();
    let mut delta0_cols = Vec::new();
    for f in hom.hom_basis() {
        let mut col = Vec::new();
        for s in &sections {
            let img: Vec<Matrix> = (0..n).map(|k| &f[k] * &s[k]).collect();
            col.extend(rlp.hom_coords(&img)?.column(0));
        }
        for c in &cocycles {
            let img: Vec<Matrix> = (0..n).map(|k| &f[(k + 1) % n] * &c[k]).collect();
            col.extend(rlp.ext1_coords(&img)?.column(0));
        }
        delta0_cols.push(col);
    }
    let p0 = h0 * h0p + h1 * h1p;
    let rank0 = Matrix::from_columns(p0, &delta0_cols).rank();

    // δ_1 : Ext^1(L, L') → Hom(H^0, H^1'), the Yoneda product with sections
    let mut delta1_cols = Vec::new();
    for c in hom.ext1_basis() {
        let mut col = Vec::new();
        for s in &sections {
            let img: Vec<Matrix> = (0..n).map(|k| &c[k] * &s[k]).collect();
            col.extend(rlp.ext1_coords(&img)?.column(0));
        }
        delta1_cols.push(col);
    }
    let p1 = h0 * h1p;
    let rank1 = Matrix::from_columns(p1, &delta1_cols).rank();

    let p_minus1 = h1 * h0p;
    let ext0 = p_minus1 + (hom.ext0() - rank0);
    let ext1 = (p0 - rank0) + (hom.ext1() - rank1);
    let ext2 = p1 - rank1;
    Ok([ext0, ext1, ext2])
}

/// Morphism of Stokes local systems on a shared cover, given by per-arc
/// matrices that never mix distinct factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrregularMorphism {
    source: StokesLocalSystem,
    target: StokesLocalSystem,
    maps: Vec<Matrix>,
}

/// Distinct factors in canonical order.
fn classes(factors: &[PuiseuxFactor]) -> Vec<PuiseuxFactor> {
    let mut c = factors.to_vec();
    c.sort();
    c.dedup();
    c
}

fn slots_of(factors: &[PuiseuxFactor], class: &PuiseuxFactor) -> Vec<usize> {
    (0..factors.len()).filter(|&i| &factors[i] == class).collect()
}

impl IrregularMorphism {
    pub fn new(source: StokesLocalSystem, target: StokesLocalSystem, maps: Vec<Matrix>) -> Result<Self> {
        if source.cover != target.cover {
            return Err(Error::RegionMismatch(
                "source and target must share a cover".into(),
            ));
        }
        let n = source.cover.len();
        if maps.len() != n {
            return Err(Error::InvalidInput(format!("{} maps for {} arcs", maps.len(), n)));
        }
        for (k, m) in maps.iter().enumerate() {
            if m.rows() != target.rank() || m.cols() != source.rank() {
                return Err(Error::InvalidInput(format!("map {} has the wrong size", k)));
            }
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    if target.factors[i] != source.factors[j] && !m.get(i, j).is_zero() {
                        return Err(Error::ForbiddenEntry {
                            row: i,
                            col: j,
                            context: format!("arc {}: entry mixes distinct factors", k),
                        });
                    }
                }
            }
        }
        for k in 0..n {
            let lhs = &target.gluings[k] * &maps[k];
            let rhs = &maps[(k + 1) % n] * &source.gluings[k];
            if lhs != rhs {
                return Err(Error::InvalidInput(format!(
                    "maps on arcs {} and {} disagree over their overlap",
                    k,
                    (k + 1) % n
                )));
            }
        }
        Ok(Self {
            source,
            target,
            maps,
        })
    }

    pub fn identity(v: &StokesLocalSystem) -> Self {
        Self {
            source: v.clone(),
            target: v.clone(),
            maps: vec![Matrix::identity(v.rank()); v.cover.len()],
        }
    }

    pub fn zero(source: &StokesLocalSystem, target: &StokesLocalSystem) -> Result<Self> {
        let (s, t) = on_common_cover(source, target)?;
        let maps = vec![Matrix::zeros(t.rank(), s.rank()); s.cover.len()];
        Self::new(s, t, maps)
    }

    pub fn source(&self) -> &StokesLocalSystem {
        &self.source
    }

    pub fn target(&self) -> &StokesLocalSystem {
        &self.target
    }

    pub fn maps(&self) -> &[Matrix] {
        &self.maps
    }

    /// Image under the forgetful functor, in the frame of arc 0.
    pub fn forget(&self) -> LocalSystemMorphism {
        LocalSystemMorphism {
            source: self.source.forget(),
            target: self.target.forget(),
            matrix: self.maps[0].clone(),
        }
    }

    /// Per-arc block-diagonal bases, one block per factor class.
    fn per_class<F>(&self, factors: &[PuiseuxFactor], mut block: F) -> (Vec<PuiseuxFactor>, Vec<Matrix>)
    where
        F: FnMut(usize, &[usize], &PuiseuxFactor) -> Matrix,
    {
        let n = self.maps.len();
        let mut out_factors = Vec::new();
        let mut bases = vec![Matrix::zeros(factors.len(), 0); n];
        for c in classes(factors) {
            let idx = slots_of(factors, &c);
            let mut dim = None;
            for (k, basis) in bases.iter_mut().enumerate() {
                let b = block(k, &idx, &c);
                dim.get_or_insert(b.cols());
                let mut full = Matrix::zeros(factors.len(), b.cols());
                for (r, &slot) in idx.iter().enumerate() {
                    for col in 0..b.cols() {
                        full.set(slot, col, b.get(r, col).clone());
                    }
                }
                *basis = basis.hstack(&full);
            }
            out_factors.extend(std::iter::repeat_n(c, dim.unwrap_or(0)));
        }
        (out_factors, bases)
    }

    pub fn kernel(&self) -> Result<StokesLocalSystem> {
        let sf = self.source.factors.clone();
        let tf = self.target.factors.clone();
        let (factors, bases) = self.per_class(&sf, |k, idx, c| {
            let rows = slots_of(&tf, c);
            self.maps[k].select(&rows, idx).nullspace()
        });
        let n = bases.len();
        let mut gluings = Vec::with_capacity(n);
        for k in 0..n {
            let img = &self.source.gluings[k] * &bases[k];
            let h = bases[(k + 1) % n]
                .solve(&img)
                .expect("gluing preserves the kernel");
            gluings.push(h);
        }
        StokesLocalSystem::new(self.source.cover.clone(), factors, gluings)
    }

    pub fn cokernel(&self) -> Result<StokesLocalSystem> {
        let sf = self.source.factors.clone();
        let tf = self.target.factors.clone();
        // complement coordinates of the image, class by class
        let (factors, comps) = self.per_class(&tf, |k, idx, c| {
            let cols = slots_of(&sf, c);
            let block = self.maps[k].select(idx, &cols);
            quotient_frame(&block).1
        });
        let n = comps.len();
        let projections: Vec<Matrix> = (0..n)
            .map(|k| {
                let all: Vec<usize> = (0..self.source.rank()).collect();
                let rows: Vec<usize> = (0..self.target.rank()).collect();
                let img = self.maps[k].select(&rows, &all);
                let img = img.select(&rows, &img.column_basis());
                let w = img.hstack(&comps[k]);
                let winv = w.inverse().expect("image plus complement is a basis");
                let sel: Vec<usize> = (img.cols()..w.cols()).collect();
                winv.select(&sel, &rows)
            })
            .collect();
        let mut gluings = Vec::with_capacity(n);
        for k in 0..n {
            let h = &(&projections[(k + 1) % n] * &self.target.gluings[k]) * &comps[k];
            gluings.push(h);
        }
        StokesLocalSystem::new(self.source.cover.clone(), factors, gluings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::q;
    use crate::sector::SectorArc;

    fn inv_z() -> PuiseuxFactor {
        PuiseuxFactor::pole(1, 1)
    }

    fn ray_const(phi: PuiseuxFactor) -> IrregularConstant {
        IrregularConstant::new(phi, Region::positive_real_ray())
    }

    #[test]
    fn hom_constant_on_the_real_ray() {
        let a = ray_const(PuiseuxFactor::pole(2, 1));
        let b = ray_const(inv_z());
        assert_eq!(hom_constant(&a, &b).unwrap(), 0);
        assert_eq!(hom_constant(&b, &a).unwrap(), 1);
        assert_eq!(hom_constant(&a, &a).unwrap(), 1);
        let c = IrregularConstant::new(inv_z(), Region::Sector(SectorArc::turns(0, 1, 1, 2).unwrap()));
        assert!(matches!(hom_constant(&a, &c), Err(Error::RegionMismatch(_))));
    }

    #[test]
    fn tensor_and_sheafhom_examples() {
        let r = Region::Sector(SectorArc::turns(0, 1, 1, 3).unwrap());
        let p = IrregularConstant::new(inv_z(), r.clone());
        let m = IrregularConstant::new(-&inv_z(), r.clone());
        let o = IrregularConstant::new(PuiseuxFactor::zero(), r.clone());
        assert!(tensor_constant(&p, &m).unwrap().factor().is_zero());
        assert_eq!(tensor_constant(&p, &o).unwrap(), p);
        assert_eq!(tensor_constant(&p, &p).unwrap().factor(), &PuiseuxFactor::pole(1, 2));
        assert!(sheafhom_constant(&p, &p).unwrap().factor().is_zero());
        assert_eq!(sheafhom_constant(&o, &p).unwrap(), p);
        assert_eq!(sheafhom_constant(&p, &o).unwrap(), m);
    }

    #[test]
    fn dual_examples() {
        let r = Region::positive_real_ray();
        let p = IrregularConstant::new(inv_z(), r.clone());
        let (d, s) = dual_constant(&p);
        assert_eq!(d.factor(), &-&inv_z());
        assert_eq!(s, 2);
        assert_eq!(dual_constant(&d).0, p);
    }

    #[test]
    fn stalk_examples() {
        let whole = Region::Sector(SectorArc::turns(-1, 2, 1, 2).unwrap());
        let zero = IrregularConstant::new(PuiseuxFactor::zero(), whole.clone());
        assert_eq!(stalk(&zero, &FieldScalar::from_int(1)).unwrap(), Barcode::free(q(0, 1)));
        let p = IrregularConstant::new(inv_z(), whole);
        assert_eq!(stalk(&p, &FieldScalar::from_int(1)).unwrap(), Barcode::free(q(-1, 1)));
        assert_eq!(stalk(&p, &FieldScalar::i()).unwrap(), Barcode::free(q(0, 1)));
        assert!(stalk(&p, &FieldScalar::from_int(-1)).is_err());
    }

    #[test]
    fn hom_global_examples() {
        let unit = StokesLocalSystem::rank_one(PuiseuxFactor::zero());
        assert_eq!(hom_global(&unit, &unit).unwrap().dimension, 1);
        let l = StokesLocalSystem::rank_one(inv_z());
        assert_eq!(hom_global(&l, &unit).unwrap().dimension, 0);
        assert_eq!(hom_global(&unit, &l).unwrap().dimension, 0);
        assert_eq!(l.cohomology().unwrap(), (0, 1));
        assert_eq!(unit.cohomology().unwrap(), (1, 1));
        let l2 = StokesLocalSystem::rank_one(PuiseuxFactor::pole(2, 1));
        assert_eq!(l2.cohomology().unwrap(), (0, 2));
    }

    fn two_factor_with_stokes() -> StokesLocalSystem {
        let factors = vec![PuiseuxFactor::zero(), inv_z()];
        let cover = standard_cover(&factors).unwrap();
        let n = cover.len();
        let mut gluings = vec![Matrix::identity(2); n];
        // find an overlap where Λ^{1/z} → Λ^0 is allowed: Re(1/z) bounded above there
        let k = (0..n)
            .find(|&k| permitted(&inv_z(), &PuiseuxFactor::zero(), &cover.overlap(k).unwrap()).unwrap())
            .unwrap();
        gluings[k] = Matrix::from_int_rows(&[&[1, 1], &[0, 1]]);
        StokesLocalSystem::new(cover, factors, gluings).unwrap()
    }

    #[test]
    fn forget_examples() {
        let unit = StokesLocalSystem::rank_one(PuiseuxFactor::zero());
        assert_eq!(unit.forget().monodromy, Matrix::identity(1));
        assert_eq!(StokesLocalSystem::rank_one(inv_z()).forget().monodromy, Matrix::identity(1));
        let s = two_factor_with_stokes();
        assert_eq!(s.forget().monodromy, Matrix::from_int_rows(&[&[1, 1], &[0, 1]]));
    }

    #[test]
    fn forbidden_gluing_is_rejected() {
        let factors = vec![PuiseuxFactor::zero(), inv_z()];
        let cover = standard_cover(&factors).unwrap();
        let n = cover.len();
        let bad = (0..n)
            .find(|&k| !permitted(&inv_z(), &PuiseuxFactor::zero(), &cover.overlap(k).unwrap()).unwrap())
            .unwrap();
        let mut gluings = vec![Matrix::identity(2); n];
        gluings[bad] = Matrix::from_int_rows(&[&[1, 1], &[0, 1]]);
        assert!(matches!(
            StokesLocalSystem::new(cover, factors, gluings),
            Err(Error::ForbiddenEntry { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn kernel_examples() {
        let l = StokesLocalSystem::rank_one(inv_z());
        let id = IrregularMorphism::identity(&l);
        assert!(id.kernel().unwrap().is_zero());
        assert!(id.cokernel().unwrap().is_zero());
        let z = IrregularMorphism::zero(&l, &l).unwrap();
        assert_eq!(z.kernel().unwrap().rank(), 1);
        let two = l.direct_sum(&l).unwrap();
        let n = two.cover().len();
        let fold = IrregularMorphism::new(
            two.clone(),
            l.refine_to(two.cover()).unwrap(),
            vec![Matrix::from_int_rows(&[&[1, 1]]); n],
        )
        .unwrap();
        let k = fold.kernel().unwrap();
        assert_eq!(k.factors(), &[inv_z()]);
        assert!(fold.cokernel().unwrap().is_zero());
    }

    #[test]
    fn forget_commutes_with_kernel_on_stokes_example() {
        let s = two_factor_with_stokes();
        let s2 = s.direct_sum(&s).unwrap();
        let n = s2.cover().len();
        // projection onto the first copy: slots (0, 1) of the first summand
        let p = Matrix::from_int_rows(&[&[1, 0, 0, 0], &[0, 1, 0, 0]]);
        let f = IrregularMorphism::new(s2.clone(), s.refine_to(s2.cover()).unwrap(), vec![p; n]).unwrap();
        let k = f.kernel().unwrap();
        assert!(k.forget().isomorphic(&f.forget().kernel()));
        assert!(f.cokernel().unwrap().forget().isomorphic(&f.forget().cokernel()));
        assert_eq!(k.rank(), 2);
    }

    #[test]
    fn rj_star_to_j_shriek_for_constant_sheaf() {
        let unit = StokesLocalSystem::rank_one(PuiseuxFactor::zero());
        assert_eq!(ext_rj_star_to_j_shriek(&unit, &unit).unwrap(), [1, 1, 0]);
    }

    #[test]
    fn points_in_regions() {
        let upper = Region::Sector(SectorArc::turns(0, 1, 1, 2).unwrap());
        assert!(point_in_region(&FieldScalar::gaussian(1, 1), &upper).unwrap());
        assert!(!point_in_region(&FieldScalar::gaussian(1, 0), &upper).unwrap());
        let big = Region::Sector(SectorArc::turns(0, 1, 3, 4).unwrap());
        assert!(point_in_region(&FieldScalar::gaussian(-1, -1), &big).unwrap());
        assert!(!point_in_region(&FieldScalar::gaussian(1, -1), &big).unwrap());
        let full = Region::Sector(SectorArc::turns(0, 1, 1, 1).unwrap());
        assert!(!point_in_region(&FieldScalar::gaussian(2, 0), &full).unwrap());
        assert!(point_in_region(&FieldScalar::gaussian(-2, 0), &full).unwrap());
    }
}
