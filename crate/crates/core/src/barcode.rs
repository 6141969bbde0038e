//! Finitely presented graded `Λ`-modules in interval normal form.
//!
//! An [`Interval`] with birth `b` and length `ℓ` is the module generated in
//! degree `b` with `T^c · gen ≠ 0` exactly when `c < ℓ`; a free interval has
//! `ℓ = ∞` and is `Λ⟨-b⟩`. Degree `t` of the module is one-dimensional when
//! `b ≤ t < b + ℓ`, so a barcode is the same data as a persistence module
//! over `(Q, ≤)` whose structure maps are multiplication by `T`.
//!
//! Kernels, images and cokernels of homogeneous morphisms are computed by
//! evaluating the rank function on the finite grid of critical degrees and
//! reading the interval multiplicities off by inclusion-exclusion.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{fmt_q, FieldScalar, Q};
use crate::linalg::Matrix;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Interval {
    birth: Q,
    /// `None` is the free interval.
    length: Option<Q>,
}

impl Interval {
    pub fn free(birth: Q) -> Self {
        Self { birth, length: None }
    }

    pub fn torsion(birth: Q, length: Q) -> Result<Self> {
        if !length.is_positive() {
            return Err(Error::InvalidInput(format!(
                "interval length {} must be positive",
                fmt_q(&length)
            )));
        }
        Ok(Self {
            birth,
            length: Some(length),
        })
    }

    pub fn birth(&self) -> &Q {
        &self.birth
    }

    pub fn length(&self) -> Option<&Q> {
        self.length.as_ref()
    }

    pub fn is_free(&self) -> bool {
        self.length.is_none()
    }

    /// First degree at which the interval is dead, if any.
    pub fn death(&self) -> Option<Q> {
        self.length.as_ref().map(|l| &self.birth + l)
    }

    pub fn alive_at(&self, t: &Q) -> bool {
        *t >= self.birth && self.death().is_none_or(|d| *t < d)
    }

    pub fn shifted_births(&self, by: &Q) -> Self {
        Self {
            birth: &self.birth + by,
            length: self.length.clone(),
        }
    }
}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// By birth, then length with `∞` last.
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.birth.cmp(&other.birth).then_with(|| match (&self.length, &other.length) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (Some(a), Some(b)) => a.cmp(b),
        })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.death() {
            None => write!(f, "[{},inf)", fmt_q(&self.birth)),
            Some(d) => write!(f, "[{},{})", fmt_q(&self.birth), fmt_q(&d)),
        }
    }
}

/// Multiset of intervals in canonical (sorted) order.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct Barcode {
    intervals: Vec<Interval>,
}

impl Barcode {
    pub fn new(mut intervals: Vec<Interval>) -> Self {
        intervals.sort();
        Self { intervals }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn free(birth: Q) -> Self {
        Self::new(vec![Interval::free(birth)])
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Number of free intervals: the rank of the class after `⊗_Λ k`.
    pub fn reduced_rank(&self) -> usize {
        self.intervals.iter().filter(|i| i.is_free()).count()
    }

    pub fn free_part(&self) -> Barcode {
        Barcode::new(self.intervals.iter().filter(|i| i.is_free()).cloned().collect())
    }

    pub fn torsion_part(&self) -> Barcode {
        Barcode::new(self.intervals.iter().filter(|i| !i.is_free()).cloned().collect())
    }

    pub fn direct_sum(&self, other: &Barcode) -> Barcode {
        Barcode::new(self.intervals.iter().chain(&other.intervals).cloned().collect())
    }

    /// Grading shift `V⟨a⟩`, with `Gr^b V⟨a⟩ = Gr^{a+b} V`.
    pub fn grading_shift(&self, a: &Q) -> Barcode {
        let by = -a.clone();
        Barcode::new(self.intervals.iter().map(|i| i.shifted_births(&by)).collect())
    }

    /// Dimension of the degree-`t` piece.
    pub fn dim_at(&self, t: &Q) -> usize {
        self.intervals.iter().filter(|i| i.alive_at(t)).count()
    }

    /// Dual `RHom_Λ(V, Λ)`: the free part in cohomological degree 0 and the
    /// torsion part (an `Ext^1`) in degree 1.
    pub fn dual(&self) -> (Barcode, Barcode) {
        let mut free = Vec::new();
        let mut tors = Vec::new();
        for i in &self.intervals {
            match &i.length {
                None => free.push(Interval::free(-i.birth.clone())),
                Some(l) => tors.push(Interval {
                    birth: -(&i.birth + l),
                    length: Some(l.clone()),
                }),
            }
        }
        (Barcode::new(free), Barcode::new(tors))
    }

    /// Critical degrees: births and deaths.
    fn critical(&self, offset: &Q, out: &mut Vec<Q>) {
        for i in &self.intervals {
            out.push(&i.birth + offset);
            if let Some(d) = i.death() {
                out.push(d + offset);
            }
        }
    }
}

impl fmt::Display for Barcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.intervals.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Degrees `d` with `Hom^d(src, tgt) ≠ 0`, as a half-open range `[lo, hi)`
/// (`hi = None` for an unbounded range). `None` if the hom module vanishes.
///
/// A degree-`d` map sends the generator of `src` to `T^{b+d-b'}·gen'`; it is
/// nonzero when `b' ≤ b+d < b'+ℓ'` and respects the relation `T^ℓ·gen = 0`
/// when `b+d+ℓ ≥ b'+ℓ'`.
pub fn hom_range(src: &Interval, tgt: &Interval) -> Option<(Q, Option<Q>)> {
    let base = &tgt.birth - &src.birth;
    let lo = match (&src.length, &tgt.length) {
        (None, _) => base.clone(),
        (Some(_), None) => return None,
        (Some(l), Some(lt)) => {
            let rel = &base + lt - l;
            if rel > base {
                rel
            } else {
                base.clone()
            }
        }
    };
    let hi = tgt.length.as_ref().map(|lt| &base + lt);
    match &hi {
        Some(h) if *h <= lo => None,
        _ => Some((lo, hi)),
    }
}

fn in_range(range: &(Q, Option<Q>), d: &Q) -> bool {
    *d >= range.0 && range.1.as_ref().is_none_or(|h| d < h)
}

/// Basis of `Hom^degree(source, target)`: one elementary morphism per pair
/// `(target index, source index)` whose hom is nonzero in that degree.
pub fn hom_degree(source: &Barcode, target: &Barcode, degree: &Q) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (j, tj) in target.intervals.iter().enumerate() {
        for (i, si) in source.intervals.iter().enumerate() {
            if hom_range(si, tj).is_some_and(|r| in_range(&r, degree)) {
                out.push((j, i));
            }
        }
    }
    out
}

/// One surviving class of the reduced hom space.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ReducedHomTag {
    pub source: usize,
    pub target: usize,
    /// Lowest degree in which a lift exists; all `T`-multiples are identified with it.
    pub min_degree: String,
}

/// `Hom(V, W) ⊗_Λ k`: an elementary class survives iff no `T^a` kills it, i.e.
/// iff its hom module is unbounded in degree.
pub fn hom_reduced(source: &Barcode, target: &Barcode) -> Vec<ReducedHomTag> {
    let mut out = Vec::new();
    for (i, si) in source.intervals.iter().enumerate() {
        for (j, tj) in target.intervals.iter().enumerate() {
            if let Some((lo, None)) = hom_range(si, tj) {
                out.push(ReducedHomTag {
                    source: i,
                    target: j,
                    min_degree: fmt_q(&lo),
                });
            }
        }
    }
    out
}

pub fn tensor_interval(a: &Interval, b: &Interval) -> Interval {
    let birth = &a.birth + &b.birth;
    let length = match (&a.length, &b.length) {
        (None, None) => None,
        (Some(l), None) | (None, Some(l)) => Some(l.clone()),
        (Some(l), Some(m)) => Some(if l < m { l.clone() } else { m.clone() }),
    };
    Interval { birth, length }
}

/// `V ⊗_Λ W`, interval pair by interval pair.
pub fn tensor(a: &Barcode, b: &Barcode) -> Barcode {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in &a.intervals {
        for y in &b.intervals {
            out.push(tensor_interval(x, y));
        }
    }
    Barcode::new(out)
}

/// Homogeneous morphism `source → target` of the given degree. Entry `(j, i)`
/// is the coefficient `c` in `gen_i ↦ c·T^{b_i+d-b_j}·gen_j`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GradedMorphism {
    source: Barcode,
    target: Barcode,
    degree: Q,
    matrix: Matrix,
}

impl GradedMorphism {
    pub fn new(source: Barcode, target: Barcode, degree: Q, matrix: Matrix) -> Result<Self> {
        if matrix.rows() != target.len() || matrix.cols() != source.len() {
            return Err(Error::InvalidInput(format!(
                "morphism matrix is {}x{}, expected {}x{}",
                matrix.rows(),
                matrix.cols(),
                target.len(),
                source.len()
            )));
        }
        for j in 0..target.len() {
            for i in 0..source.len() {
                if matrix.get(j, i).is_zero() {
                    continue;
                }
                let ok = hom_range(&source.intervals[i], &target.intervals[j])
                    .is_some_and(|r| in_range(&r, &degree));
                if !ok {
                    return Err(Error::ForbiddenEntry {
                        row: j,
                        col: i,
                        context: format!("degree {} graded morphism", fmt_q(&degree)),
                    });
                }
            }
        }
        Ok(Self {
            source,
            target,
            degree,
            matrix,
        })
    }

    pub fn identity(v: &Barcode) -> Self {
        Self::new(v.clone(), v.clone(), Q::zero(), Matrix::identity(v.len()))
            .expect("identity is a valid morphism")
    }

    pub fn zero(source: Barcode, target: Barcode, degree: Q) -> Self {
        let m = Matrix::zeros(target.len(), source.len());
        Self::new(source, target, degree, m).expect("zero is a valid morphism")
    }

    pub fn source(&self) -> &Barcode {
        &self.source
    }

    pub fn target(&self) -> &Barcode {
        &self.target
    }

    pub fn degree(&self) -> &Q {
        &self.degree
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// `T^a · f`: same coefficients, degree raised by `a`; entries whose
    /// image falls past the end of the target interval become zero.
    pub fn t_multiple(&self, a: &Q) -> Self {
        assert!(!a.is_negative());
        let degree = &self.degree + a;
        let mut m = self.matrix.clone();
        for j in 0..self.target.len() {
            for i in 0..self.source.len() {
                let keep = hom_range(&self.source.intervals[i], &self.target.intervals[j])
                    .is_some_and(|r| in_range(&r, &degree));
                if !keep {
                    m.set(j, i, FieldScalar::zero());
                }
            }
        }
        Self {
            source: self.source.clone(),
            target: self.target.clone(),
            degree,
            matrix: m,
        }
    }

    /// `g ∘ self`; degrees add.
    pub fn then(&self, g: &GradedMorphism) -> Result<GradedMorphism> {
        if g.source != self.target {
            return Err(Error::InvalidInput("composition of non-composable morphisms".into()));
        }
        let degree = &self.degree + &g.degree;
        let mut m = &g.matrix * &self.matrix;
        // a composite of allowed elementary maps can still die in the target
        for j in 0..g.target.len() {
            for i in 0..self.source.len() {
                let keep = hom_range(&self.source.intervals[i], &g.target.intervals[j])
                    .is_some_and(|r| in_range(&r, &degree));
                if !keep {
                    m.set(j, i, FieldScalar::zero());
                }
            }
        }
        GradedMorphism::new(self.source.clone(), g.target.clone(), degree, m)
    }

    /// The linear map on degree-`t` pieces, in coordinates of the intervals
    /// alive at `t` (source) and `t + degree` (target), embedded into full
    /// coordinates: returns a `target.len() × source.len()` matrix.
    fn at_degree(&self, t: &Q) -> Matrix {
        let u = t + &self.degree;
        let mut m = Matrix::zeros(self.target.len(), self.source.len());
        for (i, si) in self.source.intervals.iter().enumerate() {
            if !si.alive_at(t) {
                continue;
            }
            for (j, tj) in self.target.intervals.iter().enumerate() {
                if tj.alive_at(&u) {
                    m.set(j, i, self.matrix.get(j, i).clone());
                }
            }
        }
        m
    }

    /// Barcode of `ker f`, graded like the source.
    pub fn kernel(&self) -> Barcode {
        let mut grid = Vec::new();
        self.source.critical(&Q::zero(), &mut grid);
        self.target.critical(&-self.degree.clone(), &mut grid);
        let grid = sorted_grid(grid);
        // dead source coordinates are free in the nullspace; project them away
        let kernels: Vec<Matrix> = grid
            .iter()
            .map(|t| project(&self.source, t, &self.at_degree(t).nullspace()))
            .collect();
        decompose(&grid, |k, l| {
            project(&self.source, &grid[l], &kernels[k]).rank()
        })
    }

    /// Barcode of `im f`, graded like the target.
    pub fn image(&self) -> Barcode {
        let grid = self.target_grid();
        let images: Vec<Matrix> = grid
            .iter()
            .map(|u| self.at_degree(&(u - &self.degree)))
            .collect();
        decompose(&grid, |k, l| project(&self.target, &grid[l], &images[k]).rank())
    }

    /// Barcode of `coker f`, graded like the target.
    pub fn cokernel(&self) -> Barcode {
        let grid = self.target_grid();
        let n = self.target.len();
        let images: Vec<Matrix> = grid
            .iter()
            .map(|u| self.at_degree(&(u - &self.degree)))
            .collect();
        let image_ranks: Vec<usize> = images.iter().map(|m| m.rank()).collect();
        decompose(&grid, |k, l| {
            let units = Matrix::identity(n);
            let moved = project(&self.target, &grid[l], &project(&self.target, &grid[k], &units));
            moved.hstack(&images[l]).rank() - image_ranks[l]
        })
    }

    fn target_grid(&self) -> Vec<Q> {
        let mut grid = Vec::new();
        self.target.critical(&Q::zero(), &mut grid);
        self.source.critical(&self.degree, &mut grid);
        sorted_grid(grid)
    }
}

fn sorted_grid(mut grid: Vec<Q>) -> Vec<Q> {
    grid.sort();
    grid.dedup();
    grid
}

/// Multiplication by `T^{t - s}` in full interval coordinates: coordinates of
/// intervals dead at `t` are zeroed.
fn project(module: &Barcode, t: &Q, vectors: &Matrix) -> Matrix {
    let mut out = vectors.clone();
    for (i, iv) in module.intervals.iter().enumerate() {
        if !iv.alive_at(t) {
            for c in 0..out.cols() {
                out.set(i, c, FieldScalar::zero());
            }
        }
    }
    out
}

/// Interval decomposition of a persistence module that is constant on each
/// `[grid[k], grid[k+1])`, given its rank function `rk(k, l)` for `k ≤ l`.
fn decompose(grid: &[Q], rk: impl Fn(usize, usize) -> usize) -> Barcode {
    let n = grid.len();
    if n == 0 {
        return Barcode::zero();
    }
    let mut table = vec![vec![0i64; n]; n];
    for k in 0..n {
        for l in k..n {
            table[k][l] = rk(k, l) as i64;
        }
    }
    let r = |k: isize, l: usize| -> i64 {
        if k < 0 {
            0
        } else {
            table[k as usize][l]
        }
    };
    let mut out = Vec::new();
    for i in 0..n {
        let ii = i as isize;
        for j in (i + 1)..n {
            let m = r(ii, j - 1) - r(ii, j) - r(ii - 1, j - 1) + r(ii - 1, j);
            debug_assert!(m >= 0, "negative interval multiplicity");
            let len = &grid[j] - &grid[i];
            for _ in 0..m {
                out.push(Interval {
                    birth: grid[i].clone(),
                    length: Some(len.clone()),
                });
            }
        }
        let m = r(ii, n - 1) - r(ii - 1, n - 1);
        debug_assert!(m >= 0);
        for _ in 0..m {
            out.push(Interval::free(grid[i].clone()));
        }
    }
    Barcode::new(out)
}
