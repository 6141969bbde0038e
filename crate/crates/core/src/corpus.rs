//! Seeded random generators for factors and arcs, and the oracle agreement
//! suite built on them.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::barcode::{Barcode, GradedMorphism, Interval};
use crate::complex::{CurveComplex, Summand};
use crate::error::{Error, Result};
use crate::field::{q, FieldScalar, Q};
use crate::irregular::{hom_constant, permitted, IrregularConstant, IrregularMorphism, StokesLocalSystem};
use crate::linalg::Matrix;
use crate::oracle::{oracle_dominance, oracle_hom, OracleGrid};
use crate::par::{self, Execution};
use crate::sector::{standard_cover, PuiseuxFactor, Region, SectorArc};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_coeff<R: Rng>(rng: &mut R) -> FieldScalar {
    loop {
        let den = *[1, 1, 2].choose(rng).unwrap();
        let re = rng.gen_range(-3..=3);
        let im = if rng.gen_bool(0.5) { rng.gen_range(-3..=3) } else { 0 };
        if re != 0 || im != 0 {
            return FieldScalar::new(q(re, den), q(im, den));
        }
    }
}

/// Up to two terms of pole order at most 2, ramification 1 or 2.
pub fn random_factor<R: Rng>(rng: &mut R) -> PuiseuxFactor {
    let r: i64 = if rng.gen_bool(0.25) { 2 } else { 1 };
    let mut orders: Vec<i64> = (1..=2 * r).collect();
    orders.shuffle(rng);
    let n = rng.gen_range(0..=2usize);
    let terms = orders[..n]
        .iter()
        .map(|&k| (q(k, r), random_coeff(rng)))
        .collect();
    PuiseuxFactor::new(r as u32, terms).expect("orders fit the ramification")
}

pub fn random_arc<R: Rng>(rng: &mut R) -> SectorArc {
    let start = q(rng.gen_range(0..48), 48);
    let len = [q(1, 12), q(1, 8), q(1, 6), q(1, 4), q(1, 3), q(1, 2), q(3, 4)]
        .choose(rng)
        .unwrap()
        .clone();
    SectorArc::new(start.clone(), start + len).expect("short arc")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleCase {
    pub phi1: PuiseuxFactor,
    pub phi2: PuiseuxFactor,
    pub arc: SectorArc,
}

pub fn oracle_cases(seed: u64, count: usize) -> Vec<OracleCase> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let phi1 = random_factor(&mut rng);
            let phi2 = if rng.gen_bool(0.1) {
                phi1.clone()
            } else {
                random_factor(&mut rng)
            };
            OracleCase {
                phi1,
                phi2,
                arc: random_arc(&mut rng),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleSuite {
    pub total: usize,
    pub agreements: usize,
    pub ambiguous: usize,
    /// Indices of cases where a clear oracle verdict contradicts the exact hom.
    pub disagreements: Vec<usize>,
}

impl OracleSuite {
    pub fn decided(&self) -> usize {
        self.total - self.ambiguous
    }
}

/// `hom(Λ^{φ1}, Λ^{φ2})` on each arc against the sampled verdict on `φ1 - φ2`.
pub fn oracle_suite(cases: &[OracleCase], exec: Execution) -> Result<OracleSuite> {
    let outcomes = par::map(exec, cases, |c| -> Result<Option<bool>> {
        let region = Region::Sector(c.arc.clone());
        let exact = hom_constant(
            &IrregularConstant::new(c.phi1.clone(), region.clone()),
            &IrregularConstant::new(c.phi2.clone(), region.clone()),
        )?;
        let sampled = oracle_hom(oracle_dominance(&(&c.phi1 - &c.phi2), &region, OracleGrid::default()));
        Ok(sampled.map(|s| s == exact))
    });
    let mut suite = OracleSuite {
        total: cases.len(),
        agreements: 0,
        ambiguous: 0,
        disagreements: Vec::new(),
    };
    for (k, o) in outcomes.into_iter().enumerate() {
        match o? {
            None => suite.ambiguous += 1,
            Some(true) => suite.agreements += 1,
            Some(false) => suite.disagreements.push(k),
        }
    }
    Ok(suite)
}

/// Exponent used by generated barcodes, a multiple of `1/4` in `[0, 3]`.
pub fn random_grade<R: Rng>(rng: &mut R) -> Q {
    q(rng.gen_range(0..=12), 4)
}

pub fn random_barcode<R: Rng>(rng: &mut R, max_len: usize) -> Barcode {
    let n = rng.gen_range(0..=max_len);
    Barcode::new(
        (0..n)
            .map(|_| {
                let b = random_grade(rng);
                if rng.gen_bool(0.5) {
                    Interval::free(b)
                } else {
                    Interval::torsion(b, q(rng.gen_range(1..=8), 4)).expect("positive length")
                }
            })
            .collect(),
    )
}

/// Random homogeneous morphism; entries outside the allowed pattern are dropped.
pub fn random_graded_morphism<R: Rng>(rng: &mut R) -> GradedMorphism {
    let source = random_barcode(rng, 4);
    let target = random_barcode(rng, 4);
    let degree = q(rng.gen_range(-2..=2), 4);
    let mut m = random_int_matrix(rng, target.len(), source.len());
    loop {
        match GradedMorphism::new(source.clone(), target.clone(), degree.clone(), m.clone()) {
            Ok(f) => return f,
            Err(Error::ForbiddenEntry { row, col, .. }) => m.set(row, col, FieldScalar::zero()),
            Err(e) => panic!("unexpected: {e}"),
        }
    }
}

fn random_int_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, FieldScalar::from_int(rng.gen_range(-2..=2)));
        }
    }
    m
}

/// Pole order at most 2 and small integer coefficients.
pub fn random_small_factor<R: Rng>(rng: &mut R) -> PuiseuxFactor {
    let n = rng.gen_range(0..=2usize);
    let mut orders = [1, 2];
    orders.shuffle(rng);
    let terms = orders[..n]
        .iter()
        .map(|&k| {
            let re = rng.gen_range(-2..=2);
            let im = if re == 0 { *[-1, 1].choose(rng).unwrap() } else { rng.gen_range(-1..=1) };
            (q(k, 1), FieldScalar::from_int(re) + FieldScalar::new(Q::zero(), q(im, 1)))
        })
        .collect();
    PuiseuxFactor::new(1, terms).expect("integral orders")
}

/// Distinct factors on their standard cover, glued by random invertible
/// matrices respecting the dominance pattern of each overlap.
pub fn random_system<R: Rng>(rng: &mut R, max_factors: usize) -> StokesLocalSystem {
    loop {
        let k = rng.gen_range(1..=max_factors);
        let mut factors: Vec<PuiseuxFactor> = (0..k).map(|_| random_small_factor(rng)).collect();
        factors.sort();
        factors.dedup();
        let Ok(cover) = standard_cover(&factors) else { continue };
        let n = factors.len();
        let mut gluings = Vec::with_capacity(cover.len());
        for ov in cover.overlaps() {
            let mut g = Matrix::identity(n);
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.gen_bool(0.6) && permitted(&factors[j], &factors[i], &ov).unwrap_or(false) {
                        g.set(i, j, FieldScalar::from_int(rng.gen_range(-2..=2)));
                    }
                }
            }
            gluings.push(g);
        }
        // formal monodromy on the closing gluing
        let last = gluings.len() - 1;
        for i in 0..n {
            let d = FieldScalar::from_int(*[1, 1, -1, 2].choose(rng).unwrap());
            let v = gluings[last].get(i, i) * &d;
            gluings[last].set(i, i, v);
        }
        if let Ok(l) = StokesLocalSystem::new(cover, factors, gluings) {
            return l;
        }
    }
}

/// `A ⊗ 𝕜^a → A ⊗ 𝕜^b` given by `id ⊗ R`, conjugated arc by arc with random
/// invertible matrices that preserve each factor class.
pub fn random_irregular_morphism<R: Rng>(rng: &mut R) -> IrregularMorphism {
    let base = random_system(rng, 2);
    let (a, b) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
    // rank usually below min(a, b), so kernels and cokernels both occur
    let k = rng.gen_range(0..=a.min(b));
    let r = &random_int_matrix(rng, b, k) * &random_int_matrix(rng, k, a);
    let tensor_up = |l: &StokesLocalSystem, m: usize| -> (Vec<PuiseuxFactor>, Vec<Matrix>) {
        let factors = l.factors().iter().flat_map(|f| std::iter::repeat_n(f.clone(), m)).collect();
        let gluings = l.gluings().iter().map(|g| kron(g, &Matrix::identity(m))).collect();
        (factors, gluings)
    };
    let (fs, gs) = tensor_up(&base, a);
    let (ft, gt) = tensor_up(&base, b);
    let arcs = base.cover().len();
    let ds: Vec<Matrix> = (0..arcs).map(|_| random_class_diagonal(rng, base.rank(), a)).collect();
    let dt: Vec<Matrix> = (0..arcs).map(|_| random_class_diagonal(rng, base.rank(), b)).collect();
    let conj = |d: &[Matrix], g: &[Matrix]| -> Vec<Matrix> {
        (0..arcs)
            .map(|k| &(&d[(k + 1) % arcs] * &g[k]) * &d[k].inverse().expect("invertible"))
            .collect()
    };
    let f = kron(&Matrix::identity(base.rank()), &r);
    let maps = (0..arcs)
        .map(|k| &(&dt[k] * &f) * &ds[k].inverse().expect("invertible"))
        .collect();
    let source = StokesLocalSystem::new(base.cover().clone(), fs, conj(&ds, &gs)).expect("gauge preserves the pattern");
    let target = StokesLocalSystem::new(base.cover().clone(), ft, conj(&dt, &gt)).expect("gauge preserves the pattern");
    IrregularMorphism::new(source, target, maps).expect("compatible by construction")
}

fn kron(x: &Matrix, y: &Matrix) -> Matrix {
    let mut m = Matrix::zeros(x.rows() * y.rows(), x.cols() * y.cols());
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            for k in 0..y.rows() {
                for l in 0..y.cols() {
                    m.set(i * y.rows() + k, j * y.cols() + l, x.get(i, j) * y.get(k, l));
                }
            }
        }
    }
    m
}

/// Block diagonal with `classes` invertible `m × m` blocks.
fn random_class_diagonal<R: Rng>(rng: &mut R, classes: usize, m: usize) -> Matrix {
    let mut out = Matrix::zeros(0, 0);
    for _ in 0..classes {
        let block = loop {
            let c = random_int_matrix(rng, m, m);
            if c.inverse().is_some() {
                break c;
            }
        };
        out = out.direct_sum(&block);
    }
    out
}

/// One to three summands in degrees `-2..=1`.
pub fn random_complex<R: Rng>(rng: &mut R) -> CurveComplex {
    let n = rng.gen_range(1..=3);
    let summands = (0..n)
        .map(|_| {
            let degree = rng.gen_range(-2..=1);
            match rng.gen_range(0..3) {
                0 => Summand::JShriek { degree, system: random_system(rng, 2) },
                1 => Summand::JStar { degree, system: random_system(rng, 2) },
                _ => Summand::Skyscraper { degree, barcode: random_barcode(rng, 3) },
            }
        })
        .collect();
    CurveComplex::new(summands)
}

/// Perverse-biased variant: every summand sits in its perverse degree.
pub fn random_perverse_complex<R: Rng>(rng: &mut R) -> CurveComplex {
    let n = rng.gen_range(1..=3);
    let summands = (0..n)
        .map(|_| match rng.gen_range(0..3) {
            0 => Summand::JShriek { degree: -1, system: random_system(rng, 2) },
            1 => Summand::JStar { degree: -1, system: random_system(rng, 2) },
            _ => Summand::Skyscraper { degree: 0, barcode: random_barcode(rng, 3) },
        })
        .collect();
    CurveComplex::new(summands)
}
