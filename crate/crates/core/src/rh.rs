//! Exponential connection data and their solution complexes.
//!
//! The connection side is a data format: a good formal decomposition into
//! rank-one exponentials `ℰ^φ`, a formal monodromy and one Stokes matrix per
//! Stokes direction. `sol_lambda` turns it into `j_! L[1]` for the Stokes
//! local system `L` glued from that data.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::complex::{hom_complex, CurveComplex};
use crate::error::{Error, Result};
use crate::field::{FieldScalar, Q};
use crate::irregular::{hom_constant, IrregularConstant, StokesLocalSystem};
use crate::linalg::Matrix;
use crate::par::{self, Execution};
use crate::sector::{all_directions, standard_cover, PuiseuxFactor, Region};

/// Degree of the solution complex: the `[dim X]` shift with `dim X = 1`.
pub const SOL_DEGREE: i64 = -1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionDatum {
    factors: Vec<PuiseuxFactor>,
    formal_monodromy: Matrix,
    stokes_matrices: Vec<Matrix>,
}

impl ConnectionDatum {
    /// Stokes matrices are listed in increasing order of their direction in `[0, 1)`.
    pub fn new(
        factors: Vec<PuiseuxFactor>,
        formal_monodromy: Matrix,
        stokes_matrices: Vec<Matrix>,
    ) -> Result<Self> {
        let n = factors.len();
        let square = |m: &Matrix| m.rows() == n && m.cols() == n;
        if !square(&formal_monodromy) || formal_monodromy.inverse().is_none() {
            return Err(Error::InvalidInput(format!(
                "formal monodromy must be an invertible {n}x{n} matrix"
            )));
        }
        for i in 0..n {
            for j in 0..n {
                if factors[i] != factors[j] && !formal_monodromy.get(i, j).is_zero() {
                    return Err(Error::ForbiddenEntry {
                        row: i,
                        col: j,
                        context: "formal monodromy mixes distinct factors".into(),
                    });
                }
            }
        }
        let dirs = all_directions(&factors)?;
        if stokes_matrices.len() != dirs.len() {
            return Err(Error::InvalidInput(format!(
                "{} Stokes matrices for {} Stokes directions",
                stokes_matrices.len(),
                dirs.len()
            )));
        }
        for (k, s) in stokes_matrices.iter().enumerate() {
            if !square(s) {
                return Err(Error::InvalidInput(format!("Stokes matrix {k} has the wrong size")));
            }
            for i in 0..n {
                for j in 0..n {
                    let v = s.get(i, j);
                    let unipotent_ok = if factors[i] == factors[j] {
                        *v == if i == j { FieldScalar::one() } else { FieldScalar::zero() }
                    } else {
                        true
                    };
                    if !unipotent_ok {
                        return Err(Error::ForbiddenEntry {
                            row: i,
                            col: j,
                            context: format!("Stokes matrix {k} is not unipotent"),
                        });
                    }
                }
            }
        }
        let datum = Self {
            factors,
            formal_monodromy,
            stokes_matrices,
        };
        datum.local_system()?;
        Ok(datum)
    }

    /// `ℰ^φ` with trivial formal monodromy.
    pub fn exponential(phi: PuiseuxFactor) -> Result<Self> {
        Self::new(vec![phi], Matrix::identity(1), Vec::new())
    }

    /// Diagonal data: identity Stokes matrices and formal monodromy.
    pub fn split(factors: Vec<PuiseuxFactor>) -> Result<Self> {
        let n = factors.len();
        let m = all_directions(&factors)?.len();
        Self::new(factors, Matrix::identity(n), vec![Matrix::identity(n); m])
    }

    pub fn factors(&self) -> &[PuiseuxFactor] {
        &self.factors
    }

    pub fn formal_monodromy(&self) -> &Matrix {
        &self.formal_monodromy
    }

    pub fn stokes_matrices(&self) -> &[Matrix] {
        &self.stokes_matrices
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// Negated factors and inverse-transpose matrices.
    pub fn dual(&self) -> Self {
        let inv_t = |m: &Matrix| m.inverse().expect("invertible").transpose();
        Self {
            factors: self.factors.iter().map(|f| -f).collect(),
            formal_monodromy: inv_t(&self.formal_monodromy),
            stokes_matrices: self.stokes_matrices.iter().map(inv_t).collect(),
        }
    }

    /// The glued Stokes local system: the Stokes matrix of direction `i` sits
    /// on the gluing leaving the arc around that direction, the formal
    /// monodromy on the closing gluing.
    pub fn local_system(&self) -> Result<StokesLocalSystem> {
        let n = self.rank();
        let cover = standard_cover(&self.factors)?;
        let mut gluings = vec![Matrix::identity(n); cover.len()];
        for (i, s) in self.stokes_matrices.iter().enumerate() {
            gluings[2 * i] = s.clone();
        }
        let last = gluings.len() - 1;
        gluings[last] = &self.formal_monodromy * &gluings[last];
        StokesLocalSystem::new(cover, self.factors.clone(), gluings)
    }
}

pub fn sol_lambda(d: &ConnectionDatum) -> Result<CurveComplex> {
    Ok(CurveComplex::j_shriek(d.local_system()?, SOL_DEGREE))
}

/// Where the two sides are compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Locus {
    /// The whole punctured disk.
    FullDisk,
    /// The ray `(0, ∞)` in the positive real direction.
    PositiveRay,
}

impl Locus {
    pub fn as_str(self) -> &'static str {
        match self {
            Locus::FullDisk => "FULL_DISK",
            Locus::PositiveRay => "POSITIVE_RAY",
        }
    }
}

/// `Hom(ℰ_source, ℰ_target)` on the connection side against
/// `Hom(Sol ℰ_target, Sol ℰ_source)` on the sheaf side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomComparison {
    pub source: usize,
    pub target: usize,
    pub sheaf: usize,
    pub expected: Option<usize>,
}

impl HomComparison {
    pub fn agrees(&self) -> bool {
        self.expected.is_none_or(|e| e == self.sheaf)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomTable {
    pub locus: Locus,
    pub labels: Vec<String>,
    /// Row-major, `entries[i * n + j]` compares `Hom(d_i, d_j)`.
    pub entries: Vec<HomComparison>,
}

impl HomTable {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn sheaf(&self, i: usize, j: usize) -> usize {
        self.entries[i * self.len() + j].sheaf
    }

    pub fn is_transpose_of(&self, other: &HomTable) -> bool {
        let n = self.len();
        n == other.len()
            && (0..n).all(|i| (0..n).all(|j| self.sheaf(i, j) == other.sheaf(j, i)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_transpose_of(self)
    }
}

/// Label of a datum: its factors, or `ℰ^φ` at rank one.
pub fn datum_label(d: &ConnectionDatum) -> String {
    match d.factors() {
        [phi] => format!("E^{phi}"),
        fs => {
            let parts: Vec<String> = fs.iter().map(|f| format!("E^{f}")).collect();
            format!("[{}]", parts.join(" + "))
        }
    }
}

fn ray_hom(src: &StokesLocalSystem, tgt: &StokesLocalSystem) -> Result<usize> {
    let ray = Region::positive_real_ray();
    let mut total = 0;
    for a in src.factors() {
        for b in tgt.factors() {
            total += hom_constant(
                &IrregularConstant::new(a.clone(), ray.clone()),
                &IrregularConstant::new(b.clone(), ray.clone()),
            )?;
        }
    }
    Ok(total)
}

/// Pole order and a positive real coefficient, for factors `c/z^n` with `c > 0`.
fn real_pole(phi: &PuiseuxFactor) -> Option<(Q, Q)> {
    if phi.is_zero() {
        return Some((Q::zero(), Q::zero()));
    }
    match phi.terms() {
        [(order, c)] if c.im.is_zero() && c.re.is_positive() => Some((order.clone(), c.re.clone())),
        _ => None,
    }
}

/// Known connection-side hom dimensions for rank-one exponentials with
/// trivial formal monodromy.
fn catalog(d1: &ConnectionDatum, d2: &ConnectionDatum, locus: Locus) -> Option<usize> {
    let rank_one = |d: &ConnectionDatum| {
        (d.rank() == 1 && d.formal_monodromy().is_identity()).then(|| d.factors()[0].clone())
    };
    let (a, b) = (rank_one(d1)?, rank_one(d2)?);
    match locus {
        Locus::FullDisk => Some(usize::from(a == b)),
        Locus::PositiveRay => {
            let (ka, kb) = (real_pole(&a)?, real_pole(&b)?);
            Some(usize::from(ka >= kb))
        }
    }
}

pub fn hom_comparison(
    d1: &ConnectionDatum,
    d2: &ConnectionDatum,
    locus: Locus,
) -> Result<HomComparison> {
    let sheaf = match locus {
        Locus::FullDisk => {
            let h = hom_complex(&sol_lambda(d2)?, &sol_lambda(d1)?)?;
            h.get(&0).copied().unwrap_or(0)
        }
        Locus::PositiveRay => ray_hom(&d2.local_system()?, &d1.local_system()?)?,
    };
    Ok(HomComparison {
        source: 0,
        target: 1,
        sheaf,
        expected: catalog(d1, d2, locus),
    })
}

pub fn hom_comparison_table(
    data: &[ConnectionDatum],
    locus: Locus,
    exec: Execution,
) -> Result<HomTable> {
    let n = data.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let entries = par::map(exec, &pairs, |&(i, j)| {
        hom_comparison(&data[i], &data[j], locus).map(|c| HomComparison {
            source: i,
            target: j,
            ..c
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(HomTable {
        locus,
        labels: data.iter().map(datum_label).collect(),
        entries,
    })
}

/// `ℰ^0`, `ℰ^{1/z}`, `ℰ^{1/z²}`.
pub fn standard_catalog() -> Vec<ConnectionDatum> {
    [PuiseuxFactor::zero(), PuiseuxFactor::pole(1, 1), PuiseuxFactor::pole(2, 1)]
        .into_iter()
        .map(|phi| ConnectionDatum::exponential(phi).expect("catalog datum"))
        .collect()
}
