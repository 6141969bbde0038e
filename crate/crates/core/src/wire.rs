//! JSON encodings of the domain objects.
//!
//! Inputs only accept exact data: rationals are `[num, den]`, field scalars
//! `[re_num, re_den]` or `[re_num, re_den, im_num, im_den]`. Outputs are
//! `serde_json::Value`s in canonical form; integers outside `i64` are written
//! as decimal strings.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::barcode::{Barcode, Interval};
use crate::error::{Error, Result};
use crate::field::{FieldScalar, Q};
use crate::irregular::StokesLocalSystem;
use crate::linalg::Matrix;
use crate::novikov::NovikovScalar;
use crate::sector::{PuiseuxFactor, Region, SectorArc, SectorCover};

fn ratio(num: i64, den: i64) -> std::result::Result<Q, String> {
    if den == 0 {
        return Err("zero denominator".into());
    }
    Ok(Q::new(num.into(), den.into()))
}

/// `[num, den]`
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(try_from = "(i64, i64)")]
pub struct WireRat(pub Q);

impl TryFrom<(i64, i64)> for WireRat {
    type Error = String;
    fn try_from((n, d): (i64, i64)) -> std::result::Result<Self, String> {
        ratio(n, d).map(WireRat)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(try_from = "Vec<i64>")]
pub struct WireScalar(pub FieldScalar);

impl TryFrom<Vec<i64>> for WireScalar {
    type Error = String;
    fn try_from(v: Vec<i64>) -> std::result::Result<Self, String> {
        match v.as_slice() {
            [rn, rd] => Ok(WireScalar(FieldScalar::real(ratio(*rn, *rd)?))),
            [rn, rd, in_, id] => Ok(WireScalar(FieldScalar::new(ratio(*rn, *rd)?, ratio(*in_, *id)?))),
            _ => Err(format!("a scalar has 2 or 4 integers, got {}", v.len())),
        }
    }
}

/// `[start_num, start_den, end_num, end_den]` in turns.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(try_from = "(i64, i64, i64, i64)")]
pub struct WireArc(pub SectorArc);

impl TryFrom<(i64, i64, i64, i64)> for WireArc {
    type Error = String;
    fn try_from((a, b, c, d): (i64, i64, i64, i64)) -> std::result::Result<Self, String> {
        SectorArc::new(ratio(a, b)?, ratio(c, d)?)
            .map(WireArc)
            .map_err(|e| e.to_string())
    }
}

/// `[order_num, order_den, coeff]`: the term `coeff · z^{-order}`.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(try_from = "(i64, i64, WireScalar)")]
pub struct WireTerm(pub Q, pub FieldScalar);

impl TryFrom<(i64, i64, WireScalar)> for WireTerm {
    type Error = String;
    fn try_from((n, d, c): (i64, i64, WireScalar)) -> std::result::Result<Self, String> {
        Ok(WireTerm(ratio(n, d)?, c.0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WireFactor {
    #[serde(default = "one_u32")]
    pub ramification: u32,
    pub terms: Vec<WireTerm>,
}

fn one_u32() -> u32 {
    1
}

impl WireFactor {
    pub fn build(&self) -> Result<PuiseuxFactor> {
        PuiseuxFactor::new(
            self.ramification,
            self.terms.iter().map(|t| (t.0.clone(), t.1.clone())).collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum WireRegion {
    Arc(WireArc),
    Ray {
        angle: WireRat,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        truncated: Option<WireRat>,
    },
}

impl WireRegion {
    pub fn build(&self) -> Result<Region> {
        match self {
            WireRegion::Arc(a) => Ok(Region::Sector(a.0.clone())),
            WireRegion::Ray { angle, truncated } => {
                if let Some(b) = truncated {
                    if b.0 <= Q::zero() {
                        return Err(Error::InvalidInput("ray truncation must be positive".into()));
                    }
                }
                Ok(Region::Ray {
                    angle: angle.0.clone(),
                    truncated: truncated.as_ref().map(|b| b.0.clone()),
                })
            }
        }
    }
}

/// `[birth_num, birth_den, length_num, length_den]` or `[birth_num, birth_den, "inf"]`.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(try_from = "Vec<Value>")]
pub struct WireInterval(pub Interval);

impl TryFrom<Vec<Value>> for WireInterval {
    type Error = String;
    fn try_from(v: Vec<Value>) -> std::result::Result<Self, String> {
        let int = |x: &Value| x.as_i64().ok_or_else(|| format!("expected an integer, got {x}"));
        match v.as_slice() {
            [bn, bd, inf] if inf.as_str() == Some("inf") => {
                Ok(WireInterval(Interval::free(ratio(int(bn)?, int(bd)?)?)))
            }
            [bn, bd, ln, ld] => Interval::torsion(ratio(int(bn)?, int(bd)?)?, ratio(int(ln)?, int(ld)?)?)
                .map(WireInterval)
                .map_err(|e| e.to_string()),
            _ => Err("an interval is [bn, bd, ln, ld] or [bn, bd, \"inf\"]".into()),
        }
    }
}

pub type WireBarcode = Vec<WireInterval>;

pub fn build_barcode(w: &WireBarcode) -> Barcode {
    Barcode::new(w.iter().map(|i| i.0.clone()).collect())
}

/// Rows of scalars.
pub type WireMatrix = Vec<Vec<WireScalar>>;

pub fn build_matrix(rows: &WireMatrix, n: usize) -> Result<Matrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput(format!("expected a {n}x{n} matrix")));
    }
    Ok(if n == 0 {
        Matrix::zeros(0, 0)
    } else {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|s| s.0.clone()).collect()).collect())
    })
}

/// `[exponent_num, exponent_den, re_num, re_den, im_num, im_den]` records.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(try_from = "Vec<(i64, i64, i64, i64, i64, i64)>")]
pub struct WireNovikov(pub NovikovScalar);

impl TryFrom<Vec<(i64, i64, i64, i64, i64, i64)>> for WireNovikov {
    type Error = String;
    fn try_from(v: Vec<(i64, i64, i64, i64, i64, i64)>) -> std::result::Result<Self, String> {
        let terms = v
            .into_iter()
            .map(|(a, b, c, d, e, f)| Ok((ratio(a, b)?, FieldScalar::new(ratio(c, d)?, ratio(e, f)?))))
            .collect::<std::result::Result<Vec<_>, String>>()?;
        NovikovScalar::from_terms(terms)
            .map(WireNovikov)
            .map_err(|e| e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WireKind {
    JShriek,
    JStar,
    Skyscraper,
}

macro_rules! serialize_via_json {
    ($($ty:ty => $f:expr),* $(,)?) => {$(
        impl Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let to_json: fn(&$ty) -> Value = $f;
                to_json(self).serialize(s)
            }
        }
    )*};
}

serialize_via_json! {
    WireRat => |x| rat_json(&x.0),
    WireScalar => |x| scalar_json(&x.0),
    WireArc => |x| arc_json(&x.0),
    WireTerm => |x| {
        let [a, b] = rat_parts(&x.0);
        json!([a, b, scalar_json(&x.1)])
    },
    WireInterval => |x| interval_json(&x.0),
    WireNovikov => |x| novikov_json(&x.0),
}

// ---- output ----

pub fn int_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

pub fn rat_json(x: &Q) -> Value {
    json!([int_json(x.numer()), int_json(x.denom())])
}

fn rat_parts(x: &Q) -> [Value; 2] {
    [int_json(x.numer()), int_json(x.denom())]
}

pub fn scalar_json(c: &FieldScalar) -> Value {
    let [a, b] = rat_parts(&c.re);
    let [d, e] = rat_parts(&c.im);
    json!([a, b, d, e])
}

pub fn arc_json(a: &SectorArc) -> Value {
    let [s0, s1] = rat_parts(a.start());
    let [e0, e1] = rat_parts(a.end());
    json!([s0, s1, e0, e1])
}

pub fn factor_json(f: &PuiseuxFactor) -> Value {
    let terms: Vec<Value> = f
        .terms()
        .iter()
        .map(|(o, c)| {
            let [a, b] = rat_parts(o);
            json!([a, b, scalar_json(c)])
        })
        .collect();
    json!({"ramification": f.ramification(), "terms": terms})
}

pub fn region_json(r: &Region) -> Value {
    match r {
        Region::Sector(a) => json!({"arc": arc_json(a)}),
        Region::Ray { angle, truncated } => json!({"ray": {
            "angle": rat_json(angle),
            "truncated": truncated.as_ref().map(rat_json),
        }}),
    }
}

pub fn interval_json(i: &Interval) -> Value {
    let [a, b] = rat_parts(i.birth());
    match i.length() {
        None => json!([a, b, "inf"]),
        Some(l) => {
            let [c, d] = rat_parts(l);
            json!([a, b, c, d])
        }
    }
}

pub fn barcode_json(b: &Barcode) -> Value {
    Value::Array(b.intervals().iter().map(interval_json).collect())
}

pub fn matrix_json(m: &Matrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(scalar_json).collect()))
            .collect(),
    )
}

pub fn novikov_json(x: &NovikovScalar) -> Value {
    Value::Array(
        x.terms()
            .iter()
            .map(|(e, c)| {
                let [a, b] = rat_parts(e);
                let [p, q] = rat_parts(&c.re);
                let [r, s] = rat_parts(&c.im);
                json!([a, b, p, q, r, s])
            })
            .collect(),
    )
}

pub fn cover_json(c: &SectorCover) -> Value {
    Value::Array(c.arcs().iter().map(arc_json).collect())
}

pub fn system_json(l: &StokesLocalSystem) -> Value {
    json!({
        "cover": cover_json(l.cover()),
        "factors": l.factors().iter().map(factor_json).collect::<Vec<_>>(),
        "gluings": l.gluings().iter().map(matrix_json).collect::<Vec<_>>(),
    })
}
