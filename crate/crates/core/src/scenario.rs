//! Scenario files and reports.
//!
//! A scenario declares named objects (factors, regions, covers, barcodes,
//! Novikov scalars, Stokes local systems, complexes, connection data) and a
//! list of commands referring to them by name. Commands run independently: a
//! failing command is reported and the others still run.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::barcode::{hom_reduced, tensor, Barcode};
use crate::certified::max_precision_bits;
use crate::complex::{
    classical_image, classical_is_perverse, hom_complex, is_perverse, recollement, support_profile,
    truncate, verdier_dual, CurveComplex, Perversity, Summand, TruncationSide,
};
use crate::diagram::emit_stokes_diagram;
use crate::error::{Error, Result};
use crate::irregular::{
    dual_constant, ext_global, hom_constant, point_in_region, sheafhom_constant, stalk,
    tensor_constant, IrregularConstant, StokesLocalSystem,
};
use crate::linalg::Matrix;
use crate::novikov::NovikovScalar;
use crate::oracle::{oracle_dominance, OracleGrid, OracleVerdict};
use crate::par::{self, Execution};
use crate::rh::{hom_comparison_table, sol_lambda, ConnectionDatum, HomTable, Locus};
use crate::sector::{dominance, standard_cover, PuiseuxFactor, SectorCover};
use crate::wire::{
    barcode_json, build_barcode, build_matrix, factor_json, int_json, matrix_json, novikov_json,
    rat_json, region_json, system_json, WireArc, WireBarcode, WireFactor, WireKind, WireMatrix,
    WireNovikov, WireRegion, WireScalar,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "novistoke";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct SchemaVersion(u32);

impl TryFrom<u32> for SchemaVersion {
    type Error = String;
    fn try_from(v: u32) -> std::result::Result<Self, String> {
        if v == SCHEMA_VERSION {
            Ok(SchemaVersion(v))
        } else {
            Err(format!("unsupported schema version {v}, expected {SCHEMA_VERSION}"))
        }
    }
}

impl From<SchemaVersion> for u32 {
    fn from(v: SchemaVersion) -> u32 {
        v.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WireSystem {
    pub factors: Vec<String>,
    /// Standard cover of the factors when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<String>,
    /// Identity gluings when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gluings: Option<Vec<WireMatrix>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WireSummand {
    pub degree: i64,
    pub kind: WireKind,
    /// A system for `J_SHRIEK` / `J_STAR`, a barcode for `SKYSCRAPER`.
    pub payload: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WireConnection {
    pub factors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formal_monodromy: Option<WireMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stokes: Option<Vec<WireMatrix>>,
}

/// `Λ^φ` on a region.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConstRef {
    pub factor: String,
    pub region: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WireSide {
    LeZero,
    GeOne,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(tag = "op", content = "args", rename_all = "snake_case", deny_unknown_fields)]
pub enum Call {
    HomConstant { source: ConstRef, target: ConstRef },
    Tensor { a: ConstRef, b: ConstRef },
    SheafHom { a: ConstRef, b: ConstRef },
    DualConstant { constant: ConstRef },
    Stalk { constant: ConstRef, point: WireScalar },
    Dominance { factor: String, region: String },
    Stokes { factors: Vec<String> },
    Oracle {
        factor: String,
        region: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<usize>,
    },
    NovikovProduct { a: String, b: String },
    BarcodeTensor { a: String, b: String },
    BarcodeDual { barcode: String },
    BarcodeHom { source: String, target: String },
    HomGlobal { source: String, target: String },
    Cohomology { system: String },
    Forget { system: String },
    Dual { complex: String },
    Perverse { complex: String },
    Truncate { complex: String, side: WireSide },
    HomComplex { source: String, target: String },
    Recollement { complex: String },
    Sol { connection: String },
    RhTable { connections: Vec<String>, locus: Locus },
}

/// Command groups addressed by the CLI subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Hom,
    Tensor,
    Dual,
    Perverse,
    Stokes,
    RhTable,
    Oracle,
}

impl Call {
    pub fn op(&self) -> &'static str {
        match self {
            Call::HomConstant { .. } => "hom_constant",
            Call::Tensor { .. } => "tensor",
            Call::SheafHom { .. } => "sheaf_hom",
            Call::DualConstant { .. } => "dual_constant",
            Call::Stalk { .. } => "stalk",
            Call::Dominance { .. } => "dominance",
            Call::Stokes { .. } => "stokes",
            Call::Oracle { .. } => "oracle",
            Call::NovikovProduct { .. } => "novikov_product",
            Call::BarcodeTensor { .. } => "barcode_tensor",
            Call::BarcodeDual { .. } => "barcode_dual",
            Call::BarcodeHom { .. } => "barcode_hom",
            Call::HomGlobal { .. } => "hom_global",
            Call::Cohomology { .. } => "cohomology",
            Call::Forget { .. } => "forget",
            Call::Dual { .. } => "dual",
            Call::Perverse { .. } => "perverse",
            Call::Truncate { .. } => "truncate",
            Call::HomComplex { .. } => "hom_complex",
            Call::Recollement { .. } => "recollement",
            Call::Sol { .. } => "sol",
            Call::RhTable { .. } => "rh_table",
        }
    }

    pub fn family(&self) -> Option<Family> {
        Some(match self {
            Call::HomConstant { .. }
            | Call::HomGlobal { .. }
            | Call::HomComplex { .. }
            | Call::BarcodeHom { .. } => Family::Hom,
            Call::Tensor { .. }
            | Call::SheafHom { .. }
            | Call::BarcodeTensor { .. }
            | Call::NovikovProduct { .. } => Family::Tensor,
            Call::DualConstant { .. } | Call::Dual { .. } | Call::BarcodeDual { .. } => Family::Dual,
            Call::Perverse { .. } | Call::Truncate { .. } | Call::Recollement { .. } => {
                Family::Perverse
            }
            Call::Stokes { .. } | Call::Dominance { .. } => Family::Stokes,
            Call::RhTable { .. } | Call::Sol { .. } => Family::RhTable,
            Call::Oracle { .. } => Family::Oracle,
            Call::Stalk { .. } | Call::Cohomology { .. } | Call::Forget { .. } => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize, Serialize)]
pub struct Command {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(flatten)]
    pub call: Call,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: SchemaVersion,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub factors: BTreeMap<String, WireFactor>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub regions: BTreeMap<String, WireRegion>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub covers: BTreeMap<String, Vec<WireArc>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub barcodes: BTreeMap<String, WireBarcode>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub novikov: BTreeMap<String, WireNovikov>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub systems: BTreeMap<String, WireSystem>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub complexes: BTreeMap<String, Vec<WireSummand>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub connections: BTreeMap<String, WireConnection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub commands: Vec<Command>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Canonical JSON text: reduced rationals, sorted declarations, two-space indent.
    pub fn canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }

    /// `sha256:` of the canonical text.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }

    fn factor(&self, name: &str) -> Result<PuiseuxFactor> {
        lookup(&self.factors, "factor", name)?.build()
    }

    fn constant(&self, c: &ConstRef) -> Result<IrregularConstant> {
        Ok(IrregularConstant::new(
            self.factor(&c.factor)?,
            lookup(&self.regions, "region", &c.region)?.build()?,
        ))
    }

    fn barcode(&self, name: &str) -> Result<Barcode> {
        Ok(build_barcode(lookup(&self.barcodes, "barcode", name)?))
    }

    fn cover(&self, name: &str) -> Result<SectorCover> {
        let arcs = lookup(&self.covers, "cover", name)?;
        SectorCover::new(arcs.iter().map(|a| a.0.clone()).collect())
    }

    fn system(&self, name: &str) -> Result<StokesLocalSystem> {
        let w = lookup(&self.systems, "system", name)?;
        let factors = w
            .factors
            .iter()
            .map(|f| self.factor(f))
            .collect::<Result<Vec<_>>>()?;
        let cover = match &w.cover {
            Some(c) => self.cover(c)?,
            None => standard_cover(&factors)?,
        };
        let n = factors.len();
        let gluings = match &w.gluings {
            Some(gs) => gs.iter().map(|g| build_matrix(g, n)).collect::<Result<Vec<_>>>()?,
            None => vec![Matrix::identity(n); cover.len()],
        };
        StokesLocalSystem::new(cover, factors, gluings)
    }

    fn complex(&self, name: &str) -> Result<CurveComplex> {
        let w = lookup(&self.complexes, "complex", name)?;
        let summands = w
            .iter()
            .map(|s| {
                Ok(match s.kind {
                    WireKind::JShriek => Summand::JShriek {
                        degree: s.degree,
                        system: self.system(&s.payload)?,
                    },
                    WireKind::JStar => Summand::JStar {
                        degree: s.degree,
                        system: self.system(&s.payload)?,
                    },
                    WireKind::Skyscraper => Summand::Skyscraper {
                        degree: s.degree,
                        barcode: self.barcode(&s.payload)?,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CurveComplex::new(summands))
    }

    fn connection(&self, name: &str) -> Result<ConnectionDatum> {
        let w = lookup(&self.connections, "connection", name)?;
        let factors = w
            .factors
            .iter()
            .map(|f| self.factor(f))
            .collect::<Result<Vec<_>>>()?;
        let n = factors.len();
        let monodromy = match &w.formal_monodromy {
            Some(m) => build_matrix(m, n)?,
            None => Matrix::identity(n),
        };
        match &w.stokes {
            Some(ss) => {
                let ss = ss.iter().map(|s| build_matrix(s, n)).collect::<Result<Vec<_>>>()?;
                ConnectionDatum::new(factors, monodromy, ss)
            }
            None => {
                let split = ConnectionDatum::split(factors.clone())?;
                ConnectionDatum::new(factors, monodromy, split.stokes_matrices().to_vec())
            }
        }
    }
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, what: &str, name: &str) -> Result<&'a T> {
    map.get(name)
        .ok_or_else(|| Error::Reference(format!("{what} `{name}` is not declared")))
}

/// A command result: JSON value and a human-readable rendering.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub value: Value,
    pub text: String,
}

impl Output {
    fn plain(value: Value) -> Self {
        let text = value.to_string();
        Self { value, text }
    }
}

pub fn complex_json(c: &CurveComplex) -> Value {
    Value::Array(
        c.summands()
            .iter()
            .map(|s| {
                let payload = match s {
                    Summand::JShriek { system, .. } | Summand::JStar { system, .. } => system_json(system),
                    Summand::Skyscraper { barcode, .. } => barcode_json(barcode),
                };
                json!({"degree": s.degree(), "kind": s.kind().as_str(), "payload": payload})
            })
            .collect(),
    )
}

fn constant_json(c: &IrregularConstant) -> Value {
    json!({"factor": factor_json(c.factor()), "region": region_json(c.region())})
}

fn degree_table(m: &BTreeMap<i64, usize>) -> Value {
    Value::Object(m.iter().map(|(k, v)| (k.to_string(), json!(v))).collect())
}

fn table_text(t: &HomTable) -> String {
    let n = t.len();
    let mut cells: Vec<Vec<String>> = Vec::with_capacity(n + 1);
    let mut head = vec!["Hom(row, col)".to_string()];
    head.extend(t.labels.iter().cloned());
    cells.push(head);
    for i in 0..n {
        let mut row = vec![t.labels[i].clone()];
        for j in 0..n {
            let e = &t.entries[i * n + j];
            let mark = if e.agrees() { "" } else { "!" };
            row.push(format!("{}{mark}", e.sheaf));
        }
        cells.push(row);
    }
    let widths: Vec<usize> = (0..=n)
        .map(|c| cells.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = format!("locus {}\n", t.locus.as_str());
    for r in &cells {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn execute(sc: &Scenario, call: &Call) -> Result<Output> {
    Ok(match call {
        Call::HomConstant { source, target } => {
            let d = hom_constant(&sc.constant(source)?, &sc.constant(target)?)?;
            Output::plain(json!({"dimension": d}))
        }
        Call::Tensor { a, b } => {
            Output::plain(constant_json(&tensor_constant(&sc.constant(a)?, &sc.constant(b)?)?))
        }
        Call::SheafHom { a, b } => {
            Output::plain(constant_json(&sheafhom_constant(&sc.constant(a)?, &sc.constant(b)?)?))
        }
        Call::DualConstant { constant } => {
            let (d, shift) = dual_constant(&sc.constant(constant)?);
            let mut v = constant_json(&d);
            v["shift"] = json!(shift);
            Output::plain(v)
        }
        Call::Stalk { constant, point } => {
            let c = sc.constant(constant)?;
            if !point_in_region(&point.0, c.region())? {
                return Err(Error::OutsideSector(format!("{} is not in {}", point.0, c.region())));
            }
            Output::plain(json!({"barcode": barcode_json(&stalk(&c, &point.0)?)}))
        }
        Call::Dominance { factor, region } => {
            let r = lookup(&sc.regions, "region", region)?.build()?;
            let v = dominance(&sc.factor(factor)?, &r)?;
            Output::plain(json!({"verdict": v.as_str()}))
        }
        Call::Stokes { factors } => {
            let fs = factors.iter().map(|f| sc.factor(f)).collect::<Result<Vec<_>>>()?;
            let d = emit_stokes_diagram(&fs)?;
            Output {
                value: d.to_json(),
                text: d.to_text(),
            }
        }
        Call::Oracle {
            factor,
            region,
            samples,
        } => {
            let phi = sc.factor(factor)?;
            let r = lookup(&sc.regions, "region", region)?.build()?;
            let grid = OracleGrid {
                theta_samples: samples.unwrap_or(OracleGrid::default().theta_samples),
            };
            if grid.theta_samples == 0 {
                return Err(Error::InvalidInput("oracle needs at least one sample".into()));
            }
            let exact = dominance(&phi, &r)?;
            let (sampled, agree) = match oracle_dominance(&phi, &r, grid) {
                OracleVerdict::Clear(v) => (v.as_str(), Value::Bool(v == exact)),
                OracleVerdict::Ambiguous => ("AMBIGUOUS", Value::Null),
            };
            Output::plain(json!({"exact": exact.as_str(), "oracle": sampled, "agree": agree}))
        }
        Call::NovikovProduct { a, b } => {
            let x = &lookup(&sc.novikov, "novikov scalar", a)?.0;
            let y = &lookup(&sc.novikov, "novikov scalar", b)?.0;
            let p: NovikovScalar = x * y;
            Output::plain(json!({
                "product": novikov_json(&p),
                "valuation": p.valuation().as_ref().map(rat_json),
            }))
        }
        Call::BarcodeTensor { a, b } => {
            Output::plain(json!({"barcode": barcode_json(&tensor(&sc.barcode(a)?, &sc.barcode(b)?))}))
        }
        Call::BarcodeDual { barcode } => {
            let (free, tors) = sc.barcode(barcode)?.dual();
            Output::plain(json!({"free": barcode_json(&free), "torsion": barcode_json(&tors)}))
        }
        Call::BarcodeHom { source, target } => {
            let tags = hom_reduced(&sc.barcode(source)?, &sc.barcode(target)?);
            Output::plain(json!({
                "reduced_dimension": tags.len(),
                "pairs": serde_json::to_value(&tags).expect("tags serialize"),
            }))
        }
        Call::HomGlobal { source, target } => {
            let e = ext_global(&sc.system(source)?, &sc.system(target)?)?;
            Output::plain(json!({"dimension": e.ext0, "ext1": e.ext1}))
        }
        Call::Cohomology { system } => {
            let (h0, h1) = sc.system(system)?.cohomology()?;
            Output::plain(json!({"h0": h0, "h1": h1}))
        }
        Call::Forget { system } => {
            let l = sc.system(system)?.forget();
            Output::plain(json!({"rank": l.rank(), "monodromy": matrix_json(&l.monodromy)}))
        }
        Call::Dual { complex } => Output::plain(complex_json(&verdier_dual(&sc.complex(complex)?))),
        Call::Perverse { complex } => {
            let c = sc.complex(complex)?;
            let (perverse, witness) = match is_perverse(&c)? {
                Perversity::Yes => (true, None),
                Perversity::No { witness } => (false, Some(witness)),
            };
            let support = support_profile(&c)?;
            Output::plain(json!({
                "perverse": perverse,
                "witness": witness,
                "support": Value::Object(support.dims.iter().map(|(k, v)| (k.to_string(), json!(v))).collect()),
                "classical": classical_is_perverse(&classical_image(&c)),
            }))
        }
        Call::Truncate { complex, side } => {
            let side = match side {
                WireSide::LeZero => TruncationSide::LeZero,
                WireSide::GeOne => TruncationSide::GeOne,
            };
            Output::plain(complex_json(&truncate(&sc.complex(complex)?, side)))
        }
        Call::HomComplex { source, target } => {
            let h = hom_complex(&sc.complex(source)?, &sc.complex(target)?)?;
            Output::plain(json!({"dimensions": degree_table(&h)}))
        }
        Call::Recollement { complex } => {
            let r = recollement(&sc.complex(complex)?)?;
            Output::plain(json!({"open": complex_json(&r.open), "closed": complex_json(&r.closed)}))
        }
        Call::Sol { connection } => Output::plain(complex_json(&sol_lambda(&sc.connection(connection)?)?)),
        Call::RhTable { connections, locus } => {
            let data = connections
                .iter()
                .map(|c| sc.connection(c))
                .collect::<Result<Vec<_>>>()?;
            let t = hom_comparison_table(&data, *locus, Execution::Sequential)?;
            Output {
                value: serde_json::to_value(&t).expect("table serializes"),
                text: table_text(&t),
            }
        }
    })
}

#[derive(Clone, Debug)]
pub struct CommandResult {
    pub index: usize,
    pub id: String,
    pub op: &'static str,
    pub outcome: Result<Output>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub scenario_hash: String,
    pub max_precision_bits: u32,
    pub results: Vec<CommandResult>,
}

/// Runs the commands (all of them, or one family) in order of appearance.
pub fn run_scenario(sc: &Scenario, family: Option<Family>, exec: Execution) -> Report {
    let selected: Vec<(usize, &Command)> = sc
        .commands
        .iter()
        .enumerate()
        .filter(|(_, c)| family.is_none() || c.call.family() == family)
        .collect();
    let results = par::map(exec, &selected, |(i, c)| CommandResult {
        index: *i,
        id: c.id.clone().unwrap_or_else(|| format!("#{i}")),
        op: c.call.op(),
        outcome: execute(sc, &c.call),
    });
    Report {
        scenario_hash: sc.hash(),
        max_precision_bits: max_precision_bits(),
        results,
    }
}

impl Report {
    /// 0 when every command succeeded, 2 if any failed on a reference, else 1.
    pub fn exit_code(&self) -> i32 {
        self.results
            .iter()
            .filter_map(|r| r.outcome.as_ref().err().map(Error::exit_code))
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        let results: Vec<Value> = self
            .results
            .iter()
            .map(|r| {
                let mut v = json!({"index": r.index, "id": r.id, "op": r.op});
                match &r.outcome {
                    Ok(o) => {
                        v["status"] = json!("ok");
                        v["value"] = o.value.clone();
                    }
                    Err(e) => {
                        v["status"] = json!("error");
                        v["error"] = json!({"code": e.code(), "message": e.to_string()});
                    }
                }
                v
            })
            .collect();
        let doc = json!({
            "tool": TOOL_NAME,
            "version": TOOL_VERSION,
            "report_schema": REPORT_SCHEMA_VERSION,
            "scenario_hash": self.scenario_hash,
            "max_precision_bits": int_json(&self.max_precision_bits.into()),
            "results": results,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{TOOL_NAME} {TOOL_VERSION}\nscenario {}\nprecision cap {} bits\n",
            self.scenario_hash, self.max_precision_bits
        );
        for r in &self.results {
            match &r.outcome {
                Ok(o) if o.text.contains('\n') => {
                    out.push_str(&format!("[ok] {} {}\n", r.id, r.op));
                    for line in o.text.lines() {
                        out.push_str(&format!("    {line}\n"));
                    }
                }
                Ok(o) => out.push_str(&format!("[ok] {} {}: {}\n", r.id, r.op, o.text)),
                Err(e) => out.push_str(&format!("[{}] {} {}: {}\n", e.code(), r.id, r.op, e)),
            }
        }
        out
    }
}
