//! Stokes diagrams: the Stokes directions of a factor set and, on each arc
//! between consecutive directions, which factor dominates which.

use serde_json::{json, Value};

use crate::error::Result;
use crate::field::{fmt_q, Q};
use crate::sector::{all_directions, dominance, DominanceVerdict, PuiseuxFactor, Region, SectorArc};
use crate::wire::{arc_json, factor_json, rat_json};
use num_traits::One;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramDirection {
    pub angle: Q,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagramArc {
    pub arc: SectorArc,
    /// One sign per factor pair `(i, j)`, `i < j`, for `Re(φ_i - φ_j)`.
    pub signs: Vec<char>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StokesDiagram {
    /// Distinct factors in input order.
    pub factors: Vec<PuiseuxFactor>,
    pub directions: Vec<DiagramDirection>,
    pub arcs: Vec<DiagramArc>,
}

fn sign_char(v: DominanceVerdict) -> char {
    match v {
        DominanceVerdict::PosDivergent => '+',
        DominanceVerdict::NegDivergent => '-',
        DominanceVerdict::Bounded | DominanceVerdict::Zero => '0',
    }
}

pub fn emit_stokes_diagram(factors: &[PuiseuxFactor]) -> Result<StokesDiagram> {
    let mut distinct: Vec<PuiseuxFactor> = Vec::new();
    for f in factors {
        if !distinct.contains(f) {
            distinct.push(f.clone());
        }
    }
    let dirs = all_directions(&distinct)?;
    let mut arcs = Vec::new();
    for (k, d) in dirs.iter().enumerate() {
        let (start, end) = match dirs.get(k + 1) {
            Some(next) => (d.hi.clone(), next.lo.clone()),
            None => (d.hi.clone(), &dirs[0].lo + Q::one()),
        };
        let arc = SectorArc::new(start, end)?;
        let region = Region::Sector(arc.clone());
        let mut signs = Vec::new();
        for i in 0..distinct.len() {
            for j in (i + 1)..distinct.len() {
                signs.push(sign_char(dominance(&(&distinct[i] - &distinct[j]), &region)?));
            }
        }
        arcs.push(DiagramArc { arc, signs });
    }
    Ok(StokesDiagram {
        factors: distinct,
        directions: dirs
            .iter()
            .map(|d| DiagramDirection {
                angle: d.representative(),
                exact: d.exact.is_some(),
            })
            .collect(),
        arcs,
    })
}

impl StokesDiagram {
    fn pair_labels(&self) -> Vec<String> {
        let n = self.factors.len();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| format!("{} vs {}", self.factors[i], self.factors[j]))
            .collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "factors": self.factors.iter().map(factor_json).collect::<Vec<_>>(),
            "pairs": self.pair_labels(),
            "directions": self.directions.iter().map(|d| json!({
                "angle": rat_json(&d.angle),
                "exact": d.exact,
            })).collect::<Vec<_>>(),
            "arcs": self.arcs.iter().map(|a| json!({
                "arc": arc_json(&a.arc),
                "signs": a.signs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    }

    /// Aligned text table: directions first, then one row per arc.
    pub fn to_text(&self) -> String {
        let mut out = String::from("directions (turns)\n");
        if self.directions.is_empty() {
            out.push_str("  none\n");
        }
        for (k, d) in self.directions.iter().enumerate() {
            let mark = if d.exact { "" } else { " ~" };
            out.push_str(&format!("  {k:>3}  {}{mark}\n", fmt_q(&d.angle)));
        }
        if self.arcs.is_empty() {
            return out;
        }
        let labels = self.pair_labels();
        let arc_strs: Vec<String> = self.arcs.iter().map(|a| a.arc.to_string()).collect();
        let w0 = arc_strs.iter().map(|s| s.chars().count()).max().unwrap_or(0).max(3);
        out.push_str(&format!("{:<w0$}", "arc"));
        for l in &labels {
            out.push_str(&format!("  {l}"));
        }
        out.push('\n');
        for (a, s) in self.arcs.iter().zip(&arc_strs) {
            let mut line = format!("{s:<w0$}");
            for (c, l) in a.signs.iter().zip(&labels) {
                line.push_str(&format!("  {:<w$}", c, w = l.chars().count()));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}
