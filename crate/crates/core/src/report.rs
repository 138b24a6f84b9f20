//! Serializable verification records.
//!
//! Every record has a fixed field order and contains no maps or timestamps,
//! so a run with the same inputs and seed serializes to byte-identical
//! output.  Three renderings are provided: human-readable text, JSON, and
//! CSV (one row per listed item).

use serde::Serialize;

use crate::hlog::RankMethod;
use crate::verify::{HlogSummary, IdentityEvaluation, IdentitySetup};

/// Common rendering interface for all reports.
pub trait Render {
    fn to_text(&self) -> String;
    fn to_csv(&self) -> String;
    fn to_json(&self) -> String
    where
        Self: Serialize,
    {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// Counts of lines and conic classes on one surface.
#[derive(Clone, Debug, Serialize)]
pub struct EnumerationReport {
    pub r: usize,
    pub degree: i64,
    pub line_count: usize,
    pub conic_count: usize,
    pub fibers_per_conic: usize,
}

impl Render for EnumerationReport {
    fn to_text(&self) -> String {
        format!(
            "X_{}: degree {}, {} lines, {} conic classes, {} reducible fibers each\n",
            self.r, self.degree, self.line_count, self.conic_count, self.fibers_per_conic
        )
    }

    fn to_csv(&self) -> String {
        format!(
            "r,degree,lines,conics,fibers_per_conic\n{},{},{},{},{}\n",
            self.r, self.degree, self.line_count, self.conic_count, self.fibers_per_conic
        )
    }
}

// ---------------------------------------------------------------------------
// Census
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct TypeCountRecord {
    pub symbol: String,
    pub count: u64,
}

/// Census of curve classes grouped by degree-multiplicity type.
#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub r: usize,
    pub kind: String,
    pub total: u64,
    pub types: Vec<TypeCountRecord>,
}

impl Render for CensusReport {
    fn to_text(&self) -> String {
        let mut out = format!("{} on X_{} ({} total)\n", self.kind, self.r, self.total);
        for t in &self.types {
            out.push_str(&format!("  {:<16} {}\n", t.symbol, t.count));
        }
        out
    }

    fn to_csv(&self) -> String {
        let mut out = String::from("symbol,count\n");
        for t in &self.types {
            out.push_str(&format!("{},{}\n", t.symbol, t.count));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Exact relation verification
// ---------------------------------------------------------------------------

/// Outcome of the exact vanishing-sum and relation-space check.
#[derive(Clone, Debug, Serialize)]
pub struct HlogReport {
    pub r: usize,
    pub line_count: usize,
    pub conic_count: usize,
    pub support_keys: usize,
    pub sum_is_zero: bool,
    pub pair_structure: bool,
    pub graph_connected: bool,
    pub relation_space_dim: usize,
    pub method: String,
    pub verified: bool,
}

impl From<&HlogSummary> for HlogReport {
    fn from(s: &HlogSummary) -> Self {
        HlogReport {
            r: s.r,
            line_count: s.line_count,
            conic_count: s.conic_count,
            support_keys: s.support_keys,
            sum_is_zero: true,
            pair_structure: s.pair_structure,
            graph_connected: s.graph_connected,
            relation_space_dim: s.relation_space_dim,
            method: match s.method {
                RankMethod::ExactRational => "exact-rational".to_string(),
                RankMethod::GraphConnectivity => "graph-connectivity".to_string(),
            },
            verified: s.relation_space_dim == 1,
        }
    }
}

impl Render for HlogReport {
    fn to_text(&self) -> String {
        format!(
            "X_{}: {} lines, {} conic classes, {} support keys\n\
             sum of residue vectors: {}\n\
             pair structure: {}, coefficient graph connected: {}\n\
             relation space dimension: {} ({})\n\
             verified: {}\n",
            self.r,
            self.line_count,
            self.conic_count,
            self.support_keys,
            if self.sum_is_zero { "zero" } else { "NONZERO" },
            ok(self.pair_structure),
            ok(self.graph_connected),
            self.relation_space_dim,
            self.method,
            ok(self.verified),
        )
    }

    fn to_csv(&self) -> String {
        format!(
            "r,lines,conics,support_keys,sum_is_zero,pair_structure,graph_connected,relation_space_dim,method,verified\n\
             {},{},{},{},{},{},{},{},{},{}\n",
            self.r,
            self.line_count,
            self.conic_count,
            self.support_keys,
            self.sum_is_zero,
            self.pair_structure,
            self.graph_connected,
            self.relation_space_dim,
            self.method,
            self.verified,
        )
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

// ---------------------------------------------------------------------------
// Numeric identity verification
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct IdentityTermRecord {
    pub label: String,
    pub sign: i8,
    pub base_value: f64,
    pub target_value: [f64; 2],
    pub antisymmetrized: [f64; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityTargetRecord {
    /// Affine plane target `(x, y)` as `[[re, im], [re, im]]`.
    pub target: [[f64; 2]; 2],
    pub residual: f64,
    pub max_term: f64,
    pub terms: Vec<IdentityTermRecord>,
}

/// Outcome of the numeric identity verification on one surface.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub r: usize,
    pub weight: usize,
    pub model_count: usize,
    /// Exact base point, as rational strings.
    pub base: [String; 2],
    pub signs: Vec<i8>,
    pub tolerance: f64,
    pub max_residual: f64,
    pub verified: bool,
    pub evaluations: Vec<IdentityTargetRecord>,
}

impl IdentityReport {
    pub fn new(
        setup: &IdentitySetup,
        evaluations: &[IdentityEvaluation],
        tolerance: f64,
    ) -> Self {
        let max_residual = evaluations
            .iter()
            .map(|e| e.residual)
            .fold(0.0f64, f64::max);
        IdentityReport {
            r: setup.r,
            weight: setup.weight,
            model_count: setup.terms.len(),
            base: [setup.base.0.to_string(), setup.base.1.to_string()],
            signs: setup.terms.iter().map(|t| t.sign).collect(),
            tolerance,
            max_residual,
            verified: max_residual < tolerance,
            evaluations: evaluations
                .iter()
                .map(|e| IdentityTargetRecord {
                    target: [
                        [e.target.0.re, e.target.0.im],
                        [e.target.1.re, e.target.1.im],
                    ],
                    residual: e.residual,
                    max_term: e.max_term,
                    terms: e
                        .terms
                        .iter()
                        .map(|t| IdentityTermRecord {
                            label: t.label.clone(),
                            sign: t.sign,
                            base_value: t.base_value,
                            target_value: [t.target_value.re, t.target_value.im],
                            antisymmetrized: [t.ai.re, t.ai.im],
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

impl Render for IdentityReport {
    fn to_text(&self) -> String {
        let mut out = format!(
            "X_{} identity: {} models, weight {}, base ({}, {})\n\
             signs: {:?}\n",
            self.r, self.model_count, self.weight, self.base[0], self.base[1], self.signs,
        );
        for e in &self.evaluations {
            out.push_str(&format!(
                "  target ({:+.6}{:+.6}i, {:+.6}{:+.6}i): residual {:.3e} (largest term {:.3e})\n",
                e.target[0][0],
                e.target[0][1],
                e.target[1][0],
                e.target[1][1],
                e.residual,
                e.max_term,
            ));
        }
        out.push_str(&format!(
            "max residual {:.3e} against tolerance {:.1e}: {}\n",
            self.max_residual,
            self.tolerance,
            ok(self.verified),
        ));
        out
    }

    fn to_csv(&self) -> String {
        let mut out =
            String::from("target_x_re,target_x_im,target_y_re,target_y_im,residual,max_term\n");
        for e in &self.evaluations {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.target[0][0], e.target[0][1], e.target[1][0], e.target[1][1],
                e.residual, e.max_term,
            ));
        }
        out
    }
}
