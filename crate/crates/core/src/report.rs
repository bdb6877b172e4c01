//! Serializable compliance reports and an SVG overlay of the result.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::iso::{GridExtent, MatchResult, SearchStats};
use crate::model::{Assignment, ObservedPlanogram, ProductId, ShelfGraph};
use crate::pipeline::{PipelineOutput, Timings};
use crate::verify::ComplianceIssue;

/// Matching output as written to disk; assignments are `[ref, obs, score]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResultFile {
    pub assignments: Vec<(String, String, f64)>,
    pub confidence: f64,
    pub missing_ref_nodes: BTreeSet<String>,
    pub localization: Option<GridExtent>,
    pub stats: SearchStats,
}

impl From<&MatchResult> for MatchResultFile {
    fn from(m: &MatchResult) -> Self {
        Self {
            assignments: triples(m.solution.assignments()),
            confidence: m.confidence(),
            missing_ref_nodes: m.missing_ref_nodes.clone(),
            localization: m.localization,
            stats: m.stats,
        }
    }
}

fn triples(a: &[Assignment]) -> Vec<(String, String, f64)> {
    a.iter().map(|a| (a.ref_node.clone(), a.obs_node.clone(), a.score)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedNodeEntry {
    pub node_id: String,
    pub product: ProductId,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedGraphFile {
    pub nodes: Vec<ObservedNodeEntry>,
    /// Each undirected edge once, as `[from, dir, to]` with `from < to`.
    pub edges: Vec<(String, String, String)>,
}

impl From<&ObservedPlanogram> for ObservedGraphFile {
    fn from(o: &ObservedPlanogram) -> Self {
        Self {
            nodes: o
                .nodes()
                .iter()
                .map(|n| {
                    let b = n.detection.bbox;
                    ObservedNodeEntry { node_id: n.node_id.clone(), product: n.detection.product.clone(), x: b.x, y: b.y, w: b.w, h: b.h }
                })
                .collect(),
            edges: o
                .edges()
                .into_iter()
                .filter(|e| e.from < e.to)
                .map(|e| (e.from, e.dir.to_string(), e.to))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub compliant: bool,
    pub reference_index: usize,
    pub confidence: f64,
    /// Final assignments, including those added by verification.
    pub assignments: Vec<(String, String, f64)>,
    /// Assignments added by verification.
    pub verified: Vec<(String, String, f64)>,
    pub issues: Vec<ComplianceIssue>,
    pub localization: Option<GridExtent>,
    pub stats: SearchStats,
    pub timings: Timings,
    pub observed: ObservedGraphFile,
}

impl From<&PipelineOutput> for ComplianceReport {
    fn from(out: &PipelineOutput) -> Self {
        let v = &out.verification;
        Self {
            compliant: v.issues.is_empty(),
            reference_index: out.reference_index,
            confidence: out.matched.confidence(),
            assignments: triples(v.solution.assignments()),
            verified: triples(&v.verified),
            issues: v.issues.clone(),
            localization: out.matched.localization,
            stats: out.matched.stats,
            timings: out.timings,
            observed: ObservedGraphFile::from(&v.observed),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Outline matched items in green and the expected places of compliance
/// issues in red, over an optional background image reference.
pub fn render_svg(out: &PipelineOutput, width: usize, height: usize, background: Option<&str>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    if let Some(href) = background {
        let _ = writeln!(s, r#"  <image xlink:href="{}" x="0" y="0" width="{width}" height="{height}"/>"#, escape(href));
    } else {
        let _ = writeln!(s, r##"  <rect x="0" y="0" width="{width}" height="{height}" fill="#808080"/>"##);
    }
    let v = &out.verification;
    for a in v.solution.assignments() {
        let Some(ix) = v.observed.index_of(&a.obs_node) else { continue };
        let b = v.observed.bbox(ix);
        let _ = writeln!(
            s,
            r#"  <rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="lime" stroke-width="2"><title>{} = {}</title></rect>"#,
            b.x,
            b.y,
            b.w,
            b.h,
            escape(&a.ref_node),
            escape(v.observed.product(ix).as_str())
        );
    }
    for issue in &v.issues {
        let Some(b) = issue.expected_roi else { continue };
        let _ = writeln!(
            s,
            r#"  <rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="red" stroke-width="2"><title>{}: {} ({})</title></rect>"#,
            b.x,
            b.y,
            b.w,
            b.h,
            escape(&issue.ref_node),
            escape(issue.expected_product.as_str()),
            issue.reason
        );
    }
    s.push_str("</svg>\n");
    s
}
