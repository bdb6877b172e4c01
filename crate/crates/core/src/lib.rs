//! Planogram compliance checking.
//!
//! Detections from an unconstrained product recognizer are turned into an
//! observed shelf graph ([`builder`]), matched against the planned layout by
//! a heuristic sub-graph isomorphism search ([`iso`]), and the facings left
//! unmatched are looked for where their matched neighbors predict them
//! ([`verify`]). Whatever is still missing is reported as a compliance issue.
//!
//! ```
//! use planogram_core::prelude::*;
//!
//! let planogram = sim::gen_planogram(3, 4, 10, 7).unwrap();
//! let truth = sim::gen_scene(&planogram, 60.0, 80.0, 0.0, 7).unwrap();
//! let detections = sim::corrupt(&truth, &NoiseParams { miss_rate: 0.2, seed: 7, ..Default::default() }).unwrap();
//!
//! let matcher = OracleMatcher::from_scene(&truth);
//! let out = run_pipeline(&[planogram], &detections, &matcher, &PipelineParams::default()).unwrap();
//! assert!(out.verification.issues.is_empty());
//! assert_eq!(out.verification.solution.len(), 12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x >= 0.0)` also rejects NaN

pub mod builder;
pub mod eval;
pub mod image;
pub mod io;
pub mod iso;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod sim;
pub mod verify;

pub use model::*;

pub mod prelude {
    pub use crate::builder::{build_observed, BuilderParams};
    pub use crate::eval::{match_detections, EvalResult, Stage};
    pub use crate::iso::{solve, solve_multi, MatchResult, SolverParams};
    pub use crate::model::*;
    pub use crate::pipeline::{run_pipeline, PipelineOutput, PipelineParams};
    pub use crate::sim::{self, NoiseParams};
    pub use crate::verify::{verify_all, ComplianceIssue, IssueReason, Matcher, OracleMatcher, VerifyParams, ZnccMatcher};
}
