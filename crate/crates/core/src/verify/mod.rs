//! Curvature verifiers: needle concavity along sheet geodesics, contraction of
//! sets toward a point, the pointwise timelike displacement inequality, converse
//! detection over perturbation families and the singularity/splitting checks.
//!
//! Sample generation is sequential and seeded; evaluation may run in parallel
//! but results are collected in sample order, so reports do not depend on the
//! thread count.

mod applications;
mod cdcon;
mod contraction;
mod converse;
mod needle;
mod pointwise;
mod sampling;

pub use applications::{
    check_hawking, check_splitting_hypotheses, check_volume_singularity, HawkingConfig,
    SplittingConfig,
};
pub use cdcon::{classify_cdcon, rescale_fiber, CdconConfig};
pub use contraction::{verify_contraction, ContractionExperiment, Rect};
pub use converse::{converse_family, detect_converse_violation, FamilyMember};
pub use needle::{verify_needle_concavity, NeedleConfig, Sheet};
pub use pointwise::{verify_pointwise_tcd, CellMeasure, PointwiseConfig};
pub use sampling::latin_hypercube;

use crate::serde_ext::Ext;
use crate::warp::Signature;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const MAX_WITNESSES: usize = 10;
pub const NEEDLE_TOL: f64 = 1e-6;
pub const TRANSPORT_TOL: f64 = 2e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "CD")]
    Cd,
    #[serde(rename = "TCD")]
    Tcd,
    #[serde(rename = "needle-TCD")]
    NeedleTcd,
    #[serde(rename = "needle-CD")]
    NeedleCd,
    #[serde(rename = "MCP")]
    Mcp,
    #[serde(rename = "TMCP")]
    Tmcp,
    #[serde(rename = "density-concavity")]
    DensityConcavity,
    #[serde(rename = "warper")]
    Warper,
    #[serde(rename = "singularity")]
    Singularity,
    #[serde(rename = "splitting")]
    Splitting,
    #[serde(rename = "cdcon")]
    Cdcon,
    #[serde(rename = "converse")]
    Converse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Checked,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<f64>,
    pub signature: Signature,
}

/// One of the worst samples: a sheet geodesic and the parameter where its margin is smallest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub start: (f64, f64),
    pub end: (f64, f64),
    pub s: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub condition: Condition,
    /// The inequality being tested, in words.
    pub inequality: String,
    pub parameters: Parameters,
    pub status: Status,
    pub samples: usize,
    #[serde(with = "crate::serde_ext")]
    pub min_slack: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub witnesses: Vec<WitnessRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, Ext>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sub_reports: Vec<VerificationReport>,
    /// Wall-clock time, kept out of the serialized form so reports stay reproducible.
    #[serde(skip)]
    pub runtime_ms: u64,
}

impl VerificationReport {
    pub fn new(
        condition: Condition,
        inequality: &str,
        parameters: Parameters,
        tolerance: f64,
    ) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            condition,
            inequality: inequality.to_string(),
            parameters,
            status: Status::Checked,
            samples: 0,
            min_slack: f64::INFINITY,
            tolerance,
            passed: true,
            witnesses: vec![],
            diagnostics: BTreeMap::new(),
            notes: vec![],
            sub_reports: vec![],
            runtime_ms: 0,
        }
    }

    pub fn not_applicable(mut self, why: &str) -> Self {
        self.status = Status::NotApplicable;
        self.notes.push(why.to_string());
        self
    }

    /// Folds sample witnesses in: keeps the smallest slack and the ten worst records.
    pub fn absorb(&mut self, mut records: Vec<WitnessRecord>) {
        self.samples += records.len();
        records.append(&mut self.witnesses);
        records.sort_by(|a, b| a.slack.total_cmp(&b.slack));
        records.truncate(MAX_WITNESSES);
        if let Some(w) = records.first() {
            self.min_slack = self.min_slack.min(w.slack);
        }
        self.witnesses = records;
        self.settle();
    }

    pub fn absorb_slack(&mut self, slack: f64, samples: usize) {
        self.samples += samples;
        self.min_slack = self.min_slack.min(slack);
        self.settle();
    }

    /// Includes a sub-report; the parent passes only if every child does.
    pub fn push_sub(&mut self, sub: VerificationReport) {
        self.samples += sub.samples;
        self.min_slack = self.min_slack.min(sub.min_slack);
        self.sub_reports.push(sub);
        self.settle();
    }

    pub fn diag(&mut self, key: &str, value: f64) {
        self.diagnostics.insert(key.to_string(), Ext(value));
    }

    fn settle(&mut self) {
        self.passed =
            !(self.min_slack < -self.tolerance) && self.sub_reports.iter().all(|r| r.passed);
    }

    pub fn timed<F: FnOnce() -> crate::Result<Self>>(f: F) -> crate::Result<Self> {
        let start = std::time::Instant::now();
        let mut r = f()?;
        r.runtime_ms = start.elapsed().as_millis() as u64;
        Ok(r)
    }
}
