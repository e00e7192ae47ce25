use crate::config::SessionConfig;
use acris_core::dieudonne::{InstanceReport, TheoremReport};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
}

/// The JSON document written by `verify`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub config: SessionConfig,
    pub summary: Summary,
    pub instances: Vec<InstanceReport>,
}

impl Report {
    /// The output path is dropped from the echoed config so reports do not depend on where they are written.
    pub fn new(mut config: SessionConfig, t: TheoremReport) -> Self {
        config.out = None;
        let summary = Summary { instances: t.instances.len(), passed: t.passed, failed: t.failed, pass: t.pass };
        Report { config, summary, instances: t.instances }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
