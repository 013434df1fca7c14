//! Run reports.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::TaskSpec;

pub const TOOL_VERSION: &str = concat!("anosov ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Certified,
    Refuted,
    Inconclusive,
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn is_success(self) -> bool {
        matches!(self, Status::Certified | Status::Pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<String>,
    pub task: String,
    pub spec: TaskSpec,
    /// Seed derived for this task from the run seed.
    pub seed: u64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A stated outcome compared against the computed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub tasks: usize,
    pub certified: usize,
    pub refuted: usize,
    pub inconclusive: usize,
    pub pass: usize,
    pub fail: usize,
    pub error: usize,
    pub checks_failed: usize,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub task_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub config: Value,
    pub results: Vec<TaskResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    pub summary: Summary,
    pub timings: Timings,
}

impl Report {
    pub fn new(config: Value, results: Vec<TaskResult>, checks: Vec<Check>, timings: Timings) -> Report {
        let mut summary = Summary {
            tasks: results.len(),
            ..Summary::default()
        };
        for r in &results {
            match r.status {
                Status::Certified => summary.certified += 1,
                Status::Refuted => summary.refuted += 1,
                Status::Inconclusive => summary.inconclusive += 1,
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Error => summary.error += 1,
            }
        }
        summary.checks_failed = checks.iter().filter(|c| !c.pass).count();
        // With stated outcomes present, those decide; a refutation may be the expected result.
        let ok = if checks.is_empty() {
            results.iter().all(|r| r.status.is_success())
        } else {
            summary.checks_failed == 0
        };
        summary.exit_code = if ok { 0 } else { 1 };
        Report {
            tool_version: TOOL_VERSION.to_string(),
            config,
            results,
            checks,
            summary,
            timings,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }

    /// The report without wall-clock timings; identical across re-runs.
    pub fn payload(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Value::Object(m) = &mut v {
            m.remove("timings");
        }
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Short human-readable listing.
    pub fn render(&self) -> String {
        let mut out = format!("{}\n", self.tool_version);
        for r in &self.results {
            let label = match &r.block {
                Some(b) => format!("{b}/{}", r.task),
                None => r.task.clone(),
            };
            let status = serde_json::to_value(r.status).expect("status serializes");
            let mut line = format!("[{:>2}] {:<32} {}", r.index, label, status.as_str().unwrap_or("?"));
            if let Some(e) = &r.error {
                line.push_str(&format!("  ({e})"));
            }
            out.push_str(&line);
            out.push('\n');
        }
        for c in &self.checks {
            out.push_str(&format!(
                "check {:<40} {}  expected {}, observed {}\n",
                c.name,
                if c.pass { "PASS" } else { "FAIL" },
                c.expected,
                c.observed
            ));
        }
        let s = &self.summary;
        out.push_str(&format!(
            "tasks {}: certified {}, refuted {}, inconclusive {}, pass {}, fail {}, error {}; exit {}\n",
            s.tasks, s.certified, s.refuted, s.inconclusive, s.pass, s.fail, s.error, s.exit_code
        ));
        out
    }
}
