//! Replay of the two commit programs against committed event logs.
//!
//! The logs pin the exact PUT and DELETE object names the rename-free
//! connector sends for the single-task job and for the three-task job with
//! a speculating third task. Any drift in the name grammar or the commit
//! order shows up as a diff here.

use std::fmt;
use std::path::{Path, PathBuf};

use ocbench_core::store::{RestOpKind, TraceEvent};

use crate::config::Config;
use crate::scenario::Scenario;
use crate::workload::{execute_cell, WorkloadKind};
use crate::HarnessError;

pub const SINGLE_TASK_FILE: &str = "single_task_stocator.txt";
pub const THREE_TASK_FILE: &str = "three_task_stocator.txt";

/// The speculation schedule: the third task keeps getting backup attempts
/// until the second backup, fastest of the three, commits.
pub const SPECULATION_PLAN: &str = "2:slow(8),slow(4),slow(6)";

/// Directory holding the committed logs.
pub fn default_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("golden")
}

/// Keep only mutations of objects under the dataset: the wire names both
/// programs are graded on. The driver's bookkeeping (dataset marker, probe
/// traffic) stays out, matching how the logs are written.
fn dataset_events(trace: &[TraceEvent], dataset: &str) -> Vec<String> {
    let prefix = format!("{dataset}/");
    trace
        .iter()
        .filter(|ev| {
            matches!(ev.kind, RestOpKind::PutObject | RestOpKind::DeleteObject)
                && ev.name.starts_with(&prefix)
        })
        .map(TraceEvent::render)
        .collect()
}

fn replay_config(plan: &str) -> Config {
    let mut cfg = Config::default();
    cfg.apply("faults.plan", plan).expect("literal plan parses");
    cfg.apply("faults.speculation_threshold", "2").unwrap();
    cfg
}

pub fn single_task_events() -> Result<Vec<String>, HarnessError> {
    let cfg = replay_config("");
    let report = execute_cell(Scenario::Stocator, WorkloadKind::SingleTask, &cfg)?;
    Ok(dataset_events(&report.trace, &cfg.dataset))
}

pub fn three_task_events() -> Result<Vec<String>, HarnessError> {
    let cfg = replay_config(SPECULATION_PLAN);
    let report = execute_cell(Scenario::Stocator, WorkloadKind::ThreeTask, &cfg)?;
    Ok(dataset_events(&report.trace, &cfg.dataset))
}

/// One program's replay next to its committed log.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldenCheck {
    pub file: String,
    pub expected: Vec<String>,
    pub actual: Vec<String>,
}

impl GoldenCheck {
    pub fn passed(&self) -> bool {
        self.expected == self.actual
    }
}

impl fmt::Display for GoldenCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "{}: ok ({} events)", self.file, self.actual.len());
        }
        writeln!(f, "{}: MISMATCH", self.file)?;
        let width = self.expected.len().max(self.actual.len());
        for i in 0..width {
            let want = self
                .expected
                .get(i)
                .map(String::as_str)
                .unwrap_or("<absent>");
            let got = self.actual.get(i).map(String::as_str).unwrap_or("<absent>");
            if want == got {
                writeln!(f, "  {want}")?;
            } else {
                writeln!(f, "- {want}")?;
                writeln!(f, "+ {got}")?;
            }
        }
        Ok(())
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    Ok(text.lines().map(str::to_string).collect())
}

type Replay = fn() -> Result<Vec<String>, HarnessError>;

/// Replay both programs and compare them to the logs in `dir`.
pub fn check_against(dir: &Path) -> Result<Vec<GoldenCheck>, HarnessError> {
    let programs: [(&str, Replay); 2] = [
        (SINGLE_TASK_FILE, single_task_events),
        (THREE_TASK_FILE, three_task_events),
    ];
    let mut checks = Vec::new();
    for (file, run) in programs {
        checks.push(GoldenCheck {
            file: file.to_string(),
            expected: read_lines(&dir.join(file))?,
            actual: run()?,
        });
    }
    Ok(checks)
}
