//! Cross-product execution of scenarios and workloads.

use serde::{Deserialize, Serialize};

use ocbench_core::store::TraceEvent;

use crate::config::Config;
use crate::pricing::compute_cost;
use crate::report::ReportRow;
use crate::scenario::Scenario;
use crate::workload::{execute_cell, WorkloadKind};
use crate::HarnessError;

/// Metered store events of one cell run.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTrace {
    pub scenario: Scenario,
    pub workload: WorkloadKind,
    pub repeat: usize,
    pub events: Vec<TraceEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOutcome {
    pub rows: Vec<ReportRow>,
    pub traces: Vec<CellTrace>,
}

/// Run one cell: execute, price the tally, and shape the report row.
pub fn run_cell(
    scenario: Scenario,
    workload: WorkloadKind,
    cfg: &Config,
) -> Result<(ReportRow, Vec<TraceEvent>), HarnessError> {
    let mut report = execute_cell(scenario, workload, cfg)?;
    report.cost = compute_cost(&report.tally, &cfg.pricing());
    let row = ReportRow::new(scenario.name(), workload.name(), &report);
    Ok((row, report.trace))
}

/// Workload-major sweep. Every (cell, repeat) runs against its own store,
/// so results do not depend on execution order.
pub fn run_matrix(cfg: &Config) -> Result<MatrixOutcome, HarnessError> {
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for &workload in &cfg.workloads {
        for &scenario in &cfg.scenarios {
            for repeat in 0..cfg.repeats {
                let (row, events) = run_cell(scenario, workload, cfg)?;
                rows.push(row);
                traces.push(CellTrace {
                    scenario,
                    workload,
                    repeat,
                    events,
                });
            }
        }
    }
    Ok(MatrixOutcome { rows, traces })
}

/// One store event tagged with its cell, as emitted in trace output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub scenario: String,
    pub workload: String,
    pub repeat: usize,
    pub tick: u64,
    pub kind: ocbench_core::store::RestOpKind,
    pub container: String,
    pub name: String,
    pub length: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub src: Option<String>,
}

/// Flatten cell traces into JSONL, one event per line.
pub fn trace_jsonl(traces: &[CellTrace]) -> String {
    let mut out = String::new();
    for cell in traces {
        for ev in &cell.events {
            let line = TraceLine {
                scenario: cell.scenario.name().to_string(),
                workload: cell.workload.name().to_string(),
                repeat: cell.repeat,
                tick: ev.tick,
                kind: ev.kind,
                container: ev.container.clone(),
                name: ev.name.clone(),
                length: ev.length,
                src: ev.src.clone(),
            };
            out.push_str(&serde_json::to_string(&line).expect("trace line serializes"));
            out.push('\n');
        }
    }
    out
}
