//! The workload catalog and per-cell execution.
//!
//! A cell is one (scenario, workload) pairing run against a private store.
//! Workloads that read pre-existing data seed it outside the metered window,
//! so reports cover only the phase the workload is named after.

use std::fmt;

use ocbench_core::connector::stocator::{CommittedParts, SuccessManifest};
use ocbench_core::connector::ConnectorSpec;
use ocbench_core::engine::{
    assemble_report, body_bytes, execute_job, read_dataset, run_job_on, settle, CommitterKind,
    JobSpec, PartSpec, RunReport,
};
use ocbench_core::fs::naming::{self, AttemptId};
use ocbench_core::fs::FsPath;
use ocbench_core::store::{Metadata, ObjectStore};

use crate::config::Config;
use crate::scenario::Scenario;
use crate::HarnessError;

/// Job timestamp used by the single-task program.
pub const SINGLE_TASK_TIMESTAMP: &str = "201702221313";
/// Job timestamp used by the three-task program and the bulk workloads.
pub const THREE_TASK_TIMESTAMP: &str = "201512062056";
/// Timestamp stamped into pre-seeded input attempts.
const INPUT_TIMESTAMP: &str = "201601011200";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WorkloadKind {
    /// One task writing one two-byte part.
    SingleTask,
    /// Three tasks, one part each; pairs with the scripted speculation plan.
    ThreeTask,
    /// `workload.parts` tasks of `workload.part_size` bytes, write only.
    WriteOnly,
    /// Read a seeded input dataset, then write the output dataset.
    Copy,
    /// Read a seeded dataset; no writes inside the metered window.
    ReadOnly,
}

impl WorkloadKind {
    pub const ALL: [WorkloadKind; 5] = [
        WorkloadKind::SingleTask,
        WorkloadKind::ThreeTask,
        WorkloadKind::WriteOnly,
        WorkloadKind::Copy,
        WorkloadKind::ReadOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WorkloadKind::SingleTask => "SingleTask",
            WorkloadKind::ThreeTask => "ThreeTask",
            WorkloadKind::WriteOnly => "WriteOnly",
            WorkloadKind::Copy => "Copy",
            WorkloadKind::ReadOnly => "ReadOnly",
        }
    }

    pub fn parse(input: &str) -> Result<Self, String> {
        let wanted = input.trim();
        WorkloadKind::ALL
            .into_iter()
            .find(|w| w.name().eq_ignore_ascii_case(wanted))
            .ok_or_else(|| {
                let known: Vec<&str> = WorkloadKind::ALL.iter().map(|w| w.name()).collect();
                format!("unknown workload {wanted:?}, expected one of {known:?}")
            })
    }
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-part body seed: every part differs, reruns with one seed agree.
fn part_seed(seed: u64, index: usize) -> u64 {
    seed.rotate_left(17) ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn dataset_path(connector: &ConnectorSpec, cfg: &Config) -> FsPath {
    let uri = format!("{}://{}/{}", connector.scheme(), cfg.container, cfg.dataset);
    FsPath::parse(&uri).expect("config validated the dataset shape")
}

/// Sibling of `dataset` whose last segment gets a `src-` prefix.
fn input_path(dataset: &FsPath) -> FsPath {
    let mut segments: Vec<String> = dataset.segments().to_vec();
    let last = segments.last_mut().expect("datasets are never root");
    *last = format!("src-{last}");
    let joined: Vec<&str> = segments.iter().map(String::as_str).collect();
    dataset.ancestor(0).join(joined)
}

fn job_spec(
    dataset: FsPath,
    timestamp: &str,
    committer: CommitterKind,
    parts: &[(usize, &str, u64)],
    seed: u64,
) -> JobSpec {
    let parts = parts
        .iter()
        .map(|(index, label, size)| {
            let mut part = PartSpec::with_label(*index, *size, label);
            part.body_seed = part_seed(seed, *index);
            part
        })
        .collect();
    JobSpec {
        dataset,
        job_timestamp: timestamp.to_string(),
        parts,
        committer,
    }
}

pub fn single_task_spec(dataset: FsPath, committer: CommitterKind, seed: u64) -> JobSpec {
    job_spec(
        dataset,
        SINGLE_TASK_TIMESTAMP,
        committer,
        &[(0, "000000", 2)],
        seed,
    )
}

/// Three tasks sharing one task label, the shape the speculation schedule
/// scripts against (the backup attempts race on the third part).
pub fn three_task_spec(dataset: FsPath, committer: CommitterKind, seed: u64) -> JobSpec {
    job_spec(
        dataset,
        THREE_TASK_TIMESTAMP,
        committer,
        &[(0, "000000", 2), (1, "000000", 2), (2, "000000", 2)],
        seed,
    )
}

pub fn bulk_spec(dataset: FsPath, committer: CommitterKind, cfg: &Config) -> JobSpec {
    let labels: Vec<String> = (0..cfg.parts).map(|i| format!("{i:06}")).collect();
    let parts: Vec<(usize, &str, u64)> = labels
        .iter()
        .enumerate()
        .map(|(i, label)| (i, label.as_str(), cfg.part_size))
        .collect();
    job_spec(dataset, THREE_TASK_TIMESTAMP, committer, &parts, cfg.seed)
}

/// Pre-populate `dataset` with committed parts every connector can read:
/// attempt-qualified part objects plus a manifest-bearing `_SUCCESS`. No
/// directory markers of either style go in, so each connector resolves the
/// layout through its own probes. Runs outside the metered window.
fn seed_dataset(
    store: &ObjectStore,
    dataset: &FsPath,
    parts: usize,
    size: u64,
    seed: u64,
) -> Result<(), HarnessError> {
    let mut committed = CommittedParts::new();
    for index in 0..parts {
        let attempt = AttemptId::new(INPUT_TIMESTAMP, format!("{index:06}"), 0)
            .expect("literal input attempt");
        let part_name = format!("part-{index:05}");
        let path = naming::final_part_path(dataset, &attempt, &part_name);
        let body = body_bytes(part_seed(seed.wrapping_add(1), index), size);
        store.put_object(path.object_key()?, &body, Metadata::new())?;
        committed.insert(part_name, attempt);
    }
    let manifest = SuccessManifest::new(committed);
    store.put_object(
        naming::success_path(dataset).object_key()?,
        &manifest.to_bytes(),
        Metadata::new(),
    )?;
    settle(store);
    store.reset_metering();
    Ok(())
}

/// Run one cell and report the metered phase. The store is private to the
/// call, so cells never observe each other.
pub fn execute_cell(
    scenario: Scenario,
    kind: WorkloadKind,
    cfg: &Config,
) -> Result<RunReport, HarnessError> {
    let connector = scenario.connector(cfg.stocator_read);
    let store = ObjectStore::new(cfg.policy());
    let dataset = dataset_path(&connector, cfg);
    let faults = cfg.faults();
    let committer = scenario.committer();

    match kind {
        WorkloadKind::SingleTask => {
            let spec = single_task_spec(dataset, committer, cfg.seed);
            Ok(run_job_on(&store, &spec, &connector, &faults)?)
        }
        WorkloadKind::ThreeTask => {
            let spec = three_task_spec(dataset, committer, cfg.seed);
            Ok(run_job_on(&store, &spec, &connector, &faults)?)
        }
        WorkloadKind::WriteOnly => {
            let spec = bulk_spec(dataset, committer, cfg);
            Ok(run_job_on(&store, &spec, &connector, &faults)?)
        }
        WorkloadKind::Copy => {
            let input = input_path(&dataset);
            seed_dataset(&store, &input, cfg.parts, cfg.part_size, cfg.seed)?;
            let read_in = read_dataset(&store, &connector, &input)?;
            if read_in.parts.len() != cfg.parts {
                return Err(HarnessError::Workload(format!(
                    "copy input resolved {} of {} parts",
                    read_in.parts.len(),
                    cfg.parts
                )));
            }
            let spec = bulk_spec(dataset, committer, cfg);
            let run = execute_job(&store, &spec, &connector, &faults)?;
            let tally = store.tally();
            let trace = store.trace();
            settle(&store);
            let verify = read_dataset(&store, &connector, &spec.dataset)?;
            Ok(assemble_report(
                tally,
                trace,
                run.wrote_success,
                &verify,
                spec.parts.len(),
            ))
        }
        WorkloadKind::ReadOnly => {
            seed_dataset(&store, &dataset, cfg.parts, cfg.part_size, cfg.seed)?;
            let read = read_dataset(&store, &connector, &dataset)?;
            let tally = store.tally();
            let trace = store.trace();
            Ok(assemble_report(
                tally,
                trace,
                read.success_present,
                &read,
                cfg.parts,
            ))
        }
    }
}
