//! Deterministic job engine.
//!
//! Drives the output-commit protocol against a connector on a logical-tick
//! clock. One driver connector instance owns job setup and job commit; one
//! shared executor instance performs every task attempt, the way a single
//! executor process hosts all tasks of a small job. Each tick runs fixed
//! phases in order:
//!
//! 1. attempts whose write tick arrived produce their part object,
//! 2. due commit requests are granted, first one per task wins and losing
//!    live attempts are aborted,
//! 3. once every task has committed, the job commits (task-directory merge
//!    for the two-phase committer, skipped by the single-phase one), the
//!    temporary tree is cleaned, `_SUCCESS` is written and the dataset is
//!    listed once,
//! 4. failed attempts are relaunched and overdue tasks spawn speculative
//!    duplicates,
//! 5. the store clock advances.
//!
//! Faults are scripted per (task, attempt): an attempt can succeed, stall
//! between closing its output and requesting commit, die mid-write, or die
//! after closing but before requesting commit (fail-stop, so a closed object
//! always holds correct bytes). Everything, including the randomized plan
//! generator, is seed-deterministic.

pub mod reader;

use std::collections::BTreeMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connector::stocator::CommittedParts;
use crate::connector::{Connector, ConnectorSpec};
use crate::fs::naming::{self, AttemptId, TEMP_SEGMENT};
use crate::fs::{CreateOptions, FsError, FsPath, ObjectFilesystem};
use crate::store::{ConsistencyPolicy, ObjectStore, OpTally, TraceEvent};

pub use reader::{read_dataset, DatasetRead, PartRead};

/// One tick between spawning an attempt and its write.
const WRITE_DELAY: u64 = 1;
/// Hard stop for schedules that never finish.
const TICK_CAP: u64 = 100_000;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid job configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Fs(#[from] FsError),
    #[error("job made no progress by tick {tick}")]
    Stalled { tick: u64 },
}

/// Commit protocol variant driven through the connector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommitterKind {
    /// Two-phase: task commit renames into a per-task directory, job commit
    /// renames from there into the dataset.
    V1,
    /// Single-phase: task commit renames straight into the dataset.
    V2,
    /// The two-phase call sequence issued verbatim, with every temporary-tree
    /// step absorbed by the rename-free connector. Invalid elsewhere.
    Passthrough,
}

/// Scripted fate of one task attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttemptOutcome {
    Succeed,
    /// Write and close on time, then stall this many ticks before requesting
    /// commit.
    Slow(u64),
    /// Die mid-write; the upload is abandoned and nothing is installed.
    FailBeforeClose,
    /// Die after the object is fully written but before requesting commit;
    /// the installed object becomes unowned garbage.
    FailAfterClose,
}

/// Fault script for a job, keyed by task index and attempt number. Unlisted
/// attempts succeed; speculation never spawns an attempt the script does not
/// name, so plans bound the attempt count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultPlan {
    pub outcomes: BTreeMap<usize, Vec<AttemptOutcome>>,
    /// Ticks a task's newest attempt may stay unfinished before a
    /// speculative duplicate is considered.
    pub speculation_threshold: u64,
    /// Whether a losing live attempt's output is deleted when its task
    /// commits. Output of attempts that died is never cleaned.
    pub cleanup_aborted: bool,
    pub seed: u64,
}

impl Default for FaultPlan {
    fn default() -> Self {
        Self::none()
    }
}

impl FaultPlan {
    pub fn none() -> Self {
        Self {
            outcomes: BTreeMap::new(),
            speculation_threshold: 2,
            cleanup_aborted: true,
            seed: 0,
        }
    }

    /// Seed-deterministic random plan: up to two scripted early attempts per
    /// task drawn from the fail-stop outcomes, closed by one attempt that is
    /// allowed to finish.
    pub fn generate(seed: u64, num_tasks: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut outcomes = BTreeMap::new();
        for task in 0..num_tasks {
            let mut script = Vec::new();
            for _ in 0..rng.gen_range(0..=2) {
                script.push(match rng.gen_range(0..3) {
                    0 => AttemptOutcome::FailBeforeClose,
                    1 => AttemptOutcome::FailAfterClose,
                    _ => AttemptOutcome::Slow(rng.gen_range(1..=6)),
                });
            }
            script.push(if rng.gen_bool(0.5) {
                AttemptOutcome::Succeed
            } else {
                AttemptOutcome::Slow(rng.gen_range(1..=6))
            });
            outcomes.insert(task, script);
        }
        Self {
            outcomes,
            speculation_threshold: rng.gen_range(1..=4),
            cleanup_aborted: rng.gen_bool(0.5),
            seed,
        }
    }

    pub fn declared(&self, task: usize, attempt: u32) -> Option<AttemptOutcome> {
        self.outcomes
            .get(&task)
            .and_then(|script| script.get(attempt as usize))
            .copied()
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.speculation_threshold == 0 {
            return Err(EngineError::Config(
                "speculation_threshold must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One output part and the task that produces it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartSpec {
    pub index: usize,
    /// Task number as it appears in attempt names.
    pub task_label: String,
    /// Body size in bytes, at least 1 so the object reads back as a file.
    pub size: u64,
    /// Seed for the part's deterministic body.
    pub body_seed: u64,
}

impl PartSpec {
    pub fn new(index: usize, size: u64) -> Self {
        Self::with_label(index, size, &format!("{index:06}"))
    }

    pub fn with_label(index: usize, size: u64, task_label: &str) -> Self {
        Self {
            index,
            task_label: task_label.to_string(),
            size,
            body_seed: index as u64,
        }
    }

    pub fn part_name(&self) -> String {
        format!("part-{:05}", self.index)
    }
}

/// A job: one task per part, one committer, one output dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSpec {
    pub dataset: FsPath,
    pub job_timestamp: String,
    pub parts: Vec<PartSpec>,
    pub committer: CommitterKind,
}

impl JobSpec {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.dataset.is_container_root() {
            return Err(EngineError::Config(
                "dataset must name an object path, not a container".into(),
            ));
        }
        if self.dataset.segments().iter().any(|s| s == TEMP_SEGMENT) {
            return Err(EngineError::Config(format!(
                "dataset path may not contain a {TEMP_SEGMENT} segment"
            )));
        }
        if self.parts.is_empty() {
            return Err(EngineError::Config("job needs at least one part".into()));
        }
        for (i, part) in self.parts.iter().enumerate() {
            if part.index != i {
                return Err(EngineError::Config(format!(
                    "part indices must be dense from 0; found {} at position {i}",
                    part.index
                )));
            }
            if part.size == 0 {
                return Err(EngineError::Config(format!(
                    "part {i} is empty; zero-byte objects read as directory markers"
                )));
            }
            AttemptId::new(&self.job_timestamp, &part.task_label, 0)
                .map_err(|e| EngineError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn total_bytes(&self) -> u64 {
        self.parts.iter().map(|p| p.size).sum()
    }
}

/// Deterministic body for a part: same seed, same bytes, every time.
pub fn body_bytes(seed: u64, size: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut body = vec![0u8; size as usize];
    rng.fill_bytes(&mut body);
    body
}

/// What the job phase did to the store, before any read-back.
#[derive(Debug, Clone)]
pub struct JobRun {
    pub wrote_success: bool,
    /// Winning attempt per task index.
    pub committed: BTreeMap<usize, AttemptId>,
    /// Ops issued by this job only.
    pub tally: OpTally,
    /// Wire events issued by this job only, in order.
    pub trace: Vec<TraceEvent>,
}

/// Resolution entry in a report: which attempt a part name resolved to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolvedPart {
    pub attempt: Option<String>,
    pub length: u64,
}

/// Job-phase metering plus post-settle read-back verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tally: OpTally,
    #[serde(skip)]
    pub trace: Vec<TraceEvent>,
    pub wrote_success: bool,
    pub expected_parts: usize,
    pub parts_readable: usize,
    /// Every expected part resolved and read back.
    pub complete: bool,
    pub resolution: BTreeMap<String, ResolvedPart>,
    /// Filled by pricing; the engine reports raw counts only.
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum AttemptPhase {
    Pending,
    /// Closed its output; `request_at` holds the commit-request tick.
    Written,
    /// Failed. Its output, if any, stays behind.
    Dead,
    /// Lost to a committed sibling.
    Aborted,
    Committed,
}

struct AttemptState {
    id: AttemptId,
    number: u32,
    spawn_tick: u64,
    write_at: u64,
    outcome: AttemptOutcome,
    phase: AttemptPhase,
    request_at: Option<u64>,
}

struct TaskState {
    index: usize,
    attempts: Vec<AttemptState>,
    committed: bool,
}

impl TaskState {
    fn spawn(&mut self, spec: &JobSpec, faults: &FaultPlan, now: u64) -> Result<(), EngineError> {
        let number = self.attempts.len() as u32;
        let id = AttemptId::new(
            &spec.job_timestamp,
            &spec.parts[self.index].task_label,
            number,
        )
        .map_err(|e| EngineError::Config(e.to_string()))?;
        let outcome = faults
            .declared(self.index, number)
            .unwrap_or(AttemptOutcome::Succeed);
        self.attempts.push(AttemptState {
            id,
            number,
            spawn_tick: now,
            write_at: now + WRITE_DELAY,
            outcome,
            phase: AttemptPhase::Pending,
            request_at: None,
        });
        Ok(())
    }
}

/// Run the job phase: setup, task attempts, commits, `_SUCCESS`.
pub fn execute_job(
    store: &ObjectStore,
    spec: &JobSpec,
    connector: &ConnectorSpec,
    faults: &FaultPlan,
) -> Result<JobRun, EngineError> {
    spec.validate()?;
    connector.validate()?;
    faults.validate()?;
    if spec.committer == CommitterKind::Passthrough && !connector.is_stocator() {
        return Err(EngineError::Config(
            "passthrough committer requires the rename-free connector".into(),
        ));
    }

    let tally_start = store.tally();
    let trace_start = store.trace().len();
    let driver = connector.spawn(store);
    let executor = connector.spawn(store);
    let ds = &spec.dataset;
    let start = store.now();

    driver.mkdirs(&naming::job_temp_dir(ds))?;
    let mut tasks: Vec<TaskState> = Vec::with_capacity(spec.parts.len());
    for part in &spec.parts {
        let mut task = TaskState {
            index: part.index,
            attempts: Vec::new(),
            committed: false,
        };
        task.spawn(spec, faults, start)?;
        tasks.push(task);
    }

    let mut committed: BTreeMap<usize, AttemptId> = BTreeMap::new();
    let mut wrote_success = false;

    loop {
        let t = store.now();
        if t > start + TICK_CAP {
            return Err(EngineError::Stalled { tick: t });
        }

        for task in tasks.iter_mut() {
            let part = &spec.parts[task.index];
            for attempt in task.attempts.iter_mut() {
                if attempt.phase == AttemptPhase::Pending && attempt.write_at == t {
                    run_write(&executor, ds, part, attempt, t)?;
                }
            }
        }

        let mut due: Vec<(u64, usize, u32)> = Vec::new();
        for task in &tasks {
            if task.committed {
                continue;
            }
            for attempt in &task.attempts {
                if attempt.phase == AttemptPhase::Written {
                    if let Some(at) = attempt.request_at {
                        if at <= t {
                            due.push((at, task.index, attempt.number));
                        }
                    }
                }
            }
        }
        due.sort_unstable();
        for (_, task_index, number) in due {
            let task = &mut tasks[task_index];
            if task.committed {
                continue;
            }
            let part = &spec.parts[task_index];
            let winner = commit_task(&executor, spec, part, task, number)?;
            abort_losers(&executor, ds, part, task, number, faults)?;
            committed.insert(task_index, winner);
        }

        if !wrote_success && tasks.iter().all(|task| task.committed) {
            run_job_commit(&driver, spec, &committed)?;
            wrote_success = true;
            break;
        }

        for task in tasks.iter_mut() {
            if task.committed {
                continue;
            }
            let relaunch = task
                .attempts
                .last()
                .is_some_and(|a| a.phase == AttemptPhase::Dead && a.write_at == t);
            if relaunch {
                task.spawn(spec, faults, t)?;
            }
        }

        for task in tasks.iter_mut() {
            if task.committed {
                continue;
            }
            let last = task.attempts.last().expect("tasks always hold an attempt");
            let alive = matches!(last.phase, AttemptPhase::Pending | AttemptPhase::Written);
            if alive
                && t >= last.spawn_tick + faults.speculation_threshold
                && faults
                    .declared(task.index, task.attempts.len() as u32)
                    .is_some()
            {
                task.spawn(spec, faults, t)?;
            }
        }

        store.advance(1);
    }

    Ok(JobRun {
        wrote_success,
        committed,
        tally: store.tally().since(&tally_start),
        trace: store.trace()[trace_start..].to_vec(),
    })
}

fn run_write(
    executor: &Connector,
    ds: &FsPath,
    part: &PartSpec,
    attempt: &mut AttemptState,
    t: u64,
) -> Result<(), EngineError> {
    executor.mkdirs(&naming::attempt_dir(ds, &attempt.id))?;
    let temp = naming::attempt_part_path(ds, &attempt.id, &part.part_name());
    let mut out = executor.create(&temp, CreateOptions::default())?;
    let body = body_bytes(part.body_seed, part.size);
    match attempt.outcome {
        AttemptOutcome::FailBeforeClose => {
            out.write(&body[..body.len() / 2])?;
            drop(out);
            attempt.phase = AttemptPhase::Dead;
        }
        AttemptOutcome::FailAfterClose => {
            out.write(&body)?;
            out.close()?;
            attempt.phase = AttemptPhase::Dead;
        }
        AttemptOutcome::Succeed => {
            out.write(&body)?;
            out.close()?;
            attempt.phase = AttemptPhase::Written;
            attempt.request_at = Some(t);
        }
        AttemptOutcome::Slow(stall) => {
            out.write(&body)?;
            out.close()?;
            attempt.phase = AttemptPhase::Written;
            attempt.request_at = Some(t + stall);
        }
    }
    Ok(())
}

/// Task commit, decomposed the way the rename-based committer issues it:
/// check the attempt directory, list it, rename each file out, drop the
/// directory. The destination differs per committer; the rename-free
/// connector absorbs the whole sequence.
fn commit_task(
    executor: &Connector,
    spec: &JobSpec,
    part: &PartSpec,
    task: &mut TaskState,
    number: u32,
) -> Result<AttemptId, EngineError> {
    let _ = part;
    let attempt = &mut task.attempts[number as usize];
    let attempt_dir = naming::attempt_dir(&spec.dataset, &attempt.id);
    if executor.exists(&attempt_dir)? {
        let dst_dir = match spec.committer {
            CommitterKind::V1 | CommitterKind::Passthrough => {
                naming::task_committed_dir(&spec.dataset, &attempt.id)
            }
            CommitterKind::V2 => spec.dataset.clone(),
        };
        for status in executor.list_status(&attempt_dir)? {
            if status.is_directory {
                continue;
            }
            let segment = status
                .path
                .last_segment()
                .expect("listed files have a segment")
                .to_string();
            executor.rename(&status.path, &dst_dir.child(&segment))?;
        }
        executor.delete(&attempt_dir, true)?;
    }
    attempt.phase = AttemptPhase::Committed;
    task.committed = true;
    Ok(attempt.id.clone())
}

/// Duplicate attempts lose the moment a sibling commits. Unwritten ones are
/// cancelled for free; written ones have their output deleted when cleanup
/// is on. Dead attempts are left as they fell.
fn abort_losers(
    executor: &Connector,
    ds: &FsPath,
    part: &PartSpec,
    task: &mut TaskState,
    winner: u32,
    faults: &FaultPlan,
) -> Result<(), EngineError> {
    for attempt in task.attempts.iter_mut() {
        if attempt.number == winner {
            continue;
        }
        match attempt.phase {
            AttemptPhase::Pending => attempt.phase = AttemptPhase::Aborted,
            AttemptPhase::Written => {
                if faults.cleanup_aborted {
                    let temp = naming::attempt_part_path(ds, &attempt.id, &part.part_name());
                    executor.delete(&temp, false)?;
                    executor.delete(&naming::attempt_dir(ds, &attempt.id), true)?;
                }
                attempt.phase = AttemptPhase::Aborted;
            }
            AttemptPhase::Dead | AttemptPhase::Aborted | AttemptPhase::Committed => {}
        }
    }
    Ok(())
}

/// Job commit: merge per-task directories into the dataset (two-phase only),
/// clean the temporary tree, write `_SUCCESS`, list the result once.
fn run_job_commit(
    driver: &Connector,
    spec: &JobSpec,
    committed: &BTreeMap<usize, AttemptId>,
) -> Result<(), EngineError> {
    let ds = &spec.dataset;
    if matches!(
        spec.committer,
        CommitterKind::V1 | CommitterKind::Passthrough
    ) {
        let job_temp = naming::job_temp_dir(ds);
        if driver.exists(&job_temp)? {
            for child in driver.list_status(&job_temp)? {
                let is_task_dir = child.is_directory
                    && child
                        .path
                        .last_segment()
                        .is_some_and(|s| s.starts_with("task_"));
                if !is_task_dir {
                    continue;
                }
                for status in driver.list_status(&child.path)? {
                    if status.is_directory {
                        continue;
                    }
                    let segment = status
                        .path
                        .last_segment()
                        .expect("listed files have a segment")
                        .to_string();
                    driver.rename(&status.path, &ds.child(&segment))?;
                }
            }
        }
    }
    driver.delete(&ds.child(TEMP_SEGMENT), true)?;

    let mut parts: CommittedParts = CommittedParts::new();
    for (task_index, attempt) in committed {
        parts.insert(spec.parts[*task_index].part_name(), attempt.clone());
    }
    driver.write_success(ds, &parts)?;
    driver.list_status(ds)?;
    Ok(())
}

/// Advance past every visibility lag so listings reflect the final state.
pub fn settle(store: &ObjectStore) {
    let policy = store.policy();
    store.advance(policy.create_listing_lag.max(policy.delete_listing_lag) + 1);
}

/// Combine job-phase metering with a read-back into one report.
pub fn assemble_report(
    tally: OpTally,
    trace: Vec<TraceEvent>,
    wrote_success: bool,
    read: &DatasetRead,
    expected_parts: usize,
) -> RunReport {
    let resolution = read
        .parts
        .iter()
        .map(|(part, pr)| {
            (
                part.clone(),
                ResolvedPart {
                    attempt: pr.attempt.as_ref().map(|a| a.render()),
                    length: pr.length,
                },
            )
        })
        .collect();
    let parts_readable = read.parts.len();
    RunReport {
        tally,
        trace,
        wrote_success,
        expected_parts,
        parts_readable,
        complete: parts_readable == expected_parts,
        resolution,
        cost: 0.0,
    }
}

/// Execute, settle the lags, read the dataset back cold, and report.
/// The report's tally and trace cover the job phase only.
pub fn run_job_on(
    store: &ObjectStore,
    spec: &JobSpec,
    connector: &ConnectorSpec,
    faults: &FaultPlan,
) -> Result<RunReport, EngineError> {
    let run = execute_job(store, spec, connector, faults)?;
    settle(store);
    let read = read_dataset(store, connector, &spec.dataset)?;
    Ok(assemble_report(
        run.tally,
        run.trace,
        run.wrote_success,
        &read,
        spec.parts.len(),
    ))
}

/// [`run_job_on`] against a fresh store with the given consistency policy.
pub fn run_job(
    spec: &JobSpec,
    connector: &ConnectorSpec,
    policy: ConsistencyPolicy,
    faults: &FaultPlan,
) -> Result<(RunReport, ObjectStore), EngineError> {
    let store = ObjectStore::new(policy);
    let report = run_job_on(&store, spec, connector, faults)?;
    Ok((report, store))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connector::legacy::LegacyProfile;
    use crate::connector::stocator::{ReadOption, StocatorConfig};
    use crate::store::RestOpKind;

    fn dataset() -> FsPath {
        FsPath::parse("swift2d://res/data.txt").unwrap()
    }

    fn single_task_spec() -> JobSpec {
        JobSpec {
            dataset: dataset(),
            job_timestamp: "201702221313".into(),
            parts: vec![PartSpec::new(0, 2)],
            committer: CommitterKind::Passthrough,
        }
    }

    fn three_task_spec(committer: CommitterKind) -> JobSpec {
        JobSpec {
            dataset: dataset(),
            job_timestamp: "201512062056".into(),
            parts: (0..3)
                .map(|i| PartSpec::with_label(i, 2, "000000"))
                .collect(),
            committer,
        }
    }

    fn speculation_plan() -> FaultPlan {
        let mut plan = FaultPlan::none();
        plan.outcomes.insert(
            2,
            vec![
                AttemptOutcome::Slow(8),
                AttemptOutcome::Slow(4),
                AttemptOutcome::Slow(6),
            ],
        );
        plan.speculation_threshold = 2;
        plan
    }

    fn stocator() -> ConnectorSpec {
        ConnectorSpec::Stocator(StocatorConfig::default())
    }

    fn write_only_spec(parts: usize, size: u64, committer: CommitterKind) -> JobSpec {
        JobSpec {
            dataset: dataset(),
            job_timestamp: "201601010000".into(),
            parts: (0..parts).map(|i| PartSpec::new(i, size)).collect(),
            committer,
        }
    }

    #[test]
    fn single_task_rename_free_hits_the_exact_op_budget() {
        let (report, _) = run_job(
            &single_task_spec(),
            &stocator(),
            ConsistencyPolicy::strong(),
            &FaultPlan::none(),
        )
        .unwrap();
        assert!(report.wrote_success);
        assert!(report.complete);
        let tally = &report.tally;
        assert_eq!(tally.count(RestOpKind::HeadObject), 4);
        assert_eq!(tally.count(RestOpKind::PutObject), 3);
        assert_eq!(tally.count(RestOpKind::GetObject), 0);
        assert_eq!(tally.count(RestOpKind::CopyObject), 0);
        assert_eq!(tally.count(RestOpKind::DeleteObject), 0);
        assert_eq!(tally.count(RestOpKind::GetContainer), 1);
        assert_eq!(tally.count(RestOpKind::HeadContainer), 0);
        assert_eq!(tally.total_ops(), 8);
    }

    fn dataset_mutations(report: &RunReport) -> Vec<String> {
        report
            .trace
            .iter()
            .filter(|e| {
                (e.kind == RestOpKind::PutObject || e.kind == RestOpKind::DeleteObject)
                    && e.name.starts_with("data.txt/")
            })
            .map(TraceEvent::render)
            .collect()
    }

    #[test]
    fn speculation_run_emits_the_expected_wire_names_in_order() {
        let (report, _) = run_job(
            &three_task_spec(CommitterKind::Passthrough),
            &stocator(),
            ConsistencyPolicy::strong(),
            &speculation_plan(),
        )
        .unwrap();
        let lines = dataset_mutations(&report);
        assert_eq!(
            lines,
            vec![
                "PUT /res/data.txt/part-00000_attempt_201512062056_0000_m_000000_0",
                "PUT /res/data.txt/part-00001_attempt_201512062056_0000_m_000000_0",
                "PUT /res/data.txt/part-00002_attempt_201512062056_0000_m_000000_0",
                "PUT /res/data.txt/part-00002_attempt_201512062056_0000_m_000000_1",
                "PUT /res/data.txt/part-00002_attempt_201512062056_0000_m_000000_2",
                "DELETE /res/data.txt/part-00002_attempt_201512062056_0000_m_000000_0",
                "DELETE /res/data.txt/part-00002_attempt_201512062056_0000_m_000000_2",
                "PUT /res/data.txt/_SUCCESS",
            ]
        );
        assert!(report.complete);
        assert_eq!(
            report.resolution["part-00002"].attempt.as_deref().unwrap(),
            "attempt_201512062056_0000_m_000000_1"
        );
    }

    #[test]
    fn speculative_attempts_spawn_at_threshold_spacing() {
        let (report, _) = run_job(
            &three_task_spec(CommitterKind::Passthrough),
            &stocator(),
            ConsistencyPolicy::strong(),
            &speculation_plan(),
        )
        .unwrap();
        let put_ticks: Vec<u64> = report
            .trace
            .iter()
            .filter(|e| e.kind == RestOpKind::PutObject && e.name.contains("part-00002"))
            .map(|e| e.tick)
            .collect();
        assert_eq!(put_ticks, vec![1, 3, 5]);
        let success_tick = report
            .trace
            .iter()
            .find(|e| e.name.ends_with("_SUCCESS"))
            .unwrap()
            .tick;
        assert_eq!(success_tick, 7);
    }

    #[test]
    fn write_amplification_is_three_two_one_across_committers() {
        let total: u64 = 8 * 1024;
        for (connector, committer, factor) in [
            (
                ConnectorSpec::Legacy(LegacyProfile::swift_like()),
                CommitterKind::V1,
                3,
            ),
            (
                ConnectorSpec::Legacy(LegacyProfile::swift_like()),
                CommitterKind::V2,
                2,
            ),
            (stocator(), CommitterKind::Passthrough, 1),
        ] {
            let spec = write_only_spec(8, 1024, committer);
            let (report, _) = run_job(
                &spec,
                &connector,
                ConsistencyPolicy::strong(),
                &FaultPlan::none(),
            )
            .unwrap();
            assert!(report.complete);
            let moved = report.tally.bytes_put + report.tally.bytes_copied;
            assert_eq!(moved, total * factor, "committer {committer:?}");
        }
    }

    #[test]
    fn copy_counts_are_2n_n_and_zero() {
        for n in [1usize, 2, 4, 8] {
            for (connector, committer, per_part) in [
                (
                    ConnectorSpec::Legacy(LegacyProfile::s3a_like()),
                    CommitterKind::V1,
                    2,
                ),
                (
                    ConnectorSpec::Legacy(LegacyProfile::s3a_like()),
                    CommitterKind::V2,
                    1,
                ),
                (stocator(), CommitterKind::Passthrough, 0),
            ] {
                let spec = write_only_spec(n, 16, committer);
                let (report, _) = run_job(
                    &spec,
                    &connector,
                    ConsistencyPolicy::strong(),
                    &FaultPlan::none(),
                )
                .unwrap();
                assert_eq!(
                    report.tally.count(RestOpKind::CopyObject),
                    (n * per_part) as u64,
                    "n={n} committer {committer:?}"
                );
                assert!(report.complete);
            }
        }
    }

    #[test]
    fn listing_lag_loses_legacy_output_but_not_manifest_reads() {
        let lagged = ConsistencyPolicy::with_lags(3, 0);
        for committer in [CommitterKind::V1, CommitterKind::V2] {
            let spec = write_only_spec(2, 8, committer);
            let (report, _) = run_job(
                &spec,
                &ConnectorSpec::Legacy(LegacyProfile::swift_like()),
                lagged,
                &FaultPlan::none(),
            )
            .unwrap();
            assert!(report.wrote_success, "{committer:?}");
            assert!(!report.complete, "{committer:?}");
        }

        let spec = write_only_spec(2, 8, CommitterKind::Passthrough);
        let (report, _) = run_job(
            &spec,
            &ConnectorSpec::Stocator(StocatorConfig::with_read_option(ReadOption::Manifest)),
            lagged,
            &FaultPlan::none(),
        )
        .unwrap();
        assert!(report.wrote_success);
        assert!(report.complete);
    }

    #[test]
    fn failed_attempt_is_relaunched_and_the_relaunch_wins() {
        let mut plan = FaultPlan::none();
        plan.outcomes
            .insert(0, vec![AttemptOutcome::FailBeforeClose]);
        let (report, _) = run_job(
            &single_task_spec(),
            &stocator(),
            ConsistencyPolicy::strong(),
            &plan,
        )
        .unwrap();
        assert!(report.complete);
        assert_eq!(
            report.resolution["part-00000"].attempt.as_deref().unwrap(),
            "attempt_201702221313_0000_m_000000_1"
        );
    }

    #[test]
    fn garbage_from_a_late_death_is_outranked_by_the_relaunch() {
        let mut plan = FaultPlan::none();
        plan.outcomes
            .insert(0, vec![AttemptOutcome::FailAfterClose]);
        let (report, store) = run_job(
            &single_task_spec(),
            &stocator(),
            ConsistencyPolicy::strong(),
            &plan,
        )
        .unwrap();
        assert!(report.complete);
        // The dead attempt's object is still in the container.
        let leftovers = store
            .list_container("res", "data.txt/part-00000", None)
            .entries
            .len();
        assert_eq!(leftovers, 2);
        // The reader resolves the committed relaunch, not the garbage.
        assert_eq!(
            report.resolution["part-00000"].attempt.as_deref().unwrap(),
            "attempt_201702221313_0000_m_000000_1"
        );
    }

    #[test]
    fn losers_survive_when_cleanup_is_off_and_reads_stay_complete() {
        let mut plan = speculation_plan();
        plan.cleanup_aborted = false;
        let (report, store) = run_job(
            &three_task_spec(CommitterKind::Passthrough),
            &stocator(),
            ConsistencyPolicy::strong(),
            &plan,
        )
        .unwrap();
        assert_eq!(report.tally.count(RestOpKind::DeleteObject), 0);
        let survivors = store
            .list_container("res", "data.txt/part-00002", None)
            .entries
            .len();
        assert_eq!(survivors, 3);
        assert!(report.complete);
    }

    #[test]
    fn generated_plans_commit_and_read_back_canonically() {
        for seed in 0..40 {
            let plan = FaultPlan::generate(seed, 3);
            let spec = JobSpec {
                dataset: dataset(),
                job_timestamp: "201601010000".into(),
                parts: (0..3).map(|i| PartSpec::new(i, 64)).collect(),
                committer: CommitterKind::Passthrough,
            };
            let (report, _) =
                run_job(&spec, &stocator(), ConsistencyPolicy::strong(), &plan).unwrap();
            assert!(report.wrote_success, "seed {seed}");
            assert!(report.complete, "seed {seed}");
            for (i, part) in spec.parts.iter().enumerate() {
                let resolved = &report.resolution[&part.part_name()];
                assert_eq!(resolved.length, 64, "seed {seed} part {i}");
            }
        }
    }

    #[test]
    fn legacy_two_phase_walks_task_directories_at_job_commit() {
        let spec = write_only_spec(2, 32, CommitterKind::V1);
        let (report, store) = run_job(
            &spec,
            &ConnectorSpec::Legacy(LegacyProfile::swift_like()),
            ConsistencyPolicy::strong(),
            &FaultPlan::none(),
        )
        .unwrap();
        assert!(report.complete);
        // Temporary tree fully cleaned, parts landed under plain names.
        let names: Vec<String> = store
            .list_container("res", "data.txt/", None)
            .entries
            .iter()
            .map(|e| e.name.clone())
            .collect();
        assert_eq!(
            names,
            vec![
                "data.txt/_SUCCESS",
                "data.txt/part-00000",
                "data.txt/part-00001"
            ]
        );
    }

    #[test]
    fn passthrough_requires_the_rename_free_connector() {
        let spec = write_only_spec(1, 8, CommitterKind::Passthrough);
        let err = run_job(
            &spec,
            &ConnectorSpec::Legacy(LegacyProfile::swift_like()),
            ConsistencyPolicy::strong(),
            &FaultPlan::none(),
        )
        .unwrap_err();
        assert!(matches!(err, EngineError::Config(_)));
    }

    #[test]
    fn job_specs_reject_malformed_shapes() {
        let mut spec = single_task_spec();
        spec.parts[0].size = 0;
        assert!(spec.validate().is_err());

        let mut spec = single_task_spec();
        spec.parts[0].index = 3;
        assert!(spec.validate().is_err());

        let mut spec = single_task_spec();
        spec.job_timestamp = "20170222x".into();
        assert!(spec.validate().is_err());

        let mut spec = single_task_spec();
        spec.dataset = FsPath::parse("swift2d://res/data.txt/_temporary/x").unwrap();
        assert!(spec.validate().is_err());

        let mut spec = single_task_spec();
        spec.parts.clear();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn body_bytes_is_seed_deterministic() {
        assert_eq!(body_bytes(7, 128), body_bytes(7, 128));
        assert_ne!(body_bytes(7, 128), body_bytes(8, 128));
    }

    #[test]
    fn identical_runs_produce_identical_traces() {
        let run = || {
            let (report, _) = run_job(
                &three_task_spec(CommitterKind::Passthrough),
                &stocator(),
                ConsistencyPolicy::with_lags(1, 2),
                &speculation_plan(),
            )
            .unwrap();
            report.trace
        };
        assert_eq!(run(), run());
    }
}
