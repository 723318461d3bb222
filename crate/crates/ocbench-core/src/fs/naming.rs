//! Path grammar shared by the connectors.
//!
//! An analytics job writing dataset `d` stages work under a fixed temporary
//! tree. The shapes, with `<ts>` the job timestamp, `<task>` the task digits,
//! and `<n>` the attempt counter:
//!
//! * job temp dir:   `d/_temporary/0`
//! * attempt dir:    `d/_temporary/0/_temporary/attempt_<ts>_0000_m_<task>_<n>`
//! * task part file: `d/_temporary/0/_temporary/attempt_<ts>_0000_m_<task>_<n>/part-<p>`
//! * committed task: `d/_temporary/0/task_<ts>_0000_m_<task>` (v1 staging)
//!
//! The `0000` job-id field and the `m` (map phase) marker are fixed literals
//! of the grammar; the `0` under the first `_temporary` is the fixed app
//! attempt level. The rename-free connector rewrites a task part file to its
//! final flat name `d/part-<p>_attempt_<ts>_0000_m_<task>_<n>`, which this
//! module can parse back losslessly.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::FsPath;

pub const TEMP_SEGMENT: &str = "_temporary";
pub const APP_ATTEMPT_SEGMENT: &str = "0";
pub const SUCCESS_NAME: &str = "_SUCCESS";

/// One task attempt: `attempt_<ts>_0000_m_<task>_<n>`.
///
/// `job_timestamp` and `task_number` keep their exact digit strings; jobs pad
/// task numbers to six digits but the grammar only requires non-empty digits.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AttemptId {
    job_timestamp: String,
    task_number: String,
    attempt_number: u32,
}

impl AttemptId {
    pub fn new(
        job_timestamp: impl Into<String>,
        task_number: impl Into<String>,
        attempt_number: u32,
    ) -> Result<Self, NamingError> {
        let job_timestamp = job_timestamp.into();
        let task_number = task_number.into();
        if !is_digits(&job_timestamp) {
            return Err(NamingError::BadAttempt(format!(
                "job timestamp must be digits: {job_timestamp:?}"
            )));
        }
        if !is_digits(&task_number) {
            return Err(NamingError::BadAttempt(format!(
                "task number must be digits: {task_number:?}"
            )));
        }
        Ok(Self {
            job_timestamp,
            task_number,
            attempt_number,
        })
    }

    pub fn job_timestamp(&self) -> &str {
        &self.job_timestamp
    }

    pub fn task_number(&self) -> &str {
        &self.task_number
    }

    pub fn attempt_number(&self) -> u32 {
        self.attempt_number
    }

    pub fn with_attempt(&self, attempt_number: u32) -> Self {
        Self {
            attempt_number,
            ..self.clone()
        }
    }

    /// `attempt_<ts>_0000_m_<task>_<n>`.
    pub fn render(&self) -> String {
        format!(
            "attempt_{}_0000_m_{}_{}",
            self.job_timestamp, self.task_number, self.attempt_number
        )
    }

    /// Committed-task directory segment, `task_<ts>_0000_m_<task>`. The
    /// attempt counter does not appear: whichever attempt commits owns it.
    pub fn task_dir_segment(&self) -> String {
        format!("task_{}_0000_m_{}", self.job_timestamp, self.task_number)
    }

    /// Parse the exact `render` form. The `0000` and `m` fields are fixed
    /// literals; anything else is rejected.
    pub fn parse(segment: &str) -> Result<Self, NamingError> {
        let bad = || NamingError::BadAttempt(segment.to_string());
        let rest = segment.strip_prefix("attempt_").ok_or_else(bad)?;
        // Fields are underscore-joined and the timestamp/task are digit runs,
        // so split from the right: <ts> _ 0000 _ m _ <task> _ <n>.
        let mut fields = rest.rsplitn(2, '_');
        let attempt_str = fields.next().ok_or_else(bad)?;
        let head = fields.next().ok_or_else(bad)?;
        let attempt_number: u32 = attempt_str.parse().map_err(|_| bad())?;
        let (ts, task) = head.split_once("_0000_m_").ok_or_else(bad)?;
        if task.contains('_') {
            return Err(bad());
        }
        let id = Self::new(ts, task, attempt_number).map_err(|_| bad())?;
        if id.render() != segment {
            return Err(bad());
        }
        Ok(id)
    }
}

impl fmt::Display for AttemptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NamingError {
    #[error("malformed attempt segment: {0}")]
    BadAttempt(String),
}

/// Which level of the temporary tree a path hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TempDepth {
    /// `d/_temporary/0`
    JobTemp,
    /// `d/_temporary/0/_temporary/attempt_...`
    AttemptDir,
    /// `d/_temporary/0/_temporary/attempt_.../part-...`
    PartFile,
}

/// Decomposition of a temporary-tree path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TempPathMatch {
    pub dataset: FsPath,
    pub depth: TempDepth,
    /// Present at `AttemptDir` and `PartFile` depth.
    pub attempt: Option<AttemptId>,
    /// Present at `PartFile` depth only; a single path segment.
    pub part: Option<String>,
}

impl TempPathMatch {
    /// Rebuild the exact path that produced this match.
    pub fn to_path(&self) -> FsPath {
        match self.depth {
            TempDepth::JobTemp => job_temp_dir(&self.dataset),
            TempDepth::AttemptDir => {
                attempt_dir(&self.dataset, self.attempt.as_ref().expect("attempt set"))
            }
            TempDepth::PartFile => attempt_part_path(
                &self.dataset,
                self.attempt.as_ref().expect("attempt set"),
                self.part.as_deref().expect("part set"),
            ),
        }
    }
}

/// `d/_temporary/0`.
pub fn job_temp_dir(dataset: &FsPath) -> FsPath {
    dataset.join([TEMP_SEGMENT, APP_ATTEMPT_SEGMENT])
}

/// `d/_temporary/0/_temporary/attempt_...`.
pub fn attempt_dir(dataset: &FsPath, attempt: &AttemptId) -> FsPath {
    job_temp_dir(dataset).join([TEMP_SEGMENT, attempt.render().as_str()])
}

/// `d/_temporary/0/_temporary/attempt_.../part-...`.
pub fn attempt_part_path(dataset: &FsPath, attempt: &AttemptId, part: &str) -> FsPath {
    attempt_dir(dataset, attempt).join([part])
}

/// `d/_temporary/0/task_<ts>_0000_m_<task>`, the v1 committed-task directory.
pub fn task_committed_dir(dataset: &FsPath, attempt: &AttemptId) -> FsPath {
    job_temp_dir(dataset).join([attempt.task_dir_segment().as_str()])
}

/// Final flat name for a task part: `d/part-..._attempt_...`.
pub fn final_part_path(dataset: &FsPath, attempt: &AttemptId, part: &str) -> FsPath {
    dataset.join([format!("{part}_{}", attempt.render()).as_str()])
}

/// `d/_SUCCESS`.
pub fn success_path(dataset: &FsPath) -> FsPath {
    dataset.join([SUCCESS_NAME])
}

/// Split a path at its first `_temporary` segment: everything before is the
/// dataset, everything from the segment on is the temporary remainder. The
/// loose test the rename-free connector uses to classify paths as
/// commit-protocol scratch space, whatever their exact shape.
pub fn split_temporary(path: &FsPath) -> Option<(FsPath, &[String])> {
    let segments = path.segments();
    let idx = segments.iter().position(|s| s == TEMP_SEGMENT)?;
    Some((path.ancestor(idx), &segments[idx..]))
}

/// Match the three canonical temporary shapes exactly.
///
/// Returns `None` for anything else, including deeper nestings (the commit
/// protocol never writes below the part level) and malformed attempt
/// segments. Callers that only need "is this scratch space" use
/// [`split_temporary`] instead.
pub fn match_temp_pattern(path: &FsPath) -> Option<TempPathMatch> {
    let (dataset, rest) = split_temporary(path)?;
    if rest.len() < 2 || rest[0] != TEMP_SEGMENT || rest[1] != APP_ATTEMPT_SEGMENT {
        return None;
    }
    match rest.len() {
        2 => Some(TempPathMatch {
            dataset,
            depth: TempDepth::JobTemp,
            attempt: None,
            part: None,
        }),
        4 | 5 if rest[2] == TEMP_SEGMENT => {
            let attempt = AttemptId::parse(&rest[3]).ok()?;
            if rest.len() == 4 {
                Some(TempPathMatch {
                    dataset,
                    depth: TempDepth::AttemptDir,
                    attempt: Some(attempt),
                    part: None,
                })
            } else {
                Some(TempPathMatch {
                    dataset,
                    depth: TempDepth::PartFile,
                    attempt: Some(attempt),
                    part: Some(rest[4].clone()),
                })
            }
        }
        _ => None,
    }
}

/// Classification of an object name found directly under a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetChild {
    /// The `_SUCCESS` marker; never a data part.
    SuccessMarker,
    /// A data object. `attempt` is present when the name carries the
    /// rename-free `_attempt_` suffix, absent for plain (legacy-written)
    /// names.
    Part {
        part: String,
        attempt: Option<AttemptId>,
    },
}

/// Classify the last path segment of an object directly under a dataset.
pub fn classify_dataset_child(segment: &str) -> DatasetChild {
    if segment == SUCCESS_NAME {
        return DatasetChild::SuccessMarker;
    }
    if let Some(pos) = segment.find("_attempt_") {
        let part = &segment[..pos];
        if let Ok(attempt) = AttemptId::parse(&segment[pos + 1..]) {
            if !part.is_empty() {
                return DatasetChild::Part {
                    part: part.to_string(),
                    attempt: Some(attempt),
                };
            }
        }
    }
    DatasetChild::Part {
        part: segment.to_string(),
        attempt: None,
    }
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}
