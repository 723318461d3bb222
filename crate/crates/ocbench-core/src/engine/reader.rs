//! Dataset read-back.
//!
//! A fresh connector instance (cold cache, like a separate reader process)
//! checks for `_SUCCESS` and then resolves which object owns each part name.
//! Ownership follows the fail-stop argument: any fully written attempt
//! carries correct bytes, so among duplicates the reader keeps the one with
//! the most data and breaks ties toward the highest attempt number. Under
//! the manifest read option the `_SUCCESS` body names the committed attempts
//! outright and no listing is issued at all.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::connector::stocator::ReadOption;
use crate::connector::ConnectorSpec;
use crate::fs::naming::{self, classify_dataset_child, AttemptId, DatasetChild, SUCCESS_NAME};
use crate::fs::{FsError, FsPath, ObjectFilesystem};
use crate::store::ObjectStore;

#[derive(Debug, Clone)]
pub struct PartRead {
    /// Object the part resolved to.
    pub path: FsPath,
    /// Attempt parsed from the object name; plain part names carry none.
    pub attempt: Option<AttemptId>,
    pub length: u64,
    pub data: Arc<Vec<u8>>,
}

#[derive(Debug, Clone, Default)]
pub struct DatasetRead {
    /// Whether `_SUCCESS` existed. Without it nothing is read: the job is
    /// not finished and any objects present are in-flight output.
    pub success_present: bool,
    /// Resolved parts by part name.
    pub parts: BTreeMap<String, PartRead>,
}

/// Read a committed dataset the way a downstream job would.
pub fn read_dataset(
    store: &ObjectStore,
    connector: &ConnectorSpec,
    dataset: &FsPath,
) -> Result<DatasetRead, FsError> {
    let reader = connector.spawn(store);
    if !reader.exists(&naming::success_path(dataset))? {
        return Ok(DatasetRead::default());
    }

    let manifest_mode = reader
        .as_stocator()
        .map(|fs| fs.read_option() == ReadOption::Manifest)
        .unwrap_or(false);

    let chosen: Vec<(String, FsPath, Option<AttemptId>)> = if manifest_mode {
        let fs = reader
            .as_stocator()
            .expect("manifest mode implies stocator");
        fs.resolve_via_manifest(dataset)?
            .into_iter()
            .map(|(part, path)| {
                let attempt = match classify_dataset_child(
                    path.last_segment().expect("part paths have a segment"),
                ) {
                    DatasetChild::Part { attempt, .. } => attempt,
                    DatasetChild::SuccessMarker => None,
                };
                (part, path, attempt)
            })
            .collect()
    } else {
        resolve_by_listing(&reader, dataset)?
    };

    let mut parts = BTreeMap::new();
    for (part, path, attempt) in chosen {
        match reader.open(&path) {
            Ok(input) => {
                parts.insert(
                    part,
                    PartRead {
                        path,
                        attempt,
                        length: input.length,
                        data: input.data,
                    },
                );
            }
            // A resolved name that vanished reads as a missing part, not an
            // error; completeness checks downstream surface it.
            Err(e) if e.is_not_found() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(DatasetRead {
        success_present: true,
        parts,
    })
}

/// One candidate per part from a directory listing: most data first, then
/// highest attempt number (plain names rank lowest), then name.
fn resolve_by_listing(
    reader: &impl ObjectFilesystem,
    dataset: &FsPath,
) -> Result<Vec<(String, FsPath, Option<AttemptId>)>, FsError> {
    let statuses = reader.list_status(dataset)?;
    let mut best: BTreeMap<String, (u64, i64, String, FsPath, Option<AttemptId>)> = BTreeMap::new();
    for status in statuses {
        if status.is_directory {
            continue;
        }
        let segment = match status.path.last_segment() {
            Some(s) => s.to_string(),
            None => continue,
        };
        if segment == SUCCESS_NAME {
            continue;
        }
        let (part, attempt) = match classify_dataset_child(&segment) {
            DatasetChild::SuccessMarker => continue,
            DatasetChild::Part { part, attempt } => (part, attempt),
        };
        let rank = attempt
            .as_ref()
            .map_or(-1, |a| i64::from(a.attempt_number()));
        let replace = match best.get(&part) {
            Some((len, r, seg, _, _)) => {
                (status.length, rank, segment.as_str()) > (*len, *r, seg.as_str())
            }
            None => true,
        };
        if replace {
            best.insert(part, (status.length, rank, segment, status.path, attempt));
        }
    }
    Ok(best
        .into_iter()
        .map(|(part, (_, _, _, path, attempt))| (part, path, attempt))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connector::stocator::{
        CommittedParts, StocatorConfig, WRITTEN_BY_KEY, WRITTEN_BY_VALUE,
    };
    use crate::store::{ConsistencyPolicy, Metadata, ObjectKey};

    fn ds() -> FsPath {
        FsPath::parse("swift2d://res/data.txt").unwrap()
    }

    fn stocator_spec() -> ConnectorSpec {
        ConnectorSpec::Stocator(StocatorConfig::default())
    }

    fn put(store: &ObjectStore, name: &str, body: &[u8]) {
        store
            .put_object(ObjectKey::new("res", name).unwrap(), body, Metadata::new())
            .unwrap();
    }

    fn put_marked_dataset(store: &ObjectStore) {
        let mut metadata = Metadata::new();
        metadata.insert(WRITTEN_BY_KEY.into(), WRITTEN_BY_VALUE.into());
        store
            .put_object(ObjectKey::new("res", "data.txt").unwrap(), b"", metadata)
            .unwrap();
    }

    #[test]
    fn no_success_marker_reads_as_nothing() {
        let store = ObjectStore::new(ConsistencyPolicy::strong());
        put_marked_dataset(&store);
        put(
            &store,
            "data.txt/part-00000_attempt_201512062056_0000_m_000000_0",
            b"ab",
        );
        let read = read_dataset(&store, &stocator_spec(), &ds()).unwrap();
        assert!(!read.success_present);
        assert!(read.parts.is_empty());
    }

    #[test]
    fn duplicate_attempts_resolve_to_most_data_then_highest_attempt() {
        let store = ObjectStore::new(ConsistencyPolicy::strong());
        put_marked_dataset(&store);
        put(
            &store,
            "data.txt/part-00000_attempt_201512062056_0000_m_000000_0",
            b"longer-body",
        );
        put(
            &store,
            "data.txt/part-00000_attempt_201512062056_0000_m_000000_1",
            b"short",
        );
        put(
            &store,
            "data.txt/part-00001_attempt_201512062056_0000_m_000001_0",
            b"tie",
        );
        put(
            &store,
            "data.txt/part-00001_attempt_201512062056_0000_m_000001_2",
            b"tie",
        );
        put(&store, "data.txt/_SUCCESS", b"");

        let read = read_dataset(&store, &stocator_spec(), &ds()).unwrap();
        assert!(read.success_present);
        assert_eq!(read.parts.len(), 2);
        let p0 = &read.parts["part-00000"];
        assert_eq!(p0.attempt.as_ref().unwrap().attempt_number(), 0);
        assert_eq!(p0.data.as_slice(), b"longer-body");
        let p1 = &read.parts["part-00001"];
        assert_eq!(p1.attempt.as_ref().unwrap().attempt_number(), 2);
    }

    #[test]
    fn manifest_mode_ignores_unlisted_garbage() {
        let store = ObjectStore::new(ConsistencyPolicy::strong());
        put_marked_dataset(&store);
        put(
            &store,
            "data.txt/part-00000_attempt_201512062056_0000_m_000000_1",
            b"winner",
        );
        // Garbage with more data and a higher attempt number; the manifest
        // still names attempt 1.
        put(
            &store,
            "data.txt/part-00000_attempt_201512062056_0000_m_000000_2",
            b"garbage-garbage",
        );
        let mut committed = CommittedParts::new();
        committed.insert(
            "part-00000".into(),
            AttemptId::new("201512062056", "000000", 1).unwrap(),
        );
        let manifest = crate::connector::stocator::SuccessManifest::new(committed).to_bytes();
        put(&store, "data.txt/_SUCCESS", &manifest);

        let spec = ConnectorSpec::Stocator(StocatorConfig::with_read_option(ReadOption::Manifest));
        let read = read_dataset(&store, &spec, &ds()).unwrap();
        assert_eq!(read.parts.len(), 1);
        assert_eq!(read.parts["part-00000"].data.as_slice(), b"winner");
        assert_eq!(
            read.parts["part-00000"]
                .attempt
                .as_ref()
                .unwrap()
                .attempt_number(),
            1
        );
    }
}
