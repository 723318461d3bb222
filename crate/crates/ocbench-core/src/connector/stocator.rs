//! Rename-free connector.
//!
//! The commit protocol believes it is staging task output under
//! `<dataset>/_temporary/...` and renaming survivors into place. This
//! connector absorbs that entire dance: temporary directories never become
//! objects, a task part file is written straight to its final
//! `<dataset>/part-..._attempt_...` name, renames out of the temporary tree
//! are no-ops, and aborting an attempt deletes the attempt's final name.
//! What remains on the wire is one PUT per part plus the markers, which is
//! the point.
//!
//! Reads resolve ownership instead of trusting renames: a dataset lists as
//! the best attempt per part (most data, then highest attempt number), or,
//! under the manifest read option, as exactly the attempts recorded in the
//! `_SUCCESS` body, which makes the read path immune to listing lag.
//!
//! Every instance carries a small positive-result HEAD cache, fed by its own
//! probes and writes. HEADs for objects this instance created are answered
//! locally, which is what collapses the status-then-open sequence to a single
//! GET and keeps repeated marker probes from hitting the store.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use crate::fs::naming::{
    self, classify_dataset_child, match_temp_pattern, split_temporary, AttemptId, DatasetChild,
    TempDepth,
};
use crate::fs::{
    CreateOptions, FileStatus, FsDataInput, FsDataOutput, FsError, FsPath, ObjectFilesystem,
};
use crate::store::{Metadata, ObjectKey, ObjectStore, StoreError};

/// Metadata key stamped on dataset markers.
pub const WRITTEN_BY_KEY: &str = "written-by";
/// Marker value identifying datasets this connector laid out.
pub const WRITTEN_BY_VALUE: &str = "stocator";

/// How readers decide which attempt owns each part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ReadOption {
    /// `_SUCCESS` is zero-byte; readers list the dataset and pick the best
    /// attempt per part. Subject to listing lag.
    Listing,
    /// `_SUCCESS` carries the committed-part manifest; readers compose final
    /// names from it and never list. Immune to listing lag.
    Manifest,
}

/// Committed attempts per part name, as the committer hands them over.
pub type CommittedParts = BTreeMap<String, AttemptId>;

#[derive(Debug, Clone, PartialEq)]
pub struct StocatorConfig {
    pub read_option: ReadOption,
    /// Upload buffer size: the writer stages at most this many bytes before
    /// pushing them down the (chunked-transfer) PUT.
    pub chunk_size: usize,
    /// HEAD cache capacity, entries.
    pub cache_capacity: usize,
}

impl Default for StocatorConfig {
    fn default() -> Self {
        Self {
            read_option: ReadOption::Listing,
            chunk_size: 8 * 1024,
            cache_capacity: 1024,
        }
    }
}

impl StocatorConfig {
    pub fn with_read_option(read_option: ReadOption) -> Self {
        Self {
            read_option,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), FsError> {
        if self.chunk_size == 0 {
            return Err(FsError::Unsupported("chunk_size must be positive".into()));
        }
        if self.cache_capacity == 0 {
            return Err(FsError::Unsupported(
                "cache_capacity must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `_SUCCESS` manifest: one line per part, `<part> <ts> <task> <attempt>`,
/// sorted by part name. Line-oriented text so partial reads fail loudly.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SuccessManifest {
    entries: CommittedParts,
}

impl SuccessManifest {
    pub fn new(entries: CommittedParts) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &CommittedParts {
        &self.entries
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = String::new();
        for (part, attempt) in &self.entries {
            out.push_str(&format!(
                "{part} {} {} {}\n",
                attempt.job_timestamp(),
                attempt.task_number(),
                attempt.attempt_number()
            ));
        }
        out.into_bytes()
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, FsError> {
        let text =
            std::str::from_utf8(bytes).map_err(|_| FsError::CorruptManifest("not utf-8".into()))?;
        let mut entries = CommittedParts::new();
        for line in text.lines() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            if fields.len() != 4 {
                return Err(FsError::CorruptManifest(format!(
                    "expected 4 fields: {line:?}"
                )));
            }
            let attempt_number: u32 = fields[3]
                .parse()
                .map_err(|_| FsError::CorruptManifest(format!("bad attempt number: {line:?}")))?;
            let attempt = AttemptId::new(fields[1], fields[2], attempt_number)
                .map_err(|e| FsError::CorruptManifest(e.to_string()))?;
            if entries.insert(fields[0].to_string(), attempt).is_some() {
                return Err(FsError::CorruptManifest(format!(
                    "duplicate part: {:?}",
                    fields[0]
                )));
            }
        }
        Ok(Self { entries })
    }
}

#[derive(Debug, Clone)]
struct CachedHead {
    length: u64,
    metadata: Metadata,
    modified_at: u64,
}

/// Positive-results-only LRU over HEAD responses. Misses are never cached
/// (the object may appear a tick later); entries are inserted by real HEAD
/// hits and by this instance's own writes, and evicted only by capacity or
/// by this instance deleting the key.
#[derive(Debug)]
struct HeadCache {
    capacity: usize,
    seq: u64,
    entries: BTreeMap<ObjectKey, (u64, CachedHead)>,
    order: BTreeMap<u64, ObjectKey>,
}

impl HeadCache {
    fn new(capacity: usize) -> Self {
        Self {
            capacity,
            seq: 0,
            entries: BTreeMap::new(),
            order: BTreeMap::new(),
        }
    }

    fn get(&mut self, key: &ObjectKey) -> Option<CachedHead> {
        let (old_seq, head) = self.entries.get(key)?.clone();
        self.order.remove(&old_seq);
        self.seq += 1;
        self.order.insert(self.seq, key.clone());
        self.entries.insert(key.clone(), (self.seq, head.clone()));
        Some(head)
    }

    fn insert(&mut self, key: ObjectKey, head: CachedHead) {
        if let Some((old_seq, _)) = self.entries.get(&key) {
            self.order.remove(old_seq);
        }
        self.seq += 1;
        self.order.insert(self.seq, key.clone());
        self.entries.insert(key, (self.seq, head));
        while self.entries.len() > self.capacity {
            let (_, oldest) = self.order.pop_first().expect("order tracks entries");
            self.entries.remove(&oldest);
        }
    }

    fn remove(&mut self, key: &ObjectKey) {
        if let Some((seq, _)) = self.entries.remove(key) {
            self.order.remove(&seq);
        }
    }
}

pub struct StocatorFs {
    store: ObjectStore,
    config: StocatorConfig,
    cache: Arc<Mutex<HeadCache>>,
}

impl StocatorFs {
    pub fn new(store: ObjectStore, config: StocatorConfig) -> Self {
        let cache = Arc::new(Mutex::new(HeadCache::new(config.cache_capacity)));
        Self {
            store,
            config,
            cache,
        }
    }

    pub fn read_option(&self) -> ReadOption {
        self.config.read_option
    }

    /// HEAD through the cache. A hit costs nothing; a real HEAD is issued on
    /// miss and cached only when the object exists.
    fn head_cached(&self, key: &ObjectKey) -> Result<Option<CachedHead>, FsError> {
        if let Some(head) = self.cache.lock().expect("cache lock").get(key) {
            return Ok(Some(head));
        }
        match self.store.head_object(key) {
            Ok(result) => {
                let head = CachedHead {
                    length: result.length,
                    metadata: result.metadata,
                    modified_at: result.created_at,
                };
                self.cache
                    .lock()
                    .expect("cache lock")
                    .insert(key.clone(), head.clone());
                Ok(Some(head))
            }
            Err(StoreError::NotFound(_)) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn cache_own_write(&self, key: ObjectKey, length: u64, metadata: Metadata) {
        let modified_at = self.store.now();
        self.cache.lock().expect("cache lock").insert(
            key,
            CachedHead {
                length,
                metadata,
                modified_at,
            },
        );
    }

    /// Ensure the dataset marker object exists: a zero-byte object at the
    /// dataset path stamped `written-by`, which is how readers later tell
    /// that attempt-suffix resolution applies.
    fn ensure_dataset_marker(&self, dataset: &FsPath) -> Result<(), FsError> {
        if dataset.is_container_root() {
            return Ok(());
        }
        let key = dataset.object_key()?;
        if self.head_cached(&key)?.is_some() {
            return Ok(());
        }
        let mut metadata = Metadata::new();
        metadata.insert(WRITTEN_BY_KEY.into(), WRITTEN_BY_VALUE.into());
        self.store.put_object(key.clone(), b"", metadata.clone())?;
        self.cache_own_write(key, 0, metadata);
        Ok(())
    }

    fn is_marked_dataset(&self, path: &FsPath) -> Result<bool, FsError> {
        if path.is_container_root() {
            return Ok(false);
        }
        Ok(self
            .head_cached(&path.object_key()?)?
            .map(|h| h.metadata.get(WRITTEN_BY_KEY).map(String::as_str) == Some(WRITTEN_BY_VALUE))
            .unwrap_or(false))
    }

    /// Pick the owning object per part among the dataset's direct children:
    /// most data wins, ties go to the highest attempt number (plain names
    /// rank below any attempt-suffixed name).
    fn resolve_listing(&self, dataset: &FsPath) -> Result<Vec<FileStatus>, FsError> {
        let prefix = format!("{}/", dataset.object_name());
        let listing = self
            .store
            .list_container(dataset.container(), &prefix, Some('/'));
        let mut best: BTreeMap<String, (u64, i64, FileStatus)> = BTreeMap::new();
        for entry in listing.entries {
            let segment = entry.name.rsplit('/').next().expect("non-empty name");
            let (part, attempt) = match classify_dataset_child(segment) {
                DatasetChild::SuccessMarker => continue,
                DatasetChild::Part { part, attempt } => (part, attempt),
            };
            let rank = attempt
                .as_ref()
                .map_or(-1, |a| i64::from(a.attempt_number()));
            let status = FileStatus::file(dataset.child(segment), entry.length, entry.modified_at);
            let candidate = (entry.length, rank, status);
            match best.get(&part) {
                Some((len, r, _)) if (*len, *r) >= (candidate.0, candidate.1) => {}
                _ => {
                    best.insert(part, candidate);
                }
            }
        }
        Ok(best.into_values().map(|(_, _, status)| status).collect())
    }

    fn literal_listing(&self, path: &FsPath) -> Result<Vec<FileStatus>, FsError> {
        let prefix = if path.is_container_root() {
            String::new()
        } else {
            format!("{}/", path.object_name())
        };
        let listing = self
            .store
            .list_container(path.container(), &prefix, Some('/'));
        let mut out = Vec::new();
        for entry in &listing.entries {
            let segment = entry.name.rsplit('/').next().expect("non-empty name");
            out.push(FileStatus::file(
                path.child(segment),
                entry.length,
                entry.modified_at,
            ));
        }
        for folded in &listing.common_prefixes {
            let segment = folded
                .trim_end_matches('/')
                .rsplit('/')
                .next()
                .expect("non-empty prefix");
            out.push(FileStatus::directory(path.child(segment), 0));
        }
        out.sort_by(|a, b| a.path.cmp(&b.path));
        (!out.is_empty() || path.is_container_root())
            .then_some(out)
            .ok_or_else(|| FsError::NotFound(path.to_string()))
    }

    /// Write `_SUCCESS` for a committed job. Zero-byte under the listing read
    /// option; the committed-parts manifest under the manifest option.
    pub fn write_success(
        &self,
        dataset: &FsPath,
        committed: &CommittedParts,
    ) -> Result<(), FsError> {
        let body = match self.config.read_option {
            ReadOption::Listing => Vec::new(),
            ReadOption::Manifest => SuccessManifest::new(committed.clone()).to_bytes(),
        };
        let path = naming::success_path(dataset);
        let key = path.object_key()?;
        if self.head_cached(&key)?.is_some() {
            return Err(FsError::AlreadyExists(path.to_string()));
        }
        self.store.put_object(key.clone(), &body, Metadata::new())?;
        self.cache_own_write(key, body.len() as u64, Metadata::new());
        Ok(())
    }

    /// Resolve parts from the `_SUCCESS` manifest: one GET, no listing, final
    /// names composed from the recorded attempts.
    pub fn resolve_via_manifest(&self, dataset: &FsPath) -> Result<Vec<(String, FsPath)>, FsError> {
        let path = naming::success_path(dataset);
        let key = path.object_key()?;
        let body = self
            .store
            .get_object(&key)
            .map_err(|_| FsError::NotFound(path.to_string()))?;
        let manifest = SuccessManifest::parse(&body.data)?;
        Ok(manifest
            .entries
            .iter()
            .map(|(part, attempt)| {
                (
                    part.clone(),
                    naming::final_part_path(dataset, attempt, part),
                )
            })
            .collect())
    }
}

impl ObjectFilesystem for StocatorFs {
    /// Temporary-tree paths report absent without any store traffic: the
    /// commit protocol's probes of its own scratch space cost nothing.
    fn exists(&self, path: &FsPath) -> Result<bool, FsError> {
        if path.is_container_root() {
            return Ok(true);
        }
        if split_temporary(path).is_some() {
            return Ok(false);
        }
        Ok(self.head_cached(&path.object_key()?)?.is_some())
    }

    fn get_file_status(&self, path: &FsPath) -> Result<FileStatus, FsError> {
        if path.is_container_root() {
            return Ok(FileStatus::directory(path.clone(), 0));
        }
        if split_temporary(path).is_some() {
            return Err(FsError::NotFound(path.to_string()));
        }
        match self.head_cached(&path.object_key()?)? {
            Some(head) => {
                if head.metadata.contains_key(WRITTEN_BY_KEY) {
                    Ok(FileStatus::directory(path.clone(), head.modified_at))
                } else {
                    Ok(FileStatus::file(
                        path.clone(),
                        head.length,
                        head.modified_at,
                    ))
                }
            }
            None => Err(FsError::NotFound(path.to_string())),
        }
    }

    /// One GET, no HEAD: length and metadata ride on the GET response, and
    /// the result primes the cache so a later status probe is free.
    fn open(&self, path: &FsPath) -> Result<FsDataInput, FsError> {
        if split_temporary(path).is_some() {
            return Err(FsError::NotFound(path.to_string()));
        }
        let key = path.object_key()?;
        let got = self
            .store
            .get_object(&key)
            .map_err(|_| FsError::NotFound(path.to_string()))?;
        let length = got.data.len() as u64;
        self.cache.lock().expect("cache lock").insert(
            key,
            CachedHead {
                length,
                metadata: got.metadata.clone(),
                modified_at: got.created_at,
            },
        );
        Ok(FsDataInput {
            data: got.data,
            metadata: got.metadata,
            length,
        })
    }

    /// Task part files under the temporary tree are rewritten to their final
    /// attempt-qualified name; everything else is written literally. Unless
    /// overwriting, a single HEAD probes the target first.
    fn create(&self, path: &FsPath, opts: CreateOptions) -> Result<Box<dyn FsDataOutput>, FsError> {
        let target = match match_temp_pattern(path) {
            Some(m) if m.depth == TempDepth::PartFile => naming::final_part_path(
                &m.dataset,
                m.attempt.as_ref().expect("part match has attempt"),
                m.part.as_deref().expect("part match has part"),
            ),
            Some(_) => {
                return Err(FsError::Unsupported(format!(
                    "create targets a temporary directory: {path}"
                )))
            }
            None if split_temporary(path).is_some() => {
                return Err(FsError::Unsupported(format!(
                    "create inside an unrecognized temporary shape: {path}"
                )))
            }
            None => path.clone(),
        };
        let key = target.object_key()?;
        if !opts.overwrite && self.head_cached(&key)?.is_some() {
            return Err(FsError::AlreadyExists(target.to_string()));
        }
        Ok(Box::new(StocatorOutput {
            stream: Some(self.store.begin_put(key.clone(), Metadata::new())),
            store: self.store.clone(),
            cache: Arc::clone(&self.cache),
            key,
            buf: Vec::with_capacity(self.config.chunk_size),
            chunk_size: self.config.chunk_size,
            written: 0,
        }))
    }

    /// Renames out of the temporary tree are the committer's moves; they are
    /// absorbed as successful no-ops because the data already lives at its
    /// final name. A genuine rename of a plain object is COPY plus DELETE.
    fn rename(&self, src: &FsPath, dst: &FsPath) -> Result<bool, FsError> {
        if split_temporary(src).is_some() {
            return Ok(true);
        }
        let src_key = src.object_key()?;
        let dst_key = dst.object_key()?;
        match self.store.copy_object(&src_key, &dst_key) {
            Ok(()) => {
                self.store.delete_object(&src_key)?;
                let mut cache = self.cache.lock().expect("cache lock");
                cache.remove(&src_key);
                Ok(true)
            }
            Err(StoreError::NotFound(_)) => Ok(false),
            Err(e) => Err(e.into()),
        }
    }

    /// Deleting a temporary part file aborts that attempt: the DELETE lands
    /// on the attempt's final name. Other temporary paths are absorbed.
    fn delete(&self, path: &FsPath, recursive: bool) -> Result<bool, FsError> {
        if let Some(m) = match_temp_pattern(path) {
            if m.depth == TempDepth::PartFile {
                let target = naming::final_part_path(
                    &m.dataset,
                    m.attempt.as_ref().expect("part match has attempt"),
                    m.part.as_deref().expect("part match has part"),
                );
                let key = target.object_key()?;
                return match self.store.delete_object(&key) {
                    Ok(()) => {
                        self.cache.lock().expect("cache lock").remove(&key);
                        Ok(true)
                    }
                    Err(StoreError::NotFound(_)) => Ok(false),
                    Err(e) => Err(e.into()),
                };
            }
        }
        if split_temporary(path).is_some() {
            return Ok(true);
        }
        if path.is_container_root() {
            return Err(FsError::Unsupported("delete of container root".into()));
        }
        let key = path.object_key()?;
        let mut removed = false;
        if recursive {
            let prefix = format!("{}/", path.object_name());
            let listing = self.store.list_container(path.container(), &prefix, None);
            for entry in listing.entries {
                let child = ObjectKey::new(path.container(), entry.name)?;
                if self.store.delete_object(&child).is_ok() {
                    self.cache.lock().expect("cache lock").remove(&child);
                    removed = true;
                }
            }
        }
        match self.store.delete_object(&key) {
            Ok(()) => {
                self.cache.lock().expect("cache lock").remove(&key);
                Ok(true)
            }
            Err(StoreError::NotFound(_)) => Ok(removed),
            Err(e) => Err(e.into()),
        }
    }

    /// Listing a marked dataset resolves parts; an unmarked path lists
    /// literally (plain objects and folded prefixes). Temporary paths list
    /// empty at zero cost. Datasets without `_SUCCESS` list empty: the job
    /// is still running and nothing is readable yet.
    fn list_status(&self, path: &FsPath) -> Result<Vec<FileStatus>, FsError> {
        if split_temporary(path).is_some() {
            return Ok(Vec::new());
        }
        if !path.is_container_root() && self.is_marked_dataset(path)? {
            let success = naming::success_path(path).object_key()?;
            if self.head_cached(&success)?.is_none() {
                return Ok(Vec::new());
            }
            return self.resolve_listing(path);
        }
        self.literal_listing(path)
    }

    /// Any mkdirs inside the temporary tree collapses to "make sure the
    /// dataset marker exists". Non-temporary paths get a plain zero-byte
    /// marker, created with the same probe-then-put sequence.
    fn mkdirs(&self, path: &FsPath) -> Result<bool, FsError> {
        if path.is_container_root() {
            return Ok(true);
        }
        if let Some((dataset, _)) = split_temporary(path) {
            self.ensure_dataset_marker(&dataset)?;
            return Ok(true);
        }
        let key = path.object_key()?;
        if self.head_cached(&key)?.is_none() {
            self.store.put_object(key.clone(), b"", Metadata::new())?;
            self.cache_own_write(key, 0, Metadata::new());
        }
        Ok(true)
    }
}

/// Chunked-transfer writer: at most `chunk_size` bytes are staged before
/// being pushed down the wire, so peak client memory stays at one chunk no
/// matter the body size. Dropping the writer aborts the PUT.
struct StocatorOutput {
    stream: Option<crate::store::PutStream>,
    store: ObjectStore,
    cache: Arc<Mutex<HeadCache>>,
    key: ObjectKey,
    buf: Vec<u8>,
    chunk_size: usize,
    written: u64,
}

impl FsDataOutput for StocatorOutput {
    fn write(&mut self, mut buf: &[u8]) -> Result<(), FsError> {
        let stream = self
            .stream
            .as_mut()
            .ok_or_else(|| FsError::StreamClosed(self.key.to_string()))?;
        while !buf.is_empty() {
            let room = self.chunk_size - self.buf.len();
            let take = room.min(buf.len());
            self.buf.extend_from_slice(&buf[..take]);
            buf = &buf[take..];
            self.store.note_staged(self.buf.len() as u64);
            if self.buf.len() == self.chunk_size {
                stream.push_chunk(&self.buf);
                self.written += self.buf.len() as u64;
                self.buf.clear();
            }
        }
        Ok(())
    }

    fn close(&mut self) -> Result<(), FsError> {
        let mut stream = self
            .stream
            .take()
            .ok_or_else(|| FsError::StreamClosed(self.key.to_string()))?;
        if !self.buf.is_empty() {
            stream.push_chunk(&self.buf);
            self.written += self.buf.len() as u64;
            self.buf.clear();
        }
        stream.finish()?;
        let modified_at = self.store.now();
        self.cache.lock().expect("cache lock").insert(
            self.key.clone(),
            CachedHead {
                length: self.written,
                metadata: Metadata::new(),
                modified_at,
            },
        );
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{ConsistencyPolicy, RestOpKind};

    fn setup() -> (ObjectStore, StocatorFs) {
        let store = ObjectStore::new(ConsistencyPolicy::strong());
        let fs = StocatorFs::new(store.clone(), StocatorConfig::default());
        (store, fs)
    }

    fn p(uri: &str) -> FsPath {
        FsPath::parse(uri).unwrap()
    }

    const DS: &str = "swift2d://res/data.txt";

    fn attempt(n: u32) -> AttemptId {
        AttemptId::new("201512062056", "000000", n).unwrap()
    }

    #[test]
    fn temp_paths_report_absent_for_free() {
        let (store, fs) = setup();
        assert!(!fs.exists(&p(&format!("{DS}/_temporary/0"))).unwrap());
        assert!(fs
            .get_file_status(&p(&format!("{DS}/_temporary/0/_temporary")))
            .is_err());
        assert_eq!(store.tally().total_ops(), 0);
    }

    #[test]
    fn mkdirs_of_job_temp_probes_then_marks_the_dataset() {
        let (store, fs) = setup();
        assert!(fs.mkdirs(&p(&format!("{DS}/_temporary/0"))).unwrap());
        let tally = store.tally();
        assert_eq!(tally.count(RestOpKind::HeadObject), 1);
        assert_eq!(tally.count(RestOpKind::PutObject), 1);

        let head = store
            .head_object(&ObjectKey::new("res", "data.txt").unwrap())
            .unwrap();
        assert_eq!(head.length, 0);
        assert_eq!(
            head.metadata.get(WRITTEN_BY_KEY).map(String::as_str),
            Some(WRITTEN_BY_VALUE)
        );
    }

    #[test]
    fn repeated_mkdirs_is_served_from_the_cache() {
        let (store, fs) = setup();
        fs.mkdirs(&p(&format!("{DS}/_temporary/0"))).unwrap();
        let before = store.tally();
        fs.mkdirs(&p(&format!(
            "{DS}/_temporary/0/_temporary/attempt_201512062056_0000_m_000000_0"
        )))
        .unwrap();
        fs.mkdirs(&p(&format!("{DS}/_temporary/0"))).unwrap();
        assert_eq!(store.tally(), before);
    }

    #[test]
    fn fresh_instance_mkdirs_heads_the_existing_marker_once() {
        let (store, fs) = setup();
        fs.mkdirs(&p(&format!("{DS}/_temporary/0"))).unwrap();

        let executor = StocatorFs::new(store.clone(), StocatorConfig::default());
        let before = store.tally();
        executor
            .mkdirs(&p(&format!(
                "{DS}/_temporary/0/_temporary/attempt_201512062056_0000_m_000000_0"
            )))
            .unwrap();
        let delta = store.tally().since(&before);
        assert_eq!(delta.count(RestOpKind::HeadObject), 1);
        assert_eq!(delta.count(RestOpKind::PutObject), 0);
    }

    #[test]
    fn create_of_a_task_part_lands_on_the_final_name() {
        let (store, fs) = setup();
        let temp = naming::attempt_part_path(&p(DS), &attempt(0), "part-00000");
        let mut out = fs.create(&temp, CreateOptions::default()).unwrap();
        out.write(b"hello").unwrap();
        out.close().unwrap();

        let final_key = ObjectKey::new(
            "res",
            "data.txt/part-00000_attempt_201512062056_0000_m_000000_0",
        )
        .unwrap();
        assert_eq!(
            store.get_object(&final_key).unwrap().data.as_slice(),
            b"hello"
        );
        let tally = store.tally();
        // One probe HEAD on the final name, one PUT, nothing else.
        assert_eq!(tally.count(RestOpKind::HeadObject), 1);
        assert_eq!(tally.count(RestOpKind::PutObject), 1);
        assert_eq!(tally.count(RestOpKind::GetObject), 1); // our verification GET
    }

    #[test]
    fn create_with_overwrite_skips_the_probe() {
        let (store, fs) = setup();
        let mut out = fs
            .create(
                &p(&format!("{DS}/raw-object")),
                CreateOptions::overwrite(true),
            )
            .unwrap();
        out.write(b"x").unwrap();
        out.close().unwrap();
        assert_eq!(store.tally().count(RestOpKind::HeadObject), 0);
        assert_eq!(store.tally().count(RestOpKind::PutObject), 1);
    }

    #[test]
    fn create_refuses_existing_target_without_overwrite() {
        let (_store, fs) = setup();
        let path = p(&format!("{DS}/raw-object"));
        let mut out = fs.create(&path, CreateOptions::overwrite(true)).unwrap();
        out.write(b"x").unwrap();
        out.close().unwrap();
        assert!(matches!(
            fs.create(&path, CreateOptions::default()),
            Err(FsError::AlreadyExists(_))
        ));
    }

    #[test]
    fn writer_stages_at_most_one_chunk() {
        let (store, fs) = setup();
        let config = StocatorConfig::default();
        let body = vec![7u8; config.chunk_size * 12 + 100];
        let mut out = fs
            .create(&p(&format!("{DS}/big")), CreateOptions::overwrite(true))
            .unwrap();
        out.write(&body).unwrap();
        out.close().unwrap();
        let tally = store.tally();
        assert!(tally.peak_staged <= config.chunk_size as u64);
        assert_eq!(tally.count(RestOpKind::PutObject), 1);
        assert_eq!(tally.bytes_put, body.len() as u64);
    }

    #[test]
    fn dropped_writer_leaves_nothing() {
        let (store, fs) = setup();
        {
            let mut out = fs
                .create(&p(&format!("{DS}/partial")), CreateOptions::overwrite(true))
                .unwrap();
            out.write(b"half-written").unwrap();
        }
        assert_eq!(store.tally().count(RestOpKind::PutObject), 0);
        assert!(!fs.exists(&p(&format!("{DS}/partial"))).unwrap());
    }

    #[test]
    fn rename_out_of_the_temporary_tree_is_a_free_no_op() {
        let (store, fs) = setup();
        let src = naming::attempt_part_path(&p(DS), &attempt(0), "part-00000");
        let dst = p(&format!("{DS}/part-00000"));
        assert!(fs.rename(&src, &dst).unwrap());
        let task_src = p(&format!(
            "{DS}/_temporary/0/task_201512062056_0000_m_000000/part-00000"
        ));
        assert!(fs.rename(&task_src, &dst).unwrap());
        assert_eq!(store.tally().total_ops(), 0);
    }

    #[test]
    fn rename_of_a_plain_object_is_copy_plus_delete() {
        let (store, fs) = setup();
        store
            .put_object(
                ObjectKey::new("res", "a").unwrap(),
                b"body",
                Metadata::new(),
            )
            .unwrap();
        store.reset_metering();
        assert!(fs
            .rename(&p("swift2d://res/a"), &p("swift2d://res/b"))
            .unwrap());
        let tally = store.tally();
        assert_eq!(tally.count(RestOpKind::CopyObject), 1);
        assert_eq!(tally.count(RestOpKind::DeleteObject), 1);
        assert!(fs.exists(&p("swift2d://res/b")).unwrap());
    }

    #[test]
    fn rename_of_a_missing_plain_object_reports_false() {
        let (store, fs) = setup();
        assert!(!fs
            .rename(&p("swift2d://res/a"), &p("swift2d://res/b"))
            .unwrap());
        assert_eq!(store.tally().count(RestOpKind::CopyObject), 0);
    }

    #[test]
    fn delete_of_a_temp_part_aborts_the_attempts_final_name() {
        let (store, fs) = setup();
        let temp = naming::attempt_part_path(&p(DS), &attempt(2), "part-00002");
        let mut out = fs.create(&temp, CreateOptions::default()).unwrap();
        out.write(b"data").unwrap();
        out.close().unwrap();
        store.reset_metering();

        assert!(fs.delete(&temp, false).unwrap());
        let tally = store.tally();
        assert_eq!(tally.count(RestOpKind::DeleteObject), 1);
        assert_eq!(tally.total_ops(), 1);
        let events = store.trace();
        assert_eq!(
            events[0].render(),
            "DELETE /res/data.txt/part-00002_attempt_201512062056_0000_m_000000_2"
        );
    }

    #[test]
    fn delete_of_temp_directories_is_absorbed() {
        let (store, fs) = setup();
        assert!(fs.delete(&p(&format!("{DS}/_temporary")), true).unwrap());
        assert!(fs
            .delete(
                &p(&format!(
                    "{DS}/_temporary/0/_temporary/attempt_201512062056_0000_m_000000_0"
                )),
                true
            )
            .unwrap());
        assert_eq!(store.tally().total_ops(), 0);
    }

    #[test]
    fn status_then_open_costs_one_head_and_one_get() {
        let (store, fs) = setup();
        store
            .put_object(
                ObjectKey::new("res", "obj").unwrap(),
                b"12345",
                Metadata::new(),
            )
            .unwrap();
        store.reset_metering();

        let status = fs.get_file_status(&p("swift2d://res/obj")).unwrap();
        assert_eq!(status.length, 5);
        let input = fs.open(&p("swift2d://res/obj")).unwrap();
        assert_eq!(input.data.as_slice(), b"12345");

        let tally = store.tally();
        assert_eq!(tally.count(RestOpKind::HeadObject), 1);
        assert_eq!(tally.count(RestOpKind::GetObject), 1);
        assert_eq!(tally.total_ops(), 2);
    }

    #[test]
    fn open_then_status_costs_one_get_only() {
        let (store, fs) = setup();
        store
            .put_object(
                ObjectKey::new("res", "obj").unwrap(),
                b"12345",
                Metadata::new(),
            )
            .unwrap();
        store.reset_metering();

        fs.open(&p("swift2d://res/obj")).unwrap();
        let status = fs.get_file_status(&p("swift2d://res/obj")).unwrap();
        assert_eq!(status.length, 5);

        let tally = store.tally();
        assert_eq!(tally.count(RestOpKind::GetObject), 1);
        assert_eq!(tally.count(RestOpKind::HeadObject), 0);
    }

    fn write_marked_dataset(fs: &StocatorFs, parts: &[(&str, u32, &[u8])]) {
        fs.mkdirs(&p(&format!("{DS}/_temporary/0"))).unwrap();
        let mut committed = CommittedParts::new();
        for (part, n, body) in parts {
            let temp = naming::attempt_part_path(&p(DS), &attempt(*n), part);
            let mut out = fs.create(&temp, CreateOptions::default()).unwrap();
            out.write(body).unwrap();
            out.close().unwrap();
            committed.insert(part.to_string(), attempt(*n));
        }
        fs.write_success(&p(DS), &committed).unwrap();
    }

    #[test]
    fn listing_resolution_groups_by_part_and_prefers_most_data() {
        let (store, fs) = setup();
        write_marked_dataset(&fs, &[("part-00000", 0, b"full-body")]);
        // A shorter stray attempt for the same part loses on size.
        let stray = naming::attempt_part_path(&p(DS), &attempt(1), "part-00000");
        let mut out = fs.create(&stray, CreateOptions::default()).unwrap();
        out.write(b"x").unwrap();
        out.close().unwrap();

        let reader = StocatorFs::new(store.clone(), StocatorConfig::default());
        let statuses = reader.list_status(&p(DS)).unwrap();
        assert_eq!(statuses.len(), 1);
        assert_eq!(
            statuses[0].path.to_string(),
            format!("{DS}/part-00000_attempt_201512062056_0000_m_000000_0")
        );
        assert_eq!(statuses[0].length, 9);
    }

    #[test]
    fn listing_resolution_breaks_size_ties_by_highest_attempt() {
        let (store, fs) = setup();
        write_marked_dataset(&fs, &[("part-00002", 0, b"same-size")]);
        for n in [1, 2] {
            let path = naming::attempt_part_path(&p(DS), &attempt(n), "part-00002");
            let mut out = fs.create(&path, CreateOptions::default()).unwrap();
            out.write(b"same-size").unwrap();
            out.close().unwrap();
        }

        let reader = StocatorFs::new(store, StocatorConfig::default());
        let statuses = reader.list_status(&p(DS)).unwrap();
        assert_eq!(statuses.len(), 1);
        assert_eq!(
            statuses[0].path.to_string(),
            format!("{DS}/part-00002_attempt_201512062056_0000_m_000000_2")
        );
    }

    #[test]
    fn dataset_without_success_lists_empty() {
        let (store, fs) = setup();
        fs.mkdirs(&p(&format!("{DS}/_temporary/0"))).unwrap();
        let temp = naming::attempt_part_path(&p(DS), &attempt(0), "part-00000");
        let mut out = fs.create(&temp, CreateOptions::default()).unwrap();
        out.write(b"data").unwrap();
        out.close().unwrap();

        let reader = StocatorFs::new(store, StocatorConfig::default());
        assert!(reader.list_status(&p(DS)).unwrap().is_empty());
    }

    #[test]
    fn reader_cost_is_two_heads_and_one_listing() {
        let (store, fs) = setup();
        write_marked_dataset(&fs, &[("part-00000", 0, b"abc"), ("part-00001", 0, b"def")]);
        store.reset_metering();

        let reader = StocatorFs::new(store.clone(), StocatorConfig::default());
        let statuses = reader.list_status(&p(DS)).unwrap();
        assert_eq!(statuses.len(), 2);
        let tally = store.tally();
        assert_eq!(tally.count(RestOpKind::HeadObject), 2); // marker + _SUCCESS
        assert_eq!(tally.count(RestOpKind::GetContainer), 1);
        assert_eq!(tally.total_ops(), 3);
    }

    #[test]
    fn unmarked_paths_list_literally() {
        let (store, fs) = setup();
        for (name, body) in [("plain/a", b"1".as_slice()), ("plain/sub/b", b"22")] {
            store
                .put_object(ObjectKey::new("res", name).unwrap(), body, Metadata::new())
                .unwrap();
        }
        let statuses = fs.list_status(&p("swift2d://res/plain")).unwrap();
        assert_eq!(statuses.len(), 2);
        assert_eq!(statuses[0].path.to_string(), "swift2d://res/plain/a");
        assert!(!statuses[0].is_directory);
        assert_eq!(statuses[1].path.to_string(), "swift2d://res/plain/sub");
        assert!(statuses[1].is_directory);
        assert!(fs.list_status(&p("swift2d://res/absent")).is_err());
    }

    #[test]
    fn manifest_round_trips_and_rejects_garbage() {
        let mut committed = CommittedParts::new();
        committed.insert("part-00000".into(), attempt(0));
        committed.insert("part-00002".into(), attempt(1));
        let manifest = SuccessManifest::new(committed.clone());
        let bytes = manifest.to_bytes();
        assert_eq!(
            std::str::from_utf8(&bytes).unwrap(),
            "part-00000 201512062056 000000 0\npart-00002 201512062056 000000 1\n"
        );
        assert_eq!(SuccessManifest::parse(&bytes).unwrap(), manifest);

        assert!(SuccessManifest::parse(b"part-00000 x y\n").is_err());
        assert!(SuccessManifest::parse(b"part-00000 1 2 notanumber\n").is_err());
        assert!(SuccessManifest::parse(&[0xff, 0xfe]).is_err());
        assert!(SuccessManifest::parse(b"part-00000 1 2 0\npart-00000 1 2 1\n").is_err());
        assert!(SuccessManifest::parse(b"").unwrap().entries().is_empty());
    }

    #[test]
    fn manifest_read_option_writes_the_manifest_and_resolves_without_listing() {
        let store = ObjectStore::new(ConsistencyPolicy::with_lags(1000, 0));
        let fs = StocatorFs::new(
            store.clone(),
            StocatorConfig::with_read_option(ReadOption::Manifest),
        );
        write_marked_dataset(
            &fs,
            &[("part-00000", 0, b"abc"), ("part-00001", 1, b"defg")],
        );
        store.reset_metering();

        let reader = StocatorFs::new(
            store.clone(),
            StocatorConfig::with_read_option(ReadOption::Manifest),
        );
        let resolved = reader.resolve_via_manifest(&p(DS)).unwrap();
        assert_eq!(resolved.len(), 2);
        assert_eq!(
            resolved[0].1.to_string(),
            format!("{DS}/part-00000_attempt_201512062056_0000_m_000000_0")
        );
        assert_eq!(
            resolved[1].1.to_string(),
            format!("{DS}/part-00001_attempt_201512062056_0000_m_000000_1")
        );
        // Composed names GET cleanly despite the huge listing lag.
        for (_, path) in &resolved {
            assert!(store.get_object(&path.object_key().unwrap()).is_ok());
        }
        assert_eq!(store.tally().count(RestOpKind::GetContainer), 0);
    }

    #[test]
    fn head_cache_evicts_least_recently_used_beyond_capacity() {
        let store = ObjectStore::new(ConsistencyPolicy::strong());
        let config = StocatorConfig {
            cache_capacity: 2,
            ..StocatorConfig::default()
        };
        let fs = StocatorFs::new(store.clone(), config);
        for name in ["a", "b", "c"] {
            store
                .put_object(ObjectKey::new("res", name).unwrap(), b"1", Metadata::new())
                .unwrap();
        }
        let path_of = |n: &str| p(&format!("swift2d://res/{n}"));
        fs.exists(&path_of("a")).unwrap(); // miss: HEAD a
        fs.exists(&path_of("b")).unwrap(); // miss: HEAD b
        fs.exists(&path_of("a")).unwrap(); // hit, refreshes a
        fs.exists(&path_of("c")).unwrap(); // miss: HEAD c, evicts b
        store.reset_metering();
        fs.exists(&path_of("a")).unwrap(); // hit
        fs.exists(&path_of("c")).unwrap(); // hit
        assert_eq!(store.tally().count(RestOpKind::HeadObject), 0);
        fs.exists(&path_of("b")).unwrap(); // evicted: real HEAD
        assert_eq!(store.tally().count(RestOpKind::HeadObject), 1);
    }

    #[test]
    fn negative_probes_are_never_cached() {
        let (store, fs) = setup();
        assert!(!fs.exists(&p("swift2d://res/late")).unwrap());
        store
            .put_object(
                ObjectKey::new("res", "late").unwrap(),
                b"1",
                Metadata::new(),
            )
            .unwrap();
        // The earlier miss must not mask the object now that it exists.
        assert!(fs.exists(&p("swift2d://res/late")).unwrap());
    }
}
