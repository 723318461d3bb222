//! In-memory object store with REST-op metering and eventual listing consistency.
//!
//! The store speaks the handful of verbs a Swift/S3-class service offers a
//! connector: PUT, GET, HEAD, DELETE, server-side COPY, container listing, and
//! container HEAD. Time is a logical tick counter advanced by the caller;
//! nothing here touches the wall clock, threads, or randomness, so a sequence
//! of calls always produces the same state, tally, and trace.
//!
//! Consistency model:
//!
//! * PUT is atomic. A streamed upload installs its object only at
//!   [`PutStream::finish`]; an aborted stream leaves no object and no counts.
//! * GET and HEAD are read-after-write strong by default: a completed PUT is
//!   immediately visible to direct reads, and a DELETE hides the object from
//!   them immediately.
//! * Container listings lag. A new object appears in listings only once
//!   `create_listing_lag` ticks have passed, and a deleted object keeps
//!   appearing for `delete_listing_lag` ticks. This is the window rename-based
//!   commit protocols fall into.
//!
//! Metering: read-class operations (GET, HEAD, container GET/HEAD) are counted
//! whether they hit or miss, because the request reaches the service either
//! way. Mutations (PUT, DELETE, COPY) are counted only when they take effect;
//! a rejected or aborted mutation leaves the tally untouched.

mod tally;
mod trace;

pub use tally::{OpTally, RestOpKind};
pub use trace::{replay_tally, TraceEvent};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// User metadata attached to an object. Sorted so every observation is
/// deterministic.
pub type Metadata = BTreeMap<String, String>;

/// Fully qualified object coordinates: `container` plus flat `name`.
///
/// Names are `/`-separated with no empty segments and no leading or trailing
/// slash; containers are single non-empty segments. The slashes carry no
/// hierarchy inside the store; directories exist only in connector heads.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectKey {
    container: String,
    name: String,
}

impl ObjectKey {
    pub fn new(container: impl Into<String>, name: impl Into<String>) -> Result<Self, StoreError> {
        let container = container.into();
        let name = name.into();
        if container.is_empty() || container.contains('/') {
            return Err(StoreError::InvalidKey(format!(
                "container must be one non-empty segment: {container:?}"
            )));
        }
        if name.is_empty() || name.starts_with('/') || name.ends_with('/') {
            return Err(StoreError::InvalidKey(format!(
                "object name must be non-empty with no leading/trailing slash: {name:?}"
            )));
        }
        if name.split('/').any(str::is_empty) {
            return Err(StoreError::InvalidKey(format!(
                "object name must not contain empty segments: {name:?}"
            )));
        }
        Ok(Self { container, name })
    }

    pub fn container(&self) -> &str {
        &self.container
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Display for ObjectKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.container, self.name)
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("object not found: {0}")]
    NotFound(String),
    #[error("container not found: {0}")]
    ContainerNotFound(String),
    #[error("invalid object key: {0}")]
    InvalidKey(String),
    #[error("put stream already finished for {0}")]
    StreamFinished(String),
}

/// Visibility knobs, all in logical ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyPolicy {
    /// Ticks before a newly created object shows up in container listings.
    pub create_listing_lag: u64,
    /// Ticks a deleted object keeps showing up in container listings.
    pub delete_listing_lag: u64,
    /// When true (default), GET/HEAD see completed PUTs immediately regardless
    /// of the listing lags; when false they honor `create_listing_lag` too.
    pub read_after_write_strong: bool,
}

impl Default for ConsistencyPolicy {
    fn default() -> Self {
        Self {
            create_listing_lag: 0,
            delete_listing_lag: 0,
            read_after_write_strong: true,
        }
    }
}

impl ConsistencyPolicy {
    pub fn strong() -> Self {
        Self::default()
    }

    pub fn with_lags(create_listing_lag: u64, delete_listing_lag: u64) -> Self {
        Self {
            create_listing_lag,
            delete_listing_lag,
            ..Self::default()
        }
    }
}

/// What a GET returns.
#[derive(Debug, Clone)]
pub struct GetResult {
    pub data: Arc<Vec<u8>>,
    pub metadata: Metadata,
    pub created_at: u64,
}

/// What a HEAD returns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadResult {
    pub length: u64,
    pub metadata: Metadata,
    pub created_at: u64,
}

/// One row of a container listing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListingEntry {
    pub name: String,
    pub length: u64,
    pub modified_at: u64,
}

/// Result of a container GET: direct entries plus, when a delimiter was given,
/// the S3-style common prefixes (each ending in the delimiter).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Listing {
    pub entries: Vec<ListingEntry>,
    pub common_prefixes: Vec<String>,
}

/// What a container HEAD returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContainerInfo {
    pub object_count: u64,
}

#[derive(Debug, Clone)]
struct ObjectRecord {
    data: Arc<Vec<u8>>,
    metadata: Metadata,
    /// Tick of the PUT that produced the current content.
    created_at: u64,
    /// Tick listings measure the create lag from. Replacing a live object
    /// keeps the original value: the name never left the container index.
    listing_since: u64,
}

#[derive(Debug, Clone)]
struct Tombstone {
    length: u64,
    modified_at: u64,
    listing_since: u64,
    deleted_at: u64,
}

#[derive(Debug, Default)]
struct ContainerState {
    objects: BTreeMap<String, ObjectRecord>,
    tombstones: BTreeMap<String, Tombstone>,
}

#[derive(Debug)]
struct StoreInner {
    policy: ConsistencyPolicy,
    clock: u64,
    containers: BTreeMap<String, ContainerState>,
    tally: OpTally,
    events: Vec<TraceEvent>,
}

/// Handle to one simulated store. Cheap to clone; all clones share state.
/// Calls are serialized internally, matching the single-control-thread model
/// of the engine's scheduler.
#[derive(Clone)]
pub struct ObjectStore {
    inner: Arc<Mutex<StoreInner>>,
}

impl fmt::Debug for ObjectStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner = self.lock();
        f.debug_struct("ObjectStore")
            .field("clock", &inner.clock)
            .field("containers", &inner.containers.len())
            .finish()
    }
}

impl ObjectStore {
    pub fn new(policy: ConsistencyPolicy) -> Self {
        Self {
            inner: Arc::new(Mutex::new(StoreInner {
                policy,
                clock: 0,
                containers: BTreeMap::new(),
                tally: OpTally::new(),
                events: Vec::new(),
            })),
        }
    }

    fn lock(&self) -> MutexGuard<'_, StoreInner> {
        self.inner.lock().expect("store mutex poisoned")
    }

    /// Current logical tick.
    pub fn now(&self) -> u64 {
        self.lock().clock
    }

    /// Advance the logical clock and return the new tick.
    pub fn advance(&self, ticks: u64) -> u64 {
        let mut inner = self.lock();
        inner.clock += ticks;
        inner.clock
    }

    pub fn policy(&self) -> ConsistencyPolicy {
        self.lock().policy
    }

    /// Start a streamed upload. Nothing is counted or visible until the
    /// stream's `finish`; dropping the stream aborts it silently.
    pub fn begin_put(&self, key: ObjectKey, metadata: Metadata) -> PutStream {
        PutStream {
            store: self.clone(),
            key,
            metadata,
            sent_parts: Vec::new(),
            sent_len: 0,
            pending: Vec::new(),
            multipart: false,
            finished: false,
        }
    }

    /// Single-shot PUT of a complete body.
    pub fn put_object(
        &self,
        key: ObjectKey,
        body: &[u8],
        metadata: Metadata,
    ) -> Result<(), StoreError> {
        let mut stream = self.begin_put(key, metadata);
        stream.push_chunk(body);
        stream.finish()
    }

    /// GET: body plus metadata. Counted on hit and miss alike.
    pub fn get_object(&self, key: &ObjectKey) -> Result<GetResult, StoreError> {
        let mut inner = self.lock();
        inner.tally.record(RestOpKind::GetObject);
        match inner.visible_record(key) {
            Some(rec) => {
                let result = GetResult {
                    data: Arc::clone(&rec.data),
                    metadata: rec.metadata.clone(),
                    created_at: rec.created_at,
                };
                let len = result.data.len() as u64;
                inner.tally.bytes_got += len;
                inner.push_event(RestOpKind::GetObject, key, len, None);
                Ok(result)
            }
            None => {
                inner.push_event(RestOpKind::GetObject, key, 0, None);
                Err(StoreError::NotFound(key.to_string()))
            }
        }
    }

    /// HEAD: length plus metadata, no body transfer. Counted on hit and miss.
    pub fn head_object(&self, key: &ObjectKey) -> Result<HeadResult, StoreError> {
        let mut inner = self.lock();
        inner.tally.record(RestOpKind::HeadObject);
        match inner.visible_record(key) {
            Some(rec) => {
                let result = HeadResult {
                    length: rec.data.len() as u64,
                    metadata: rec.metadata.clone(),
                    created_at: rec.created_at,
                };
                inner.push_event(RestOpKind::HeadObject, key, result.length, None);
                Ok(result)
            }
            None => {
                inner.push_event(RestOpKind::HeadObject, key, 0, None);
                Err(StoreError::NotFound(key.to_string()))
            }
        }
    }

    /// Container listing under `prefix`, optionally folded at `delimiter`.
    ///
    /// Subject to the listing lags: fresh creates may be absent, fresh deletes
    /// may linger. Unknown containers list as empty (they are implicit
    /// namespaces, provisioned by the first PUT). Entries and prefixes come
    /// back in lexicographic order.
    pub fn list_container(
        &self,
        container: &str,
        prefix: &str,
        delimiter: Option<char>,
    ) -> Listing {
        let mut inner = self.lock();
        inner.tally.record(RestOpKind::GetContainer);
        let now = inner.clock;
        let policy = inner.policy;

        let mut rows: BTreeMap<String, (u64, u64)> = BTreeMap::new();
        if let Some(state) = inner.containers.get(container) {
            for (name, rec) in state.objects.range(prefix.to_string()..) {
                if !name.starts_with(prefix) {
                    break;
                }
                if rec.listing_since + policy.create_listing_lag <= now {
                    rows.insert(name.clone(), (rec.data.len() as u64, rec.created_at));
                }
            }
            for (name, tomb) in state.tombstones.range(prefix.to_string()..) {
                if !name.starts_with(prefix) {
                    break;
                }
                let created_visible = tomb.listing_since + policy.create_listing_lag <= now;
                let delete_pending = now < tomb.deleted_at + policy.delete_listing_lag;
                if created_visible && delete_pending && !rows.contains_key(name) {
                    rows.insert(name.clone(), (tomb.length, tomb.modified_at));
                }
            }
        }

        let mut listing = Listing::default();
        match delimiter {
            None => {
                listing.entries = rows
                    .into_iter()
                    .map(|(name, (length, modified_at))| ListingEntry {
                        name,
                        length,
                        modified_at,
                    })
                    .collect();
            }
            Some(delim) => {
                let mut prefixes: Vec<String> = Vec::new();
                for (name, (length, modified_at)) in rows {
                    let rest = &name[prefix.len()..];
                    match rest.find(delim) {
                        Some(pos) => {
                            let folded = name[..prefix.len() + pos + delim.len_utf8()].to_string();
                            if prefixes.last() != Some(&folded) {
                                prefixes.push(folded);
                            }
                        }
                        None => listing.entries.push(ListingEntry {
                            name,
                            length,
                            modified_at,
                        }),
                    }
                }
                listing.common_prefixes = prefixes;
            }
        }

        let returned = (listing.entries.len() + listing.common_prefixes.len()) as u64;
        let tick = inner.clock;
        inner.events.push(TraceEvent {
            tick,
            kind: RestOpKind::GetContainer,
            container: container.to_string(),
            name: prefix.to_string(),
            length: returned,
            src: None,
        });
        listing
    }

    /// Container HEAD: live object count. Strongly consistent. Counted on hit
    /// and miss; unknown containers (never PUT into) report not-found.
    pub fn head_container(&self, container: &str) -> Result<ContainerInfo, StoreError> {
        let mut inner = self.lock();
        inner.tally.record(RestOpKind::HeadContainer);
        let info = inner.containers.get(container).map(|state| ContainerInfo {
            object_count: state.objects.len() as u64,
        });
        let tick = inner.clock;
        inner.events.push(TraceEvent {
            tick,
            kind: RestOpKind::HeadContainer,
            container: container.to_string(),
            name: String::new(),
            length: info.map_or(0, |i| i.object_count),
            src: None,
        });
        info.ok_or_else(|| StoreError::ContainerNotFound(container.to_string()))
    }

    /// DELETE. Hides the object from GET/HEAD immediately; listings keep the
    /// entry for `delete_listing_lag` ticks. Counted only when it deletes.
    pub fn delete_object(&self, key: &ObjectKey) -> Result<(), StoreError> {
        let mut inner = self.lock();
        let now = inner.clock;
        let state = inner
            .containers
            .get_mut(key.container())
            .ok_or_else(|| StoreError::NotFound(key.to_string()))?;
        let rec = state
            .objects
            .remove(key.name())
            .ok_or_else(|| StoreError::NotFound(key.to_string()))?;
        state.tombstones.insert(
            key.name().to_string(),
            Tombstone {
                length: rec.data.len() as u64,
                modified_at: rec.created_at,
                listing_since: rec.listing_since,
                deleted_at: now,
            },
        );
        inner.tally.record(RestOpKind::DeleteObject);
        inner.push_event(RestOpKind::DeleteObject, key, 0, None);
        Ok(())
    }

    /// Server-side COPY. Reads the source strongly, installs the destination
    /// atomically at the current tick. Counted only on success.
    pub fn copy_object(&self, src: &ObjectKey, dst: &ObjectKey) -> Result<(), StoreError> {
        let mut inner = self.lock();
        let rec = inner
            .visible_record(src)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(src.to_string()))?;
        let len = rec.data.len() as u64;
        inner.install(dst, rec.data, rec.metadata);
        inner.tally.record(RestOpKind::CopyObject);
        inner.tally.bytes_copied += len;
        inner.push_event(RestOpKind::CopyObject, dst, len, Some(src.to_string()));
        Ok(())
    }

    /// Record client-side staging occupancy. Not a REST op; feeds the tally's
    /// `peak_staged`.
    pub fn note_staged(&self, buffered: u64) {
        self.lock().tally.note_staged(buffered);
    }

    pub fn tally(&self) -> OpTally {
        self.lock().tally.clone()
    }

    /// Zero the tally and drop accumulated trace events. Objects and the clock
    /// are untouched; used to exclude workload setup from measurement.
    pub fn reset_metering(&self) {
        let mut inner = self.lock();
        inner.tally = OpTally::new();
        inner.events.clear();
    }

    /// Copy of the trace accumulated since creation or the last reset.
    pub fn trace(&self) -> Vec<TraceEvent> {
        self.lock().events.clone()
    }
}

impl StoreInner {
    /// The record GET/HEAD would observe right now, honoring the
    /// read-after-write mode. Deletes are always immediately invisible here.
    fn visible_record(&self, key: &ObjectKey) -> Option<&ObjectRecord> {
        let rec = self
            .containers
            .get(key.container())?
            .objects
            .get(key.name())?;
        if !self.policy.read_after_write_strong
            && rec.created_at + self.policy.create_listing_lag > self.clock
        {
            return None;
        }
        Some(rec)
    }

    fn install(&mut self, key: &ObjectKey, data: Arc<Vec<u8>>, metadata: Metadata) {
        let now = self.clock;
        let state = self
            .containers
            .entry(key.container().to_string())
            .or_default();
        state.tombstones.remove(key.name());
        let listing_since = state
            .objects
            .get(key.name())
            .map(|existing| existing.listing_since)
            .unwrap_or(now);
        state.objects.insert(
            key.name().to_string(),
            ObjectRecord {
                data,
                metadata,
                created_at: now,
                listing_since,
            },
        );
    }

    fn push_event(&mut self, kind: RestOpKind, key: &ObjectKey, length: u64, src: Option<String>) {
        self.events.push(TraceEvent {
            tick: self.clock,
            kind,
            container: key.container().to_string(),
            name: key.name().to_string(),
            length,
            src,
        });
    }
}

/// Streamed upload in flight.
///
/// `push_chunk` accumulates body bytes. `flush_part` ships the accumulated
/// bytes as one multipart piece, counting one PutObject immediately (the
/// fast-upload wire behavior). `finish` installs the object atomically: as a
/// single counted PUT when no parts were flushed, or as the concatenation of
/// the flushed parts (flushing any residual first) with no extra count.
/// Dropping the stream without finishing aborts it: no object, no counts.
#[derive(Debug)]
pub struct PutStream {
    store: ObjectStore,
    key: ObjectKey,
    metadata: Metadata,
    sent_parts: Vec<Vec<u8>>,
    sent_len: usize,
    pending: Vec<u8>,
    multipart: bool,
    finished: bool,
}

impl PutStream {
    pub fn key(&self) -> &ObjectKey {
        &self.key
    }

    pub fn push_chunk(&mut self, chunk: &[u8]) {
        debug_assert!(!self.finished, "push_chunk after finish");
        self.pending.extend_from_slice(chunk);
    }

    /// Ship accumulated bytes as one multipart piece. Empty accumulations are
    /// a no-op so callers can flush unconditionally.
    pub fn flush_part(&mut self) {
        if self.pending.is_empty() {
            return;
        }
        let part = std::mem::take(&mut self.pending);
        let mut inner = self.store.lock();
        inner.tally.record(RestOpKind::PutObject);
        inner.tally.bytes_put += part.len() as u64;
        let len = part.len() as u64;
        inner.push_event(RestOpKind::PutObject, &self.key, len, None);
        drop(inner);
        self.sent_len += part.len();
        self.sent_parts.push(part);
        self.multipart = true;
    }

    /// Complete the upload and install the object at the current tick.
    pub fn finish(mut self) -> Result<(), StoreError> {
        if self.finished {
            return Err(StoreError::StreamFinished(self.key.to_string()));
        }
        self.finished = true;
        if self.multipart {
            self.flush_part();
            let mut body = Vec::with_capacity(self.sent_len);
            for part in &self.sent_parts {
                body.extend_from_slice(part);
            }
            let mut inner = self.store.lock();
            let key = self.key.clone();
            inner.install(&key, Arc::new(body), self.metadata.clone());
        } else {
            let body = std::mem::take(&mut self.pending);
            let mut inner = self.store.lock();
            inner.tally.record(RestOpKind::PutObject);
            inner.tally.bytes_put += body.len() as u64;
            let len = body.len() as u64;
            let key = self.key.clone();
            inner.push_event(RestOpKind::PutObject, &key, len, None);
            inner.install(&key, Arc::new(body), self.metadata.clone());
        }
        Ok(())
    }

    /// Abandon the upload. Equivalent to dropping the stream; provided so the
    /// intent reads at call sites.
    pub fn abort(mut self) {
        self.finished = true;
    }
}
