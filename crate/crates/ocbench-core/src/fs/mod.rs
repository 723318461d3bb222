//! Hadoop-style filesystem contract over the object store.
//!
//! Connectors implement [`ObjectFilesystem`], the slice of the Hadoop
//! `FileSystem` surface the commit protocol actually exercises. Paths are
//! URIs: the scheme picks a connector in harness configs, the authority is
//! the container, and the path segments become the flat object name.

pub mod naming;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::store::{Metadata, ObjectKey, StoreError};

/// A filesystem path: optional scheme, container, and name segments.
///
/// `swift2d://res/data.txt/part-00000` and the bare `/res/data.txt` both
/// parse; display reproduces the input exactly (the scheme is part of the
/// value, so two paths differing only in scheme are not equal).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FsPath {
    scheme: Option<String>,
    container: String,
    segments: Vec<String>,
}

impl FsPath {
    pub fn new(
        scheme: Option<&str>,
        container: &str,
        segments: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, FsError> {
        if container.is_empty() || container.contains('/') {
            return Err(FsError::InvalidPath(format!(
                "container must be one non-empty segment: {container:?}"
            )));
        }
        if let Some(s) = scheme {
            if s.is_empty() || !s.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(FsError::InvalidPath(format!("malformed scheme: {s:?}")));
            }
        }
        let segments: Vec<String> = segments.into_iter().map(Into::into).collect();
        for seg in &segments {
            if seg.is_empty() || seg.contains('/') {
                return Err(FsError::InvalidPath(format!("malformed segment: {seg:?}")));
            }
        }
        Ok(Self {
            scheme: scheme.map(str::to_string),
            container: container.to_string(),
            segments,
        })
    }

    /// Parse `scheme://container/seg/...` or the bare `/container/seg/...`.
    pub fn parse(input: &str) -> Result<Self, FsError> {
        let bad = || FsError::InvalidPath(input.to_string());
        let (scheme, rest) = match input.split_once("://") {
            Some((s, rest)) => (Some(s), rest),
            None => (None, input.strip_prefix('/').ok_or_else(bad)?),
        };
        if rest.is_empty() {
            return Err(bad());
        }
        let mut parts = rest.split('/');
        let container = parts.next().ok_or_else(bad)?;
        let segments: Vec<&str> = parts.collect();
        Self::new(scheme, container, segments).map_err(|_| bad())
    }

    pub fn scheme(&self) -> Option<&str> {
        self.scheme.as_deref()
    }

    pub fn container(&self) -> &str {
        &self.container
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn is_container_root(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn last_segment(&self) -> Option<&str> {
        self.segments.last().map(String::as_str)
    }

    /// Flat object name, `seg/seg/...`. Empty at the container root.
    pub fn object_name(&self) -> String {
        self.segments.join("/")
    }

    /// Store coordinates for this path. Fails at the container root, which
    /// has no object name.
    pub fn object_key(&self) -> Result<ObjectKey, FsError> {
        if self.is_container_root() {
            return Err(FsError::InvalidPath(format!(
                "container root has no object name: {self}"
            )));
        }
        Ok(ObjectKey::new(&self.container, self.object_name())?)
    }

    /// The path made of the first `n` segments, same scheme and container.
    pub fn ancestor(&self, n: usize) -> FsPath {
        FsPath {
            scheme: self.scheme.clone(),
            container: self.container.clone(),
            segments: self.segments[..n].to_vec(),
        }
    }

    pub fn parent(&self) -> Option<FsPath> {
        if self.segments.is_empty() {
            None
        } else {
            Some(self.ancestor(self.segments.len() - 1))
        }
    }

    /// Append segments. Panics on malformed segments; extension points all
    /// pass literals or already-validated names.
    pub fn join<'a>(&self, extra: impl IntoIterator<Item = &'a str>) -> FsPath {
        let mut out = self.clone();
        for seg in extra {
            assert!(
                !seg.is_empty() && !seg.contains('/'),
                "malformed segment {seg:?}"
            );
            out.segments.push(seg.to_string());
        }
        out
    }

    pub fn child(&self, segment: &str) -> FsPath {
        self.join([segment])
    }

    /// True when `self` is `other` or nested anywhere below it.
    pub fn is_within(&self, other: &FsPath) -> bool {
        self.container == other.container
            && self.segments.len() >= other.segments.len()
            && self.segments[..other.segments.len()] == other.segments[..]
    }
}

impl fmt::Display for FsPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.scheme {
            Some(s) => write!(f, "{s}://{}", self.container)?,
            None => write!(f, "/{}", self.container)?,
        }
        for seg in &self.segments {
            write!(f, "/{seg}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum FsError {
    #[error("no such path: {0}")]
    NotFound(String),
    #[error("path already exists: {0}")]
    AlreadyExists(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("not a valid operation: {0}")]
    Unsupported(String),
    #[error("malformed success manifest: {0}")]
    CorruptManifest(String),
    #[error("output stream already closed: {0}")]
    StreamClosed(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl FsError {
    /// Whether the error means "nothing at this path", across both layers.
    pub fn is_not_found(&self) -> bool {
        matches!(
            self,
            FsError::NotFound(_)
                | FsError::Store(StoreError::NotFound(_))
                | FsError::Store(StoreError::ContainerNotFound(_))
        )
    }
}

/// Status of one path, as a listing or probe reports it.
///
/// Directories are synthetic: zero-length markers or listing prefixes.
/// `is_directory` implies `length == 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileStatus {
    pub path: FsPath,
    pub length: u64,
    pub is_directory: bool,
    pub modified_at: u64,
}

impl FileStatus {
    pub fn file(path: FsPath, length: u64, modified_at: u64) -> Self {
        Self {
            path,
            length,
            is_directory: false,
            modified_at,
        }
    }

    pub fn directory(path: FsPath, modified_at: u64) -> Self {
        Self {
            path,
            length: 0,
            is_directory: true,
            modified_at,
        }
    }
}

/// Options to `create`. Only `overwrite` changes behavior; the Hadoop
/// signature's tuning fields are accepted and ignored, as object stores have
/// no use for them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CreateOptions {
    pub overwrite: bool,
    pub permission: u16,
    pub buffer_size: u32,
    pub replication: u16,
    pub block_size: u64,
}

impl Default for CreateOptions {
    fn default() -> Self {
        Self {
            overwrite: false,
            permission: 0o644,
            buffer_size: 4096,
            replication: 1,
            block_size: 128 * 1024 * 1024,
        }
    }
}

impl CreateOptions {
    pub fn overwrite(yes: bool) -> Self {
        Self {
            overwrite: yes,
            ..Self::default()
        }
    }
}

/// An opened object: the full body plus its metadata. Opens are eager; the
/// GET has already happened by the time this exists.
#[derive(Debug, Clone)]
pub struct FsDataInput {
    pub data: Arc<Vec<u8>>,
    pub metadata: Metadata,
    pub length: u64,
}

/// Streaming writer returned by `create`. Bytes become an object only at
/// `close`; dropping the writer without closing abandons the write.
pub trait FsDataOutput {
    fn write(&mut self, buf: &[u8]) -> Result<(), FsError>;
    fn close(&mut self) -> Result<(), FsError>;
}

/// The filesystem surface the commit protocol exercises.
///
/// Implementations are driven by a single control thread; reentrant calls
/// from that thread must be safe (interior mutability, no held locks across
/// calls).
pub trait ObjectFilesystem {
    fn exists(&self, path: &FsPath) -> Result<bool, FsError>;

    fn get_file_status(&self, path: &FsPath) -> Result<FileStatus, FsError>;

    fn open(&self, path: &FsPath) -> Result<FsDataInput, FsError>;

    fn create(&self, path: &FsPath, opts: CreateOptions) -> Result<Box<dyn FsDataOutput>, FsError>;

    /// Hadoop rename semantics: `Ok(true)` when the destination now holds the
    /// source's content (or the rename was absorbed by the commit protocol),
    /// `Ok(false)` when the source is missing and the connector absorbs the
    /// miss silently.
    fn rename(&self, src: &FsPath, dst: &FsPath) -> Result<bool, FsError>;

    /// `Ok(true)` when something was removed or absorbed, `Ok(false)` when
    /// nothing was there.
    fn delete(&self, path: &FsPath, recursive: bool) -> Result<bool, FsError>;

    /// One level of children, sorted by name. Never recursive: callers walk.
    fn list_status(&self, path: &FsPath) -> Result<Vec<FileStatus>, FsError>;

    /// `list_status` with the prefix-based flag some engines pass. Both
    /// values return identical results here; the flag exists so call sites
    /// read like their Hadoop counterparts.
    fn list_status_prefix(
        &self,
        path: &FsPath,
        prefix_based: bool,
    ) -> Result<Vec<FileStatus>, FsError> {
        let _ = prefix_based;
        self.list_status(path)
    }

    fn mkdirs(&self, path: &FsPath) -> Result<bool, FsError>;
}
