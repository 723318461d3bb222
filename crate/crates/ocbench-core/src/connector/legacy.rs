//! Rename-based connector.
//!
//! This is the classic flat-namespace filesystem shim: directories are
//! zero-byte marker objects created level by level, renames are COPY plus
//! DELETE, and every status probe goes to the store because nothing is
//! cached. The commit protocol's temporary tree is materialized literally,
//! so committing a job really does copy every byte a second (and, under the
//! two-phase variant, effectively a first) time.
//!
//! Profiles capture the per-store texture that matters for op counts:
//! how many HEAD shapes a status probe tries before falling back to a
//! listing, whether list-heavy or head-heavy probing is used for parents,
//! and whether uploads go up in buffered parts or as one staged body.

use crate::fs::{
    CreateOptions, FileStatus, FsDataInput, FsDataOutput, FsError, FsPath, ObjectFilesystem,
};
use crate::store::{Metadata, ObjectKey, ObjectStore, StoreError};

/// Alternate object name probed for directories by stores that persist
/// folder placeholders under a suffixed name. Probes of it always miss here;
/// the cost is what matters.
pub const DIR_SUFFIX: &str = "_$folder$";

const MIN_PART_SIZE: u64 = 5 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LegacyProfile {
    /// HEAD shapes tried per status probe before the listing fallback:
    /// 1 probes the plain name only, 2 adds the folder-suffixed name.
    pub dir_probe_heads: u32,
    /// Whether directory listings fold at '/' per level (true) or scan the
    /// deep prefix and synthesize one level client-side (false).
    pub listing_per_level: bool,
    /// Buffered multipart uploads instead of staging the whole body.
    pub fast_upload: bool,
    /// Part size for buffered uploads.
    pub fast_upload_part_size: u64,
}

impl LegacyProfile {
    /// Swift-style: single HEAD probe, per-level listings, staged uploads.
    pub fn swift_like() -> Self {
        Self {
            dir_probe_heads: 1,
            listing_per_level: true,
            fast_upload: false,
            fast_upload_part_size: MIN_PART_SIZE,
        }
    }

    /// S3-style: double HEAD probe, deep-prefix listings, staged uploads.
    pub fn s3a_like() -> Self {
        Self {
            dir_probe_heads: 2,
            listing_per_level: false,
            ..Self::swift_like()
        }
    }

    /// S3-style with buffered multipart uploads.
    pub fn s3a_fast_upload() -> Self {
        Self {
            fast_upload: true,
            ..Self::s3a_like()
        }
    }

    pub fn validate(&self) -> Result<(), FsError> {
        if self.dir_probe_heads == 0 {
            return Err(FsError::Unsupported(
                "dir_probe_heads must be at least 1".into(),
            ));
        }
        if self.fast_upload && self.fast_upload_part_size < MIN_PART_SIZE {
            return Err(FsError::Unsupported(format!(
                "fast_upload_part_size must be at least {MIN_PART_SIZE} bytes"
            )));
        }
        Ok(())
    }
}

enum Probe {
    File(FileStatus),
    Directory(FileStatus),
    Absent,
}

pub struct LegacyFs {
    store: ObjectStore,
    profile: LegacyProfile,
}

impl LegacyFs {
    pub fn new(store: ObjectStore, profile: LegacyProfile) -> Self {
        Self { store, profile }
    }

    pub fn profile(&self) -> &LegacyProfile {
        &self.profile
    }

    /// HEAD-only half of a status probe: the plain name, then the
    /// folder-suffixed variants. No listing fallback.
    fn probe_heads(&self, path: &FsPath) -> Result<Option<FileStatus>, FsError> {
        let key = path.object_key()?;
        match self.store.head_object(&key) {
            Ok(head) => {
                let status = if head.length == 0 {
                    FileStatus::directory(path.clone(), head.created_at)
                } else {
                    FileStatus::file(path.clone(), head.length, head.created_at)
                };
                return Ok(Some(status));
            }
            Err(StoreError::NotFound(_)) => {}
            Err(e) => return Err(e.into()),
        }
        for _ in 1..self.profile.dir_probe_heads {
            let suffixed = ObjectKey::new(key.container(), format!("{}{DIR_SUFFIX}", key.name()))?;
            match self.store.head_object(&suffixed) {
                Ok(head) => return Ok(Some(FileStatus::directory(path.clone(), head.created_at))),
                Err(StoreError::NotFound(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(None)
    }

    /// Full status probe: HEADs first, then a one-entry listing under the
    /// prefix; any descendant implies the path is a directory.
    fn status_probe(&self, path: &FsPath) -> Result<Probe, FsError> {
        if path.is_container_root() {
            return Ok(Probe::Directory(FileStatus::directory(path.clone(), 0)));
        }
        if let Some(status) = self.probe_heads(path)? {
            return Ok(if status.is_directory {
                Probe::Directory(status)
            } else {
                Probe::File(status)
            });
        }
        let prefix = format!("{}/", path.object_name());
        let listing = self
            .store
            .list_container(path.container(), &prefix, Some('/'));
        if listing.entries.is_empty() && listing.common_prefixes.is_empty() {
            Ok(Probe::Absent)
        } else {
            Ok(Probe::Directory(FileStatus::directory(path.clone(), 0)))
        }
    }

    fn one_level(&self, path: &FsPath) -> Result<Vec<FileStatus>, FsError> {
        let prefix = if path.is_container_root() {
            String::new()
        } else {
            format!("{}/", path.object_name())
        };
        let mut out: Vec<FileStatus> = Vec::new();
        if self.profile.listing_per_level {
            let listing = self
                .store
                .list_container(path.container(), &prefix, Some('/'));
            for entry in &listing.entries {
                let segment = entry.name.rsplit('/').next().expect("non-empty name");
                if segment.ends_with(DIR_SUFFIX) {
                    continue;
                }
                out.push(if entry.length == 0 {
                    FileStatus::directory(path.child(segment), entry.modified_at)
                } else {
                    FileStatus::file(path.child(segment), entry.length, entry.modified_at)
                });
            }
            for folded in &listing.common_prefixes {
                let segment = folded
                    .trim_end_matches('/')
                    .rsplit('/')
                    .next()
                    .expect("non-empty prefix");
                let child = path.child(segment);
                if !out.iter().any(|s| s.path == child) {
                    out.push(FileStatus::directory(child, 0));
                }
            }
        } else {
            // Deep scan, one level synthesized client-side.
            let listing = self.store.list_container(path.container(), &prefix, None);
            let mut dirs_seen = std::collections::BTreeSet::new();
            for entry in &listing.entries {
                let rest = &entry.name[prefix.len()..];
                match rest.split_once('/') {
                    None => {
                        if rest.ends_with(DIR_SUFFIX) {
                            continue;
                        }
                        out.push(if entry.length == 0 {
                            FileStatus::directory(path.child(rest), entry.modified_at)
                        } else {
                            FileStatus::file(path.child(rest), entry.length, entry.modified_at)
                        });
                    }
                    Some((first, _)) => {
                        dirs_seen.insert(first.to_string());
                    }
                }
            }
            for dir in dirs_seen {
                let child = path.child(&dir);
                if !out.iter().any(|s| s.path == child) {
                    out.push(FileStatus::directory(child, 0));
                }
            }
        }
        out.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(out)
    }
}

impl ObjectFilesystem for LegacyFs {
    fn exists(&self, path: &FsPath) -> Result<bool, FsError> {
        Ok(!matches!(self.status_probe(path)?, Probe::Absent))
    }

    fn get_file_status(&self, path: &FsPath) -> Result<FileStatus, FsError> {
        match self.status_probe(path)? {
            Probe::File(s) | Probe::Directory(s) => Ok(s),
            Probe::Absent => Err(FsError::NotFound(path.to_string())),
        }
    }

    /// The filesystem contract checks the path before streaming: one HEAD,
    /// then the GET.
    fn open(&self, path: &FsPath) -> Result<FsDataInput, FsError> {
        let key = path.object_key()?;
        self.store
            .head_object(&key)
            .map_err(|_| FsError::NotFound(path.to_string()))?;
        let got = self
            .store
            .get_object(&key)
            .map_err(|_| FsError::NotFound(path.to_string()))?;
        let length = got.data.len() as u64;
        Ok(FsDataInput {
            data: got.data,
            metadata: got.metadata,
            length,
        })
    }

    fn create(&self, path: &FsPath, opts: CreateOptions) -> Result<Box<dyn FsDataOutput>, FsError> {
        let key = path.object_key()?;
        match self.store.head_object(&key) {
            Ok(_) if !opts.overwrite => return Err(FsError::AlreadyExists(path.to_string())),
            Ok(_) | Err(StoreError::NotFound(_)) => {}
            Err(e) => return Err(e.into()),
        }
        if self.profile.fast_upload {
            Ok(Box::new(PartBufferedOutput {
                stream: Some(self.store.begin_put(key.clone(), Metadata::new())),
                store: self.store.clone(),
                key,
                buf: Vec::new(),
                part_size: self.profile.fast_upload_part_size as usize,
            }))
        } else {
            Ok(Box::new(StagedOutput {
                stream: Some(self.store.begin_put(key.clone(), Metadata::new())),
                store: self.store.clone(),
                key,
                buf: Vec::new(),
            }))
        }
    }

    /// COPY then DELETE. A missing source is reported as a clean false so
    /// the caller's retry logic can shrug it off; that silence is exactly
    /// what loses data when listings lag.
    fn rename(&self, src: &FsPath, dst: &FsPath) -> Result<bool, FsError> {
        let src_key = src.object_key()?;
        match self.store.head_object(&src_key) {
            Ok(_) => {}
            Err(StoreError::NotFound(_)) => return Ok(false),
            Err(e) => return Err(e.into()),
        }
        let dst_key = dst.object_key()?;
        match self.store.copy_object(&src_key, &dst_key) {
            Ok(()) => {
                self.store.delete_object(&src_key)?;
                Ok(true)
            }
            Err(StoreError::NotFound(_)) => Ok(false),
            Err(e) => Err(e.into()),
        }
    }

    fn delete(&self, path: &FsPath, recursive: bool) -> Result<bool, FsError> {
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
                    removed = true;
                }
            }
        }
        match self.store.delete_object(&key) {
            Ok(()) => Ok(true),
            Err(StoreError::NotFound(_)) => Ok(removed),
            Err(e) => Err(e.into()),
        }
    }

    fn list_status(&self, path: &FsPath) -> Result<Vec<FileStatus>, FsError> {
        match self.status_probe(path)? {
            Probe::Absent => Err(FsError::NotFound(path.to_string())),
            Probe::File(status) => Ok(vec![status]),
            Probe::Directory(_) => self.one_level(path),
        }
    }

    /// Walks every ancestor from the container root down, HEAD-probing each
    /// and PUTting a zero-byte marker where nothing answers. No listing
    /// fallback here: a marker missed by the probes is simply re-created.
    fn mkdirs(&self, path: &FsPath) -> Result<bool, FsError> {
        for depth in 1..=path.segments().len() {
            let level = path.ancestor(depth);
            if self.probe_heads(&level)?.is_none() {
                let key = level.object_key()?;
                self.store.put_object(key, b"", Metadata::new())?;
            }
        }
        Ok(true)
    }
}

/// Whole-body staging: every byte sits in client memory until close, then
/// goes up as a single PUT.
struct StagedOutput {
    stream: Option<crate::store::PutStream>,
    store: ObjectStore,
    key: ObjectKey,
    buf: Vec<u8>,
}

impl FsDataOutput for StagedOutput {
    fn write(&mut self, buf: &[u8]) -> Result<(), FsError> {
        if self.stream.is_none() {
            return Err(FsError::StreamClosed(self.key.to_string()));
        }
        self.buf.extend_from_slice(buf);
        self.store.note_staged(self.buf.len() as u64);
        Ok(())
    }

    fn close(&mut self) -> Result<(), FsError> {
        let mut stream = self
            .stream
            .take()
            .ok_or_else(|| FsError::StreamClosed(self.key.to_string()))?;
        stream.push_chunk(&self.buf);
        self.buf = Vec::new();
        stream.finish()?;
        Ok(())
    }
}

/// Buffered multipart: bytes accumulate up to one part and each full part is
/// uploaded (one PUT each); close flushes the residual part.
struct PartBufferedOutput {
    stream: Option<crate::store::PutStream>,
    store: ObjectStore,
    key: ObjectKey,
    buf: Vec<u8>,
    part_size: usize,
}

impl FsDataOutput for PartBufferedOutput {
    fn write(&mut self, mut buf: &[u8]) -> Result<(), FsError> {
        let stream = self
            .stream
            .as_mut()
            .ok_or_else(|| FsError::StreamClosed(self.key.to_string()))?;
        while !buf.is_empty() {
            let room = self.part_size - self.buf.len();
            let take = room.min(buf.len());
            self.buf.extend_from_slice(&buf[..take]);
            buf = &buf[take..];
            self.store.note_staged(self.buf.len() as u64);
            if self.buf.len() == self.part_size {
                stream.push_chunk(&self.buf);
                stream.flush_part();
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
            self.buf = Vec::new();
        }
        stream.finish()?;
        Ok(())
    }
}
