//! Connector implementations of the filesystem contract.
//!
//! Two designs over the same store API:
//!
//! * [`stocator::StocatorFs`]: rename-free. Task output is written directly
//!   under its final attempt-qualified name; every path inside the commit
//!   protocol's `_temporary` tree is absorbed without touching the store, and
//!   readers resolve which attempt owns each part at read time.
//! * [`legacy::LegacyFs`]: faithful to the classic Hadoop object-store
//!   drivers. Temporary paths are real objects, directories are zero-byte
//!   markers, and rename is COPY plus DELETE, which is where the committer's
//!   rename step turns into data movement.

pub mod legacy;
pub mod stocator;

use crate::fs::{
    CreateOptions, FileStatus, FsDataInput, FsDataOutput, FsError, FsPath, ObjectFilesystem,
};
use crate::store::ObjectStore;

use legacy::{LegacyFs, LegacyProfile};
use stocator::{StocatorConfig, StocatorFs};

/// Construction recipe for a connector. The engine spawns one instance per
/// role (driver, executor, reader) so each has its own probe cache, the way
/// separate JVM processes would.
#[derive(Debug, Clone, PartialEq)]
pub enum ConnectorSpec {
    Stocator(StocatorConfig),
    Legacy(LegacyProfile),
}

impl ConnectorSpec {
    pub fn spawn(&self, store: &ObjectStore) -> Connector {
        match self {
            ConnectorSpec::Stocator(config) => {
                Connector::Stocator(StocatorFs::new(store.clone(), config.clone()))
            }
            ConnectorSpec::Legacy(profile) => {
                Connector::Legacy(LegacyFs::new(store.clone(), profile.clone()))
            }
        }
    }

    /// URI scheme this connector registers for, mirroring the deployments the
    /// profiles are modeled on.
    pub fn scheme(&self) -> &'static str {
        match self {
            ConnectorSpec::Stocator(_) => "swift2d",
            ConnectorSpec::Legacy(p) if p.listing_per_level => "swift",
            ConnectorSpec::Legacy(_) => "s3a",
        }
    }

    pub fn is_stocator(&self) -> bool {
        matches!(self, ConnectorSpec::Stocator(_))
    }

    pub fn validate(&self) -> Result<(), FsError> {
        match self {
            ConnectorSpec::Stocator(config) => config.validate(),
            ConnectorSpec::Legacy(profile) => profile.validate(),
        }
    }
}

/// A spawned connector instance.
pub enum Connector {
    Stocator(StocatorFs),
    Legacy(LegacyFs),
}

impl Connector {
    pub fn as_stocator(&self) -> Option<&StocatorFs> {
        match self {
            Connector::Stocator(fs) => Some(fs),
            Connector::Legacy(_) => None,
        }
    }

    /// Write the job's `_SUCCESS` marker. The rename-free connector decides
    /// by its read option whether the body is empty or carries the committed
    /// part manifest; the legacy connector always writes zero bytes.
    pub fn write_success(
        &self,
        dataset: &FsPath,
        committed: &stocator::CommittedParts,
    ) -> Result<(), FsError> {
        match self {
            Connector::Stocator(fs) => fs.write_success(dataset, committed),
            Connector::Legacy(fs) => {
                let mut out = fs.create(
                    &crate::fs::naming::success_path(dataset),
                    CreateOptions::overwrite(false),
                )?;
                out.close()
            }
        }
    }
}

impl ObjectFilesystem for Connector {
    fn exists(&self, path: &FsPath) -> Result<bool, FsError> {
        match self {
            Connector::Stocator(fs) => fs.exists(path),
            Connector::Legacy(fs) => fs.exists(path),
        }
    }

    fn get_file_status(&self, path: &FsPath) -> Result<FileStatus, FsError> {
        match self {
            Connector::Stocator(fs) => fs.get_file_status(path),
            Connector::Legacy(fs) => fs.get_file_status(path),
        }
    }

    fn open(&self, path: &FsPath) -> Result<FsDataInput, FsError> {
        match self {
            Connector::Stocator(fs) => fs.open(path),
            Connector::Legacy(fs) => fs.open(path),
        }
    }

    fn create(&self, path: &FsPath, opts: CreateOptions) -> Result<Box<dyn FsDataOutput>, FsError> {
        match self {
            Connector::Stocator(fs) => fs.create(path, opts),
            Connector::Legacy(fs) => fs.create(path, opts),
        }
    }

    fn rename(&self, src: &FsPath, dst: &FsPath) -> Result<bool, FsError> {
        match self {
            Connector::Stocator(fs) => fs.rename(src, dst),
            Connector::Legacy(fs) => fs.rename(src, dst),
        }
    }

    fn delete(&self, path: &FsPath, recursive: bool) -> Result<bool, FsError> {
        match self {
            Connector::Stocator(fs) => fs.delete(path, recursive),
            Connector::Legacy(fs) => fs.delete(path, recursive),
        }
    }

    fn list_status(&self, path: &FsPath) -> Result<Vec<FileStatus>, FsError> {
        match self {
            Connector::Stocator(fs) => fs.list_status(path),
            Connector::Legacy(fs) => fs.list_status(path),
        }
    }

    fn mkdirs(&self, path: &FsPath) -> Result<bool, FsError> {
        match self {
            Connector::Stocator(fs) => fs.mkdirs(path),
            Connector::Legacy(fs) => fs.mkdirs(path),
        }
    }
}
