//! Deterministic laboratory for analytics-to-object-store connectors.
//!
//! The crate models the write path of a Hadoop-style analytics engine against an
//! eventually consistent object store, at the granularity where connector design
//! decisions become visible: every REST operation is metered, listings can lag
//! object creation and deletion, and job scheduling runs on a logical clock so a
//! given seed always replays the same operation stream.
//!
//! Layers, bottom up:
//!
//! * [`store`]: the in-memory object store. Atomic PUT, strong read-after-write
//!   for GET/HEAD, configurable listing lags, an operation tally, and an optional
//!   trace of every call.
//! * [`fs`]: a Hadoop-like filesystem contract over the store, plus the path
//!   grammar shared by the connectors (attempt identifiers, temporary-directory
//!   shapes, final object names).
//! * [`connector`]: two implementations of the contract. The rename-free
//!   connector writes task output directly under its final attempt-qualified
//!   name and resolves readers by listing or manifest; the legacy connector
//!   stages output in temporary directories and relies on the committer's
//!   copy-plus-delete renames.
//! * [`engine`]: a miniature driver/executor scheduler that runs the standard
//!   commit protocol (v1, v2, or direct) over either connector, with fail-stop
//!   fault injection and speculative attempts.

pub mod connector;
pub mod engine;
pub mod fs;
pub mod store;
