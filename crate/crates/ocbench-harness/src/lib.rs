//! Benchmark harness for the connector lab: workload catalog, the six-way
//! scenario matrix, request pricing, report rendering, and golden replays
//! of the two commit programs.

pub mod config;
pub mod golden;
pub mod matrix;
pub mod pricing;
pub mod report;
pub mod scenario;
pub mod workload;

use ocbench_core::engine::EngineError;
use ocbench_core::fs::FsError;
use ocbench_core::store::StoreError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("workload: {0}")]
    Workload(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Fs(#[from] FsError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
