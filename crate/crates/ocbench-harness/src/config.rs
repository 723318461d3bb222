//! Flat `key = value` configuration. Every key doubles as a CLI flag of the
//! same name, so a committed config file and a command line describe the
//! same experiment.

use std::collections::BTreeMap;

use ocbench_core::engine::{AttemptOutcome, FaultPlan};
use ocbench_core::store::ConsistencyPolicy;

use crate::pricing::PricingModel;
use crate::report::OutputFormat;
use crate::scenario::Scenario;
use crate::workload::WorkloadKind;

/// One configurable key: name, default, and help text for the CLI.
pub struct KeyDef {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

pub const KEYS: &[KeyDef] = &[
    KeyDef {
        name: "store.create_listing_lag",
        default: "0",
        help: "Ticks before a new object appears in container listings",
    },
    KeyDef {
        name: "store.delete_listing_lag",
        default: "0",
        help: "Ticks a deleted object lingers in container listings",
    },
    KeyDef {
        name: "scenario.list",
        default: "HS-Base,S3a-Base,Stocator,HS-Cv2,S3a-Cv2,S3a-Cv2-FU",
        help: "Comma-separated scenarios to run",
    },
    KeyDef {
        name: "scenario.stocator_read",
        default: "listing",
        help: "Stocator read resolution: listing or manifest",
    },
    KeyDef {
        name: "workload.list",
        default: "SingleTask,ThreeTask,WriteOnly,Copy,ReadOnly",
        help: "Comma-separated workloads to run",
    },
    KeyDef {
        name: "workload.container",
        default: "res",
        help: "Container holding every dataset",
    },
    KeyDef {
        name: "workload.dataset",
        default: "data.txt",
        help: "Output dataset name inside the container",
    },
    KeyDef {
        name: "workload.parts",
        default: "8",
        help: "Part count for WriteOnly, Copy, and ReadOnly",
    },
    KeyDef {
        name: "workload.part_size",
        default: "1048576",
        help: "Bytes per part for WriteOnly, Copy, and ReadOnly",
    },
    KeyDef {
        name: "faults.plan",
        default: "",
        help: "Scripted attempts, e.g. '2:slow(8),slow(4),slow(6);0:fail-before-close'",
    },
    KeyDef {
        name: "faults.speculation_threshold",
        default: "2",
        help: "Ticks a task may stay uncommitted before a backup attempt starts",
    },
    KeyDef {
        name: "faults.cleanup_aborted",
        default: "true",
        help: "Whether aborted attempts delete their output",
    },
    KeyDef {
        name: "pricing.class_a",
        default: "1.0",
        help: "Price per PUT, COPY, or container listing",
    },
    KeyDef {
        name: "pricing.class_b",
        default: "1.0",
        help: "Price per GET, HEAD, or DELETE",
    },
    KeyDef {
        name: "run.seed",
        default: "42",
        help: "Seed for part bodies",
    },
    KeyDef {
        name: "run.repeats",
        default: "1",
        help: "Repeats per matrix cell",
    },
    KeyDef {
        name: "output.format",
        default: "table",
        help: "Report format: table, csv, or jsonl",
    },
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub create_listing_lag: u64,
    pub delete_listing_lag: u64,
    pub scenarios: Vec<Scenario>,
    pub stocator_read: ocbench_core::connector::stocator::ReadOption,
    pub workloads: Vec<WorkloadKind>,
    pub container: String,
    pub dataset: String,
    pub parts: usize,
    pub part_size: u64,
    pub fault_outcomes: BTreeMap<usize, Vec<AttemptOutcome>>,
    pub speculation_threshold: u64,
    pub cleanup_aborted: bool,
    pub class_a: f64,
    pub class_b: f64,
    pub seed: u64,
    pub repeats: usize,
    pub format: OutputFormat,
}

impl Default for Config {
    fn default() -> Self {
        let mut cfg = Self {
            create_listing_lag: 0,
            delete_listing_lag: 0,
            scenarios: Vec::new(),
            stocator_read: ocbench_core::connector::stocator::ReadOption::Listing,
            workloads: Vec::new(),
            container: String::new(),
            dataset: String::new(),
            parts: 0,
            part_size: 0,
            fault_outcomes: BTreeMap::new(),
            speculation_threshold: 0,
            cleanup_aborted: true,
            class_a: 0.0,
            class_b: 0.0,
            seed: 0,
            repeats: 0,
            format: OutputFormat::Table,
        };
        for key in KEYS {
            cfg.apply(key.name, key.default)
                .expect("defaults must parse");
        }
        cfg
    }
}

impl Config {
    /// Set one key. Unknown keys and unparsable values are errors.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        match key {
            "store.create_listing_lag" => self.create_listing_lag = parse_num(key, value)?,
            "store.delete_listing_lag" => self.delete_listing_lag = parse_num(key, value)?,
            "scenario.list" => {
                self.scenarios = split_list(value)
                    .map(Scenario::parse)
                    .collect::<Result<Vec<_>, _>>()?;
                if self.scenarios.is_empty() {
                    return Err("scenario.list must name at least one scenario".into());
                }
            }
            "scenario.stocator_read" => {
                self.stocator_read = match value.to_ascii_lowercase().as_str() {
                    "listing" => ocbench_core::connector::stocator::ReadOption::Listing,
                    "manifest" => ocbench_core::connector::stocator::ReadOption::Manifest,
                    other => {
                        return Err(format!(
                            "scenario.stocator_read must be listing or manifest, got {other:?}"
                        ))
                    }
                }
            }
            "workload.list" => {
                self.workloads = split_list(value)
                    .map(WorkloadKind::parse)
                    .collect::<Result<Vec<_>, _>>()?;
                if self.workloads.is_empty() {
                    return Err("workload.list must name at least one workload".into());
                }
            }
            "workload.container" => {
                if value.is_empty() || value.contains('/') || value.contains(':') {
                    return Err(format!(
                        "workload.container must be a bare container name, got {value:?}"
                    ));
                }
                self.container = value.to_string();
            }
            "workload.dataset" => {
                let bad = value.is_empty()
                    || value.contains("://")
                    || value.starts_with('/')
                    || value.ends_with('/')
                    || value.contains("//");
                if bad {
                    return Err(format!(
                        "workload.dataset must be a container-relative object path, got {value:?}"
                    ));
                }
                self.dataset = value.to_string();
            }
            "workload.parts" => {
                self.parts = parse_num(key, value)?;
                if self.parts == 0 {
                    return Err("workload.parts must be at least 1".into());
                }
            }
            "workload.part_size" => {
                self.part_size = parse_num(key, value)?;
                if self.part_size == 0 {
                    return Err("workload.part_size must be at least 1 byte".into());
                }
            }
            "faults.plan" => self.fault_outcomes = parse_fault_plan(value)?,
            "faults.speculation_threshold" => {
                self.speculation_threshold = parse_num(key, value)?;
                if self.speculation_threshold == 0 {
                    return Err("faults.speculation_threshold must be at least 1".into());
                }
            }
            "faults.cleanup_aborted" => self.cleanup_aborted = parse_bool(key, value)?,
            "pricing.class_a" => self.class_a = parse_price(key, value)?,
            "pricing.class_b" => self.class_b = parse_price(key, value)?,
            "run.seed" => self.seed = parse_num(key, value)?,
            "run.repeats" => {
                self.repeats = parse_num(key, value)?;
                if self.repeats == 0 {
                    return Err("run.repeats must be at least 1".into());
                }
            }
            "output.format" => self.format = OutputFormat::parse(value)?,
            other => {
                let known: Vec<&str> = KEYS.iter().map(|k| k.name).collect();
                return Err(format!("unknown key {other:?}, expected one of {known:?}"));
            }
        }
        Ok(())
    }

    /// Apply a whole config document: `key = value` lines, `#` comments.
    pub fn apply_file(&mut self, text: &str) -> Result<(), String> {
        for (number, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!("line {}: expected 'key = value'", number + 1));
            };
            self.apply(key.trim(), value.trim())
                .map_err(|e| format!("line {}: {e}", number + 1))?;
        }
        Ok(())
    }

    pub fn policy(&self) -> ConsistencyPolicy {
        ConsistencyPolicy::with_lags(self.create_listing_lag, self.delete_listing_lag)
    }

    pub fn pricing(&self) -> PricingModel {
        PricingModel {
            class_a: self.class_a,
            class_b: self.class_b,
        }
    }

    pub fn faults(&self) -> FaultPlan {
        FaultPlan {
            outcomes: self.fault_outcomes.clone(),
            speculation_threshold: self.speculation_threshold,
            cleanup_aborted: self.cleanup_aborted,
            seed: self.seed,
        }
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("{key} expects an unsigned integer, got {value:?}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("{key} expects true or false, got {other:?}")),
    }
}

fn parse_price(key: &str, value: &str) -> Result<f64, String> {
    let price: f64 = value
        .parse()
        .map_err(|_| format!("{key} expects a number, got {value:?}"))?;
    if !price.is_finite() || price < 0.0 {
        return Err(format!("{key} must be nonnegative, got {value}"));
    }
    Ok(price)
}

/// `task:outcome,outcome;task:...` where outcome is `succeed`, `slow(N)`,
/// `fail-before-close`, or `fail-after-close`.
pub fn parse_fault_plan(text: &str) -> Result<BTreeMap<usize, Vec<AttemptOutcome>>, String> {
    let mut outcomes = BTreeMap::new();
    if text.trim().is_empty() {
        return Ok(outcomes);
    }
    for group in text.split(';') {
        let group = group.trim();
        if group.is_empty() {
            continue;
        }
        let Some((task, list)) = group.split_once(':') else {
            return Err(format!("fault group {group:?} needs 'task:outcomes'"));
        };
        let task: usize = task
            .trim()
            .parse()
            .map_err(|_| format!("bad task index in fault group {group:?}"))?;
        let attempts: Vec<AttemptOutcome> = list
            .split(',')
            .map(|token| parse_outcome(token.trim()))
            .collect::<Result<_, _>>()?;
        if attempts.is_empty() {
            return Err(format!("fault group {group:?} lists no outcomes"));
        }
        if outcomes.insert(task, attempts).is_some() {
            return Err(format!("task {task} appears twice in the fault plan"));
        }
    }
    Ok(outcomes)
}

fn parse_outcome(token: &str) -> Result<AttemptOutcome, String> {
    let lower = token.to_ascii_lowercase();
    if lower == "succeed" {
        return Ok(AttemptOutcome::Succeed);
    }
    if lower == "fail-before-close" {
        return Ok(AttemptOutcome::FailBeforeClose);
    }
    if lower == "fail-after-close" {
        return Ok(AttemptOutcome::FailAfterClose);
    }
    if let Some(inner) = lower
        .strip_prefix("slow(")
        .and_then(|s| s.strip_suffix(')'))
    {
        let ticks: u64 = inner
            .trim()
            .parse()
            .map_err(|_| format!("bad slow() delay in {token:?}"))?;
        return Ok(AttemptOutcome::Slow(ticks));
    }
    Err(format!(
        "unknown outcome {token:?}, expected succeed, slow(N), fail-before-close, or fail-after-close"
    ))
}
