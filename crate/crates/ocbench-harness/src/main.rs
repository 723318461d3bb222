use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Arg, ArgMatches, Command};

use ocbench_harness::config::{Config, KEYS};
use ocbench_harness::golden;
use ocbench_harness::matrix::{run_matrix, trace_jsonl};
use ocbench_harness::report::render;
use ocbench_harness::workload::execute_cell;

const HAZARD_CONFIG: &str = include_str!("../configs/hazard.conf");

/// Every config key doubles as a long flag, applied after the config file.
fn key_args(mut cmd: Command) -> Command {
    for key in KEYS {
        cmd = cmd.arg(
            Arg::new(key.name)
                .long(key.name)
                .value_name("VALUE")
                .help(format!("{} [default: {}]", key.help, key.default)),
        );
    }
    cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("Config file applied before any flag overrides"),
    )
}

fn cli() -> Command {
    Command::new("ocbench")
        .about("Deterministic lab for object-store connectors and commit protocols")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(
            key_args(
                Command::new("run")
                    .about("Execute the scenario × workload matrix and print the report"),
            )
            .arg(
                Arg::new("out")
                    .long("out")
                    .value_name("FILE")
                    .help("Write the report here instead of stdout"),
            )
            .arg(
                Arg::new("trace")
                    .long("trace")
                    .value_name("FILE")
                    .help("Also write the metered store events as JSONL"),
            ),
        )
        .subcommand(
            key_args(
                Command::new("trace")
                    .about("Execute the matrix and emit metered store events as JSONL"),
            )
            .arg(
                Arg::new("out")
                    .long("out")
                    .value_name("FILE")
                    .help("Write the events here instead of stdout"),
            ),
        )
        .subcommand(key_args(Command::new("demo-inconsistency").about(
            "Run the shipped lagging-listing schedule and print each scenario's verdict",
        )))
        .subcommand(
            Command::new("golden")
                .about("Replay the two commit programs and diff their events against the committed logs")
                .arg(
                    Arg::new("golden-dir")
                        .long("golden-dir")
                        .value_name("DIR")
                        .help("Directory with the committed event logs"),
                ),
        )
}

fn load_config(matches: &ArgMatches, base: Option<&str>) -> Result<Config> {
    let mut cfg = Config::default();
    if let Some(text) = base {
        cfg.apply_file(text)
            .map_err(|e| anyhow!("shipped config: {e}"))?;
    }
    if let Some(path) = matches.get_one::<String>("config") {
        let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        cfg.apply_file(&text).map_err(|e| anyhow!("{path}: {e}"))?;
    }
    for key in KEYS {
        if let Some(value) = matches.get_one::<String>(key.name) {
            cfg.apply(key.name, value)
                .map_err(|e| anyhow!("--{}: {e}", key.name))?;
        }
    }
    Ok(cfg)
}

fn emit(text: &str, out: Option<&String>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {path}"))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_run(matches: &ArgMatches) -> Result<()> {
    let cfg = load_config(matches, None)?;
    let outcome = run_matrix(&cfg)?;
    emit(&render(&outcome.rows, cfg.format), matches.get_one("out"))?;
    if let Some(path) = matches.get_one::<String>("trace") {
        fs::write(path, trace_jsonl(&outcome.traces)).with_context(|| format!("writing {path}"))?;
    }
    Ok(())
}

fn cmd_trace(matches: &ArgMatches) -> Result<()> {
    let cfg = load_config(matches, None)?;
    let outcome = run_matrix(&cfg)?;
    emit(&trace_jsonl(&outcome.traces), matches.get_one("out"))
}

fn cmd_demo(matches: &ArgMatches) -> Result<()> {
    let cfg = load_config(matches, Some(HAZARD_CONFIG))?;
    println!(
        "Container listings lag object creation by {} tick(s).",
        cfg.create_listing_lag
    );
    for &workload in &cfg.workloads {
        for &scenario in &cfg.scenarios {
            let report = execute_cell(scenario, workload, &cfg)?;
            let verdict = if report.complete {
                "output complete"
            } else {
                "OUTPUT INCOMPLETE"
            };
            println!(
                "{:<10} {:<10} wrote _SUCCESS: {:<5}  parts readable: {}/{}  -> {}",
                scenario.name(),
                workload.name(),
                report.wrote_success,
                report.parts_readable,
                report.expected_parts,
                verdict
            );
        }
    }
    Ok(())
}

fn cmd_golden(matches: &ArgMatches) -> Result<bool> {
    let dir = matches
        .get_one::<String>("golden-dir")
        .map(PathBuf::from)
        .unwrap_or_else(golden::default_dir);
    let checks = golden::check_against(&dir)?;
    let mut ok = true;
    for check in &checks {
        println!("{check}");
        ok &= check.passed();
    }
    Ok(ok)
}

fn real_main() -> Result<ExitCode> {
    let matches = cli().get_matches();
    match matches.subcommand() {
        Some(("run", m)) => {
            cmd_run(m)?;
            Ok(ExitCode::SUCCESS)
        }
        Some(("trace", m)) => {
            cmd_trace(m)?;
            Ok(ExitCode::SUCCESS)
        }
        Some(("demo-inconsistency", m)) => {
            cmd_demo(m)?;
            Ok(ExitCode::SUCCESS)
        }
        Some(("golden", m)) => Ok(if cmd_golden(m)? {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        }),
        _ => unreachable!("subcommand is required"),
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
