//! End-to-end checks against the compiled binary.

use std::process::Command;

fn ocbench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ocbench"))
}

#[test]
fn golden_verb_accepts_the_committed_logs() {
    let output = ocbench().arg("golden").output().unwrap();
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("ok"), "{stdout}");
}

#[test]
fn run_verb_prints_the_report_header() {
    let output = ocbench()
        .args([
            "run",
            "--workload.list",
            "SingleTask",
            "--scenario.list",
            "Stocator",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    let header = stdout.lines().next().unwrap();
    assert!(header.starts_with("scenario"), "{header}");
    assert!(header.contains("GET-container"), "{header}");
    assert!(stdout.contains("Stocator"), "{stdout}");
}

#[test]
fn trace_verb_emits_one_json_object_per_event() {
    let output = ocbench()
        .args([
            "trace",
            "--workload.list",
            "SingleTask",
            "--scenario.list",
            "Stocator",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 8, "{stdout}");
    for line in lines {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(value["scenario"], "Stocator");
        assert_eq!(value["workload"], "SingleTask");
    }
}

#[test]
fn golden_verb_flags_a_tampered_log() {
    let dir = tempfile::tempdir().unwrap();
    let shipped = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("golden");
    for name in ["single_task_stocator.txt", "three_task_stocator.txt"] {
        std::fs::copy(shipped.join(name), dir.path().join(name)).unwrap();
    }
    let victim = dir.path().join("single_task_stocator.txt");
    let text = std::fs::read_to_string(&victim).unwrap();
    std::fs::write(&victim, text.replace("_SUCCESS", "_DONE")).unwrap();

    let output = ocbench()
        .args(["golden", "--golden-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("MISMATCH"), "{stdout}");
    assert!(stdout.contains("_DONE"), "{stdout}");
}

#[test]
fn demo_verb_reports_the_incomplete_outputs() {
    let output = ocbench().arg("demo-inconsistency").output().unwrap();
    assert!(output.status.success(), "{output:?}");
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("OUTPUT INCOMPLETE"), "{stdout}");
    assert!(stdout.contains("output complete"), "{stdout}");
}

#[test]
fn invalid_config_value_is_rejected_with_context() {
    let output = ocbench()
        .args(["run", "--workload.parts", "0"])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("workload.parts"), "{stderr}");
}
