//! Report rows and their table, CSV, and JSONL renderings.

use serde::{Deserialize, Serialize};

use ocbench_core::engine::RunReport;
use ocbench_core::store::RestOpKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Table,
    Csv,
    Jsonl,
}

impl OutputFormat {
    pub fn parse(input: &str) -> Result<Self, String> {
        match input.trim().to_ascii_lowercase().as_str() {
            "table" => Ok(OutputFormat::Table),
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" => Ok(OutputFormat::Jsonl),
            other => Err(format!(
                "unknown format {other:?}, expected table, csv, or jsonl"
            )),
        }
    }
}

/// Column order is part of the output contract; every renderer follows it.
pub const COLUMNS: [&str; 14] = [
    "scenario",
    "workload",
    "HEAD",
    "PUT",
    "COPY",
    "DELETE",
    "GET-container",
    "total",
    "bytes_put",
    "bytes_got",
    "bytes_copied",
    "peak_staged",
    "cost",
    "complete",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub workload: String,
    #[serde(rename = "HEAD")]
    pub head: u64,
    #[serde(rename = "PUT")]
    pub put: u64,
    #[serde(rename = "COPY")]
    pub copy: u64,
    #[serde(rename = "DELETE")]
    pub delete: u64,
    #[serde(rename = "GET-container")]
    pub get_container: u64,
    pub total: u64,
    pub bytes_put: u64,
    pub bytes_got: u64,
    pub bytes_copied: u64,
    pub peak_staged: u64,
    pub cost: f64,
    pub complete: bool,
}

impl ReportRow {
    pub fn new(scenario: &str, workload: &str, report: &RunReport) -> Self {
        let t = &report.tally;
        Self {
            scenario: scenario.to_string(),
            workload: workload.to_string(),
            head: t.count(RestOpKind::HeadObject),
            put: t.count(RestOpKind::PutObject),
            copy: t.count(RestOpKind::CopyObject),
            delete: t.count(RestOpKind::DeleteObject),
            get_container: t.count(RestOpKind::GetContainer),
            total: t.total_ops(),
            bytes_put: t.bytes_put,
            bytes_got: t.bytes_got,
            bytes_copied: t.bytes_copied,
            peak_staged: t.peak_staged,
            cost: report.cost,
            complete: report.complete,
        }
    }

    fn cells(&self) -> [String; 14] {
        [
            self.scenario.clone(),
            self.workload.clone(),
            self.head.to_string(),
            self.put.to_string(),
            self.copy.to_string(),
            self.delete.to_string(),
            self.get_container.to_string(),
            self.total.to_string(),
            self.bytes_put.to_string(),
            self.bytes_got.to_string(),
            self.bytes_copied.to_string(),
            self.peak_staged.to_string(),
            self.cost.to_string(),
            self.complete.to_string(),
        ]
    }

    fn from_cells(cells: &[&str]) -> Result<Self, String> {
        if cells.len() != COLUMNS.len() {
            return Err(format!(
                "expected {} columns, got {}",
                COLUMNS.len(),
                cells.len()
            ));
        }
        let num = |i: usize| -> Result<u64, String> {
            cells[i]
                .parse()
                .map_err(|_| format!("column {} is not a count: {:?}", COLUMNS[i], cells[i]))
        };
        Ok(Self {
            scenario: cells[0].to_string(),
            workload: cells[1].to_string(),
            head: num(2)?,
            put: num(3)?,
            copy: num(4)?,
            delete: num(5)?,
            get_container: num(6)?,
            total: num(7)?,
            bytes_put: num(8)?,
            bytes_got: num(9)?,
            bytes_copied: num(10)?,
            peak_staged: num(11)?,
            cost: cells[12]
                .parse()
                .map_err(|_| format!("column cost is not a number: {:?}", cells[12]))?,
            complete: cells[13]
                .parse()
                .map_err(|_| format!("column complete is not a bool: {:?}", cells[13]))?,
        })
    }
}

pub fn render(rows: &[ReportRow], format: OutputFormat) -> String {
    match format {
        OutputFormat::Table => render_table(rows),
        OutputFormat::Csv => render_csv(rows),
        OutputFormat::Jsonl => render_jsonl(rows),
    }
}

pub fn render_table(rows: &[ReportRow]) -> String {
    let mut widths: Vec<usize> = COLUMNS.iter().map(|c| c.len()).collect();
    let all_cells: Vec<[String; 14]> = rows.iter().map(ReportRow::cells).collect();
    for cells in &all_cells {
        for (w, cell) in widths.iter_mut().zip(cells.iter()) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut push_line = |cells: &[String]| {
        let line: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                // Labels flush left, numbers flush right.
                if i < 2 {
                    format!("{:<width$}", cell, width = widths[i])
                } else {
                    format!("{:>width$}", cell, width = widths[i])
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    };
    push_line(&COLUMNS.map(String::from));
    for cells in &all_cells {
        push_line(cells);
    }
    out
}

pub fn render_csv(rows: &[ReportRow]) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.cells().join(","));
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<ReportRow>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty csv")?;
    if header != COLUMNS.join(",") {
        return Err(format!("unexpected header {header:?}"));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| ReportRow::from_cells(&line.split(',').collect::<Vec<_>>()))
        .collect()
}

pub fn render_jsonl(rows: &[ReportRow]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row).expect("row serializes"));
        out.push('\n');
    }
    out
}

pub fn parse_jsonl(text: &str) -> Result<Vec<ReportRow>, String> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| serde_json::from_str(line).map_err(|e| e.to_string()))
        .collect()
}
