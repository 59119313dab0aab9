//! Report assembly: the CSV spreadsheet of violations, the aggregated raw
//! log, and run-level summary statistics.
//!
//! Rows are deduplicated per (file, line, function, category) — the checker
//! follows callees, so the same violation can surface from several entry
//! functions — and ordered deterministically so the same corpus always
//! produces byte-identical reports.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analysis::{Outcome, Violation, ViolationCategory};
use crate::checker::{self, CheckerRun};
use crate::{Error, Result};

/// One CSV row: a violation joined with the outcome of the run that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub violation: Violation,
    pub status: Outcome,
    /// How many times this (file, line, function, category) was seen before
    /// deduplication.
    pub duplicates: u32,
    /// Start line of the named function, when it was extracted this run.
    pub func_start_line: Option<u32>,
}

/// The assembled per-run report.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub rows: Vec<ReportRow>,
    pub summary: RunSummary,
    pub csv_path: PathBuf,
    pub log_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Run-level aggregates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub files_scanned: u64,
    pub functions_extracted: u64,
    pub functions_verified: u64,
    pub violations_total: u64,
    pub violations_by_category: BTreeMap<ViolationCategory, u64>,
    /// Invocation count per outcome; errors and timeouts are accounted here,
    /// never as violations.
    pub runs_by_outcome: BTreeMap<Outcome, u64>,
    pub total_cpu_time_s: f64,
    pub total_wall_time_s: f64,
    pub peak_child_memory_bytes: u64,
    pub peak_orchestrator_memory_bytes: u64,
    pub interrupted: bool,
}

/// Deduplicate and order violations into report rows.
///
/// `start_lines` maps extracted function names to their definition line for
/// the extended column set.
pub fn assemble_rows(
    items: Vec<(Violation, Outcome)>,
    start_lines: &BTreeMap<String, u32>,
) -> Vec<ReportRow> {
    let mut dedup: BTreeMap<(String, u32, String, &'static str), ReportRow> = BTreeMap::new();
    for (violation, status) in items {
        let key = (
            violation.source_file.clone(),
            violation.line,
            violation.function.clone(),
            violation.category.tag(),
        );
        match dedup.get_mut(&key) {
            Some(row) => row.duplicates += 1,
            None => {
                let func_start_line = start_lines.get(&violation.function).copied();
                dedup.insert(
                    key,
                    ReportRow {
                        violation,
                        status,
                        duplicates: 1,
                        func_start_line,
                    },
                );
            }
        }
    }
    dedup.into_values().collect()
}

/// CSV column headers, base and extended.
pub const CSV_HEADERS: [&str; 5] = ["filename", "status", "function", "line", "violation_type"];
pub const CSV_HEADERS_EXTENDED: [&str; 7] = [
    "filename",
    "status",
    "function",
    "line",
    "violation_type",
    "cwes",
    "function_start_line",
];

/// Write the violation spreadsheet: a header row, then one row per violation
/// ordered by (filename, line, function, category). Fields containing
/// commas, quotes, or newlines are quoted with doubled inner quotes; records
/// are separated by `\n`.
pub fn write_csv(rows: &[ReportRow], path: &Path, extended: bool) -> Result<()> {
    let mut sorted: Vec<&ReportRow> = rows.iter().collect();
    sorted.sort_by_key(|r| {
        (
            r.violation.source_file.clone(),
            r.violation.line,
            r.violation.function.clone(),
            r.violation.category.tag(),
        )
    });

    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::output(format!("cannot write CSV `{}`", path.display()), e))?;
    let headers: &[&str] = if extended {
        &CSV_HEADERS_EXTENDED
    } else {
        &CSV_HEADERS
    };
    writer
        .write_record(headers)
        .map_err(|e| Error::output(format!("cannot write CSV `{}`", path.display()), e))?;
    for row in sorted {
        let v = &row.violation;
        let line = v.line.to_string();
        let mut record = vec![
            v.source_file.as_str(),
            row.status.as_str(),
            v.function.as_str(),
            line.as_str(),
        ];
        let vtype_extended;
        if extended {
            vtype_extended = format!("{}: {}", v.category.tag(), v.category.description());
            record.push(&vtype_extended);
        } else {
            record.push(v.category.tag());
        }
        let cwes;
        let start;
        if extended {
            cwes = v.cwes.join(" ");
            start = row
                .func_start_line
                .map(|l| l.to_string())
                .unwrap_or_default();
            record.push(&cwes);
            record.push(&start);
        }
        writer
            .write_record(&record)
            .map_err(|e| Error::output(format!("cannot write CSV `{}`", path.display()), e))?;
    }
    writer
        .flush()
        .map_err(|e| Error::output(format!("cannot write CSV `{}`", path.display()), e))?;
    Ok(())
}

/// Write the aggregated log: one section per invocation, in verification
/// order, each headed by `=== <file> :: <function> ===` and holding the
/// captured output byte-for-byte.
pub fn write_log(runs: &[CheckerRun], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| Error::output(format!("cannot write log `{}`", path.display()), e))?;
    let emit = |file: &mut std::fs::File, text: &str| -> std::io::Result<()> {
        file.write_all(text.as_bytes())?;
        if !text.is_empty() && !text.ends_with('\n') {
            file.write_all(b"\n")?;
        }
        Ok(())
    };
    for run in runs {
        let io_result = (|| -> std::io::Result<()> {
            writeln!(
                file,
                "=== {} :: {} ===",
                run.command.target.display(),
                run.command.entry.as_deref().unwrap_or("main")
            )?;
            emit(&mut file, &run.stdout_text)?;
            if !run.stderr_text.is_empty() {
                writeln!(file, "--- stderr ---")?;
                emit(&mut file, &run.stderr_text)?;
            }
            writeln!(file)?;
            Ok(())
        })();
        io_result.map_err(|e| Error::output(format!("cannot write log `{}`", path.display()), e))?;
    }
    Ok(())
}

/// Compute the run-level aggregates.
pub fn summarize(
    files_scanned: u64,
    functions_extracted: u64,
    runs: &[CheckerRun],
    outcomes: &[Outcome],
    rows: &[ReportRow],
    interrupted: bool,
) -> RunSummary {
    let mut violations_by_category: BTreeMap<ViolationCategory, u64> = BTreeMap::new();
    for row in rows {
        *violations_by_category
            .entry(row.violation.category)
            .or_default() += 1;
    }
    let mut runs_by_outcome: BTreeMap<Outcome, u64> = BTreeMap::new();
    for o in outcomes {
        *runs_by_outcome.entry(*o).or_default() += 1;
    }
    RunSummary {
        files_scanned,
        functions_extracted,
        functions_verified: runs.len() as u64,
        violations_total: rows.len() as u64,
        violations_by_category,
        runs_by_outcome,
        total_cpu_time_s: runs.iter().map(|r| r.cpu_time_s).sum(),
        total_wall_time_s: runs.iter().map(|r| r.wall_time_s).sum(),
        peak_child_memory_bytes: runs.iter().map(|r| r.peak_memory_bytes).max().unwrap_or(0),
        peak_orchestrator_memory_bytes: checker::orchestrator_peak_rss_bytes(),
        interrupted,
    }
}

/// Write `summary.txt` as `key: value` lines mirroring [`RunSummary`].
pub fn write_summary(summary: &RunSummary, path: &Path) -> Result<()> {
    let mut text = String::new();
    text.push_str(&format!("files_scanned: {}\n", summary.files_scanned));
    text.push_str(&format!(
        "functions_extracted: {}\n",
        summary.functions_extracted
    ));
    text.push_str(&format!(
        "functions_verified: {}\n",
        summary.functions_verified
    ));
    text.push_str(&format!("violations_total: {}\n", summary.violations_total));
    for (cat, n) in &summary.violations_by_category {
        text.push_str(&format!("violations[{}]: {}\n", cat.tag(), n));
    }
    for (outcome, n) in &summary.runs_by_outcome {
        text.push_str(&format!("runs[{}]: {}\n", outcome.as_str(), n));
    }
    text.push_str(&format!(
        "total_cpu_time_s: {:.3}\n",
        summary.total_cpu_time_s
    ));
    text.push_str(&format!(
        "total_wall_time_s: {:.3}\n",
        summary.total_wall_time_s
    ));
    text.push_str(&format!(
        "peak_child_memory_bytes: {}\n",
        summary.peak_child_memory_bytes
    ));
    text.push_str(&format!(
        "peak_orchestrator_memory_bytes: {}\n",
        summary.peak_orchestrator_memory_bytes
    ));
    text.push_str(&format!("interrupted: {}\n", summary.interrupted));
    std::fs::write(path, text)
        .map_err(|e| Error::output(format!("cannot write summary `{}`", path.display()), e))
}
