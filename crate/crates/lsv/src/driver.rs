//! End-to-end pipeline: discovery → extraction → prioritization → checking
//! → analysis → reporting.
//!
//! The driver owns the schedule. Workers (up to `max_parallel_invocations`)
//! pull tasks in planned order and may finish out of order; results are
//! re-sequenced into the planned order before analysis and reporting, so
//! reports are deterministic regardless of completion interleaving.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::analysis::{
    extract_violations_with, parse_outcome, CweTable, Outcome, PatternTable, Violation,
};
use crate::checker::{self, BackendTemplate, CheckerCommand, CheckerRun, MockFixture};
use crate::config::{FunctionMode, RunConfig};
use crate::cparse::{self, FunctionRecord};
use crate::discovery::{self, SourceFile};
use crate::prioritize::{self, PriorityGrade};
use crate::report::{self, RunReport};
use crate::{Error, Result};

/// One file's slice of the verification plan.
#[derive(Debug, Clone)]
pub struct PlanEntry {
    pub file: SourceFile,
    /// Post-prune, post-order function list; empty in main-only mode.
    pub functions: Vec<FunctionRecord>,
    /// True when the file is verified once from `main`.
    pub main_only: bool,
}

impl PlanEntry {
    pub fn invocations(&self) -> u64 {
        if self.main_only {
            1
        } else {
            self.functions.len() as u64
        }
    }
}

/// The full verification schedule.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub entries: Vec<PlanEntry>,
    pub total_invocations: u64,
    /// Extraction count before pruning (entry markers in main-only mode).
    pub functions_extracted: u64,
    /// Files enumerated by discovery, including ones later skipped.
    pub files_scanned: u64,
}

/// Everything a finished run produced, for callers that want more than the
/// exit code.
#[derive(Debug)]
pub struct RunArtifacts {
    pub report: RunReport,
    /// (file, function) per invocation, in dispatch order.
    pub ledger: Vec<(String, String)>,
    pub output_dir: PathBuf,
    pub warnings: Vec<String>,
}

/// Build the verification schedule for a configuration.
pub fn plan(config: &RunConfig, warnings: &mut Vec<String>) -> Result<RunPlan> {
    let files = discovery::list_sources(config, warnings)?;
    let files_scanned = files.len() as u64;

    if config.function_mode == FunctionMode::MainOnly {
        let entries: Vec<PlanEntry> = files
            .into_iter()
            .map(|file| PlanEntry {
                file,
                functions: Vec::new(),
                main_only: true,
            })
            .collect();
        let total = entries.len() as u64;
        return Ok(RunPlan {
            entries,
            total_invocations: total,
            functions_extracted: total,
            files_scanned,
        });
    }

    let mut per_file: Vec<(SourceFile, Vec<FunctionRecord>)> = Vec::new();
    let mut functions_extracted = 0u64;
    for file in files {
        let functions = cparse::extract_functions(&file, warnings)?;
        if functions.is_empty() {
            warnings.push(format!(
                "{}: no function definitions found; file skipped",
                file.path.display()
            ));
            continue;
        }
        functions_extracted += functions.len() as u64;
        per_file.push((file, functions));
    }

    if config.function_mode == FunctionMode::PerFunctionPrioritized {
        for (_, functions) in per_file.iter_mut() {
            for f in functions.iter_mut() {
                f.grade = Some(prioritize::grade(f));
            }
        }
        if config.call_map_run_wide {
            let all: Vec<FunctionRecord> = per_file
                .iter()
                .flat_map(|(_, fns)| fns.iter().cloned())
                .collect();
            let calls = cparse::build_call_map(&all);
            for (_, functions) in per_file.iter_mut() {
                let fns = std::mem::take(functions);
                *functions = prioritize::order(prioritize::prune_called(fns, &calls, warnings));
            }
        } else {
            for (_, functions) in per_file.iter_mut() {
                let fns = std::mem::take(functions);
                let calls = cparse::build_call_map(&fns);
                *functions = prioritize::order(prioritize::prune_called(fns, &calls, warnings));
            }
        }
    }

    let entries: Vec<PlanEntry> = per_file
        .into_iter()
        .map(|(file, functions)| PlanEntry {
            file,
            functions,
            main_only: false,
        })
        .collect();
    let total_invocations = entries.iter().map(PlanEntry::invocations).sum();
    Ok(RunPlan {
        entries,
        total_invocations,
        functions_extracted,
        files_scanned,
    })
}

enum Backend {
    Real(PathBuf),
    Mock(MockFixture),
}

struct Task {
    file: SourceFile,
    entry: Option<String>,
    grade: Option<PriorityGrade>,
    cmd: CheckerCommand,
}

/// Execute the plan, write report.csv / run.log / summary.txt into the
/// output directory, and return the artifacts.
///
/// `interrupt` is checked between invocations: when it flips, no new work is
/// dispatched, completed sections are flushed, and the summary is marked
/// `interrupted: true`.
pub fn run(config: &RunConfig, interrupt: &AtomicBool) -> Result<RunArtifacts> {
    let mut warnings = Vec::new();

    // Backend problems are fatal configuration errors, caught before any
    // invocation starts.
    let backend = match &config.mock_fixture {
        Some(path) => Backend::Mock(MockFixture::from_file(path)?),
        None => {
            let requested = config
                .backend_path
                .clone()
                .unwrap_or_else(|| PathBuf::from(checker::DEFAULT_BACKEND));
            let resolved = checker::find_executable(&requested).ok_or_else(|| {
                Error::Config(format!(
                    "backend executable `{}` not found or not executable",
                    requested.display()
                ))
            })?;
            Backend::Real(resolved)
        }
    };

    let patterns = match &config.pattern_table {
        Some(path) => PatternTable::from_file(path)?,
        None => PatternTable::default(),
    };
    let cwes = match &config.cwe_table {
        Some(path) => CweTable::from_file(path)?,
        None => CweTable::default(),
    };

    let output_dir = config.output_dir.clone().unwrap_or_else(default_output_dir);
    std::fs::create_dir_all(&output_dir).map_err(|e| {
        Error::output(
            format!("cannot create output directory `{}`", output_dir.display()),
            e,
        )
    })?;

    let run_plan = plan(config, &mut warnings)?;
    let template = BackendTemplate::default();

    let mut tasks: Vec<Task> = Vec::new();
    for entry in &run_plan.entries {
        if entry.main_only {
            tasks.push(Task {
                file: entry.file.clone(),
                entry: None,
                grade: None,
                cmd: checker::build_invocation(&entry.file, None, config, &template)?,
            });
        } else {
            for f in &entry.functions {
                tasks.push(Task {
                    file: entry.file.clone(),
                    entry: Some(f.name.clone()),
                    grade: f.grade,
                    cmd: checker::build_invocation(&entry.file, Some(&f.name), config, &template)?,
                });
            }
        }
    }

    let total = tasks.len();
    let ledger: Mutex<Vec<(String, String)>> = Mutex::new(Vec::with_capacity(total));
    let results: Vec<Mutex<Option<CheckerRun>>> = (0..total).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = config.max_parallel_invocations.clamp(1, total.max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if interrupt.load(Ordering::SeqCst) {
                    break;
                }
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= total {
                    break;
                }
                let task = &tasks[idx];
                let function = task.entry.as_deref().unwrap_or("main");
                ledger
                    .lock()
                    .unwrap()
                    .push((task.file.path.display().to_string(), function.to_string()));
                if config.verbose {
                    let grade = task
                        .grade
                        .map(|g| format!(" [grade {g}]"))
                        .unwrap_or_default();
                    eprintln!(
                        "verifying {}::{}{} ({}/{})",
                        task.file.path.display(),
                        function,
                        grade,
                        idx + 1,
                        total
                    );
                }
                let run = match &backend {
                    Backend::Mock(fixture) => checker::mock_execute(fixture, &task.cmd),
                    Backend::Real(path) => {
                        let mut cmd = task.cmd.clone();
                        cmd.backend_path = path.clone();
                        checker::execute(&cmd, config.timeout_per_function)
                    }
                };
                *results[idx].lock().unwrap() = Some(run);
            });
        }
    });

    let interrupted = interrupt.load(Ordering::SeqCst);
    // Re-sequence into planned order; unfinished slots (interrupt) drop out.
    let runs: Vec<CheckerRun> = results
        .into_iter()
        .filter_map(|slot| slot.into_inner().unwrap())
        .collect();

    let mut outcomes = Vec::with_capacity(runs.len());
    let mut items: Vec<(Violation, Outcome)> = Vec::new();
    for run in &runs {
        let outcome = parse_outcome(run);
        if outcome == Outcome::Failed {
            let fallback = run.command.entry.as_deref().unwrap_or("main");
            for v in extract_violations_with(run, fallback, &patterns, &cwes) {
                items.push((v, outcome));
            }
        }
        outcomes.push(outcome);
    }

    let start_lines: BTreeMap<String, u32> = run_plan
        .entries
        .iter()
        .flat_map(|e| e.functions.iter())
        .map(|f| (f.name.clone(), f.start_line))
        .collect();
    let rows = report::assemble_rows(items, &start_lines);

    let csv_path = output_dir.join("report.csv");
    let log_path = output_dir.join("run.log");
    let summary_path = output_dir.join("summary.txt");
    report::write_csv(&rows, &csv_path, config.csv_extended)?;
    report::write_log(&runs, &log_path)?;
    let summary = report::summarize(
        run_plan.files_scanned,
        run_plan.functions_extracted,
        &runs,
        &outcomes,
        &rows,
        interrupted,
    );
    report::write_summary(&summary, &summary_path)?;

    Ok(RunArtifacts {
        report: RunReport {
            rows,
            summary,
            csv_path,
            log_path,
            summary_path,
        },
        ledger: ledger.into_inner().unwrap(),
        output_dir,
        warnings,
    })
}

/// Exit code for a completed run: 0 with no violations, 10 otherwise.
pub fn exit_code_for(artifacts: &RunArtifacts) -> i32 {
    if artifacts.report.summary.violations_total > 0 {
        10
    } else {
        0
    }
}

/// Exit code for a failed run: 2 for configuration errors, 3 for fatal
/// runtime errors.
pub fn error_exit_code(error: &Error) -> i32 {
    if error.is_configuration() {
        2
    } else {
        3
    }
}

fn default_output_dir() -> PathBuf {
    let stamp = chrono::Utc::now().format("%Y%m%d-%H%M%S%.3f").to_string();
    PathBuf::from("./lsv-output").join(stamp)
}
