//! Command-line parsing and run configuration.
//!
//! The flag surface is deliberately small and stable: single-dash short
//! options (`-fp`, `-fl`, `-dp`, ...) drive the verification behavior, and a
//! handful of double-dash options control plumbing (timeout, parallelism,
//! output location, backend selection). Parsing is hand-rolled because the
//! multi-character single-dash options do not fit the usual short/long split.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Duration;

use crate::{Error, Result};

/// Default per-function timeout in seconds.
pub const DEFAULT_TIMEOUT_S: f64 = 30.0;
/// Default number of concurrent backend invocations.
pub const DEFAULT_JOBS: usize = 1;

/// What the run verifies: a single C file or a directory tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    File(PathBuf),
    Directory(PathBuf),
}

/// How entry points are chosen for each source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionMode {
    /// Verify from `main` only, the usual model-checker default.
    MainOnly,
    /// Verify every extracted function, in source order, no pruning.
    PerFunction,
    /// Verify every extracted function, graded, pruned, highest risk first.
    PerFunctionPrioritized,
}

/// Vulnerability classes that can be requested from the backend.
///
/// Each class maps to at least one backend flag in the checker's template
/// table; an empty selection leaves the backend running its own defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PropertyClass {
    OutOfBoundsArray,
    IllegalPointerDereference,
    ArithmeticOverflow,
    NanOccurrence,
    DivisionByZero,
    MemoryLeak,
    DynamicAllocation,
    AtomicityViolation,
}

impl PropertyClass {
    pub const ALL: [PropertyClass; 8] = [
        PropertyClass::OutOfBoundsArray,
        PropertyClass::IllegalPointerDereference,
        PropertyClass::ArithmeticOverflow,
        PropertyClass::NanOccurrence,
        PropertyClass::DivisionByZero,
        PropertyClass::MemoryLeak,
        PropertyClass::DynamicAllocation,
        PropertyClass::AtomicityViolation,
    ];

    /// The tag accepted by `-p`.
    pub fn tag(self) -> &'static str {
        match self {
            PropertyClass::OutOfBoundsArray => "out-of-bounds-array",
            PropertyClass::IllegalPointerDereference => "illegal-pointer-dereference",
            PropertyClass::ArithmeticOverflow => "arithmetic-overflow",
            PropertyClass::NanOccurrence => "nan-occurrence",
            PropertyClass::DivisionByZero => "division-by-zero",
            PropertyClass::MemoryLeak => "memory-leak",
            PropertyClass::DynamicAllocation => "dynamic-allocation",
            PropertyClass::AtomicityViolation => "atomicity-violation",
        }
    }

    pub fn from_tag(tag: &str) -> Option<PropertyClass> {
        PropertyClass::ALL.iter().copied().find(|c| c.tag() == tag)
    }
}

/// The full, validated set of run options.
///
/// Immutable after construction; `output_dir` stays `None` when the caller
/// did not pick one, so that parsing stays a pure function of the argument
/// vector (the timestamped default is materialized at run start).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub target: Target,
    pub recursive: bool,
    pub function_mode: FunctionMode,
    pub include_paths: Vec<String>,
    pub backend_args: Vec<String>,
    pub property_selection: BTreeSet<PropertyClass>,
    pub pointer_checks_enabled: bool,
    pub verbose: bool,
    pub timeout_per_function: Duration,
    pub max_parallel_invocations: usize,
    pub output_dir: Option<PathBuf>,
    pub backend_path: Option<PathBuf>,
    pub mock_fixture: Option<PathBuf>,
    /// Replacement classification pattern table; built-in defaults when unset.
    pub pattern_table: Option<PathBuf>,
    /// CWE table overrides; built-in defaults when unset.
    pub cwe_table: Option<PathBuf>,
    pub csv_extended: bool,
    pub call_map_run_wide: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            target: Target::Directory(PathBuf::from(".")),
            recursive: false,
            function_mode: FunctionMode::MainOnly,
            include_paths: Vec::new(),
            backend_args: Vec::new(),
            property_selection: BTreeSet::new(),
            pointer_checks_enabled: true,
            verbose: false,
            timeout_per_function: Duration::from_secs_f64(DEFAULT_TIMEOUT_S),
            max_parallel_invocations: DEFAULT_JOBS,
            output_dir: None,
            backend_path: None,
            mock_fixture: None,
            pattern_table: None,
            cwe_table: None,
            csv_extended: false,
            call_map_run_wide: false,
        }
    }
}

/// Result of parsing the argument vector.
#[derive(Debug, Clone, PartialEq)]
pub enum CliCommand {
    /// `-h`/`--help` was given; print usage and exit 0.
    Help,
    Run(Box<RunConfig>),
}

/// Parse the raw argument vector (program name excluded) into a validated
/// configuration. Unknown flags are rejected, never ignored.
pub fn parse_cli<I, S>(args: I) -> Result<CliCommand>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut it = args.into_iter().map(Into::into);

    let mut function_flag = false;
    let mut prioritized_flag = false;
    let mut verbose = false;
    let mut recursive = false;
    let mut pointer_checks_enabled = true;
    let mut backend_args: Vec<String> = Vec::new();
    let mut include_file: Option<String> = None;
    let mut dir: Option<String> = None;
    let mut file: Option<String> = None;
    let mut properties: BTreeSet<PropertyClass> = BTreeSet::new();
    let mut timeout_s = DEFAULT_TIMEOUT_S;
    let mut jobs = DEFAULT_JOBS;
    let mut output_dir: Option<PathBuf> = None;
    let mut backend_path: Option<PathBuf> = None;
    let mut mock_fixture: Option<PathBuf> = None;
    let mut pattern_table: Option<PathBuf> = None;
    let mut cwe_table: Option<PathBuf> = None;
    let mut csv_extended = false;
    let mut call_map_run_wide = false;

    fn value(it: &mut impl Iterator<Item = String>, flag: &str) -> Result<String> {
        it.next()
            .ok_or_else(|| Error::Usage(format!("{flag} requires a value")))
    }

    while let Some(arg) = it.next() {
        match arg.as_str() {
            "-h" | "--help" => return Ok(CliCommand::Help),
            "-e" | "--esbmc-parameter" => {
                let v = value(&mut it, "-e")?;
                backend_args.extend(v.split_whitespace().map(String::from));
            }
            "-l" => include_file = Some(value(&mut it, "-l")?),
            "-f" | "--function" => function_flag = true,
            "-fp" | "--function-prioritized" => prioritized_flag = true,
            "-v" | "--verbose" => verbose = true,
            "-r" | "--recursive" => recursive = true,
            "-d" => dir = Some(value(&mut it, "-d")?),
            "-p" => {
                let v = value(&mut it, "-p")?;
                for tag in v.split(',') {
                    let tag = tag.trim();
                    match PropertyClass::from_tag(tag) {
                        Some(c) => {
                            properties.insert(c);
                        }
                        None => {
                            return Err(Error::Usage(format!(
                                "unknown vulnerability class `{tag}` (see -h for the list)"
                            )))
                        }
                    }
                }
            }
            "-fl" => file = Some(value(&mut it, "-fl")?),
            "-dp" => pointer_checks_enabled = false,
            "--timeout-s" => {
                let v = value(&mut it, "--timeout-s")?;
                timeout_s = v
                    .parse::<f64>()
                    .ok()
                    .filter(|t| t.is_finite() && *t > 0.0)
                    .ok_or_else(|| {
                        Error::Usage(format!("--timeout-s expects a positive number, got `{v}`"))
                    })?;
            }
            "--jobs" => {
                let v = value(&mut it, "--jobs")?;
                jobs = v
                    .parse::<usize>()
                    .ok()
                    .filter(|j| *j >= 1)
                    .ok_or_else(|| {
                        Error::Usage(format!("--jobs expects an integer >= 1, got `{v}`"))
                    })?;
            }
            "--output-dir" => output_dir = Some(PathBuf::from(value(&mut it, "--output-dir")?)),
            "--backend" => backend_path = Some(PathBuf::from(value(&mut it, "--backend")?)),
            "--mock-backend" => {
                mock_fixture = Some(PathBuf::from(value(&mut it, "--mock-backend")?))
            }
            "--pattern-table" => {
                pattern_table = Some(PathBuf::from(value(&mut it, "--pattern-table")?))
            }
            "--cwe-table" => cwe_table = Some(PathBuf::from(value(&mut it, "--cwe-table")?)),
            "--csv-extended" => csv_extended = true,
            "--call-map-run-wide" => call_map_run_wide = true,
            other => {
                return Err(Error::Usage(format!(
                    "unknown argument `{other}` (run with -h for usage)"
                )))
            }
        }
    }

    let target = match (file, dir) {
        (Some(_), Some(_)) => {
            return Err(Error::Usage(
                "conflicting options: -fl and -d are mutually exclusive".into(),
            ))
        }
        (Some(f), None) => Target::File(PathBuf::from(f)),
        (None, Some(d)) => Target::Directory(PathBuf::from(d)),
        (None, None) => Target::Directory(PathBuf::from(".")),
    };

    // -fp wins when both function flags are present: prioritized verification
    // is a superset of plain per-function verification.
    let function_mode = if prioritized_flag {
        FunctionMode::PerFunctionPrioritized
    } else if function_flag {
        FunctionMode::PerFunction
    } else {
        FunctionMode::MainOnly
    };

    let include_paths = match include_file {
        Some(path) => load_include_paths(&PathBuf::from(path))?,
        None => Vec::new(),
    };

    Ok(CliCommand::Run(Box::new(RunConfig {
        target,
        recursive,
        function_mode,
        include_paths: dedup_normalized(include_paths),
        backend_args,
        property_selection: properties,
        pointer_checks_enabled,
        verbose,
        timeout_per_function: Duration::from_secs_f64(timeout_s),
        max_parallel_invocations: jobs,
        output_dir,
        backend_path,
        mock_fixture,
        pattern_table,
        cwe_table,
        csv_extended,
        call_map_run_wide,
    })))
}

/// Load header search directories from a dependency file, one per line.
///
/// Surrounding whitespace is trimmed, blank lines and `#` comment lines are
/// skipped, order is preserved, and exact duplicates keep their first
/// occurrence. An empty file yields an empty list, not an error.
pub fn load_include_paths(path: &std::path::Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read include list `{}`", path.display()), e))?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if seen.insert(line.to_string()) {
            out.push(line.to_string());
        }
    }
    Ok(out)
}

/// Drop entries that collapse to the same path once trailing slashes are
/// removed, keeping the first spelling seen.
fn dedup_normalized(paths: Vec<String>) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for p in paths {
        let norm = {
            let t = p.trim().trim_end_matches('/');
            if t.is_empty() {
                "/".to_string()
            } else {
                t.to_string()
            }
        };
        if seen.insert(norm) {
            out.push(p);
        }
    }
    out
}

/// Usage text for `-h`/`--help`.
pub fn usage() -> &'static str {
    "lsv - sweep C codebases with a bounded model checker\n\
     \n\
     USAGE:\n\
     \x20   lsv [OPTIONS]\n\
     \n\
     OPTIONS:\n\
     \x20   -h, --help                    show this help\n\
     \x20   -e, --esbmc-parameter <args>  extra arguments passed through to the backend\n\
     \x20                                 (whitespace-split; repeatable)\n\
     \x20   -l <file>                     file listing header include directories, one per line\n\
     \x20   -f, --function                verify every function, in source order\n\
     \x20   -fp, --function-prioritized   verify every function, highest risk grade first\n\
     \x20   -v, --verbose                 print per-invocation progress\n\
     \x20   -r, --recursive               recurse into subdirectories\n\
     \x20   -d <dir>                      directory to verify (default: current directory)\n\
     \x20   -p <classes>                  comma-separated vulnerability classes to check:\n\
     \x20                                 out-of-bounds-array, illegal-pointer-dereference,\n\
     \x20                                 arithmetic-overflow, nan-occurrence, division-by-zero,\n\
     \x20                                 memory-leak, dynamic-allocation, atomicity-violation\n\
     \x20   -fl <file>                    single C file to verify\n\
     \x20   -dp                           disable pointer verification\n\
     \x20       --timeout-s <seconds>     per-function timeout (default: 30)\n\
     \x20       --jobs <n>                parallel backend invocations (default: 1)\n\
     \x20       --output-dir <dir>        report directory (default: ./lsv-output/<UTC timestamp>)\n\
     \x20       --backend <path>          backend checker executable (default: esbmc)\n\
     \x20       --mock-backend <file>     fixture table standing in for the backend\n\
     \x20       --pattern-table <file>    replacement violation-classification patterns\n\
     \x20       --cwe-table <file>        per-category CWE list overrides\n\
     \x20       --csv-extended            add cwes and function_start_line columns to report.csv\n\
     \x20       --call-map-run-wide       prune callees across all files, not per file\n"
}
