//! Backend invocation: command construction, child-process execution with
//! timeout and resource accounting, and a fixture-driven mock backend for
//! hermetic testing.
//!
//! Flag names live in a per-backend template so a different checker is a
//! template change, not a code change. The default template speaks the
//! ESBMC-style surface.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use crate::config::{FunctionMode, PropertyClass, RunConfig};
use crate::discovery::SourceFile;
use crate::{Error, Result};

/// Default backend executable name, resolved on PATH.
pub const DEFAULT_BACKEND: &str = "esbmc";

/// Extra time an invocation may take past its timeout before the process
/// group is considered stuck (covers kill delivery and pipe draining).
pub const KILL_GRACE: Duration = Duration::from_secs(5);

/// Flag spellings for one backend checker.
#[derive(Debug, Clone)]
pub struct BackendTemplate {
    /// Flag selecting the entry function, e.g. `--function`.
    pub entry_flag: String,
    /// Flag introducing one include directory, e.g. `-I`.
    pub include_flag: String,
    /// Flags enabling each selectable property class.
    property_flags: BTreeMap<PropertyClass, Vec<String>>,
    /// Flags appended when pointer verification is disabled.
    pub pointer_disable_flags: Vec<String>,
}

impl BackendTemplate {
    /// The ESBMC-style flag surface.
    pub fn esbmc() -> BackendTemplate {
        let mut property_flags = BTreeMap::new();
        let mut add = |class: PropertyClass, flags: &[&str]| {
            property_flags.insert(class, flags.iter().map(|s| s.to_string()).collect());
        };
        add(PropertyClass::OutOfBoundsArray, &["--bounds-check"]);
        add(PropertyClass::IllegalPointerDereference, &["--pointer-check"]);
        add(PropertyClass::ArithmeticOverflow, &["--overflow-check"]);
        add(PropertyClass::NanOccurrence, &["--nan-check"]);
        add(PropertyClass::DivisionByZero, &["--div-by-zero-check"]);
        add(PropertyClass::MemoryLeak, &["--memory-leak-check"]);
        add(PropertyClass::DynamicAllocation, &["--malloc-fail-check"]);
        add(PropertyClass::AtomicityViolation, &["--atomicity-check"]);
        BackendTemplate {
            entry_flag: "--function".to_string(),
            include_flag: "-I".to_string(),
            property_flags,
            pointer_disable_flags: vec!["--no-pointer-check".to_string()],
        }
    }

    pub fn property_flags(&self, class: PropertyClass) -> &[String] {
        self.property_flags
            .get(&class)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn set_property_flags(&mut self, class: PropertyClass, flags: Vec<String>) {
        self.property_flags.insert(class, flags);
    }
}

impl Default for BackendTemplate {
    fn default() -> Self {
        BackendTemplate::esbmc()
    }
}

/// One fully-built backend invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckerCommand {
    pub backend_path: PathBuf,
    /// Arguments in order: entry selector, include flags, property flags,
    /// passthrough backend args, then the target file exactly once, last.
    pub argv: Vec<String>,
    pub working_dir: PathBuf,
    /// The file being verified (same value as the last argv element).
    pub target: PathBuf,
    /// Entry function, `None` in main-only mode.
    pub entry: Option<String>,
}

/// How the child ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Exited(i32),
    Signaled(i32),
    TimedOut,
}

impl ExitStatus {
    pub fn timed_out(self) -> bool {
        matches!(self, ExitStatus::TimedOut)
    }

    /// Exit code when the child exited normally.
    pub fn code(self) -> Option<i32> {
        match self {
            ExitStatus::Exited(c) => Some(c),
            _ => None,
        }
    }
}

/// Raw outcome of one backend invocation.
#[derive(Debug, Clone)]
pub struct CheckerRun {
    pub command: CheckerCommand,
    pub stdout_text: String,
    pub stderr_text: String,
    pub exit: ExitStatus,
    /// Child CPU time (user + system).
    pub cpu_time_s: f64,
    pub wall_time_s: f64,
    /// Child peak resident set size.
    pub peak_memory_bytes: u64,
}

/// Build the argv for one (file, function) pair. `entry` must be set in the
/// per-function modes and is ignored in main-only mode.
pub fn build_invocation(
    file: &SourceFile,
    entry: Option<&str>,
    config: &RunConfig,
    template: &BackendTemplate,
) -> Result<CheckerCommand> {
    let per_function = config.function_mode != FunctionMode::MainOnly;
    if per_function && entry.is_none() {
        return Err(Error::Internal(
            "per-function mode requires a function marker".to_string(),
        ));
    }

    let mut argv = Vec::new();
    if per_function {
        argv.push(template.entry_flag.clone());
        argv.push(entry.unwrap().to_string());
    }
    for inc in &config.include_paths {
        argv.push(template.include_flag.clone());
        argv.push(inc.clone());
    }
    for class in &config.property_selection {
        if *class == PropertyClass::IllegalPointerDereference && !config.pointer_checks_enabled {
            continue;
        }
        argv.extend(template.property_flags(*class).iter().cloned());
    }
    if !config.pointer_checks_enabled {
        argv.extend(template.pointer_disable_flags.iter().cloned());
    }
    argv.extend(config.backend_args.iter().cloned());
    argv.push(file.path.display().to_string());

    Ok(CheckerCommand {
        backend_path: config
            .backend_path
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_BACKEND)),
        argv,
        working_dir: PathBuf::from("."),
        target: file.path.clone(),
        entry: if per_function {
            entry.map(str::to_string)
        } else {
            None
        },
    })
}

/// Run the command as a child process, killing the whole process group at
/// the timeout. Output is captured in full; CPU time and peak RSS come from
/// the child's resource accounting.
///
/// A spawn failure is reported as a synthesized error run (exit 127 with the
/// message on stderr) so one broken invocation never aborts the sweep.
pub fn execute(cmd: &CheckerCommand, timeout: Duration) -> CheckerRun {
    use std::io::Read;
    use std::os::unix::process::CommandExt;
    use std::process::{Command, Stdio};

    let start = Instant::now();
    let mut command = Command::new(&cmd.backend_path);
    command
        .args(&cmd.argv)
        .current_dir(&cmd.working_dir)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    // New session = new process group, so the timeout kill reaps solver
    // subprocesses too.
    unsafe {
        command.pre_exec(|| {
            libc::setsid();
            Ok(())
        });
    }

    let mut child = match command.spawn() {
        Ok(c) => c,
        Err(e) => {
            return CheckerRun {
                command: cmd.clone(),
                stdout_text: String::new(),
                stderr_text: format!(
                    "failed to spawn backend `{}`: {e}\n",
                    cmd.backend_path.display()
                ),
                exit: ExitStatus::Exited(127),
                cpu_time_s: 0.0,
                wall_time_s: start.elapsed().as_secs_f64(),
                peak_memory_bytes: 0,
            }
        }
    };

    let mut stdout_pipe = child.stdout.take().expect("stdout is piped");
    let mut stderr_pipe = child.stderr.take().expect("stderr is piped");
    let out_handle = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stdout_pipe.read_to_end(&mut buf);
        buf
    });
    let err_handle = std::thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = stderr_pipe.read_to_end(&mut buf);
        buf
    });

    let pid = child.id() as libc::pid_t;
    let deadline = start + timeout;
    let mut status: libc::c_int = 0;
    let mut rusage: libc::rusage = unsafe { std::mem::zeroed() };

    let exit = loop {
        let reaped = unsafe { libc::wait4(pid, &mut status, libc::WNOHANG, &mut rusage) };
        if reaped == pid {
            break decode_wait_status(status);
        }
        if reaped < 0 {
            break ExitStatus::Exited(-1);
        }
        if Instant::now() >= deadline {
            unsafe {
                libc::kill(-pid, libc::SIGKILL);
                libc::kill(pid, libc::SIGKILL);
                libc::wait4(pid, &mut status, 0, &mut rusage);
            }
            break ExitStatus::TimedOut;
        }
        std::thread::sleep(Duration::from_millis(2));
    };

    let wall_time_s = start.elapsed().as_secs_f64();
    let stdout_text = String::from_utf8_lossy(&out_handle.join().unwrap_or_default()).into_owned();
    let stderr_text = String::from_utf8_lossy(&err_handle.join().unwrap_or_default()).into_owned();
    let cpu_time_s = timeval_secs(rusage.ru_utime) + timeval_secs(rusage.ru_stime);
    // ru_maxrss is in kilobytes on Linux.
    let peak_memory_bytes = (rusage.ru_maxrss.max(0) as u64) * 1024;

    CheckerRun {
        command: cmd.clone(),
        stdout_text,
        stderr_text,
        exit,
        cpu_time_s,
        wall_time_s,
        peak_memory_bytes,
    }
}

fn decode_wait_status(status: libc::c_int) -> ExitStatus {
    if libc::WIFEXITED(status) {
        ExitStatus::Exited(libc::WEXITSTATUS(status))
    } else if libc::WIFSIGNALED(status) {
        ExitStatus::Signaled(libc::WTERMSIG(status))
    } else {
        ExitStatus::Exited(-1)
    }
}

fn timeval_secs(tv: libc::timeval) -> f64 {
    tv.tv_sec as f64 + tv.tv_usec as f64 / 1e6
}

/// Peak resident set of the orchestrator itself, reported separately from
/// child memory in the run summary. Prefers /proc VmHWM, falls back to
/// getrusage on hosts that mask it.
pub fn orchestrator_peak_rss_bytes() -> u64 {
    if let Ok(text) = std::fs::read_to_string("/proc/self/status") {
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("VmHWM:") {
                if let Ok(kb) = rest.trim().trim_end_matches("kB").trim().parse::<u64>() {
                    return kb * 1024;
                }
            }
        }
    }
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    if unsafe { libc::getrusage(libc::RUSAGE_SELF, &mut usage) } == 0 {
        return (usage.ru_maxrss.max(0) as u64) * 1024;
    }
    0
}

/// Resolve an executable: explicit paths are checked directly, bare names
/// are searched on PATH.
pub fn find_executable(name: &Path) -> Option<PathBuf> {
    fn runnable(p: &Path) -> bool {
        use std::os::unix::fs::PermissionsExt;
        p.metadata()
            .map(|m| m.is_file() && m.permissions().mode() & 0o111 != 0)
            .unwrap_or(false)
    }
    if name.components().count() > 1 {
        return runnable(name).then(|| name.to_path_buf());
    }
    let path_var = std::env::var_os("PATH")?;
    std::env::split_paths(&path_var)
        .map(|dir| dir.join(name))
        .find(|cand| runnable(cand))
}

/// What the mock backend should answer for keys missing from the fixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockDefault {
    Success,
    Error,
}

/// One scripted mock response.
#[derive(Debug, Clone)]
pub struct MockEntry {
    pub output: String,
    pub exit_code: i32,
    pub cpu_time_s: f64,
    pub wall_time_s: f64,
    pub peak_memory_bytes: u64,
}

impl MockEntry {
    pub fn new(output: impl Into<String>, exit_code: i32) -> MockEntry {
        MockEntry {
            output: output.into(),
            exit_code,
            cpu_time_s: 0.0,
            wall_time_s: 0.0,
            peak_memory_bytes: 0,
        }
    }
}

/// Scripted stand-in for the real checker: maps (file path, function name)
/// to a canned response.
#[derive(Debug, Clone)]
pub struct MockFixture {
    entries: HashMap<(String, String), MockEntry>,
    pub default: MockDefault,
}

impl MockFixture {
    pub fn new(default: MockDefault) -> MockFixture {
        MockFixture {
            entries: HashMap::new(),
            default,
        }
    }

    pub fn insert(&mut self, file: impl Into<String>, function: impl Into<String>, entry: MockEntry) {
        self.entries.insert((file.into(), function.into()), entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Load a fixture table: one record per line,
    /// `file-path <TAB> function-name <TAB> exit-code <TAB> output-file-path`.
    /// Blank lines and `#` comments are allowed; relative output paths are
    /// resolved against the fixture file's directory.
    pub fn from_file(path: &Path) -> Result<MockFixture> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read mock fixture `{}`: {e}", path.display()))
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut fixture = MockFixture::new(MockDefault::Success);
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 {
                return Err(Error::Config(format!(
                    "malformed mock fixture `{}` line {}: expected 4 tab-separated fields, got {}",
                    path.display(),
                    lineno + 1,
                    fields.len()
                )));
            }
            let exit_code: i32 = fields[2].trim().parse().map_err(|_| {
                Error::Config(format!(
                    "malformed mock fixture `{}` line {}: bad exit code `{}`",
                    path.display(),
                    lineno + 1,
                    fields[2]
                ))
            })?;
            let out_path = {
                let p = Path::new(fields[3]);
                if p.is_absolute() {
                    p.to_path_buf()
                } else {
                    base.join(p)
                }
            };
            let output = std::fs::read_to_string(&out_path).map_err(|e| {
                Error::Config(format!(
                    "mock fixture `{}` line {}: cannot read output file `{}`: {e}",
                    path.display(),
                    lineno + 1,
                    out_path.display()
                ))
            })?;
            fixture.insert(fields[0], fields[1], MockEntry::new(output, exit_code));
        }
        Ok(fixture)
    }

    fn lookup(&self, file: &str, function: &str) -> MockEntry {
        self.entries
            .get(&(file.to_string(), function.to_string()))
            .cloned()
            .unwrap_or_else(|| match self.default {
                MockDefault::Success => MockEntry::new("VERIFICATION SUCCESSFUL\n", 0),
                MockDefault::Error => MockEntry::new("mock backend: no fixture entry\n", 1),
            })
    }
}

/// Synthesize a deterministic run from the fixture, no process involved.
pub fn mock_execute(fixture: &MockFixture, cmd: &CheckerCommand) -> CheckerRun {
    let file = cmd.target.display().to_string();
    let function = cmd.entry.as_deref().unwrap_or("main");
    let entry = fixture.lookup(&file, function);
    CheckerRun {
        command: cmd.clone(),
        stdout_text: entry.output,
        stderr_text: String::new(),
        exit: ExitStatus::Exited(entry.exit_code),
        cpu_time_s: entry.cpu_time_s,
        wall_time_s: entry.wall_time_s,
        peak_memory_bytes: entry.peak_memory_bytes,
    }
}
