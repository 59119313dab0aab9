//! Checker-output analysis: outcome detection, violated-property block
//! extraction, category classification, and CWE tagging.
//!
//! Classification is data-driven: an ordered pattern table maps substring
//! sets to category tags, and a CWE table maps tags to identifier lists.
//! Both ship with defaults matching the ESBMC phrase set and can be replaced
//! from simple text files, so a backend with different wording is a table
//! edit, not a code change.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;

use crate::checker::{CheckerRun, ExitStatus};
use crate::{Error, Result};

/// Verification status of one invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Success,
    Failed,
    Timeout,
    Error,
    Unknown,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Failed => "failed",
            Outcome::Timeout => "timeout",
            Outcome::Error => "error",
            Outcome::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The violation taxonomy. `Other` is the catch-all for texts no pattern
/// matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationCategory {
    Ip,
    Abv,
    Alb,
    Aub,
    Sov,
    Ipf,
    Ido,
    Np,
    Dz,
    Af,
    Aoob,
    Other,
}

impl ViolationCategory {
    pub const ALL: [ViolationCategory; 12] = [
        ViolationCategory::Ip,
        ViolationCategory::Abv,
        ViolationCategory::Alb,
        ViolationCategory::Aub,
        ViolationCategory::Sov,
        ViolationCategory::Ipf,
        ViolationCategory::Ido,
        ViolationCategory::Np,
        ViolationCategory::Dz,
        ViolationCategory::Af,
        ViolationCategory::Aoob,
        ViolationCategory::Other,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ViolationCategory::Ip => "IP",
            ViolationCategory::Abv => "ABV",
            ViolationCategory::Alb => "ALB",
            ViolationCategory::Aub => "AUB",
            ViolationCategory::Sov => "SOV",
            ViolationCategory::Ipf => "IPF",
            ViolationCategory::Ido => "IDO",
            ViolationCategory::Np => "NP",
            ViolationCategory::Dz => "DZ",
            ViolationCategory::Af => "AF",
            ViolationCategory::Aoob => "AOOB",
            ViolationCategory::Other => "OTHER",
        }
    }

    pub fn from_tag(tag: &str) -> Option<ViolationCategory> {
        ViolationCategory::ALL.iter().copied().find(|c| c.tag() == tag)
    }

    /// Human phrase used in the extended CSV column set.
    pub fn description(self) -> &'static str {
        match self {
            ViolationCategory::Ip => "invalid pointer",
            ViolationCategory::Abv => "array bounds violated",
            ViolationCategory::Alb => "array lower bound violated",
            ViolationCategory::Aub => "array upper bound violated",
            ViolationCategory::Sov => "same object violation",
            ViolationCategory::Ipf => "invalid pointer freed",
            ViolationCategory::Ido => "invalidated dynamic object",
            ViolationCategory::Np => "null pointer dereference",
            ViolationCategory::Dz => "division by zero",
            ViolationCategory::Af => "assertion failure",
            ViolationCategory::Aoob => "access to object out of bounds",
            ViolationCategory::Other => "unclassified violation",
        }
    }
}

impl fmt::Display for ViolationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// One classified property violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// File named in the counterexample (as printed by the checker).
    pub source_file: String,
    /// Line named in the counterexample; 0 for malformed blocks.
    pub line: u32,
    pub function: String,
    pub category: ViolationCategory,
    /// Raw text of the violated-property block (location line excluded).
    pub property_text: String,
    pub cwes: Vec<String>,
}

/// Decide the invocation outcome. Failure phrases dominate success phrases;
/// with no phrase at all the exit status decides.
pub fn parse_outcome(run: &CheckerRun) -> Outcome {
    let failed = run.stdout_text.contains("VERIFICATION FAILED")
        || run.stderr_text.contains("VERIFICATION FAILED");
    let success = run.stdout_text.contains("VERIFICATION SUCCESSFUL")
        || run.stderr_text.contains("VERIFICATION SUCCESSFUL");
    if failed {
        Outcome::Failed
    } else if success {
        Outcome::Success
    } else if run.exit.timed_out() {
        Outcome::Timeout
    } else {
        match run.exit {
            ExitStatus::Exited(0) => Outcome::Unknown,
            _ => Outcome::Error,
        }
    }
}

static LOCATION_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)^\s*file\s+(\S+)\s+line\s+(\d+)(?:\s+column\s+\d+)?(?:\s+(?:in\s+)?function\s+(\S+))?\s*$",
    )
    .expect("location regex")
});

static FUNCTION_LINE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)^\s*(?:in\s+)?function\s+(\S+)\s*$").expect("function-line regex")
});

/// Extract one record per `Violated property:` block in the captured output.
///
/// The location line gives file, line, and usually the function; when the
/// function is missing, `fallback_function` (the invoked entry point) is
/// used. A block whose location line cannot be parsed is preserved whole as
/// a line-0 `OTHER` record rather than aborting the parse.
pub fn extract_violations(run: &CheckerRun, fallback_function: &str) -> Vec<Violation> {
    extract_violations_with(
        run,
        fallback_function,
        &DEFAULT_PATTERNS,
        &DEFAULT_CWE_TABLE,
    )
}

/// [`extract_violations`] with explicit classification tables.
pub fn extract_violations_with(
    run: &CheckerRun,
    fallback_function: &str,
    patterns: &PatternTable,
    cwes: &CweTable,
) -> Vec<Violation> {
    let lines: Vec<&str> = run
        .stdout_text
        .lines()
        .chain(run.stderr_text.lines())
        .collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        if lines[i].trim() != "Violated property:" {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        let mut block: Vec<&str> = Vec::new();
        while j < lines.len() {
            let t = lines[j].trim();
            if t.is_empty()
                || t == "Violated property:"
                || t == "Counterexample:"
                || t.starts_with("VERIFICATION ")
            {
                break;
            }
            block.push(lines[j]);
            j += 1;
        }
        out.push(parse_block(&block, run, fallback_function, patterns, cwes));
        i = j.max(i + 1);
    }
    out
}

fn parse_block(
    block: &[&str],
    run: &CheckerRun,
    fallback_function: &str,
    patterns: &PatternTable,
    cwes: &CweTable,
) -> Violation {
    if let Some(cap) = block.first().and_then(|l| LOCATION_RE.captures(l)) {
        let source_file = cap[1].to_string();
        let line: u32 = cap[2].parse().unwrap_or(0);
        let mut rest_start = 1;
        let function = match cap.get(3) {
            Some(m) => m.as_str().to_string(),
            None => match block.get(1).and_then(|l| FUNCTION_LINE_RE.captures(l)) {
                Some(fcap) => {
                    rest_start = 2;
                    fcap[1].to_string()
                }
                None => fallback_function.to_string(),
            },
        };
        let property_text = block[rest_start..].join("\n");
        let category = patterns.classify(&property_text);
        Violation {
            source_file,
            line,
            function,
            category,
            property_text,
            cwes: cwes.lookup(category),
        }
    } else {
        Violation {
            source_file: run.command.target.display().to_string(),
            line: 0,
            function: fallback_function.to_string(),
            category: ViolationCategory::Other,
            property_text: block.join("\n"),
            cwes: Vec::new(),
        }
    }
}

/// One ordered classification rule: every substring must occur (on
/// lowercased, whitespace-normalized text) for the category to apply.
#[derive(Debug, Clone)]
pub struct PatternRule {
    pub substrings: Vec<String>,
    pub category: ViolationCategory,
}

/// Ordered, first-match-wins pattern table.
#[derive(Debug, Clone)]
pub struct PatternTable {
    rules: Vec<PatternRule>,
}

static DEFAULT_PATTERNS: LazyLock<PatternTable> = LazyLock::new(PatternTable::default);

impl Default for PatternTable {
    fn default() -> Self {
        let spec: &[(&str, &[&str])] = &[
            ("ALB", &["array bounds violated", "lower bound"]),
            ("AUB", &["array bounds violated", "upper bound"]),
            ("ABV", &["array bounds violated"]),
            ("SOV", &["same object violation"]),
            ("IDO", &["invalidated dynamic object"]),
            ("IPF", &["invalid pointer freed"]),
            ("IPF", &["dereference failure", "invalid pointer", "free"]),
            ("NP", &["null pointer"]),
            ("IP", &["invalid pointer"]),
            ("DZ", &["division by zero"]),
            ("AF", &["assertion"]),
            ("AOOB", &["access to object out of bounds"]),
        ];
        PatternTable {
            rules: spec
                .iter()
                .map(|(tag, subs)| PatternRule {
                    substrings: subs.iter().map(|s| s.to_string()).collect(),
                    category: ViolationCategory::from_tag(tag).expect("known tag"),
                })
                .collect(),
        }
    }
}

impl PatternTable {
    /// Load ordered rules from a file: `TAG: substring | substring | ...`
    /// per line, `#` comments allowed. Substrings are matched
    /// case-insensitively on whitespace-normalized text.
    pub fn from_file(path: &Path) -> Result<PatternTable> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!(
                "cannot read pattern table `{}`: {e}",
                path.display()
            ))
        })?;
        let mut rules = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (tag, subs) = line.split_once(':').ok_or_else(|| {
                Error::Config(format!(
                    "pattern table `{}` line {}: expected `TAG: substrings`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let category = ViolationCategory::from_tag(tag.trim()).ok_or_else(|| {
                Error::Config(format!(
                    "pattern table `{}` line {}: unknown tag `{}`",
                    path.display(),
                    lineno + 1,
                    tag.trim()
                ))
            })?;
            let substrings: Vec<String> = subs
                .split('|')
                .map(normalize)
                .filter(|s| !s.is_empty())
                .collect();
            if substrings.is_empty() {
                return Err(Error::Config(format!(
                    "pattern table `{}` line {}: no substrings",
                    path.display(),
                    lineno + 1
                )));
            }
            rules.push(PatternRule {
                substrings,
                category,
            });
        }
        Ok(PatternTable { rules })
    }

    /// First rule whose substrings all occur wins; no match is `OTHER`.
    pub fn classify(&self, property_text: &str) -> ViolationCategory {
        let norm = normalize(property_text);
        for rule in &self.rules {
            if rule.substrings.iter().all(|s| norm.contains(s.as_str())) {
                return rule.category;
            }
        }
        ViolationCategory::Other
    }
}

/// Classify with the default pattern table.
pub fn classify(property_text: &str) -> ViolationCategory {
    DEFAULT_PATTERNS.classify(property_text)
}

/// Lowercase and collapse all whitespace runs (including newlines) to single
/// spaces.
fn normalize(text: &str) -> String {
    text.to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// CWE identifiers attached to each category; ABV, ALB, and AUB share one
/// row, and `OTHER` maps to nothing.
pub fn map_cwe(category: ViolationCategory) -> &'static [&'static str] {
    match category {
        ViolationCategory::Ip => &[
            "CWE-416", "CWE-476", "CWE-690", "CWE-822", "CWE-824", "CWE-908",
        ],
        ViolationCategory::Abv | ViolationCategory::Alb | ViolationCategory::Aub => &[
            "CWE-20", "CWE-119", "CWE-120", "CWE-121", "CWE-125", "CWE-129", "CWE-131",
            "CWE-193", "CWE-628", "CWE-676", "CWE-754", "CWE-755", "CWE-787", "CWE-788",
        ],
        ViolationCategory::Sov => &[
            "CWE-125", "CWE-170", "CWE-193", "CWE-466", "CWE-469", "CWE-682", "CWE-787",
        ],
        ViolationCategory::Ipf => &[
            "CWE-415", "CWE-416", "CWE-459", "CWE-590", "CWE-761", "CWE-825",
        ],
        ViolationCategory::Ido => &["CWE-415", "CWE-416", "CWE-476", "CWE-664", "CWE-789"],
        ViolationCategory::Np => &["CWE-391", "CWE-476"],
        ViolationCategory::Dz => &["CWE-369"],
        ViolationCategory::Af => &[
            "CWE-190", "CWE-191", "CWE-389", "CWE-478", "CWE-571", "CWE-569", "CWE-617",
            "CWE-670", "CWE-680", "CWE-681", "CWE-682", "CWE-685", "CWE-754",
        ],
        ViolationCategory::Aoob => &[
            "CWE-119", "CWE-125", "CWE-170", "CWE-193", "CWE-466", "CWE-682", "CWE-787",
            "CWE-823",
        ],
        ViolationCategory::Other => &[],
    }
}

/// Category-to-CWE table, initialized from the built-in rows and overridable
/// per category from a file.
#[derive(Debug, Clone)]
pub struct CweTable {
    map: BTreeMap<ViolationCategory, Vec<String>>,
}

static DEFAULT_CWE_TABLE: LazyLock<CweTable> = LazyLock::new(CweTable::default);

impl Default for CweTable {
    fn default() -> Self {
        let mut map = BTreeMap::new();
        for cat in ViolationCategory::ALL {
            map.insert(cat, map_cwe(cat).iter().map(|s| s.to_string()).collect());
        }
        CweTable { map }
    }
}

impl CweTable {
    /// Load overrides: `TAG: CWE-1, CWE-2` per line, starting from the
    /// built-in rows.
    pub fn from_file(path: &Path) -> Result<CweTable> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read CWE table `{}`: {e}", path.display()))
        })?;
        let mut table = CweTable::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (tag, ids) = line.split_once(':').ok_or_else(|| {
                Error::Config(format!(
                    "CWE table `{}` line {}: expected `TAG: ids`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let category = ViolationCategory::from_tag(tag.trim()).ok_or_else(|| {
                Error::Config(format!(
                    "CWE table `{}` line {}: unknown tag `{}`",
                    path.display(),
                    lineno + 1,
                    tag.trim()
                ))
            })?;
            let list: Vec<String> = ids
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            table.map.insert(category, list);
        }
        Ok(table)
    }

    pub fn lookup(&self, category: ViolationCategory) -> Vec<String> {
        self.map.get(&category).cloned().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::CheckerCommand;
    use std::path::PathBuf;

    fn run_with_output(stdout: &str, exit: ExitStatus) -> CheckerRun {
        CheckerRun {
            command: CheckerCommand {
                backend_path: PathBuf::from("esbmc"),
                argv: vec!["t.c".into()],
                working_dir: PathBuf::from("."),
                target: PathBuf::from("t.c"),
                entry: Some("entry_fn".into()),
            },
            stdout_text: stdout.to_string(),
            stderr_text: String::new(),
            exit,
            cpu_time_s: 0.0,
            wall_time_s: 0.0,
            peak_memory_bytes: 0,
        }
    }

    const ARRAY_TRACE: &str = include_str!("../tests/golden/cex_array_upper_bound.txt");
    const DIV_TRACE: &str = include_str!("../tests/golden/cex_division_by_zero.txt");

    #[test]
    fn failed_phrase_dominates() {
        let run = run_with_output(ARRAY_TRACE, ExitStatus::Exited(1));
        assert_eq!(parse_outcome(&run), Outcome::Failed);
        let both = run_with_output(
            "VERIFICATION SUCCESSFUL\nVERIFICATION FAILED\n",
            ExitStatus::Exited(0),
        );
        assert_eq!(parse_outcome(&both), Outcome::Failed);
    }

    #[test]
    fn empty_output_zero_exit_is_unknown() {
        let run = run_with_output("", ExitStatus::Exited(0));
        assert_eq!(parse_outcome(&run), Outcome::Unknown);
    }

    #[test]
    fn no_phrase_nonzero_exit_is_error() {
        let run = run_with_output("segfault\n", ExitStatus::Exited(2));
        assert_eq!(parse_outcome(&run), Outcome::Error);
        let sig = run_with_output("", ExitStatus::Signaled(9));
        assert_eq!(parse_outcome(&sig), Outcome::Error);
    }

    #[test]
    fn timeout_marker_maps_to_timeout() {
        let run = run_with_output("partial...", ExitStatus::TimedOut);
        assert_eq!(parse_outcome(&run), Outcome::Timeout);
    }

    #[test]
    fn golden_array_upper_bound_trace() {
        let run = run_with_output(ARRAY_TRACE, ExitStatus::Exited(1));
        let vs = extract_violations(&run, "entry_fn");
        assert_eq!(vs.len(), 1);
        let v = &vs[0];
        assert_eq!(v.source_file, "re.c");
        assert_eq!(v.line, 269);
        assert_eq!(v.function, "re_print");
        assert_eq!(v.category, ViolationCategory::Aub);
        assert!(v.property_text.contains("array `types' upper bound"));
    }

    #[test]
    fn golden_division_by_zero_trace() {
        let run = run_with_output(DIV_TRACE, ExitStatus::Exited(1));
        let vs = extract_violations(&run, "entry_fn");
        assert_eq!(vs.len(), 1);
        let v = &vs[0];
        assert_eq!(v.source_file, "hashmap.c");
        assert_eq!(v.line, 51);
        assert_eq!(v.function, "ext2fs_hashmap_add");
        assert_eq!(v.category, ViolationCategory::Dz);
        assert!(v.property_text.contains("h->size != 0"));
    }

    #[test]
    fn success_output_yields_no_violations() {
        let run = run_with_output("VERIFICATION SUCCESSFUL\n", ExitStatus::Exited(0));
        assert!(extract_violations(&run, "main").is_empty());
    }

    #[test]
    fn missing_function_uses_fallback() {
        let out = "Violated property:\nfile x.c line 7\ndivision by zero\n\n";
        let run = run_with_output(out, ExitStatus::Exited(1));
        let vs = extract_violations(&run, "caller_fn");
        assert_eq!(vs.len(), 1);
        assert_eq!(vs[0].function, "caller_fn");
        assert_eq!(vs[0].line, 7);
    }

    #[test]
    fn malformed_block_is_preserved_as_other() {
        let out = "Violated property:\ngarbage without a location\nmore garbage\n\n";
        let run = run_with_output(out, ExitStatus::Exited(1));
        let vs = extract_violations(&run, "fb");
        assert_eq!(vs.len(), 1);
        assert_eq!(vs[0].line, 0);
        assert_eq!(vs[0].category, ViolationCategory::Other);
        assert!(vs[0].property_text.contains("garbage without a location"));
        assert_eq!(vs[0].source_file, "t.c");
        assert!(vs[0].cwes.is_empty());
    }

    #[test]
    fn multiple_blocks_extracted_in_order() {
        let out = concat!(
            "Violated property:\n",
            "file a.c line 1 function f\n",
            "division by zero\n",
            "\n",
            "Violated property:\n",
            "file a.c line 2 function g\n",
            "dereference failure: NULL pointer\n",
            "\n"
        );
        let run = run_with_output(out, ExitStatus::Exited(1));
        let vs = extract_violations(&run, "fb");
        assert_eq!(vs.len(), 2);
        assert_eq!(vs[0].category, ViolationCategory::Dz);
        assert_eq!(vs[1].category, ViolationCategory::Np);
    }

    #[test]
    fn adjacent_blocks_without_blank_line() {
        let out = concat!(
            "Violated property:\n",
            "file a.c line 1 function f\n",
            "division by zero\n",
            "Violated property:\n",
            "file a.c line 2 function g\n",
            "assertion\n"
        );
        let run = run_with_output(out, ExitStatus::Exited(1));
        let vs = extract_violations(&run, "fb");
        assert_eq!(vs.len(), 2);
        assert_eq!(vs[1].category, ViolationCategory::Af);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify("array bounds violated: array `types' upper bound"),
            ViolationCategory::Aub
        );
        assert_eq!(classify("division by zero h->size != 0"), ViolationCategory::Dz);
        assert_eq!(
            classify("dereference failure: NULL pointer"),
            ViolationCategory::Np
        );
    }

    #[test]
    fn classify_precedence_np_before_ip() {
        assert_eq!(
            classify("dereference failure: NULL pointer via invalid pointer"),
            ViolationCategory::Np
        );
        assert_eq!(classify("invalid pointer"), ViolationCategory::Ip);
    }

    #[test]
    fn classify_every_category_reachable() {
        let samples: &[(&str, ViolationCategory)] = &[
            ("dereference failure: invalid pointer", ViolationCategory::Ip),
            ("array bounds violated: something", ViolationCategory::Abv),
            (
                "array bounds violated: array `a' lower bound",
                ViolationCategory::Alb,
            ),
            (
                "array bounds violated: array `a' upper bound",
                ViolationCategory::Aub,
            ),
            ("same object violation", ViolationCategory::Sov),
            ("invalid pointer freed", ViolationCategory::Ipf),
            (
                "dereference failure: invalid pointer passed to free",
                ViolationCategory::Ipf,
            ),
            ("invalidated dynamic object", ViolationCategory::Ido),
            ("dereference failure: NULL pointer", ViolationCategory::Np),
            ("division by zero", ViolationCategory::Dz),
            ("assertion failure", ViolationCategory::Af),
            ("access to object out of bounds", ViolationCategory::Aoob),
            ("some novel backend phrasing", ViolationCategory::Other),
        ];
        for (text, want) in samples {
            assert_eq!(classify(text), *want, "text: {text}");
        }
    }

    #[test]
    fn classify_is_whitespace_and_case_insensitive() {
        assert_eq!(
            classify("ARRAY   BOUNDS\nVIOLATED:\n  UPPER    BOUND"),
            ViolationCategory::Aub
        );
    }

    #[test]
    fn cwe_rows_match_published_table() {
        assert_eq!(map_cwe(ViolationCategory::Dz), &["CWE-369"]);
        assert_eq!(map_cwe(ViolationCategory::Np), &["CWE-391", "CWE-476"]);
        assert_eq!(
            map_cwe(ViolationCategory::Abv),
            map_cwe(ViolationCategory::Alb)
        );
        assert_eq!(
            map_cwe(ViolationCategory::Abv),
            map_cwe(ViolationCategory::Aub)
        );
        assert!(map_cwe(ViolationCategory::Other).is_empty());
        assert_eq!(map_cwe(ViolationCategory::Af).len(), 13);
        assert_eq!(map_cwe(ViolationCategory::Abv).len(), 14);
    }

    #[test]
    fn pattern_table_from_file_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("patterns.txt");
        std::fs::write(&path, "# custom\nDZ: zero divisor\nAF: assertion\n").unwrap();
        let table = PatternTable::from_file(&path).unwrap();
        assert_eq!(table.classify("zero divisor detected"), ViolationCategory::Dz);
        // Default phrasing no longer matches the custom table.
        assert_eq!(table.classify("division by zero"), ViolationCategory::Other);
    }

    #[test]
    fn pattern_table_rejects_unknown_tag() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("patterns.txt");
        std::fs::write(&path, "BOGUS: something\n").unwrap();
        assert!(matches!(
            PatternTable::from_file(&path),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn cwe_table_from_file_overrides_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cwes.txt");
        std::fs::write(&path, "DZ: CWE-1, CWE-2\n").unwrap();
        let table = CweTable::from_file(&path).unwrap();
        assert_eq!(table.lookup(ViolationCategory::Dz), vec!["CWE-1", "CWE-2"]);
        // Untouched rows keep the defaults.
        assert_eq!(
            table.lookup(ViolationCategory::Np),
            vec!["CWE-391", "CWE-476"]
        );
    }

    #[test]
    fn shipped_pattern_table_matches_builtin() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/patterns.txt");
        let shipped = PatternTable::from_file(&path).unwrap();
        let samples = [
            "array bounds violated: lower bound",
            "array bounds violated: upper bound",
            "array bounds violated: somewhere",
            "same object violation",
            "invalidated dynamic object",
            "invalid pointer freed",
            "dereference failure: invalid pointer passed to free",
            "dereference failure: NULL pointer",
            "dereference failure: invalid pointer",
            "division by zero",
            "assertion failed",
            "access to object out of bounds",
            "novel phrasing",
        ];
        for text in samples {
            assert_eq!(shipped.classify(text), classify(text), "text: {text}");
        }
    }

    #[test]
    fn shipped_cwe_table_matches_builtin() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/cwes.txt");
        let shipped = CweTable::from_file(&path).unwrap();
        for cat in ViolationCategory::ALL {
            let builtin: Vec<String> = map_cwe(cat).iter().map(|s| s.to_string()).collect();
            assert_eq!(shipped.lookup(cat), builtin, "row {cat:?}");
        }
    }

    #[test]
    fn property_text_reconstruction_is_lossless() {
        // Every property_text is a literal slice of the original output.
        for trace in [ARRAY_TRACE, DIV_TRACE] {
            let run = run_with_output(trace, ExitStatus::Exited(1));
            for v in extract_violations(&run, "x") {
                assert!(trace.contains(&v.property_text));
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // classify is total and never panics.
            #[test]
            fn classify_total(text in "\\PC{0,120}") {
                let _ = classify(&text);
            }

            // extract_violations is total over arbitrary output.
            #[test]
            fn extract_total(text in "(\\PC|\n){0,200}") {
                let run = run_with_output(&text, ExitStatus::Exited(1));
                let _ = extract_violations(&run, "f");
            }
        }
    }
}
