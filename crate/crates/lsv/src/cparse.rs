//! Lexical extraction of C function definitions.
//!
//! Extraction works on a *scrubbed* copy of the source: comments, string
//! literals, and character literals are blanked to same-length runs of
//! spaces (newlines kept), and preprocessor directive lines are blanked
//! afterwards. Because lengths never change, every byte offset found on the
//! scrubbed text maps straight back into the original, so raw signature and
//! body text can be sliced out exactly while brace matching stays immune to
//! code-shaped text inside literals.
//!
//! A definition is an identifier followed by a balanced parenthesized
//! parameter list and an opening brace at top-level brace depth. Prototypes
//! (`;` after the parameter list) are skipped, as are K&R-style candidates
//! with declarations between `)` and `{` (those produce a warning).

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use crate::discovery::SourceFile;
use crate::prioritize::PriorityGrade;
use crate::{Error, Result};

/// Brace/paren nesting beyond this is treated as pathological and the file
/// is skipped with a warning.
pub const MAX_NESTING: usize = 4096;

/// One extracted function definition.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionRecord {
    /// The identifier directly before the parameter list.
    pub name: String,
    /// Raw text between the signature's outer parentheses.
    pub params_text: String,
    /// Raw parameter declarations, split on top-level commas.
    pub param_decls: Vec<String>,
    /// Raw text between the outermost body braces.
    pub body_text: String,
    /// 1-based line of the name token.
    pub start_line: u32,
    /// 1-based line of the closing body brace.
    pub end_line: u32,
    /// Owning source file.
    pub source: PathBuf,
    /// Risk grade; unset until prioritization runs.
    pub grade: Option<PriorityGrade>,
    /// Scrubbed parameter text (used by token scans, never reported).
    pub params_scrubbed: String,
    /// Scrubbed body text (used by call mapping and grading).
    pub body_scrubbed: String,
}

impl FunctionRecord {
    /// Build a record straight from signature and body text. Used by tests
    /// and grading experiments; scrubbing is applied the same way the file
    /// extractor would.
    pub fn synthetic(name: &str, params: &str, body: &str) -> FunctionRecord {
        let mut warnings = Vec::new();
        let params_scrubbed = neutralize_noncode(params, &mut warnings);
        let body_scrubbed = mask_directives(&neutralize_noncode(body, &mut warnings));
        let param_decls = split_param_decls(&params_scrubbed, params);
        FunctionRecord {
            name: name.to_string(),
            params_text: params.to_string(),
            param_decls,
            body_text: body.to_string(),
            start_line: 1,
            end_line: 1 + body.matches('\n').count() as u32,
            source: PathBuf::from("<synthetic>"),
            grade: None,
            params_scrubbed,
            body_scrubbed,
        }
    }
}

/// Which extracted functions are textually called inside which other
/// extracted functions' bodies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallMap {
    calls: BTreeMap<String, BTreeSet<String>>,
}

impl CallMap {
    /// Build a map directly from caller/callee pairs (reference path for
    /// tests and oracles).
    pub fn from_edges<I, S>(edges: I) -> CallMap
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let mut calls: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (caller, callee) in edges {
            calls.entry(caller.into()).or_default().insert(callee.into());
        }
        CallMap { calls }
    }

    pub fn callees(&self, name: &str) -> Option<&BTreeSet<String>> {
        self.calls.get(name)
    }

    /// Union of every callee set: the names that are "already called by
    /// others" and therefore candidates for pruning.
    pub fn union_of_callees(&self) -> BTreeSet<&str> {
        self.calls
            .values()
            .flat_map(|s| s.iter().map(String::as_str))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.calls.values().all(|s| s.is_empty())
    }
}

/// Blank out comments, string literals, and character literals.
///
/// Every blanked byte becomes a space except newlines, which are kept, so
/// the output has the same length as the input and every line/column
/// position is unchanged. Unterminated constructs at end of file are blanked
/// to the end and recorded as a warning.
pub fn neutralize_noncode(text: &str, warnings: &mut Vec<String>) -> String {
    #[derive(PartialEq)]
    enum State {
        Code,
        LineComment,
        BlockComment,
        Str,
        Chr,
    }

    let bytes = text.as_bytes();
    let mut out = bytes.to_vec();
    let mut state = State::Code;
    let mut i = 0;
    while i < bytes.len() {
        match state {
            State::Code => match bytes[i] {
                b'/' if bytes.get(i + 1) == Some(&b'/') => {
                    out[i] = b' ';
                    out[i + 1] = b' ';
                    state = State::LineComment;
                    i += 2;
                }
                b'/' if bytes.get(i + 1) == Some(&b'*') => {
                    out[i] = b' ';
                    out[i + 1] = b' ';
                    state = State::BlockComment;
                    i += 2;
                }
                b'"' => {
                    out[i] = b' ';
                    state = State::Str;
                    i += 1;
                }
                b'\'' => {
                    out[i] = b' ';
                    state = State::Chr;
                    i += 1;
                }
                _ => i += 1,
            },
            State::LineComment => {
                if bytes[i] == b'\n' {
                    state = State::Code;
                } else {
                    out[i] = b' ';
                }
                i += 1;
            }
            State::BlockComment => {
                if bytes[i] == b'*' && bytes.get(i + 1) == Some(&b'/') {
                    out[i] = b' ';
                    out[i + 1] = b' ';
                    state = State::Code;
                    i += 2;
                } else {
                    if bytes[i] != b'\n' {
                        out[i] = b' ';
                    }
                    i += 1;
                }
            }
            State::Str | State::Chr => {
                let quote = if state == State::Str { b'"' } else { b'\'' };
                if bytes[i] == b'\\' && i + 1 < bytes.len() {
                    out[i] = b' ';
                    if bytes[i + 1] != b'\n' {
                        out[i + 1] = b' ';
                    }
                    i += 2;
                } else if bytes[i] == quote {
                    out[i] = b' ';
                    state = State::Code;
                    i += 1;
                } else if bytes[i] == b'\n' {
                    // A raw newline cannot appear in a C literal; treat the
                    // literal as ended to contain damage from stray quotes.
                    state = State::Code;
                    i += 1;
                } else {
                    out[i] = b' ';
                    i += 1;
                }
            }
        }
    }
    match state {
        State::BlockComment => warnings.push("unterminated block comment at end of file".into()),
        State::Str => warnings.push("unterminated string literal at end of file".into()),
        State::Chr => warnings.push("unterminated character literal at end of file".into()),
        _ => {}
    }
    String::from_utf8(out).expect("neutralization only writes ASCII spaces")
}

/// Blank preprocessor directive lines (including backslash continuations) so
/// braces in macro bodies cannot skew brace matching. Length-preserving like
/// `neutralize_noncode`; meant to run on already-neutralized text.
pub fn mask_directives(text: &str) -> String {
    let bytes = text.as_bytes();
    let mut out = bytes.to_vec();
    let mut i = 0;
    let mut continued = false;
    while i < bytes.len() {
        let end = bytes[i..]
            .iter()
            .position(|b| *b == b'\n')
            .map(|p| i + p)
            .unwrap_or(bytes.len());
        let line = &text[i..end];
        if continued || line.trim_start().starts_with('#') {
            continued = line.trim_end().ends_with('\\');
            for b in &mut out[i..end] {
                *b = b' ';
            }
        } else {
            continued = false;
        }
        i = end + 1;
    }
    String::from_utf8(out).expect("directive masking only writes ASCII spaces")
}

/// Extract all top-level function definitions from a source file, in source
/// order. `main` is included like any other function.
pub fn extract_functions(
    file: &SourceFile,
    warnings: &mut Vec<String>,
) -> Result<Vec<FunctionRecord>> {
    let bytes = std::fs::read(&file.path)
        .map_err(|e| Error::input(format!("cannot read `{}`", file.path.display()), e))?;
    let text = String::from_utf8_lossy(&bytes).into_owned();
    Ok(extract_from_source(&file.path, &text, warnings))
}

/// Extraction over in-memory source text (the file-reading half lives in
/// [`extract_functions`]).
pub fn extract_from_source(
    source: &Path,
    text: &str,
    warnings: &mut Vec<String>,
) -> Vec<FunctionRecord> {
    let scrubbed = mask_directives(&neutralize_noncode(text, warnings));
    let b = scrubbed.as_bytes();
    let lines = LineIndex::new(text);
    let mut records = Vec::new();
    let mut depth: usize = 0;
    let mut i = 0usize;

    while i < b.len() {
        match b[i] {
            b'{' => {
                depth += 1;
                if depth > MAX_NESTING {
                    warnings.push(format!(
                        "{}: nesting deeper than {MAX_NESTING}; file skipped",
                        source.display()
                    ));
                    return Vec::new();
                }
                i += 1;
            }
            b'}' => {
                depth = depth.saturating_sub(1);
                i += 1;
            }
            b'(' if depth == 0 => {
                let candidate = ident_before(b, i);
                let close = match match_delim(b, i, b'(', b')') {
                    Ok(c) => c,
                    Err(DelimError::TooDeep) => {
                        warnings.push(format!(
                            "{}: nesting deeper than {MAX_NESTING}; file skipped",
                            source.display()
                        ));
                        return Vec::new();
                    }
                    Err(DelimError::Unclosed) => {
                        i += 1;
                        continue;
                    }
                };
                let (name_start, name_end) = match candidate {
                    Some(span) if !is_keyword(&scrubbed[span.0..span.1]) => span,
                    _ => {
                        i += 1;
                        continue;
                    }
                };
                let name = &scrubbed[name_start..name_end];

                let mut j = close + 1;
                while j < b.len() && b[j].is_ascii_whitespace() {
                    j += 1;
                }
                if j < b.len() && b[j] == b'{' {
                    match match_delim(b, j, b'{', b'}') {
                        Ok(body_close) => {
                            let params_scrubbed = &scrubbed[i + 1..close];
                            let params_raw = &text[i + 1..close];
                            records.push(FunctionRecord {
                                name: name.to_string(),
                                params_text: params_raw.to_string(),
                                param_decls: split_param_decls(params_scrubbed, params_raw),
                                body_text: text[j + 1..body_close].to_string(),
                                start_line: lines.line_of(name_start),
                                end_line: lines.line_of(body_close),
                                source: source.to_path_buf(),
                                grade: None,
                                params_scrubbed: params_scrubbed.to_string(),
                                body_scrubbed: scrubbed[j + 1..body_close].to_string(),
                            });
                            i = body_close + 1;
                        }
                        Err(DelimError::TooDeep) => {
                            warnings.push(format!(
                                "{}: nesting deeper than {MAX_NESTING}; file skipped",
                                source.display()
                            ));
                            return Vec::new();
                        }
                        Err(DelimError::Unclosed) => {
                            warnings.push(format!(
                                "{}:{}: unbalanced braces in body of `{name}`; rest of file skipped",
                                source.display(),
                                lines.line_of(name_start)
                            ));
                            return records;
                        }
                    }
                } else if j < b.len() && b[j] == b';' {
                    // Prototype, not a definition.
                    i = close + 1;
                } else {
                    if j < b.len() && is_ident_start(b[j]) {
                        warnings.push(format!(
                            "{}:{}: declarations between `)` and `{{` after `{name}` (K&R-style definition?); skipped",
                            source.display(),
                            lines.line_of(name_start)
                        ));
                    }
                    i = close + 1;
                }
            }
            _ => i += 1,
        }
    }
    records
}

/// Map every function to the set of extracted names its body calls.
///
/// A call is the name token, delimited by non-identifier characters and
/// followed (modulo whitespace) by `(`. Self-calls are ignored, and only
/// names of functions in `functions` are recorded.
pub fn build_call_map(functions: &[FunctionRecord]) -> CallMap {
    let names: BTreeSet<&str> = functions.iter().map(|f| f.name.as_str()).collect();
    let mut calls: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for f in functions {
        let entry = calls.entry(f.name.clone()).or_default();
        for ident in call_shaped_idents(&f.body_scrubbed) {
            if ident != f.name && names.contains(ident) {
                entry.insert(ident.to_string());
            }
        }
    }
    CallMap { calls }
}

/// Identifiers followed (modulo whitespace) by `(` in scrubbed text.
fn call_shaped_idents(body: &str) -> Vec<&str> {
    let b = body.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if is_ident_start(c) {
            let start = i;
            while i < b.len() && is_ident_char(b[i]) {
                i += 1;
            }
            let mut j = i;
            while j < b.len() && b[j].is_ascii_whitespace() {
                j += 1;
            }
            if j < b.len() && b[j] == b'(' {
                out.push(&body[start..i]);
            }
        } else if c.is_ascii_digit() {
            // Skip number-like tokens whole so `0x1f` never yields `x1f`.
            while i < b.len() && (is_ident_char(b[i]) || b[i] == b'.') {
                i += 1;
            }
        } else {
            i += 1;
        }
    }
    out
}

pub(crate) fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

pub(crate) fn is_ident_char(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

const KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
    "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
    "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
    "union", "unsigned", "void", "volatile", "while", "_Alignas", "_Alignof", "_Atomic", "_Bool",
    "_Generic", "_Noreturn", "_Static_assert", "_Thread_local",
];

fn is_keyword(ident: &str) -> bool {
    KEYWORDS.contains(&ident)
}

/// The identifier token immediately before offset `i`, skipping whitespace.
fn ident_before(b: &[u8], mut i: usize) -> Option<(usize, usize)> {
    while i > 0 && b[i - 1].is_ascii_whitespace() {
        i -= 1;
    }
    let end = i;
    while i > 0 && is_ident_char(b[i - 1]) {
        i -= 1;
    }
    if i == end || !is_ident_start(b[i]) {
        return None;
    }
    Some((i, end))
}

enum DelimError {
    Unclosed,
    TooDeep,
}

/// Offset of the delimiter closing the one at `open_idx`.
fn match_delim(b: &[u8], open_idx: usize, open: u8, close: u8) -> std::result::Result<usize, DelimError> {
    let mut depth = 0usize;
    let mut k = open_idx;
    while k < b.len() {
        if b[k] == open {
            depth += 1;
            if depth > MAX_NESTING {
                return Err(DelimError::TooDeep);
            }
        } else if b[k] == close {
            depth -= 1;
            if depth == 0 {
                return Ok(k);
            }
        }
        k += 1;
    }
    Err(DelimError::Unclosed)
}

/// Top-level comma spans of a scrubbed parameter list, as (start, end) byte
/// offsets into that list.
pub(crate) fn split_top_level_commas(scrubbed: &str) -> Vec<(usize, usize)> {
    let b = scrubbed.as_bytes();
    let mut spans = Vec::new();
    let (mut paren, mut bracket, mut brace) = (0i32, 0i32, 0i32);
    let mut start = 0usize;
    for (k, &c) in b.iter().enumerate() {
        match c {
            b'(' => paren += 1,
            b')' => paren -= 1,
            b'[' => bracket += 1,
            b']' => bracket -= 1,
            b'{' => brace += 1,
            b'}' => brace -= 1,
            b',' if paren == 0 && bracket == 0 && brace == 0 => {
                spans.push((start, k));
                start = k + 1;
            }
            _ => {}
        }
    }
    spans.push((start, b.len()));
    spans
}

/// Split raw parameter text on the top-level commas found in its scrubbed
/// twin. Joining the result with "," reconstructs the raw text exactly.
fn split_param_decls(scrubbed: &str, raw: &str) -> Vec<String> {
    let spans = split_top_level_commas(scrubbed);
    if spans.len() == 1 && raw.trim().is_empty() {
        return Vec::new();
    }
    spans.iter().map(|&(s, e)| raw[s..e].to_string()).collect()
}

struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    fn new(text: &str) -> LineIndex {
        let mut starts = vec![0];
        for (i, b) in text.bytes().enumerate() {
            if b == b'\n' {
                starts.push(i + 1);
            }
        }
        LineIndex { starts }
    }

    /// 1-based line containing byte offset `off`.
    fn line_of(&self, off: usize) -> u32 {
        self.starts.partition_point(|s| *s <= off) as u32
    }
}
