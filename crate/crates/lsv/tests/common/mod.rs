//! Shared generators for the integration suites: adversarial C corpora with
//! known ground truth, graded function specimens, random call graphs, and a
//! mock-backend corpus with a precomputed schedule.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Ground truth for one seeded definition.
pub struct SeededFunction {
    pub name: String,
    /// 1-based line of the name token.
    pub start_line: u32,
}

pub struct GeneratedFile {
    pub content: String,
    pub functions: Vec<SeededFunction>,
}

fn push_text(lines: &mut Vec<String>, text: &str) {
    for l in text.split('\n') {
        lines.push(l.to_string());
    }
}

/// Generate a C file with `fn_count` known definitions interleaved with
/// adversarial decoys: comments and string literals holding braces and fake
/// signatures, prototypes, macros with unbalanced braces, struct and
/// initializer braces.
pub fn adversarial_file(rng: &mut ChaCha8Rng, file_idx: usize, fn_count: usize) -> GeneratedFile {
    let mut lines: Vec<String> = Vec::new();
    let mut functions = Vec::new();
    let mut decoy_counter = 0usize;

    push_text(&mut lines, "#include <stdio.h>");
    push_text(&mut lines, "#include <stdlib.h>");
    push_text(&mut lines, "");

    for k in 0..fn_count {
        for _ in 0..rng.gen_range(1..=3) {
            decoy_counter += 1;
            let d = decoy_counter;
            let decoy = match rng.gen_range(0..11) {
                0 => format!("// int fake_line_{d}(int x) {{ return x; }}"),
                1 => format!("/* int fake_blk_{d}(void) {{\n   }} }} {{ fake body */"),
                2 => format!(
                    "static const char *msg_{d} = \"int fake_str_{d}(char *s) {{ while(1){{}} }}\";"
                ),
                3 => format!("char open_{d} = '{{';"),
                4 => format!("int proto_{d}(int, char *);"),
                5 => format!("#define MKFN_{d}(x) int x(void) {{ return 0; }}"),
                6 => format!("#define WRAP_{d} \\\n    {{ 0, 0 }}"),
                7 => format!("struct pair_{d} {{ int a; int b; }};"),
                8 => format!("int table_{d}[3] = {{1, 2, 3}};"),
                9 => format!("typedef int (*cb_{d})(int, void *);"),
                _ => format!("extern int ext_{d};"),
            };
            push_text(&mut lines, &decoy);
        }

        let name = format!("fn_{file_idx}_{k}");
        match rng.gen_range(0..4) {
            0 => {
                let line = lines.len() as u32 + 1;
                push_text(
                    &mut lines,
                    &format!("static int {name}(int *p) {{ return *p ? 1 : 0; }}"),
                );
                functions.push(SeededFunction {
                    name,
                    start_line: line,
                });
            }
            1 => {
                let line = lines.len() as u32 + 1;
                push_text(
                    &mut lines,
                    &format!(
                        "int {name}(char buf[16], int n)\n{{\n    /* int inner_fake(void) {{ }} */\n    const char *s = \"}}{{;)(\";\n    if (n > 0) {{\n        buf[0] = s[0];\n    }}\n    return n / 2;\n}}"
                    ),
                );
                functions.push(SeededFunction {
                    name,
                    start_line: line,
                });
            }
            2 => {
                push_text(&mut lines, "static long");
                let line = lines.len() as u32 + 1;
                push_text(
                    &mut lines,
                    &format!("{name}(void)\n{{\n    return 42L;\n}}"),
                );
                functions.push(SeededFunction {
                    name,
                    start_line: line,
                });
            }
            _ => {
                let line = lines.len() as u32 + 1;
                push_text(
                    &mut lines,
                    &format!(
                        "int {name}(int a,\n           char *b)\n{{\n    return a + (b != 0);\n}}"
                    ),
                );
                functions.push(SeededFunction {
                    name,
                    start_line: line,
                });
            }
        }
        push_text(&mut lines, "");
    }

    GeneratedFile {
        content: lines.join("\n") + "\n",
        functions,
    }
}

/// Parameter/body specimen for grading comparisons. Statements are plain
/// code (no comments or literals) so an independent scanner can work on the
/// raw text.
pub struct GradedSpecimen {
    pub params: String,
    pub body: String,
}

pub fn random_specimen(rng: &mut ChaCha8Rng) -> GradedSpecimen {
    const PARAMS: &[&str] = &[
        "void",
        "",
        "int n",
        "double x, long y",
        "int *p",
        "char **argv",
        "const char *s, int n",
        "int (*cb)(int, char)",
        "char buf[16]",
        "int m[2*4]",
        "struct foo f, unsigned u",
        "int n, char tail[4]",
    ];
    const STMTS: &[&str] = &[
        "return 0;",
        "x = a + b;",
        "y = a - b * c;",
        "p = malloc(n);",
        "free(p);",
        "q = calloc(1, n);",
        "r = realloc(p, n);",
        "pthread_create(&t, 0, worker, 0);",
        "pthread_join(t, 0);",
        "pthread_mutex_lock(&mu);",
        "pthread_mutex_unlock(&mu);",
        "pthread_cond_wait(&cv, &mu);",
        "pthread_cond_signal(&cv);",
        "d = a / b;",
        "m = a % b;",
        "s = a << 2;",
        "t = a >> 3;",
        "v <<= 1;",
        "w /= 2;",
        "xfree(p);",
        "my_malloc_like();",
        "smallocate(4);",
        "my_pthread_create_x();",
        "y = s->field;",
        "z = (a < b) && (c > d);",
    ];
    let params = PARAMS.choose(rng).unwrap().to_string();
    let n = rng.gen_range(1..=5);
    let body = (0..n)
        .map(|_| *STMTS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join("\n    ");
    GradedSpecimen { params, body }
}

/// A random call graph over at most 30 functions, sometimes containing
/// `main`, sometimes a full cycle cover (so pruning would empty the list).
pub struct GraphCase {
    pub names: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub grades: Vec<u8>,
}

pub fn random_graph(rng: &mut ChaCha8Rng) -> GraphCase {
    let n = rng.gen_range(1..=30usize);
    let mut names: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
    if rng.gen_bool(0.3) {
        let idx = rng.gen_range(0..n);
        names[idx] = "main".to_string();
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(0.08) {
                edges.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    if n >= 2 && rng.gen_bool(0.1) {
        for i in 0..n {
            edges.push((names[i].clone(), names[(i + 1) % n].clone()));
        }
    }
    let grades = (0..n).map(|_| rng.gen_range(0..=5u8)).collect();
    GraphCase {
        names,
        edges,
        grades,
    }
}

/// A deterministic on-disk corpus plus mock fixture with a precomputed
/// schedule and seeded violations.
pub struct MockCorpus {
    pub corpus_dir: PathBuf,
    pub fixture_path: PathBuf,
    /// (file path string, function name) in expected dispatch order for the
    /// prioritized mode with one worker.
    pub expected_ledger: Vec<(String, String)>,
    /// (trace file, trace line, function) for every seeded violation.
    pub expected_violations: Vec<(String, u32, String)>,
    pub extracted_total: usize,
}

/// Build `n_files` C files of `fns_per_file` functions each. Function `k`
/// cycles through the six grade classes; every tenth function calls its
/// successor, which therefore gets pruned in prioritized mode. A subset of
/// retained functions gets a seeded counterexample in the fixture.
pub fn build_mock_corpus(root: &Path, n_files: usize, fns_per_file: usize) -> MockCorpus {
    let corpus_dir = root.join("corpus");
    let trace_dir = root.join("traces");
    fs::create_dir_all(&corpus_dir).unwrap();
    fs::create_dir_all(&trace_dir).unwrap();

    let mut fixture = String::new();
    let mut expected_ledger = Vec::new();
    let mut expected_violations = Vec::new();
    let mut extracted_total = 0usize;

    for i in 0..n_files {
        let file_name = format!("file_{i:02}.c");
        let path = corpus_dir.join(&file_name);
        let mut content = String::new();
        // (name, grade, source index) for every function in the file.
        let mut defs: Vec<(String, u8, usize)> = Vec::new();
        let mut callees: Vec<String> = Vec::new();

        for k in 0..fns_per_file {
            let name = format!("f_{i}_{k}");
            let call = if k % 10 == 0 && k + 1 < fns_per_file {
                callees.push(format!("f_{i}_{}", k + 1));
                format!("f_{i}_{}(0); ", k + 1)
            } else {
                String::new()
            };
            let (grade, def) = match k % 6 {
                0 => (5, format!("int {name}(int *p) {{ {call}return *p; }}\n")),
                1 => (4, format!("int {name}(char b[8]) {{ {call}return b[0]; }}\n")),
                2 => (
                    3,
                    format!("int {name}(int n) {{ {call}void *p = malloc(n); free(p); return 0; }}\n"),
                ),
                3 => (
                    2,
                    format!("int {name}(int n) {{ {call}pthread_join(t, 0); return n; }}\n"),
                ),
                4 => (1, format!("int {name}(int n) {{ {call}return n / 3; }}\n")),
                _ => (0, format!("int {name}(void) {{ {call}return 7; }}\n")),
            };
            content.push_str(&def);
            defs.push((name, grade, k));
        }
        fs::write(&path, &content).unwrap();
        extracted_total += defs.len();

        // Retained = not a callee; order = stable by grade descending.
        let mut retained: Vec<&(String, u8, usize)> = defs
            .iter()
            .filter(|(name, _, _)| !callees.contains(name))
            .collect();
        retained.sort_by_key(|(_, grade, idx)| (std::cmp::Reverse(*grade), *idx));

        for (name, _, k) in retained {
            let path_str = path.display().to_string();
            expected_ledger.push((path_str.clone(), name.clone()));
            if (i + k) % 7 == 0 {
                let (phrase, extra) = match k % 3 {
                    0 => ("division by zero", "value != 0"),
                    1 => ("dereference failure: NULL pointer", "p != 0"),
                    _ => ("array bounds violated: ", "array `a' upper bound"),
                };
                let line = 10 + *k as u32;
                let trace_path = trace_dir.join(format!("t_{i}_{k}.txt"));
                fs::write(
                    &trace_path,
                    format!(
                        "Counterexample:\n\nViolated property:\nfile {file_name} line {line} function {name}\n{phrase}\n{extra}\n\nVERIFICATION FAILED\n"
                    ),
                )
                .unwrap();
                fixture.push_str(&format!(
                    "{path_str}\t{name}\t1\t{}\n",
                    trace_path.display()
                ));
                expected_violations.push((file_name.clone(), line, name.clone()));
            }
        }
    }

    let fixture_path = root.join("fixture.tsv");
    fs::write(&fixture_path, fixture).unwrap();

    MockCorpus {
        corpus_dir,
        fixture_path,
        expected_ledger,
        expected_violations,
        extracted_total,
    }
}
