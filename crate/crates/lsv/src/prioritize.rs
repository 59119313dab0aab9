//! Risk grading and verification ordering for extracted functions.
//!
//! Functions are ranked 5 (highest) to 0 by the first matching rule:
//! pointer parameters, array parameters, dynamic allocation in the body,
//! thread manipulation in the body, division/modulo/shift operators, and
//! everything else. Functions already called inside another listed
//! function's body are pruned (the checker follows callees on its own), and
//! the rest are verified in descending grade order.

use std::cmp::Reverse;
use std::fmt;

use crate::cparse::{is_ident_char, split_top_level_commas, CallMap, FunctionRecord};

/// Priority grade in 0..=5; 5 is the highest priority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PriorityGrade(u8);

impl PriorityGrade {
    pub const LOWEST: PriorityGrade = PriorityGrade(0);
    pub const HIGHEST: PriorityGrade = PriorityGrade(5);

    pub fn new(value: u8) -> Option<PriorityGrade> {
        (value <= 5).then_some(PriorityGrade(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl fmt::Display for PriorityGrade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Token sets driving the body-based grading rules. Overridable so projects
/// with custom allocators or thread wrappers can extend them.
#[derive(Debug, Clone)]
pub struct GradeSets {
    pub alloc_tokens: Vec<String>,
    pub thread_tokens: Vec<String>,
}

impl Default for GradeSets {
    fn default() -> Self {
        GradeSets {
            alloc_tokens: ["malloc", "calloc", "realloc", "free"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            thread_tokens: [
                "pthread_create",
                "pthread_join",
                "pthread_mutex_lock",
                "pthread_mutex_unlock",
                "pthread_cond_wait",
                "pthread_cond_signal",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        }
    }
}

/// Grade a function with the default token sets.
pub fn grade(f: &FunctionRecord) -> PriorityGrade {
    grade_with(f, &GradeSets::default())
}

/// Grade a function; the first matching rule wins, checked from 5 down.
pub fn grade_with(f: &FunctionRecord, sets: &GradeSets) -> PriorityGrade {
    let decls: Vec<&str> = split_top_level_commas(&f.params_scrubbed)
        .into_iter()
        .map(|(s, e)| &f.params_scrubbed[s..e])
        .collect();

    if decls.iter().any(|d| has_pointer_declarator(d)) {
        return PriorityGrade(5);
    }
    if decls.iter().any(|d| d.contains('[')) {
        return PriorityGrade(4);
    }
    if sets
        .alloc_tokens
        .iter()
        .any(|t| contains_token(&f.body_scrubbed, t))
    {
        return PriorityGrade(3);
    }
    if sets
        .thread_tokens
        .iter()
        .any(|t| contains_token(&f.body_scrubbed, t))
    {
        return PriorityGrade(2);
    }
    if has_div_or_shift(&f.body_scrubbed) {
        return PriorityGrade(1);
    }
    PriorityGrade(0)
}

/// A `*` anywhere in the declaration except inside brackets, so array-size
/// arithmetic like `a[2*3]` stays an array while `int (*fp)(void)` counts as
/// a pointer.
fn has_pointer_declarator(decl: &str) -> bool {
    let mut bracket = 0i32;
    for b in decl.bytes() {
        match b {
            b'[' => bracket += 1,
            b']' => bracket -= 1,
            b'*' if bracket == 0 => return true,
            _ => {}
        }
    }
    false
}

/// Token-delimited occurrence: `token` present and not embedded in a longer
/// identifier.
fn contains_token(text: &str, token: &str) -> bool {
    if token.is_empty() {
        return false;
    }
    let bytes = text.as_bytes();
    let mut from = 0;
    while let Some(pos) = text[from..].find(token) {
        let start = from + pos;
        let end = start + token.len();
        let left_ok = start == 0 || !is_ident_char(bytes[start - 1]);
        let right_ok = end == bytes.len() || !is_ident_char(bytes[end]);
        if left_ok && right_ok {
            return true;
        }
        from = start + 1;
    }
    false
}

/// Division, modulo, or bit-shift operators in scrubbed body text.
fn has_div_or_shift(body: &str) -> bool {
    let b = body.as_bytes();
    for k in 0..b.len() {
        match b[k] {
            b'/' | b'%' => return true,
            b'<' if b.get(k + 1) == Some(&b'<') => return true,
            b'>' if b.get(k + 1) == Some(&b'>') => return true,
            _ => {}
        }
    }
    false
}

/// Remove every function whose name appears in the union of callee sets,
/// computed over the original list.
///
/// Two exceptions: `main` is never removed, and if removal would empty the
/// list, pruning is skipped entirely and a warning is recorded.
pub fn prune_called(
    functions: Vec<FunctionRecord>,
    calls: &CallMap,
    warnings: &mut Vec<String>,
) -> Vec<FunctionRecord> {
    let called = calls.union_of_callees();
    let keep: Vec<bool> = functions
        .iter()
        .map(|f| f.name == "main" || !called.contains(f.name.as_str()))
        .collect();
    if !functions.is_empty() && keep.iter().all(|k| !k) {
        warnings.push(
            "callee pruning would remove every function; keeping the original list".to_string(),
        );
        return functions;
    }
    functions
        .into_iter()
        .zip(keep)
        .filter_map(|(f, k)| k.then_some(f))
        .collect()
}

/// Stable sort by grade, descending; ties keep source order. Ungraded
/// functions sort as grade 0.
pub fn order(mut functions: Vec<FunctionRecord>) -> Vec<FunctionRecord> {
    functions.sort_by_key(|f| Reverse(f.grade.map(PriorityGrade::value).unwrap_or(0)));
    functions
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cparse::build_call_map;

    fn synth(name: &str, params: &str, body: &str) -> FunctionRecord {
        FunctionRecord::synthetic(name, params, body)
    }

    #[test]
    fn pointer_parameter_is_grade_5() {
        assert_eq!(grade(&synth("f", "int *p", "return 0;")).value(), 5);
    }

    #[test]
    fn plain_function_is_grade_0() {
        assert_eq!(grade(&synth("f", "void", "return 0;")).value(), 0);
    }

    #[test]
    fn allocation_outranks_arithmetic() {
        let f = synth("f", "int n", "x = a / b; p = malloc(4);");
        assert_eq!(grade(&f).value(), 3);
    }

    #[test]
    fn each_rule_in_isolation() {
        assert_eq!(grade(&synth("f", "char *s", "return;")).value(), 5);
        assert_eq!(grade(&synth("f", "char buf[16]", "return;")).value(), 4);
        assert_eq!(grade(&synth("f", "int n", "free(p);")).value(), 3);
        assert_eq!(
            grade(&synth("f", "int n", "pthread_join(t, 0);")).value(),
            2
        );
        assert_eq!(grade(&synth("f", "int n", "x = n % 7;")).value(), 1);
        assert_eq!(grade(&synth("f", "int n", "x = n + 7;")).value(), 0);
    }

    #[test]
    fn function_pointer_parameter_is_grade_5() {
        assert_eq!(grade(&synth("f", "int (*fp)(void)", "return;")).value(), 5);
    }

    #[test]
    fn star_inside_array_size_is_not_a_pointer() {
        assert_eq!(grade(&synth("f", "int a[2*3]", "return;")).value(), 4);
    }

    #[test]
    fn pointer_outranks_array_in_mixed_params() {
        assert_eq!(
            grade(&synth("f", "char buf[8], int *p", "return;")).value(),
            5
        );
    }

    #[test]
    fn shift_operators_are_grade_1() {
        assert_eq!(grade(&synth("f", "int n", "x = n << 2;")).value(), 1);
        assert_eq!(grade(&synth("f", "int n", "x = n >> 2;")).value(), 1);
    }

    #[test]
    fn arrow_operator_is_not_a_shift() {
        assert_eq!(grade(&synth("f", "void", "x = s->field;")).value(), 0);
    }

    #[test]
    fn division_in_comment_ignored() {
        assert_eq!(grade(&synth("f", "void", "/* a / b */ return;")).value(), 0);
    }

    #[test]
    fn token_must_be_delimited() {
        assert_eq!(grade(&synth("f", "int n", "xfree(p);")).value(), 0);
        assert_eq!(grade(&synth("f", "int n", "my_malloc_like();")).value(), 0);
    }

    #[test]
    fn custom_token_sets_override() {
        let sets = GradeSets {
            alloc_tokens: vec!["xmalloc".into()],
            thread_tokens: vec!["spawn_worker".into()],
        };
        assert_eq!(
            grade_with(&synth("f", "int n", "xmalloc(4);"), &sets).value(),
            3
        );
        assert_eq!(
            grade_with(&synth("f", "int n", "spawn_worker();"), &sets).value(),
            2
        );
        // Default names no longer match under the override.
        assert_eq!(
            grade_with(&synth("f", "int n", "malloc(4);"), &sets).value(),
            0
        );
    }

    #[test]
    fn prune_removes_union_of_callees() {
        let fns = vec![
            synth("A", "void", "B(1);"),
            synth("B", "void", "C(2);"),
            synth("C", "void", "return;"),
        ];
        let calls = build_call_map(&fns);
        let mut w = Vec::new();
        let kept = prune_called(fns, &calls, &mut w);
        let names: Vec<&str> = kept.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, vec!["A"]);
        assert!(w.is_empty());
    }

    #[test]
    fn prune_no_calls_keeps_everything() {
        let fns = vec![synth("A", "void", "return;"), synth("B", "void", "return;")];
        let calls = build_call_map(&fns);
        let mut w = Vec::new();
        assert_eq!(prune_called(fns.clone(), &calls, &mut w), fns);
    }

    #[test]
    fn prune_cycle_without_main_is_skipped_with_warning() {
        let fns = vec![synth("A", "void", "B();"), synth("B", "void", "A();")];
        let calls = build_call_map(&fns);
        let mut w = Vec::new();
        let kept = prune_called(fns.clone(), &calls, &mut w);
        assert_eq!(kept, fns);
        assert_eq!(w.len(), 1);
        assert!(w[0].contains("pruning"));
    }

    #[test]
    fn prune_never_removes_main() {
        let fns = vec![synth("helper", "void", "main();"), synth("main", "void", "return 0;")];
        let calls = build_call_map(&fns);
        let mut w = Vec::new();
        let kept = prune_called(fns, &calls, &mut w);
        assert!(kept.iter().any(|f| f.name == "main"));
    }

    #[test]
    fn order_sorts_descending() {
        let mut fns = vec![
            synth("z", "void", "return;"),
            synth("p", "int *p", "return;"),
            synth("m", "void", "malloc(1);"),
        ];
        for f in &mut fns {
            f.grade = Some(grade(f));
        }
        let got = order(fns);
        let grades: Vec<u8> = got.iter().map(|f| f.grade.unwrap().value()).collect();
        assert_eq!(grades, vec![5, 3, 0]);
    }

    #[test]
    fn order_is_stable_for_ties() {
        let mut first = synth("first", "int *a", "return;");
        let mut second = synth("second", "int *b", "return;");
        first.start_line = 10;
        second.start_line = 40;
        first.grade = Some(PriorityGrade(5));
        second.grade = Some(PriorityGrade(5));
        let got = order(vec![first, second]);
        assert_eq!(got[0].name, "first");
        assert_eq!(got[1].name, "second");
    }

    #[test]
    fn order_idempotent_on_sorted_input() {
        let mut fns = Vec::new();
        for (i, g) in [5u8, 3, 0].iter().enumerate() {
            let mut f = synth(&format!("f{i}"), "void", "return;");
            f.grade = PriorityGrade::new(*g);
            fns.push(f);
        }
        let once = order(fns.clone());
        assert_eq!(once, fns);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // order() is a permutation with non-increasing grades.
            #[test]
            fn order_permutes_with_descending_grades(grades in proptest::collection::vec(0u8..=5, 0..40)) {
                let mut fns = Vec::new();
                for (i, g) in grades.iter().enumerate() {
                    let mut f = FunctionRecord::synthetic(&format!("f{i}"), "void", "return;");
                    f.grade = PriorityGrade::new(*g);
                    fns.push(f);
                }
                let got = order(fns.clone());
                prop_assert_eq!(got.len(), fns.len());
                let mut sorted_names: Vec<_> = got.iter().map(|f| f.name.clone()).collect();
                sorted_names.sort();
                let mut orig_names: Vec<_> = fns.iter().map(|f| f.name.clone()).collect();
                orig_names.sort();
                prop_assert_eq!(sorted_names, orig_names);
                for pair in got.windows(2) {
                    prop_assert!(pair[0].grade.unwrap() >= pair[1].grade.unwrap());
                }
            }

            // Grading is total over printable params/bodies.
            #[test]
            fn grade_is_total(params in "[ -~]{0,30}", body in "[ -~]{0,60}") {
                let f = FunctionRecord::synthetic("f", &params, &body);
                let g = grade(&f);
                prop_assert!(g.value() <= 5);
            }
        }
    }
}
