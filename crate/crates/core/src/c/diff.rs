use similar::TextDiff;

use super::ast::AnnotatedAst;
use super::printer::print_c;

/// Unified diff of the printed programs; empty when they print identically.
pub fn diff(before: &AnnotatedAst, after: &AnnotatedAst) -> String {
    diff_text(&print_c(before), &print_c(after))
}

pub fn diff_text(before: &str, after: &str) -> String {
    if before == after {
        return String::new();
    }
    TextDiff::from_lines(before, after)
        .unified_diff()
        .context_radius(3)
        .header("before", "after")
        .to_string()
}
