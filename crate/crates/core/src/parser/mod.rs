//! Text front end: the expression grammar and the problem-file format.

mod expr;
mod problem;

pub use expr::{parse_expr, parse_expr_at, parse_expr_with, ParseContext};
pub use problem::{parse_problem, parse_problem_file, parse_range, AnsatzSpec, ProblemFile, VerifySpec};

use crate::symexpr::{Expr, Names};

/// Render an expression so that parsing the text gives the same tree.
pub fn render(e: &Expr, names: &Names) -> String {
    e.render(names)
}
