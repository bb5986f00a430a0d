//! Exact symbolic expressions over the jet variables and the small
//! parameter eps.

mod expr;
mod normal;
mod numeric;
mod series;
mod symbol;

pub use expr::{Expr, Kernel};
pub use normal::{make_kernel, KernelAtom, NormalForm, TermAtom};
pub use numeric::Compiled;
pub use series::{eps_truncate, map_symbols, substitute, EpsSeries};
pub use symbol::{q, qr, Names, Symbol, Q};

use crate::error::Result;

pub fn normalize(e: &Expr) -> Result<NormalForm> {
    e.normalize()
}

pub fn diff(e: &Expr, v: &Symbol) -> Expr {
    e.diff(v)
}

pub fn eval_numeric(e: &Expr, env: &dyn Fn(&Symbol) -> Option<f64>) -> Result<f64> {
    e.eval(env)
}
