use num_traits::ToPrimitive;

use super::expr::Kernel;
use super::normal::NormalForm;
use super::symbol::Symbol;
use crate::error::{Error, Result};

/// A normal form lowered to f64 arithmetic over a fixed slot layout.
#[derive(Clone, Debug)]
pub struct Compiled {
    terms: Vec<CTerm>,
}

#[derive(Clone, Debug)]
struct CTerm {
    coef: f64,
    mono: Vec<(usize, i32)>,
    kernels: Vec<(Kernel, Compiled, i32)>,
}

impl Compiled {
    pub fn new(nf: &NormalForm, slots: &[Symbol]) -> Result<Compiled> {
        let mut terms = Vec::with_capacity(nf.len());
        for (t, c) in nf.terms() {
            let mut mono = Vec::new();
            for (s, e) in t.mono() {
                let i = slots
                    .iter()
                    .position(|x| x == s)
                    .ok_or_else(|| Error::MissingSymbol(s.to_string()))?;
                mono.push((i, *e));
            }
            let mut kernels = Vec::new();
            for k in t.kernels() {
                kernels.push((k.kind, Compiled::new(&k.arg, slots)?, k.pow as i32));
            }
            terms.push(CTerm {
                coef: c.to_f64().unwrap_or(f64::NAN),
                mono,
                kernels,
            });
        }
        Ok(Compiled { terms })
    }

    pub fn eval(&self, vals: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for t in &self.terms {
            let mut v = t.coef;
            for (i, e) in &t.mono {
                let b = vals[*i];
                if b == 0.0 && *e < 0 {
                    return Err(Error::DomainError(format!("0 raised to {}", e)));
                }
                v *= b.powi(*e);
            }
            for (k, arg, p) in &t.kernels {
                let a = arg.eval(vals)?;
                let kv = match k {
                    Kernel::Sin => a.sin(),
                    Kernel::Cos => a.cos(),
                    Kernel::Exp => a.exp(),
                    Kernel::Ln => {
                        if a <= 0.0 {
                            return Err(Error::DomainError(format!("ln of {}", a)));
                        }
                        a.ln()
                    }
                };
                v *= kv.powi(*p);
            }
            total += v;
        }
        Ok(total)
    }
}
