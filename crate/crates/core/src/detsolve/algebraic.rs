use crate::error::{Error, Result};
use crate::symexpr::{map_symbols, EpsSeries, NormalForm, Symbol};

/// Fresh symbols `y0^(k)` and `y1^(k)` used by [`perturbation_split`].
pub fn split_symbols(k: u32) -> (Symbol, Symbol) {
    (Symbol::Var("y0".into(), k), Symbol::Var("y1".into(), k))
}

/// Substitute `y = y0 + eps y1` into `eq` and return the eps^0 and eps^1
/// equations.
pub fn perturbation_split(eq: &EpsSeries, m: u32) -> Result<(NormalForm, NormalForm)> {
    let img = |s: &Symbol| match s {
        Symbol::Jet(k) if *k <= m => {
            let (a, b) = split_symbols(*k);
            Some(EpsSeries::new(NormalForm::symbol(a), NormalForm::symbol(b)))
        }
        _ => None,
    };
    let a = map_symbols(&eq.e0, &img)?;
    let b = map_symbols(&eq.e1, &img)?;
    Ok((a.e0, &a.e1 + &b.e0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompletionMode {
    /// Symmetry of `F0 = 0` alone.
    Exact,
    /// Exact symmetry of `F0 + eps F1 = 0` for all eps, expanded to first order.
    ExactPerturbed,
    /// First-order deformation of an exact symmetry of `F0 = 0`.
    Approximate,
}

/// Solve `sum_i xi^i dF/dx^i = 0` for the component on `vars[0]` given the
/// components `known` on `vars[1..]`.
pub fn algebraic_completion(
    vars: &[Symbol],
    f0: &NormalForm,
    f1: &NormalForm,
    known: &[EpsSeries],
    mode: CompletionMode,
) -> Result<EpsSeries> {
    if known.len() + 1 != vars.len() {
        return Err(Error::ValidationError(format!(
            "{} known components for {} variables",
            known.len(),
            vars.len()
        )));
    }
    let g0 = f0.diff(&vars[0])?;
    if g0.is_zero() {
        return Err(Error::ZeroGradient);
    }
    let inv0 = g0.invert()?;
    let mut tangential0 = NormalForm::zero();
    for (v, k) in vars[1..].iter().zip(known) {
        tangential0 = &tangential0 + &k.e0.mul(&f0.diff(v)?)?;
    }
    let xi0 = -&inv0.mul(&tangential0)?;
    match mode {
        CompletionMode::Exact => Ok(EpsSeries::exact(xi0)),
        CompletionMode::Approximate => {
            let mut t = f1.diff(&vars[0])?.mul(&xi0)?;
            for (v, k) in vars[1..].iter().zip(known) {
                t = &t + &k.e1.mul(&f0.diff(v)?)?;
                t = &t + &k.e0.mul(&f1.diff(v)?)?;
            }
            Ok(EpsSeries::new(xi0, -&inv0.mul(&t)?))
        }
        CompletionMode::ExactPerturbed => {
            let f = EpsSeries::new(f0.clone(), f1.clone());
            let mut t = EpsSeries::zero();
            for (v, k) in vars[1..].iter().zip(known) {
                t = t.add(&k.mul(&f.diff(v)?)?);
            }
            let g = f.diff(&vars[0])?;
            let inv = EpsSeries::new(inv0.clone(), -&inv0.pow(2)?.mul(&g.e1)?);
            Ok(inv.mul(&t)?.neg())
        }
    }
}

/// `sum_i xi^i dF/dx^i` truncated to first order.
pub fn completion_residual(vars: &[Symbol], f0: &NormalForm, f1: &NormalForm, comps: &[EpsSeries]) -> Result<EpsSeries> {
    let f = EpsSeries::new(f0.clone(), f1.clone());
    let mut t = EpsSeries::zero();
    for (v, k) in vars.iter().zip(comps) {
        t = t.add(&k.mul(&f.diff(v)?)?);
    }
    Ok(t)
}
