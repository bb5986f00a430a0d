use std::fmt;

use super::expr::Kernel;
use super::normal::{make_kernel, NormalForm, TermAtom};
use super::symbol::{q, Names, Symbol, Q};
use crate::error::{Error, Result};

/// First-order truncated series `e0 + eps*e1`; both parts are eps-free.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct EpsSeries {
    pub e0: NormalForm,
    pub e1: NormalForm,
}

impl EpsSeries {
    pub fn new(e0: NormalForm, e1: NormalForm) -> Self {
        EpsSeries { e0, e1 }
    }

    pub fn zero() -> Self {
        EpsSeries::default()
    }

    pub fn exact(e0: NormalForm) -> Self {
        EpsSeries {
            e0,
            e1: NormalForm::zero(),
        }
    }

    pub fn eps() -> Self {
        EpsSeries {
            e0: NormalForm::zero(),
            e1: NormalForm::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.e0.is_zero() && self.e1.is_zero()
    }

    pub fn add(&self, o: &EpsSeries) -> EpsSeries {
        EpsSeries::new(&self.e0 + &o.e0, &self.e1 + &o.e1)
    }

    pub fn sub(&self, o: &EpsSeries) -> EpsSeries {
        EpsSeries::new(&self.e0 - &o.e0, &self.e1 - &o.e1)
    }

    pub fn neg(&self) -> EpsSeries {
        EpsSeries::new(-&self.e0, -&self.e1)
    }

    pub fn scale(&self, c: &Q) -> EpsSeries {
        EpsSeries::new(self.e0.scale(c), self.e1.scale(c))
    }

    pub fn mul(&self, o: &EpsSeries) -> Result<EpsSeries> {
        let e0 = self.e0.mul(&o.e0)?;
        let e1 = &self.e0.mul(&o.e1)? + &self.e1.mul(&o.e0)?;
        Ok(EpsSeries::new(e0, e1))
    }

    pub fn mul_nf(&self, o: &NormalForm) -> Result<EpsSeries> {
        Ok(EpsSeries::new(self.e0.mul(o)?, self.e1.mul(o)?))
    }

    /// `(a + eps b)^k = a^k + eps k a^(k-1) b`; negative `k` needs `a` invertible.
    pub fn pow(&self, k: i32) -> Result<EpsSeries> {
        if k == 0 {
            return Ok(EpsSeries::exact(NormalForm::one()));
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let e0 = self.e0.pow(k)?;
        let e1 = if self.e1.is_zero() {
            NormalForm::zero()
        } else {
            self.e0.pow(k - 1)?.mul(&self.e1)?.scale(&q(k as i64))
        };
        Ok(EpsSeries::new(e0, e1))
    }

    pub fn diff(&self, s: &Symbol) -> Result<EpsSeries> {
        Ok(EpsSeries::new(self.e0.diff(s)?, self.e1.diff(s)?))
    }

    /// `kind(a + eps b)` expanded to first order.
    pub fn kernel(kind: Kernel, arg: &EpsSeries) -> Result<EpsSeries> {
        let base = make_kernel(kind, &arg.e0)?;
        if arg.e1.is_zero() {
            return Ok(EpsSeries::exact(base));
        }
        let slope = match kind {
            Kernel::Sin => make_kernel(Kernel::Cos, &arg.e0)?,
            Kernel::Cos => -&make_kernel(Kernel::Sin, &arg.e0)?,
            Kernel::Exp => base.clone(),
            Kernel::Ln => arg.e0.invert()?,
        };
        Ok(EpsSeries::new(base, slope.mul(&arg.e1)?))
    }

    /// `e0 + eps*e1` as a single normal form.
    pub fn to_normal_form(&self) -> NormalForm {
        &self.e0 + &self.e1.mul_symbol(&Symbol::Eps, 1)
    }

    pub fn render(&self, names: &Names) -> String {
        self.to_normal_form().render(names)
    }

    pub fn map_parts(&self, mut f: impl FnMut(&NormalForm) -> Result<NormalForm>) -> Result<Self> {
        Ok(EpsSeries::new(f(&self.e0)?, f(&self.e1)?))
    }
}

impl fmt::Display for EpsSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&Names::default()))
    }
}

/// Ring homomorphism into truncated series: every symbol for which `image`
/// returns `Some` is replaced, `eps` maps to `0 + eps*1`, everything else is
/// kept. Kernel arguments are mapped too and expanded to first order.
pub fn map_symbols(
    nf: &NormalForm,
    image: &dyn Fn(&Symbol) -> Option<EpsSeries>,
) -> Result<EpsSeries> {
    let mut out = EpsSeries::zero();
    for (t, c) in nf.terms() {
        let eps_pow = t.exponent(&Symbol::Eps);
        if eps_pow < 0 {
            return Err(Error::EpsInDenominator);
        }
        if eps_pow >= 2 {
            continue;
        }
        let mut plain = Vec::new();
        let mut acc = EpsSeries::exact(NormalForm::constant(c.clone()));
        for (s, e) in t.mono() {
            if *s == Symbol::Eps {
                continue;
            }
            match image(s) {
                Some(img) => acc = acc.mul(&img.pow(*e)?)?,
                None => plain.push((s.clone(), *e)),
            }
        }
        let mut kernel_factor = EpsSeries::exact(NormalForm::one());
        let mut kept = Vec::new();
        for k in t.kernels() {
            let arg = map_symbols(&k.arg, image)?;
            if arg.e1.is_zero() && arg.e0 == k.arg {
                kept.push(k.clone());
            } else {
                let kv = EpsSeries::kernel(k.kind, &arg)?;
                kernel_factor = kernel_factor.mul(&kv.pow(k.pow as i32)?)?;
            }
        }
        let atom = NormalForm::from_term(TermAtom::with_mono(plain, Vec::new()), q(1));
        let atom = if kept.is_empty() {
            atom
        } else {
            let mut kn = NormalForm::one();
            for k in kept {
                kn = kn.mul(&make_kernel(k.kind, &k.arg)?.pow(k.pow as i32)?)?;
            }
            atom.mul(&kn)?
        };
        let mut term = acc.mul_nf(&atom)?;
        if eps_pow == 1 {
            term = EpsSeries::new(NormalForm::zero(), term.e0);
        }
        term = term.mul(&kernel_factor)?;
        out = out.add(&term);
    }
    Ok(out)
}

/// Split a normal form by eps, discarding eps^2 and higher.
pub fn eps_truncate(nf: &NormalForm) -> Result<EpsSeries> {
    map_symbols(nf, &|_| None)
}

/// Replace `target` by `replacement` and truncate.
///
/// For a jet coordinate the replacement may not contain that coordinate or a
/// higher derivative; for any other symbol it may not contain the symbol.
pub fn substitute(nf: &NormalForm, target: &Symbol, replacement: &EpsSeries) -> Result<EpsSeries> {
    let offending = |s: &Symbol| match (target, s) {
        (Symbol::Jet(k), Symbol::Jet(m)) => m >= k,
        (Symbol::Var(a, k), Symbol::Var(b, m)) => a == b && m >= k,
        _ => s == target,
    };
    for part in [&replacement.e0, &replacement.e1] {
        if part.symbols().iter().any(offending) {
            return Err(Error::CircularSubstitution(target.to_string()));
        }
    }
    map_symbols(nf, &|s| (s == target).then(|| replacement.clone()))
}
