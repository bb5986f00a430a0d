//! Canonical sums of products: the representation every symbolic
//! comparison and every determining-equation split goes through.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::expr::{Expr, Kernel};
use super::symbol::{q, Names, Symbol, Q};
use crate::error::{Error, Result};

/// A kernel factor `kind(arg)^pow` with a canonical argument.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KernelAtom {
    pub kind: Kernel,
    pub arg: NormalForm,
    pub pow: u32,
}

/// Monomial (Laurent exponents allowed) times a multiset of kernel factors.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermAtom {
    mono: Vec<(Symbol, i32)>,
    kernels: Vec<KernelAtom>,
}

impl TermAtom {
    pub fn one() -> TermAtom {
        TermAtom::default()
    }

    pub fn monomial(parts: &[(Symbol, i32)]) -> TermAtom {
        let mut t = TermAtom::one();
        for (s, e) in parts {
            t = t.times_power(s, *e);
        }
        t
    }

    pub fn mono(&self) -> &[(Symbol, i32)] {
        &self.mono
    }

    pub fn kernels(&self) -> &[KernelAtom] {
        &self.kernels
    }

    pub fn is_one(&self) -> bool {
        self.mono.is_empty() && self.kernels.is_empty()
    }

    pub fn exponent(&self, s: &Symbol) -> i32 {
        self.mono
            .iter()
            .find(|(t, _)| t == s)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    fn times_power(mut self, s: &Symbol, e: i32) -> TermAtom {
        if e == 0 {
            return self;
        }
        match self.mono.binary_search_by(|(t, _)| t.cmp(s)) {
            Ok(i) => {
                self.mono[i].1 += e;
                if self.mono[i].1 == 0 {
                    self.mono.remove(i);
                }
            }
            Err(i) => self.mono.insert(i, (s.clone(), e)),
        }
        self
    }

    /// Same atom with symbol `s` removed from the monomial part.
    pub fn without(&self, s: &Symbol) -> TermAtom {
        TermAtom {
            mono: self.mono.iter().filter(|(t, _)| t != s).cloned().collect(),
            kernels: self.kernels.clone(),
        }
    }

    pub fn with_mono(mono: Vec<(Symbol, i32)>, kernels: Vec<KernelAtom>) -> TermAtom {
        let mut t = TermAtom {
            mono: Vec::new(),
            kernels,
        };
        for (s, e) in mono {
            t = t.times_power(&s, e);
        }
        t
    }

    pub fn symbols_into(&self, out: &mut BTreeSet<Symbol>) {
        for (s, _) in &self.mono {
            out.insert(s.clone());
        }
        for k in &self.kernels {
            k.arg.symbols_into(out);
        }
    }
}

/// Canonical polynomial/Laurent form: atom -> nonzero rational coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormalForm {
    terms: BTreeMap<TermAtom, Q>,
}

impl NormalForm {
    pub fn zero() -> Self {
        NormalForm::default()
    }

    pub fn one() -> Self {
        NormalForm::constant(q(1))
    }

    pub fn constant(c: Q) -> Self {
        NormalForm::from_term(TermAtom::one(), c)
    }

    pub fn int(n: i64) -> Self {
        NormalForm::constant(q(n))
    }

    pub fn symbol(s: Symbol) -> Self {
        NormalForm::from_term(TermAtom::monomial(&[(s, 1)]), q(1))
    }

    pub fn x() -> Self {
        NormalForm::symbol(Symbol::X)
    }

    pub fn jet(k: u32) -> Self {
        NormalForm::symbol(Symbol::Jet(k))
    }

    pub fn eps() -> Self {
        NormalForm::symbol(Symbol::Eps)
    }

    pub fn from_term(t: TermAtom, c: Q) -> Self {
        let mut nf = NormalForm::zero();
        nf.add_term(t, c);
        nf
    }

    pub fn add_term(&mut self, t: TermAtom, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(t) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &NormalForm, c: &Q) {
        if c.is_zero() {
            return;
        }
        for (t, v) in &other.terms {
            self.add_term(t.clone(), v * c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermAtom, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, t: &TermAtom) -> Q {
        self.terms.get(t).cloned().unwrap_or_else(Q::zero)
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (t, c) = self.terms.iter().next().unwrap();
                t.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn single_term(&self) -> Option<(&TermAtom, &Q)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Q) -> NormalForm {
        if c.is_zero() {
            return NormalForm::zero();
        }
        NormalForm {
            terms: self.terms.iter().map(|(t, v)| (t.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &NormalForm) -> Result<NormalForm> {
        let mut out = NormalForm::zero();
        for (ta, ca) in &self.terms {
            for (tb, cb) in &other.terms {
                let c = ca * cb;
                if ta.kernels.is_empty() || tb.kernels.is_empty() {
                    let mut mono = ta.mono.clone();
                    for (s, e) in &tb.mono {
                        mono.push((s.clone(), *e));
                    }
                    let mut kernels = ta.kernels.clone();
                    kernels.extend(tb.kernels.iter().cloned());
                    out.add_term(TermAtom::with_mono(mono, kernels), c);
                } else {
                    let prod = mul_atoms(ta, tb)?;
                    out.add_scaled(&prod, &c);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_symbol(&self, s: &Symbol, e: i32) -> NormalForm {
        NormalForm {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.clone().times_power(s, e), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, k: i32) -> Result<NormalForm> {
        if k < 0 {
            return self.invert()?.pow(-k);
        }
        if k >= 3 {
            for (t, _) in self.terms() {
                for kern in t.kernels() {
                    if matches!(kern.kind, Kernel::Sin | Kernel::Cos) && !is_linear(&kern.arg) {
                        return Err(Error::UnreducedTrigPower(k as u32, kern.arg.to_string()));
                    }
                }
            }
        }
        let mut acc = NormalForm::one();
        let mut base = self.clone();
        let mut k = k as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Reciprocal of a single monomial term. Exponential kernels invert by
    /// negating their argument; any other kernel makes the term non-invertible.
    pub fn invert(&self) -> Result<NormalForm> {
        let (t, c) = self
            .single_term()
            .ok_or_else(|| Error::NonMonomialDenominator(self.to_string()))?;
        let mut kernels = Vec::new();
        for k in &t.kernels {
            if k.kind != Kernel::Exp {
                return Err(Error::NonMonomialDenominator(self.to_string()));
            }
            kernels.push(KernelAtom {
                kind: Kernel::Exp,
                arg: -&k.arg,
                pow: k.pow,
            });
        }
        let mono = t.mono.iter().map(|(s, e)| (s.clone(), -e)).collect();
        Ok(NormalForm::from_term(
            TermAtom::with_mono(mono, kernels),
            q(1) / c,
        ))
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.symbols_into(&mut out);
        out
    }

    fn symbols_into(&self, out: &mut BTreeSet<Symbol>) {
        for t in self.terms.keys() {
            t.symbols_into(out);
        }
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.symbols().contains(s)
    }

    /// Highest derivative order of the dependent variable, `None` when no jet
    /// coordinate occurs.
    pub fn jet_order(&self) -> Option<u32> {
        self.symbols().iter().filter_map(|s| s.jet_order()).max()
    }

    pub fn diff(&self, s: &Symbol) -> Result<NormalForm> {
        let mut out = NormalForm::zero();
        for (t, c) in &self.terms {
            let e = t.exponent(s);
            if e != 0 {
                let t2 = t.clone().times_power(s, -1);
                out.add_term(t2, c * q(e as i64));
            }
            for (i, k) in t.kernels.iter().enumerate() {
                let du = k.arg.diff(s)?;
                if du.is_zero() {
                    continue;
                }
                let mut rest = t.kernels.clone();
                if rest[i].pow > 1 {
                    rest[i].pow -= 1;
                } else {
                    rest.remove(i);
                }
                let base = NormalForm::from_term(
                    TermAtom {
                        mono: t.mono.clone(),
                        kernels: Vec::new(),
                    },
                    c * q(k.pow as i64),
                );
                let rest_nf = kernels_nf(rest)?;
                let outer = match k.kind {
                    Kernel::Sin => make_kernel(Kernel::Cos, &k.arg)?,
                    Kernel::Cos => -&make_kernel(Kernel::Sin, &k.arg)?,
                    Kernel::Exp => make_kernel(Kernel::Exp, &k.arg)?,
                    Kernel::Ln => k.arg.invert()?,
                };
                let piece = base.mul(&rest_nf)?.mul(&outer)?.mul(&du)?;
                out = &out + &piece;
            }
        }
        Ok(out)
    }

    /// Split by powers of eps: returns `(power, coefficient)` pairs.
    pub fn eps_grades(&self) -> BTreeMap<i32, NormalForm> {
        let mut out: BTreeMap<i32, NormalForm> = BTreeMap::new();
        for (t, c) in &self.terms {
            let e = t.exponent(&Symbol::Eps);
            out.entry(e)
                .or_default()
                .add_term(t.without(&Symbol::Eps), c.clone());
        }
        out
    }

    pub fn eval(&self, env: &dyn Fn(&Symbol) -> Option<f64>) -> Result<f64> {
        let mut total = 0.0;
        for (t, c) in &self.terms {
            let mut v = c.to_f64().unwrap_or(f64::NAN);
            for (s, e) in &t.mono {
                let b = env(s).ok_or_else(|| Error::MissingSymbol(s.to_string()))?;
                if b == 0.0 && *e < 0 {
                    return Err(Error::DomainError(format!("0 raised to {}", e)));
                }
                v *= b.powi(*e);
            }
            for k in &t.kernels {
                let a = k.arg.eval(env)?;
                let kv = match k.kind {
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
                v *= kv.powi(k.pow as i32);
            }
            total += v;
        }
        Ok(total)
    }

    pub fn to_expr(&self) -> Expr {
        let mut terms = Vec::new();
        for (t, c) in &self.terms {
            let mut factors = Vec::new();
            for (s, e) in &t.mono {
                let base = Expr::Sym(s.clone());
                factors.push(if *e == 1 {
                    base
                } else {
                    Expr::Pow(Box::new(base), q(*e as i64))
                });
            }
            for k in &t.kernels {
                let call = Expr::Call(k.kind, Box::new(k.arg.to_expr()));
                factors.push(if k.pow == 1 {
                    call
                } else {
                    Expr::Pow(Box::new(call), q(k.pow as i64))
                });
            }
            let term = if factors.is_empty() {
                Expr::Num(c.clone())
            } else if c.is_one() {
                if factors.len() == 1 {
                    factors.pop().unwrap()
                } else {
                    Expr::Mul(factors)
                }
            } else {
                factors.insert(0, Expr::Num(c.clone()));
                Expr::Mul(factors)
            };
            terms.push(term);
        }
        match terms.len() {
            0 => Expr::Num(Q::zero()),
            1 => terms.pop().unwrap(),
            _ => Expr::Add(terms),
        }
    }

    pub fn render(&self, names: &Names) -> String {
        self.to_expr().render(names)
    }

    /// Map each coefficient through `f`, dropping zeros.
    pub fn map_coefficients(&self, f: impl Fn(&TermAtom, &Q) -> Q) -> NormalForm {
        let mut out = NormalForm::zero();
        for (t, c) in &self.terms {
            out.add_term(t.clone(), f(t, c));
        }
        out
    }

    /// Sum of `coeff(atom) * image(atom)` with `image` applied per term atom.
    pub fn try_map_terms(
        &self,
        mut f: impl FnMut(&TermAtom) -> Result<NormalForm>,
    ) -> Result<NormalForm> {
        let mut out = NormalForm::zero();
        for (t, c) in &self.terms {
            let img = f(t)?;
            out.add_scaled(&img, c);
        }
        Ok(out)
    }
}

impl Add for &NormalForm {
    type Output = NormalForm;
    fn add(self, rhs: &NormalForm) -> NormalForm {
        let mut out = self.clone();
        for (t, c) in &rhs.terms {
            out.add_term(t.clone(), c.clone());
        }
        out
    }
}

impl Sub for &NormalForm {
    type Output = NormalForm;
    fn sub(self, rhs: &NormalForm) -> NormalForm {
        let mut out = self.clone();
        for (t, c) in &rhs.terms {
            out.add_term(t.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &NormalForm {
    type Output = NormalForm;
    fn neg(self) -> NormalForm {
        NormalForm {
            terms: self.terms.iter().map(|(t, c)| (t.clone(), -c)).collect(),
        }
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&Names::default()))
    }
}

fn kernels_nf(kernels: Vec<KernelAtom>) -> Result<NormalForm> {
    if kernels.is_empty() {
        return Ok(NormalForm::one());
    }
    canonical_term(Vec::new(), kernels)
}

/// Canonical `kind(arg)` with special values and sign normalization.
pub fn make_kernel(kind: Kernel, arg: &NormalForm) -> Result<NormalForm> {
    if arg.is_zero() {
        return Ok(match kind {
            Kernel::Sin => NormalForm::zero(),
            Kernel::Cos | Kernel::Exp => NormalForm::one(),
            Kernel::Ln => return Err(Error::DomainError("ln of 0".into())),
        });
    }
    if kind == Kernel::Ln && arg.as_constant().is_some_and(|c| c.is_one()) {
        return Ok(NormalForm::zero());
    }
    let leading_negative = arg
        .terms
        .values()
        .next()
        .is_some_and(|c| c.is_negative());
    let (arg, sign) = match kind {
        Kernel::Sin if leading_negative => (-arg, -1),
        Kernel::Cos if leading_negative => (-arg, 1),
        _ => (arg.clone(), 1),
    };
    let atom = TermAtom {
        mono: Vec::new(),
        kernels: vec![KernelAtom { kind, arg, pow: 1 }],
    };
    Ok(NormalForm::from_term(atom, q(sign)))
}

fn mul_atoms(a: &TermAtom, b: &TermAtom) -> Result<NormalForm> {
    let mut mono = a.mono.clone();
    mono.extend(b.mono.iter().cloned());
    let mut kernels = a.kernels.clone();
    kernels.extend(b.kernels.iter().cloned());
    canonical_term(mono, kernels)
}

/// Canonicalize a product of a monomial and kernel factors.
///
/// Powers of the same kernel merge and exponentials merge into one factor.
/// Two sin/cos factors are combined by the product-to-sum identities when
/// they share an argument or both arguments are linear forms, so a term
/// never carries two trigonometric factors that could interact. A power of
/// three or more in one non-linear argument is rejected.
fn canonical_term(mono: Vec<(Symbol, i32)>, kernels: Vec<KernelAtom>) -> Result<NormalForm> {
    let mut merged: Vec<KernelAtom> = Vec::new();
    let mut exp_arg = NormalForm::zero();
    let mut has_exp = false;
    for k in kernels {
        if k.kind == Kernel::Exp {
            exp_arg.add_scaled(&k.arg, &q(k.pow as i64));
            has_exp = true;
            continue;
        }
        if let Some(m) = merged
            .iter_mut()
            .find(|m| m.kind == k.kind && m.arg == k.arg)
        {
            m.pow += k.pow;
        } else {
            merged.push(k);
        }
    }
    if has_exp && !exp_arg.is_zero() {
        // Re-canonicalize in case the merged argument changed leading sign;
        // exp has no sign rule so this is a plain factor.
        merged.push(KernelAtom {
            kind: Kernel::Exp,
            arg: exp_arg,
            pow: 1,
        });
    }

    let (trig, mut other): (Vec<KernelAtom>, Vec<KernelAtom>) = merged
        .into_iter()
        .partition(|k| matches!(k.kind, Kernel::Sin | Kernel::Cos));
    let mut inst: Vec<(Kernel, NormalForm)> = Vec::new();
    for k in &trig {
        if !is_linear(&k.arg) {
            let deg: u32 = trig.iter().filter(|m| m.arg == k.arg).map(|m| m.pow).sum();
            if deg >= 3 {
                return Err(Error::UnreducedTrigPower(deg, k.arg.to_string()));
            }
        }
        for _ in 0..k.pow {
            inst.push((k.kind, k.arg.clone()));
        }
    }
    let mut pair = None;
    'outer: for i in 0..inst.len() {
        for j in i + 1..inst.len() {
            if inst[i].1 == inst[j].1 || (is_linear(&inst[i].1) && is_linear(&inst[j].1)) {
                pair = Some((i, j));
                break 'outer;
            }
        }
    }
    match pair {
        None => {
            other.extend(trig);
            other.sort();
            Ok(NormalForm::from_term(TermAtom::with_mono(mono, other), q(1)))
        }
        Some((i, j)) => {
            let (kb, b) = inst.remove(j);
            let (ka, a) = inst.remove(i);
            let replacement = product_to_sum(ka, &a, kb, &b)?;
            for (kind, arg) in inst {
                if let Some(m) = other.iter_mut().find(|m| m.kind == kind && m.arg == arg) {
                    m.pow += 1;
                } else {
                    other.push(KernelAtom { kind, arg, pow: 1 });
                }
            }
            let base = if other.is_empty() {
                NormalForm::from_term(TermAtom::with_mono(mono, Vec::new()), q(1))
            } else {
                canonical_term(mono, other)?
            };
            base.mul(&replacement)
        }
    }
}

/// Sum of terms of degree at most one in non-parameter symbols, no kernels.
fn is_linear(u: &NormalForm) -> bool {
    u.terms().all(|(t, _)| {
        t.kernels().is_empty()
            && t.mono().iter().all(|(s, e)| *e >= 0 && (s.is_param() || *e <= 1))
            && t.mono().iter().filter(|(s, _)| !s.is_param()).count() <= 1
    })
}

fn product_to_sum(ka: Kernel, a: &NormalForm, kb: Kernel, b: &NormalForm) -> Result<NormalForm> {
    let half = super::symbol::qr(1, 2);
    let plus = a + b;
    let minus = a - b;
    let out = match (ka, kb) {
        (Kernel::Sin, Kernel::Sin) => {
            &make_kernel(Kernel::Cos, &minus)? - &make_kernel(Kernel::Cos, &plus)?
        }
        (Kernel::Cos, Kernel::Cos) => {
            &make_kernel(Kernel::Cos, &minus)? + &make_kernel(Kernel::Cos, &plus)?
        }
        (Kernel::Sin, Kernel::Cos) => {
            &make_kernel(Kernel::Sin, &plus)? + &make_kernel(Kernel::Sin, &minus)?
        }
        (Kernel::Cos, Kernel::Sin) => {
            &make_kernel(Kernel::Sin, &plus)? - &make_kernel(Kernel::Sin, &minus)?
        }
        _ => unreachable!(),
    };
    Ok(out.scale(&half))
}
