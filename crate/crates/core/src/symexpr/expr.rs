use std::fmt;
use std::ops;

use num_traits::{One, Signed, Zero};

use super::normal::{make_kernel, NormalForm};
use super::symbol::{q, Names, Symbol, Q};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kernel {
    Sin,
    Cos,
    Exp,
    Ln,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Sin => "sin",
            Kernel::Cos => "cos",
            Kernel::Exp => "exp",
            Kernel::Ln => "ln",
        }
    }

    pub fn from_name(s: &str) -> Option<Kernel> {
        match s {
            "sin" => Some(Kernel::Sin),
            "cos" => Some(Kernel::Cos),
            "exp" => Some(Kernel::Exp),
            "ln" => Some(Kernel::Ln),
            _ => None,
        }
    }
}

/// Expression tree as written by a user or produced by the parser.
///
/// Subtraction is `Add` with a negated term; division is `Pow(_, -1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Num(Q),
    Sym(Symbol),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Box<Expr>, Q),
    Call(Kernel, Box<Expr>),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Num(q(n))
    }

    pub fn rat(n: i64, d: i64) -> Expr {
        Expr::Num(super::symbol::qr(n, d))
    }

    pub fn x() -> Expr {
        Expr::Sym(Symbol::X)
    }

    pub fn y() -> Expr {
        Expr::Sym(Symbol::Jet(0))
    }

    pub fn jet(k: u32) -> Expr {
        Expr::Sym(Symbol::Jet(k))
    }

    pub fn eps() -> Expr {
        Expr::Sym(Symbol::Eps)
    }

    pub fn sym(s: Symbol) -> Expr {
        Expr::Sym(s)
    }

    pub fn powi(self, k: i64) -> Expr {
        Expr::Pow(Box::new(self), q(k))
    }

    pub fn call(k: Kernel, arg: Expr) -> Expr {
        Expr::Call(k, Box::new(arg))
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::call(Kernel::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::call(Kernel::Cos, arg)
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::call(Kernel::Exp, arg)
    }

    pub fn ln(arg: Expr) -> Expr {
        Expr::call(Kernel::Ln, arg)
    }

    /// Negation in the shape the parser produces for unary minus.
    pub fn negated(self) -> Expr {
        match self {
            Expr::Num(c) => Expr::Num(-c),
            Expr::Mul(mut fs) => {
                if let Some(Expr::Num(c)) = fs.first() {
                    let c = -c.clone();
                    fs[0] = Expr::Num(c);
                } else {
                    fs.insert(0, Expr::int(-1));
                }
                Expr::Mul(fs)
            }
            e => Expr::Mul(vec![Expr::int(-1), e]),
        }
    }

    pub fn normalize(&self) -> Result<NormalForm> {
        match self {
            Expr::Num(c) => Ok(NormalForm::constant(c.clone())),
            Expr::Sym(s) => Ok(NormalForm::symbol(s.clone())),
            Expr::Add(ts) => {
                let mut acc = NormalForm::zero();
                for t in ts {
                    acc = &acc + &t.normalize()?;
                }
                Ok(acc)
            }
            Expr::Mul(fs) => {
                let mut acc = NormalForm::one();
                for f in fs {
                    acc = acc.mul(&f.normalize()?)?;
                }
                Ok(acc)
            }
            Expr::Pow(b, e) => {
                if !e.is_integer() {
                    return Err(Error::UnsupportedPower(format!(
                        "non-integer exponent {} in `{}`",
                        e, self
                    )));
                }
                let k: i32 = e
                    .to_integer()
                    .try_into()
                    .map_err(|_| Error::UnsupportedPower(format!("exponent {} too large", e)))?;
                let base = b.normalize()?;
                if k < 0 && base.single_term().is_none() {
                    return Err(Error::NonMonomialDenominator(b.to_string()));
                }
                base.pow(k)
            }
            Expr::Call(k, a) => make_kernel(*k, &a.normalize()?),
        }
    }

    /// Symbolic derivative with the usual rules; the result is not simplified.
    pub fn diff(&self, v: &Symbol) -> Expr {
        match self {
            Expr::Num(_) => Expr::int(0),
            Expr::Sym(s) => Expr::int(if s == v { 1 } else { 0 }),
            Expr::Add(ts) => Expr::Add(ts.iter().map(|t| t.diff(v)).collect()),
            Expr::Mul(fs) => {
                let mut terms = Vec::new();
                for i in 0..fs.len() {
                    let mut prod: Vec<Expr> = fs.clone();
                    prod[i] = fs[i].diff(v);
                    terms.push(Expr::Mul(prod));
                }
                Expr::Add(terms)
            }
            Expr::Pow(b, e) => Expr::Mul(vec![
                Expr::Num(e.clone()),
                Expr::Pow(b.clone(), e - q(1)),
                b.diff(v),
            ]),
            Expr::Call(k, a) => {
                let outer = match k {
                    Kernel::Sin => Expr::cos((**a).clone()),
                    Kernel::Cos => Expr::sin((**a).clone()).negated(),
                    Kernel::Exp => self.clone(),
                    Kernel::Ln => Expr::Pow(a.clone(), q(-1)),
                };
                Expr::Mul(vec![outer, a.diff(v)])
            }
        }
    }

    pub fn eval(&self, env: &dyn Fn(&Symbol) -> Option<f64>) -> Result<f64> {
        use num_traits::ToPrimitive;
        Ok(match self {
            Expr::Num(c) => c.to_f64().unwrap_or(f64::NAN),
            Expr::Sym(s) => env(s).ok_or_else(|| Error::MissingSymbol(s.to_string()))?,
            Expr::Add(ts) => {
                let mut s = 0.0;
                for t in ts {
                    s += t.eval(env)?;
                }
                s
            }
            Expr::Mul(fs) => {
                let mut p = 1.0;
                for f in fs {
                    p *= f.eval(env)?;
                }
                p
            }
            Expr::Pow(b, e) => {
                let bv = b.eval(env)?;
                let ev = e.to_f64().unwrap_or(f64::NAN);
                if bv == 0.0 && ev < 0.0 {
                    return Err(Error::DomainError(format!("0 raised to {}", e)));
                }
                if e.is_integer() {
                    bv.powi(ev as i32)
                } else {
                    bv.powf(ev)
                }
            }
            Expr::Call(k, a) => {
                let av = a.eval(env)?;
                match k {
                    Kernel::Sin => av.sin(),
                    Kernel::Cos => av.cos(),
                    Kernel::Exp => av.exp(),
                    Kernel::Ln => {
                        if av <= 0.0 {
                            return Err(Error::DomainError(format!("ln of {}", av)));
                        }
                        av.ln()
                    }
                }
            }
        })
    }

    /// Text in the input grammar; parsing it back gives the same tree.
    pub fn render(&self, names: &Names) -> String {
        let mut out = String::new();
        self.write(names, &mut out);
        out
    }

    fn write(&self, names: &Names, out: &mut String) {
        match self {
            Expr::Num(c) => out.push_str(&c.to_string()),
            Expr::Sym(s) => out.push_str(&names.render(s)),
            Expr::Add(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i == 0 {
                        write_add_operand(t, names, out);
                        continue;
                    }
                    match negative_part(t) {
                        Some(pos) => {
                            out.push_str(" - ");
                            write_add_operand(&pos, names, out);
                        }
                        None => {
                            out.push_str(" + ");
                            write_add_operand(t, names, out);
                        }
                    }
                }
            }
            Expr::Mul(fs) => {
                // A leading -1 prints as a bare minus sign.
                let mut rest: &[Expr] = fs;
                if let Some(Expr::Num(c)) = fs.first() {
                    if fs.len() > 1 && c == &q(-1) && !matches!(fs[1], Expr::Num(_)) {
                        out.push('-');
                        rest = &fs[1..];
                        if rest.len() == 1 {
                            write_unary_operand(&rest[0], names, out);
                            return;
                        }
                    }
                }
                for (i, f) in rest.iter().enumerate() {
                    if i > 0 {
                        if let Expr::Pow(b, e) = f {
                            if e == &q(-1) {
                                out.push('/');
                                write_factor(b, names, out, true);
                                continue;
                            }
                        }
                        out.push('*');
                    }
                    write_factor(f, names, out, i > 0);
                }
            }
            Expr::Pow(b, e) => {
                write_base(b, names, out);
                out.push('^');
                if e.is_integer() && !e.is_negative() {
                    out.push_str(&e.to_string());
                } else {
                    out.push('(');
                    out.push_str(&e.to_string());
                    out.push(')');
                }
            }
            Expr::Call(k, a) => {
                out.push_str(k.name());
                out.push('(');
                a.write(names, out);
                out.push(')');
            }
        }
    }
}

/// For a term printed after `+`/`-` in a sum: the positive counterpart if
/// the term is written with a leading minus.
fn negative_part(t: &Expr) -> Option<Expr> {
    match t {
        Expr::Num(c) if c.is_negative() => Some(Expr::Num(-c)),
        Expr::Mul(fs) => match fs.first() {
            Some(Expr::Num(c)) if c.is_negative() => {
                if c == &q(-1) && fs.len() > 1 && !matches!(fs[1], Expr::Num(_)) {
                    let rest: Vec<Expr> = fs[1..].to_vec();
                    // `- a` parses back to Mul([-1, a]); `- a*b` to Mul([-1, a, b]).
                    if rest.len() == 1 {
                        if let Expr::Mul(_) = rest[0] {
                            return None;
                        }
                        if let Expr::Num(_) = rest[0] {
                            return None;
                        }
                        return Some(rest.into_iter().next().unwrap());
                    }
                    Some(Expr::Mul(rest))
                } else {
                    let mut fs2 = fs.clone();
                    fs2[0] = Expr::Num(-c);
                    Some(Expr::Mul(fs2))
                }
            }
            _ => None,
        },
        _ => None,
    }
}

fn write_add_operand(t: &Expr, names: &Names, out: &mut String) {
    if let Expr::Add(_) = t {
        out.push('(');
        t.write(names, out);
        out.push(')');
    } else {
        t.write(names, out);
    }
}

fn write_unary_operand(t: &Expr, names: &Names, out: &mut String) {
    match t {
        Expr::Add(_) | Expr::Mul(_) | Expr::Num(_) => {
            out.push('(');
            t.write(names, out);
            out.push(')');
        }
        _ => t.write(names, out),
    }
}

fn write_factor(f: &Expr, names: &Names, out: &mut String, not_first: bool) {
    match f {
        Expr::Add(_) | Expr::Mul(_) => {
            out.push('(');
            f.write(names, out);
            out.push(')');
        }
        Expr::Num(c) if not_first && (!c.is_integer() || c.is_negative()) => {
            out.push('(');
            f.write(names, out);
            out.push(')');
        }
        _ => f.write(names, out),
    }
}

fn write_base(b: &Expr, names: &Names, out: &mut String) {
    match b {
        Expr::Sym(_) | Expr::Call(..) => b.write(names, out),
        Expr::Num(c) if c.is_integer() && !c.is_negative() => b.write(names, out),
        _ => {
            out.push('(');
            b.write(names, out);
            out.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&Names::default()))
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs])
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs.negated()])
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs])
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, Expr::Pow(Box::new(rhs), q(-1))])
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.negated()
    }
}

impl Expr {
    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Num(c) if c.is_zero())
    }

    pub fn is_one_literal(&self) -> bool {
        matches!(self, Expr::Num(c) if c.is_one())
    }
}
