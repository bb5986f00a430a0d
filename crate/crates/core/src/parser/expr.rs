use num_traits::Zero;

use crate::error::{Error, Result};
use crate::symexpr::{q, Expr, Kernel, Names, Symbol, Q};

/// Which identifiers are in scope besides the built-in functions and `eps`.
#[derive(Clone, Debug, Default)]
pub struct ParseContext {
    pub names: Names,
    pub params: Vec<String>,
    pub vars: Vec<String>,
}

impl ParseContext {
    pub fn with_names(indep: &str, dep: &str) -> Self {
        ParseContext {
            names: Names {
                indep: indep.into(),
                dep: dep.into(),
            },
            ..Default::default()
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    parse_expr_with(text, &ParseContext::default())
}

pub fn parse_expr_with(text: &str, ctx: &ParseContext) -> Result<Expr> {
    parse_expr_at(text, ctx, 1)
}

/// Parse `text` reporting errors against file line `line`.
pub fn parse_expr_at(text: &str, ctx: &ParseContext, line: usize) -> Result<Expr> {
    let tokens = lex(text, line)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        ctx,
        line,
    };
    let e = p.expr()?;
    let t = p.peek();
    if t.kind != Tok::End {
        return Err(p.error_at(t.col, format!("unexpected {}", t.kind.describe())));
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Q),
    Ident(String, u32),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(c) => format!("number {}", c),
            Tok::Ident(s, k) => format!("identifier `{}{}`", s, "'".repeat(*k as usize)),
            Tok::Op(c) => format!("`{}`", c),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: Tok,
    col: usize,
}

fn lex(text: &str, line: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_part: String = chars[start..i].iter().collect();
            let mut value: Q = if int_part.is_empty() {
                Q::zero()
            } else {
                Q::from_integer(int_part.parse().unwrap())
            };
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let fs = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let frac: String = chars[fs..i].iter().collect();
                if !frac.is_empty() {
                    let num: num_bigint::BigInt = frac.parse().unwrap();
                    let den = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
                    value += Q::new(num, den);
                }
            }
            out.push(Token {
                kind: Tok::Num(value),
                col,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            let mut primes = 0;
            while i < chars.len() && chars[i] == '\'' {
                primes += 1;
                i += 1;
            }
            out.push(Token {
                kind: Tok::Ident(name, primes),
                col,
            });
            continue;
        }
        let kind = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => {
                return Err(Error::SyntaxError {
                    line,
                    column: col,
                    message: format!("unexpected character `{}`", c),
                })
            }
        };
        out.push(Token { kind, col });
        i += 1;
    }
    out.push(Token {
        kind: Tok::End,
        col: chars.len(),
    });
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    ctx: &'a ParseContext,
    line: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, column: usize, message: String) -> Error {
        Error::SyntaxError {
            line: self.line,
            column,
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<()> {
        let t = self.next();
        if t.kind == want {
            Ok(())
        } else {
            Err(self.error_at(
                t.col,
                format!("expected {}, found {}", want.describe(), t.kind.describe()),
            ))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek().kind {
                Tok::Op('+') => {
                    self.next();
                    terms.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.next();
                    terms.push(self.term()?.negated());
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<Expr> {
        // A leading minus negates the whole product: `-x/y` is -(x/y).
        if self.peek().kind == Tok::Op('-') {
            self.next();
            return Ok(self.term()?.negated());
        }
        let mut factors = vec![self.factor()?];
        loop {
            let op = match self.peek().kind {
                Tok::Op(c @ ('*' | '/')) => c,
                _ => break,
            };
            self.next();
            let f = self.factor()?;
            // Fold a purely numeric prefix so that `1/2` is the number 1/2.
            if let ([Expr::Num(a)], Expr::Num(b)) = (factors.as_slice(), &f) {
                if op == '*' || !b.is_zero() {
                    let v = if op == '*' { a * b } else { a / b };
                    factors[0] = Expr::Num(v);
                    continue;
                }
            }
            factors.push(if op == '*' {
                f
            } else {
                Expr::Pow(Box::new(f), q(-1))
            });
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Mul(factors)
        })
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.peek().kind == Tok::Op('^') {
            let caret = self.next().col;
            let e = self.factor()?;
            let value = e
                .normalize()
                .ok()
                .and_then(|nf| nf.as_constant())
                .ok_or_else(|| self.error_at(caret, "exponent must be a rational constant".into()))?;
            return Ok(Expr::Pow(Box::new(base), value));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        let t = self.next();
        match t.kind {
            Tok::Num(c) => Ok(Expr::Num(c)),
            Tok::Op('-') => Ok(self.factor()?.negated()),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name, primes) => self.ident(name, primes, t.col),
            other => Err(self.error_at(t.col, format!("unexpected {}", other.describe()))),
        }
    }

    fn ident(&mut self, name: String, primes: u32, col: usize) -> Result<Expr> {
        let names = &self.ctx.names;
        if primes == 0 && self.peek().kind == Tok::LParen {
            if let Some(k) = Kernel::from_name(&name) {
                self.next();
                let arg = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(Expr::call(k, arg));
            }
            if name == "d" {
                self.next();
                return self.derivative();
            }
        }
        if name == names.dep {
            return Ok(Expr::Sym(Symbol::Jet(primes)));
        }
        if primes == 0 {
            if name == names.indep {
                return Ok(Expr::Sym(Symbol::X));
            }
            if name == "eps" {
                return Ok(Expr::Sym(Symbol::Eps));
            }
            if self.ctx.params.contains(&name) {
                return Ok(Expr::Sym(Symbol::param(&name)));
            }
        }
        if self.ctx.vars.contains(&name) {
            return Ok(Expr::Sym(Symbol::Var(name.as_str().into(), primes)));
        }
        let _ = col;
        Err(Error::UnknownSymbol(format!(
            "{}{}",
            name,
            "'".repeat(primes as usize)
        )))
    }

    /// `d(y, x, k)` after the opening parenthesis.
    fn derivative(&mut self) -> Result<Expr> {
        let dep = self.next();
        match &dep.kind {
            Tok::Ident(n, 0) if *n == self.ctx.names.dep => {}
            Tok::Ident(n, 0) if self.ctx.vars.contains(n) => {}
            other => {
                return Err(self.error_at(
                    dep.col,
                    format!("expected dependent variable, found {}", other.describe()),
                ))
            }
        }
        self.expect(Tok::Comma)?;
        let ind = self.next();
        match &ind.kind {
            Tok::Ident(n, 0) if *n == self.ctx.names.indep => {}
            other => {
                return Err(self.error_at(
                    ind.col,
                    format!("expected independent variable, found {}", other.describe()),
                ))
            }
        }
        self.expect(Tok::Comma)?;
        let kt = self.next();
        let k = match &kt.kind {
            Tok::Num(c) if c.is_integer() && *c >= Q::zero() => {
                u32::try_from(c.to_integer()).map_err(|_| self.error_at(kt.col, "order too large".into()))?
            }
            other => {
                return Err(self.error_at(
                    kt.col,
                    format!("expected derivative order, found {}", other.describe()),
                ))
            }
        };
        self.expect(Tok::RParen)?;
        Ok(match dep.kind {
            Tok::Ident(n, _) if n == self.ctx.names.dep => Expr::Sym(Symbol::Jet(k)),
            Tok::Ident(n, _) => Expr::Sym(Symbol::Var(n.as_str().into(), k)),
            _ => unreachable!(),
        })
    }
}
