use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational scalar used for every symbolic coefficient.
pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// A scalar symbol.
///
/// `Jet(0)` is the dependent variable, `Jet(k)` its k-th derivative.
/// `Var` covers auxiliary variables (algebraic coordinates, or the `y0`/`y1`
/// pieces of a perturbation split) and carries its own derivative order so
/// that total derivatives act on it like a dependent variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    X,
    Jet(u32),
    Eps,
    Param(Arc<str>),
    Var(Arc<str>, u32),
}

impl Symbol {
    pub fn y() -> Symbol {
        Symbol::Jet(0)
    }

    pub fn param(name: &str) -> Symbol {
        Symbol::Param(Arc::from(name))
    }

    pub fn var(name: &str) -> Symbol {
        Symbol::Var(Arc::from(name), 0)
    }

    pub fn jet_order(&self) -> Option<u32> {
        match self {
            Symbol::Jet(k) => Some(*k),
            _ => None,
        }
    }

    pub fn is_param(&self) -> bool {
        matches!(self, Symbol::Param(_))
    }

    /// Image under the total derivative when it is again a symbol.
    pub fn total_derivative(&self) -> Option<Symbol> {
        match self {
            Symbol::Jet(k) => Some(Symbol::Jet(k + 1)),
            Symbol::Var(n, k) => Some(Symbol::Var(n.clone(), k + 1)),
            _ => None,
        }
    }
}

/// Display names for the independent and dependent variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Names {
    pub indep: String,
    pub dep: String,
}

impl Default for Names {
    fn default() -> Self {
        Names {
            indep: "x".into(),
            dep: "y".into(),
        }
    }
}

impl Names {
    pub fn render(&self, s: &Symbol) -> String {
        match s {
            Symbol::X => self.indep.clone(),
            Symbol::Jet(k) => format!("{}{}", self.dep, "'".repeat(*k as usize)),
            Symbol::Eps => "eps".into(),
            Symbol::Param(n) => n.to_string(),
            Symbol::Var(n, k) => format!("{}{}", n, "'".repeat(*k as usize)),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Names::default().render(self))
    }
}
