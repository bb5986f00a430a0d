//! Jet-space calculus: total derivatives, prolongations, generators and
//! the Euler operator.

mod generator;

pub use generator::{
    apply_generator, commutator, prolong_evolutionary, prolong_point, to_evolutionary,
    EvolGenerator, Generator, PointGenerator,
};

use crate::error::{Error, Result};
use crate::symexpr::{map_symbols, EpsSeries, Names, NormalForm, Symbol};

/// `y^(n) = f0 + eps*f1` with `f0`, `f1` of order at most `n-1`.
#[derive(Clone, Debug)]
pub struct OdeProblem {
    pub order: u32,
    pub f0: NormalForm,
    pub f1: NormalForm,
    pub names: Names,
    pub params: Vec<String>,
    pub max_order: u32,
}

impl OdeProblem {
    pub fn new(order: u32, f0: NormalForm, f1: NormalForm) -> Result<Self> {
        let p = OdeProblem {
            order,
            f0,
            f1,
            names: Names::default(),
            params: Vec::new(),
            max_order: 2 * order,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::ValidationError("order must be at least 1".into()));
        }
        for (name, f) in [("f0", &self.f0), ("f1", &self.f1)] {
            if f.contains(&Symbol::Eps) {
                return Err(Error::ValidationError(format!("{} must not contain eps", name)));
            }
            if let Some(k) = f.jet_order() {
                if k >= self.order {
                    return Err(Error::ValidationError(format!(
                        "{} refers to derivative order {} but the equation has order {}",
                        name, k, self.order
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn jet(&self) -> JetSpace {
        JetSpace {
            max_order: self.max_order,
        }
    }

    pub fn rhs(&self) -> EpsSeries {
        EpsSeries::new(self.f0.clone(), self.f1.clone())
    }

    /// `y^(n) - f0 - eps*f1`.
    pub fn delta(&self) -> EpsSeries {
        EpsSeries::new(
            &NormalForm::jet(self.order) - &self.f0,
            -&self.f1,
        )
    }

    pub fn unperturbed(&self) -> OdeProblem {
        OdeProblem {
            f1: NormalForm::zero(),
            ..self.clone()
        }
    }

    pub fn is_perturbed(&self) -> bool {
        !self.f1.is_zero()
    }
}

/// Total-derivative operator with an order ceiling.
#[derive(Clone, Copy, Debug)]
pub struct JetSpace {
    pub max_order: u32,
}

impl JetSpace {
    pub fn new(max_order: u32) -> Self {
        JetSpace { max_order }
    }

    fn d_once(&self, e: &NormalForm) -> Result<NormalForm> {
        let mut out = NormalForm::zero();
        for s in e.symbols() {
            if matches!(s, Symbol::Eps | Symbol::Param(_)) {
                continue;
            }
            let part = e.diff(&s)?;
            if part.is_zero() {
                continue;
            }
            match &s {
                Symbol::X => out = &out + &part,
                Symbol::Jet(k) => {
                    if k + 1 > self.max_order {
                        return Err(Error::MaxOrderExceeded(k + 1, self.max_order));
                    }
                    out = &out + &part.mul(&NormalForm::jet(k + 1))?;
                }
                Symbol::Var(_, k) => {
                    if k + 1 > self.max_order {
                        return Err(Error::MaxOrderExceeded(k + 1, self.max_order));
                    }
                    out = &out + &part.mul(&NormalForm::symbol(s.total_derivative().unwrap()))?;
                }
                Symbol::Eps | Symbol::Param(_) => {}
            }
        }
        Ok(out)
    }

    /// `D^m e` where `D = d/dx + y' d/dy + y'' d/dy' + ...`.
    pub fn total_derivative(&self, e: &NormalForm, m: u32) -> Result<NormalForm> {
        let mut cur = e.clone();
        for _ in 0..m {
            cur = self.d_once(&cur)?;
        }
        Ok(cur)
    }

    pub fn total_derivative_series(&self, e: &EpsSeries, m: u32) -> Result<EpsSeries> {
        Ok(EpsSeries::new(
            self.total_derivative(&e.e0, m)?,
            self.total_derivative(&e.e1, m)?,
        ))
    }

    /// `sum_k (-D)^k d e / d y^(k)`.
    pub fn euler_operator(&self, e: &NormalForm) -> Result<NormalForm> {
        let order = e.jet_order().unwrap_or(0);
        if 2 * order > self.max_order {
            return Err(Error::MaxOrderExceeded(2 * order, self.max_order));
        }
        let mut out = NormalForm::zero();
        for k in 0..=order {
            let part = e.diff(&Symbol::Jet(k))?;
            if part.is_zero() {
                continue;
            }
            let dk = self.total_derivative(&part, k)?;
            if k % 2 == 0 {
                out = &out + &dk;
            } else {
                out = &out - &dk;
            }
        }
        Ok(out)
    }
}

/// Replacement of `y^(n)` and its derivatives by the equation and its
/// differential consequences.
#[derive(Clone, Debug)]
pub struct OnSolution {
    n: u32,
    jet: JetSpace,
    reps: Vec<EpsSeries>,
}

impl OnSolution {
    pub fn new(problem: &OdeProblem) -> Self {
        OnSolution {
            n: problem.order,
            jet: JetSpace::new(u32::MAX / 2),
            reps: vec![problem.rhs()],
        }
    }

    /// Substitution along the unperturbed equation only.
    pub fn unperturbed(problem: &OdeProblem) -> Self {
        OnSolution::new(&problem.unperturbed())
    }

    /// Replacement for `y^(order)`, extending the chain as needed.
    pub fn replacement(&mut self, order: u32) -> Result<&EpsSeries> {
        let j = (order - self.n) as usize;
        while self.reps.len() <= j {
            let last = self.reps.last().unwrap();
            let d = self.jet.total_derivative_series(last, 1)?;
            let top = Symbol::Jet(self.n);
            let r0 = self.reps[0].clone();
            let img = |s: &Symbol| (*s == top).then(|| r0.clone());
            let e0 = map_symbols(&d.e0, &img)?;
            let e1 = map_symbols(&d.e1, &img)?;
            let next = EpsSeries::new(e0.e0, &e0.e1 + &e1.e0);
            self.reps.push(next);
        }
        Ok(&self.reps[j])
    }

    pub fn apply(&mut self, e: &NormalForm) -> Result<EpsSeries> {
        let top = e.jet_order().unwrap_or(0);
        if top < self.n {
            return crate::symexpr::eps_truncate(e);
        }
        for k in self.n..=top {
            self.replacement(k)?;
        }
        let n = self.n;
        let reps = &self.reps;
        map_symbols(e, &|s| match s {
            Symbol::Jet(k) if *k >= n => Some(reps[(k - n) as usize].clone()),
            _ => None,
        })
    }

    pub fn apply_series(&mut self, s: &EpsSeries) -> Result<EpsSeries> {
        let a = self.apply(&s.e0)?;
        let b = self.apply(&s.e1)?;
        Ok(EpsSeries::new(a.e0, &a.e1 + &b.e0))
    }
}
