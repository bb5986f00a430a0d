use num_traits::{One, Zero};

use super::ansatz::{combine, generic, unknowns, Ansatz};
use super::linsys::{rref_with_order, solve_linear, LinearSystem, SolutionSpace};
use crate::error::{Error, Result};
use crate::jet::{apply_generator, Generator, JetSpace, OdeProblem, OnSolution, PointGenerator};
use crate::symexpr::{EpsSeries, NormalForm, Q};

/// Solution space of a problem whose unknown is a pair `u0 + eps u1`
/// sharing one basis; coordinates are `[u0..., u1...]`.
#[derive(Clone, Debug)]
pub struct SeriesSpace {
    pub basis: Vec<NormalForm>,
    pub space: SolutionSpace,
}

impl SeriesSpace {
    fn series(&self, v: &[Q]) -> EpsSeries {
        let n = self.basis.len();
        EpsSeries::new(combine(&self.basis, &v[..n]), combine(&self.basis, &v[n..]))
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn particular(&self) -> EpsSeries {
        self.series(&self.space.particular)
    }

    pub fn nullspace(&self) -> Vec<EpsSeries> {
        self.space.nullspace.iter().map(|v| self.series(v)).collect()
    }

    pub fn coordinates(&self, s: &EpsSeries) -> Option<Vec<Q>> {
        let mut v = super::ansatz::coordinates(&self.basis, &s.e0)?;
        v.extend(super::ansatz::coordinates(&self.basis, &s.e1)?);
        Some(v)
    }

    /// Whether `s` is a solution (for homogeneous problems: lies in the span).
    pub fn contains(&self, s: &EpsSeries) -> bool {
        match self.coordinates(s) {
            Some(v) => self.space.contains(&v),
            None => false,
        }
    }

    /// Basis split into members with a nonzero eps^0 part and pure eps-multiples.
    pub fn primary_and_trivial(&self) -> (Vec<EpsSeries>, Vec<EpsSeries>) {
        let n = self.basis.len();
        let order: Vec<usize> = (0..2 * n).collect();
        let rows = rref_with_order(self.space.nullspace.clone(), Some(&order));
        let mut primary = Vec::new();
        let mut trivial = Vec::new();
        for r in rows {
            if r[..n].iter().any(|c| !c.is_zero()) {
                primary.push(self.series(&r));
            } else {
                trivial.push(self.series(&r));
            }
        }
        (primary, trivial)
    }

    fn generic(&self) -> (EpsSeries, LinearSystem) {
        let n = self.basis.len();
        let mut us = unknowns("u", n);
        let vs = unknowns("v", n);
        let s = EpsSeries::new(generic(&self.basis, &us), generic(&self.basis, &vs));
        us.extend(vs);
        (s, LinearSystem::new(us))
    }
}

fn empty(basis: Vec<NormalForm>) -> SeriesSpace {
    SeriesSpace {
        basis,
        space: SolutionSpace {
            unknowns: Vec::new(),
            particular: Vec::new(),
            nullspace: Vec::new(),
            rank: 0,
        },
    }
}

/// Approximate integrating factors `mu0 + eps mu1`: the Euler operator
/// annihilates `mu * Delta` at orders eps^0 and eps^1.
pub fn integrating_factor(problem: &OdeProblem, a: &Ansatz) -> Result<SeriesSpace> {
    let mut out = empty(a.basis()?);
    let (mu, mut sys) = out.generic();
    let p = mu.mul(&problem.delta())?;
    let jet = JetSpace::new(problem.max_order.max(2 * problem.order));
    sys.add_residual(&jet.euler_operator(&p.e0)?)?;
    sys.add_residual(&jet.euler_operator(&p.e1)?)?;
    out.space = solve_linear(&sys)?;
    Ok(out)
}

/// Closed-form factor of a first-order equation from a point symmetry.
pub fn first_order_mu(f0: &NormalForm, f1: &NormalForm, g: &PointGenerator) -> Result<EpsSeries> {
    let den = &g.eta.e0 - &g.xi.e0.mul(f0)?;
    if den.is_zero() {
        return Err(Error::ZeroCharacteristic);
    }
    let mu0 = den.invert()?;
    let inner = &(&g.xi.e0.mul(f1)? + &g.xi.e1.mul(f0)?) - &g.eta.e1;
    let mu1 = mu0.pow(2)?.mul(&inner)?;
    Ok(EpsSeries::new(mu0, mu1))
}

/// `phi` with `D(phi) = mu * Delta` identically, `y^(n)` left free.
pub fn first_integral(problem: &OdeProblem, mu: &EpsSeries, a: &Ansatz) -> Result<SeriesSpace> {
    let mut out = empty(a.basis()?);
    let (phi, mut sys) = out.generic();
    let jet = JetSpace::new(problem.max_order.max(problem.order));
    let dphi = jet.total_derivative_series(&phi, 1)?;
    let rhs = mu.mul(&problem.delta())?;
    let r = dphi.sub(&rhs);
    sys.add_residual(&r.e0)?;
    sys.add_residual(&r.e1)?;
    out.space = solve_linear(&sys)?;
    Ok(out)
}

/// Invariants `omega0 + eps omega1` of order `k` with `X^(k) omega = o(eps)`
/// on solutions of `problem`. Constants are left out of the ansatz.
pub fn approximate_invariant(
    problem: &OdeProblem,
    g: &Generator,
    k: u32,
    a: &Ansatz,
) -> Result<SeriesSpace> {
    let a = a.clone().without_constant();
    let mut out = empty(a.basis()?);
    let (w, mut sys) = out.generic();
    if let Some(order) = w.e0.jet_order() {
        if order > k {
            return Err(Error::ValidationError(format!(
                "invariant ansatz has order {} above {}",
                order, k
            )));
        }
    }
    let r = apply_generator(&problem.jet(), g, &w)?;
    let r = OnSolution::new(problem).apply_series(&r)?;
    sys.add_residual(&r.e0)?;
    sys.add_residual(&r.e1)?;
    out.space = solve_linear(&sys)?;
    Ok(out)
}

/// `D(phi) - mu Delta`, which vanishes for a first integral.
pub fn first_integral_residual(problem: &OdeProblem, mu: &EpsSeries, phi: &EpsSeries) -> Result<EpsSeries> {
    let jet = JetSpace::new(problem.max_order.max(problem.order));
    Ok(jet.total_derivative_series(phi, 1)?.sub(&mu.mul(&problem.delta())?))
}

/// Normalize a series so that its leading eps^0 coefficient is one.
pub fn monic(s: &EpsSeries) -> EpsSeries {
    let lead = s
        .e0
        .terms()
        .next()
        .or_else(|| s.e1.terms().next())
        .map(|(_, c)| c.clone())
        .unwrap_or_else(Q::one);
    s.scale(&(Q::one() / lead))
}
