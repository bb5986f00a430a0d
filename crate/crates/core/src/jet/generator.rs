use super::JetSpace;
use crate::error::Result;
use crate::symexpr::{EpsSeries, Names, NormalForm, Symbol};

/// `xi(x,y) d/dx + eta(x,y) d/dy`, each component a truncated eps-series.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointGenerator {
    pub xi: EpsSeries,
    pub eta: EpsSeries,
}

/// Evolutionary generator with characteristic `zeta = s0 + eps*s1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EvolGenerator {
    pub zeta: EpsSeries,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    Point(PointGenerator),
    Evol(EvolGenerator),
}

impl PointGenerator {
    pub fn new(xi: EpsSeries, eta: EpsSeries) -> Self {
        PointGenerator { xi, eta }
    }

    pub fn exact(xi: NormalForm, eta: NormalForm) -> Self {
        PointGenerator {
            xi: EpsSeries::exact(xi),
            eta: EpsSeries::exact(eta),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.xi.is_zero() && self.eta.is_zero()
    }

    pub fn render(&self, names: &Names) -> String {
        format!(
            "({}) d/d{} + ({}) d/d{}",
            self.xi.render(names),
            names.indep,
            self.eta.render(names),
            names.dep
        )
    }
}

impl EvolGenerator {
    pub fn new(zeta: EpsSeries) -> Self {
        EvolGenerator { zeta }
    }

    pub fn exact(s0: NormalForm) -> Self {
        EvolGenerator {
            zeta: EpsSeries::exact(s0),
        }
    }
}

impl Generator {
    pub fn parts(&self) -> Vec<&EpsSeries> {
        match self {
            Generator::Point(g) => vec![&g.xi, &g.eta],
            Generator::Evol(g) => vec![&g.zeta],
        }
    }

    pub fn render(&self, names: &Names) -> String {
        match self {
            Generator::Point(g) => g.render(names),
            Generator::Evol(g) => format!("({}) d/d{}", g.zeta.render(names), names.dep),
        }
    }

    pub fn evolutionary(&self) -> Result<EvolGenerator> {
        match self {
            Generator::Point(g) => to_evolutionary(g),
            Generator::Evol(g) => Ok(g.clone()),
        }
    }
}

/// `[eta, eta^(1), ..., eta^(k)]` from `eta^(j) = D eta^(j-1) - y^(j) D xi`.
pub fn prolong_point(jet: &JetSpace, g: &PointGenerator, k: u32) -> Result<Vec<EpsSeries>> {
    let dxi = jet.total_derivative_series(&g.xi, 1)?;
    let mut out = vec![g.eta.clone()];
    for j in 1..=k {
        let prev = out.last().unwrap();
        let d = jet.total_derivative_series(prev, 1)?;
        let yj = NormalForm::jet(j);
        out.push(d.sub(&dxi.mul_nf(&yj)?));
    }
    Ok(out)
}

/// `[zeta, D zeta, ..., D^k zeta]`.
pub fn prolong_evolutionary(jet: &JetSpace, g: &EvolGenerator, k: u32) -> Result<Vec<EpsSeries>> {
    let mut out = vec![g.zeta.clone()];
    for _ in 1..=k {
        let d = jet.total_derivative_series(out.last().unwrap(), 1)?;
        out.push(d);
    }
    Ok(out)
}

/// `zeta = eta - y' xi`.
pub fn to_evolutionary(g: &PointGenerator) -> Result<EvolGenerator> {
    let zeta = g.eta.sub(&g.xi.mul_nf(&NormalForm::jet(1))?);
    Ok(EvolGenerator { zeta })
}

/// Prolonged action on `f`, prolonged to the jet order of `f`.
pub fn apply_generator(jet: &JetSpace, g: &Generator, f: &EpsSeries) -> Result<EpsSeries> {
    let order = f
        .e0
        .jet_order()
        .into_iter()
        .chain(f.e1.jet_order())
        .max()
        .unwrap_or(0);
    let (comps, xi) = match g {
        Generator::Point(p) => (prolong_point(jet, p, order)?, Some(&p.xi)),
        Generator::Evol(e) => (prolong_evolutionary(jet, e, order)?, None),
    };
    let mut out = EpsSeries::zero();
    if let Some(xi) = xi {
        let fx = f.diff(&Symbol::X)?;
        if !fx.is_zero() {
            out = out.add(&xi.mul(&fx)?);
        }
    }
    for (j, c) in comps.iter().enumerate() {
        let fj = f.diff(&Symbol::Jet(j as u32))?;
        if fj.is_zero() {
            continue;
        }
        out = out.add(&c.mul(&fj)?);
    }
    Ok(out)
}

/// Action of a point generator on a function of `(x, y)` only.
fn act(g: &PointGenerator, f: &EpsSeries) -> Result<EpsSeries> {
    let fx = f.diff(&Symbol::X)?;
    let fy = f.diff(&Symbol::Jet(0))?;
    Ok(g.xi.mul(&fx)?.add(&g.eta.mul(&fy)?))
}

/// `[X, Y]` component-wise: `X(Y^i) - Y(X^i)`, truncated in eps.
pub fn commutator(x: &PointGenerator, y: &PointGenerator) -> Result<PointGenerator> {
    let xi = act(x, &y.xi)?.sub(&act(y, &x.xi)?);
    let eta = act(x, &y.eta)?.sub(&act(y, &x.eta)?);
    Ok(PointGenerator { xi, eta })
}
