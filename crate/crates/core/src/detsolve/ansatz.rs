use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::Result;
use crate::jet::{EvolGenerator, Generator, OdeProblem, PointGenerator};
use crate::symexpr::{EpsSeries, NormalForm, Symbol, TermAtom, Q};

/// Undetermined-coefficient basis for one unknown function.
///
/// The basis is every product of argument powers within their ranges times
/// a product of at most `kernel_degree` kernel atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct Ansatz {
    pub ranges: Vec<(Symbol, i32, i32)>,
    pub kernels: Vec<NormalForm>,
    pub kernel_degree: u32,
    /// Optional bound on the sum of the nonnegative argument exponents.
    pub total_degree: Option<i32>,
    pub skip_constant: bool,
}

impl Ansatz {
    /// Polynomial of degree at most `degree` in each argument.
    pub fn polynomial(args: &[Symbol], degree: i32) -> Self {
        Ansatz {
            ranges: args.iter().map(|s| (s.clone(), 0, degree)).collect(),
            kernels: Vec::new(),
            kernel_degree: 1,
            total_degree: None,
            skip_constant: false,
        }
    }

    pub fn with_range(mut self, s: Symbol, lo: i32, hi: i32) -> Self {
        match self.ranges.iter_mut().find(|r| r.0 == s) {
            Some(r) => {
                r.1 = lo;
                r.2 = hi;
            }
            None => self.ranges.push((s, lo, hi)),
        }
        self
    }

    pub fn with_kernels(mut self, kernels: Vec<NormalForm>, degree: u32) -> Self {
        self.kernels = kernels;
        self.kernel_degree = degree;
        self
    }

    pub fn with_total_degree(mut self, d: i32) -> Self {
        self.total_degree = Some(d);
        self
    }

    pub fn without_constant(mut self) -> Self {
        self.skip_constant = true;
        self
    }

    fn kernel_products(&self) -> Result<Vec<NormalForm>> {
        let mut out = vec![NormalForm::one()];
        let mut layer = vec![(0usize, NormalForm::one())];
        for _ in 0..self.kernel_degree {
            let mut next = Vec::new();
            for (start, p) in &layer {
                for (i, k) in self.kernels.iter().enumerate().skip(*start) {
                    let prod = p.mul(k)?;
                    out.push(prod.clone());
                    next.push((i, prod));
                }
            }
            layer = next;
        }
        Ok(out)
    }

    /// Basis functions, each a single term with coefficient 1, in graded order.
    pub fn basis(&self) -> Result<Vec<NormalForm>> {
        let mut monos: Vec<Vec<(Symbol, i32)>> = vec![Vec::new()];
        for (s, lo, hi) in &self.ranges {
            let mut next = Vec::new();
            for m in &monos {
                for e in *lo..=*hi {
                    let mut m = m.clone();
                    if e != 0 {
                        m.push((s.clone(), e));
                    }
                    next.push(m);
                }
            }
            monos = next;
        }
        if let Some(d) = self.total_degree {
            monos.retain(|m| m.iter().map(|(_, e)| (*e).max(0)).sum::<i32>() <= d);
        }
        let kernels = self.kernel_products()?;
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for k in &kernels {
            for m in &monos {
                // Trig products reduce to sums; their atoms span the same space.
                let p = k.mul(&NormalForm::from_term(TermAtom::monomial(m), Q::one()))?;
                for (t, _) in p.terms() {
                    if self.skip_constant && t.is_one() {
                        continue;
                    }
                    if seen.insert(t.clone()) {
                        out.push((grade(t), NormalForm::from_term(t.clone(), Q::one())));
                    }
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        Ok(out.into_iter().map(|(_, f)| f).collect())
    }

    pub fn len(&self) -> Result<usize> {
        Ok(self.basis()?.len())
    }
}

fn grade(t: &TermAtom) -> (i32, usize) {
    let d = t.mono().iter().map(|(_, e)| e.abs()).sum::<i32>();
    (d, t.kernels().len())
}

/// Coordinates of `f` in `basis` (each basis element a single unit term).
pub fn coordinates(basis: &[NormalForm], f: &NormalForm) -> Option<Vec<Q>> {
    let index: BTreeMap<&TermAtom, usize> = basis
        .iter()
        .enumerate()
        .map(|(i, b)| (b.single_term().unwrap().0, i))
        .collect();
    let mut v = vec![Q::zero(); basis.len()];
    for (t, c) in f.terms() {
        v[*index.get(t)?] = c.clone();
    }
    Some(v)
}

pub fn combine(basis: &[NormalForm], coeffs: &[Q]) -> NormalForm {
    let mut out = NormalForm::zero();
    for (b, c) in basis.iter().zip(coeffs) {
        if !c.is_zero() {
            out.add_scaled(b, c);
        }
    }
    out
}

/// `sum_j u_j b_j` with symbolic unknowns `u_j`.
pub fn generic(basis: &[NormalForm], unknowns: &[Symbol]) -> NormalForm {
    let mut out = NormalForm::zero();
    for (b, u) in basis.iter().zip(unknowns) {
        out = &out + &b.mul_symbol(u, 1);
    }
    out
}

/// Fresh coefficient symbols that cannot collide with parsed identifiers.
pub fn unknowns(prefix: &str, n: usize) -> Vec<Symbol> {
    (0..n).map(|i| Symbol::param(&format!("${}{}", prefix, i))).collect()
}

/// Ansatz for a generator: `(xi, eta)` for point generators or `zeta`.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorAnsatz {
    Point { xi: Ansatz, eta: Ansatz },
    Evol { zeta: Ansatz },
}

/// A generator ansatz with its bases materialized.
#[derive(Clone, Debug)]
pub struct GeneratorBasis {
    pub point: bool,
    pub components: Vec<Vec<NormalForm>>,
}

impl GeneratorAnsatz {
    pub fn point(ansatz: Ansatz) -> Self {
        GeneratorAnsatz::Point {
            xi: ansatz.clone(),
            eta: ansatz,
        }
    }

    pub fn evolutionary(ansatz: Ansatz) -> Self {
        GeneratorAnsatz::Evol { zeta: ansatz }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, GeneratorAnsatz::Point { .. })
    }

    pub fn materialize(&self) -> Result<GeneratorBasis> {
        Ok(match self {
            GeneratorAnsatz::Point { xi, eta } => GeneratorBasis {
                point: true,
                components: vec![xi.basis()?, eta.basis()?],
            },
            GeneratorAnsatz::Evol { zeta } => GeneratorBasis {
                point: false,
                components: vec![zeta.basis()?],
            },
        })
    }
}

impl GeneratorBasis {
    pub fn len(&self) -> usize {
        self.components.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Component functions for a coefficient vector laid out component-major.
    pub fn components_of(&self, coeffs: &[Q]) -> Vec<NormalForm> {
        let mut off = 0;
        self.components
            .iter()
            .map(|b| {
                let f = combine(b, &coeffs[off..off + b.len()]);
                off += b.len();
                f
            })
            .collect()
    }

    pub fn generic(&self, unknowns: &[Symbol]) -> Vec<NormalForm> {
        let mut off = 0;
        self.components
            .iter()
            .map(|b| {
                let f = generic(b, &unknowns[off..off + b.len()]);
                off += b.len();
                f
            })
            .collect()
    }

    pub fn coordinates(&self, comps: &[NormalForm]) -> Option<Vec<Q>> {
        let mut v = Vec::with_capacity(self.len());
        for (b, f) in self.components.iter().zip(comps) {
            v.extend(coordinates(b, f)?);
        }
        Some(v)
    }

    /// Generator with the given eps^0 and eps^1 components.
    pub fn generator(&self, c0: Vec<NormalForm>, c1: Vec<NormalForm>) -> Generator {
        let mut parts = c0.into_iter().zip(c1).map(|(a, b)| EpsSeries::new(a, b));
        if self.point {
            let xi = parts.next().unwrap();
            let eta = parts.next().unwrap();
            Generator::Point(PointGenerator::new(xi, eta))
        } else {
            Generator::Evol(EvolGenerator::new(parts.next().unwrap()))
        }
    }
}

/// Component functions of `g` at one eps order, in ansatz layout.
pub fn generator_components(g: &Generator, order: usize) -> Vec<NormalForm> {
    g.parts()
        .into_iter()
        .map(|p| if order == 0 { p.e0.clone() } else { p.e1.clone() })
        .collect()
}

/// `x, y, y', ..., y^(k)`.
pub fn jet_args(k: u32) -> Vec<Symbol> {
    let mut v = vec![Symbol::X];
    v.extend((0..=k).map(Symbol::Jet));
    v
}

/// Default point-symmetry ansatz: degree 3 in `x` and `y`.
pub fn default_point(problem_kernels: &[NormalForm]) -> GeneratorAnsatz {
    let a = Ansatz::polynomial(&jet_args(0), 3).with_kernels(problem_kernels.to_vec(), 1);
    GeneratorAnsatz::point(a)
}

/// Default order-`s` local ansatz: `x` up to 3, `y` up to 2, jets in `-2..3`.
pub fn default_local(s: u32, problem_kernels: &[NormalForm]) -> GeneratorAnsatz {
    let mut a = Ansatz::polynomial(&[Symbol::X], 3).with_range(Symbol::y(), 0, 2);
    for k in 1..=s {
        a = a.with_range(Symbol::Jet(k), -2, 3);
    }
    GeneratorAnsatz::evolutionary(a.with_kernels(problem_kernels.to_vec(), 1))
}

/// Default ansatz for integrating factors and first integrals of `problem`.
pub fn default_mu(problem: &OdeProblem, problem_kernels: &[NormalForm]) -> Ansatz {
    let mut a = Ansatz::polynomial(&[Symbol::X], 2);
    for k in 0..problem.order {
        a = a.with_range(Symbol::Jet(k), -2, 2);
    }
    a.with_kernels(problem_kernels.to_vec(), 1)
}

/// Default first-integral ansatz: like [`default_mu`] but of degree 3.
pub fn default_phi(problem: &OdeProblem, problem_kernels: &[NormalForm]) -> Ansatz {
    let mut a = Ansatz::polynomial(&[Symbol::X], 3);
    for k in 0..problem.order {
        a = a.with_range(Symbol::Jet(k), -2, 3);
    }
    a.with_kernels(problem_kernels.to_vec(), 1)
}
