use num_traits::{One, Zero};

use super::ansatz::{generator_components, unknowns, GeneratorAnsatz, GeneratorBasis};
use super::linsys::{annihilator, in_span, rref, rref_with_order, solve_linear, LinearSystem, SolutionSpace};
use crate::error::{Error, Result};
use crate::jet::{apply_generator, Generator, OdeProblem, OnSolution};
use crate::symexpr::{EpsSeries, NormalForm, Symbol, Q};

/// `X^(n)(y^(n) - f0 - eps f1)` with the equation substituted.
pub fn determining_residual(problem: &OdeProblem, g: &Generator) -> Result<EpsSeries> {
    let jet = problem.jet();
    let r = apply_generator(&jet, g, &problem.delta())?;
    OnSolution::new(problem).apply_series(&r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymmetryClass {
    Exact,
    InheritedExact,
    GenuineApproximate,
    Trivial,
}

impl SymmetryClass {
    pub fn name(self) -> &'static str {
        match self {
            SymmetryClass::Exact => "exact",
            SymmetryClass::InheritedExact => "inherited-exact",
            SymmetryClass::GenuineApproximate => "genuine-approximate",
            SymmetryClass::Trivial => "trivial",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassifiedGenerator {
    pub generator: Generator,
    pub class: SymmetryClass,
}

/// Stable directions of the exact space, as coordinate vectors over the
/// stage-1 basis, together with the constraints cutting them out.
#[derive(Clone, Debug, PartialEq)]
pub struct Stability {
    pub stable: Vec<Vec<Q>>,
    pub constraints: Vec<Vec<Q>>,
    pub unstable: Vec<Vec<Q>>,
}

impl Stability {
    fn from_stable(stable: Vec<Vec<Q>>, m: usize) -> Self {
        let stable = rref(stable);
        let constraints = annihilator(&stable, m);
        Stability {
            unstable: constraints.clone(),
            stable,
            constraints,
        }
    }

    pub fn stable_dim(&self) -> usize {
        self.stable.len()
    }

    pub fn is_stable(&self, c: &[Q]) -> bool {
        in_span(&self.stable, c)
    }
}

#[derive(Clone, Debug)]
pub struct SymmetryReport {
    pub generators: Vec<ClassifiedGenerator>,
    /// Basis of the unperturbed exact space the C-coordinates refer to.
    pub exact_basis: Vec<Generator>,
    pub stability: Option<Stability>,
    pub space: SolutionSpace,
    pub rows: usize,
    pub basis: GeneratorBasis,
}

impl SymmetryReport {
    pub fn dimension(&self) -> usize {
        self.space.dim()
    }

    pub fn count(&self, class: SymmetryClass) -> usize {
        self.generators.iter().filter(|g| g.class == class).count()
    }

    pub fn of_class(&self, class: SymmetryClass) -> Vec<&Generator> {
        self.generators
            .iter()
            .filter(|g| g.class == class)
            .map(|g| &g.generator)
            .collect()
    }

    fn is_approximate(&self) -> bool {
        self.stability.is_some()
    }

    /// Coordinates of `g` in the solution unknowns, if expressible.
    pub fn coordinates(&self, g: &Generator) -> Result<Option<Vec<Q>>> {
        let c1 = generator_components(g, 1);
        if !self.is_approximate() {
            if c1.iter().any(|c| !c.is_zero()) {
                return Ok(None);
            }
            return Ok(self.basis.coordinates(&generator_components(g, 0)));
        }
        let Some(mut c) = express(&self.exact_basis, &generator_components(g, 0))? else {
            return Ok(None);
        };
        let Some(a) = self.basis.coordinates(&c1) else {
            return Ok(None);
        };
        c.extend(a);
        Ok(Some(c))
    }

    /// Whether `g` lies in the reported space.
    pub fn contains(&self, g: &Generator) -> Result<bool> {
        Ok(match self.coordinates(g)? {
            Some(v) => self.space.contains_direction(&v),
            None => false,
        })
    }
}

/// Coefficients `c` with `sum c_i comps(gens_i) = target`, if any.
pub fn express(gens: &[Generator], target: &[NormalForm]) -> Result<Option<Vec<Q>>> {
    let cs = unknowns("c", gens.len());
    let mut sys = LinearSystem::new(cs.clone());
    for (k, t) in target.iter().enumerate() {
        let mut r = -t;
        for (g, c) in gens.iter().zip(&cs) {
            let comps = generator_components(g, 0);
            let Some(part) = comps.get(k) else {
                return Ok(None);
            };
            r = &r + &part.mul_symbol(c, 1);
        }
        sys.add_residual(&r)?;
    }
    match solve_linear(&sys) {
        Ok(s) => Ok(Some(s.particular)),
        Err(Error::Inconsistent(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn build_determining_exact(
    problem: &OdeProblem,
    ansatz: &GeneratorAnsatz,
) -> Result<(LinearSystem, GeneratorBasis)> {
    let basis = ansatz.materialize()?;
    let us = unknowns("a", basis.len());
    let comps = basis.generic(&us);
    let zeros = vec![NormalForm::zero(); comps.len()];
    let g = basis.generator(comps, zeros);
    let res = determining_residual(&problem.unperturbed(), &g)?;
    let mut sys = LinearSystem::new(us);
    sys.add_residual(&res.e0)?;
    Ok((sys, basis))
}

/// Joint system in the stage-1 constants `C_i` and the eps-part
/// coefficients `a_j`, in that column order.
pub fn build_determining_approx(
    problem: &OdeProblem,
    stage1: &[Generator],
    a1: &GeneratorAnsatz,
) -> Result<(LinearSystem, GeneratorBasis)> {
    let basis = a1.materialize()?;
    let cs = unknowns("C", stage1.len());
    let us = unknowns("a", basis.len());
    let ncomp = basis.components.len();
    let mut c0 = vec![NormalForm::zero(); ncomp];
    for (g, c) in stage1.iter().zip(&cs) {
        let comps = generator_components(g, 0);
        if comps.len() != ncomp {
            return Err(Error::ValidationError(
                "stage-1 generators and the correction ansatz have different kinds".into(),
            ));
        }
        for (acc, f) in c0.iter_mut().zip(&comps) {
            *acc = &*acc + &f.mul_symbol(c, 1);
        }
    }
    let c1 = basis.generic(&us);
    let g = basis.generator(c0, c1);
    let res = determining_residual(problem, &g)?;
    let mut all = cs;
    all.extend(us);
    let mut sys = LinearSystem::new(all);
    sys.add_residual(&res.e0)?;
    sys.add_residual(&res.e1)?;
    Ok((sys, basis))
}

/// Exact symmetries of the unperturbed equation within `ansatz`.
pub fn exact_symmetries(problem: &OdeProblem, ansatz: &GeneratorAnsatz) -> Result<SymmetryReport> {
    let (sys, basis) = build_determining_exact(problem, ansatz)?;
    let space = solve_linear(&sys)?;
    let generators: Vec<ClassifiedGenerator> = space
        .nullspace
        .iter()
        .map(|v| {
            let c0 = basis.components_of(v);
            let zeros = vec![NormalForm::zero(); c0.len()];
            ClassifiedGenerator {
                generator: basis.generator(c0, zeros),
                class: SymmetryClass::Exact,
            }
        })
        .collect();
    Ok(SymmetryReport {
        exact_basis: generators.iter().map(|g| g.generator.clone()).collect(),
        generators,
        stability: None,
        space,
        rows: sys.len(),
        basis,
    })
}

/// Two-stage approximate symmetries: exact basis from `a0`, then the joint
/// solve with eps-parts drawn from `a1`.
pub fn approx_symmetries(
    problem: &OdeProblem,
    a0: &GeneratorAnsatz,
    a1: &GeneratorAnsatz,
) -> Result<SymmetryReport> {
    let exact = exact_symmetries(problem, a0)?;
    approx_symmetries_with(problem, &exact.exact_basis, a1)
}

/// Approximate symmetries over a given exact basis of the unperturbed equation.
pub fn approx_symmetries_with(
    problem: &OdeProblem,
    stage1: &[Generator],
    a1: &GeneratorAnsatz,
) -> Result<SymmetryReport> {
    let (sys, basis) = build_determining_approx(problem, stage1, a1)?;
    let space = solve_linear(&sys)?;
    let m = stage1.len();
    let n = basis.len();

    let rows = rref(space.nullspace.clone());
    let (with_c, trivial): (Vec<_>, Vec<_>) = rows
        .into_iter()
        .partition(|r| r[..m].iter().any(|c| !c.is_zero()));
    let stability = Stability::from_stable(with_c.iter().map(|r| r[..m].to_vec()).collect(), m);

    let a_first: Vec<usize> = (m..m + n).chain(0..m).collect();
    let mut generators = Vec::new();
    for mut r in rref_with_order(with_c, Some(&a_first)) {
        let genuine = r[m..].iter().any(|c| !c.is_zero());
        if genuine {
            let lead = r[..m].iter().find(|c| !c.is_zero()).cloned().unwrap();
            let inv = Q::one() / lead;
            for v in r.iter_mut() {
                *v *= &inv;
            }
        }
        let class = if !genuine {
            if problem.is_perturbed() {
                SymmetryClass::InheritedExact
            } else {
                SymmetryClass::Exact
            }
        } else {
            SymmetryClass::GenuineApproximate
        };
        generators.push(ClassifiedGenerator {
            generator: assemble(stage1, &basis, &r, m),
            class,
        });
    }
    for r in trivial {
        generators.push(ClassifiedGenerator {
            generator: assemble(stage1, &basis, &r, m),
            class: SymmetryClass::Trivial,
        });
    }
    Ok(SymmetryReport {
        generators,
        exact_basis: stage1.to_vec(),
        stability: Some(stability),
        space,
        rows: sys.len(),
        basis,
    })
}

fn assemble(stage1: &[Generator], basis: &GeneratorBasis, v: &[Q], m: usize) -> Generator {
    let ncomp = basis.components.len();
    let mut c0 = vec![NormalForm::zero(); ncomp];
    for (g, c) in stage1.iter().zip(&v[..m]) {
        if c.is_zero() {
            continue;
        }
        for (acc, f) in c0.iter_mut().zip(generator_components(g, 0)) {
            acc.add_scaled(&f, c);
        }
    }
    basis.generator(c0, basis.components_of(&v[m..]))
}

/// Stability record re-expressed over another basis of the same exact space.
pub fn classify_stability(report: &SymmetryReport, exact_basis: &[Generator]) -> Result<Stability> {
    let stability = report
        .stability
        .as_ref()
        .ok_or_else(|| Error::ValidationError("report has no approximate stage".into()))?;
    let ncomp = report.basis.components.len();
    let mut stable = Vec::new();
    for v in &stability.stable {
        let mut c0 = vec![NormalForm::zero(); ncomp];
        for (g, c) in report.exact_basis.iter().zip(v) {
            for (acc, f) in c0.iter_mut().zip(generator_components(g, 0)) {
                acc.add_scaled(&f, c);
            }
        }
        let w = express(exact_basis, &c0)?.ok_or_else(|| {
            Error::ValidationError("stable direction is not in the span of the given basis".into())
        })?;
        stable.push(w);
    }
    Ok(Stability::from_stable(stable, exact_basis.len()))
}

/// Unknown symbols of a solved system, for diagnostics.
pub fn unknown_names(space: &SolutionSpace) -> Vec<String> {
    space
        .unknowns
        .iter()
        .map(|s| match s {
            Symbol::Param(p) => p.trim_start_matches('$').to_string(),
            other => other.to_string(),
        })
        .collect()
}
