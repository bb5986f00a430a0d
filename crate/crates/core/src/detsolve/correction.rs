use super::ansatz::{combine, generic, unknowns, Ansatz};
use super::linsys::{solve_linear, LinearSystem, SolutionSpace};
use super::symmetries::determining_residual;
use crate::error::{Error, Result};
use crate::jet::{EvolGenerator, Generator, OdeProblem};
use crate::symexpr::{EpsSeries, NormalForm};

/// Solutions `zeta1` of the first-order deformation equation for a given
/// exact characteristic `zeta0`.
#[derive(Clone, Debug)]
pub struct Correction {
    pub zeta0: NormalForm,
    /// eps-coefficient of `-X0 Delta` on solutions.
    pub source: NormalForm,
    pub basis: Vec<NormalForm>,
    pub space: SolutionSpace,
}

impl Correction {
    pub fn particular(&self) -> NormalForm {
        combine(&self.basis, &self.space.particular)
    }

    pub fn nullspace(&self) -> Vec<NormalForm> {
        self.space
            .nullspace
            .iter()
            .map(|v| combine(&self.basis, v))
            .collect()
    }

    pub fn generator(&self) -> Generator {
        Generator::Evol(EvolGenerator::new(EpsSeries::new(
            self.zeta0.clone(),
            self.particular(),
        )))
    }

    /// Whether `zeta1` solves the deformation equation (within the ansatz).
    pub fn contains(&self, zeta1: &NormalForm) -> bool {
        match super::ansatz::coordinates(&self.basis, zeta1) {
            Some(v) => self.space.contains(&v),
            None => false,
        }
    }
}

pub fn higher_order_correction(problem: &OdeProblem, zeta0: &NormalForm, a1: &Ansatz) -> Result<Correction> {
    let g0 = Generator::Evol(EvolGenerator::exact(zeta0.clone()));
    let r0 = determining_residual(problem, &g0)?;
    if !r0.e0.is_zero() {
        return Err(Error::NotASymmetry);
    }
    let basis = a1.basis()?;
    let us = unknowns("a", basis.len());
    let g = Generator::Evol(EvolGenerator::new(EpsSeries::new(
        zeta0.clone(),
        generic(&basis, &us),
    )));
    let res = determining_residual(problem, &g)?;
    let mut sys = LinearSystem::new(us);
    sys.add_residual(&res.e1)?;
    let space = solve_linear(&sys)?;
    Ok(Correction {
        zeta0: zeta0.clone(),
        source: -&r0.e1,
        basis,
        space,
    })
}
