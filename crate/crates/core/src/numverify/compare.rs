use super::residual::fit_slope;
use super::rk4::{ode_rhs, rk4};
use crate::error::{Error, Result};
use crate::jet::OdeProblem;
use crate::symexpr::{Compiled, NormalForm, Symbol};

const IC_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub eps: Vec<f64>,
    /// Sup-norm of `approx - y_rk4` over the integration grid.
    pub errors: Vec<f64>,
    pub slope: f64,
    pub steps: usize,
}

/// Integrate `problem` for each eps from `ics` and measure how far the
/// closed-form `approx(x, eps)` strays from the numeric solution.
///
/// `ics` lists `y(x0), ..., y^(n-1)(x0)` as expressions in eps; when absent
/// they are read off `approx`.
pub fn compare_solution(
    problem: &OdeProblem,
    approx: &NormalForm,
    ics: Option<&[NormalForm]>,
    eps_grid: &[f64],
    xspan: (f64, f64),
    h: f64,
) -> Result<CompareReport> {
    let n = problem.order as usize;
    let slots = [Symbol::X, Symbol::Eps];
    let mut derivs = vec![approx.clone()];
    for k in 1..n {
        let d = derivs[k - 1].diff(&Symbol::X)?;
        derivs.push(d);
    }
    let derivs: Vec<Compiled> = derivs.iter().map(|d| Compiled::new(d, &slots)).collect::<Result<_>>()?;
    let ics: Option<Vec<Compiled>> = match ics {
        Some(v) if v.len() != n => {
            return Err(Error::ValidationError(format!("{} initial values for order {}", v.len(), n)))
        }
        Some(v) => Some(v.iter().map(|e| Compiled::new(e, &[Symbol::Eps])).collect::<Result<_>>()?),
        None => None,
    };
    let y = &derivs[0];
    let mut errors = Vec::with_capacity(eps_grid.len());
    let mut steps = 0;
    for &eps in eps_grid {
        let from_approx: Vec<f64> = derivs
            .iter()
            .map(|d| d.eval(&[xspan.0, eps]))
            .collect::<Result<_>>()?;
        let y0 = match &ics {
            Some(cs) => {
                let given: Vec<f64> = cs.iter().map(|c| c.eval(&[eps])).collect::<Result<_>>()?;
                for (k, (g, a)) in given.iter().zip(&from_approx).enumerate() {
                    if (g - a).abs() > IC_TOL {
                        return Err(Error::InconsistentICs(format!(
                            "derivative {} at eps = {}: given {}, solution has {}",
                            k, eps, g, a
                        )));
                    }
                }
                given
            }
            None => from_approx,
        };
        let traj = rk4(ode_rhs(problem, eps)?, &y0, xspan, h)?;
        steps = traj.len() - 1;
        let mut err: f64 = 0.0;
        for (x, s) in traj.xs.iter().zip(&traj.states) {
            err = err.max((y.eval(&[*x, eps])? - s[0]).abs());
        }
        errors.push(err);
    }
    Ok(CompareReport {
        eps: eps_grid.to_vec(),
        slope: fit_slope(eps_grid, &errors),
        errors,
        steps,
    })
}
