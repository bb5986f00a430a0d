use crate::error::{Error, Result};
use crate::jet::OdeProblem;
use crate::symexpr::{Compiled, Symbol};

/// States `(y, y', ..., y^(n-1))` on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub xs: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub h: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

fn axpy(y: &[f64], k: &[f64], s: f64) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + s * b).collect()
}

/// Classical four-stage Runge-Kutta from `xspan.0` to `xspan.1`.
///
/// The step is shrunk so that a whole number of steps lands exactly on the
/// end point; `xspan.1 < xspan.0` integrates backwards.
pub fn rk4<F>(mut f: F, y0: &[f64], xspan: (f64, f64), h: f64) -> Result<Trajectory>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::ValidationError(format!("step size {} is not positive", h)));
    }
    let (x0, x1) = xspan;
    let n = ((x1 - x0).abs() / h).ceil() as usize;
    let step = if n == 0 { 0.0 } else { (x1 - x0) / n as f64 };
    let mut xs = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut y = y0.to_vec();
    xs.push(x0);
    states.push(y.clone());
    for i in 0..n {
        let x = x0 + i as f64 * step;
        let k1 = f(x, &y)?;
        let k2 = f(x + step / 2.0, &axpy(&y, &k1, step / 2.0))?;
        let k3 = f(x + step / 2.0, &axpy(&y, &k2, step / 2.0))?;
        let k4 = f(x + step, &axpy(&y, &k3, step))?;
        for j in 0..y.len() {
            y[j] += step / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let xn = if i + 1 == n { x1 } else { x0 + (i + 1) as f64 * step };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState(xn));
        }
        xs.push(xn);
        states.push(y.clone());
    }
    Ok(Trajectory { xs, states, h: step.abs() })
}

/// First-order system for `problem` at a fixed numeric `eps`.
pub fn ode_rhs(problem: &OdeProblem, eps: f64) -> Result<impl Fn(f64, &[f64]) -> Result<Vec<f64>>> {
    let n = problem.order as usize;
    let mut slots = vec![Symbol::X];
    slots.extend((0..problem.order).map(Symbol::Jet));
    let f0 = Compiled::new(&problem.f0, &slots)?;
    let f1 = Compiled::new(&problem.f1, &slots)?;
    Ok(move |x: f64, y: &[f64]| {
        let mut vals = Vec::with_capacity(n + 1);
        vals.push(x);
        vals.extend_from_slice(y);
        let mut d = y[1..].to_vec();
        d.push(f0.eval(&vals)? + eps * f1.eval(&vals)?);
        Ok(d)
    })
}

/// Observed order from three runs at `h`, `h/2`, `h/4` (end-point values).
pub fn self_convergence_order<F>(f: F, y0: &[f64], xspan: (f64, f64), h: f64) -> Result<f64>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>> + Clone,
{
    let ends: Vec<Vec<f64>> = [h, h / 2.0, h / 4.0]
        .iter()
        .map(|&s| rk4(f.clone(), y0, xspan, s).map(|t| t.final_state().to_vec()))
        .collect::<Result<_>>()?;
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    Ok((dist(&ends[0], &ends[1]) / dist(&ends[1], &ends[2])).log2())
}
