use super::rk4::rk4;
use crate::error::{Error, Result};
use crate::jet::PointGenerator;
use crate::symexpr::{Compiled, EpsSeries, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowMode {
    /// Integrate `dz/da = xi0(z) + eps xi1(z)` with eps a fixed number.
    Exact,
    /// Integrate the first-order system for `z = f0 + eps f1` and return
    /// `f0 + eps f1`.
    Approximate,
}

/// Components `xi^i = xi0^i + eps xi1^i` over the coordinates `vars`.
#[derive(Clone, Debug)]
pub struct VectorField {
    pub vars: Vec<Symbol>,
    pub comps: Vec<EpsSeries>,
}

impl VectorField {
    pub fn new(vars: Vec<Symbol>, comps: Vec<EpsSeries>) -> Result<Self> {
        if vars.len() != comps.len() {
            return Err(Error::ValidationError(format!(
                "{} components for {} coordinates",
                comps.len(),
                vars.len()
            )));
        }
        Ok(VectorField { vars, comps })
    }

    /// `xi d/dx + eta d/dy` on the `(x, y)` plane.
    pub fn from_point(g: &PointGenerator) -> Self {
        VectorField {
            vars: vec![Symbol::X, Symbol::y()],
            comps: vec![g.xi.clone(), g.eta.clone()],
        }
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowResult {
    pub initial: Vec<f64>,
    pub a: f64,
    pub point: Vec<f64>,
    /// The eps^0 and eps^1 parts in approximate mode.
    pub parts: Option<(Vec<f64>, Vec<f64>)>,
    pub steps: usize,
}

struct Compiled2 {
    c0: Vec<Compiled>,
    c1: Vec<Compiled>,
}

fn compile(field: &VectorField) -> Result<Compiled2> {
    let c0 = field.comps.iter().map(|c| Compiled::new(&c.e0, &field.vars)).collect::<Result<_>>()?;
    let c1 = field.comps.iter().map(|c| Compiled::new(&c.e1, &field.vars)).collect::<Result<_>>()?;
    Ok(Compiled2 { c0, c1 })
}

fn eval_all(cs: &[Compiled], z: &[f64]) -> Result<Vec<f64>> {
    cs.iter().map(|c| c.eval(z)).collect()
}

/// Transport `p0` along the group generated by `field` to parameter `a`.
pub fn lie_flow(field: &VectorField, p0: &[f64], a: f64, eps: f64, mode: FlowMode, h: f64) -> Result<FlowResult> {
    let m = field.dim();
    if p0.len() != m {
        return Err(Error::ValidationError(format!("point has {} coordinates, expected {}", p0.len(), m)));
    }
    let c = compile(field)?;
    let done = |point: Vec<f64>, parts, steps| FlowResult {
        initial: p0.to_vec(),
        a,
        point,
        parts,
        steps,
    };
    match mode {
        FlowMode::Exact => {
            if a == 0.0 {
                return Ok(done(p0.to_vec(), None, 0));
            }
            let t = rk4(
                |_, z| {
                    let v0 = eval_all(&c.c0, z)?;
                    let v1 = eval_all(&c.c1, z)?;
                    Ok(v0.iter().zip(&v1).map(|(p, q)| p + eps * q).collect())
                },
                p0,
                (0.0, a),
                h,
            )?;
            let steps = t.len() - 1;
            Ok(done(t.final_state().to_vec(), None, steps))
        }
        FlowMode::Approximate => {
            if a == 0.0 {
                return Ok(done(p0.to_vec(), Some((p0.to_vec(), vec![0.0; m])), 0));
            }
            let jac: Vec<Vec<Compiled>> = field
                .comps
                .iter()
                .map(|comp| {
                    field
                        .vars
                        .iter()
                        .map(|v| Compiled::new(&comp.e0.diff(v)?, &field.vars))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            let mut start = p0.to_vec();
            start.extend(std::iter::repeat_n(0.0, m));
            let t = rk4(
                |_, s| {
                    let (f0, f1) = s.split_at(m);
                    let mut d = eval_all(&c.c0, f0)?;
                    let src = eval_all(&c.c1, f0)?;
                    for i in 0..m {
                        let mut acc = src[i];
                        for j in 0..m {
                            acc += jac[i][j].eval(f0)? * f1[j];
                        }
                        d.push(acc);
                    }
                    Ok(d)
                },
                &start,
                (0.0, a),
                h,
            )?;
            let end = t.final_state();
            let (f0, f1) = (end[..m].to_vec(), end[m..].to_vec());
            let point = f0.iter().zip(&f1).map(|(p, q)| p + eps * q).collect();
            Ok(done(point, Some((f0, f1)), t.len() - 1))
        }
    }
}

/// Apply a point map to every sample of a curve.
pub fn transform_curve<F>(curve: &[Vec<f64>], mut map: F) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    curve
        .iter()
        .map(|p| {
            let q = map(p)?;
            if q.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteState(p.first().copied().unwrap_or(f64::NAN)));
            }
            Ok(q)
        })
        .collect()
}

/// `r + eps e^(-k theta)`, constant on the perturbed circles.
pub fn circle_level(r: f64, theta: f64, k: f64, eps: f64) -> f64 {
    r + eps * (-k * theta).exp()
}

/// Closed-form flow of `eps k r e^(-k theta) d/dr + r d/dtheta`.
///
/// With `C = r + eps e^(-k theta)` the substitution `u = e^(k theta)` turns
/// the theta equation into `u' = k C u - k eps`, which gives
/// `theta* = ln((r e^(k theta + k C a) + eps) / C) / k` and `r* = C - eps e^(-k theta*)`.
pub fn perturbed_circle_flow(r: f64, theta: f64, a: f64, k: f64, eps: f64) -> (f64, f64) {
    if a == 0.0 {
        return (r, theta);
    }
    let c = circle_level(r, theta, k, eps);
    let g = r * (k * theta + k * c * a).exp();
    let theta_star = ((g + eps) / c).ln() / k;
    let r_star = c * g / (g + eps);
    (r_star, theta_star)
}
