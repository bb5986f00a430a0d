use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detsolve::determining_residual;
use crate::error::{Error, Result};
use crate::jet::{EvolGenerator, Generator, OdeProblem, PointGenerator};
use crate::symexpr::{Compiled, EpsSeries, NormalForm, Symbol};

/// Residuals below this are treated as exact zeros when fitting slopes.
const ZERO_TOL: f64 = 1e-11;
const POLE_MARGIN: f64 = 0.1;
const SAMPLE_RANGE: f64 = 2.0;
const MAX_TRIES_PER_SAMPLE: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub eps: Vec<f64>,
    pub max_residual: Vec<f64>,
    /// Least-squares slope of log residual against log eps; infinite when
    /// the residual vanishes to rounding at every eps.
    pub slope: f64,
    pub samples: usize,
    pub resampled: usize,
}

impl ResidualReport {
    pub fn passes(&self, min_slope: f64) -> bool {
        self.slope >= min_slope
    }
}

fn numeric_eps() -> Symbol {
    Symbol::param("eps#")
}

fn lift(s: &EpsSeries, e: &Symbol) -> EpsSeries {
    EpsSeries::exact(&s.e0 + &s.e1.mul_symbol(e, 1))
}

/// The on-solution determining expression with eps kept as an ordinary
/// parameter, so that nothing beyond first order is discarded.
fn full_residual(problem: &OdeProblem, g: &Generator) -> Result<NormalForm> {
    let e = numeric_eps();
    let mut p = problem.clone();
    p.f0 = &problem.f0 + &problem.f1.mul_symbol(&e, 1);
    p.f1 = NormalForm::zero();
    let g = match g {
        Generator::Point(pg) => Generator::Point(PointGenerator::new(lift(&pg.xi, &e), lift(&pg.eta, &e))),
        Generator::Evol(eg) => Generator::Evol(EvolGenerator::new(lift(&eg.zeta, &e))),
    };
    Ok(determining_residual(&p, &g)?.e0)
}

/// Fixed sample of jet points with the compiled residual of one generator.
pub struct ResidualSampler {
    residual: Compiled,
    pub slots: Vec<Symbol>,
    pub points: Vec<Vec<f64>>,
    pub resampled: usize,
}

impl ResidualSampler {
    pub fn new(problem: &OdeProblem, g: &Generator, samples: usize, seed: u64) -> Result<Self> {
        let res = full_residual(problem, g)?;
        let e = numeric_eps();
        let mut slots: Vec<Symbol> = res.symbols().into_iter().filter(|s| *s != e).collect();
        for s in &slots {
            if !matches!(s, Symbol::X | Symbol::Jet(_)) {
                return Err(Error::MissingSymbol(s.to_string()));
            }
        }
        let poles: Vec<usize> = slots
            .iter()
            .enumerate()
            .filter(|(_, s)| res.terms().any(|(t, _)| t.exponent(s) < 0))
            .map(|(i, _)| i)
            .collect();
        slots.push(e);
        let residual = Compiled::new(&res, &slots)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(samples);
        let mut resampled = 0;
        let n = slots.len() - 1;
        while points.len() < samples {
            if resampled > MAX_TRIES_PER_SAMPLE * samples.max(1) {
                return Err(Error::DomainError(format!(
                    "no admissible sample after {} attempts",
                    resampled
                )));
            }
            let mut p: Vec<f64> = (0..n).map(|_| rng.gen_range(-SAMPLE_RANGE..SAMPLE_RANGE)).collect();
            if poles.iter().any(|&i| p[i].abs() < POLE_MARGIN) {
                resampled += 1;
                continue;
            }
            p.push(0.0);
            match residual.eval(&p) {
                Ok(v) if v.is_finite() => {
                    p.pop();
                    points.push(p);
                }
                _ => resampled += 1,
            }
        }
        Ok(ResidualSampler {
            residual,
            slots,
            points,
            resampled,
        })
    }

    pub fn eval(&self, point: &[f64], eps: f64) -> Result<f64> {
        let mut v = point.to_vec();
        v.push(eps);
        self.residual.eval(&v)
    }

    /// Largest absolute residual over the sample at the given eps.
    pub fn max_residual(&self, eps: f64) -> Result<f64> {
        let mut m: f64 = 0.0;
        for p in &self.points {
            m = m.max(self.eval(p, eps)?.abs());
        }
        Ok(m)
    }
}

/// Log-log least-squares slope; infinite if every `y` is below rounding.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > ZERO_TOL)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Sample the on-solution residual of `g` for each eps and fit its order.
pub fn symmetry_residual(
    problem: &OdeProblem,
    g: &Generator,
    eps_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ResidualReport> {
    if eps_grid.len() < 3 || eps_grid.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::ValidationError(
            "residual sweep needs at least three positive eps values".into(),
        ));
    }
    let s = ResidualSampler::new(problem, g, samples, seed)?;
    let max_residual = eps_grid.iter().map(|&e| s.max_residual(e)).collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport {
        eps: eps_grid.to_vec(),
        slope: fit_slope(eps_grid, &max_residual),
        max_residual,
        samples,
        resampled: s.resampled,
    })
}
