//! Numerical checks: fixed-step RK4, Lie flows, residual sweeps in eps and
//! comparison of approximate solutions against integration.

mod compare;
mod flow;
mod plot;
mod residual;
mod rk4;

pub use compare::{compare_solution, CompareReport};
pub use flow::{circle_level, lie_flow, perturbed_circle_flow, transform_curve, FlowMode, FlowResult, VectorField};
pub use plot::write_csv;
pub use residual::{fit_slope, symmetry_residual, ResidualReport, ResidualSampler};
pub use rk4::{ode_rhs, rk4, self_convergence_order, Trajectory};

/// Default integration step.
pub const DEFAULT_H: f64 = 1e-3;
