//! Determining systems by undetermined coefficients, solved exactly over
//! the rationals.

mod algebraic;
mod ansatz;
mod correction;
mod integrals;
mod linsys;
mod symmetries;

pub use algebraic::{algebraic_completion, completion_residual, perturbation_split, split_symbols, CompletionMode};
pub use ansatz::{
    combine, coordinates, default_local, default_mu, default_phi, default_point, generator_components, generic,
    jet_args, unknowns, Ansatz, GeneratorAnsatz, GeneratorBasis,
};
pub use correction::{higher_order_correction, Correction};
pub use integrals::{
    approximate_invariant, first_integral, first_integral_residual, first_order_mu, integrating_factor, monic,
    SeriesSpace,
};
pub use linsys::{annihilator, in_span, rank, rref, rref_with_order, solve_linear, LinearSystem, SolutionSpace};
pub use symmetries::{
    approx_symmetries, approx_symmetries_with, build_determining_approx, build_determining_exact,
    classify_stability, determining_residual, exact_symmetries, express, unknown_names, ClassifiedGenerator,
    Stability, SymmetryClass, SymmetryReport,
};
