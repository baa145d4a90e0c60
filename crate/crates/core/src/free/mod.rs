//! The free model X_free: Lehner edge formula and the matrix Dyson equation.

mod lehner;
mod mde;

pub use lehner::{lehner_max, lehner_max_operator, lehner_min, lehner_objective, LehnerOptions, LehnerSolution};
pub use mde::{
    default_eta, default_threshold, free_density, free_density_with, free_moment, free_moment_quadrature, free_moments, free_support,
    free_support_with, mde_resolvent, support_edge_check, EdgeCheck, MdeOptions, MdeSolution, Resolvent,
};
