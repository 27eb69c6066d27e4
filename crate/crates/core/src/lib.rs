//! Dual curvature measures built from Grassmannian section integrals, and solvers for the
//! associated Minkowski problems on polytopes.

pub mod error;
pub mod vecops;

mod clip;

pub mod convex;
pub mod fixtures;
pub mod functionals;
pub mod grassmann;
pub mod io;
pub mod solver;
pub mod spanning;
pub mod transforms;
pub mod verify;

pub use convex::{hausdorff_distance, Ball, HPolytope, StarBody, UnitVector};
pub use error::{Error, Result};
pub use functionals::{curvature_atoms, psi, Budgets, CurvatureAtoms};
pub use grassmann::{grassmann_rule, sphere_rule, QuadratureRule, Subspace};
pub use solver::{
    hemisphere_check, solve_discrete_lp, solve_general, solve_symmetric, subspace_concentration_check,
    uniqueness_probe, DiscreteMeasure, GeneralInput, SolveConfig, SolveReport, SolveStatus,
};
