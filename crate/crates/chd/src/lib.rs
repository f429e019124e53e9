//! Convex-hull deviation in finite-dimensional normed spaces.
//!
//! The library computes the deviation h+(co D, D) of finite point sets,
//! estimates the CHD-constant of a space against its proved upper bounds,
//! checks the Schoenberg-type energy inequalities, and analyzes admissible
//! ball coverings through their nerve complexes and Z/2 homology. A `chd`
//! binary exposes every pipeline with seeded, reproducible reports.

pub mod cli;
pub mod deviation;
pub mod hull;
pub mod inequalities;
pub mod lp;
pub mod nerve;
pub mod space;

pub use deviation::{
    chd_estimate, deviation_lower, deviation_oracle, extremal_l1, extremal_linf,
    extremal_search, theoretical_bounds, xi_estimate, DeviationReport, PointConfig,
};
pub use hull::{dist_point_to_set, dist_to_hull, hull_membership, HullDistanceResult};
pub use inequalities::{
    check_ineq1, check_ineq2, check_ineq3, check_ineq4, energy_centered, energy_pairwise,
    fuzz_exponent, replay_case, InequalityMargin, WeightedFamily,
};
pub use nerve::{
    balls_intersect, betti_numbers, build_nerve, check_admissible, random_admissible,
    section_cover_check, verify_example_l1, BallSystem, NerveComplex,
};
pub use space::{
    dual_exponent, norm_of, norming_functional, polyhedral_approx, Exponent, Functional,
    NormSpec,
};
