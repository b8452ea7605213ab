//! Weighted Diophantine approximation at desk scale: exact arithmetic over
//! five number systems, exhaustive Dirichlet/Minkowski linear-form solvers,
//! the weighted Hausdorff-dimension engine, and an empirical lab for the
//! Khintchine–Groshev dichotomies.

pub mod approx;
pub mod dimension;
pub mod exact;
pub mod lab;
pub mod rings;
pub mod solver;
