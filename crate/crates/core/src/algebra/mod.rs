//! Exact polynomial algebra: resultants, discriminants, real roots, curve
//! certification against the color-equation solver, and rank-one elimination.

pub mod curve;
pub mod mpoly;
pub mod poly;
pub mod walk;

pub use curve::{
    certification_points, compass_quartic, compass_sf_relation, rank_one_candidate, rank_one_eliminate,
    verify_curve, verify_curve_with, BivariatePolynomial, CertifiedCurve, SfInput, CURVE_TOL,
};
pub use mpoly::{bareiss_det, discriminant, resultant, MPoly};
pub use poly::{real_roots, RealRoot, UniPoly, UnivariateRationalFunction, ROOT_WIDTH};
pub use walk::{random_walk_recursion_check, RandomWalkReport};
