//! The affine linking number of two event skies, computed three independent
//! ways, plus the causal verdicts it supports.
//!
//! The counting engine finds cone-map preimages and their Jacobian signs,
//! the intersection engine counts signed crossings of the cone with a
//! timelike curve, and the homotopy engine tallies dangerous tangencies
//! along an explicit disentangling translation. All three agree integer for
//! integer; each returns an audit ledger whose entry signs sum to the raw
//! value.

mod causality;
mod counting;
mod group;
mod homotopy;
mod intersection;
mod roots;
mod signs;

pub use causality::{causality_from_alk, sighting_count, CausalityReport, LinkVerdict};
pub use counting::{AlkComputation, AlkEngine, CrossingMethod, Orientation, SignedCrossing};
pub use group::{
    coefficient_group, is_good, AlkValue, CoefficientGroup, DegreeImage, ManifoldDescriptor,
    Pi1Order,
};
pub use homotopy::{homotopy_scan, ChartScene, TranslationScript};
pub use intersection::TimelikeCurve;
pub use signs::{branch_gap_hessian, crossing_sign_frame, epsilon_of, tangency_sign};
