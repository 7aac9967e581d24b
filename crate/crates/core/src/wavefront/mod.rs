//! Discretized wave fronts on the spatial slice together with their conormal
//! lifts, fiber fronts, refocus detection, dangerous-tangency scanning, and
//! CSV/SVG export.

mod export;
mod front;
mod tangency;

pub use export::{front_to_csv, front_to_svg};
pub use front::{
    circle_front, fiber_front, propagate_front, propagate_front_with, refocus_detect,
    Coorientation, FiberFront, Front, FrontSample, Integrator,
};
pub use tangency::{front_tangency_scan, BranchFit, Tangency};
