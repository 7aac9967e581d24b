//! Central numeric policy.
//!
//! Every tolerance and discretization constant used by the engines lives in
//! one record so a scenario can override them in a single place instead of
//! hunting for magic numbers.

#[derive(Clone, Debug)]
pub struct NumericPolicy {
    /// Rays per cone and samples per front.
    pub n_samples: usize,
    /// Step length for Runge-Kutta geodesic integration.
    pub rk4_step: f64,
    /// Base tolerance for "geodesic length equals |dt|" tests; the value
    /// actually applied is `tol_null * (1 + |dt|)`.
    pub tol_null: f64,
    /// Maximum front diameter that counts as a refocusing event.
    pub tol_refocus: f64,
    /// Multiplier on the maximum adjacent sample spacing that defines the
    /// coincidence radius of tangency scans.
    pub tol_hit: f64,
    /// Extra ring of lattice cells enumerated beyond ceil(L / min period).
    pub lattice_margin: usize,
    /// Relative threshold below which a frame determinant is degenerate.
    pub tol_frame: f64,
    /// Threshold below which a tangency Hessian is degenerate.
    pub tol_hess: f64,
    /// Steps of the coarse parameter grid that brackets per-ray root finding.
    pub t_grid: usize,
    /// Convergence tolerance for polished preimage roots.
    pub root_tol: f64,
    /// Roots closer than this in (s, t) are treated as one; distinct roots
    /// inside the band are reported as ambiguous.
    pub merge_tol: f64,
    /// Chart displacement used by the regular-value perturbation device.
    pub perturb_delta: f64,
    /// Step for finite-difference Christoffel and curvature evaluation.
    pub fd_step: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        NumericPolicy {
            n_samples: 1024,
            rk4_step: 1e-3,
            tol_null: 1e-9,
            tol_refocus: 1e-3,
            tol_hit: 2.0,
            lattice_margin: 1,
            tol_frame: 1e-9,
            tol_hess: 1e-9,
            t_grid: 2048,
            root_tol: 1e-10,
            merge_tol: 1e-6,
            perturb_delta: 1e-3,
            fd_step: 1e-4,
        }
    }
}

impl NumericPolicy {
    /// Null-length tolerance scaled to the time separation under test.
    pub fn null_tolerance(&self, dt: f64) -> f64 {
        self.tol_null * (1.0 + dt.abs())
    }
}
