use thiserror::Error;

/// Unified error type for the geometry and linking engines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point for this surface model: {0}")]
    InvalidPoint(String),

    #[error("tangent or point representation does not match the surface model")]
    RepresentationMismatch,

    #[error("chart is singular at this point: {0}")]
    ChartSingular(String),

    #[error("events lie on a common null geodesic ({count} connection(s) of length |dt|)")]
    CommonNullGeodesic { count: usize },

    #[error("identical events share every null geodesic; linking is undefined")]
    IdenticalEvents,

    #[error("plane is degenerate or not timelike: {0}")]
    NullPlane(String),

    #[error("resolved crossing frame is degenerate (|det| = {det:.3e})")]
    DegenerateResolution { det: f64 },

    #[error("tangency Hessian is degenerate (|h| = {hess:.3e})")]
    DegenerateTangency { hess: f64 },

    #[error("preimage root finding is ambiguous: {0}")]
    AmbiguousPreimage(String),

    #[error("preimage signs are mixed on a flat model ({negative} negative, {positive} positive)")]
    MixedPreimageSigns { negative: usize, positive: usize },

    #[error("curve is not generic with respect to the null cone: {0}")]
    NonGenericCurve(String),

    #[error("curve segment {index} is not timelike")]
    NotTimelike { index: usize },

    #[error("curve times must be strictly increasing (sample {index})")]
    NotFutureDirected { index: usize },

    #[error("curve passes through the cone vertex")]
    CurveThroughVertex,

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("fronts live on different time slices ({a} vs {b})")]
    SliceMismatch { a: f64, b: f64 },

    #[error("front is degenerate; tangency scan needs an immersed front")]
    DegenerateFront,

    #[error("regular-value perturbation failed: {0}")]
    PerturbationFailed(String),

    #[error("invalid manifold descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("non-orientable manifolds are not supported")]
    NonOrientable,

    #[error("simultaneous tangencies persist below the minimal step; scene is not generic")]
    SimultaneousTangencies,

    #[error("homotopy end state does not separate the fronts")]
    NotSeparated,

    #[error("scene does not fit a single chart: {0}")]
    ChartOverflow(String),

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
