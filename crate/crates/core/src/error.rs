use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("contact angle {0} outside (0, π)")]
    InvalidAlpha(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("reference curve leaves the upper half plane near σ = {sigma:.4}")]
    AxisCrossing { sigma: f64 },
    #[error("metric J = {j:.3e} below positivity floor at node {node}")]
    DegenerateMetric { node: usize, j: f64 },
    #[error("⟨Ψq, RΨσ⟩ = {w:.3e} not positive at node {node}")]
    VanishingInnerProduct { node: usize, w: f64 },
    #[error("height {rho:.4e} outside tube half-width {d:.4e} at node {node}")]
    OutsideTube { node: usize, rho: f64, d: f64 },
    #[error("compatibility violated: ∂σρ = {slope:.3e} at endpoint {endpoint}")]
    Compatibility { endpoint: usize, slope: f64 },
    #[error("smallness bound exceeded (‖ρ‖/K₀ = {frac_rho:.3}, ‖∂σρ‖/K₁ = {frac_drho:.3}); reparametrize")]
    BoundViolation { frac_rho: f64, frac_drho: f64 },
    #[error("linear system singular at row {row}")]
    SingularSystem { row: usize },
    #[error("boundary coefficient b₂ vanishes at endpoint {endpoint}")]
    ZeroBoundaryCoefficient { endpoint: usize },
    #[error("Picard iteration did not converge in {iterations} iterations (last update {update:.3e})")]
    PicardDiverged { iterations: usize, update: f64 },
    #[error("time step underflow (dt = {dt:.3e})")]
    DtUnderflow { dt: f64 },
    #[error("reparametrization failed: {0}")]
    RefitFailed(String),
    #[error("explicit step dt = {dt:.3e} exceeds stability limit {limit:.3e}")]
    Stability { dt: f64, limit: f64 },
    #[error("ellipticity fails: a = {a}")]
    Ellipticity { a: f64 },
    #[error("trace undefined: s = {s} must exceed 1 − μ + 1/p = {threshold}")]
    TraceUndefined { s: f64, threshold: f64 },
    #[error("exponent relation violated by {residual:.3e}")]
    ExponentRelation { residual: f64 },
    #[error("signal has no samples")]
    EmptySignal,
    #[error("degenerate node spacing at node {node}")]
    DegenerateSpacing { node: usize },
    #[error("endpoint tangent deviates from the contact angle by {deviation:.3e}")]
    TangentPrecondition { deviation: f64 },
}

pub type Result<T> = std::result::Result<T, FlowError>;
