use thiserror::Error;

/// Errors raised anywhere in the propagator, the analysis layer or the
/// integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("degenerate lattice: modular discriminant is zero (g2 = {g2}, g3 = {g3})")]
    DegenerateLattice { g2: f64, g3: f64 },
    #[error("argument {re}{im:+}i lies too close to a lattice point")]
    PoleProximity { re: f64, im: f64 },
    #[error("exponent overflow while evaluating sigma")]
    Overflow,
    #[error("q-series did not converge after {terms} terms")]
    SeriesNoConverge { terms: usize },
    #[error("shift lies outside the convergence strip (|beta| = {beta})")]
    OutsideStrip { beta: f64 },
    #[error("no convergence in {0}")]
    NoConvergence(&'static str),

    #[error("position lies on the polar axis; azimuth is undefined")]
    OnPolarAxis,
    #[error("invalid model: mu and eps must be finite and positive")]
    InvalidModel,
    #[error("invalid state: {0}")]
    InvalidState(&'static str),
    #[error("bidimensional configuration (p_phi = 0) is not supported")]
    OutOfScopeBidimensional,
    #[error("no reachable root for the {0} polynomial")]
    NoReachableRoot(&'static str),
    #[error("no inverse-wp candidate reproduces the initial {0} coordinate")]
    BranchSelectionFailure(&'static str),
    #[error("consistency check failed: {0}")]
    Inconsistent(String),
    #[error("degenerate coordinate: the {0} polynomial has a double root at the initial point")]
    Degenerate(&'static str),
    #[error("imaginary residue {residue:e} while assembling {quantity}")]
    ImaginaryResidue { quantity: &'static str, residue: f64 },
    #[error("orbit escapes before the requested time t = {t}")]
    EscapedBeforeT { t: f64 },

    #[error("orbit is not bound")]
    NotBound,
    #[error("orbit is not unbound")]
    NotUnbound,
    #[error("z = {z} is beyond the stationary equilibrium height {limit}")]
    BeyondEquilibriumLimit { z: f64, limit: f64 },
    #[error("search failed: best residual {residual:e} above threshold {threshold:e}")]
    SearchFailed { residual: f64, threshold: f64 },
    #[error("invalid search target: {0}")]
    InvalidTarget(&'static str),

    #[error("integrator exceeded {0} steps")]
    StepLimitExceeded(usize),
    #[error("step size underflow")]
    StepUnderflow,
    #[error("collision approach: |r| = {r} (floor {floor})")]
    CollisionApproach { r: f64, floor: f64 },
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(&'static str),
}

impl Error {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonFinite(_) => "non_finite",
            Error::DegenerateLattice { .. } => "degenerate_lattice",
            Error::PoleProximity { .. } => "pole_proximity",
            Error::Overflow => "overflow",
            Error::SeriesNoConverge { .. } => "series_no_converge",
            Error::OutsideStrip { .. } => "outside_strip",
            Error::NoConvergence(_) => "no_convergence",
            Error::OnPolarAxis => "on_polar_axis",
            Error::InvalidModel => "invalid_model",
            Error::InvalidState(_) => "invalid_state",
            Error::OutOfScopeBidimensional => "out_of_scope_bidimensional",
            Error::NoReachableRoot(_) => "no_reachable_root",
            Error::BranchSelectionFailure(_) => "branch_selection_failure",
            Error::Inconsistent(_) => "inconsistent",
            Error::Degenerate(_) => "degenerate",
            Error::ImaginaryResidue { .. } => "imaginary_residue",
            Error::EscapedBeforeT { .. } => "escaped_before_t",
            Error::NotBound => "not_bound",
            Error::NotUnbound => "not_unbound",
            Error::BeyondEquilibriumLimit { .. } => "beyond_equilibrium_limit",
            Error::SearchFailed { .. } => "search_failed",
            Error::InvalidTarget(_) => "invalid_target",
            Error::StepLimitExceeded(_) => "step_limit_exceeded",
            Error::StepUnderflow => "step_underflow",
            Error::CollisionApproach { .. } => "collision_approach",
            Error::InvalidConfig(_) => "invalid_config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
