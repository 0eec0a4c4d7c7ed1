//! Numerical thresholds shared by the operators, the run-time monitors and
//! the invariant checks. All assume IEEE-754 double precision.

/// Relative round-trip error of forward followed by inverse transform.
pub const ROUND_TRIP: f64 = 1e-12;

/// Exact spectral identities (derivatives of trig fields, projection).
pub const SPECTRAL_EXACT: f64 = 1e-12;

/// Identities involving one solve or one extra quadratic product.
pub const SPECTRAL_SOLVE: f64 = 1e-11;

/// Largest admissible mean of a Poisson source.
pub const POISSON_MEAN: f64 = 1e-10;

/// Pressure recovery / Helmholtz decomposition residual.
pub const PRESSURE_RESIDUAL: f64 = 1e-10;

/// Divergence of freshly generated initial fields.
pub const INITIAL_DIVERGENCE: f64 = 1e-10;

/// Divergence of evolved fields.
pub const STATE_DIVERGENCE: f64 = 1e-8;

/// Divergence of an evolved F column above which the run warns.
pub const F_DIVERGENCE_WARN: f64 = 1e-6;

/// Precondition on inputs to the Kato inequality.
pub const KATO_DIVERGENCE: f64 = 1e-8;

/// Curl-of-advection identity on alias-free inputs.
pub const CURL_IDENTITY: f64 = 1e-10;

/// Commuting the curl with the evolution (pointwise right-hand sides).
pub const CURL_RHS: f64 = 1e-8;

/// Floor added to the CFL velocity scale so the equilibrium has finite dt.
pub const CFL_FLOOR: f64 = 1e-8;

/// Default halt threshold on the fraction of fluctuation energy in the top
/// third of the retained band.
pub const TAIL_HALT_DEFAULT: f64 = 1e-4;

/// Largest Sobolev index accepted by the norm routines.
pub const MAX_SOBOLEV_INDEX: u32 = 6;

/// Largest multi-index order accepted by the commutator.
pub const MAX_COMMUTATOR_ORDER: u32 = 3;
