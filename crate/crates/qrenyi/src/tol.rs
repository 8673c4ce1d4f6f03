//! Numerical tolerances used by validation throughout the crate.
//!
//! Constructors and operations validate against these; tests assert against
//! the same constants so the contract lives in one place.

/// Pure-state norm must match 1 to this absolute tolerance.
pub const NORM_TOL: f64 = 1e-12;

/// Max entrywise |M - M†| allowed when accepting a Hermitian matrix.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Density-matrix trace must match 1 to this absolute tolerance.
pub const TRACE_TOL: f64 = 1e-9;

/// Eigenvalues in [-EIGENVALUE_CLIP, 0) are clipped to 0; anything more
/// negative signals a non-PSD input and is an error.
pub const EIGENVALUE_CLIP: f64 = 1e-9;

/// Max entrywise |U†U - I| allowed when accepting a unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Weight vectors must sum to 1 to this absolute tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Entropy functions reject spectra whose sum deviates from 1 by more.
pub const SPECTRUM_SUM_TOL: f64 = 1e-6;

/// Numerical-rank cutoff for extracted spectra: computed eigenvalues in
/// (0, this) are eigensolver noise on structural zeros and are flattened to
/// exact 0. Without it, v^p amplifies 1e-16-level noise to 1e-4 for small p
/// and the spectral equivalence of the dense and Gram routes breaks down.
pub const SPECTRUM_ZERO_CLIP: f64 = 1e-12;

/// Renyi orders within this window of 1 are routed to the von Neumann
/// formula; 1/(1-p) is catastrophically ill-conditioned closer in.
pub const RENYI_VN_WINDOW: f64 = 1e-6;
