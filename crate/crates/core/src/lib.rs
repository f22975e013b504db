//! Coherent dynamics of a transverse-field Ising chain driven by a
//! square-wave field Γ(t) = ±Γ₀ with period T (units J = ħ = 1).
//!
//! After a Jordan-Wigner transformation the chain decouples into
//! independent two-level problems labelled by quasi-momentum
//! k = (2n+1)π/N, and a full drive cycle acts on each mode through a
//! 2×2 unitary. This crate builds that per-mode machinery and the
//! observables on top of it:
//!
//! - [`mode_algebra`]: dispersion, Bogoliubov angles, half-cycle phases.
//! - [`propagator`]: exact evolution via the one-cycle operator and its
//!   Chebyshev-recursion powers; transverse magnetization M_z(t).
//! - [`closed_form`]: analytic stroboscopic envelopes (A_k, R_k, δ_k, ω_k),
//!   the freezing factor Q, the slow frequency ω_Q and the 1/√n asymptote.
//! - [`oracle`]: brute-force 2^N state-vector evolution of the spin chain,
//!   used to validate the free-fermion pipeline at small N.
//! - [`analysis`]: spectra, peak extraction, long-time averages,
//!   envelope-decay fits and parameter scans.

pub mod analysis;
pub mod closed_form;
mod error;
pub mod mat2;
pub mod mode_algebra;
pub mod oracle;
mod params;
pub mod propagator;
pub mod quadrature;
pub mod series;

pub use error::Error;
pub use params::DriveParams;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
