use thiserror::Error;

/// Errors reported by the simulation library.
///
/// Validation failures come from constructor and precondition checks;
/// the `Degenerate*` variants flag parameter points where a quantity is
/// numerically ill-defined rather than mis-specified.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("field amplitude gamma0 must be positive (got {0})")]
    NonPositiveGamma(f64),
    #[error("drive period must be positive (got {0})")]
    NonPositivePeriod(f64),
    #[error("evolution time must be non-negative (got {0})")]
    NegativeTime(f64),
    #[error("cycle count must be at least 1")]
    NoCycles,
    #[error("samples per cycle must be at least 1")]
    NoSamples,
    #[error("mode count must be an even number >= 2 (got {0})")]
    InvalidModeCount(usize),
    #[error("quadrature must supply at least 8 nodes (got {0})")]
    TooFewNodes(usize),
    #[error("site count must be even and within 2..=12 (got {0})")]
    InvalidSiteCount(usize),
    #[error("ground level is (near-)degenerate: gap = {gap:.3e}")]
    DegenerateGroundLevel { gap: f64 },
    #[error("curvature of omega_k at k = pi/2 is degenerate: |C| = {curvature:.3e}")]
    DegenerateCurvature { curvature: f64 },
    #[error("series has too few samples: need at least {min}, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("series is not stroboscopic (dt != drive period)")]
    NotStroboscopic,
    #[error("series sample spacing is not uniform or not positive")]
    NonUniformSampling,
    #[error("burn-in fraction must lie in [0, 1) (got {0})")]
    InvalidBurnIn(f64),
    #[error("found only {0} oscillation extrema; at least 10 are needed for an envelope fit")]
    TooFewExtrema(usize),
    #[error("scan grid must contain at least 2 points")]
    ScanGridTooSmall,
    #[error("malformed series file: {0}")]
    MalformedSeries(String),
}

impl Error {
    /// True for parameter points where a quantity is numerically
    /// ill-defined (as opposed to invalid input).
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::DegenerateGroundLevel { .. }
                | Error::DegenerateCurvature { .. }
                | Error::TooFewExtrema(_)
        )
    }
}
