use std::f64::consts::PI;

use crate::{Error, Result};

/// Square-wave drive protocol: Γ(t) = +Γ₀ on the first half of each
/// period and −Γ₀ on the second half, in units J = ħ = 1.
///
/// The dimensionless combination p = Γ₀T/π controls freezing (maximal
/// at integer p). It is always recomputed from `gamma0` and `period`,
/// never stored, so the three can never drift apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    gamma0: f64,
    period: f64,
}

impl DriveParams {
    pub fn new(gamma0: f64, period: f64) -> Result<Self> {
        if !gamma0.is_finite() || gamma0 <= 0.0 {
            return Err(Error::NonPositiveGamma(gamma0));
        }
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::NonPositivePeriod(period));
        }
        Ok(Self { gamma0, period })
    }

    /// Build from the dimensionless pulse ratio p = Γ₀T/π, i.e. T = pπ/Γ₀.
    pub fn from_pulse_ratio(gamma0: f64, p: f64) -> Result<Self> {
        if !gamma0.is_finite() || gamma0 <= 0.0 {
            return Err(Error::NonPositiveGamma(gamma0));
        }
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::NonPositivePeriod(p));
        }
        Self::new(gamma0, p * PI / gamma0)
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn half_period(&self) -> f64 {
        0.5 * self.period
    }

    /// p = Γ₀T/π, recomputed on every call.
    pub fn pulse_ratio(&self) -> f64 {
        self.gamma0 * self.period / PI
    }
}
