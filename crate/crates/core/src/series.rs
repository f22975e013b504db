//! Sampled time series of an observable.

use crate::{Error, Result};

/// Uniformly sampled real series, typically M_z(t).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    /// True when the sampling interval equals the drive period
    /// (one sample per cycle, t = nT).
    pub stroboscopic: bool,
}

impl TimeSeries {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>, stroboscopic: bool) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::NonUniformSampling);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedSeries("non-finite sample value".into()));
        }
        Ok(TimeSeries {
            t0,
            dt,
            values,
            stroboscopic,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sample time of index i.
    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }
}
