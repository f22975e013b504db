//! Signal analysis of simulated responses: magnitude spectra, peak
//! extraction with parabolic refinement, long-time averages, envelope
//! decay fits and parameter scans.

use std::f64::consts::PI;
use std::io::BufRead;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::closed_form;
use crate::propagator;
use crate::quadrature::KGrid;
use crate::series::TimeSeries;
use crate::{DriveParams, Error, Result};

/// Taper applied before the DFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// Hann taper; default. The slow 1/√n amplitude drift leaks badly
    /// under a rectangular window.
    Hann,
    Rectangular,
}

impl Window {
    pub fn name(&self) -> &'static str {
        match self {
            Window::Hann => "hann",
            Window::Rectangular => "rectangular",
        }
    }

    fn coefficient(&self, i: usize, n: usize) -> f64 {
        match self {
            Window::Rectangular => 1.0,
            Window::Hann => 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos(),
        }
    }
}

/// One-sided magnitude spectrum on an angular-frequency axis with bin
/// spacing 2π/(n·dt). Magnitudes are raw |X_j| of the windowed,
/// mean-subtracted series.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub frequencies: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub window: Window,
}

pub fn dft_spectrum(series: &TimeSeries, window: Window) -> Result<Spectrum> {
    let n = series.len();
    if n < 64 {
        return Err(Error::TooFewSamples { min: 64, got: n });
    }
    if !series.dt.is_finite() || series.dt <= 0.0 {
        return Err(Error::NonUniformSampling);
    }
    let mean = series.values.iter().sum::<f64>() / n as f64;
    let mut buffer: Vec<Complex64> = series
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| Complex64::new((v - mean) * window.coefficient(i, n), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buffer);
    let bins = n / 2 + 1;
    let d_omega = 2.0 * PI / (n as f64 * series.dt);
    Ok(Spectrum {
        frequencies: (0..bins).map(|j| j as f64 * d_omega).collect(),
        magnitudes: buffer[..bins].iter().map(|z| z.norm()).collect(),
        window,
    })
}

/// A refined spectral peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub frequency: f64,
    pub magnitude: f64,
}

/// Local maxima of the spectrum, strongest first (ties broken towards
/// lower frequency), each refined by 3-point parabolic interpolation
/// around the peak bin. Returns fewer than `count` peaks if the
/// spectrum has fewer local maxima.
pub fn peak_frequencies(spectrum: &Spectrum, count: usize) -> Vec<Peak> {
    let m = &spectrum.magnitudes;
    if m.len() < 3 || count == 0 {
        return Vec::new();
    }
    let d_omega = if spectrum.frequencies.len() > 1 {
        spectrum.frequencies[1] - spectrum.frequencies[0]
    } else {
        return Vec::new();
    };
    let mut peaks: Vec<(usize, f64)> = Vec::new();
    for i in 1..m.len() - 1 {
        if m[i] > m[i - 1] && m[i] >= m[i + 1] {
            peaks.push((i, m[i]));
        }
    }
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    peaks
        .into_iter()
        .take(count)
        .map(|(i, _)| {
            let (lower, center, upper) = (m[i - 1], m[i], m[i + 1]);
            let denom = lower - 2.0 * center + upper;
            let shift = if denom.abs() < 1e-300 {
                0.0
            } else {
                (0.5 * (lower - upper) / denom).clamp(-0.5, 0.5)
            };
            Peak {
                frequency: (i as f64 + shift) * d_omega,
                magnitude: center - 0.25 * (lower - upper) * shift,
            }
        })
        .collect()
}

/// Arithmetic mean after discarding the first `burn_in_fraction` of the
/// samples; the finite-horizon estimator of the freezing factor Q.
pub fn long_time_average(series: &TimeSeries, burn_in_fraction: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&burn_in_fraction) {
        return Err(Error::InvalidBurnIn(burn_in_fraction));
    }
    if series.is_empty() {
        return Err(Error::TooFewSamples { min: 1, got: 0 });
    }
    let skip = (series.len() as f64 * burn_in_fraction).floor() as usize;
    let tail = &series.values[skip.min(series.len() - 1)..];
    Ok(tail.iter().sum::<f64>() / tail.len() as f64)
}

/// Result of the envelope-decay fit: |extrema| ≈ amplitude · n^exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub extrema_used: usize,
}

/// Cycles discarded before the envelope fit; the power-law form is a
/// long-time asymptote.
pub const ENVELOPE_BURN_IN: usize = 200;

/// Fits the decay exponent of the oscillation envelope of a
/// stroboscopic series: successive local extrema of the mean-subtracted
/// signal are regressed as log|extremum| against log n.
pub fn envelope_exponent(series: &TimeSeries) -> Result<EnvelopeFit> {
    if !series.stroboscopic {
        return Err(Error::NotStroboscopic);
    }
    if series.len() < 500 {
        return Err(Error::TooFewSamples {
            min: 500,
            got: series.len(),
        });
    }
    let start = ENVELOPE_BURN_IN.min(series.len() / 4);
    let tail = &series.values[start..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let mut log_n = Vec::new();
    let mut log_amp = Vec::new();
    for i in 1..tail.len() - 1 {
        let left = tail[i] - tail[i - 1];
        let right = tail[i + 1] - tail[i];
        if left * right < 0.0 {
            let amplitude = (tail[i] - mean).abs();
            if amplitude > 1e-13 {
                log_n.push(((start + i) as f64).ln());
                log_amp.push(amplitude.ln());
            }
        }
    }
    if log_n.len() < 10 {
        return Err(Error::TooFewExtrema(log_n.len()));
    }
    let (slope, intercept) = least_squares(&log_n, &log_amp);
    Ok(EnvelopeFit {
        exponent: slope,
        amplitude: intercept.exp(),
        extrema_used: log_n.len(),
    })
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mean_x) * (xi - mean_x);
        sxy += (xi - mean_x) * (yi - mean_y);
    }
    let slope = sxy / sxx;
    (slope, mean_y - slope * mean_x)
}

/// What a parameter scan measures at each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMetric {
    /// Freezing factor Q (closed form).
    QFactor,
    /// Slow solitary frequency ω_Q, angular (per unit time).
    OmegaQ,
    /// Slow period T_Q = 2π/ω_Q.
    TQ,
    /// Stroboscopic M_z after a fixed number of cycles.
    MzAfter { cycles: u64 },
}

/// Which drive parameter the scan sweeps; the other one stays fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanAxis {
    /// Sweep p = Γ₀T/π at fixed Γ₀.
    PulseRatio,
    /// Sweep the period T at fixed Γ₀.
    Period,
    /// Sweep Γ₀ at fixed T.
    Gamma0,
}

/// Optional slow-path cross-check: estimates the same metric from a
/// simulated stroboscopic series instead of the closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowEstimator {
    pub cycles: usize,
    pub burn_in_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub parameter: f64,
    pub value: Result<f64>,
    pub slow_value: Option<Result<f64>>,
}

/// Evaluates `metric` across `values` of the chosen axis. Failed points
/// are reported in place, never aborting the scan; output order is the
/// input grid order regardless of evaluation parallelism.
pub fn scan(
    gamma0: f64,
    period: f64,
    axis: ScanAxis,
    values: &[f64],
    metric: ScanMetric,
    grid: &KGrid,
    slow: Option<SlowEstimator>,
) -> Result<Vec<ScanPoint>> {
    if values.len() < 2 {
        return Err(Error::ScanGridTooSmall);
    }
    Ok(values
        .par_iter()
        .map(|&value| {
            let params = match axis {
                ScanAxis::PulseRatio => DriveParams::from_pulse_ratio(gamma0, value),
                ScanAxis::Period => DriveParams::new(gamma0, value),
                ScanAxis::Gamma0 => DriveParams::new(value, period),
            };
            match params {
                Err(e) => ScanPoint {
                    parameter: value,
                    value: Err(e),
                    slow_value: None,
                },
                Ok(params) => ScanPoint {
                    parameter: value,
                    value: fast_metric(&params, metric, grid),
                    slow_value: slow.map(|cfg| slow_metric(&params, metric, grid, cfg)),
                },
            }
        })
        .collect())
}

fn fast_metric(params: &DriveParams, metric: ScanMetric, grid: &KGrid) -> Result<f64> {
    match metric {
        ScanMetric::QFactor => Ok(closed_form::q_factor(params, grid)),
        ScanMetric::OmegaQ => Ok(closed_form::omega_q(params).angular),
        ScanMetric::TQ => {
            let wq = closed_form::omega_q(params).angular;
            if wq < 1e-300 {
                return Err(Error::DegenerateCurvature { curvature: wq });
            }
            Ok(2.0 * PI / wq)
        }
        ScanMetric::MzAfter { cycles } => Ok(closed_form::stroboscopic_mz(params, cycles, grid)),
    }
}

fn slow_metric(
    params: &DriveParams,
    metric: ScanMetric,
    grid: &KGrid,
    cfg: SlowEstimator,
) -> Result<f64> {
    match metric {
        ScanMetric::QFactor => {
            let series = propagator::time_series(params, cfg.cycles, 1, grid)?;
            long_time_average(&series, cfg.burn_in_fraction)
        }
        ScanMetric::OmegaQ => slow_peak(params, grid, cfg),
        ScanMetric::TQ => slow_peak(params, grid, cfg).map(|w| 2.0 * PI / w),
        ScanMetric::MzAfter { cycles } => {
            propagator::magnetization(params, cycles as f64 * params.period(), grid)
        }
    }
}

/// Strongest refined spectral peak of the simulated stroboscopic series
/// away from the DC pedestal.
fn slow_peak(params: &DriveParams, grid: &KGrid, cfg: SlowEstimator) -> Result<f64> {
    let series = propagator::time_series(params, cfg.cycles, 1, grid)?;
    let spectrum = dft_spectrum(&series, Window::Hann)?;
    let d_omega = spectrum.frequencies[1] - spectrum.frequencies[0];
    let floor = 4.0 * d_omega;
    peak_frequencies(&spectrum, 32)
        .into_iter()
        .find(|p| p.frequency > floor)
        .map(|p| p.frequency)
        .ok_or(Error::TooFewExtrema(0))
}

/// Parses a `t,<name>` CSV back into a series, enforcing uniform
/// sampling. This is the read half of the CLI's CSV contract.
pub fn read_series_csv<R: BufRead>(reader: R) -> Result<TimeSeries> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::MalformedSeries(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if idx == 0 {
            if !trimmed.starts_with('t') {
                return Err(Error::MalformedSeries(format!(
                    "expected header starting with 't', got '{trimmed}'"
                )));
            }
            continue;
        }
        let mut fields = trimmed.split(',');
        let (t, v) = match (fields.next(), fields.next()) {
            (Some(t), Some(v)) => (t, v),
            _ => {
                return Err(Error::MalformedSeries(format!(
                    "line {}: expected two comma-separated fields",
                    idx + 1
                )))
            }
        };
        let t: f64 = t
            .trim()
            .parse()
            .map_err(|_| Error::MalformedSeries(format!("line {}: bad time '{t}'", idx + 1)))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::MalformedSeries(format!("line {}: bad value '{v}'", idx + 1)))?;
        times.push(t);
        values.push(v);
    }
    if times.len() < 2 {
        return Err(Error::TooFewSamples {
            min: 2,
            got: times.len(),
        });
    }
    let dt = times[1] - times[0];
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::NonUniformSampling);
    }
    let scale = dt.abs().max(times[0].abs()).max(1e-300);
    for i in 1..times.len() {
        let implied = times[0] + i as f64 * dt;
        if (times[i] - implied).abs() > 1e-9 * scale.max(times[i].abs()) {
            return Err(Error::NonUniformSampling);
        }
    }
    TimeSeries::new(times[0], dt, values, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn synthetic_cosine(omega: f64, n: usize, dt: f64) -> TimeSeries {
        let values = (0..n).map(|i| (omega * i as f64 * dt).cos()).collect();
        TimeSeries::new(0.0, dt, values, false).unwrap()
    }

    #[test]
    fn dft_of_on_grid_cosine_is_a_single_bin() {
        // omega exactly on bin 16 of a 512-sample rectangular DFT.
        let n = 512;
        let dt = 0.05;
        let omega = 16.0 * 2.0 * PI / (n as f64 * dt);
        let series = synthetic_cosine(omega, n, dt);
        let spectrum = dft_spectrum(&series, Window::Rectangular).unwrap();
        let peak_bin = 16;
        let peak = spectrum.magnitudes[peak_bin];
        assert!((spectrum.frequencies[peak_bin] - omega).abs() < 1e-12);
        for (j, m) in spectrum.magnitudes.iter().enumerate() {
            if j != peak_bin {
                assert!(m / peak <= 1e-10, "leakage at bin {j}: {}", m / peak);
            }
        }
    }

    #[test]
    fn dft_of_constant_series_is_zero() {
        let series = TimeSeries::new(0.0, 0.1, vec![0.73; 128], false).unwrap();
        let spectrum = dft_spectrum(&series, Window::Hann).unwrap();
        assert!(spectrum.magnitudes.iter().all(|&m| m < 1e-12));
    }

    #[test]
    fn dft_rejects_short_or_invalid_series() {
        let series = TimeSeries::new(0.0, 0.1, vec![0.0; 63], false).unwrap();
        assert_eq!(
            dft_spectrum(&series, Window::Hann),
            Err(Error::TooFewSamples { min: 64, got: 63 })
        );
    }

    #[test]
    fn dft_satisfies_parseval() {
        let n = 1000;
        let values: Vec<f64> = (0..n)
            .map(|i| (0.37 * i as f64).sin() + 0.2 * (1.7 * i as f64).cos())
            .collect();
        let series = TimeSeries::new(0.0, 0.1, values.clone(), false).unwrap();
        for window in [Window::Rectangular, Window::Hann] {
            let spectrum = dft_spectrum(&series, window).unwrap();
            let mean = values.iter().sum::<f64>() / n as f64;
            let time_side: f64 = values
                .iter()
                .enumerate()
                .map(|(i, v)| ((v - mean) * window.coefficient(i, n)).powi(2))
                .sum();
            // One-sided restoration: interior bins count twice.
            let mut freq_side = spectrum.magnitudes[0].powi(2);
            for (j, m) in spectrum.magnitudes.iter().enumerate().skip(1) {
                let double = if n % 2 == 0 && j == spectrum.magnitudes.len() - 1 {
                    1.0
                } else {
                    2.0
                };
                freq_side += double * m * m;
            }
            freq_side /= n as f64;
            assert!(
                (time_side - freq_side).abs() <= 1e-10 * time_side.max(1.0),
                "{window:?}: {time_side} vs {freq_side}"
            );
        }
    }

    #[test]
    fn parabolic_refinement_recovers_off_grid_tone() {
        let n = 2048;
        let dt = 0.05;
        let bin = 2.0 * PI / (n as f64 * dt);
        let omega = 97.31 * bin;
        let series = synthetic_cosine(omega, n, dt);
        let spectrum = dft_spectrum(&series, Window::Hann).unwrap();
        let peaks = peak_frequencies(&spectrum, 1);
        assert_eq!(peaks.len(), 1);
        assert!(
            (peaks[0].frequency - omega).abs() < 0.2 * bin,
            "refined {} vs true {omega}",
            peaks[0].frequency
        );
    }

    #[test]
    fn equal_tones_tie_break_towards_lower_frequency() {
        // Hand-built spectrum with two bit-identical maxima.
        let n_bins = 64;
        let mut magnitudes = vec![0.0; n_bins];
        magnitudes[12] = 5.0;
        magnitudes[40] = 5.0;
        let d_omega = 0.25;
        let spectrum = Spectrum {
            frequencies: (0..n_bins).map(|j| j as f64 * d_omega).collect(),
            magnitudes,
            window: Window::Rectangular,
        };
        let peaks = peak_frequencies(&spectrum, 2);
        assert_eq!(peaks.len(), 2);
        assert!(peaks[0].frequency < peaks[1].frequency);
        assert_eq!(peaks[0].magnitude, peaks[1].magnitude);
    }

    #[test]
    fn well_separated_tones_are_both_found() {
        let n = 4096;
        let dt = 0.02;
        let bin = 2.0 * PI / (n as f64 * dt);
        let w1 = 100.0 * bin;
        let w2 = 400.0 * bin;
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 * dt;
                (w1 * t).cos() + 0.5 * (w2 * t).cos()
            })
            .collect();
        let series = TimeSeries::new(0.0, dt, values, false).unwrap();
        let spectrum = dft_spectrum(&series, Window::Rectangular).unwrap();
        let peaks = peak_frequencies(&spectrum, 2);
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0].frequency - w1).abs() < 0.2 * bin);
        assert!((peaks[1].frequency - w2).abs() < 0.2 * bin);
        assert!(peaks[0].magnitude > peaks[1].magnitude);
    }

    #[test]
    fn long_time_average_basics() {
        let constant = TimeSeries::new(0.0, 1.0, vec![0.42; 100], true).unwrap();
        assert!((long_time_average(&constant, 0.0).unwrap() - 0.42).abs() < 1e-12);
        assert!(long_time_average(&constant, 1.0).is_err());
        assert!(long_time_average(&constant, -0.1).is_err());

        // M0 + (a/sqrt(n)) cos(n w): mean converges to M0.
        let m0 = 0.687;
        let a = 1.06;
        let values: Vec<f64> = (1..=10_000)
            .map(|n| {
                let nf = n as f64;
                m0 + a / nf.sqrt() * (0.1815 * nf).cos()
            })
            .collect();
        let series = TimeSeries::new(0.0, 1.0, values, true).unwrap();
        let mean = long_time_average(&series, 0.0).unwrap();
        assert!((mean - m0).abs() < 0.1 * a, "mean = {mean}");
    }

    #[test]
    fn envelope_exponent_on_exact_power_laws() {
        for (p, expected) in [(0.5, -0.5), (1.0, -1.0)] {
            let values: Vec<f64> = (0..6000)
                .map(|i| {
                    let n = (i + 1) as f64;
                    0.3 + n.powf(-p) * (1.81 * n).cos()
                })
                .collect();
            let series = TimeSeries::new(0.0, 0.1, values, true).unwrap();
            let fit = envelope_exponent(&series).unwrap();
            assert!(
                (fit.exponent - expected).abs() < 0.02,
                "p={p}: got {}",
                fit.exponent
            );
        }
    }

    #[test]
    fn envelope_exponent_requires_stroboscopic_oscillation() {
        let flat = TimeSeries::new(0.0, 0.1, vec![1.0; 600], true).unwrap();
        assert!(matches!(
            envelope_exponent(&flat),
            Err(Error::TooFewExtrema(_))
        ));
        let not_strobe = TimeSeries::new(0.0, 0.1, vec![1.0; 600], false).unwrap();
        assert_eq!(envelope_exponent(&not_strobe), Err(Error::NotStroboscopic));
        let short = TimeSeries::new(0.0, 0.1, vec![1.0; 499], true).unwrap();
        assert!(matches!(
            envelope_exponent(&short),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn scan_reports_per_point_results_in_grid_order() {
        let grid = KGrid::discrete(128).unwrap();
        let values = [0.9, 1.0, 1.1, -0.5];
        let points = scan(
            20.0,
            0.1,
            ScanAxis::PulseRatio,
            &values,
            ScanMetric::QFactor,
            &grid,
            None,
        )
        .unwrap();
        assert_eq!(points.len(), 4);
        for (point, expected) in points.iter().zip(values) {
            assert_eq!(point.parameter, expected);
        }
        assert!(points[..3].iter().all(|p| p.value.is_ok()));
        // Invalid parameter point is marked, not fatal.
        assert!(points[3].value.is_err());
        // Q is maximal at p = 1 among the valid neighbors.
        let q = |i: usize| *points[i].value.as_ref().unwrap();
        assert!(q(1) > q(0) && q(1) > q(2));
    }

    #[test]
    fn scan_rejects_degenerate_grids() {
        let grid = KGrid::discrete(128).unwrap();
        assert_eq!(
            scan(
                20.0,
                0.1,
                ScanAxis::PulseRatio,
                &[1.0],
                ScanMetric::QFactor,
                &grid,
                None
            ),
            Err(Error::ScanGridTooSmall)
        );
    }

    #[test]
    fn scan_slow_path_tracks_fast_path_q() {
        let grid = KGrid::discrete(256).unwrap();
        let points = scan(
            20.0,
            0.1,
            ScanAxis::Period,
            &[0.1, 0.13],
            ScanMetric::QFactor,
            &grid,
            Some(SlowEstimator {
                cycles: 2000,
                burn_in_fraction: 0.0,
            }),
        )
        .unwrap();
        for p in points {
            let fast = p.value.unwrap();
            let slow = p.slow_value.unwrap().unwrap();
            assert!((fast - slow).abs() < 0.02, "fast {fast} slow {slow}");
        }
    }

    #[test]
    fn series_csv_round_trip_and_validation() {
        let csv = "t,mz\n0,1.0\n0.1,0.5\n0.2,0.25\n";
        let series = read_series_csv(Cursor::new(csv)).unwrap();
        assert_eq!(series.len(), 3);
        assert!((series.dt - 0.1).abs() < 1e-12);

        let bad_header = "x,y\n0,1\n1,2\n";
        assert!(matches!(
            read_series_csv(Cursor::new(bad_header)),
            Err(Error::MalformedSeries(_))
        ));

        let non_uniform = "t,mz\n0,1\n0.1,2\n0.3,3\n";
        assert_eq!(
            read_series_csv(Cursor::new(non_uniform)),
            Err(Error::NonUniformSampling)
        );

        let bad_value = "t,mz\n0,1\n0.1,zap\n";
        assert!(matches!(
            read_series_csv(Cursor::new(bad_value)),
            Err(Error::MalformedSeries(_))
        ));
    }
}
