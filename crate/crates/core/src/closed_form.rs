//! Analytic stroboscopic response of a driven mode.
//!
//! Starting every mode in its +Γ₀ ground state, the occupation after n
//! full cycles is exactly
//!
//! ```text
//! M_k(n) = A_k + R_k cos(2nω_k + δ_k)
//! ```
//!
//! with A_k = cos²θ₁ + g_k f_k, R_k² = g_k²[f_k² + sin²2θ₁ sin²μ₁ sin²ω_k],
//! f_k = sin 2θ₁ sin μ₁ cos ω_k + sin 2θ₂ sin μ₂ and
//! g_k = sin 2φ sin μ₂ / (2 sin²ω_k). Averaging the cosine away gives the
//! freezing factor Q = −1 + (2/π)∫ A_k dk, and the stationary point of
//! ω_k at k = π/2 leaves the slow solitary frequency ω_Q = 2ω_{π/2} with
//! a 1/√n amplitude envelope.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::mode_algebra::{mode_geometry, ModeGeometry};
use crate::propagator::SIN_OMEGA_EPS;
use crate::quadrature::KGrid;
use crate::series::TimeSeries;
use crate::{DriveParams, Error, Result};

/// Stroboscopic envelope of one mode: M_k(n) = a + r cos(2nω + δ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeEnvelope {
    pub a: f64,
    pub r: f64,
    pub delta: f64,
    pub omega: f64,
    /// f_k = sin 2θ₁ sin μ₁ cos ω + sin 2θ₂ sin μ₂.
    pub f: f64,
    /// g_k = sin 2φ sin μ₂ / (2 sin²ω); carries the sign of sin 2φ sin μ₂.
    pub g: f64,
}

/// ω_k from the analytic trace expression, independent of the matrix
/// construction in [`crate::propagator::cycle_map`].
///
/// Half-angle forms keep sin ω free of cancellation, so ω stays
/// accurate near the degenerate points cos ω → ±1 where a plain acos
/// would lose half the digits entering n·ω.
pub fn mode_omega(geom: &ModeGeometry) -> f64 {
    let cos2 = geom.phi.cos().powi(2);
    let sin2 = geom.phi.sin().powi(2);
    let sum = geom.mu1 + geom.mu2;
    let diff = geom.mu1 - geom.mu2;
    let cos_omega = sum.cos() * cos2 + diff.cos() * sin2;
    let one_minus = 2.0 * (cos2 * (0.5 * sum).sin().powi(2) + sin2 * (0.5 * diff).sin().powi(2));
    let one_plus = 2.0 * (cos2 * (0.5 * sum).cos().powi(2) + sin2 * (0.5 * diff).cos().powi(2));
    (one_minus * one_plus).max(0.0).sqrt().atan2(cos_omega)
}

pub(crate) fn envelope_from_geometry(geom: &ModeGeometry) -> ModeEnvelope {
    let omega = mode_omega(geom);
    let sin_omega = omega.sin();
    let cos_sq_theta1 = geom.theta1.cos().powi(2);
    if sin_omega < SIN_OMEGA_EPS {
        // The cycle map is ±1 up to O(sin omega): the mode is frozen at its
        // initial occupation on any reachable horizon (period > 1e8 cycles).
        let f = (2.0 * geom.theta1).sin() * geom.mu1.sin() * omega.cos()
            + (2.0 * geom.theta2).sin() * geom.mu2.sin();
        return ModeEnvelope {
            a: cos_sq_theta1,
            r: 0.0,
            delta: 0.0,
            omega,
            f,
            g: 0.0,
        };
    }
    let cos_omega = omega.cos();
    let g = (2.0 * geom.phi).sin() * geom.mu2.sin() / (2.0 * sin_omega * sin_omega);
    let f = (2.0 * geom.theta1).sin() * geom.mu1.sin() * cos_omega
        + (2.0 * geom.theta2).sin() * geom.mu2.sin();
    // Oscillatory quadrature component; the pair (−g f, g y) fixes the
    // phase so that n = 0 reproduces cos²θ₁ identically.
    let y = (2.0 * geom.theta1).sin() * geom.mu1.sin() * sin_omega;
    let a = cos_sq_theta1 + g * f;
    let r = g.abs() * f.hypot(y);
    let delta = if r == 0.0 { 0.0 } else { (g * y).atan2(-g * f) };
    ModeEnvelope {
        a,
        r,
        delta,
        omega,
        f,
        g,
    }
}

pub fn mode_envelope(params: &DriveParams, k: f64) -> ModeEnvelope {
    envelope_from_geometry(&mode_geometry(params, k))
}

/// Closed-form stroboscopic M_k(nT).
pub fn stroboscopic_mk(params: &DriveParams, k: f64, n: u64) -> f64 {
    let env = mode_envelope(params, k);
    env.a + env.r * (2.0 * n as f64 * env.omega + env.delta).cos()
}

/// Closed-form stroboscopic M_z(nT) on a quadrature grid.
pub fn stroboscopic_mz(params: &DriveParams, n: u64, grid: &KGrid) -> f64 {
    let nf = n as f64;
    let total: f64 = grid
        .nodes()
        .iter()
        .map(|node| {
            let env = mode_envelope(params, node.k);
            node.weight * (env.a + env.r * (2.0 * nf * env.omega + env.delta).cos())
        })
        .sum();
    -1.0 + total
}

/// Closed-form stroboscopic series M_z(nT) for n = 0..n_cycles, with the
/// envelopes computed once per mode.
pub fn stroboscopic_series(
    params: &DriveParams,
    n_cycles: usize,
    grid: &KGrid,
) -> crate::Result<TimeSeries> {
    if n_cycles < 1 {
        return Err(Error::NoCycles);
    }
    let envelopes: Vec<(f64, ModeEnvelope)> = grid
        .nodes()
        .iter()
        .map(|node| (node.weight, mode_envelope(params, node.k)))
        .collect();
    let values = (0..n_cycles)
        .map(|n| {
            let nf = n as f64;
            -1.0 + envelopes
                .iter()
                .map(|(w, env)| w * (env.a + env.r * (2.0 * nf * env.omega + env.delta).cos()))
                .sum::<f64>()
        })
        .collect();
    TimeSeries::new(0.0, params.period(), values, true)
}

/// Infinite-time average of the stroboscopic magnetization,
/// Q = −1 + (2/π)∫₀^π A_k dk.
pub fn q_factor(params: &DriveParams, grid: &KGrid) -> f64 {
    let total: f64 = grid
        .nodes()
        .iter()
        .map(|node| node.weight * mode_envelope(params, node.k).a)
        .sum();
    -1.0 + total
}

/// The slow solitary frequency ω_Q = 2ω_{π/2}, per cycle and per unit time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OmegaQ {
    pub per_cycle: f64,
    pub angular: f64,
}

pub fn omega_q(params: &DriveParams) -> OmegaQ {
    let geom = mode_geometry(params, FRAC_PI_2);
    let cos_omega = 1.0 - geom.phi.cos().powi(2) * (1.0 - (geom.mu1 + geom.mu2).cos());
    let per_cycle = 2.0 * cos_omega.clamp(-1.0, 1.0).acos();
    OmegaQ {
        per_cycle,
        angular: per_cycle / params.period(),
    }
}

/// Long-time form M_z(n) ≈ M₀ + (a/√n)·cos(nω_Q + δ_{π/2}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Asymptote {
    pub m0: f64,
    pub amplitude: f64,
    pub omega_q_per_cycle: f64,
    pub omega_q_angular: f64,
    pub delta_half_pi: f64,
    /// C = d²ω_k/dk² at k = π/2.
    pub curvature: f64,
}

/// Evaluates the asymptote at stroboscopic cycle n (n ≥ 1).
pub fn asymptote_mz(asymptote: &Asymptote, n: u64) -> f64 {
    let nf = n as f64;
    asymptote.m0
        + asymptote.amplitude / nf.sqrt()
            * (nf * asymptote.omega_q_per_cycle + asymptote.delta_half_pi).cos()
}

/// Symmetric 5-point second derivative of ω_k at k = π/2.
///
/// Mirror pairs are summed first so the stencil evaluates identically
/// under k → π − k.
fn curvature_stencil(params: &DriveParams, h: f64) -> f64 {
    let w = |k: f64| mode_omega(&mode_geometry(params, k));
    let outer = w(FRAC_PI_2 - 2.0 * h) + w(FRAC_PI_2 + 2.0 * h);
    let inner = w(FRAC_PI_2 - h) + w(FRAC_PI_2 + h);
    (-outer + 16.0 * inner - 30.0 * w(FRAC_PI_2)) / (12.0 * h * h)
}

pub fn asymptote(params: &DriveParams, grid: &KGrid) -> Result<Asymptote> {
    let h = 1e-4;
    let curvature = curvature_stencil(params, h);
    let refined = curvature_stencil(params, 0.5 * h);
    if curvature.abs() < 1e-8 {
        return Err(Error::DegenerateCurvature { curvature });
    }
    if (curvature - refined).abs() > 0.5 * curvature.abs() {
        // Step-halving disagrees: the stencil is dominated by noise.
        return Err(Error::DegenerateCurvature { curvature });
    }
    let env = mode_envelope(params, FRAC_PI_2);
    let wq = omega_q(params);
    Ok(Asymptote {
        m0: q_factor(params, grid),
        amplitude: env.r * (PI / (2.0 * curvature.abs())).sqrt(),
        omega_q_per_cycle: wq.per_cycle,
        omega_q_angular: wq.angular,
        delta_half_pi: env.delta,
        curvature,
    })
}

/// Per-mode Floquet data over a grid: the eigenphases of U_k are e^{±iω_k},
/// i.e. quasi-energies ±ω_k/T.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub k: f64,
    /// Per-cycle phase ω_k ∈ [0, π].
    pub omega: f64,
    /// Quasi-energy ω_k/T.
    pub quasi_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasienergySpectrum {
    pub points: Vec<SpectrumPoint>,
    /// max_k ω_k − min_k ω_k.
    pub spread: f64,
    /// Interior stationary points of ω_k detected on the grid (k, ω_k);
    /// diagnostics only. The k = π/2 point is always among them by
    /// reflection symmetry.
    pub stationary_points: Vec<(f64, f64)>,
}

pub fn quasienergy_spectrum(params: &DriveParams, grid: &KGrid) -> QuasienergySpectrum {
    let period = params.period();
    let points: Vec<SpectrumPoint> = grid
        .nodes()
        .iter()
        .map(|node| {
            let omega = mode_omega(&mode_geometry(params, node.k));
            SpectrumPoint {
                k: node.k,
                omega,
                quasi_energy: omega / period,
            }
        })
        .collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in &points {
        lo = lo.min(p.omega);
        hi = hi.max(p.omega);
    }
    let mut stationary_points = Vec::new();
    for i in 1..points.len().saturating_sub(1) {
        let left = points[i].omega - points[i - 1].omega;
        let right = points[i + 1].omega - points[i].omega;
        if left * right < 0.0 || (right == 0.0 && left != 0.0) {
            stationary_points.push((points[i].k, points[i].omega));
        }
    }
    let spread = if points.is_empty() { 0.0 } else { hi - lo };
    QuasienergySpectrum {
        points,
        spread,
        stationary_points,
    }
}
