//! Exact time evolution of the driven modes.
//!
//! Within a half-cycle the field is static and each amplitude only
//! accumulates a phase e^{±iμ}. A field flip re-expresses the state on
//! the new instantaneous eigenbasis, a real rotation by φ = θ₁ − θ₂.
//! One full cycle is therefore
//!
//! ```text
//! U_k = R(φ) · diag(e^{iμ₂}, e^{−iμ₂}) · R(−φ) · diag(e^{iμ₁}, e^{−iμ₁})
//! ```
//!
//! with det U = 1 and a real trace, Tr U/2 = cos ω_k. Integer powers
//! follow from the Cayley-Hamilton recursion U^n = aₙ1 + bₙU with
//! bₙ = sin(nω)/sin ω (Chebyshev polynomials of the second kind) and
//! aₙ = −b_{n−1}, so evolving to any cycle count costs O(1).

use num_complex::Complex64;
use rayon::prelude::*;

use crate::mat2::Mat2;
use crate::mode_algebra::{mode_geometry, ModeGeometry};
use crate::quadrature::{KGrid, KNode};
use crate::series::TimeSeries;
use crate::{DriveParams, Error, Result};

/// Degeneracy threshold below which sin ω_k is treated as zero and the
/// Chebyshev coefficients are replaced by their analytic limits.
pub const SIN_OMEGA_EPS: f64 = 1e-8;

/// Minimum number of quadrature nodes accepted by the magnetization
/// integral.
pub const MIN_QUADRATURE_NODES: usize = 8;

/// Complex amplitudes on the instantaneous eigenbasis
/// {|(Γ,k)₋⟩, |(Γ,k)₊⟩}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub minus: Complex64,
    pub plus: Complex64,
}

impl Amplitudes {
    /// The per-mode ground state of the +Γ₀ Hamiltonian: (1, 0).
    pub fn ground() -> Self {
        Amplitudes {
            minus: Complex64::new(1.0, 0.0),
            plus: Complex64::new(0.0, 0.0),
        }
    }

    pub fn new(minus: Complex64, plus: Complex64) -> Self {
        Amplitudes { minus, plus }
    }

    pub fn norm_sq(&self) -> f64 {
        self.minus.norm_sqr() + self.plus.norm_sqr()
    }

    fn from_vec(v: [Complex64; 2]) -> Self {
        Amplitudes {
            minus: v[0],
            plus: v[1],
        }
    }

    fn to_vec(self) -> [Complex64; 2] {
        [self.minus, self.plus]
    }
}

/// Which half of the drive cycle a time instant falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfCycle {
    /// Γ = +Γ₀, eigenbasis angle θ₁.
    First,
    /// Γ = −Γ₀, eigenbasis angle θ₂.
    Second,
}

/// The one-cycle evolution operator of a mode and its invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleMap {
    pub matrix: Mat2,
    /// cos ω_k = Re(Tr U)/2.
    pub trace_half: f64,
    /// Principal value acos(trace_half) ∈ [0, π].
    pub omega: f64,
}

pub fn cycle_map(geom: &ModeGeometry) -> CycleMap {
    let matrix = Mat2::rotation(geom.phi)
        * Mat2::phase_diag(geom.mu2)
        * Mat2::rotation(-geom.phi)
        * Mat2::phase_diag(geom.mu1);
    let trace_half = 0.5 * matrix.trace().re;
    // acos(trace_half) loses ~1e-16/sin(omega) near the degenerate points;
    // sin(omega) is available without cancellation from the matrix itself
    // (sin^2 = Im(U11)^2 + |U12|^2 for a det-1 unitary with real trace), so
    // atan2 keeps omega fully conditioned for the n-cycle phases n*omega.
    let sin_omega = matrix.0[0][0].im.hypot(matrix.0[0][1].norm());
    CycleMap {
        matrix,
        trace_half,
        omega: sin_omega.atan2(trace_half),
    }
}

/// Chebyshev coefficients (aₙ, bₙ) with U^n = aₙ1 + bₙU.
///
/// When sin ω is below [`SIN_OMEGA_EPS`] the map is a phase times the
/// identity and the coefficients take their continuous limits
/// bₙ → ±n, aₙ → ∓(n−1) (upper signs for ω → 0, alternating for ω → π).
fn cheb_coefficients(map: &CycleMap, n: u64) -> (f64, f64) {
    let omega = map.omega;
    let sin_omega = omega.sin();
    let nf = n as f64;
    if sin_omega < SIN_OMEGA_EPS {
        if map.trace_half >= 0.0 {
            (-(nf - 1.0), nf)
        } else {
            // omega -> pi: b_n = (-1)^{n+1} n, a_n = -b_{n-1}.
            let sign = if n.is_multiple_of(2) { -1.0 } else { 1.0 };
            (sign * (nf - 1.0), sign * nf)
        }
    } else {
        let b_n = (nf * omega).sin() / sin_omega;
        let a_n = (nf * omega).cos() - b_n * map.trace_half;
        (a_n, b_n)
    }
}

/// U^n by the Chebyshev identity; exact for n = 0 (identity) and
/// n = 1 (U itself).
pub fn cheb_power(map: &CycleMap, n: u64) -> Mat2 {
    let (a_n, b_n) = cheb_coefficients(map, n);
    Mat2::identity()
        .scale(Complex64::new(a_n, 0.0))
        .add(&map.matrix.scale(Complex64::new(b_n, 0.0)))
}

/// Relative width (in cycles) within which a time is snapped onto the
/// nearest cycle or half-cycle boundary. The physical state is
/// continuous across boundaries, so snapping only fixes which basis the
/// amplitudes are reported in when t sits a rounding error away from a
/// flip.
const BOUNDARY_SNAP: f64 = 1e-9;

/// Splits t ≥ 0 into (complete cycles, half-cycle, residual time τ).
fn decompose_time(period: f64, t: f64) -> (u64, HalfCycle, f64) {
    let cycles = t / period;
    let mut n = cycles.floor();
    let mut frac = cycles - n;
    if frac >= 1.0 - BOUNDARY_SNAP {
        n += 1.0;
        frac = 0.0;
    }
    if (frac - 0.5).abs() < BOUNDARY_SNAP {
        (n as u64, HalfCycle::Second, 0.0)
    } else if frac < 0.5 {
        (n as u64, HalfCycle::First, frac * period)
    } else {
        (n as u64, HalfCycle::Second, (frac - 0.5) * period)
    }
}

/// The half-cycle containing time t (boundaries belong to the later half).
pub fn half_cycle_at(params: &DriveParams, t: f64) -> HalfCycle {
    decompose_time(params.period(), t).1
}

/// Evolves `initial` amplitudes (expressed on the +Γ₀ eigenbasis at
/// t = 0) to time t. The result lives on the instantaneous eigenbasis
/// of the half-cycle containing t; see [`half_cycle_at`].
pub fn evolve(params: &DriveParams, k: f64, initial: Amplitudes, t: f64) -> Result<Amplitudes> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    let geom = mode_geometry(params, k);
    let map = cycle_map(&geom);
    let (n, half, tau) = decompose_time(params.period(), t);
    let after_cycles = cheb_power(&map, n).mul_vec(initial.to_vec());
    Ok(Amplitudes::from_vec(intra_cycle(
        &geom,
        after_cycles,
        half,
        tau,
    )))
}

/// Applies the within-cycle factors to amplitudes taken at a cycle start.
fn intra_cycle(
    geom: &ModeGeometry,
    v: [Complex64; 2],
    half: HalfCycle,
    tau: f64,
) -> [Complex64; 2] {
    match half {
        HalfCycle::First => phase_vec(v, tau * geom.lambda_plus),
        HalfCycle::Second => {
            let at_flip = phase_vec(v, geom.mu1);
            let (s, c) = geom.phi.sin_cos();
            let rotated = [
                c * at_flip[0] + s * at_flip[1],
                -s * at_flip[0] + c * at_flip[1],
            ];
            phase_vec(rotated, tau * geom.lambda_minus)
        }
    }
}

fn phase_vec(v: [Complex64; 2], phase: f64) -> [Complex64; 2] {
    let w = Complex64::from_polar(1.0, phase);
    [v[0] * w, v[1] * w.conj()]
}

/// M_k = |x₋ cos θ_j + x₊ sin θ_j|², the per-mode occupation entering
/// the magnetization. θ_j is θ₁ during first half-cycles and θ₂ during
/// second half-cycles.
pub fn mode_magnetization(amps: &Amplitudes, theta_j: f64) -> f64 {
    let (s, c) = theta_j.sin_cos();
    (amps.minus * c + amps.plus * s).norm_sqr()
}

/// Per-mode evolution table reused across samples.
struct ModeTable {
    geoms: Vec<ModeGeometry>,
    maps: Vec<CycleMap>,
    weights: Vec<f64>,
}

impl ModeTable {
    fn build(params: &DriveParams, nodes: &[KNode]) -> Self {
        let geoms: Vec<_> = nodes.iter().map(|n| mode_geometry(params, n.k)).collect();
        let maps: Vec<_> = geoms.iter().map(cycle_map).collect();
        let weights = nodes.iter().map(|n| n.weight).collect();
        ModeTable {
            geoms,
            maps,
            weights,
        }
    }

    /// Weighted Σ w_k M_k at cycle n plus residual (half, τ), starting
    /// from the per-mode ground state. Summation order is fixed by the
    /// node order, independent of any outer parallelism.
    fn weighted_mk_sum(&self, n: u64, half: HalfCycle, tau: f64) -> f64 {
        let mut total = 0.0;
        for ((geom, map), weight) in self.geoms.iter().zip(&self.maps).zip(&self.weights) {
            let (a_n, b_n) = cheb_coefficients(map, n);
            let u = &map.matrix;
            let at_cycle = [Complex64::new(a_n, 0.0) + b_n * u.0[0][0], b_n * u.0[1][0]];
            let v = intra_cycle(geom, at_cycle, half, tau);
            let theta_j = match half {
                HalfCycle::First => geom.theta1,
                HalfCycle::Second => geom.theta2,
            };
            let (s, c) = theta_j.sin_cos();
            total += weight * (v[0] * c + v[1] * s).norm_sqr();
        }
        total
    }
}

/// Transverse magnetization M_z(t) = −1 + (2/π)∫₀^π M_k dk evaluated on
/// the given quadrature grid, starting from the global +Γ₀ ground state.
pub fn magnetization(params: &DriveParams, t: f64, grid: &KGrid) -> Result<f64> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::NegativeTime(t));
    }
    if grid.node_count() < MIN_QUADRATURE_NODES {
        return Err(Error::TooFewNodes(grid.node_count()));
    }
    let nodes = grid.nodes();
    let (n, half, tau) = decompose_time(params.period(), t);
    // Deterministic parallel reduction: fixed chunks, ordered combine.
    let chunk = 256;
    let partials: Vec<f64> = nodes
        .par_chunks(chunk)
        .map(|nodes| ModeTable::build(params, nodes).weighted_mk_sum(n, half, tau))
        .collect();
    Ok(-1.0 + partials.iter().sum::<f64>())
}

/// Uniformly sampled M_z on t ∈ [0, n_cycles·T), `samples_per_cycle`
/// points per cycle. One sample per cycle gives the stroboscopic
/// series M_z(nT).
pub fn time_series(
    params: &DriveParams,
    n_cycles: usize,
    samples_per_cycle: usize,
    grid: &KGrid,
) -> Result<TimeSeries> {
    if grid.node_count() < MIN_QUADRATURE_NODES {
        return Err(Error::TooFewNodes(grid.node_count()));
    }
    let values = series_on_nodes(params, n_cycles, samples_per_cycle, &grid.nodes())?;
    Ok(TimeSeries {
        t0: 0.0,
        dt: params.period() / samples_per_cycle as f64,
        values,
        stroboscopic: samples_per_cycle == 1,
    })
}

/// Series evaluation on an explicit node list, without the minimum-node
/// guard. The oracle comparison uses this to run the free-fermion
/// pipeline on the exact momentum grid of a small chain.
pub(crate) fn series_on_nodes(
    params: &DriveParams,
    n_cycles: usize,
    samples_per_cycle: usize,
    nodes: &[KNode],
) -> Result<Vec<f64>> {
    if n_cycles < 1 {
        return Err(Error::NoCycles);
    }
    if samples_per_cycle < 1 {
        return Err(Error::NoSamples);
    }
    let table = ModeTable::build(params, nodes);
    let period = params.period();
    let spc = samples_per_cycle;
    // Sample index i = n·spc + j; the (half, τ) split uses integer
    // arithmetic so cycle boundaries are never misclassified.
    let values: Vec<f64> = (0..n_cycles * spc)
        .into_par_iter()
        .map(|i| {
            let n = (i / spc) as u64;
            let j = i % spc;
            let tau_total = j as f64 * period / spc as f64;
            let (half, tau) = if 2 * j < spc {
                (HalfCycle::First, tau_total)
            } else {
                (HalfCycle::Second, tau_total - 0.5 * period)
            };
            -1.0 + table.weighted_mk_sum(n, half, tau)
        })
        .collect();
    Ok(values)
}
