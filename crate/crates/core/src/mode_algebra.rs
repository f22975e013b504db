//! Static diagonalization data of a single momentum mode.
//!
//! For a field Γ the mode Hamiltonian at momentum k has eigenvalues
//! ±λ(Γ,k) with
//!
//! ```text
//! λ(Γ,k) = 2 √(Γ² + 1 + 2Γ cos k)
//! ```
//!
//! and an eigenbasis mixing angle θ given by
//!
//! ```text
//! tan θ = −sin k / (Γ + cos k + √(Γ² + 1 + 2Γ cos k)).
//! ```
//!
//! Everything here is a pure function of (Γ₀, T, k); the drive enters
//! only through the half-cycle dynamical phases μ₁ = (T/2)λ(+Γ₀,k) and
//! μ₂ = (T/2)λ(−Γ₀,k), and the basis rotation angle φ = θ₁ − θ₂.

use std::f64::consts::FRAC_PI_2;

use crate::DriveParams;

/// λ(Γ, k) = 2√(Γ² + 1 + 2Γ cos k). Non-negative for all real Γ, k.
pub fn dispersion(gamma: f64, k: f64) -> f64 {
    let radicand = gamma * gamma + 1.0 + 2.0 * gamma * k.cos();
    // Tiny negative values can appear from cancellation at Γ = ±1, k = π or 0.
    2.0 * radicand.max(0.0).sqrt()
}

/// Principal-branch Bogoliubov angle θ(Γ, k).
///
/// The textbook form divides by Γ + cos k + λ/2, which cancels
/// catastrophically for Γ < 0, k → 0. There the algebraically
/// equivalent form tan θ = (Γ + cos k − λ/2)/sin k is used instead,
/// with the continuous limit −π/2 at sin k = 0.
pub fn bogoliubov_angle(gamma: f64, k: f64) -> f64 {
    let half_lambda = 0.5 * dispersion(gamma, k);
    let denominator = gamma + k.cos() + half_lambda;
    if denominator.abs() < 1e-8 * 2.0 * half_lambda {
        let sin_k = k.sin();
        if sin_k == 0.0 {
            return -FRAC_PI_2;
        }
        return ((gamma + k.cos() - half_lambda) / sin_k).atan();
    }
    (-k.sin() / denominator).atan()
}

/// Per-mode geometry of the driven problem: energies at ±Γ₀, both
/// Bogoliubov angles, the flip rotation φ = θ₁ − θ₂, and the half-cycle
/// phases μ₁, μ₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeGeometry {
    pub k: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub phi: f64,
    pub mu1: f64,
    pub mu2: f64,
}

pub fn mode_geometry(params: &DriveParams, k: f64) -> ModeGeometry {
    let gamma0 = params.gamma0();
    let lambda_plus = dispersion(gamma0, k);
    let lambda_minus = dispersion(-gamma0, k);
    let theta1 = bogoliubov_angle(gamma0, k);
    let theta2 = bogoliubov_angle(-gamma0, k);
    let half_t = params.half_period();
    ModeGeometry {
        k,
        lambda_plus,
        lambda_minus,
        theta1,
        theta2,
        phi: theta1 - theta2,
        mu1: half_t * lambda_plus,
        mu2: half_t * lambda_minus,
    }
}

/// Leading strong-field expansions:
/// φ ≈ −π/2 + sin k/Γ₀, μ₂ ≈ Γ₀T(1 − cos k/Γ₀) and
/// |U₁₂| ≈ |sin(Γ₀T)|·2 sin k/Γ₀.
///
/// The exact principal-branch φ comes out as +π/2 − sin k/Γ₀; the two
/// differ by an overall sign that drops out of every physical quantity
/// (only cos²φ and sin 2φ·sin μ₂ enter, and the latter flips together
/// with the θ₂ gauge).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeGammaExpansion {
    pub phi: f64,
    pub mu2: f64,
    pub u12_magnitude: f64,
}

pub fn large_gamma_expansion(params: &DriveParams, k: f64) -> LargeGammaExpansion {
    let gamma0 = params.gamma0();
    let gt = gamma0 * params.period();
    LargeGammaExpansion {
        phi: -FRAC_PI_2 + k.sin() / gamma0,
        mu2: gt * (1.0 - k.cos() / gamma0),
        u12_magnitude: (gt.sin() * 2.0 * k.sin() / gamma0).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn dispersion_known_values() {
        assert_eq!(dispersion(0.0, 0.3), 2.0);
        assert_eq!(dispersion(0.0, 2.9), 2.0);
        assert_eq!(dispersion(1.0, 0.0), 4.0);
        // 2 sqrt(401)
        assert!((dispersion(20.0, FRAC_PI_2) - 40.049_968_789_001_575).abs() < 1e-12);
    }

    #[test]
    fn dispersion_lower_bound_is_two_sin_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let gamma = rng.random_range(-40.0..40.0);
            let k = rng.random_range(0.0..PI);
            assert!(dispersion(gamma, k) >= 2.0 * k.sin() - 1e-12);
        }
    }

    #[test]
    fn dispersion_reflection_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let gamma = rng.random_range(-40.0..40.0);
            let k = rng.random_range(0.0..PI);
            let lhs = dispersion(gamma, PI - k);
            let rhs = dispersion(-gamma, k);
            assert!(
                (lhs - rhs).abs() < 1e-12 * lhs.max(1.0),
                "gamma={gamma} k={k}"
            );
        }
    }

    #[test]
    fn bogoliubov_known_values() {
        // Numerator vanishes, denominator positive.
        assert!(bogoliubov_angle(5.0, 1e-12).abs() < 1e-12);
        assert!((bogoliubov_angle(0.0, FRAC_PI_2) + FRAC_PI_4).abs() < 1e-15);
        let expected = (-1.0 / (20.0 + 401_f64.sqrt())).atan();
        assert!((bogoliubov_angle(20.0, FRAC_PI_2) - expected).abs() < 1e-15);
        assert!((expected + 0.024_979_197_861).abs() < 1e-9);
    }

    #[test]
    fn bogoliubov_range_for_non_negative_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..300 {
            let gamma = rng.random_range(0.0..40.0);
            let k = rng.random_range(1e-9..PI - 1e-9);
            let theta = bogoliubov_angle(gamma, k);
            assert!(
                theta <= 0.0 && theta > -FRAC_PI_2,
                "theta={theta} gamma={gamma} k={k}"
            );
        }
    }

    #[test]
    fn bogoliubov_zero_field_is_half_angle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let k = rng.random_range(1e-6..PI - 1e-6);
            assert!((bogoliubov_angle(0.0, k) + 0.5 * k).abs() < 1e-12);
        }
    }

    #[test]
    fn bogoliubov_negative_field_continuous_near_k_zero() {
        // The raw Eq. denominator is ~ sin^2 k / (2 gamma0) here; the guarded
        // branch must stay finite and approach -pi/2 smoothly.
        let mut previous = bogoliubov_angle(-20.0, 1e-4);
        assert!((previous + FRAC_PI_2).abs() < 1e-3);
        for i in 1..200 {
            let k = 1e-4 + i as f64 * 1e-6;
            let theta = bogoliubov_angle(-20.0, k);
            assert!(theta.is_finite());
            assert!((theta - previous).abs() < 1e-4);
            previous = theta;
        }
        assert_eq!(bogoliubov_angle(-20.0, 0.0), -FRAC_PI_2);
    }

    #[test]
    fn geometry_at_reference_point() {
        let params = DriveParams::new(20.0, 0.1).unwrap();
        let g = mode_geometry(&params, FRAC_PI_2);
        assert!((g.mu1 - 2.002_498_439_450_079).abs() < 1e-12);
        assert!((g.mu2 - 2.002_498_439_450_079).abs() < 1e-12);
        assert!((g.phi - 1.520_837_931_072_952).abs() < 1e-12);
        assert!((g.theta2 - (-40.024_984_394_5_f64).atan()).abs() < 1e-9);
    }

    #[test]
    fn geometry_at_freezing_period() {
        let params = DriveParams::new(20.0, PI / 20.0).unwrap();
        let g = mode_geometry(&params, FRAC_PI_2);
        let expected = PI * 401_f64.sqrt() / 20.0;
        assert!((g.mu1 - expected).abs() < 1e-12);
        assert!((g.mu2 - expected).abs() < 1e-12);
    }

    #[test]
    fn geometry_symmetric_at_band_center() {
        // cos(pi/2) = 0 makes +gamma and -gamma equivalent.
        let params = DriveParams::new(1.0, 1.0).unwrap();
        let g = mode_geometry(&params, FRAC_PI_2);
        let sqrt8 = 8.0_f64.sqrt();
        assert!((g.lambda_plus - sqrt8).abs() < 1e-15);
        assert!((g.lambda_minus - sqrt8).abs() < 1e-15);
        assert!((g.mu1 - 2.0_f64.sqrt()).abs() < 1e-15);
        assert!((g.mu2 - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn geometry_finite_on_fine_grid() {
        let params = DriveParams::new(20.0, 0.1).unwrap();
        for i in 0..2000 {
            let k = (i as f64 + 0.5) * PI / 2000.0;
            let g = mode_geometry(&params, k);
            for v in [
                g.lambda_plus,
                g.lambda_minus,
                g.theta1,
                g.theta2,
                g.phi,
                g.mu1,
                g.mu2,
            ] {
                assert!(v.is_finite(), "non-finite geometry field at k={k}");
            }
        }
    }

    #[test]
    fn expansion_vanishes_at_freezing_point() {
        let params = DriveParams::new(20.0, PI / 20.0).unwrap();
        let e = large_gamma_expansion(&params, FRAC_PI_2);
        // sin(gamma0 T) = sin(pi) up to rounding of pi/20 * 20.
        assert!(e.u12_magnitude < 1e-14);
    }

    #[test]
    fn expansion_reference_values() {
        let params = DriveParams::new(20.0, 0.1).unwrap();
        let e = large_gamma_expansion(&params, FRAC_PI_2);
        assert!((e.phi - (-FRAC_PI_2 + 0.05)).abs() < 1e-15);
        // Sign flip against the exact principal-branch phi; magnitudes agree
        // to the stated cubic order.
        let exact = mode_geometry(&params, FRAC_PI_2).phi;
        assert!((exact.abs() - e.phi.abs()).abs() < 1.0 / (20.0_f64.powi(3)));

        let params = DriveParams::new(100.0, 0.01).unwrap();
        let e = large_gamma_expansion(&params, FRAC_PI_4);
        let expected = 1.0_f64.sin() * 2.0 * FRAC_PI_4.sin() / 100.0;
        assert!((e.u12_magnitude - expected).abs() < 1e-15);
        assert!((e.u12_magnitude - 0.011_900_4).abs() < 1e-6);
    }

    #[test]
    fn expansion_orders_verified_by_ratio() {
        // phi error ~ 1/gamma0^3 and mu2 error ~ T/gamma0: doubling gamma0
        // at fixed T must shrink them by ~8x and ~2x respectively.
        let t = 0.02;
        let ks = [0.3, 1.0, FRAC_PI_2, 2.4];
        for &k in &ks {
            let mut phi_errs = Vec::new();
            let mut mu2_errs = Vec::new();
            for &gamma0 in &[50.0, 100.0, 200.0] {
                let params = DriveParams::new(gamma0, t).unwrap();
                let g = mode_geometry(&params, k);
                let e = large_gamma_expansion(&params, k);
                phi_errs.push((g.phi.abs() - e.phi.abs()).abs());
                mu2_errs.push((g.mu2 - e.mu2).abs());
            }
            assert!(
                phi_errs[1] < phi_errs[0] / 6.0,
                "phi order at k={k}: {phi_errs:?}"
            );
            assert!(
                phi_errs[2] < phi_errs[1] / 6.0,
                "phi order at k={k}: {phi_errs:?}"
            );
            assert!(
                mu2_errs[1] < mu2_errs[0] / 1.7,
                "mu2 order at k={k}: {mu2_errs:?}"
            );
            assert!(
                mu2_errs[2] < mu2_errs[1] / 1.7,
                "mu2 order at k={k}: {mu2_errs:?}"
            );
            // Constants stay O(1): err <= c/gamma0^3 resp. c*T/gamma0.
            assert!(phi_errs[0] < 4.0 / 50.0_f64.powi(3));
            assert!(mu2_errs[0] < 4.0 * t / 50.0);
        }
    }
}
