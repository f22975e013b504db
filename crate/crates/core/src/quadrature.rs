//! Quadrature grids for the momentum integral (2/π)∫₀^π f(k) dk.
//!
//! The default grid is the physical one: a chain of N sites in the
//! even-parity sector has antiperiodic fermion momenta k = (2n+1)π/N,
//! and the magnetization sum −1 + (4/N)Σ_{k>0} M_k is exactly the
//! midpoint rule for the integral above. A mapped Gauss-Legendre rule
//! is available as an independent alternative.

use std::f64::consts::PI;

use crate::{Error, Result};

/// One quadrature node: Σ weight·f(k) ≈ (2/π)∫₀^π f(k) dk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KNode {
    pub k: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KGrid {
    /// k = (2n+1)π/modes for n = 0..modes/2, each with weight 4/modes.
    /// `modes` is the site count N of the equivalent finite chain.
    Discrete { modes: usize },
    /// Gauss-Legendre nodes mapped from [−1, 1] onto (0, π).
    GaussLegendre { nodes: usize },
}

impl KGrid {
    pub fn discrete(modes: usize) -> Result<Self> {
        if modes < 2 || !modes.is_multiple_of(2) {
            return Err(Error::InvalidModeCount(modes));
        }
        Ok(KGrid::Discrete { modes })
    }

    pub fn gauss_legendre(nodes: usize) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidModeCount(nodes));
        }
        Ok(KGrid::GaussLegendre { nodes })
    }

    pub fn node_count(&self) -> usize {
        match self {
            KGrid::Discrete { modes } => modes / 2,
            KGrid::GaussLegendre { nodes } => *nodes,
        }
    }

    pub fn nodes(&self) -> Vec<KNode> {
        match self {
            KGrid::Discrete { modes } => {
                let n = *modes;
                let weight = 4.0 / n as f64;
                (0..n / 2)
                    .map(|i| KNode {
                        k: (2 * i + 1) as f64 * PI / n as f64,
                        weight,
                    })
                    .collect()
            }
            KGrid::GaussLegendre { nodes } => gauss_legendre_rule(*nodes)
                .into_iter()
                // k = π(x+1)/2 carries dk = (π/2)dx, and the (2/π) prefactor
                // cancels it: the mapped weight is the raw Legendre weight.
                .map(|(x, w)| KNode {
                    k: 0.5 * PI * (x + 1.0),
                    weight: w,
                })
                .collect(),
        }
    }
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [−1, 1],
/// by Newton iteration on P_n with the three-term recurrence.
fn gauss_legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi-style initial guess, then Newton.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            derivative = dp;
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let weight = 2.0 / ((1.0 - x * x) * derivative * derivative);
        rule.push((x, weight));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for j in 2..=n {
        let jf = j as f64;
        let p_next = ((2.0 * jf - 1.0) * x * p - (jf - 1.0) * p_prev) / jf;
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}
