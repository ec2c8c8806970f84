//! Adaptive quadrature for thin-gap integrals and the closed forms for strictly convex gaps.

mod engine;
mod gap;

pub use engine::{gauss_legendre, integrate_adaptive, Adaptive, NeumaierSum};
pub use gap::{
    ball_volume, closed_form_convex_2d, closed_form_convex_3d, energy_leading, energy_leading_with, gap_integral,
    moment_integral, moment_integral_with, parity_vanish_check, q_leading, q_leading_with, ParityCheck,
};

use serde::Serialize;

/// Tolerances and work limit for gap integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-8, max_evals: 10_000_000 }
    }
}

/// Result of a gap integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub n_evals: usize,
    /// Number of dyadic rings above the rescaled core cell.
    pub ring_depth: usize,
}

impl QuadResult {
    pub fn scaled(self, c: f64) -> Self {
        Self { value: self.value * c, abs_error_estimate: self.abs_error_estimate * c.abs(), ..self }
    }
}
