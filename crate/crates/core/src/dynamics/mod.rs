//! Linear propagator, exact-in-law noise increments, and the truncated flow.

mod flow;
mod propagator;
mod reference;

pub use flow::{evolve, remainder_w, step_truncated, Flow, FlowConfig, Splitting};
pub use propagator::{propagate_linear, propagator_matrix, Damping, NoiseKernel, PropagatorCache};
pub use reference::{energy_rate_fd, rk4_reference};

use crate::spectral::{lp_norm, smooth_len, PhaseState, RadialMultiplier};

/// `‖(u, v)‖_{𝒲^{α,p}} = (‖⟨∇⟩^α u‖_{L^p}^p + ‖⟨∇⟩^{α−1} v‖_{L^p}^p)^{1/p}`,
/// by grid quadrature.
pub fn w_norm(x: &PhaseState, alpha: f64, p: f64) -> f64 {
    let len = smooth_len(4 * x.cutoff() + 2);
    let du = x
        .u
        .apply_multiplier(&RadialMultiplier::Bracket(alpha))
        .expect("finite symbol");
    let dv = x
        .v
        .apply_multiplier(&RadialMultiplier::Bracket(alpha - 1.0))
        .expect("finite symbol");
    let (a, b) = (lp_norm(&du, p, len), lp_norm(&dv, p, len));
    if p.is_infinite() {
        a.max(b)
    } else {
        (a.powf(p) + b.powf(p)).powf(1.0 / p)
    }
}

/// `max_{t ∈ grid} e^{t/8}‖S(t)x‖_{𝒲^{α,2/α}}`: a lower bound for the
/// `X^α` norm, which takes the sup over all `t ≥ 0`.
pub fn decaying_norm_x(x: &PhaseState, alpha: f64, t_grid: &[f64]) -> f64 {
    t_grid
        .iter()
        .map(|&t| {
            let y = propagate_linear(x, t, Damping::Damped);
            (t / 8.0).exp() * w_norm(&y, alpha, 2.0 / alpha)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests;
