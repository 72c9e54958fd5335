//! Fine-step RK4 integrator for the noise-free Galerkin system, used as an
//! independent reference for the splitting scheme.

use super::propagator::Damping;
use crate::spectral::{cubic_product, PhaseState, RadialMultiplier};

fn rhs(x: &PhaseState, cutoff: usize, cubic: bool, damping: Damping) -> PhaseState {
    let n = x.cutoff();
    let mut dv = x
        .u
        .apply_multiplier(&RadialMultiplier::Bracket(2.0))
        .expect("finite symbol")
        .scaled(-1.0);
    if damping == Damping::Damped {
        dv.axpy(-1.0, &x.v);
    }
    if cubic {
        let low = x.u.resized(cutoff);
        let cube = cubic_product(&low, &low, &low, cutoff).expect("shared cutoff");
        dv.axpy(-1.0, &cube.resized(n));
    }
    PhaseState {
        u: x.v.clone(),
        v: dv,
    }
}

/// Integrate `u̇ = v`, `v̇ = −(1−Δ)u − [v] − Π_{≤N}(Π_{≤N}u)³` over `[0, t]`
/// with `substeps` classical RK4 steps.
pub fn rk4_reference(
    x0: &PhaseState,
    cutoff: usize,
    t: f64,
    substeps: usize,
    cubic: bool,
    damping: Damping,
) -> PhaseState {
    let h = t / substeps.max(1) as f64;
    let mut x = x0.clone();
    for _ in 0..substeps.max(1) {
        let k1 = rhs(&x, cutoff, cubic, damping);
        let k2 = rhs(&(&x + &k1.scaled(0.5 * h)), cutoff, cubic, damping);
        let k3 = rhs(&(&x + &k2.scaled(0.5 * h)), cutoff, cubic, damping);
        let k4 = rhs(&(&x + &k3.scaled(h)), cutoff, cubic, damping);
        let mut incr = k1;
        incr.axpy(2.0, &k2);
        incr.axpy(2.0, &k3);
        incr.axpy(1.0, &k4);
        x.axpy(h / 6.0, &incr);
    }
    x
}

/// Central difference `(E(x(δ)) − E(x(−δ)))/2δ` of `E_{s,N}` along the
/// noise-free undamped flow, each side integrated with four RK4 substeps.
pub fn energy_rate_fd(x: &PhaseState, s: f64, cutoff: usize, delta: f64) -> crate::Result<f64> {
    let e = |t: f64| {
        let y = rk4_reference(x, cutoff, t, 4, true, Damping::Undamped);
        crate::functionals::energy(&y, s, cutoff).map(|r| r.energy)
    };
    Ok((e(delta)? - e(-delta)?) / (2.0 * delta))
}
