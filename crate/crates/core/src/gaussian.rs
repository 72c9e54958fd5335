//! Samplers for the Gaussian measure `μ_s` with formal density
//! `exp(−½‖u‖²_{H^{1+s}} − ½‖v‖²_{H^s})`, truncated to `|n|_∞ ≤ N`.
//!
//! Coefficients are independent across the half-lattice and mirrored by
//! conjugation; for `n ≠ 0`, `E|û(n)|² = ⟨n⟩^{−2s−2}` split evenly between
//! real and imaginary parts, and the zero mode is a real Gaussian.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::RngStream;
use crate::spectral::{half_lattice, Mode, PhaseState, SpectralField};

/// Lanes of a sample stream used for the two components.
pub const LANE_U: u64 = 0;
pub const LANE_V: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub s: f64,
    pub cutoff: usize,
}

impl MeasureSpec {
    pub fn new(s: f64, cutoff: usize) -> Self {
        MeasureSpec { s, cutoff }
    }

    /// `E|û(n)|² = ⟨n⟩^{−2s−2}`.
    pub fn u_variance(&self, m: Mode) -> f64 {
        (1.0 + m.norm_sq()).powf(-self.s - 1.0)
    }

    /// `E|v̂(n)|² = ⟨n⟩^{−2s}`.
    pub fn v_variance(&self, m: Mode) -> f64 {
        (1.0 + m.norm_sq()).powf(-self.s)
    }
}

/// Fill `f` with independent Gaussian coefficients of variance `var(n)`,
/// consuming draws in half-lattice shell order.
pub(crate) fn fill_gaussian<R: Rng>(f: &mut SpectralField, rng: &mut R, var: impl Fn(Mode) -> f64) {
    for m in half_lattice(f.cutoff()) {
        let sd = var(m).sqrt();
        if m == Mode::ZERO {
            let g: f64 = rng.sample(StandardNormal);
            f.set_pair(m, Complex64::new(sd * g, 0.0));
        } else {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            let h = sd * std::f64::consts::FRAC_1_SQRT_2;
            f.set_pair(m, Complex64::new(h * a, h * b));
        }
    }
}

/// A draw of `(u, v) ~ μ_{s,N}`.
pub fn sample_mu(spec: &MeasureSpec, rng: &RngStream) -> PhaseState {
    let mut x = PhaseState::zeros(spec.cutoff);
    fill_gaussian(&mut x.u, &mut rng.lane(LANE_U), |m| spec.u_variance(m));
    fill_gaussian(&mut x.v, &mut rng.lane(LANE_V), |m| spec.v_variance(m));
    x
}

/// A draw of `u ~ μ_{s+1,N}`, per-mode variance `⟨n⟩^{−2(s+1)}`. Uses the same
/// lane as the `u` component of [`sample_mu`], so the two agree bitwise.
pub fn sample_mu_position(s_plus_one: f64, cutoff: usize, rng: &RngStream) -> SpectralField {
    let mut u = SpectralField::zeros(cutoff);
    fill_gaussian(&mut u, &mut rng.lane(LANE_U), |m| {
        (1.0 + m.norm_sq()).powf(-s_plus_one)
    });
    u
}

/// `(Π_{≤M} x, Π_{>M} x)`.
pub fn split_low_high(x: &PhaseState, m: i64) -> (PhaseState, PhaseState) {
    (x.project_square(m), x.project_above(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cutoff_is_standard_normal_pair() {
        let spec = MeasureSpec::new(1.3, 0);
        let n = 20_000;
        let (mut su, mut sv) = (0.0, 0.0);
        for i in 0..n {
            let x = sample_mu(&spec, &RngStream::new(5, i));
            assert_eq!(x.u.coeffs()[0].im, 0.0);
            su += x.u.mean().powi(2);
            sv += x.v.mean().powi(2);
        }
        let (vu, vv) = (su / n as f64, sv / n as f64);
        // SE of a variance estimate for N(0,1) is √(2/n) ≈ 0.01
        assert!((vu - 1.0).abs() < 0.04, "{vu}");
        assert!((vv - 1.0).abs() < 0.04, "{vv}");
    }

    #[test]
    fn position_sampler_shares_the_u_draws() {
        let spec = MeasureSpec::new(0.7, 6);
        let rng = RngStream::new(11, 42);
        let x = sample_mu(&spec, &rng);
        let u = sample_mu_position(1.7, 6, &rng);
        assert_eq!(x.u, u);
    }

    #[test]
    fn samples_are_nested_across_cutoffs() {
        let rng = RngStream::new(3, 9);
        let small = sample_mu(&MeasureSpec::new(1.0, 3), &rng);
        let large = sample_mu(&MeasureSpec::new(1.0, 8), &rng);
        assert_eq!(large.u.resized(3), small.u);
        assert_eq!(large.v.resized(3), small.v);
    }

    #[test]
    fn split_reconstructs() {
        let x = sample_mu(&MeasureSpec::new(1.0, 5), &RngStream::new(1, 2));
        let (lo, hi) = split_low_high(&x, 2);
        assert_eq!(&lo + &hi, x);
        let (all, none) = split_low_high(&x, 5);
        assert_eq!(all, x);
        assert_eq!(none, PhaseState::zeros(5));
        let (none, all) = split_low_high(&x, -1);
        assert_eq!(all, x);
        assert_eq!(none, PhaseState::zeros(5));
    }

    #[test]
    fn samples_are_hermitian() {
        let x = sample_mu(&MeasureSpec::new(0.5, 7), &RngStream::new(2, 2));
        assert!(x.u.is_hermitian(0.0));
        assert!(x.v.is_hermitian(0.0));
    }
}
