use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::gaussian::MeasureSpec;
use crate::spectral::{half_lattice, Mode, PhaseState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Damping {
    /// `∂ₜ²u + ∂ₜu + ⟨∇⟩²u = 0`, the physical linear part.
    Damped,
    /// `∂ₜ²u + ⟨∇⟩²u = 0`; only used to test Hamiltonian identities.
    Undamped,
}

/// Per-mode solution operator of the linear part, as a row-major 2×2 matrix
/// `[a, b, c, d]` acting on `(û(n), v̂(n))`.
///
/// Damped: `e^{−t/2}[cos(ωt) I + sin(ωt)/ω · (A + I/2)]` with generator
/// `A = [[0, 1], [−⟨n⟩², −1]]` and `ω = ⟦n⟧`.
pub fn propagator_matrix(norm_sq: f64, t: f64, damping: Damping) -> [f64; 4] {
    match damping {
        Damping::Damped => {
            let w = (0.75 + norm_sq).sqrt();
            let (sn, cs) = (w * t).sin_cos();
            let e = (-0.5 * t).exp();
            [
                e * (cs + 0.5 * sn / w),
                e * sn / w,
                -e * (w + 0.25 / w) * sn,
                e * (cs - 0.5 * sn / w),
            ]
        }
        Damping::Undamped => {
            let w = (1.0 + norm_sq).sqrt();
            let (sn, cs) = (w * t).sin_cos();
            [cs, sn / w, -w * sn, cs]
        }
    }
}

/// `S(t)` tabulated over every stored mode of a given cutoff.
#[derive(Debug, Clone)]
pub struct PropagatorCache {
    t: f64,
    cutoff: usize,
    damping: Damping,
    mats: Vec<[f64; 4]>,
}

impl PropagatorCache {
    pub fn new(t: f64, cutoff: usize, damping: Damping) -> Self {
        let side = 2 * cutoff as i64 + 1;
        let c = cutoff as i64;
        let mats = (0..side * side)
            .map(|i| {
                let m = Mode::new(i / side - c, i % side - c);
                propagator_matrix(m.norm_sq(), t, damping)
            })
            .collect();
        PropagatorCache {
            t,
            cutoff,
            damping,
            mats,
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn damping(&self) -> Damping {
        self.damping
    }

    pub fn matrix(&self, m: Mode) -> [f64; 4] {
        let side = 2 * self.cutoff as i64 + 1;
        let c = self.cutoff as i64;
        self.mats[((m.n1 + c) * side + m.n2 + c) as usize]
    }

    /// In-place `x ← S(t)x`; `x` must have this cache's cutoff.
    pub fn apply_in_place(&self, x: &mut PhaseState) {
        assert_eq!(x.cutoff(), self.cutoff, "propagator cutoff mismatch");
        let PhaseState { u, v } = x;
        for ((uc, vc), m) in u
            .coeffs_mut()
            .iter_mut()
            .zip(v.coeffs_mut().iter_mut())
            .zip(&self.mats)
        {
            let (a, b) = (*uc, *vc);
            *uc = a * m[0] + b * m[1];
            *vc = a * m[2] + b * m[3];
        }
    }

    pub fn apply(&self, x: &PhaseState) -> PhaseState {
        let mut y = x.resized(self.cutoff);
        self.apply_in_place(&mut y);
        y
    }
}

/// Exact linear propagation `S(t)x` for a single time.
pub fn propagate_linear(x: &PhaseState, t: f64, damping: Damping) -> PhaseState {
    PropagatorCache::new(t, x.cutoff(), damping).apply(x)
}

/// Lower-triangular factor `[l11, l21, l22]` of a 2×2 covariance.
type Factor = [f64; 3];

/// Covariance of the stochastic forcing accumulated over one step of length
/// `δ`, `Q_n(δ) = Σ_n − S_n(δ) Σ_n S_n(δ)ᵀ` with `Σ_n = diag(⟨n⟩^{−2s−2}, ⟨n⟩^{−2s})`.
///
/// This is the exact transition covariance of the per-mode Ornstein–Uhlenbeck
/// system, so `S(δ)x + η` with `x ~ μ_{s,N}` is again `μ_{s,N}`-distributed.
#[derive(Debug, Clone)]
pub struct NoiseKernel {
    delta: f64,
    cutoff: usize,
    modes: Vec<Mode>,
    covs: Vec<[f64; 3]>,
    factors: Vec<Factor>,
}

impl NoiseKernel {
    pub fn new(s: f64, delta: f64, cutoff: usize) -> Result<Self> {
        let spec = MeasureSpec::new(s, cutoff);
        let modes = half_lattice(cutoff);
        let mut covs = Vec::with_capacity(modes.len());
        let mut factors = Vec::with_capacity(modes.len());
        for &m in &modes {
            let su = spec.u_variance(m);
            let sv = spec.v_variance(m);
            let [a, b, c, d] = propagator_matrix(m.norm_sq(), delta, Damping::Damped);
            let q11 = su - (a * a * su + b * b * sv);
            let q12 = -(a * c * su + b * d * sv);
            let q22 = sv - (c * c * su + d * d * sv);
            covs.push([q11, q12, q22]);
            factors.push(factor(q11, q12, q22, su + sv).map_err(|eigenvalue| {
                Error::KernelFactorization {
                    n1: m.n1,
                    n2: m.n2,
                    eigenvalue,
                }
            })?);
        }
        Ok(NoiseKernel {
            delta,
            cutoff,
            modes,
            covs,
            factors,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// `(q11, q12, q22)` for mode `m`.
    pub fn covariance(&self, m: Mode) -> Option<[f64; 3]> {
        let m = if m.is_positive_half() || m == Mode::ZERO {
            m
        } else {
            m.neg()
        };
        self.modes.iter().position(|&x| x == m).map(|i| self.covs[i])
    }

    /// `x += sign · η` with `η` drawn mode by mode from `rng`.
    pub fn add_sample<R: Rng>(&self, x: &mut PhaseState, rng: &mut R, sign: f64) {
        assert!(x.cutoff() >= self.cutoff, "state cutoff below kernel cutoff");
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (&m, f) in self.modes.iter().zip(&self.factors) {
            if m == Mode::ZERO {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                let du = sign * f[0] * z1;
                let dv = sign * (f[1] * z1 + f[2] * z2);
                add_pair(&mut x.u, m, Complex64::new(du, 0.0));
                add_pair(&mut x.v, m, Complex64::new(dv, 0.0));
            } else {
                let z: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
                let du = Complex64::new(f[0] * z[0], f[0] * z[2]) * (sign * h);
                let dv = Complex64::new(f[1] * z[0] + f[2] * z[1], f[1] * z[2] + f[2] * z[3])
                    * (sign * h);
                add_pair(&mut x.u, m, du);
                add_pair(&mut x.v, m, dv);
            }
        }
    }

    /// A single increment at this kernel's cutoff.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> PhaseState {
        let mut x = PhaseState::zeros(self.cutoff);
        self.add_sample(&mut x, rng, 1.0);
        x
    }
}

fn add_pair(f: &mut crate::spectral::SpectralField, m: crate::spectral::Mode, c: Complex64) {
    let i = f.index(m);
    let j = f.index(m.neg());
    let coeffs = f.coeffs_mut();
    if i == j {
        coeffs[i] += c;
    } else {
        coeffs[i] += c;
        coeffs[j] += c.conj();
    }
}

/// Cholesky factor of a symmetric PSD 2×2 matrix, tolerating round-off.
/// Returns the offending (most negative) eigenvalue on failure.
fn factor(q11: f64, q12: f64, q22: f64, scale: f64) -> std::result::Result<Factor, f64> {
    let tol = 1e-13 * scale;
    let det = q11 * q22 - q12 * q12;
    let tr = q11 + q22;
    let disc = ((0.5 * (q11 - q22)).powi(2) + q12 * q12).sqrt();
    let lmin = 0.5 * tr - disc;
    if lmin < -tol || det < -tol * scale {
        return Err(lmin);
    }
    if q11 <= tol * 1e-6 {
        // Degenerate u-direction (δ ≈ 0); the v-variance carries everything.
        return Ok([0.0, 0.0, q22.max(0.0).sqrt()]);
    }
    let l11 = q11.sqrt();
    let l21 = q12 / l11;
    let l22 = (det.max(0.0) / q11).sqrt();
    Ok([l11, l21, l22])
}
