//! Real fields on 𝕋² as truncated, Hermitian-symmetric Fourier series.

mod field;
mod multiplier;
pub mod snapshot;
pub mod transform;

pub use field::{PhaseState, SpectralField};
pub use multiplier::RadialMultiplier;
pub use transform::{
    cubic_product, dealiased_product, grid_len_for, lp_norm, sample_grid, smooth_len, GridValues,
};

use serde::{Deserialize, Serialize};

/// A lattice point `n ∈ ℤ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub n1: i64,
    pub n2: i64,
}

impl Mode {
    pub const ZERO: Mode = Mode { n1: 0, n2: 0 };

    pub const fn new(n1: i64, n2: i64) -> Self {
        Mode { n1, n2 }
    }

    pub fn norm_sq(self) -> f64 {
        (self.n1 * self.n1 + self.n2 * self.n2) as f64
    }

    pub fn sup_norm(self) -> i64 {
        self.n1.abs().max(self.n2.abs())
    }

    /// `⟨n⟩ = (1+|n|²)^{1/2}`.
    pub fn bracket(self) -> f64 {
        (1.0 + self.norm_sq()).sqrt()
    }

    /// `⟦n⟧ = (3/4+|n|²)^{1/2}`, the oscillation frequency of the damped propagator.
    pub fn shifted(self) -> f64 {
        (0.75 + self.norm_sq()).sqrt()
    }

    pub fn neg(self) -> Self {
        Mode::new(-self.n1, -self.n2)
    }

    /// Representative half of the lattice: `n1 > 0`, or `n1 = 0, n2 > 0`.
    pub fn is_positive_half(self) -> bool {
        self.n1 > 0 || (self.n1 == 0 && self.n2 > 0)
    }
}

/// Zero mode followed by the positive half-lattice of `|n|_∞ ≤ cutoff`, ordered
/// shell by shell. The list for a smaller cutoff is a prefix of the list for a
/// larger one, so random draws consumed in this order are nested across
/// truncations.
pub fn half_lattice(cutoff: usize) -> Vec<Mode> {
    let c = cutoff as i64;
    let mut out = Vec::with_capacity(((2 * cutoff + 1).pow(2) + 1) / 2);
    out.push(Mode::ZERO);
    for r in 1..=c {
        for n1 in -r..=r {
            for n2 in -r..=r {
                let m = Mode::new(n1, n2);
                if m.sup_norm() == r && m.is_positive_half() {
                    out.push(m);
                }
            }
        }
    }
    out
}
