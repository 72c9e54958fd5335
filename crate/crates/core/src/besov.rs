//! Littlewood–Paley blocks, Besov and Hölder norms, Bony paraproducts.
//!
//! Blocks are labelled by `N = 2^j`, `j ≥ 0`, with `N = 1` the base block.
//! `φ` is a `C^∞` bump equal to 1 on `[−5/4, 5/4]` and supported in
//! `[−8/5, 8/5]`; `φ_0(n) = φ(|n|)`, `φ_j(n) = φ(|n|/2^j) − φ(|n|/2^{j−1})`.

use serde::{Deserialize, Serialize};

use crate::spectral::{cubic_product, dealiased_product, lp_norm, smooth_len, Mode, PhaseState, RadialMultiplier, SpectralField};

const PLATEAU: f64 = 1.25;
const EDGE: f64 = 1.6;

fn glue(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step: 0 for `x ≤ 0`, 1 for `x ≥ 1`.
fn smooth_step(x: f64) -> f64 {
    let (a, b) = (glue(x), glue(1.0 - x));
    a / (a + b)
}

/// The bump `φ(r)`.
pub fn bump(r: f64) -> f64 {
    smooth_step((EDGE - r.abs()) / (EDGE - PLATEAU))
}

fn raw_block(j: u32, r: f64) -> f64 {
    if j == 0 {
        bump(r)
    } else {
        bump(r / f64::from(1u32 << j)) - bump(r / f64::from(1u32 << (j - 1)))
    }
}

/// Number of blocks needed to cover `|n|_∞ ≤ cutoff`.
pub fn block_count(cutoff: usize) -> u32 {
    let rmax = std::f64::consts::SQRT_2 * cutoff as f64;
    let mut j = 0;
    // block j vanishes for |n| ≤ (5/8)2^j
    while (5.0 / 8.0) * f64::from(1u32 << j) < rmax {
        j += 1;
    }
    j + 1
}

/// Normalized Littlewood–Paley symbol of block `j` (label `N = 2^j`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicSymbol {
    pub j: u32,
}

impl DyadicSymbol {
    pub fn new(j: u32) -> Self {
        DyadicSymbol { j }
    }

    pub fn label(&self) -> f64 {
        f64::from(1u32 << self.j)
    }

    pub fn value(&self, m: Mode) -> f64 {
        let r = m.norm_sq().sqrt();
        let mut total = 0.0;
        let mut l = 0;
        loop {
            total += raw_block(l, r);
            // all later blocks vanish once |n| ≤ (5/8)2^l
            if (5.0 / 8.0) * f64::from(1u32 << (l + 1)) >= r && l >= self.j {
                break;
            }
            l += 1;
        }
        raw_block(self.j, r) / total
    }
}

/// `P_N f` for `N = 2^j`.
pub fn lp_block(f: &SpectralField, j: u32) -> SpectralField {
    let sym = DyadicSymbol::new(j);
    f.map_weights(|m| sym.value(m))
}

/// All nonzero blocks of `f`, in order `j = 0, 1, …`.
pub fn lp_blocks(f: &SpectralField) -> Vec<SpectralField> {
    (0..block_count(f.cutoff())).map(|j| lp_block(f, j)).collect()
}

/// Default evaluation grid for Besov norms of a cutoff-`N` field: twice the
/// `4N + 2` grid, so grid maxima are close to true maxima.
pub fn default_grid(cutoff: usize) -> usize {
    smooth_len(2 * (4 * cutoff + 2))
}

fn aggregate(terms: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        terms.fold(0.0, f64::max)
    } else {
        terms.map(|t| t.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `‖f‖_{B^α_{p,q}} = ‖ N^α ‖P_N f‖_{L^p} ‖_{ℓ^q_N}`, block norms by
/// quadrature on an `len × len` grid.
pub fn besov_norm_on(f: &SpectralField, alpha: f64, p: f64, q: f64, len: usize) -> f64 {
    let blocks = lp_blocks(f);
    aggregate(
        blocks.iter().enumerate().map(|(j, b)| {
            if b.max_abs() == 0.0 {
                0.0
            } else {
                f64::from(1u32 << j).powf(alpha) * lp_norm(b, p, len)
            }
        }),
        q,
    )
}

pub fn besov_norm(f: &SpectralField, alpha: f64, p: f64, q: f64) -> f64 {
    besov_norm_on(f, alpha, p, q, default_grid(f.cutoff()))
}

/// `‖f‖_{C^α} = ‖f‖_{B^α_{∞,∞}}`.
pub fn holder_norm(f: &SpectralField, alpha: f64) -> f64 {
    besov_norm(f, alpha, f64::INFINITY, f64::INFINITY)
}

pub fn holder_norm_on(f: &SpectralField, alpha: f64, len: usize) -> f64 {
    besov_norm_on(f, alpha, f64::INFINITY, f64::INFINITY, len)
}

/// `‖(u, v)‖_{𝒞^α} = ‖u‖_{C^α} + ‖v‖_{C^{α−1}}`.
pub fn holder_norm_vec(x: &PhaseState, alpha: f64) -> f64 {
    holder_norm(&x.u, alpha) + holder_norm(&x.v, alpha - 1.0)
}

pub fn holder_norm_vec_on(x: &PhaseState, alpha: f64, len: usize) -> f64 {
    holder_norm_on(&x.u, alpha, len) + holder_norm_on(&x.v, alpha - 1.0, len)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Paraproduct {
    /// `f ⧏ g = Σ_{N < M/2} P_N f P_M g`
    LowHigh,
    /// `f ⊜ g = Σ_{M/2 ≤ N ≤ 2M} P_N f P_M g`
    Resonant,
    /// `f ⧐ g = Σ_{M < N/2} P_N f P_M g`
    HighLow,
}

/// One piece of Bony's decomposition of `f g`, band-limited to twice the
/// shared cutoff.
pub fn paraproduct(f: &SpectralField, g: &SpectralField, kind: Paraproduct) -> SpectralField {
    assert_eq!(f.cutoff(), g.cutoff(), "paraproduct needs a shared cutoff");
    let out = 2 * f.cutoff();
    let fb = lp_blocks(f);
    let gb = lp_blocks(g);
    let k = fb.len();
    let mut acc = SpectralField::zeros(out);
    for i in 0..k {
        for j in 0..k {
            let take = match kind {
                Paraproduct::LowHigh => i + 2 <= j,
                Paraproduct::Resonant => i.abs_diff(j) <= 1,
                Paraproduct::HighLow => j + 2 <= i,
            };
            if take && fb[i].max_abs() > 0.0 && gb[j].max_abs() > 0.0 {
                acc += &dealiased_product(&[&fb[i], &gb[j]], out);
            }
        }
    }
    acc
}

/// `⟨∇⟩^s(u³) − 3u²⟨∇⟩^s u`, exact on the `3N` band.
pub fn commutator_residual(u: &SpectralField, s: f64) -> SpectralField {
    let n3 = 3 * u.cutoff();
    let ds = RadialMultiplier::Bracket(s);
    let a = u.apply_multiplier(&ds).expect("finite symbol");
    let cube = cubic_product(u, u, u, n3).expect("shared cutoff");
    let mut out = cube.apply_multiplier(&ds).expect("finite symbol");
    out.axpy(-3.0, &cubic_product(u, u, &a, n3).expect("shared cutoff"));
    out
}

/// `‖commutator_residual(u, s)‖_{L²} / ‖u‖³_{C^{s−ε}}`.
pub fn commutator_ratio(u: &SpectralField, s: f64, eps: f64) -> f64 {
    commutator_residual(u, s).l2_norm() / holder_norm(u, s - eps).powi(3)
}
