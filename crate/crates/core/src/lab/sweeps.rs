//! Sample generators for the regularity and convergence sweeps.

use serde::{Deserialize, Serialize};

use super::stats::mean_stderr;
use super::{noise_stream, sample_stream};
use crate::besov::{commutator_ratio, holder_norm_vec_on};
use crate::dynamics::{Flow, FlowConfig};
use crate::functionals::q_renorm;
use crate::gaussian::sample_mu_position;
use crate::parallel::map_collect;
use crate::spectral::{smooth_len, PhaseState};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StickConfig {
    pub s: f64,
    pub cutoff: usize,
    pub alpha: f64,
    pub horizon: f64,
    /// Observation spacing; the noise kernel is exact at any spacing.
    pub dt: f64,
    pub samples: u64,
    pub seed: u64,
    /// Hölder norms use a grid of `grid_factor·(4N + 2)` points per side.
    pub grid_factor: usize,
}

/// Per-sample `max_{t_k ≤ T} ‖Π_{≤N} Ψ_{t_k}(ξ)‖_{𝒞^α}` over the observation
/// grid `t_k = kδ`, where `Ψ` is the stochastic convolution started at 0.
pub fn stochastic_convolution_sup(cfg: &StickConfig) -> Result<Vec<f64>> {
    let flow = Flow::new(FlowConfig {
        cubic: false,
        ..FlowConfig::new(cfg.s, cfg.cutoff, cfg.dt, cfg.horizon)
    })?;
    let len = smooth_len(cfg.grid_factor.max(1) * (4 * cfg.cutoff + 2));
    map_collect(cfg.samples, |i| {
        let mut sup = 0.0f64;
        flow.evolve(
            &PhaseState::zeros(cfg.cutoff),
            &noise_stream(&sample_stream(cfg.seed, i)),
            |k, _, x| {
                if k > 0 {
                    sup = sup.max(holder_norm_vec_on(x, cfg.alpha, len));
                }
            },
        )?;
        Ok(sup)
    })
}

/// Per-sample `‖Q_{s,2M}(u) − Q_{s,M}(u)‖²_{H^{−σ}}` for `u ~ μ_{s+1}`
/// (drawn at cutoff `2M`; draws are nested, so this is the projection of
/// one infinite-dimensional sample).
pub fn q_difference_squares(s: f64, sigma: f64, m: usize, samples: u64, seed: u64) -> Result<Vec<f64>> {
    map_collect(samples, |i| {
        let u = sample_mu_position(s + 1.0, 2 * m, &sample_stream(seed, i));
        let fine = q_renorm(&u, s, 2 * m);
        let coarse = q_renorm(&u, s, m).resized(4 * m);
        Ok((&fine - &coarse).sobolev_norm(-sigma).powi(2))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommutatorRow {
    pub cutoff: usize,
    pub mean: f64,
    pub stderr: f64,
    pub max: f64,
    pub samples: u64,
}

/// `‖⟨∇⟩^s(u³) − 3u²⟨∇⟩^s u‖_{L²}/‖u‖³_{C^{s−ε}}` for `u ~ μ_{s+1,N}`.
pub fn commutator_sweep(s: f64, eps: f64, cutoffs: &[usize], samples: u64, seed: u64) -> Result<Vec<CommutatorRow>> {
    cutoffs
        .iter()
        .map(|&n| {
            let ratios = map_collect(samples, |i| {
                let u = sample_mu_position(s + 1.0, n, &sample_stream(seed, i));
                Ok(commutator_ratio(&u, s, eps))
            })?;
            let (mean, stderr) = mean_stderr(&ratios);
            Ok(CommutatorRow {
                cutoff: n,
                mean,
                stderr,
                max: ratios.iter().copied().fold(0.0, f64::max),
                samples,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stick_sup_is_positive_and_reproducible() {
        let cfg = StickConfig {
            s: 1.0,
            cutoff: 4,
            alpha: 0.5,
            horizon: 0.5,
            dt: 0.1,
            samples: 8,
            seed: 1,
            grid_factor: 1,
        };
        let a = stochastic_convolution_sup(&cfg).unwrap();
        assert!(a.iter().all(|&x| x > 0.0 && x.is_finite()));
        assert_eq!(a, stochastic_convolution_sup(&cfg).unwrap());
    }

    #[test]
    fn q_differences_shrink_on_average() {
        let a = q_difference_squares(1.0, 0.25, 8, 40, 3).unwrap();
        let b = q_difference_squares(1.0, 0.25, 32, 40, 3).unwrap();
        assert!(mean_stderr(&b).0 < mean_stderr(&a).0);
    }

    #[test]
    fn commutator_rows() {
        let rows = commutator_sweep(1.0, 0.2, &[4, 8], 4, 2).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.mean > 0.0 && r.max >= r.mean));
    }
}
