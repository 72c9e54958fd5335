use serde::{Deserialize, Serialize};

use super::sample_stream;
use super::stats::{ess, log_mean_exp, mean_stderr, normalized_weights, EstimatorReport, ReportMeta};
use crate::functionals::{grad_r, r_potential};
use crate::gaussian::sample_mu_position;
use crate::parallel::map_collect;
use crate::spectral::{RadialMultiplier, SpectralField};
use crate::{Error, Result};

/// Potential `F` used in `E_μ[e^{−F}]` and the variational bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Potential {
    /// `R_{s,N}`.
    Renormalized,
    /// `F ≡ 0`.
    Zero,
    /// `F(u) = ½‖u‖²_{L²}`.
    Quadratic,
}

impl Potential {
    pub fn value(&self, u: &SpectralField, s: f64, n: usize) -> f64 {
        match self {
            Potential::Renormalized => r_potential(u, s, n),
            Potential::Zero => 0.0,
            Potential::Quadratic => 0.5 * u.resized(n).l2_norm().powi(2),
        }
    }

    pub fn gradient(&self, u: &SpectralField, s: f64, n: usize) -> SpectralField {
        match self {
            Potential::Renormalized => grad_r(u, s, n),
            Potential::Zero => SpectralField::zeros(n),
            Potential::Quadratic => u.resized(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionConfig {
    pub s: f64,
    pub cutoff: usize,
    pub samples: u64,
    pub seed: u64,
    pub potential: Potential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    /// `Ẑ` with its standard error.
    pub z: EstimatorReport,
    /// `log Ẑ` with its delta-method standard error.
    pub log_z: EstimatorReport,
    /// `E[F]`; `e^{−E[F]}` is the Jensen lower bound for `Z`.
    pub mean_potential: EstimatorReport,
    pub jensen_lower: f64,
    /// `Ẑ ≥ e^{−mean F} − 2 SE`.
    pub jensen_holds: bool,
}

/// Per-sample values of the potential at `u ~ μ_{s+1,N}`, in sample order.
pub fn potential_samples(cfg: &PartitionConfig) -> Result<Vec<f64>> {
    map_collect(cfg.samples, |i| {
        let u = sample_mu_position(cfg.s + 1.0, cfg.cutoff, &sample_stream(cfg.seed, i));
        let r = cfg.potential.value(&u, cfg.s, cfg.cutoff);
        if r.is_finite() {
            Ok(r)
        } else {
            Err(Error::BlowUp { step: 0, sample: Some(i) })
        }
    })
}

/// Plain Monte Carlo estimate of `Z_{s,N} = E_{μ}[e^{−R_{s,N}}]`.
pub fn partition_estimate(cfg: &PartitionConfig) -> Result<PartitionReport> {
    let rs = potential_samples(cfg)?;
    Ok(partition_from_samples(cfg, &rs))
}

pub fn partition_from_samples(cfg: &PartitionConfig, rs: &[f64]) -> PartitionReport {
    let meta = ReportMeta {
        s: cfg.s,
        cutoff: cfg.cutoff,
        seed: cfg.seed,
        ..Default::default()
    };
    let n = rs.len() as u64;
    let neg: Vec<f64> = rs.iter().map(|r| -r).collect();
    let (log_z, log_se) = log_mean_exp(&neg);
    let z = log_z.exp();
    let (mean_r, se_r) = mean_stderr(rs);
    let jensen_lower = (-mean_r).exp();
    let z_se = z * log_se;
    // Effective size of the weights e^{−R}: how many samples carry Ẑ.
    let e = ess(&normalized_weights(&neg));
    PartitionReport {
        z: EstimatorReport::new("Z", z, z_se, n, e, meta),
        log_z: EstimatorReport::new("log_Z", log_z, log_se, n, e, meta),
        mean_potential: EstimatorReport::new("mean_R", mean_r, se_r, n, n as f64, meta),
        jensen_lower,
        jensen_holds: z >= jensen_lower - 2.0 * z_se,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BdConfig {
    pub s: f64,
    pub cutoff: usize,
    pub samples: u64,
    pub ascent_steps: u32,
    /// Initial step of the preconditioned ascent (backtracked as needed).
    pub step_size: f64,
    pub seed: u64,
    pub potential: Potential,
    /// Abort when the inner objective exceeds this value.
    pub ceiling: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdReport {
    /// `E[sup_Θ {−F(Y + Θ) − ½‖Θ‖²_{H^{1+s}}}]` as reached by the ascent.
    pub bound: EstimatorReport,
    /// `−E[F(Y)]`, the value at `Θ = 0`.
    pub start: EstimatorReport,
    pub per_sample: Vec<f64>,
}

fn penalty(theta: &SpectralField, s: f64) -> f64 {
    0.5 * theta.sobolev_norm(1.0 + s).powi(2)
}

fn objective(pot: Potential, y: &SpectralField, theta: &SpectralField, s: f64, n: usize) -> f64 {
    -pot.value(&(y + theta), s, n) - penalty(theta, s)
}

/// Maximize `Θ ↦ −F(Y + Θ) − ½‖Θ‖²_{H^{1+s}}` over `Θ` band-limited to `N`
/// by gradient ascent preconditioned with `⟨∇⟩^{−2−2s}`, halving the step
/// until the objective does not decrease. Returns the final value.
pub fn maximize_inner(
    pot: Potential,
    y: &SpectralField,
    s: f64,
    n: usize,
    steps: u32,
    step_size: f64,
) -> f64 {
    let y = y.resized(n);
    let precond = RadialMultiplier::Bracket(-2.0 - 2.0 * s);
    let mut theta = SpectralField::zeros(n);
    let mut value = objective(pot, &y, &theta, s, n);
    let mut eta = step_size;
    for _ in 0..steps {
        let mut g = pot.gradient(&(&y + &theta), s, n).scaled(-1.0);
        g.axpy(
            -1.0,
            &theta
                .apply_multiplier(&RadialMultiplier::Bracket(2.0 + 2.0 * s))
                .expect("finite symbol"),
        );
        let dir = g.apply_multiplier(&precond).expect("finite symbol");
        if dir.max_abs() == 0.0 {
            break;
        }
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial = theta.clone();
            trial.axpy(eta, &dir);
            let v = objective(pot, &y, &trial, s, n);
            if v >= value {
                theta = trial;
                value = v;
                accepted = true;
                eta = (eta * 1.5).min(step_size);
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    value
}

/// Monte Carlo estimate of the right side of the Boué–Dupuis bound
/// `log E[e^{−F(Y)}] ≤ E[sup_Θ {−F(Y + Θ) − ½‖Θ‖²_{H^{1+s}}}]`,
/// with `Y ~ μ_{s+1,N}`.
pub fn bd_bound(cfg: &BdConfig) -> Result<BdReport> {
    let pairs = map_collect(cfg.samples, |i| {
        let y = sample_mu_position(cfg.s + 1.0, cfg.cutoff, &sample_stream(cfg.seed, i));
        let start = -cfg.potential.value(&y, cfg.s, cfg.cutoff);
        let v = maximize_inner(cfg.potential, &y, cfg.s, cfg.cutoff, cfg.ascent_steps, cfg.step_size);
        if !v.is_finite() || v > cfg.ceiling {
            return Err(Error::OptimizerDiverged {
                sample: i,
                value: v,
                ceiling: cfg.ceiling,
            });
        }
        Ok((start, v))
    })?;
    let meta = ReportMeta {
        s: cfg.s,
        cutoff: cfg.cutoff,
        seed: cfg.seed,
        ..Default::default()
    };
    let n = cfg.samples;
    let starts: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let values: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (m0, s0) = mean_stderr(&starts);
    let (m1, s1) = mean_stderr(&values);
    Ok(BdReport {
        bound: EstimatorReport::new("bd_bound", m1, s1, n, n as f64, meta)
            .with("ascent_steps", f64::from(cfg.ascent_steps)),
        start: EstimatorReport::new("minus_mean_F", m0, s0, n, n as f64, meta),
        per_sample: values,
    })
}

/// Closed-form maximum for `F(u) = ½‖u‖²_{L²}`:
/// `−½ Σ w/(1+w) |ŷ(n)|²` with `w = ⟨n⟩^{2+2s}`.
pub fn quadratic_inner_maximum(y: &SpectralField, s: f64) -> f64 {
    -0.5 * y
        .modes()
        .map(|m| {
            let w = (1.0 + m.norm_sq()).powf(1.0 + s);
            w / (1.0 + w) * y.get(m).norm_sqr()
        })
        .sum::<f64>()
}
