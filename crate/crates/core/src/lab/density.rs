use serde::{Deserialize, Serialize};

use super::stats::{ess, normalized_weights, weighted_mean_stderr, EstimatorReport, ReportMeta};
use super::{noise_stream, sample_stream};
use crate::dynamics::{Flow, FlowConfig};
use crate::functionals::{grad_energy, grad_hamiltonian, poisson_bracket, r_potential};
use crate::gaussian::{sample_mu, MeasureSpec};
use crate::parallel::map_collect;
use crate::spectral::{Mode, PhaseState, RadialMultiplier};
use crate::{Error, Result};

/// Bounded cylinder observables of the lowest modes, in units of the
/// `μ_s` standard deviation of each coordinate, clipped smoothly at ±5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    /// `F ≡ 1`.
    Unit,
    /// `c(Re û(1,0)) · c(Re v̂(1,0))` with `c(z) = 5 tanh(z/5)`.
    LowModeProduct,
    /// `σ(2(û(0) − ½)) · σ(2 v̂(0))` with the logistic `σ`.
    SmoothIndicator,
}

impl Observable {
    pub const ALL: [Observable; 3] = [Observable::Unit, Observable::LowModeProduct, Observable::SmoothIndicator];

    pub fn name(&self) -> &'static str {
        match self {
            Observable::Unit => "unit",
            Observable::LowModeProduct => "low_mode_product",
            Observable::SmoothIndicator => "smooth_indicator",
        }
    }

    pub fn eval(&self, x: &PhaseState, spec: &MeasureSpec) -> f64 {
        let clip = |z: f64| 5.0 * (z / 5.0).tanh();
        let logistic = |z: f64| 1.0 / (1.0 + (-z).exp());
        match self {
            Observable::Unit => 1.0,
            Observable::LowModeProduct => {
                let m = Mode::new(1, 0);
                let a = x.u.get(m).re / (0.5 * spec.u_variance(m)).sqrt();
                let b = x.v.get(m).re / (0.5 * spec.v_variance(m)).sqrt();
                clip(a) * clip(b)
            }
            Observable::SmoothIndicator => {
                let a = x.u.mean() / spec.u_variance(Mode::ZERO).sqrt();
                let b = x.v.mean() / spec.v_variance(Mode::ZERO).sqrt();
                logistic(2.0 * (clip(a) - 0.5)) * logistic(2.0 * clip(b))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    pub s: f64,
    pub cutoff: usize,
    pub dt: f64,
    /// Longer horizon `t`; the shorter one is `t/2`.
    pub horizon: f64,
    /// Number of antithetic noise pairs.
    pub samples: u64,
    pub seed: u64,
    pub observable: Observable,
    /// `false` drops the cubic term from both the flow and the Hamiltonian.
    pub cubic: bool,
    /// Minimum effective sample size of the `e^{−R}` weights.
    pub ess_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub observable: Observable,
    /// `(Ê_ν F(Φ_t) − Ê_ν F)/t`
    pub d_full: EstimatorReport,
    /// Same at `t/2`.
    pub d_half: EstimatorReport,
    /// `2 D(t/2) − D(t)`
    pub d_extrapolated: EstimatorReport,
    /// `Ê_ν[F {H, E_{s,N}}]`
    pub bracket_side: EstimatorReport,
    /// Standard error of the paired difference `D_R − B`.
    pub stderr_difference: f64,
    /// `|D(t) − D(t/2)|`, the size of the first-order time bias.
    pub bias_estimate: f64,
    /// `stderr_difference + bias_estimate`
    pub combined_uncertainty: f64,
    pub discrepancy: f64,
    pub ess: f64,
    /// `|D_R − B| ≤ 3·combined`
    pub passes: bool,
}

struct PairSample {
    log_w: f64,
    d_half: f64,
    d_full: f64,
    bracket: f64,
}

fn bracket_term(x: &PhaseState, s: f64, n: usize, cubic: bool) -> f64 {
    let gh = if cubic {
        grad_hamiltonian(x, n)
    } else {
        let u = x.u.resized(n);
        PhaseState {
            u: u.apply_multiplier(&RadialMultiplier::Bracket(2.0)).expect("finite symbol"),
            v: x.v.resized(n),
        }
    };
    poisson_bracket(&gh, &grad_energy(x, s, n))
}

/// Compare the short-time change of `E_ν[F(Φ_t)]` with the bracket
/// prediction `d/dt E_ν[F(Φ_t)]|_{t=0} = E_ν[F {H, E_{s,N}}]`, where
/// `ν ∝ e^{−R_{s,N}} μ_s`.
pub fn density_derivative_check(cfg: &DensityConfig) -> Result<DensityReport> {
    let steps = (cfg.horizon / cfg.dt).round() as u64;
    if steps < 2 || steps % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "horizon/dt must be an even number of steps, got {steps}"
        )));
    }
    let t = steps as f64 * cfg.dt;
    let spec = MeasureSpec::new(cfg.s, cfg.cutoff);
    let flow = Flow::new(FlowConfig {
        cubic: cfg.cubic,
        ..FlowConfig::new(cfg.s, cfg.cutoff, cfg.dt, t)
    })?;
    let obs = cfg.observable;
    let samples = map_collect(cfg.samples, |i| {
        let rng = sample_stream(cfg.seed, i);
        let noise = noise_stream(&rng);
        let x0 = sample_mu(&spec, &rng);
        let f0 = obs.eval(&x0, &spec);
        let (mut dh, mut dt) = (0.0, 0.0);
        for sign in [1.0, -1.0] {
            let mut x = x0.clone();
            for k in 0..steps {
                flow.step(&mut x, k, Some(&noise), sign).map_err(|e| match e {
                    Error::BlowUp { step, .. } => Error::BlowUp { step, sample: Some(i) },
                    e => e,
                })?;
                if k + 1 == steps / 2 {
                    dh += 0.5 * (obs.eval(&x, &spec) - f0);
                }
            }
            dt += 0.5 * (obs.eval(&x, &spec) - f0);
        }
        Ok(PairSample {
            log_w: -r_potential(&x0.u, cfg.s, cfg.cutoff),
            d_half: dh,
            d_full: dt,
            bracket: f0 * bracket_term(&x0, cfg.s, cfg.cutoff, cfg.cubic),
        })
    })?;
    let log_w: Vec<f64> = samples.iter().map(|p| p.log_w).collect();
    let w = normalized_weights(&log_w);
    let e = ess(&w);
    if e < cfg.ess_floor {
        return Err(Error::DegenerateWeights {
            ess: e,
            floor: cfg.ess_floor,
        });
    }
    let col = |f: &dyn Fn(&PairSample) -> f64| samples.iter().map(f).collect::<Vec<f64>>();
    let (full, se_full) = weighted_mean_stderr(&w, &col(&|p| p.d_full / t));
    let (half, se_half) = weighted_mean_stderr(&w, &col(&|p| 2.0 * p.d_half / t));
    let (rich, se_rich) = weighted_mean_stderr(&w, &col(&|p| (4.0 * p.d_half - p.d_full) / t));
    let (b, se_b) = weighted_mean_stderr(&w, &col(&|p| p.bracket));
    let (diff, se_diff) = weighted_mean_stderr(&w, &col(&|p| (4.0 * p.d_half - p.d_full) / t - p.bracket));
    let meta = ReportMeta {
        s: cfg.s,
        cutoff: cfg.cutoff,
        dt: cfg.dt,
        horizon: t,
        seed: cfg.seed,
    };
    let n = cfg.samples;
    let bias = (full - half).abs();
    let combined = se_diff + bias;
    Ok(DensityReport {
        observable: obs,
        d_full: EstimatorReport::new("D_t", full, se_full, n, e, meta),
        d_half: EstimatorReport::new("D_t/2", half, se_half, n, e, meta),
        d_extrapolated: EstimatorReport::new("D_richardson", rich, se_rich, n, e, meta),
        bracket_side: EstimatorReport::new("B", b, se_b, n, e, meta),
        stderr_difference: se_diff,
        bias_estimate: bias,
        combined_uncertainty: combined,
        discrepancy: diff,
        ess: e,
        passes: diff.abs() <= 3.0 * combined,
    })
}
