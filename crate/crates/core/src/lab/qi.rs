use serde::{Deserialize, Serialize};

use super::stats::{ess, ks_critical, normalized_weights, weighted_ks, weighted_mean_stderr};
use super::{noise_stream, sample_stream};
use crate::dynamics::{Flow, FlowConfig};
use crate::functionals::r_potential;
use crate::gaussian::{sample_mu, MeasureSpec};
use crate::parallel::map_collect;
use crate::spectral::{half_lattice, PhaseState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QiConfig {
    pub s: f64,
    pub cutoff: usize,
    pub dt: f64,
    pub horizon: f64,
    pub samples: u64,
    pub seed: u64,
    pub cubic: bool,
    /// Family-wise significance level, split across coordinates.
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QiRow {
    pub coordinate: String,
    /// KS distance between time-0 and time-`T` laws under `ν` weights.
    pub ks_nu: f64,
    /// Same under the unweighted `μ` ensemble.
    pub ks_mu: f64,
    pub var_ratio_nu: f64,
    pub var_ratio_mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QiReport {
    pub rows: Vec<QiRow>,
    pub ks_critical_nu: f64,
    pub ks_critical_mu: f64,
    pub ess: f64,
    pub all_finite: bool,
}

/// Real coordinates of the modes with `|n|_∞ ≤ 1`, as `(label, value)`.
fn low_coordinates(x: &PhaseState) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for m in half_lattice(1) {
        for (name, f) in [("u", &x.u), ("v", &x.v)] {
            let c = f.get(m);
            out.push((format!("{name}({},{}).re", m.n1, m.n2), c.re));
            if m != crate::spectral::Mode::ZERO {
                out.push((format!("{name}({},{}).im", m.n1, m.n2), c.im));
            }
        }
    }
    out
}

fn weighted_var(w: &[f64], xs: &[f64]) -> f64 {
    let (m, _) = weighted_mean_stderr(w, xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m).powi(2)).collect();
    weighted_mean_stderr(w, &sq).0
}

/// Two-sample comparison of the low-mode marginals at time 0 and time `T`
/// for `μ`- and `ν`-distributed initial data under the truncated flow.
pub fn quasi_invariance_scan(cfg: &QiConfig) -> Result<QiReport> {
    let spec = MeasureSpec::new(cfg.s, cfg.cutoff);
    let flow = Flow::new(FlowConfig {
        cubic: cfg.cubic,
        ..FlowConfig::new(cfg.s, cfg.cutoff, cfg.dt, cfg.horizon)
    })?;
    let rows = map_collect(cfg.samples, |i| {
        let rng = sample_stream(cfg.seed, i);
        let x0 = sample_mu(&spec, &rng);
        let xt = flow
            .evolve(&x0, &noise_stream(&rng), |_, _, _| {})
            .map_err(|e| match e {
                Error::BlowUp { step, .. } => Error::BlowUp { step, sample: Some(i) },
                e => e,
            })?;
        Ok((-r_potential(&x0.u, cfg.s, cfg.cutoff), low_coordinates(&x0), low_coordinates(&xt)))
    })?;
    let log_w: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let w = normalized_weights(&log_w);
    let ones = vec![1.0; w.len()];
    let e = ess(&w);
    let names: Vec<String> = rows.first().map(|r| r.1.iter().map(|c| c.0.clone()).collect()).unwrap_or_default();
    let mut out = Vec::new();
    let mut all_finite = e.is_finite();
    for (k, name) in names.into_iter().enumerate() {
        let a: Vec<f64> = rows.iter().map(|r| r.1[k].1).collect();
        let b: Vec<f64> = rows.iter().map(|r| r.2[k].1).collect();
        let row = QiRow {
            coordinate: name,
            ks_nu: weighted_ks(&a, &w, &b, &w),
            ks_mu: weighted_ks(&a, &ones, &b, &ones),
            var_ratio_nu: weighted_var(&w, &b) / weighted_var(&w, &a),
            var_ratio_mu: weighted_var(&ones, &b) / weighted_var(&ones, &a),
        };
        all_finite &= [row.ks_nu, row.ks_mu, row.var_ratio_nu, row.var_ratio_mu]
            .iter()
            .all(|v| v.is_finite());
        out.push(row);
    }
    let level = cfg.alpha / out.len().max(1) as f64;
    let n = cfg.samples as f64;
    Ok(QiReport {
        ks_critical_nu: ks_critical(level, e, e),
        ks_critical_mu: ks_critical(level, n, n),
        rows: out,
        ess: e,
        all_finite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QiConfig {
        QiConfig {
            s: 1.0,
            cutoff: 3,
            dt: 0.05,
            horizon: 0.5,
            samples: 1500,
            seed: 4,
            cubic: false,
            alpha: 1e-3,
        }
    }

    #[test]
    fn zero_horizon_is_self_comparison() {
        let r = quasi_invariance_scan(&QiConfig { horizon: 0.0, ..cfg() }).unwrap();
        assert_eq!(r.rows.len(), 2 * 9);
        assert!(r.rows.iter().all(|row| row.ks_nu == 0.0 && row.ks_mu == 0.0));
    }

    #[test]
    fn linear_flow_keeps_mu_marginals() {
        let r = quasi_invariance_scan(&cfg()).unwrap();
        assert!(r.all_finite);
        for row in &r.rows {
            assert!(row.ks_mu < r.ks_critical_mu, "{row:?} vs {}", r.ks_critical_mu);
        }
    }
}
