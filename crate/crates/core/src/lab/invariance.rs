use serde::{Deserialize, Serialize};

use super::stats::{EstimatorReport, Moments, ReportMeta};
use super::{noise_stream, sample_stream};
use crate::dynamics::{Flow, FlowConfig};
use crate::gaussian::{sample_mu, MeasureSpec};
use crate::parallel::map_reduce;
use crate::spectral::{half_lattice, Mode};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceConfig {
    pub s: f64,
    pub cutoff: usize,
    pub dt: f64,
    pub horizon: f64,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// `E|û(n)|²` and `E|v̂(n)|²` at time `T`, with `expected` and `z` extras.
    pub variances: Vec<EstimatorReport>,
    /// `E Re(û(n) conj v̂(n))` at time `T`; expected 0.
    pub cross: Vec<EstimatorReport>,
    /// Paired differences `|û(n)|²(T) − |û(n)|²(0)` (and for `v`); expected 0.
    pub drift: Vec<EstimatorReport>,
    pub variance_fraction_within_3: f64,
    pub cross_fraction_within_3: f64,
    pub drift_fraction_within_3: f64,
}

const SLOTS: usize = 5;

fn label(m: Mode) -> String {
    format!("({},{})", m.n1, m.n2)
}

fn fraction_within(reports: &[EstimatorReport], z: f64) -> f64 {
    let ok = reports
        .iter()
        .filter(|r| r.extra.get("z").is_some_and(|v| v.abs() <= z))
        .count();
    ok as f64 / reports.len().max(1) as f64
}

/// Draw `x0 ~ μ_{s,N}`, run the linear flow with noise to `T`, and compare
/// per-mode second moments with `diag(⟨n⟩^{−2s−2}, ⟨n⟩^{−2s})`.
pub fn linear_invariance_test(cfg: &InvarianceConfig) -> Result<InvarianceReport> {
    let spec = MeasureSpec::new(cfg.s, cfg.cutoff);
    let flow = Flow::new(FlowConfig {
        cubic: false,
        ..FlowConfig::new(cfg.s, cfg.cutoff, cfg.dt, cfg.horizon)
    })?;
    let modes = half_lattice(cfg.cutoff);
    let acc = map_reduce(
        cfg.samples,
        || vec![[Moments::default(); SLOTS]; modes.len()],
        |acc, i| {
            let rng = sample_stream(cfg.seed, i);
            let x0 = sample_mu(&spec, &rng);
            let xt = flow.evolve(&x0, &noise_stream(&rng), |_, _, _| {})?;
            for (slot, &m) in acc.iter_mut().zip(&modes) {
                let (a0, b0) = (x0.u.get(m), x0.v.get(m));
                let (a, b) = (xt.u.get(m), xt.v.get(m));
                slot[0].push(a.norm_sqr());
                slot[1].push(b.norm_sqr());
                slot[2].push((a * b.conj()).re);
                slot[3].push(a.norm_sqr() - a0.norm_sqr());
                slot[4].push(b.norm_sqr() - b0.norm_sqr());
            }
            Ok(())
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                for k in 0..SLOTS {
                    x[k].merge(&y[k]);
                }
            }
        },
    )?;
    let meta = ReportMeta {
        s: cfg.s,
        cutoff: cfg.cutoff,
        dt: cfg.dt,
        horizon: flow.config().actual_horizon(),
        seed: cfg.seed,
    };
    let report = |name: String, m: &Moments, expected: f64| {
        let r = EstimatorReport::new(name, m.mean(), m.stderr(), m.count, m.count as f64, meta);
        let z = r.z_against(expected);
        r.with("expected", expected).with("z", z)
    };
    let mut out = InvarianceReport {
        variances: Vec::new(),
        cross: Vec::new(),
        drift: Vec::new(),
        variance_fraction_within_3: 0.0,
        cross_fraction_within_3: 0.0,
        drift_fraction_within_3: 0.0,
    };
    for (slot, &m) in acc.iter().zip(&modes) {
        let l = label(m);
        out.variances.push(report(format!("var_u{l}"), &slot[0], spec.u_variance(m)));
        out.variances.push(report(format!("var_v{l}"), &slot[1], spec.v_variance(m)));
        out.cross.push(report(format!("cov_uv{l}"), &slot[2], 0.0));
        out.drift.push(report(format!("drift_u{l}"), &slot[3], 0.0));
        out.drift.push(report(format!("drift_v{l}"), &slot[4], 0.0));
    }
    out.variance_fraction_within_3 = fraction_within(&out.variances, 3.0);
    out.cross_fraction_within_3 = fraction_within(&out.cross, 3.0);
    out.drift_fraction_within_3 = fraction_within(&out.drift, 3.0);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_horizon_compares_sampler_with_itself() {
        let r = linear_invariance_test(&InvarianceConfig {
            s: 1.0,
            cutoff: 2,
            dt: 0.1,
            horizon: 0.0,
            samples: 4000,
            seed: 1,
        })
        .unwrap();
        assert_eq!(r.variances.len(), 2 * 13);
        assert!(r.drift.iter().all(|d| d.mean == 0.0 && d.extra["z"] == 0.0));
        assert!(r.variance_fraction_within_3 >= 0.9);
    }

    #[test]
    fn small_invariance_run() {
        let r = linear_invariance_test(&InvarianceConfig {
            s: 1.0,
            cutoff: 2,
            dt: 0.25,
            horizon: 2.0,
            samples: 5000,
            seed: 2,
        })
        .unwrap();
        assert!(r.variance_fraction_within_3 >= 0.9, "{}", r.variance_fraction_within_3);
        assert!(r.cross_fraction_within_3 >= 0.9);
        assert!(r.drift_fraction_within_3 >= 0.9);
    }
}
