use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::parallel::pairwise_sum;

/// Run parameters attached to every report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub s: f64,
    pub cutoff: usize,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub name: String,
    pub mean: f64,
    pub stderr: f64,
    pub count: u64,
    /// Effective sample size; equals `count` for unweighted estimates.
    pub ess: f64,
    pub meta: ReportMeta,
    /// Named auxiliary values, e.g. the expected value and z-score.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

impl EstimatorReport {
    pub fn new(name: impl Into<String>, mean: f64, stderr: f64, count: u64, ess: f64, meta: ReportMeta) -> Self {
        EstimatorReport {
            name: name.into(),
            mean,
            stderr,
            count,
            ess,
            meta,
            extra: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }

    /// `(mean − expected)/stderr`; infinite when the SE vanishes but the
    /// difference does not.
    pub fn z_against(&self, expected: f64) -> f64 {
        let d = self.mean - expected;
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY * d.signum()
        }
    }
}

/// Mergeable running sums for mean and standard error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Self-normalized importance weights from log-weights, shifted by the
/// maximum before exponentiating.
pub fn normalized_weights(log_w: &[f64]) -> Vec<f64> {
    let m = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - m).exp()).collect();
    let total = pairwise_sum(&w);
    w.into_iter().map(|x| x / total).collect()
}

/// `(Σw)²/Σw²`.
pub fn ess(weights: &[f64]) -> f64 {
    let s = pairwise_sum(weights);
    let sq: Vec<f64> = weights.iter().map(|w| w * w).collect();
    s * s / pairwise_sum(&sq)
}

/// Self-normalized weighted mean of `xs` with its delta-method standard
/// error `(Σ w_i²(x_i − x̄)²)^{1/2}` for weights summing to one.
pub fn weighted_mean_stderr(weights: &[f64], xs: &[f64]) -> (f64, f64) {
    let total = pairwise_sum(weights);
    let wx: Vec<f64> = weights.iter().zip(xs).map(|(w, x)| w * x).collect();
    let mean = pairwise_sum(&wx) / total;
    let dev: Vec<f64> = weights
        .iter()
        .zip(xs)
        .map(|(w, x)| (w / total * (x - mean)).powi(2))
        .collect();
    (mean, pairwise_sum(&dev).sqrt())
}

/// `log((1/n) Σ e^{l_i})` and the standard error of that logarithm by the
/// delta method.
pub fn log_mean_exp(ls: &[f64]) -> (f64, f64) {
    let m = ls.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = ls.iter().map(|l| (l - m).exp()).collect();
    let (mean, se) = mean_stderr(&scaled);
    (m + mean.ln(), se / mean)
}

/// Two-sample Kolmogorov–Smirnov distance between weighted empirical laws.
/// Weights need not be normalized.
pub fn weighted_ks(a: &[f64], wa: &[f64], b: &[f64], wb: &[f64]) -> f64 {
    let norm = |xs: &[f64], ws: &[f64]| {
        let total = pairwise_sum(ws);
        let mut v: Vec<(f64, f64)> = xs.iter().zip(ws).map(|(&x, &w)| (x, w / total)).collect();
        v.sort_by(|p, q| p.0.total_cmp(&q.0));
        v
    };
    let (pa, pb) = (norm(a, wa), norm(b, wb));
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb, mut d) = (0.0f64, 0.0f64, 0.0f64);
    while i < pa.len() || j < pb.len() {
        let x = match (pa.get(i), pb.get(j)) {
            (Some(p), Some(q)) => p.0.min(q.0),
            (Some(p), None) => p.0,
            (None, Some(q)) => q.0,
            (None, None) => unreachable!(),
        };
        while i < pa.len() && pa[i].0 == x {
            fa += pa[i].1;
            i += 1;
        }
        while j < pb.len() && pb[j].0 == x {
            fb += pb[j].1;
            j += 1;
        }
        d = d.max((fa - fb).abs());
    }
    d
}

pub fn ks(a: &[f64], b: &[f64]) -> f64 {
    weighted_ks(a, &vec![1.0; a.len()], b, &vec![1.0; b.len()])
}

/// Asymptotic two-sample KS critical value at level `alpha` for effective
/// sizes `n` and `m`.
pub fn ks_critical(alpha: f64, n: f64, m: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() * ((n + m) / (n * m)).sqrt()
}

/// Least-squares slope and intercept of `y` on `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Empirical quantile by linear interpolation of the sorted sample.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_direct_formulas() {
        let xs = [1.0, 2.0, 4.0, 7.0];
        let mut m = Moments::default();
        xs.iter().for_each(|&x| m.push(x));
        let (mean, se) = mean_stderr(&xs);
        assert_eq!(m.mean(), 3.5);
        assert_eq!(mean, 3.5);
        assert!((m.stderr() - se).abs() < 1e-14);
        assert!((m.variance() - 7.0).abs() < 1e-14);
    }

    #[test]
    fn weights_and_ess() {
        let w = normalized_weights(&[0.0, 0.0, 0.0, 0.0]);
        assert!((pairwise_sum(&w) - 1.0).abs() < 1e-15);
        assert!((ess(&w) - 4.0).abs() < 1e-12);
        let w = normalized_weights(&[1000.0, 0.0, 0.0]);
        assert!((ess(&w) - 1.0).abs() < 1e-12);
        let (m, _) = weighted_mean_stderr(&[1.0, 3.0], &[2.0, 6.0]);
        assert_eq!(m, 5.0);
    }

    #[test]
    fn log_mean_exp_is_stable() {
        let (l, _) = log_mean_exp(&[1000.0, 1000.0]);
        assert!((l - 1000.0).abs() < 1e-12);
        let (l, se) = log_mean_exp(&[0.0; 10]);
        assert_eq!((l, se), (0.0, 0.0));
    }

    #[test]
    fn ks_distances() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(ks(&a, &a), 0.0);
        let b: Vec<f64> = (0..100).map(|i| i as f64 + 1000.0).collect();
        assert!((ks(&a, &b) - 1.0).abs() < 1e-12);
        let c: Vec<f64> = (0..100).map(|i| i as f64 + 50.0).collect();
        assert!((ks(&a, &c) - 0.5).abs() < 1e-12);
        assert!(ks_critical(1e-3, 1e4, 1e4) < 0.03);
    }

    #[test]
    fn fit_and_quantiles() {
        let (m, b) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((m - 2.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14);
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
        assert_eq!(quantile(&[0.0, 10.0], 0.25), 2.5);
    }
}
