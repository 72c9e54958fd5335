//! Zero-padded transforms between coefficients and equispaced grid samples.
//!
//! A product of fields with cutoffs `N₁, …, N_k` has frequencies up to
//! `D = ΣNᵢ`. Sampling on `L` points per axis folds mode `k` onto `k mod L`,
//! so the coefficients with `|k|_∞ ≤ M` are exact as long as `L > D + M`.
//! Every product routine here picks `L` from that rule (rounded up to a
//! 5-smooth length), which for the cubic nonlinearity projected back to
//! `N` is the familiar `L ≥ 4N + 2`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{Mode, SpectralField};
use crate::{Error, Result};

/// Smallest integer `≥ min` whose only prime factors are 2, 3 and 5.
pub fn smooth_len(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut m = n;
        for p in [2, 3, 5] {
            while m % p == 0 {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

/// Grid length that resolves the coefficients `|k|_∞ ≤ out_cutoff` of a
/// product of total degree `total_degree` without aliasing.
pub fn grid_len_for(total_degree: usize, out_cutoff: usize) -> usize {
    smooth_len(total_degree + out_cutoff + 2)
}

struct Plan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<usize, Plan>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn transpose(buf: &mut [Complex64], len: usize) {
    for i in 0..len {
        for j in (i + 1)..len {
            buf.swap(i * len + j, j * len + i);
        }
    }
}

/// Unnormalized 2-D transform of a row-major `len × len` buffer.
fn fft2(buf: &mut [Complex64], len: usize, inverse: bool) {
    debug_assert_eq!(buf.len(), len * len);
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, plans) = &mut *guard;
        let plan = plans.entry(len).or_insert_with(|| {
            let forward = planner.plan_fft_forward(len);
            let inverse = planner.plan_fft_inverse(len);
            let scratch_len = forward
                .get_inplace_scratch_len()
                .max(inverse.get_inplace_scratch_len());
            Plan {
                forward,
                inverse,
                scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            }
        });
        let fft = if inverse { &plan.inverse } else { &plan.forward };
        fft.process_with_scratch(buf, &mut plan.scratch);
        transpose(buf, len);
        fft.process_with_scratch(buf, &mut plan.scratch);
        transpose(buf, len);
    });
}

#[inline]
fn wrap(k: i64, len: usize) -> usize {
    k.rem_euclid(len as i64) as usize
}

/// Real samples `f(2πj/L)` on an `L × L` grid (row-major, first index along x₁).
#[derive(Debug, Clone, PartialEq)]
pub struct GridValues {
    len: usize,
    values: Vec<f64>,
}

impl GridValues {
    pub fn from_field(f: &SpectralField, len: usize) -> GridValues {
        let n = f.cutoff() as i64;
        assert!(
            len > 2 * f.cutoff(),
            "grid length {len} cannot hold cutoff {}",
            f.cutoff()
        );
        let mut buf = vec![Complex64::new(0.0, 0.0); len * len];
        for n1 in -n..=n {
            let row = wrap(n1, len) * len;
            for n2 in -n..=n {
                buf[row + wrap(n2, len)] = f.get(Mode::new(n1, n2));
            }
        }
        fft2(&mut buf, len, true);
        GridValues {
            len,
            values: buf.into_iter().map(|c| c.re).collect(),
        }
    }

    pub fn constant(len: usize, c: f64) -> GridValues {
        GridValues {
            len,
            values: vec![c; len * len],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridValues {
        GridValues {
            len: self.len,
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn mul(&self, other: &GridValues) -> GridValues {
        assert_eq!(self.len, other.len, "grid length mismatch");
        GridValues {
            len: self.len,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: f64, other: &GridValues) {
        assert_eq!(self.len, other.len, "grid length mismatch");
        for (x, y) in self.values.iter_mut().zip(&other.values) {
            *x += a * y;
        }
    }

    /// Grid average; equals `⨍ f` when `f` has degree below `len`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Coefficients `|k|_∞ ≤ out_cutoff` of the sampled function.
    pub fn to_field(&self, out_cutoff: usize) -> SpectralField {
        let len = self.len;
        assert!(
            len > 2 * out_cutoff,
            "grid length {len} cannot resolve cutoff {out_cutoff}"
        );
        let mut buf: Vec<Complex64> = self
            .values
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        fft2(&mut buf, len, false);
        let norm = 1.0 / (len * len) as f64;
        let mut out = SpectralField::zeros(out_cutoff);
        let m = out_cutoff as i64;
        for n1 in -m..=m {
            for n2 in -m..=m {
                let mode = Mode::new(n1, n2);
                let idx = out.index(mode);
                out.coeffs_mut()[idx] = buf[wrap(n1, len) * len + wrap(n2, len)] * norm;
            }
        }
        // Round-off leaves the pair (n, −n) conjugate only to ~1e−16; make it exact.
        let c = out.coeffs_mut();
        let total = c.len();
        for i in 0..total / 2 {
            let j = total - 1 - i;
            let avg = (c[i] + c[j].conj()) * 0.5;
            c[i] = avg;
            c[j] = avg.conj();
        }
        c[total / 2].im = 0.0;
        out
    }
}

/// Real-space samples of `f` on an `L × L` grid.
pub fn sample_grid(f: &SpectralField, len: usize) -> Vec<f64> {
    GridValues::from_field(f, len).values
}

/// Exact coefficients `|k|_∞ ≤ out_cutoff` of the pointwise product of
/// `factors`, which may have different cutoffs.
pub fn dealiased_product(factors: &[&SpectralField], out_cutoff: usize) -> SpectralField {
    if factors.is_empty() {
        return SpectralField::constant(out_cutoff, 1.0);
    }
    let degree: usize = factors.iter().map(|f| f.cutoff()).sum();
    let out_cutoff = out_cutoff.min(degree);
    let len = grid_len_for(degree, out_cutoff);
    let mut acc = GridValues::from_field(factors[0], len);
    for f in &factors[1..] {
        acc = acc.mul(&GridValues::from_field(f, len));
    }
    acc.to_field(out_cutoff).resized(out_cutoff)
}

/// `Π_{≤out}(f g h)` for three fields with a common cutoff `N`, `out ≤ 3N`.
pub fn cubic_product(
    f: &SpectralField,
    g: &SpectralField,
    h: &SpectralField,
    out_cutoff: usize,
) -> Result<SpectralField> {
    let n = f.cutoff();
    if g.cutoff() != n || h.cutoff() != n {
        return Err(Error::Shape(format!(
            "cubic product needs a shared cutoff, got {}, {}, {}",
            n,
            g.cutoff(),
            h.cutoff()
        )));
    }
    if out_cutoff > 3 * n {
        return Err(Error::Shape(format!(
            "output cutoff {out_cutoff} exceeds the product band 3·{n}"
        )));
    }
    let len = grid_len_for(3 * n, out_cutoff);
    let gf = GridValues::from_field(f, len);
    let prod = if std::ptr::eq(f, g) && std::ptr::eq(g, h) {
        gf.map(|x| x * x * x)
    } else {
        gf.mul(&GridValues::from_field(g, len))
            .mul(&GridValues::from_field(h, len))
    };
    Ok(prod.to_field(out_cutoff))
}

/// Normalized `L^p` norm on an `L × L` grid. Exact for `p = 2` and
/// band-limited fields; a quadrature approximation otherwise.
pub fn lp_norm(f: &SpectralField, p: f64, len: usize) -> f64 {
    assert!(p >= 1.0, "L^p norm needs p ≥ 1, got {p}");
    let len = len.max(2 * f.cutoff() + 2);
    let g = GridValues::from_field(f, len);
    if p.is_infinite() {
        return g.max_abs();
    }
    let mean = g.values.iter().map(|x| x.abs().powf(p)).sum::<f64>() / (len * len) as f64;
    mean.powf(1.0 / p)
}
