use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use super::{Mode, RadialMultiplier};
use crate::{Error, Result};

/// Real scalar field on 𝕋², stored as the full coefficient square
/// `n ∈ [−N, N]²` in row-major order (`n1` outer, `n2` inner).
///
/// Hermitian symmetry `f̂(−n) = conj f̂(n)` holds for every constructor and
/// operation in this crate; it is checked in debug builds.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    cutoff: usize,
    coeff: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(cutoff: usize) -> Self {
        let side = 2 * cutoff + 1;
        SpectralField {
            cutoff,
            coeff: vec![Complex64::new(0.0, 0.0); side * side],
        }
    }

    pub fn constant(cutoff: usize, c: f64) -> Self {
        let mut f = Self::zeros(cutoff);
        f.set_pair(Mode::ZERO, Complex64::new(c, 0.0));
        f
    }

    /// `amplitude · cos(n·x)`.
    pub fn cosine(cutoff: usize, mode: Mode, amplitude: f64) -> Self {
        let mut f = Self::zeros(cutoff);
        if mode == Mode::ZERO {
            f.set_pair(mode, Complex64::new(amplitude, 0.0));
        } else {
            f.set_pair(mode, Complex64::new(amplitude / 2.0, 0.0));
        }
        f
    }

    /// Build from raw row-major coefficients; rejects non-Hermitian input.
    pub fn from_coeffs(cutoff: usize, coeff: Vec<Complex64>) -> Result<Self> {
        let side = 2 * cutoff + 1;
        if coeff.len() != side * side {
            return Err(Error::Shape(format!(
                "expected {} coefficients for cutoff {cutoff}, got {}",
                side * side,
                coeff.len()
            )));
        }
        let f = SpectralField { cutoff, coeff };
        let scale = f.coeff.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if !f.is_hermitian(1e-12 * scale.max(1.0)) {
            return Err(Error::Shape("coefficients are not Hermitian-symmetric".into()));
        }
        Ok(f)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeff
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeff
    }

    pub fn contains(&self, m: Mode) -> bool {
        m.sup_norm() <= self.cutoff as i64
    }

    #[inline]
    pub fn index(&self, m: Mode) -> usize {
        let c = self.cutoff as i64;
        ((m.n1 + c) as usize) * self.side() + (m.n2 + c) as usize
    }

    #[inline]
    pub fn mode_at(&self, idx: usize) -> Mode {
        let c = self.cutoff as i64;
        let side = self.side();
        Mode::new((idx / side) as i64 - c, (idx % side) as i64 - c)
    }

    /// Coefficient at `m`, zero outside the stored square.
    pub fn get(&self, m: Mode) -> Complex64 {
        if self.contains(m) {
            self.coeff[self.index(m)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Set `f̂(m) = c` and `f̂(−m) = conj c`. The zero mode keeps only `Re c`.
    pub fn set_pair(&mut self, m: Mode, c: Complex64) {
        assert!(self.contains(m), "mode {m:?} outside cutoff {}", self.cutoff);
        if m == Mode::ZERO {
            let i = self.index(m);
            self.coeff[i] = Complex64::new(c.re, 0.0);
        } else {
            let i = self.index(m);
            let j = self.index(m.neg());
            self.coeff[i] = c;
            self.coeff[j] = c.conj();
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.coeff.len()).map(move |i| self.mode_at(i))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.coeff.len();
        (0..n).all(|i| (self.coeff[i] - self.coeff[n - 1 - i].conj()).norm() <= tol)
    }

    pub fn is_finite(&self) -> bool {
        self.coeff.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeff.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Same field stored at a different cutoff (zero-padded or truncated).
    pub fn resized(&self, cutoff: usize) -> SpectralField {
        if cutoff == self.cutoff {
            return self.clone();
        }
        let mut out = SpectralField::zeros(cutoff);
        let c = cutoff.min(self.cutoff) as i64;
        for n1 in -c..=c {
            for n2 in -c..=c {
                let m = Mode::new(n1, n2);
                let i = out.index(m);
                out.coeff[i] = self.coeff[self.index(m)];
            }
        }
        out
    }

    /// Sharp projection `Π_{≤M}` onto `|n|_∞ ≤ M`; `M = −1` gives zero.
    pub fn project_square(&self, m: i64) -> SpectralField {
        let mut out = self.clone();
        if m >= self.cutoff as i64 {
            return out;
        }
        for i in 0..out.coeff.len() {
            if out.mode_at(i).sup_norm() > m {
                out.coeff[i] = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// `Π_{>M} f = f − Π_{≤M} f`.
    pub fn project_above(&self, m: i64) -> SpectralField {
        let mut out = self.clone();
        for i in 0..out.coeff.len() {
            if out.mode_at(i).sup_norm() <= m {
                out.coeff[i] = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    pub fn apply_multiplier(&self, m: &RadialMultiplier) -> Result<SpectralField> {
        let mut out = self.clone();
        for i in 0..out.coeff.len() {
            let c = out.coeff[i];
            let mode = out.mode_at(i);
            let w = m.symbol(mode.norm_sq());
            if !w.is_finite() {
                if c.norm() == 0.0 {
                    out.coeff[i] = Complex64::new(0.0, 0.0);
                    continue;
                }
                return Err(Error::InvalidMultiplier {
                    n1: mode.n1,
                    n2: mode.n2,
                    value: w,
                });
            }
            out.coeff[i] = c * w;
        }
        debug_assert!(out.is_hermitian(1e-9 * out.max_abs().max(1.0)));
        Ok(out)
    }

    /// Multiply each coefficient by a weight that depends on the mode.
    pub fn map_weights(&self, mut w: impl FnMut(Mode) -> f64) -> SpectralField {
        let mut out = self.clone();
        for i in 0..out.coeff.len() {
            let mode = out.mode_at(i);
            out.coeff[i] *= w(mode);
        }
        out
    }

    /// `⨍ f g = Σ f̂(n) conj ĝ(n)`, over the modes both fields store.
    pub fn inner_product(&self, other: &SpectralField) -> f64 {
        if self.cutoff == other.cutoff {
            return self
                .coeff
                .iter()
                .zip(&other.coeff)
                .map(|(a, b)| a.re * b.re + a.im * b.im)
                .sum();
        }
        let c = self.cutoff.min(other.cutoff) as i64;
        let mut acc = 0.0;
        for n1 in -c..=c {
            for n2 in -c..=c {
                let m = Mode::new(n1, n2);
                let a = self.coeff[self.index(m)];
                let b = other.coeff[other.index(m)];
                acc += a.re * b.re + a.im * b.im;
            }
        }
        acc
    }

    /// `‖f‖_{H^α} = (Σ ⟨n⟩^{2α} |f̂(n)|²)^{1/2}`.
    pub fn sobolev_norm(&self, alpha: f64) -> f64 {
        self.coeff
            .iter()
            .enumerate()
            .map(|(i, c)| (1.0 + self.mode_at(i).norm_sq()).powf(alpha) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeff.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Zero-mode coefficient, i.e. `⨍ f`.
    pub fn mean(&self) -> f64 {
        self.coeff[self.index(Mode::ZERO)].re
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeff.iter_mut().for_each(|c| *c *= a);
        out
    }

    /// `self += a · other`, where `other` may have any cutoff up to `self`'s.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        if self.cutoff == other.cutoff {
            for (x, y) in self.coeff.iter_mut().zip(&other.coeff) {
                *x += y * a;
            }
            return;
        }
        assert!(
            other.cutoff <= self.cutoff,
            "axpy: cutoff {} does not fit in {}",
            other.cutoff,
            self.cutoff
        );
        for i in 0..other.coeff.len() {
            let j = self.index(other.mode_at(i));
            self.coeff[j] += other.coeff[i] * a;
        }
    }

    fn combine(&self, other: &SpectralField, sign: f64) -> SpectralField {
        let cutoff = self.cutoff.max(other.cutoff);
        let mut out = self.resized(cutoff);
        out.axpy(sign, other);
        out
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.combine(rhs, -1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scaled(rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        self.axpy(-1.0, rhs);
    }
}

/// The first-order variable `𝐮 = (u, ∂ₜu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub u: SpectralField,
    pub v: SpectralField,
}

impl PhaseState {
    pub fn new(u: SpectralField, v: SpectralField) -> Result<Self> {
        if u.cutoff() != v.cutoff() {
            return Err(Error::Shape(format!(
                "phase state components have cutoffs {} and {}",
                u.cutoff(),
                v.cutoff()
            )));
        }
        Ok(PhaseState { u, v })
    }

    pub fn zeros(cutoff: usize) -> Self {
        PhaseState {
            u: SpectralField::zeros(cutoff),
            v: SpectralField::zeros(cutoff),
        }
    }

    pub fn cutoff(&self) -> usize {
        self.u.cutoff()
    }

    pub fn project_square(&self, m: i64) -> PhaseState {
        PhaseState {
            u: self.u.project_square(m),
            v: self.v.project_square(m),
        }
    }

    pub fn project_above(&self, m: i64) -> PhaseState {
        PhaseState {
            u: self.u.project_above(m),
            v: self.v.project_above(m),
        }
    }

    pub fn resized(&self, cutoff: usize) -> PhaseState {
        PhaseState {
            u: self.u.resized(cutoff),
            v: self.v.resized(cutoff),
        }
    }

    pub fn scaled(&self, a: f64) -> PhaseState {
        PhaseState {
            u: self.u.scaled(a),
            v: self.v.scaled(a),
        }
    }

    pub fn axpy(&mut self, a: f64, other: &PhaseState) {
        self.u.axpy(a, &other.u);
        self.v.axpy(a, &other.v);
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    /// `‖(u,v)‖_{ℋ^α} = (‖u‖²_{H^α} + ‖v‖²_{H^{α−1}})^{1/2}`.
    pub fn energy_norm(&self, alpha: f64) -> f64 {
        (self.u.sobolev_norm(alpha).powi(2) + self.v.sobolev_norm(alpha - 1.0).powi(2)).sqrt()
    }

    /// `⟨x, y⟩ = ⨍ x.u y.u + x.v y.v`.
    pub fn inner_product(&self, other: &PhaseState) -> f64 {
        self.u.inner_product(&other.u) + self.v.inner_product(&other.v)
    }
}

impl Add for &PhaseState {
    type Output = PhaseState;
    fn add(self, rhs: &PhaseState) -> PhaseState {
        PhaseState {
            u: &self.u + &rhs.u,
            v: &self.v + &rhs.v,
        }
    }
}

impl Sub for &PhaseState {
    type Output = PhaseState;
    fn sub(self, rhs: &PhaseState) -> PhaseState {
        PhaseState {
            u: &self.u - &rhs.u,
            v: &self.v - &rhs.v,
        }
    }
}
