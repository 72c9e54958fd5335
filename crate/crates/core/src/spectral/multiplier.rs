/// A Fourier multiplier whose symbol depends only on `|n|²`.
#[derive(Debug, Clone, Copy)]
pub enum RadialMultiplier {
    /// `⟨∇⟩^α`, symbol `(1+|n|²)^{α/2}`.
    Bracket(f64),
    /// `⟦∇⟧^β`, symbol `(3/4+|n|²)^{β/2}`.
    Shifted(f64),
    /// `m(∇) = (⟨∇⟩^{2s} − 1)^{1/2}` for the given `s`.
    WickGap(f64),
    /// `(⟨∇⟩^{2s} − 1)`, the square of [`RadialMultiplier::WickGap`].
    WickGapSquared(f64),
    /// Arbitrary symbol as a function of `|n|²`.
    Custom(fn(f64) -> f64),
}

impl RadialMultiplier {
    pub fn symbol(&self, norm_sq: f64) -> f64 {
        match *self {
            RadialMultiplier::Bracket(a) => {
                if a == 0.0 {
                    1.0
                } else {
                    (1.0 + norm_sq).powf(a / 2.0)
                }
            }
            RadialMultiplier::Shifted(b) => (0.75 + norm_sq).powf(b / 2.0),
            RadialMultiplier::WickGap(s) => wick_gap_sq(s, norm_sq).sqrt(),
            RadialMultiplier::WickGapSquared(s) => wick_gap_sq(s, norm_sq),
            RadialMultiplier::Custom(f) => f(norm_sq),
        }
    }
}

fn wick_gap_sq(s: f64, norm_sq: f64) -> f64 {
    // ⟨0⟩ = 1 exactly, so the zero mode is exactly 0 rather than round-off.
    if norm_sq == 0.0 {
        0.0
    } else {
        (1.0 + norm_sq).powf(s) - 1.0
    }
}
