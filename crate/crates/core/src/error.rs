use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid multiplier: symbol evaluates to {value} at mode ({n1}, {n2})")]
    InvalidMultiplier { n1: i64, n2: i64, value: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("noise kernel is not positive semidefinite at mode ({n1}, {n2}): eigenvalue {eigenvalue:e}")]
    KernelFactorization { n1: i64, n2: i64, eigenvalue: f64 },

    #[error("blow-up: non-finite coefficient after step {step}{}", sample.map(|s| format!(" (sample {s})")).unwrap_or_default())]
    BlowUp { step: u64, sample: Option<u64> },

    #[error("internal consistency check `{check}` failed: relative error {rel_err:e} exceeds {tol:e}")]
    Inconsistency {
        check: &'static str,
        rel_err: f64,
        tol: f64,
    },

    #[error("optimizer diverged on sample {sample}: objective {value:e} above ceiling {ceiling:e}")]
    OptimizerDiverged { sample: u64, value: f64, ceiling: f64 },

    #[error("degenerate importance weights: effective sample size {ess:.1} below floor {floor:.1}")]
    DegenerateWeights { ess: f64, floor: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed snapshot: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::KernelFactorization { .. }
                | Error::BlowUp { .. }
                | Error::Inconsistency { .. }
                | Error::OptimizerDiverged { .. }
                | Error::DegenerateWeights { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
