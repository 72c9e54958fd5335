//! Spectral Galerkin simulation of the stochastic damped cubic wave equation
//!
//! ```text
//! ∂ₜ²u + ∂ₜu + u − Δu + u³ = √2 ⟨∇⟩⁻ˢ ξ      on 𝕋² = (ℝ/2πℤ)²
//! ```
//!
//! together with the Gaussian measures it leaves (quasi-)invariant, the
//! renormalized energy functionals that control its transported densities,
//! a Littlewood–Paley toolkit and a Monte Carlo lab that checks the
//! identities and uniform bounds at finite truncation.
//!
//! Conventions used throughout:
//!
//! * Fields are truncated Fourier series in the basis `e^{in·x}`, `n ∈ ℤ²`,
//!   and the torus carries the *normalized* measure (`⨍ 1 = 1`). Parseval
//!   therefore reads `⨍|f|² = Σ|f̂(n)|²` with no volume factors.
//! * Truncation `Π_{≤N}` is the sharp square cutoff `|n|_∞ ≤ N`.
//! * `⟨n⟩ = (1+|n|²)^{1/2}` and `⟦n⟧ = (3/4+|n|²)^{1/2}`.

pub mod besov;
pub mod dynamics;
pub mod error;
pub mod functionals;
pub mod gaussian;
pub mod lab;
pub mod parallel;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use spectral::{Mode, PhaseState, RadialMultiplier, SpectralField};
