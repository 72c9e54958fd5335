//! Energies, renormalized potentials, gradients and Poisson brackets of the
//! truncated system.
//!
//! Every argument is first projected to `Π_{≤N}`; all products go through the
//! dealiased Fourier product, so quartic integrals are exact.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::{cubic_product, dealiased_product, Mode, PhaseState, RadialMultiplier, SpectralField};
use crate::{Error, Result};

/// Relative tolerance for the internal two-way consistency checks.
pub const CONSISTENCY_TOL: f64 = 1e-10;

/// `σ_N = Σ_{|n|_∞≤N} ⟨n⟩^{−2}`.
pub fn sigma(n: usize) -> f64 {
    let n = n as i64;
    let mut rows = Vec::with_capacity((2 * n + 1) as usize);
    for n1 in -n..=n {
        let row: f64 = (-n..=n)
            .map(|n2| 1.0 / (1.0 + (n1 * n1 + n2 * n2) as f64))
            .sum();
        rows.push(row);
    }
    crate::parallel::pairwise_sum(&rows)
}

fn bracket_pow(f: &SpectralField, a: f64) -> SpectralField {
    f.apply_multiplier(&RadialMultiplier::Bracket(a))
        .expect("finite symbol")
}

/// Truncated field plus the pieces every functional reuses.
struct Pieces {
    n: usize,
    sigma: f64,
    u: SpectralField,
    /// `⟨∇⟩^s Π_{≤N}u`
    a: SpectralField,
}

impl Pieces {
    fn new(u: &SpectralField, s: f64, n: usize) -> Self {
        let u = u.resized(n);
        let a = bracket_pow(&u, s);
        Pieces {
            n,
            sigma: sigma(n),
            u,
            a,
        }
    }

    /// `Q_{s,N}(u)`, cutoff `2N`.
    fn q(&self) -> SpectralField {
        let mut q = dealiased_product(&[&self.a, &self.a], 2 * self.n);
        q.set_pair(Mode::ZERO, Complex64::new(q.mean() - self.sigma, 0.0));
        q
    }

    fn cube(&self) -> SpectralField {
        cubic_product(&self.u, &self.u, &self.u, self.n).expect("shared cutoff")
    }

    /// `Π(⟨∇⟩^s u · u²)`
    fn a_uu(&self) -> SpectralField {
        cubic_product(&self.a, &self.u, &self.u, self.n).expect("shared cutoff")
    }

    /// `Π(Q u) = Π((⟨∇⟩^s u)² u) − σ_N u`
    fn q_u(&self) -> SpectralField {
        let mut out = cubic_product(&self.a, &self.a, &self.u, self.n).expect("shared cutoff");
        out.axpy(-self.sigma, &self.u);
        out
    }
}

/// `Q_{s,N}(u) = (⟨∇⟩^s Π_{≤N}u)² − σ_N`, band-limited to `2N`.
pub fn q_renorm(u: &SpectralField, s: f64, n: usize) -> SpectralField {
    Pieces::new(u, s, n).q()
}

/// `H_N = ½⨍(u² + |∇u|² + v²) + ¼⨍u⁴` on `Π_{≤N}(u, v)`.
pub fn hamiltonian(x: &PhaseState, n: usize) -> f64 {
    let u = x.u.resized(n);
    let v = x.v.resized(n);
    let u2 = dealiased_product(&[&u, &u], 2 * n);
    0.5 * (u.sobolev_norm(1.0).powi(2) + v.l2_norm().powi(2)) + 0.25 * u2.inner_product(&u2)
}

/// `R_{s,N}(u) = (3/2)⨍ Q_{s,N}(u)(Π_{≤N}u)² + ¼⨍(Π_{≤N}u)⁴`.
pub fn r_potential(u: &SpectralField, s: f64, n: usize) -> f64 {
    let p = Pieces::new(u, s, n);
    let u2 = dealiased_product(&[&p.u, &p.u], 2 * n);
    1.5 * p.q().inner_product(&u2) + 0.25 * u2.inner_product(&u2)
}

/// `G_s(Πu, Πv) = ½‖Πu‖²_{H^{s+1}} + ½‖Πv‖²_{H^s}`.
pub fn gaussian_energy(x: &PhaseState, s: f64, n: usize) -> f64 {
    0.5 * (x.u.resized(n).sobolev_norm(s + 1.0).powi(2) + x.v.resized(n).sobolev_norm(s).powi(2))
}

/// `𝓔_{s,N} = ½‖m(∇)⟨∇⟩u‖² + ½‖m(∇)v‖² + (3/2)⨍Q_{s,N}(u)u²`.
pub fn modified_energy(x: &PhaseState, s: f64, n: usize) -> f64 {
    let p = Pieces::new(&x.u, s, n);
    let gap = RadialMultiplier::WickGap(s);
    let mu = bracket_pow(&p.u, 1.0).apply_multiplier(&gap).expect("finite symbol");
    let mv = x.v.resized(n).apply_multiplier(&gap).expect("finite symbol");
    let u2 = dealiased_product(&[&p.u, &p.u], 2 * n);
    0.5 * (mu.l2_norm().powi(2) + mv.l2_norm().powi(2)) + 1.5 * p.q().inner_product(&u2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub s: f64,
    pub cutoff: usize,
    pub sigma_n: f64,
    pub hamiltonian: f64,
    pub r_potential: f64,
    /// `G_s(Πu, Πv)`
    pub gaussian: f64,
    /// `𝓔_{s,N}`
    pub modified: f64,
    /// `E_{s,N} = 𝓔_{s,N} + H_N`
    pub energy: f64,
    /// `{H, E_{s,N}}`
    pub bracket: f64,
}

fn check(check: &'static str, a: f64, b: f64, scale: f64) -> Result<()> {
    let rel_err = (a - b).abs() / scale.max(f64::MIN_POSITIVE);
    if rel_err > CONSISTENCY_TOL {
        return Err(Error::Inconsistency {
            check,
            rel_err,
            tol: CONSISTENCY_TOL,
        });
    }
    Ok(())
}

/// All scalar functionals at `x`, with `E = 𝓔 + H` checked against `G_s + R`.
pub fn energy(x: &PhaseState, s: f64, n: usize) -> Result<FunctionalReport> {
    let h = hamiltonian(x, n);
    let r = r_potential(&x.u, s, n);
    let g = gaussian_energy(x, s, n);
    let m = modified_energy(x, s, n);
    check("E = G + R", m + h, g + r, g + h + r.abs() + m.abs())?;
    Ok(FunctionalReport {
        s,
        cutoff: n,
        sigma_n: sigma(n),
        hamiltonian: h,
        r_potential: r,
        gaussian: g,
        modified: m,
        energy: m + h,
        bracket: bracket_he(x, s, n)?,
    })
}

/// `(∂_u H, ∂_v H) = (⟨∇⟩²u + Π(u³), v)` on `Π_{≤N}`.
pub fn grad_hamiltonian(x: &PhaseState, n: usize) -> PhaseState {
    let u = x.u.resized(n);
    let mut gu = bracket_pow(&u, 2.0);
    gu.axpy(1.0, &cubic_product(&u, &u, &u, n).expect("shared cutoff"));
    PhaseState {
        u: gu,
        v: x.v.resized(n),
    }
}

/// `∂_u R_{s,N} = 3⟨∇⟩^s Π(⟨∇⟩^s u · u²) + 3Π(Q u) + Π(u³)`.
pub fn grad_r(u: &SpectralField, s: f64, n: usize) -> SpectralField {
    let p = Pieces::new(u, s, n);
    let mut g = bracket_pow(&p.a_uu(), s).scaled(3.0);
    g.axpy(3.0, &p.q_u());
    g.axpy(1.0, &p.cube());
    g
}

/// `(∂_u E_{s,N}, ∂_v E_{s,N}) = (⟨∇⟩^{2s+2}u + ∂_u R, ⟨∇⟩^{2s}v)`, the
/// gradient for the pairing `⨍ f g`.
pub fn grad_energy(x: &PhaseState, s: f64, n: usize) -> PhaseState {
    let u = x.u.resized(n);
    let mut gu = bracket_pow(&u, 2.0 * s + 2.0);
    gu.axpy(1.0, &grad_r(&u, s, n));
    PhaseState {
        u: gu,
        v: bracket_pow(&x.v.resized(n), 2.0 * s),
    }
}

/// `(∂_u 𝓔_{s,N}, ∂_v 𝓔_{s,N})`.
pub fn grad_modified_energy(x: &PhaseState, s: f64, n: usize) -> PhaseState {
    &grad_energy(x, s, n) - &grad_hamiltonian(x, n)
}

/// `{F, G} = ⟨∂_v F, ∂_u G⟩ − ⟨∂_u F, ∂_v G⟩` from the two gradients.
pub fn poisson_bracket(grad_f: &PhaseState, grad_g: &PhaseState) -> f64 {
    grad_f.v.inner_product(&grad_g.u) - grad_f.u.inner_product(&grad_g.v)
}

/// `𝒲(u) = 3Π(⟨∇⟩^s u · u²) − ⟨∇⟩^{−s}(⟨∇⟩^{2s} − 1)Π(u³) + 3⟨∇⟩^{−s}Π(Q u)`,
/// so that `{H, E_{s,N}} = ⟨⟨∇⟩^s v, 𝒲(u)⟩`.
pub fn w_field(u: &SpectralField, s: f64, n: usize) -> SpectralField {
    let p = Pieces::new(u, s, n);
    let mut rest = p
        .cube()
        .apply_multiplier(&RadialMultiplier::WickGapSquared(s))
        .expect("finite symbol")
        .scaled(-1.0);
    rest.axpy(3.0, &p.q_u());
    let mut w = p.a_uu().scaled(3.0);
    w.axpy(1.0, &bracket_pow(&rest, -s));
    w
}

/// `⟨v, 3⟨∇⟩^s Π(⟨∇⟩^s u·u²) − (⟨∇⟩^{2s} − 1)Π(u³) + 3Π(Q u)⟩`.
fn bracket_direct(x: &PhaseState, s: f64, n: usize) -> f64 {
    let p = Pieces::new(&x.u, s, n);
    let mut g = bracket_pow(&p.a_uu(), s).scaled(3.0);
    g.axpy(
        -1.0,
        &p.cube()
            .apply_multiplier(&RadialMultiplier::WickGapSquared(s))
            .expect("finite symbol"),
    );
    g.axpy(3.0, &p.q_u());
    x.v.resized(n).inner_product(&g)
}

/// `{H, E_{s,N}} = {H, 𝓔_{s,N}}`, evaluated directly and in the `𝒲` form;
/// the two must agree to [`CONSISTENCY_TOL`].
///
/// The `(⟨∇⟩^{2s} − 1)` in front of `u³` comes from pairing `∂_u H ∋ u³`
/// against `∂_v 𝓔 = (⟨∇⟩^{2s} − 1)v`.
pub fn bracket_he(x: &PhaseState, s: f64, n: usize) -> Result<f64> {
    let direct = bracket_direct(x, s, n);
    let vs = bracket_pow(&x.v.resized(n), s);
    let wform = vs.inner_product(&w_field(&x.u, s, n));
    let scale = bracket_scale(x, s, n);
    check("bracket forms", direct, wform, scale)?;
    Ok(direct)
}

/// Sum of absolute values of the bracket's three pairings; a scale for
/// relative comparisons that does not collapse when the terms cancel.
pub fn bracket_scale(x: &PhaseState, s: f64, n: usize) -> f64 {
    let p = Pieces::new(&x.u, s, n);
    let v = x.v.resized(n);
    let t1 = v.inner_product(&bracket_pow(&p.a_uu(), s)).abs() * 3.0;
    let t2 = v
        .inner_product(
            &p.cube()
                .apply_multiplier(&RadialMultiplier::WickGapSquared(s))
                .expect("finite symbol"),
        )
        .abs();
    let t3 = v.inner_product(&p.q_u()).abs() * 3.0;
    t1 + t2 + t3
}

/// The pairing with `−⟨∇⟩^{2s}(u³)` in place of `−(⟨∇⟩^{2s} − 1)(u³)`; differs
/// from [`bracket_he`] by `⟨v, Π(u³)⟩`. Kept for comparison only.
pub fn bracket_he_without_cubic_correction(x: &PhaseState, s: f64, n: usize) -> f64 {
    let u = x.u.resized(n);
    let cube = cubic_product(&u, &u, &u, n).expect("shared cutoff");
    bracket_direct(x, s, n) - x.v.resized(n).inner_product(&cube)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{rk4_reference, Damping};
    use crate::gaussian::{sample_mu, MeasureSpec};
    use crate::rng::RngStream;

    fn state(n: usize, seed: u64) -> PhaseState {
        sample_mu(&MeasureSpec::new(0.6, n), &RngStream::new(seed, 7))
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn sigma_small_values() {
        assert_eq!(sigma(0), 1.0);
        assert!((sigma(1) - 13.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sigma_grows_like_two_pi_log() {
        let ns: Vec<usize> = (4..=9).map(|k| 1usize << k).collect();
        let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = ns.iter().map(|&n| sigma(n)).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / 6.0, ys.iter().sum::<f64>() / 6.0);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        assert!(rel(slope, 2.0 * std::f64::consts::PI) < 0.02, "{slope}");
    }

    #[test]
    fn constants() {
        let mut x = PhaseState::zeros(1);
        x.u = SpectralField::constant(1, 1.0);
        assert!((hamiltonian(&x, 1) - 0.75).abs() < 1e-15);
        assert!((r_potential(&x.u, 1.0, 1) + 4.75).abs() < 1e-13);
        let q = q_renorm(&SpectralField::zeros(3), 1.0, 3);
        assert_eq!(q.mean(), -sigma(3));
        assert_eq!(q.cutoff(), 6);
        assert_eq!(hamiltonian(&PhaseState::zeros(3), 3), 0.0);
        assert_eq!(r_potential(&SpectralField::zeros(3), 1.0, 3), 0.0);
    }

    #[test]
    fn pure_velocity_energy() {
        let mut x = state(4, 1);
        x.u = SpectralField::zeros(4);
        let s = 0.8;
        let expect: f64 = 0.5
            * x.v
                .modes()
                .map(|m| ((1.0 + m.norm_sq()).powf(s) - 1.0) * x.v.get(m).norm_sqr())
                .sum::<f64>();
        assert!(rel(modified_energy(&x, s, 4), expect) < 1e-13);
        assert_eq!(bracket_he(&x, s, 4).unwrap(), 0.0);
    }

    #[test]
    fn energy_two_ways() {
        for seed in 0..10 {
            let x = state(6, seed).scaled(1.0 + seed as f64 * 0.3);
            let r = energy(&x, 1.0, 6).unwrap();
            assert!(rel(r.energy, r.gaussian + r.r_potential) < 1e-10);
        }
    }

    #[test]
    fn q_shift_identity() {
        let (s, n) = (0.7, 5);
        let u = state(n, 2).u;
        let w = state(n, 3).u;
        let (au, aw) = (bracket_pow(&u, s), bracket_pow(&w, s));
        let mut rhs = q_renorm(&u, s, n);
        rhs.axpy(2.0, &dealiased_product(&[&au, &aw], 2 * n));
        rhs.axpy(1.0, &dealiased_product(&[&aw, &aw], 2 * n));
        let lhs = q_renorm(&(&u + &w), s, n);
        assert!((&lhs - &rhs).max_abs() < 1e-13);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (s, n, eps) = (1.0, 4, 1e-5);
        for seed in 0..5 {
            let x = state(n, seed).scaled(2.0);
            let h = state(n, 100 + seed);
            let g = grad_energy(&x, s, n);
            let e = |y: &PhaseState| energy(y, s, n).unwrap().energy;
            let fd = (e(&(&x + &h.scaled(eps))) - e(&(&x - &h.scaled(eps)))) / (2.0 * eps);
            assert!(rel(fd, g.inner_product(&h)) < 1e-6, "{fd} {}", g.inner_product(&h));
        }
    }

    #[test]
    fn velocity_gradient_on_pure_velocity_state() {
        let mut x = state(3, 4);
        x.u = SpectralField::zeros(3);
        let g = grad_energy(&x, 0.9, 3);
        assert_eq!(g.v, bracket_pow(&x.v, 1.8));
        assert_eq!(g.u, SpectralField::zeros(3));
    }

    #[test]
    fn bracket_agrees_with_generic_poisson_bracket() {
        let (s, n) = (1.0, 5);
        for seed in 0..5 {
            let x = state(n, seed).scaled(1.5);
            let b = bracket_he(&x, s, n).unwrap();
            let generic = poisson_bracket(&grad_hamiltonian(&x, n), &grad_modified_energy(&x, s, n));
            assert!(rel(b, generic) < 1e-10, "{b} {generic}");
            let hh = poisson_bracket(&grad_hamiltonian(&x, n), &grad_hamiltonian(&x, n));
            assert!(hh.abs() < 1e-12 * grad_hamiltonian(&x, n).energy_norm(0.0).powi(2));
        }
    }

    #[test]
    fn energy_derivative_along_hamiltonian_flow_is_bracket() {
        // dE/dt = +{H, E} along u̇ = ∂_v H, v̇ = −∂_u H.
        let (s, n, dt) = (1.0, 4, 1e-4);
        let x = state(n, 9).scaled(1.5);
        let fwd = rk4_reference(&x, n, dt, 4, true, Damping::Undamped);
        let bwd = rk4_reference(&x, n, -dt, 4, true, Damping::Undamped);
        let e = |y: &PhaseState| energy(y, s, n).unwrap().energy;
        let fd = (e(&fwd) - e(&bwd)) / (2.0 * dt);
        let b = bracket_he(&x, s, n).unwrap();
        assert!(rel(fd, b) < 1e-5, "{fd} vs {b}");
        let without = bracket_he_without_cubic_correction(&x, s, n);
        assert!(rel(fd, without) > 1e-3);
    }

    #[test]
    fn w_field_vanishes_at_zero() {
        assert_eq!(w_field(&SpectralField::zeros(4), 1.0, 4), SpectralField::zeros(4));
    }
}
