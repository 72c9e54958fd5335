//! Built-in self checks. The quick tier is exact identities on small
//! problems; the full tier adds short Monte Carlo runs.

use num_complex::Complex64;
use serde::Serialize;

use sdnlw::besov::{paraproduct, Paraproduct};
use sdnlw::dynamics::{energy_rate_fd, propagate_linear, Damping};
use sdnlw::functionals::{bracket_he, energy, grad_energy, grad_hamiltonian, poisson_bracket, q_renorm, sigma};
use sdnlw::gaussian::{sample_mu, sample_mu_position, MeasureSpec};
use sdnlw::lab::{linear_invariance_test, partition_estimate, InvarianceConfig, PartitionConfig, Potential};
use sdnlw::parallel::{map_collect, with_threads};
use sdnlw::spectral::snapshot::{read_phase_all, write_phase};
use sdnlw::spectral::{cubic_product, dealiased_product, Mode};
use sdnlw::{PhaseState, RadialMultiplier, RngStream, SpectralField};

use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

fn below(name: &str, value: f64, tolerance: f64) -> Check {
    Check {
        name: name.into(),
        passed: value <= tolerance,
        value,
        tolerance,
        detail: format!("{value:.3e} (tol {tolerance:.0e})"),
    }
}

fn state(n: usize, seed: u64) -> PhaseState {
    sample_mu(&MeasureSpec::new(0.8, n), &RngStream::new(seed, 3)).scaled(3.0)
}

fn max_diff(a: &PhaseState, b: &PhaseState) -> f64 {
    (&a.u - &b.u).max_abs().max((&a.v - &b.v).max_abs())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Textbook double sum over the two input squares.
fn direct_product(f: &SpectralField, g: &SpectralField) -> SpectralField {
    let (n, m) = (f.cutoff() as i64, g.cutoff() as i64);
    let mut out = SpectralField::zeros((n + m) as usize);
    let mut raw = vec![Complex64::new(0.0, 0.0); out.coeffs().len()];
    for a in f.modes() {
        for b in g.modes() {
            let k = Mode::new(a.n1 + b.n1, a.n2 + b.n2);
            raw[out.index(k)] += f.get(a) * g.get(b);
        }
    }
    out = SpectralField::from_coeffs(out.cutoff(), raw).expect("product of real fields");
    out
}

fn quick_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let x = state(4, 1);

    out.push(below("propagator S(0) = I", max_diff(&propagate_linear(&x, 0.0, Damping::Damped), &x), 0.0));
    let a = propagate_linear(&propagate_linear(&x, 0.3, Damping::Damped), 0.9, Damping::Damped);
    let b = propagate_linear(&x, 1.2, Damping::Damped);
    out.push(below("propagator semigroup", max_diff(&a, &b), 1e-12));

    let f = state(5, 2).u;
    let g = state(5, 3).u;
    let mut sum = SpectralField::zeros(10);
    for kind in [Paraproduct::LowHigh, Paraproduct::Resonant, Paraproduct::HighLow] {
        sum += &paraproduct(&f, &g, kind);
    }
    let fg = dealiased_product(&[&f, &g], 10);
    out.push(below("paraproduct trichotomy", (&sum - &fg).max_abs() / fg.max_abs(), 1e-10));

    let (s, n) = (0.7, 4);
    let (u, w) = (state(n, 4).u, state(n, 5).u);
    let br = RadialMultiplier::Bracket(s);
    let (au, aw) = (u.apply_multiplier(&br).unwrap(), w.apply_multiplier(&br).unwrap());
    let mut rhs = q_renorm(&u, s, n);
    rhs.axpy(2.0, &dealiased_product(&[&au, &aw], 2 * n));
    rhs.axpy(1.0, &dealiased_product(&[&aw, &aw], 2 * n));
    let lhs = q_renorm(&(&u + &w), s, n);
    out.push(below("Q shift identity", (&lhs - &rhs).max_abs() / lhs.max_abs(), 1e-12));

    let two_way = energy(&x, 1.0, 4).map(|r| rel(r.energy, r.gaussian + r.r_potential));
    out.push(below("energy two ways", two_way.unwrap_or(f64::INFINITY), 1e-10));

    let gh = grad_hamiltonian(&x, 4);
    out.push(below("{H,H} = 0", poisson_bracket(&gh, &gh).abs() / gh.inner_product(&gh), 1e-14));

    let mut worst = 0.0f64;
    for n in 1..=3 {
        let f = state(n, 10 + n as u64).u;
        let cube = cubic_product(&f, &f, &f, 3 * n).unwrap();
        let direct = direct_product(&direct_product(&f, &f), &f);
        worst = worst.max((&cube - &direct).max_abs() / direct.max_abs());
    }
    out.push(below("cubic product vs direct sum", worst, 1e-10));

    out.push(below("sigma_0 = 1", (sigma(0) - 1.0).abs(), 1e-15));
    out.push(below("sigma_1 = 13/3", (sigma(1) - 13.0 / 3.0).abs(), 1e-14));

    let (s, n, eps) = (1.0, 4, 1e-5);
    let y = state(n, 20);
    let h = state(n, 21);
    let e = |z: &PhaseState| energy(z, s, n).map(|r| r.energy).unwrap_or(f64::NAN);
    let fd = (e(&(&y + &h.scaled(eps))) - e(&(&y - &h.scaled(eps)))) / (2.0 * eps);
    out.push(below("energy gradient vs differences", rel(fd, grad_energy(&y, s, n).inner_product(&h)), 1e-6));

    let mut buf = Vec::new();
    write_phase(&mut buf, &x, 1.0).unwrap();
    write_phase(&mut buf, &y, 1.0).unwrap();
    let back = read_phase_all(&mut buf.as_slice()).unwrap();
    let ok = back.len() == 2 && back[0].1 == x && back[1].1 == y;
    out.push(below("snapshot round trip", if ok { 0.0 } else { 1.0 }, 0.0));

    let sums = |k| {
        with_threads(k, || {
            map_collect(300, |i| Ok(sample_mu_position(2.0, 3, &RngStream::new(5, i)).l2_norm())).unwrap()
        })
    };
    let same = sums(1) == sums(3);
    out.push(below("thread-count independence", if same { 0.0 } else { 1.0 }, 0.0));
    out
}

fn full_checks() -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let (s, n) = (1.0, 4);
    let mut worst = 0.0f64;
    for seed in 0..5 {
        let x = state(n, 30 + seed);
        worst = worst.max(rel(energy_rate_fd(&x, s, n, 1e-4)?, bracket_he(&x, s, n)?));
    }
    out.push(below("bracket vs flow", worst, 1e-4));

    let r = linear_invariance_test(&InvarianceConfig {
        s: 1.0,
        cutoff: 3,
        dt: 0.1,
        horizon: 1.0,
        samples: 4000,
        seed: 1,
    })?;
    let frac = r.variance_fraction_within_3.min(r.cross_fraction_within_3);
    out.push(Check {
        name: "linear invariance".into(),
        passed: frac >= 0.9,
        value: frac,
        tolerance: 0.9,
        detail: format!("fraction of |z| ≤ 3: {frac:.3}"),
    });

    let p = partition_estimate(&PartitionConfig {
        s: 1.0,
        cutoff: 2,
        samples: 4000,
        seed: 1,
        potential: Potential::Renormalized,
    })?;
    out.push(Check {
        name: "partition Jensen".into(),
        passed: p.jensen_holds && p.z.mean > 0.0,
        value: p.log_z.mean,
        tolerance: -p.mean_potential.mean,
        detail: format!("log Z {:.3} ≥ −E[R] {:.3}", p.log_z.mean, -p.mean_potential.mean),
    });
    Ok(out)
}

pub fn run(quick: bool) -> Result<Vec<Check>, CliError> {
    let mut checks = quick_checks();
    if !quick {
        checks.extend(full_checks()?);
    }
    Ok(checks)
}
