use super::*;
use crate::gaussian::{sample_mu, MeasureSpec};
use crate::parallel::{map_collect, with_threads};
use crate::rng::RngStream;
use crate::spectral::{Mode, SpectralField};

fn noiseless(s: f64, n: usize, dt: f64, horizon: f64) -> FlowConfig {
    FlowConfig {
        noise: false,
        ..FlowConfig::new(s, n, dt, horizon)
    }
}

fn random_state(n: usize, seed: u64, scale: f64) -> PhaseState {
    sample_mu(&MeasureSpec::new(0.5, n), &RngStream::new(seed, 0)).scaled(scale)
}

fn dist(a: &PhaseState, b: &PhaseState) -> f64 {
    (a - b).energy_norm(0.0)
}

#[test]
fn linear_noiseless_step_is_the_propagator() {
    let x = random_state(5, 1, 1.0);
    let cfg = FlowConfig {
        cubic: false,
        ..noiseless(1.0, 5, 0.03, 0.03)
    };
    let y = step_truncated(&x, &cfg, &RngStream::new(0, 0)).unwrap();
    assert!(dist(&y, &propagate_linear(&x, 0.03, Damping::Damped)) < 1e-14);
}

fn local_defect(x: &PhaseState, n: usize, dt: f64) -> f64 {
    let cfg = noiseless(1.0, n, dt, dt);
    let y = step_truncated(x, &cfg, &RngStream::new(0, 0)).unwrap();
    let r = rk4_reference(x, n, dt, 400, true, Damping::Damped);
    dist(&y, &r)
}

#[test]
fn strang_local_defect_is_third_order_scalar() {
    let mut x = PhaseState::zeros(0);
    x.u = SpectralField::constant(0, 1.5);
    x.v = SpectralField::constant(0, -0.7);
    let (e1, e2) = (local_defect(&x, 0, 0.1), local_defect(&x, 0, 0.05));
    let order = (e1 / e2).log2();
    assert!(order > 2.7, "observed local order {order} ({e1:e}, {e2:e})");
}

#[test]
fn strang_local_defect_is_third_order_small_system() {
    let x = random_state(2, 4, 2.0);
    let (e1, e2) = (local_defect(&x, 2, 0.04), local_defect(&x, 2, 0.02));
    let order = (e1 / e2).log2();
    assert!(order > 2.7, "observed local order {order} ({e1:e}, {e2:e})");
}

#[test]
fn lie_step_is_first_order_accurate_only() {
    let x = random_state(2, 4, 2.0);
    let defect = |dt: f64| {
        let cfg = FlowConfig {
            splitting: Splitting::Lie,
            ..noiseless(1.0, 2, dt, dt)
        };
        let y = step_truncated(&x, &cfg, &RngStream::new(0, 0)).unwrap();
        dist(&y, &rk4_reference(&x, 2, dt, 400, true, Damping::Damped))
    };
    let order = (defect(0.04) / defect(0.02)).log2();
    assert!((1.7..2.6).contains(&order), "{order}");
}

#[test]
fn stochastic_semigroup_is_bitwise() {
    let x = random_state(4, 2, 1.0);
    let rng = RngStream::new(9, 17);
    let full = FlowConfig::new(1.0, 4, 0.01, 0.3);
    let first = FlowConfig::new(1.0, 4, 0.01, 0.1);
    let second = FlowConfig::new(1.0, 4, 0.01, 0.2);
    let a = evolve(&x, &full, &rng, 1000).unwrap().pop().unwrap().1;
    let mid = evolve(&x, &first, &rng, 1000).unwrap().pop().unwrap().1;
    let b = evolve(&mid, &second, &rng.advanced(first.steps()), 1000)
        .unwrap()
        .pop()
        .unwrap()
        .1;
    assert_eq!(a, b);
}

#[test]
fn trajectories_do_not_depend_on_worker_count() {
    let cfg = FlowConfig {
        store_cutoff: 6,
        ..FlowConfig::new(1.0, 3, 0.02, 0.2)
    };
    let run = |threads| {
        with_threads(threads, || {
            map_collect(6, |i| {
                let rng = RngStream::new(3, i);
                let x0 = sample_mu(&MeasureSpec::new(1.0, 6), &rng);
                Ok(evolve(&x0, &cfg, &rng.child(1), 5)?.pop().unwrap().1)
            })
            .unwrap()
        })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn high_band_evolves_linearly() {
    let x = random_state(6, 5, 1.0);
    let rng = RngStream::new(1, 1);
    let cfg = FlowConfig {
        store_cutoff: 6,
        ..FlowConfig::new(1.0, 2, 0.01, 0.1)
    };
    let lin = FlowConfig { cubic: false, ..cfg };
    let a = evolve(&x, &cfg, &rng, 100).unwrap().pop().unwrap().1;
    let b = evolve(&x, &lin, &rng, 100).unwrap().pop().unwrap().1;
    assert_eq!(a.project_above(2), b.project_above(2));
    assert!(dist(&a.project_square(2), &b.project_square(2)) > 1e-6);
}

#[test]
fn horizon_rounds_to_whole_steps() {
    let cfg = FlowConfig::new(1.0, 1, 0.03, 0.1);
    assert_eq!(cfg.steps(), 3);
    assert!((cfg.actual_horizon() - 0.09).abs() < 1e-15);
    assert!(FlowConfig::new(1.0, 1, 0.0, 1.0).validate().is_err());
    assert!(FlowConfig::new(1.0, 1, 0.1, -1.0).validate().is_err());
}

#[test]
fn blow_up_reports_step() {
    let mut x = PhaseState::zeros(0);
    x.u = SpectralField::constant(0, 1e200);
    let cfg = noiseless(1.0, 0, 0.1, 1.0);
    let err = evolve(&x, &cfg, &RngStream::new(0, 0), 1).unwrap_err();
    assert!(matches!(err, crate::Error::BlowUp { step: 1, .. }), "{err}");
}

#[test]
fn linear_step_preserves_gaussian_measure() {
    // Per-mode covariance after one large linear step from μ_{s,N}.
    let (s, n, count) = (1.0, 2, 40_000u64);
    let spec = MeasureSpec::new(s, n);
    let cfg = FlowConfig {
        cubic: false,
        ..FlowConfig::new(s, n, 0.7, 0.7)
    };
    let flow = Flow::new(cfg).unwrap();
    let modes = [Mode::ZERO, Mode::new(1, 0), Mode::new(2, -1)];
    let mut acc = vec![[0.0f64; 3]; modes.len()];
    let mut acc_sq = vec![[0.0f64; 3]; modes.len()];
    for i in 0..count {
        let rng = RngStream::new(21, i);
        let mut x = sample_mu(&spec, &rng);
        flow.step(&mut x, 0, Some(&rng.child(1)), 1.0).unwrap();
        for (k, &m) in modes.iter().enumerate() {
            let (a, b) = (x.u.get(m), x.v.get(m));
            let vals = [a.norm_sqr(), b.norm_sqr(), (a * b.conj()).re];
            for j in 0..3 {
                acc[k][j] += vals[j];
                acc_sq[k][j] += vals[j] * vals[j];
            }
        }
    }
    let c = count as f64;
    for (k, &m) in modes.iter().enumerate() {
        let expect = [spec.u_variance(m), spec.v_variance(m), 0.0];
        for j in 0..3 {
            let mean = acc[k][j] / c;
            let se = ((acc_sq[k][j] / c - mean * mean) / c).sqrt();
            assert!(
                (mean - expect[j]).abs() < 4.0 * se,
                "mode {m:?} entry {j}: {mean} vs {} (se {se})",
                expect[j]
            );
        }
    }
}

#[test]
fn propagator_decay_bound() {
    // sup over modes of the operator norm of e^{t/2} D S_n(t) D^{-1} in the
    // weighted basis D = diag(⟨n⟩^α, ⟨n⟩^{α−1}) stays bounded.
    for t in [0.1, 1.0, 10.0] {
        let mut c = 0.0f64;
        for k in 0..=40 {
            let w = (1.0 + (k * k) as f64).sqrt();
            let [a, b, cc, d] = propagator_matrix((k * k) as f64, t, Damping::Damped);
            let m = [a, b * w, cc / w, d];
            let fro = m.iter().map(|x| x * x).sum::<f64>().sqrt();
            c = c.max((t / 2.0).exp() * fro);
        }
        assert!(c < 3.5, "t = {t}: C = {c}");
        let x = random_state(6, 8, 1.0);
        for alpha in [0.0, 0.5, 1.0] {
            let y = propagate_linear(&x, t, Damping::Damped);
            assert!(y.energy_norm(alpha) <= c * (-t / 2.0).exp() * x.energy_norm(alpha) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn remainder_is_zero_without_cubic_term() {
    let x = random_state(6, 3, 1.0);
    let cfg = FlowConfig {
        cubic: false,
        ..FlowConfig::new(1.0, 4, 0.01, 0.1)
    };
    let w = remainder_w(&x, &cfg, &RngStream::new(2, 2), 1).unwrap();
    assert_eq!(w.len(), 11);
    for (_, wt) in w {
        assert_eq!(wt, PhaseState::zeros(4));
    }
}

#[test]
fn remainder_matches_difference_of_flows() {
    let x = random_state(4, 3, 2.0);
    let rng = RngStream::new(2, 5);
    let cfg = FlowConfig::new(1.0, 4, 0.01, 0.1);
    let w = remainder_w(&x, &cfg, &rng, 10).unwrap();
    assert_eq!(w[0].1, PhaseState::zeros(4));
    let a = evolve(&x, &cfg, &rng, 10).unwrap().pop().unwrap().1;
    let b = evolve(&x, &FlowConfig { cubic: false, ..cfg }, &rng, 10)
        .unwrap()
        .pop()
        .unwrap()
        .1;
    assert!(dist(&(&a - &b), &w.last().unwrap().1) < 1e-12);
    assert!(w.last().unwrap().1.energy_norm(0.0) > 1e-4);
}

#[test]
fn decaying_norm_basics() {
    let x = random_state(4, 6, 1.0);
    assert_eq!(decaying_norm_x(&PhaseState::zeros(4), 0.5, &[0.0, 1.0]), 0.0);
    let at0 = decaying_norm_x(&x, 0.5, &[0.0]);
    assert!((at0 - w_norm(&x, 0.5, 4.0)).abs() < 1e-14);
    let coarse = decaying_norm_x(&x, 0.5, &[0.0, 1.0, 2.0]);
    let fine = decaying_norm_x(&x, 0.5, &[0.0, 0.5, 1.0, 1.5, 2.0]);
    assert!(fine >= coarse && coarse >= at0);
}

#[test]
fn w_norm_at_p_two_is_energy_norm() {
    let x = random_state(5, 7, 1.0);
    for alpha in [0.0, 0.5, 1.0] {
        let a = w_norm(&x, alpha, 2.0);
        assert!((a - x.energy_norm(alpha)).abs() < 1e-12 * a);
    }
}
