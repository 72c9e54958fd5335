use num_complex::Complex64;
use proptest::prelude::*;

use sdnlw::besov::{lp_block, lp_blocks, paraproduct, Paraproduct};
use sdnlw::dynamics::{propagate_linear, Damping};
use sdnlw::functionals::{energy, grad_hamiltonian, poisson_bracket, q_renorm};
use sdnlw::gaussian::{sample_mu, MeasureSpec};
use sdnlw::lab::stats::{ess, normalized_weights};
use sdnlw::parallel::{map_collect, with_threads};
use sdnlw::spectral::{dealiased_product, half_lattice, Mode};
use sdnlw::{PhaseState, RadialMultiplier, RngStream, SpectralField};

fn field_from(cutoff: usize, vals: &[(f64, f64)]) -> SpectralField {
    let mut f = SpectralField::zeros(cutoff);
    for (m, &(re, im)) in half_lattice(cutoff).into_iter().zip(vals) {
        let im = if m == Mode::ZERO { 0.0 } else { im };
        f.set_pair(m, Complex64::new(re, im));
    }
    f
}

fn field(max_cutoff: usize) -> impl Strategy<Value = SpectralField> {
    (0..=max_cutoff).prop_flat_map(|n| {
        let k = half_lattice(n).len();
        prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), k).prop_map(move |v| field_from(n, &v))
    })
}

fn pair_at(n: usize) -> impl Strategy<Value = (SpectralField, SpectralField)> {
    let k = half_lattice(n).len();
    let v = || prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), k);
    (v(), v()).prop_map(move |(a, b)| (field_from(n, &a), field_from(n, &b)))
}

fn multiplier() -> impl Strategy<Value = RadialMultiplier> {
    prop_oneof![
        (-3.0..3.0f64).prop_map(RadialMultiplier::Bracket),
        (-3.0..3.0f64).prop_map(RadialMultiplier::Shifted),
        (0.1..2.0f64).prop_map(RadialMultiplier::WickGap),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operations_keep_hermitian_symmetry(f in field(4), m in multiplier(), cut in 0i64..5) {
        prop_assert!(f.apply_multiplier(&m).unwrap().is_hermitian(1e-12));
        prop_assert!(f.project_square(cut).is_hermitian(0.0));
        prop_assert!(f.project_above(cut).is_hermitian(0.0));
        let sq = dealiased_product(&[&f, &f], 2 * f.cutoff());
        prop_assert!(sq.is_hermitian(1e-10 * sq.max_abs().max(1.0)));
    }

    #[test]
    fn projection_is_idempotent_and_commutes(f in field(4), m in multiplier(), cut in 0i64..5) {
        let p = f.project_square(cut);
        prop_assert_eq!(&p.project_square(cut), &p);
        let a = f.apply_multiplier(&m).unwrap().project_square(cut);
        let b = p.apply_multiplier(&m).unwrap();
        prop_assert!((&a - &b).max_abs() <= 1e-14 * a.max_abs().max(1.0));
    }

    #[test]
    fn parseval(f in field(5)) {
        let a = f.inner_product(&f);
        let b = f.sobolev_norm(0.0).powi(2);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        let grid = sdnlw::spectral::sample_grid(&f, sdnlw::spectral::smooth_len(4 * f.cutoff() + 2));
        let mean_sq = grid.iter().map(|x| x * x).sum::<f64>() / grid.len() as f64;
        prop_assert!((mean_sq - a).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn product_matches_direct_convolution((f, g) in (0usize..=3).prop_flat_map(pair_at)) {
        let n = f.cutoff() as i64;
        let out = dealiased_product(&[&f, &g], 2 * f.cutoff());
        for k1 in -2 * n..=2 * n {
            for k2 in -2 * n..=2 * n {
                let mut c = Complex64::new(0.0, 0.0);
                for a1 in -n..=n {
                    for a2 in -n..=n {
                        let b = Mode::new(k1 - a1, k2 - a2);
                        if b.sup_norm() <= n {
                            c += f.get(Mode::new(a1, a2)) * g.get(b);
                        }
                    }
                }
                prop_assert!((out.get(Mode::new(k1, k2)) - c).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn q_shift_identity((u, w) in (1usize..=4).prop_flat_map(pair_at), s in 0.2..1.5f64) {
        let n = u.cutoff();
        let a = RadialMultiplier::Bracket(s);
        let (au, aw) = (u.apply_multiplier(&a).unwrap(), w.apply_multiplier(&a).unwrap());
        let mut rhs = q_renorm(&u, s, n);
        rhs.axpy(2.0, &dealiased_product(&[&au, &aw], 2 * n));
        rhs.axpy(1.0, &dealiased_product(&[&aw, &aw], 2 * n));
        let lhs = q_renorm(&(&u + &w), s, n);
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-12 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn energy_decompositions_agree((u, v) in (1usize..=4).prop_flat_map(pair_at), s in 0.5..1.5f64) {
        let n = u.cutoff();
        let x = PhaseState::new(u, v).unwrap();
        prop_assert!(energy(&x, s, n).is_ok());
        let g = grad_hamiltonian(&x, n);
        let hh = poisson_bracket(&g, &g);
        prop_assert!(hh.abs() <= 1e-12 * g.inner_product(&g).max(1.0));
    }

    #[test]
    fn littlewood_paley_blocks_reconstruct(f in field(6)) {
        let blocks = lp_blocks(&f);
        let mut sum = SpectralField::zeros(f.cutoff());
        for b in &blocks {
            sum += b;
        }
        prop_assert!((&sum - &f).max_abs() <= 1e-12 * f.max_abs().max(1.0));
        prop_assert_eq!(&lp_block(&f, 0), &blocks[0]);
    }

    #[test]
    fn paraproducts_sum_to_product((f, g) in (1usize..=5).prop_flat_map(pair_at)) {
        let n = f.cutoff();
        let mut sum = SpectralField::zeros(2 * n);
        for kind in [Paraproduct::LowHigh, Paraproduct::Resonant, Paraproduct::HighLow] {
            sum += &paraproduct(&f, &g, kind);
        }
        let fg = dealiased_product(&[&f, &g], 2 * n);
        prop_assert!((&sum - &fg).max_abs() <= 1e-10 * fg.max_abs().max(1.0));
    }

    #[test]
    fn propagator_semigroup(seed in 0u64..1000, n in 0usize..5, t1 in 0.0..3.0f64, t2 in 0.0..3.0f64) {
        let x = sample_mu(&MeasureSpec::new(1.0, n), &RngStream::new(seed, 0));
        for damping in [Damping::Damped, Damping::Undamped] {
            let a = propagate_linear(&propagate_linear(&x, t1, damping), t2, damping);
            let b = propagate_linear(&x, t1 + t2, damping);
            prop_assert!((&a - &b).u.max_abs().max((&a - &b).v.max_abs()) <= 1e-12 * x.u.max_abs().max(x.v.max_abs()).max(1.0));
            prop_assert_eq!(&propagate_linear(&x, 0.0, damping), &x);
        }
    }

    #[test]
    fn samples_are_reproducible_and_hermitian(seed in any::<u64>(), stream in any::<u64>(), n in 0usize..6) {
        let spec = MeasureSpec::new(1.0, n);
        let a = sample_mu(&spec, &RngStream::new(seed, stream));
        prop_assert!(a.u.is_hermitian(0.0) && a.v.is_hermitian(0.0));
        prop_assert_eq!(&a, &sample_mu(&spec, &RngStream::new(seed, stream)));
    }

    #[test]
    fn importance_weights_are_normalized(log_w in prop::collection::vec(-200.0..50.0f64, 1..200)) {
        let w = normalized_weights(&log_w);
        let total: f64 = w.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let e = ess(&w);
        prop_assert!(e >= 1.0 - 1e-9 && e <= log_w.len() as f64 + 1e-9);
    }
}

#[test]
fn parallel_collection_ignores_thread_count() {
    let run = |k| {
        with_threads(k, || {
            map_collect(500, |i| {
                let x = sample_mu(&MeasureSpec::new(1.0, 3), &RngStream::new(9, i));
                Ok(x.u.inner_product(&x.u))
            })
            .unwrap()
        })
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(7));
}
