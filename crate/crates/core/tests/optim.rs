use collapse_lab::linalg::{frobenius_norm, norm2, polar_factor, DenseMatrix};
use collapse_lab::network::ParamLayout;
use collapse_lab::optim::*;
use collapse_lab::rng;
use proptest::prelude::*;
use rand::Rng;

fn m(rows: &[&[f64]]) -> DenseMatrix {
    DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

#[test]
fn adam_direction_examples() {
    let cfg = AdamConfig::default();
    let mut s = AdamState::new(3);
    assert_eq!(adam_direction(&mut s, &[0.0; 3], &cfg), vec![0.0; 3]);

    let mut s = AdamState::new(1);
    let u = adam_direction(&mut s, &[1.0], &cfg);
    assert!(close(u[0], 1.0 / (1.0 + 1e-4), 1e-15));

    let raw = AdamConfig { eta: 0.1, beta1: 0.0, beta2: 0.0, eps: 1e-300 };
    let mut s = AdamState::new(1);
    for _ in 0..5 {
        assert_eq!(adam_direction(&mut s, &[1.0], &raw), vec![1.0]);
    }
}

#[test]
fn preconditioner_tracks_bias_corrected_second_moment() {
    let cfg = AdamConfig::default();
    let mut s = AdamState::new(2);
    assert_eq!(s.preconditioner(&cfg), vec![1.0 / cfg.eps; 2]);
    adam_direction(&mut s, &[2.0, -0.5], &cfg);
    let d = s.preconditioner(&cfg);
    assert!(close(d[0], 1.0 / (2.0 + cfg.eps), 1e-12));
    assert!(close(d[1], 1.0 / (0.5 + cfg.eps), 1e-12));
}

#[test]
fn adam_config_validation() {
    assert!(AdamConfig::default().validate().is_ok());
    assert!(AdamConfig::default().with_eta(0.0).validate().is_err());
    assert!(AdamConfig { beta1: 1.0, ..AdamConfig::default() }.validate().is_err());
    assert!(AdamConfig { eps: 0.0, ..AdamConfig::default() }.validate().is_err());
}

#[test]
fn orth_potential_and_gradient_examples() {
    let q = polar_factor(&m(&[&[1.0, 2.0], &[0.5, -1.0], &[3.0, 0.0]])).unwrap();
    assert!(orth_potential(&q) < 1e-28);
    assert!(frobenius_norm(&orth_gradient(&q)) < 1e-14);
    let w = DenseMatrix::diag(&[2.0, 1.0]);
    assert_eq!(orth_potential(&w), 2.25);
    assert_eq!(orth_gradient(&w), DenseMatrix::diag(&[6.0, 0.0]));
    assert_eq!(orth_potential(&m(&[&[1.0, 1.0]])), 0.25);
}

fn fd_orth_gradient(w: &DenseMatrix, h: f64) -> DenseMatrix {
    let mut x = w.clone();
    DenseMatrix::from_fn(w.rows(), w.cols(), |i, j| {
        let v = x[(i, j)];
        x[(i, j)] = v + h;
        let up = orth_potential(&x);
        x[(i, j)] = v - h;
        let down = orth_potential(&x);
        x[(i, j)] = v;
        (up - down) / (2.0 * h)
    })
}

#[test]
fn orth_gradient_matches_finite_differences_on_all_shapes() {
    let r = &mut rng::seeded(5);
    for (rows, cols) in [(8, 4), (4, 8), (5, 5), (1, 6), (6, 1)] {
        for _ in 0..20 {
            let w = rng::normal_matrix(r, rows, cols).scale(0.5);
            let fd = fd_orth_gradient(&w, 1e-5);
            let err = frobenius_norm(&orth_gradient(&w).sub(&fd)) / frobenius_norm(&fd).max(1e-12);
            assert!(err <= 1e-6, "{rows}x{cols}: rel err {err}");
        }
    }
}

#[test]
fn reference_step_examples() {
    let u = m(&[&[2.0, 0.0]]);
    let r = m(&[&[0.6, 0.8]]);
    assert_eq!(reference_step(&u, &DenseMatrix::zeros(1, 2), 1.0, 1e-8), DenseMatrix::zeros(1, 2));
    assert_eq!(reference_step(&u, &r, 0.0, 1e-8), DenseMatrix::zeros(1, 2));
    let d = reference_step(&u, &r, 1.0, 1e-300);
    assert!(frobenius_norm(&d.sub(&r.scale(2.0))) < 1e-15);
}

#[test]
fn budgeted_scale_examples() {
    let g = m(&[&[1.0, 0.0]]);
    let u = m(&[&[1.0, 0.0]]);
    let orthogonal = m(&[&[0.0, 3.0]]);
    let st = budgeted_scale(&g, &u, &orthogonal, 0.5);
    assert_eq!((st.scale, &st.delta), (1.0, &orthogonal));

    let st = budgeted_scale(&g, &u, &m(&[&[-1.0, 0.0]]), 0.5);
    assert_eq!(st.scale, 0.5);
    assert_eq!(st.delta, m(&[&[-0.5, 0.0]]));
    assert_eq!(st.budget, -0.5);
    assert_eq!(g.frobenius_inner(&st.delta), -0.5);

    let st = budgeted_scale(&g, &u, &m(&[&[-1.0, 2.0]]), 0.0);
    assert_eq!(st.scale, 0.0);
    assert_eq!(g.frobenius_inner(&st.delta), 0.0);
}

fn two_block_layout() -> ParamLayout {
    ParamLayout::sequential(&[("W1", 3, 2, true), ("b1", 3, 1, false), ("W2", 2, 3, true)])
}

#[test]
fn kappa_zero_is_bitwise_adam_over_a_thousand_steps() {
    let layout = two_block_layout();
    let cfg = AdamConfig::default().with_eta(1e-2);
    let orth = OrthConfig { kappa_orth: 0.0, ..OrthConfig::budgeted() };
    let r = &mut rng::seeded(3);
    let mut pa = rng::normal_vec(r, layout.total());
    let mut po = pa.clone();
    let (mut sa, mut so) = (AdamState::new(layout.total()), AdamState::new(layout.total()));
    for _ in 0..1000 {
        let g = rng::normal_vec(r, layout.total());
        pa = adam_step(&pa, &g, &mut sa, &cfg);
        let (next, rep) = adamo_step(&po, &g, &mut so, &cfg, &orth, &layout).unwrap();
        assert!(rep.blocks.is_empty());
        po = next;
    }
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&pa), bits(&po));
    assert_eq!(sa, so);
}

#[test]
fn zero_gradient_leaves_parameters_unchanged() {
    let layout = two_block_layout();
    let p: Vec<f64> = (0..layout.total()).map(|i| i as f64 * 0.3 - 1.0).collect();
    let mut s = AdamState::new(layout.total());
    let (next, rep) =
        adamo_step(&p, &vec![0.0; layout.total()], &mut s, &AdamConfig::default(), &OrthConfig::budgeted(), &layout)
            .unwrap();
    assert_eq!(next, p);
    assert!(rep.r_total > 0.0);
    assert!(rep.blocks.iter().all(|b| frobenius_norm(&b.delta0) == 0.0));
}

#[test]
fn adamo_rejects_bad_layouts_and_configs() {
    let layout = two_block_layout();
    let n = layout.total();
    let mut s = AdamState::new(n);
    let cfg = AdamConfig::default();
    let bad_block = OrthConfig { constrained_blocks: Some(vec!["b1".into()]), ..OrthConfig::budgeted() };
    assert!(adamo_step(&vec![0.0; n], &vec![1.0; n], &mut s, &cfg, &bad_block, &layout).is_err());
    let unknown = OrthConfig { constrained_blocks: Some(vec!["W9".into()]), ..OrthConfig::budgeted() };
    assert!(adamo_step(&vec![0.0; n], &vec![1.0; n], &mut s, &cfg, &unknown, &layout).is_err());
    assert!(adamo_step(&vec![0.0; n - 1], &vec![1.0; n], &mut s, &cfg, &OrthConfig::budgeted(), &layout).is_err());
    assert!(OrthConfig { tau: 1.0, ..OrthConfig::budgeted() }.validate().is_err());
    assert!(OrthConfig { kappa_orth: -1.0, ..OrthConfig::budgeted() }.validate().is_err());
}

#[test]
fn only_selected_blocks_are_corrected() {
    let layout = two_block_layout();
    let n = layout.total();
    let r = &mut rng::seeded(11);
    let p = rng::normal_vec(r, n);
    let g = rng::normal_vec(r, n);
    let orth = OrthConfig { constrained_blocks: Some(vec!["W2".into()]), ..OrthConfig::conflict_free() };
    let mut s = AdamState::new(n);
    let (_, rep) = adamo_step(&p, &g, &mut s, &AdamConfig::default(), &orth, &layout).unwrap();
    let delta = rep.assembled_delta(&layout);
    let w2 = layout.block("W2").unwrap().range();
    assert!(delta.iter().enumerate().all(|(i, d)| w2.contains(&i) || *d == 0.0));
    assert_eq!(rep.blocks.len(), 1);
}

#[test]
fn kappa_range_examples() {
    assert!(close(kappa_max_conflict_free(1.0, 1.0, 1.0, 0.1, 1.0), 18.0, 1e-14));
    assert_eq!(kappa_max_conflict_free(1.0, 0.0, 1.0, 0.1, 1.0), -2.0);
    assert_eq!(kappa_max_conflict_free(1.0, 1.0, 1.0, 0.0, 1.0), KAPPA_CAP);
    assert!(kappa_max_conflict_free(1.0, 1.0, 1.0, 1e-300, 1.0) <= KAPPA_CAP);
    assert_eq!(kappa_max_budgeted(0.0, 1.0, 1.0, 1.0), 0.0);
    assert!(close(kappa_max_budgeted(1.5, 1.0, 1.0, 1.0), 1.0, 1e-15));
    assert!(close(kappa_max_budgeted(4.0, 2.0, 1.0, 1.0), 5f64.sqrt() - 1.0, 1e-15));
    assert!(close(degradation_bound(0.1, 0.5, 2.0, 1.0, 1.0, 2.0), 0.1 + 0.04, 1e-15));
}

/// Quadratic `½ωᵀHω` with a random SPD `H`; returns (H, μ = λ_max).
fn spd(r: &mut impl Rng, n: usize) -> (DenseMatrix, f64) {
    let q = polar_factor(&rng::normal_matrix(r, n, n)).unwrap();
    let l: Vec<f64> = (0..n).map(|_| r.random_range(0.1..3.0)).collect();
    let mu = l.iter().cloned().fold(0.0, f64::max);
    (q.matmul(&DenseMatrix::diag(&l)).matmul(&q.transpose()), mu)
}

fn quad_loss(h: &DenseMatrix, w: &[f64]) -> f64 {
    0.5 * w.iter().zip(h.matvec(w)).map(|(a, b)| a * b).sum::<f64>()
}

#[test]
fn conflict_free_step_never_loses_below_the_eta_bound() {
    let layout = ParamLayout::sequential(&[("W", 3, 2, true)]);
    let mut checked = 0;
    for k in 0..1000u64 {
        let r = &mut rng::stream(21, k);
        let (h, mu) = spd(r, 6);
        let w = rng::normal_vec(r, 6);
        let g = h.matvec(&w);
        let orth = OrthConfig { kappa_orth: r.random_range(0.01..2.0), tau: 0.0, ..OrthConfig::budgeted() };
        // probe the correction at a throwaway step size
        let mut probe = AdamState::new(6);
        let cfg = AdamConfig { eta: 1.0, ..AdamConfig::default() };
        let (_, rep) = adamo_step(&w, &g, &mut probe, &cfg, &orth, &layout).unwrap();
        let delta = rep.assembled_delta(&layout);
        let gd: f64 = g.iter().zip(&delta).map(|(a, b)| a * b).sum();
        if norm2(&delta) == 0.0 || gd <= 0.0 {
            continue;
        }
        let eta = 0.99 * onestep_eta_bound(gd, mu, norm2(&delta), norm2(&rep.u));
        let cfg = cfg.with_eta(eta);
        let mut s1 = AdamState::new(6);
        let wa = adam_step(&w, &g, &mut s1, &cfg);
        let mut s2 = AdamState::new(6);
        let (wo, _) = adamo_step(&w, &g, &mut s2, &cfg, &orth, &layout).unwrap();
        assert!(quad_loss(&h, &wo) <= quad_loss(&h, &wa) + 1e-12, "draw {k}");
        checked += 1;
    }
    assert!(checked > 100, "only {checked} informative draws");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn budget_floor_and_magnitude(
        seed in any::<u64>(),
        rows in 1usize..5,
        cols in 1usize..5,
        tau in 0.0f64..0.99,
        kappa in 0.0f64..3.0,
    ) {
        let r = &mut rng::seeded(seed);
        let g = rng::normal_matrix(r, rows, cols);
        let u = rng::normal_matrix(r, rows, cols);
        let w = rng::normal_matrix(r, rows, cols);
        let d0 = reference_step(&u, &orth_gradient(&w), kappa, 1e-8);
        let st = budgeted_scale(&g, &u, &d0, tau);
        let t = -tau * g.frobenius_inner(&u).max(0.0);
        prop_assert!(g.frobenius_inner(&st.delta) >= t - 1e-12);
        if st.scale < 1.0 {
            prop_assert!((g.frobenius_inner(&st.delta) - t).abs() <= 1e-9);
        }
        prop_assert!((0.0..=1.0).contains(&st.scale));
        prop_assert!(frobenius_norm(&st.delta) <= kappa * frobenius_norm(&u) * (1.0 + 1e-12));
    }

    #[test]
    fn assembled_step_magnitude(seed in any::<u64>(), kappa in 0.0f64..3.0, tau in 0.0f64..0.99) {
        let layout = two_block_layout();
        let n = layout.total();
        let r = &mut rng::seeded(seed);
        let p = rng::normal_vec(r, n);
        let g = rng::normal_vec(r, n);
        let orth = OrthConfig { kappa_orth: kappa, tau, ..OrthConfig::budgeted() };
        let mut s = AdamState::new(n);
        let (_, rep) = adamo_step(&p, &g, &mut s, &AdamConfig::default(), &orth, &layout).unwrap();
        let delta = rep.assembled_delta(&layout);
        let total: Vec<f64> = rep.u.iter().zip(&delta).map(|(a, b)| a + b).collect();
        prop_assert!(norm2(&delta) <= kappa * norm2(&rep.u) * (1.0 + 1e-12));
        prop_assert!(norm2(&total) <= (1.0 + kappa) * norm2(&rep.u) * (1.0 + 1e-12));
    }
}
