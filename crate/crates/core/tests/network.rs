use collapse_lab::linalg::{norm2, DenseMatrix};
use collapse_lab::network::{grad_norm_bound, Architecture, Block, Critic, FeatureMap, FeatureSpec, ParamLayout};
use collapse_lab::rng;
use proptest::prelude::*;
use rand::Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

/// Central differences of `q_value_at` in every coordinate.
fn fd_jacobian(c: &Critic, s: &[f64], a: usize, h: f64) -> Vec<f64> {
    let mut p = c.params().to_vec();
    (0..p.len())
        .map(|i| {
            let x = p[i];
            p[i] = x + h;
            let up = c.q_value_at(&p, s, a);
            p[i] = x - h;
            let down = c.q_value_at(&p, s, a);
            p[i] = x;
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&diff) / norm2(b).max(1e-12)
}

#[test]
fn linear_critic_values() {
    let f = FeatureMap::action_blocks(3, 2);
    let mut c = Critic::linear(f.clone());
    let s = [0.5, -1.0, 2.0];
    assert_eq!(c.q_value(&s, 1), 0.0);
    let phi = f.embed(&s, 1);
    c.set_params(&phi);
    assert!(close(c.q_value(&s, 1), norm2(&phi).powi(2), 1e-15));
    assert_eq!(c.jacobian_column(&s, 1), phi);
}

#[test]
fn zero_weight_mlp_returns_output_bias() {
    let f = FeatureMap::random_projection(4, 3, 5, 11);
    let mut c = Critic::mlp(f, &[6, 4], 0).unwrap();
    let b = c.layout().block("bL").unwrap().offset;
    let mut p = vec![0.0; c.param_count()];
    p[b] = -0.75;
    c.set_params(&p);
    assert_eq!(c.q_value(&[1.0, 2.0, 3.0, 4.0], 2), -0.75);
}

#[test]
fn mlp_jacobian_matches_central_differences() {
    let f = FeatureMap::random_projection(4, 2, 6, 3);
    let c = Critic::mlp(f, &[8, 5], 0).unwrap();
    let s = [0.3, -0.2, 0.9, 0.1];
    let fd = fd_jacobian(&c, &s, 1, 1e-5);
    let an = c.jacobian_column(&s, 1);
    assert!(rel_err(&an, &fd) <= 1e-5, "rel err {}", rel_err(&an, &fd));
    assert_eq!(an[c.layout().block("bL").unwrap().offset], 1.0);
}

#[test]
fn jacobians_match_finite_differences_over_random_draws() {
    for k in 0..100u64 {
        let r = &mut rng::stream(42, k);
        let state_dim = r.random_range(1..=5);
        let actions = r.random_range(1..=3);
        let f = FeatureMap::random_projection(state_dim, actions, r.random_range(1..=6), k);
        let c = if k % 3 == 0 {
            let mut c = Critic::linear(f);
            let p = rng::normal_vec(r, c.param_count());
            c.set_params(&p);
            c
        } else {
            let hidden: Vec<usize> = (0..r.random_range(1..=3)).map(|_| r.random_range(1..=6)).collect();
            Critic::mlp(f, &hidden, k).unwrap()
        };
        let s = rng::normal_vec(r, state_dim);
        let a = r.random_range(0..actions);
        let e = rel_err(&c.jacobian_column(&s, a), &fd_jacobian(&c, &s, a, 1e-5));
        assert!(e <= 1e-5, "draw {k}: rel err {e}");
    }
}

#[test]
fn batch_jacobian_columns_and_gram() {
    let f = FeatureMap::action_blocks(2, 2);
    let c = Critic::linear(f.clone());
    let inputs: Vec<(Vec<f64>, usize)> = vec![(vec![1.0, 2.0], 0), (vec![-1.0, 0.5], 1), (vec![3.0, 0.0], 0)];
    let z = c.batch_jacobian(inputs.iter().map(|(s, a)| (s.as_slice(), *a)));
    assert_eq!((z.rows(), z.cols()), (4, 3));
    let phi: Vec<Vec<f64>> = inputs.iter().map(|(s, a)| f.embed(s, *a)).collect();
    for (i, col) in phi.iter().enumerate() {
        for (p, &v) in col.iter().enumerate() {
            assert_eq!(z[(p, i)], v);
        }
    }
    // Gram by explicit inner products
    let gram = z.t_matmul(&z);
    for i in 0..3 {
        for j in 0..3 {
            let want: f64 = phi[i].iter().zip(&phi[j]).map(|(x, y)| x * y).sum();
            assert!(close(gram[(i, j)], want, 1e-15));
        }
    }
    let one = c.batch_jacobian(std::iter::once((inputs[1].0.as_slice(), 1)));
    assert_eq!(one.cols(), 1);
    assert_eq!(one.column(0), c.jacobian_column(&inputs[1].0, 1));
}

#[test]
fn grad_norm_bound_examples() {
    assert!(close(grad_norm_bound(1.0, 1.0, 1.0, 0.0, 2), 2.0, 1e-15));
    assert!(close(grad_norm_bound(0.0, 1.0, 0.0, 0.0, 2), 1.0, 1e-15));
    for layers in 2..6 {
        assert!(close(grad_norm_bound(5.0, 0.0, 3.0, 0.0, layers), 1.0, 1e-15));
    }
}

#[test]
fn projected_mlp_respects_gradient_bound() {
    let (r_clip, b_bias) = (2.0, 0.3);
    for k in 0..1000u64 {
        let r = &mut rng::stream(77, k);
        let hidden: Vec<usize> = (0..r.random_range(1..=3)).map(|_| r.random_range(1..=6)).collect();
        let f = FeatureMap::random_projection(3, 2, r.random_range(2..=6), k).with_clip(r_clip);
        let mut c = Critic::mlp(f, &hidden, k).unwrap();
        let mut p = c.params().to_vec();
        for b in c.layout().blocks() {
            if !b.matrix && b.id.starts_with('b') && b.id != "bL" {
                // biases scaled to norm b_bias
                let v = rng::normal_vec(r, b.len());
                let n = norm2(&v);
                p[b.range()].iter_mut().zip(&v).for_each(|(x, y)| *x = b_bias * y / n);
            }
        }
        c.set_params(&p);
        c.project_spectral().unwrap();
        let w = c.layout().block("w").unwrap().range();
        let s_norm = norm2(&c.params()[w]);
        let s: Vec<f64> = rng::normal_vec(r, 3).iter().map(|x| 10.0 * x).collect();
        let g = c.jacobian_column(&s, r.random_range(0..2));
        let bound = grad_norm_bound(r_clip, 1.0, s_norm, b_bias, hidden.len() + 1);
        assert!(norm2(&g) <= bound * (1.0 + 1e-12), "draw {k}: {} > {bound}", norm2(&g));
    }
}

#[test]
fn clipping_bounds_feature_norm() {
    let f = FeatureMap::action_blocks(3, 2).with_clip(1.5);
    assert!(norm2(&f.embed(&[10.0, -4.0, 2.0], 0)) <= 1.5 + 1e-12);
    assert_eq!(f.embed(&[0.1, 0.2, 0.0], 1), vec![0.0, 0.0, 0.0, 0.1, 0.2, 0.0]);
}

#[test]
fn feature_map_serializes_as_its_spec() {
    let f = FeatureMap::random_projection(3, 2, 4, 9).with_clip(2.0);
    let text = serde_json::to_string(&f).unwrap();
    let spec: FeatureSpec = serde_json::from_str(&text).unwrap();
    let back: FeatureMap = spec.into();
    assert_eq!(back.embed(&[1.0, 2.0, 3.0], 1), f.embed(&[1.0, 2.0, 3.0], 1));
}

#[test]
fn table_features_look_up_the_hot_state() {
    let table = vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![2.0, 2.0], vec![-1.0, 0.0]]];
    let f = FeatureMap::table(table);
    assert_eq!(f.dim(), 2);
    assert_eq!(f.embed(&[0.0, 1.0], 0), vec![2.0, 2.0]);
    assert_eq!(f.embed(&[1.0, 0.0], 1), vec![0.0, 1.0]);
}

#[test]
fn mlp_layout_blocks() {
    let c = Critic::mlp(FeatureMap::action_blocks(2, 2), &[3, 5], 1).unwrap();
    let ids: Vec<&str> = c.layout().blocks().iter().map(|b| b.id.as_str()).collect();
    assert_eq!(ids, ["W1", "b1", "W2", "b2", "w", "bL"]);
    assert_eq!(c.param_count(), 3 * 4 + 3 + 5 * 3 + 5 + 5 + 1);
    assert_eq!(c.layout().matrix_blocks().count(), 2);
    assert!(Critic::mlp(FeatureMap::action_blocks(2, 2), &[], 1).is_err());
    let rebuilt = Critic::from_parts(c.features().clone(), Architecture::Mlp { hidden: vec![3, 5] }, c.params().to_vec());
    assert_eq!(rebuilt.unwrap(), c);
    assert!(Critic::from_parts(c.features().clone(), Architecture::Linear, c.params().to_vec()).is_err());
}

#[test]
fn layout_rejects_overlap_and_duplicates() {
    let b = |id: &str, offset, rows, cols| Block { id: id.into(), offset, rows, cols, matrix: true };
    assert!(ParamLayout::new(vec![b("a", 0, 2, 2), b("b", 3, 1, 1)], 4).is_err());
    assert!(ParamLayout::new(vec![b("a", 0, 1, 1), b("a", 1, 1, 1)], 2).is_err());
    assert!(ParamLayout::new(vec![b("a", 0, 2, 2)], 3).is_err());
    let ok = ParamLayout::new(vec![b("a", 1, 1, 2), b("b", 4, 1, 1)], 6).unwrap();
    let by = ok.unflatten(&[9.0, 1.0, 2.0, 9.0, 3.0, 9.0]).unwrap();
    // coordinates outside every block come back as zero
    assert_eq!(ok.flatten(&by).unwrap(), vec![0.0, 1.0, 2.0, 0.0, 3.0, 0.0]);
    assert_eq!(ok.matrix(&[9.0, 1.0, 2.0, 9.0, 3.0, 9.0], &ok.blocks()[0]), DenseMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap());
}

proptest! {
    #[test]
    fn flatten_unflatten_round_trip(seed in any::<u64>(), widths in proptest::collection::vec(1usize..6, 1..4)) {
        let c = Critic::mlp(FeatureMap::action_blocks(2, 3), &widths, seed).unwrap();
        let by = c.params_by_block();
        prop_assert_eq!(c.layout().flatten(&by).unwrap(), c.params().to_vec());
        prop_assert_eq!(c.layout().unflatten(c.params()).unwrap(), by);
    }

    #[test]
    fn feature_dimension_is_constant(seed in any::<u64>(), s in proptest::collection::vec(-5.0f64..5.0, 4), a in 0usize..3) {
        let f = FeatureMap::random_projection(4, 3, 7, seed);
        prop_assert_eq!(f.embed(&s, a).len(), 7);
        let c = Critic::mlp(f, &[4], seed).unwrap();
        prop_assert!(c.q_value(&s, a).is_finite());
    }
}
