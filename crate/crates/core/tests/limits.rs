use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ergonode::ergodic::{double_limits, ergodic_limits, finite_r_limits, weighted_ergodic_limits, WalkWeights};
use ergonode::expected::{expected_coefficients, DbcMatrix};
use ergonode::graph::{expected_sbm_graph, generate_sbm, smooth_graph, Graph, SbmParams, SbmRegime};
use ergonode::linalg::relative_frobenius;
use ergonode::walks::{count_bigrams, hard_window_positive_mass, sample_walks, WalkConfig, WeightSpec};

fn small_sbm(n: usize, seed: u64) -> Graph {
    let raw = generate_sbm(&SbmParams::two_block(n, SbmRegime::Linear { p: 0.6, q: 0.06 }), seed).unwrap();
    smooth_graph(&raw, 1.0 / (10.0 * n as f64)).unwrap()
}

fn random_connected(n: usize, rng: &mut ChaCha8Rng) -> Graph {
    // a weighted path guarantees connectivity, extra edges are random
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        let w = rng.random_range(0.5..2.0);
        a[(i, i + 1)] = w;
        a[(i + 1, i)] = w;
    }
    for i in 0..n {
        for j in (i + 2)..n {
            if rng.random::<f64>() < 0.4 {
                let w = rng.random_range(0.1..3.0);
                a[(i, j)] = w;
                a[(j, i)] = w;
            }
        }
    }
    Graph::from_adjacency(a).unwrap()
}

#[test]
fn normalized_counts_approach_ergodic_limits() {
    let g = small_sbm(30, 3);
    let limits = ergodic_limits(&g, 3, 5).unwrap();
    let mut errors = Vec::new();
    for length in [100, 2000] {
        let cfg = WalkConfig { walks_per_node: 5, length, weights: WeightSpec::HardWindow(3), negatives: 5, seed: 11 };
        let counts = count_bigrams(&sample_walks(&g, &cfg).unwrap(), &cfg).unwrap();
        let scale = 1.0 / (5 * 30 * length) as f64;
        let c = counts.scaled(scale);
        errors.push((relative_frobenius(&c.positive, &limits.positive), relative_frobenius(&c.negative, &limits.negative)));
    }
    assert!(errors[1].0 < errors[0].0, "{errors:?}");
    assert!(errors[1].1 < errors[0].1, "{errors:?}");
    assert!(errors[1].0 < 0.1 && errors[1].1 < 0.1, "{errors:?}");
}

#[test]
fn positive_count_mass_is_exact() {
    let g = small_sbm(12, 0);
    for (w, length) in [(1, 5), (3, 10), (3, 4)] {
        let cfg = WalkConfig { walks_per_node: 2, length, weights: WeightSpec::HardWindow(w), negatives: 2, seed: 5 };
        let counts = count_bigrams(&sample_walks(&g, &cfg).unwrap(), &cfg).unwrap();
        let expected = hard_window_positive_mass(2 * 12, length, w);
        assert_eq!(counts.positive.sum(), expected);
    }
}

#[test]
fn limit_masses_match_window_and_negatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let g = random_connected(9, &mut rng);
        let l = ergodic_limits(&g, 4, 3).unwrap();
        assert!((l.positive.sum() - 4.0).abs() < 1e-12);
        assert!((l.negative.sum() - 12.0).abs() < 1e-12);
        assert!(relative_frobenius(&l.positive, &l.positive.transpose()) < 1e-13);
    }
}

#[test]
fn window_one_reduces_to_modularity_terms() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let g = random_connected(8, &mut rng);
        let total: f64 = g.degrees().sum();
        let d = g.degrees();
        let l = ergodic_limits(&g, 1, 4).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                assert!((l.positive[(i, j)] * total - g.weight(i, j)).abs() < 1e-12);
                assert!((l.negative[(i, j)] * total - 4.0 * d[i] * d[j] / total).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn finite_length_limits_converge_to_weighted_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = random_connected(10, &mut rng);
    let weights = WalkWeights::Geometric(0.5);
    let ergodic = weighted_ergodic_limits(&g, &weights, 5).unwrap();
    let short = finite_r_limits(&g, &weights, 5, 50).unwrap();
    let long = finite_r_limits(&g, &weights, 5, 500).unwrap();
    let e_short = relative_frobenius(&short.positive, &ergodic.positive);
    let e_long = relative_frobenius(&long.positive, &ergodic.positive);
    assert!(e_long < e_short && e_long < 0.05, "{e_short} {e_long}");
    assert!(relative_frobenius(&long.negative, &ergodic.negative) < 0.05);

    let double = double_limits(&g, &weights, 5).unwrap();
    assert_eq!(double.positive, ergodic.positive);
    assert_eq!(double.negative, ergodic.negative);
}

#[test]
fn expected_graph_limits_are_dbc() {
    let (m, a, b, w, k) = (6, 0.6, 0.06, 4, 5);
    let g = expected_sbm_graph(m, a, b).unwrap();
    let l = ergodic_limits(&g, w, k).unwrap();
    let c = expected_coefficients(m, a, b, w, k).unwrap();
    let pos = DbcMatrix::from_dense(&l.positive, 1e-13).expect("positive limit is DBC");
    let neg = DbcMatrix::from_dense(&l.negative, 1e-13).expect("negative limit is DBC");
    for (x, y) in [(pos.c1, c.alpha1), (pos.c2, c.alpha2), (pos.c3, c.alpha3), (neg.c1, c.beta), (neg.c2, c.beta), (neg.c3, c.beta)] {
        assert!((x - y).abs() < 1e-13, "{x} vs {y}");
    }
}
