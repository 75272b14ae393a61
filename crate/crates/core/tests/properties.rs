use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::Value;

use termalign::adversarial::orthogonalize;
use termalign::alignment::{
    load_alignment, procrustes, save_alignment, save_alignment_binary, AlignmentMatrix, NormalizePolicy,
    PreparedSpace, Translator,
};
use termalign::evaluation::{pca_project, precision_at_k, GoldDictionary, LabeledPoints};
use termalign::linalg::{orthogonality_error, random_orthogonal, Matrix};
use termalign::metrics::Metric;
use termalign::synthetic::{make_rotation_pair, random_space};

fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

fn shape() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..8).prop_flat_map(|d| (Just(d), d..(d + 25), any::<u64>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn procrustes_output_is_orthogonal((d, n, seed) in shape()) {
        let w = procrustes(&gaussian(d, n, seed), &gaussian(d, n, seed ^ 1)).unwrap();
        prop_assert!(w.orthogonality_error() <= 1e-6);
        prop_assert!(w.orthogonal);
    }

    #[test]
    fn procrustes_map_is_an_isometry((d, n, seed) in shape()) {
        let w = procrustes(&gaussian(d, n, seed), &gaussian(d, n, seed ^ 1)).unwrap();
        let u = gaussian(d, 2, seed ^ 2);
        let wu = &w.w * &u;
        for j in 0..2 {
            prop_assert!((wu.column(j).norm() - u.column(j).norm()).abs() < 1e-9);
        }
        prop_assert!((wu.column(0).dot(&wu.column(1)) - u.column(0).dot(&u.column(1))).abs() < 1e-9);
    }

    #[test]
    fn procrustes_beats_random_orthogonal_maps((d, n, seed) in shape()) {
        let (x, y) = (gaussian(d, n, seed), gaussian(d, n, seed ^ 1));
        let w = procrustes(&x, &y).unwrap();
        let best = (&w.w * &x - &y).norm_squared();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        for _ in 0..20 {
            let r = random_orthogonal(d, &mut rng);
            prop_assert!(best <= (&r * &x - &y).norm_squared() + 1e-9);
        }
    }

    #[test]
    fn procrustes_recovers_a_planted_map((d, n, seed) in shape()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_orthogonal(d, &mut rng);
        let x = gaussian(d, n, seed ^ 1);
        let w = procrustes(&x, &(&q * &x)).unwrap();
        prop_assert!((&w.w - &q).norm() < 1e-8);
        prop_assert!(w.residual < 1e-8);
    }

    #[test]
    fn orthogonalize_does_not_increase_deviation(d in 2usize..8, seed in any::<u64>(), size in 0.0f64..0.1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_orthogonal(d, &mut rng);
        let e = gaussian(d, d, seed ^ 1);
        let mut w = &q + &e * (size / (4.0 * e.norm()));
        prop_assume!(orthogonality_error(&w) <= 0.1);
        let mut dev = orthogonality_error(&w);
        for _ in 0..50 {
            w = orthogonalize(&w, 0.01);
            let next = orthogonality_error(&w);
            prop_assert!(next <= dev + 1e-15);
            dev = next;
        }
    }

    #[test]
    fn precision_is_monotone_in_k(seed in any::<u64>(), n_src in 5usize..40, n_tgt in 12usize..80) {
        let src = random_space(n_src, 6, "s", seed).unwrap();
        let tgt = random_space(n_tgt, 6, "t", seed ^ 1).unwrap();
        let entries = src.vocab().words().iter().enumerate()
            .map(|(i, s)| (s.clone(), vec![tgt.vocab().words()[(i * 7 + seed as usize % 5) % n_tgt].clone()]))
            .collect();
        let gold = GoldDictionary::new(entries).unwrap();
        let (ps, pt) = (PreparedSpace::new(&src, NormalizePolicy::Unit), PreparedSpace::new(&tgt, NormalizePolicy::Unit));
        let w = AlignmentMatrix::identity(6);
        for metric in [Metric::Cosine, Metric::Csls] {
            let t = Translator::new(&w, &ps, &pt, metric, 10, 1000).unwrap();
            let r = precision_at_k(&t, &gold, &[1, 5, 10], Value::Null).unwrap();
            let p: Vec<f64> = r.precision_at.values().copied().collect();
            prop_assert!(p[0] <= p[1] && p[1] <= p[2]);
        }
    }

    #[test]
    fn pca_variance_is_ordered(seed in any::<u64>(), d in 2usize..10, n in 12usize..40) {
        let v = gaussian(d, n, seed);
        let words = (0..n).map(|i| format!("w{i}")).collect();
        let set = LabeledPoints { label: "a".into(), words, vectors: v };
        let p = pca_project(&[set], 2).unwrap();
        prop_assert!(p.explained_variance[0] >= p.explained_variance[1]);
        prop_assert!(p.explained_variance_ratio.iter().sum::<f64>() <= 1.0 + 1e-12);
        prop_assert_eq!(p.points.len(), n);
    }

    #[test]
    fn synthetic_pairs_are_seed_deterministic(seed in any::<u64>()) {
        let a = make_rotation_pair(30, 4, 0.1, 0.3, seed).unwrap();
        let b = make_rotation_pair(30, 4, 0.1, 0.3, seed).unwrap();
        prop_assert_eq!(a.src.word_rows(), b.src.word_rows());
        prop_assert_eq!(a.tgt.word_rows(), b.tgt.word_rows());
        prop_assert_eq!(a.anchors, b.anchors);
    }

    #[test]
    fn noiseless_planted_pairs_agree_exactly(seed in any::<u64>()) {
        let pair = make_rotation_pair(40, 5, 0.0, 0.25, seed).unwrap();
        for (s, targets) in pair.gold.entries() {
            let p = pair.src.word_vector(s).unwrap().vector;
            let c = pair.tgt.word_vector(&targets[0]).unwrap().vector;
            let qp = &pair.true_map * p;
            prop_assert!((qp.dot(&c) / (qp.norm() * c.norm()) - 1.0).abs() < 1e-12);
        }
        prop_assert!((pair.true_map.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn alignment_files_round_trip(d in 1usize..7, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = AlignmentMatrix::from_matrix(random_orthogonal(d, &mut rng)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (t, b) = (dir.path().join("w.txt"), dir.path().join("w.bin"));
        save_alignment(&w, &Value::Null, &t).unwrap();
        save_alignment_binary(&w, &Value::Null, &b).unwrap();
        prop_assert_eq!(&load_alignment(&t).unwrap().alignment.w, &w.w);
        prop_assert_eq!(&load_alignment(&b).unwrap().alignment.w, &w.w);
    }
}
