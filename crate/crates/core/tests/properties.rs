mod common;

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use torusym_core::data::{self, Dataset, DatasetMeta};
use torusym_core::lie::{self, CanonicalForm};
use torusym_core::spectral::{self, FrequencyVector};
use torusym_core::Model;

use common::*;

fn even_dim() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(4), Just(6), Just(8)]
}

fn random_cf(n: usize, seed: u64) -> CanonicalForm {
    let mut r = rng(seed ^ 0x5eed);
    CanonicalForm::new(
        data::random_rotation(n, seed).unwrap(),
        random_unit(&mut r, n / 2),
    )
    .unwrap()
}

/// Sets the alignment parameters to `a` and returns `exp(A)`.
fn set_alignment(model: &mut Model, skew: &[f64]) -> DMatrix<f64> {
    model.params_mut().skew_mut().copy_from_slice(skew);
    let a = lie::Generator::from_skew_params(model.n(), skew).unwrap();
    lie::matrix_exp(&a, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn exp_matches_rotation_blocks(n in even_dim(), seed in any::<u64>(), t in -TAU..TAU) {
        let cf = random_cf(n, seed);
        let b = lie::assemble_generator(&cf);
        let e = lie::matrix_exp(&b, t).unwrap();
        prop_assert!(max_abs_diff(&e, &closed_form_exp(&cf, t)) <= 1e-10);
    }

    #[test]
    fn group_law(n in even_dim(), seed in any::<u64>(), t1 in -TAU..TAU, t2 in -TAU..TAU) {
        let raw = random_generator(&mut rng(seed), n, 1.0);
        let b = raw.scaled(1.0 / raw.matrix().norm());
        let lhs = lie::matrix_exp(&b, t1).unwrap() * lie::matrix_exp(&b, t2).unwrap();
        let rhs = lie::matrix_exp(&b, t1 + t2).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9);
    }

    #[test]
    fn exp_is_special_orthogonal(n in even_dim(), seed in any::<u64>(), t in -TAU..TAU) {
        let raw = random_generator(&mut rng(seed), n, 1.0);
        let b = raw.scaled(1.0 / raw.matrix().norm());
        let e = lie::matrix_exp(&b, t).unwrap();
        prop_assert!((e.transpose() * &e - DMatrix::identity(n, n)).norm() <= 1e-10);
        prop_assert!((e.determinant() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn gauge_moves_keep_the_generator(n in even_dim(), seed in any::<u64>()) {
        let cf = random_cf(n, seed);
        let mut r = rng(seed.wrapping_add(1));
        let angles: Vec<f64> = (0..n / 2).map(|_| r.random_range(0.0..TAU)).collect();
        let mut perm: Vec<usize> = (0..n / 2).collect();
        rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut r);
        let moved = lie::gauge_equivalent(&cf, &angles, &perm).unwrap();
        let d = lie::assemble_generator(&cf).matrix() - lie::assemble_generator(&moved).matrix();
        prop_assert!(d.norm() <= 1e-10);
    }

    #[test]
    fn assembled_generators_are_skew(n in even_dim(), seed in any::<u64>()) {
        let b = lie::assemble_generator(&random_cf(n, seed));
        prop_assert!((b.matrix() + b.matrix().transpose()).norm() <= 1e-12);
    }

    #[test]
    fn retraction_is_idempotent_on_rotations(n in even_dim(), seed in any::<u64>()) {
        let q = data::random_rotation(n, seed).unwrap();
        let again = lie::retract_orthogonal(&q).unwrap();
        prop_assert!((again - q).norm() <= 1e-10);
    }

    #[test]
    fn cosine_is_scale_invariant_and_symmetric(n in even_dim(), seed in any::<u64>(), s in 0.01f64..100.0) {
        let mut r = rng(seed);
        let x = random_generator(&mut r, n, 1.0);
        let y = random_generator(&mut r, n, 1.0);
        let c = lie::generator_cosine_similarity(&x, &y).unwrap().value;
        let cs = lie::generator_cosine_similarity(&x.scaled(s), &y).unwrap().value;
        let cr = lie::generator_cosine_similarity(&y, &x).unwrap().value;
        let slack = 2.0 * lie::COSINE_EPS / (s.min(1.0) * x.matrix().norm() * y.matrix().norm()) + 1e-14;
        prop_assert!((c - cs).abs() <= slack && (c - cr).abs() <= 1e-15 && c.abs() <= 1.0, "{c} {cs} {cr}");
        let self_cos = lie::generator_cosine_similarity(&x, &x.scaled(s)).unwrap().value;
        prop_assert!((self_cos - 1.0).abs() <= 2.0 * lie::COSINE_EPS / (s.min(1.0) * x.matrix().norm_squared()) + 1e-14);
    }

    #[test]
    fn primitive_matches_gcd_oracle(m in prop::collection::vec(-6i64..=6, 1..4)) {
        prop_assume!(m.iter().any(|&v| v != 0));
        let p = spectral::primitive(&m).unwrap();
        let g = m.iter().fold(0i64, |g, &v| num_integer::gcd(g, v));
        let lead = m.iter().find(|&&v| v != 0).unwrap().signum();
        let expected: Vec<i64> = m.iter().map(|&v| lead * v / g).collect();
        prop_assert_eq!(p.entries(), expected.as_slice());
        prop_assert_eq!(spectral::primitive(p.entries()).unwrap(), p.clone());
        let b = p.max_abs() as u32;
        prop_assert!(spectral::primitive_set(b, m.len()).contains(&p));
    }

    #[test]
    fn lambda_estimate_matches_rational_nullspace(seed in any::<u64>(), r in 2usize..=4) {
        let rows = random_corank_one(&mut rng(seed), r);
        let oracle = unit(&rational_nullspace(&rows, r)[0]);
        let freqs: Vec<FrequencyVector> = rows.iter().map(|m| FrequencyVector::new(m.clone())).collect();
        let est = spectral::estimate_lambda(&freqs, r).unwrap();
        prop_assert_eq!(est.nullity, 1);
        let dot: f64 = est.lambda.iter().zip(&oracle).map(|(a, b)| a * b).sum();
        prop_assert!((dot.abs() - 1.0).abs() <= 1e-12);
        let residual: f64 = freqs.iter().map(|m| m.dot(&est.lambda).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = freqs.iter().map(|m| m.norm().powi(2)).sum::<f64>().sqrt();
        prop_assert!(residual <= 1e-8 * scale);
    }

    #[test]
    fn resonant_characters_are_invariant(a in -3i64..=3, b in -3i64..=3, theta in prop::collection::vec(0.0..TAU, 2), t in -20.0f64..20.0) {
        prop_assume!(a != 0 || b != 0);
        let lambda = [b as f64, -a as f64];
        let m = FrequencyVector::new(vec![a, b]);
        let p = spectral::block_polar(&[theta[0].cos(), theta[0].sin(), theta[1].cos(), theta[1].sin()]).unwrap();
        let moved = p.shifted(&[lambda[0] * t, lambda[1] * t]);
        prop_assert!((spectral::character(&m, &moved) - spectral::character(&m, &p)).norm() <= 1e-11);
    }

    #[test]
    fn block_polar_reconstructs(z in prop::collection::vec(-5.0f64..5.0, 1..5)) {
        let mut z = z;
        if z.len() % 2 == 1 {
            z.push(0.5);
        }
        let p = spectral::block_polar(&z).unwrap();
        for k in 0..p.rank() {
            prop_assert!(p.angles[k] >= 0.0 && p.angles[k] < TAU);
            prop_assert!((p.radii[k] * p.angles[k].cos() - z[2 * k]).abs() <= 1e-12);
            prop_assert!((p.radii[k] * p.angles[k].sin() - z[2 * k + 1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn alignment_is_an_isometry(n in even_dim(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut model = random_model(&mut r, n, 1, &[3], 1);
        let skew: Vec<f64> = (0..lie::skew_param_count(n)).map(|_| r.random_range(-2.0..2.0)).collect();
        set_alignment(&mut model, &skew);
        let (xs, _) = random_batch(&mut r, n, 1, 1, false);
        let z = model.align(&xs[0]).unwrap();
        let nx: f64 = xs[0].iter().map(|v| v * v).sum::<f64>().sqrt();
        let nz: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((nx - nz).abs() <= 1e-10 * nx.max(1.0), "{nx} {nz}");
    }

    #[test]
    fn penalty_is_nonnegative_and_vanishes_on_resonant_mass(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut model = random_model(&mut r, 4, 2, &[4], 1);
        prop_assert!(model.resonance_penalty() >= 0.0);
        let h = 1.0 / 2f64.sqrt();
        model.params_mut().lambda_mut().copy_from_slice(&[h, -h]);
        let width = model.params().layout().input_width();
        let resonant: Vec<bool> = model.frequencies().iter().map(|m| m.entries()[0] == m.entries()[1]).collect();
        for row in model.params_mut().weights_mut(0).chunks_mut(width) {
            for (k, keep) in resonant.iter().enumerate() {
                if !keep {
                    row[2 * k] = 0.0;
                    row[2 * k + 1] = 0.0;
                }
            }
        }
        prop_assert_eq!(model.resonance_penalty(), 0.0);
    }

    #[test]
    fn exact_invariance_certificate(seed in any::<u64>(), six in any::<bool>()) {
        let (n, lambda) = if six {
            (6, vec![1.0 / 3f64.sqrt(); 3])
        } else {
            (4, vec![1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt()])
        };
        let mut r = rng(seed);
        let mut model = random_model(&mut r, n, 2, &[8, 6], 1);
        let skew: Vec<f64> = (0..lie::skew_param_count(n)).map(|_| r.random_range(-1.0..1.0)).collect();
        let q = set_alignment(&mut model, &skew);
        model.params_mut().lambda_mut().copy_from_slice(&lambda);
        let truth = lie::assemble_generator(&CanonicalForm::new(q, lambda.clone()).unwrap());
        let width = model.params().layout().input_width();
        let resonant: Vec<bool> = model
            .frequencies()
            .iter()
            .map(|m| m.dot(&lambda).abs() < 1e-12)
            .collect();
        for row in model.params_mut().weights_mut(0).chunks_mut(width) {
            for (k, keep) in resonant.iter().enumerate() {
                if !keep {
                    row[2 * k] = 0.0;
                    row[2 * k + 1] = 0.0;
                }
            }
        }
        for _ in 0..100 {
            let (xs, _) = random_batch(&mut r, n, 1, 1, false);
            let t = r.random_range(-PI..PI);
            let rot = lie::matrix_exp(&truth, t).unwrap();
            let moved = &rot * nalgebra::DVector::from_column_slice(&xs[0]);
            let a = model.predict(&xs[0]).unwrap()[0];
            let b = model.predict(moved.as_slice()).unwrap()[0];
            prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn dataset_round_trips_bit_exactly(seed in any::<u64>(), len in 1usize..20) {
        let mut r = rng(seed);
        let (x, y) = random_batch(&mut r, 4, 2, len, false);
        let x: Vec<Vec<f64>> = x.into_iter().map(|row| row.into_iter().map(|v| v * 10f64.powi(r.random_range(-300..300))).collect()).collect();
        let meta = DatasetMeta {
            task_name: "prop".into(),
            n: 4,
            outputs: 2,
            noise_sigma: 0.1,
            seed,
            classification: false,
            true_generator: None,
            true_lambda: None,
        };
        let ds = Dataset::new(x, y, meta).unwrap();
        let mut buf = Vec::new();
        ds.write_to(&mut buf).unwrap();
        let back = Dataset::read_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back, ds);
    }
}

#[test]
fn ridders_oracle_differentiates_smooth_functions() {
    for x in [0.3f64, 1.0, 2.5] {
        let mut d = |h: f64| ((x + h).sin() - (x - h).sin()) / (2.0 * h);
        assert!((ridders(&mut d, 1e-2) - x.cos()).abs() <= 1e-10);
    }
}
