//! Statistical verification of the span/affine-hull identities on random
//! arrangements with mixed subspace counts, dimensions, and ambient
//! dimensions, covering dependent, critical, and independent regimes.

mod support;

use affsc::data::{mix_seed, sample_points_on_subspace, sample_random_model, RandomModelSpec};
use affsc::geometry::{
    aff_dim, homogeneous_embed, is_affinely_independent, numerical_rank, origin_in_affine_hull,
    span_dim, spans_linearly_independent, AffineSubspace, RankTolerance,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use support::random_arrangement;

fn tol() -> RankTolerance {
    RankTolerance::default()
}

#[test]
fn embedded_span_independence_matches_affine_independence() {
    let mut independent = 0usize;
    let mut dependent = 0usize;
    for seed in 0..1000u64 {
        let (model, ambient) = random_arrangement(seed);
        let embedded = spans_linearly_independent(&model, tol(), true).unwrap();
        let affine = is_affinely_independent(&model, tol()).unwrap();
        assert_eq!(
            embedded.holds, affine.holds,
            "seed {seed}: embedded {}={} vs affine {}={}",
            embedded.lhs, embedded.rhs, affine.lhs, affine.rhs
        );
        // Independence forces the ambient dimension bound.
        if affine.holds {
            independent += 1;
            let needed = model.iter().map(|s| s.dim()).sum::<usize>() + model.len() - 1;
            assert!(ambient >= needed, "seed {seed}");
        } else {
            dependent += 1;
        }
    }
    // The draw covers both regimes, so the equivalence is not vacuous.
    assert!(independent > 100, "only {independent} independent draws");
    assert!(dependent > 100, "only {dependent} dependent draws");
}

#[test]
fn span_independence_splits_into_independence_and_origin_freeness() {
    for seed in 1000..2000u64 {
        let (model, _) = random_arrangement(seed);
        let plain = spans_linearly_independent(&model, tol(), false).unwrap();
        let affine = is_affinely_independent(&model, tol()).unwrap();
        let origin = origin_in_affine_hull(&model, tol()).unwrap();
        assert_eq!(
            plain.holds,
            affine.holds && !origin.holds,
            "seed {seed}: span {}={}, affine {}, origin {}",
            plain.lhs,
            plain.rhs,
            affine.holds,
            origin.holds
        );
    }
}

#[test]
fn hull_dimension_bound_is_never_exceeded() {
    for seed in 2000..2400u64 {
        let (model, _) = random_arrangement(seed);
        let check = is_affinely_independent(&model, tol()).unwrap();
        assert!(
            check.lhs <= check.rhs,
            "seed {seed}: {} > {}",
            check.lhs,
            check.rhs
        );
    }
}

#[test]
fn independent_origin_free_unions_span_exactly() {
    // With the ambient dimension above the span threshold the drawn model is
    // independent and origin-free, and the union's span dimension is exactly
    // the sum of the per-subspace span dimensions.
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(77, &[seed]));
        let n = rng.random_range(1..=4);
        let dims: Vec<usize> = (0..n).map(|_| rng.random_range(0..=3)).collect();
        let total: usize = dims.iter().sum::<usize>() + n;
        let ambient = total + rng.random_range(0..=3);
        let spec = RandomModelSpec {
            ambient_dim: ambient.max(dims.iter().max().unwrap() + 1),
            dims,
            points_per_subspace: 1,
            seed: mix_seed(78, &[seed]),
        };
        let model = sample_random_model(&spec).unwrap();
        assert!(is_affinely_independent(&model, tol()).unwrap().holds);
        assert!(!origin_in_affine_hull(&model, tol()).unwrap().holds);
        let span = spans_linearly_independent(&model, tol(), false).unwrap();
        assert!(span.holds, "seed {seed}");
        assert_eq!(span.lhs, total, "seed {seed}");
    }
}

#[test]
fn embedding_preserves_affine_dimension_of_samples() {
    // d >= 2 keeps the intrinsic sphere a continuum, so d + 2 samples span
    // the subspace with probability 1 (for d = 1 the sphere is two points
    // and repeats are likely; that case is covered deterministically below).
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(31, &[seed]));
        let d = rng.random_range(2..=4);
        let ambient = d + rng.random_range(1..=4);
        let spec = RandomModelSpec {
            ambient_dim: ambient,
            dims: vec![d],
            points_per_subspace: 1,
            seed: mix_seed(32, &[seed]),
        };
        let subspace = sample_random_model(&spec).unwrap().pop().unwrap();
        let points = sample_points_on_subspace(&subspace, d + 2, mix_seed(33, &[seed])).unwrap();
        let embedded = homogeneous_embed(&points).unwrap();

        let aff = aff_dim(&points, tol()).unwrap();
        assert_eq!(aff, d, "samples affinely span the subspace");
        assert_eq!(aff_dim(&embedded, tol()).unwrap(), aff);
        assert_eq!(span_dim(&embedded, tol()).unwrap(), aff + 1);
    }
}

#[test]
fn one_dimensional_samples_span_the_line() {
    let spec = RandomModelSpec {
        ambient_dim: 4,
        dims: vec![1],
        points_per_subspace: 1,
        seed: 321,
    };
    let subspace = sample_random_model(&spec).unwrap().pop().unwrap();
    let q = subspace.direction_subspace().column(0).into_owned();
    let mut points = DMatrix::zeros(4, 2);
    points.set_column(0, &(subspace.offset() + &q));
    points.set_column(1, &(subspace.offset() - &q));
    let embedded = homogeneous_embed(&points).unwrap();
    assert_eq!(aff_dim(&points, tol()).unwrap(), 1);
    assert_eq!(aff_dim(&embedded, tol()).unwrap(), 1);
    assert_eq!(span_dim(&embedded, tol()).unwrap(), 2);
}

#[test]
fn sample_span_splits_by_origin_membership() {
    // span(points) gains one dimension over aff(points) exactly when the
    // subspace misses the origin.
    for seed in 0..60u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(41, &[seed]));
        let d = rng.random_range(2..=3);
        let ambient = d + rng.random_range(1..=3);
        let spec = RandomModelSpec {
            ambient_dim: ambient,
            dims: vec![d],
            points_per_subspace: 1,
            seed: mix_seed(42, &[seed]),
        };
        let offset_subspace = sample_random_model(&spec).unwrap().pop().unwrap();
        let points =
            sample_points_on_subspace(&offset_subspace, d + 2, mix_seed(43, &[seed])).unwrap();
        let aff = aff_dim(&points, tol()).unwrap();
        let span = span_dim(&points, tol()).unwrap();
        let origin = origin_in_affine_hull(std::slice::from_ref(&offset_subspace), tol())
            .unwrap()
            .holds;
        assert!(!origin, "unit offsets leave the origin outside, seed {seed}");
        assert_eq!(span, aff + 1, "seed {seed}");

        // The same subspace translated to pass through the origin.
        let linear = AffineSubspace::new(
            DVector::zeros(ambient),
            offset_subspace.basis().clone(),
            tol(),
        )
        .unwrap();
        let points = sample_points_on_subspace(&linear, d + 2, mix_seed(44, &[seed])).unwrap();
        let aff = aff_dim(&points, tol()).unwrap();
        let span = span_dim(&points, tol()).unwrap();
        assert!(origin_in_affine_hull(std::slice::from_ref(&linear), tol())
            .unwrap()
            .holds);
        assert_eq!(span, aff, "seed {seed}");
    }
}

#[test]
fn rank_oracle_agrees_with_jacobi_svd() {
    // The library rank uses nalgebra's SVD; cross-check the counted singular
    // values against the one-sided Jacobi oracle on random products with a
    // known rank ceiling.
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(51, &[seed]));
        let rows = rng.random_range(2..=7);
        let cols = rng.random_range(2..=7);
        let inner = rng.random_range(1..=rows.min(cols));
        let left = support::random_matrix(rows, inner, mix_seed(52, &[seed]));
        let right = support::random_matrix(inner, cols, mix_seed(53, &[seed]));
        let product = &left * &right;

        let rank = numerical_rank(&product, tol()).unwrap();
        assert_eq!(rank, inner, "seed {seed}");

        let (_, sigma, _) = support::jacobi_svd(&product);
        let cutoff = sigma[0] * 1e-10 * (rows.max(cols) as f64);
        let oracle_rank = sigma.iter().filter(|&&s| s > cutoff).count();
        assert_eq!(rank, oracle_rank, "seed {seed}");
    }
}

#[test]
fn outer_product_rank_via_oracle() {
    let u = DVector::from_fn(5, |i, _| (i as f64 + 1.0) * 0.7 - 2.0);
    let v = DVector::from_fn(5, |i, _| 1.5 - i as f64 * 0.4);
    let m = &u * v.transpose();
    let (_, sigma, _) = support::jacobi_svd(&m);
    assert!((sigma[0] - u.norm() * v.norm()).abs() < 1e-12);
    assert!(sigma[1].abs() < 1e-12);
    assert_eq!(numerical_rank(&m, tol()).unwrap(), 1);
}

#[test]
fn four_affinely_independent_points_in_r5() {
    // Brute-force construction: differences against the first point have
    // rank 3, so the affine dimension is 3.
    let points = support::random_matrix(5, 4, 9001);
    let mut diffs = DMatrix::zeros(5, 3);
    for j in 1..4 {
        diffs.set_column(j - 1, &(points.column(j) - points.column(0)));
    }
    assert_eq!(numerical_rank(&diffs, tol()).unwrap(), 3);
    assert_eq!(aff_dim(&points, tol()).unwrap(), 3);
}
