use proptest::prelude::*;
use qvar_core::varnorm::{
    build_parent_partition, greedy_jump_count, hvar, ivar, lazy_jump_count, short_long_split,
    sup_norm, SampledPath, TimeGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_path(rng: &mut ChaCha8Rng, max_len: usize) -> SampledPath {
    let n = rng.random_range(1..=max_len);
    if rng.random_bool(0.5) {
        let mut x = 0.0;
        let v: Vec<f64> = (0..n)
            .map(|_| {
                x += rng.random_range(-1.0..1.0);
                x
            })
            .collect();
        SampledPath::from_real(&v)
    } else {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        SampledPath::from_real_vectors(&rows).unwrap()
    }
}

/// Variation by enumerating every index subset.
fn hvar_subsets(p: &SampledPath, q: f64) -> f64 {
    let n = p.len();
    let mut best = 0f64;
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let s: f64 = idx.windows(2).map(|w| p.dist(w[0], w[1]).powf(q)).sum();
        best = best.max(s);
    }
    best.powf(1.0 / q)
}

#[test]
fn jump_counts_are_sandwiched() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let p = random_path(&mut rng, 120);
        for &lambda in &[0.05, 0.3, 1.0, 2.5] {
            let g = greedy_jump_count(&p, lambda).unwrap();
            let l = lazy_jump_count(&p, lambda).unwrap();
            let g2 = greedy_jump_count(&p, lambda / 2.0).unwrap();
            assert!(g <= l && l <= g2, "λ={lambda}: {g} {l} {g2}");
        }
    }
}

#[test]
fn jumps_control_variation_both_ways() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..150 {
        let p = random_path(&mut rng, 80);
        let n = p.len();
        let dists: Vec<f64> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| p.dist(i, j))
            .collect();
        let max = dists.iter().copied().fold(0.0, f64::max);
        let min = dists
            .iter()
            .copied()
            .filter(|&d| d > 0.0)
            .fold(f64::INFINITY, f64::min);
        for &q in &[2.0, 2.5, 4.0] {
            let h = hvar(&p, q).unwrap();
            for &lambda in &[0.1, 0.5, 1.5] {
                let l = lazy_jump_count(&p, lambda).unwrap() as f64;
                assert!(lambda * l.powf(1.0 / q) <= h * (1.0 + 1e-12));
            }
            if max == 0.0 {
                continue;
            }
            let lo = min.log2().floor() as i32 - 1;
            let hi = max.log2().ceil() as i32;
            let sum: f64 = (lo..=hi)
                .map(|k| {
                    2f64.powf(k as f64 * q) * greedy_jump_count(&p, 2f64.powi(k)).unwrap() as f64
                })
                .sum();
            assert!(h <= 4.0 * sum.powf(1.0 / q) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn long_short_split_bounds_variation() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let n = rng.random_range(2..100usize);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = SampledPath::from_real(&v);
        let mut pts: Vec<u64> = (2..n as u64).filter(|_| rng.random_bool(0.2)).collect();
        pts.push(1);
        pts.push(n as u64);
        let grid = TimeGrid::from_points(pts).unwrap();
        for &q in &[2.0, 3.0] {
            let s = short_long_split(&p, &grid, q).unwrap();
            let h = hvar(&p, q).unwrap();
            assert!(h <= (s.long + 2.0 * s.short) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn dp_matches_subset_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..300 {
        let p = random_path(&mut rng, 10);
        for &q in &[1.0, 2.0, 2.5, 3.0] {
            let a = hvar(&p, q).unwrap();
            let b = hvar_subsets(&p, q);
            assert!((a - b).abs() <= 1e-12 * b.max(1.0), "q={q}: {a} vs {b}");
        }
    }
}

#[test]
fn parent_partition_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..100 {
        let p = random_path(&mut rng, 150);
        let lambda = rng.random_range(0.01..1.0);
        let part = build_parent_partition(&p, lambda).unwrap();
        let report = part.check_invariants();
        assert!(report.all_hold(), "{report:?}");
    }
}

proptest! {
    #[test]
    fn minkowski_for_vector_paths(rows in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 1..25)) {
        let p = SampledPath::from_real_vectors(&rows).unwrap();
        let q = 2.5;
        let whole = hvar(&p, q).unwrap();
        let parts: f64 = (0..3).map(|k| hvar(&p.component(k), q).unwrap().powi(2)).sum();
        prop_assert!(whole <= parts.sqrt() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn variation_decreases_in_q(v in prop::collection::vec(-5.0f64..5.0, 1..40), q in 1.0f64..6.0, dq in 0.0f64..3.0) {
        let p = SampledPath::from_real(&v);
        let a = hvar(&p, q).unwrap();
        let b = hvar(&p, q + dq).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn inhomogeneous_dominates(v in prop::collection::vec(-5.0f64..5.0, 1..40), q in 1.0f64..6.0) {
        let p = SampledPath::from_real(&v);
        let i = ivar(&p, q).unwrap();
        prop_assert!(i >= hvar(&p, q).unwrap() - 1e-12);
        prop_assert!(i >= sup_norm(&p) - 1e-12);
    }

    #[test]
    fn jump_counts_decrease_in_lambda(v in prop::collection::vec(-5.0f64..5.0, 1..60), lam in 0.01f64..3.0) {
        let p = SampledPath::from_real(&v);
        prop_assert!(greedy_jump_count(&p, 2.0 * lam).unwrap() <= greedy_jump_count(&p, lam).unwrap());
        prop_assert!(lazy_jump_count(&p, 2.0 * lam).unwrap() <= lazy_jump_count(&p, lam).unwrap());
    }
}
