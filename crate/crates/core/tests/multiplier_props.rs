use proptest::prelude::*;
use qvar_core::arith::{build_tables, complete_poly_sum, gcd, FreqPoint, ReducedFraction};
use qvar_core::kernels::{cm_ft, convolve, kernel_ft, poly_kernel, prime_kernel};
use qvar_core::lattice::LatticeSeq;
use qvar_core::multiplier::{
    apply_multiplier, classify_arc, coeffs, full_multiplier, level_multiplier,
    mobius_restricted_level, periodize, poly_l1_identity, restricted_level_direct,
    ArcClassification, BourgainMultiplier, Family, RealMultiplier, TorusMultiplier,
};
use qvar_core::{e, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn weyl_grid(n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    ((i as f64 + 0.5) * (0.754_877_666_246_692_7 + 0.131_9 * j as f64)).fract()
                })
                .collect()
        })
        .collect()
}

/// Points near low-height rationals, where the multiplier is nonzero.
fn near_rationals(
    rng: &mut ChaCha8Rng,
    count: usize,
    dim: usize,
    max_q: u64,
    spread: f64,
) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let q = rng.random_range(1..=max_q);
            (0..dim)
                .map(|_| {
                    let a = rng.random_range(0..q) as f64 / q as f64;
                    (a + rng.random_range(-spread..spread)).rem_euclid(1.0)
                })
                .collect()
        })
        .collect()
}

#[test]
fn levels_are_disjoint_and_additive() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n = 1u64 << 10;
    let full = full_multiplier(n, 16, Family::Prime, None).unwrap();
    let levels: Vec<TorusMultiplier> = (0..=16)
        .map(|s| level_multiplier(s, n, Family::Prime).unwrap())
        .collect();
    let bare: Vec<BourgainMultiplier> = (0..=16)
        .map(|s| BourgainMultiplier::new(Family::Prime, n as f64, s, s).unwrap())
        .collect();
    let mut pts = near_rationals(&mut rng, 300, 1, 60, 1e-3);
    pts.extend(weyl_grid(300, 1));
    for a in &pts {
        let mut sum = Complex64::new(0.0, 0.0);
        for (l, b) in levels.iter().zip(&bare) {
            assert!(b.active_terms(a).unwrap().len() <= 1, "α = {a:?}");
            sum += l.eval(a).unwrap();
        }
        assert!((full.eval(a).unwrap() - sum).norm() < 1e-12);
    }
}

#[test]
fn quadratic_levels_are_disjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for s in 0..=6u32 {
        let b = BourgainMultiplier::new(Family::Poly(2), 256.0, s, s).unwrap();
        for a in near_rationals(&mut rng, 200, 2, 1 << (s + 1), 1e-3) {
            assert!(b.active_terms(&a).unwrap().len() <= 1);
        }
    }
}

#[test]
fn origin_of_full_multiplier_is_one() {
    for fam in [Family::Prime, Family::Poly(2)] {
        let d = fam.dim().unwrap();
        let s_max = if fam == Family::Prime { 16 } else { 31 };
        let m = full_multiplier(512, s_max, fam, None).unwrap();
        assert!((m.eval(&vec![0.0; d]).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn mobius_assembly_matches_direct_sum() {
    let grid1 = weyl_grid(1000, 1);
    let grid2 = weyl_grid(1000, 2);
    let mut worst = 0f64;
    for q in 1..=12u64 {
        for fam in [Family::Custom, Family::Prime] {
            let a = mobius_restricted_level(q, 2.0, 500.0, fam, 1).unwrap();
            let b = restricted_level_direct(q, 2.0, 500.0, fam, 1).unwrap();
            for x in &grid1 {
                worst = worst.max((a.eval(x).unwrap() - b.eval(x).unwrap()).norm());
            }
        }
        let a = mobius_restricted_level(q, 1.0, 300.0, Family::Custom, 2).unwrap();
        let b = restricted_level_direct(q, 1.0, 300.0, Family::Custom, 2).unwrap();
        for x in &grid2 {
            worst = worst.max((a.eval(x).unwrap() - b.eval(x).unwrap()).norm());
        }
    }
    assert!(worst < 1e-10, "largest discrepancy {worst:e}");
}

#[test]
fn restricted_levels_respect_denominator_range() {
    assert!(mobius_restricted_level(26, 1.0, 10.0, Family::Custom, 1).is_err());
    assert!(mobius_restricted_level(25, 1.0, 10.0, Family::Custom, 1).is_ok());
    assert!(mobius_restricted_level(3, 1.0, 10.0, Family::Poly(2), 2).is_err());
}

fn bump(r2: f64, u: &[f64]) -> Complex64 {
    let r: f64 = u.iter().map(|x| x * x).sum();
    if r < r2 {
        Complex64::new((-1.0 / (r2 - r)).exp(), 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

#[test]
fn periodization_is_linear() {
    let m1 = RealMultiplier::centered(2, |u| bump(0.2, u)).unwrap();
    let m2 = RealMultiplier::centered(2, |u| bump(0.1, u) * e(u[1])).unwrap();
    let mix =
        RealMultiplier::centered(2, |u| bump(0.2, u) * 3.0 - bump(0.1, u) * e(u[1]) * 0.5).unwrap();
    for q in [1u64, 2, 5, 7] {
        let p1 = periodize(&m1, q).unwrap();
        let p2 = periodize(&m2, q).unwrap();
        let pm = periodize(&mix, q).unwrap();
        for xi in weyl_grid(300, 2) {
            let lhs = pm.eval(&xi).unwrap();
            let rhs = p1.eval(&xi).unwrap() * 3.0 - p2.eval(&xi).unwrap() * 0.5;
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}

#[test]
fn periodization_shift_invariance() {
    let m = RealMultiplier::new(vec![-0.3, -0.6], |u| bump(0.08, u) * (1.0 + u[0])).unwrap();
    for q in 1..=8u64 {
        let p = periodize(&m, q).unwrap();
        for xi in weyl_grid(200, 2) {
            let base = p.eval(&xi).unwrap();
            for i in 0..2 {
                let mut s = xi.clone();
                s[i] += 1.0 / q as f64;
                assert!((p.eval(&s).unwrap() - base).norm() < 1e-12);
            }
        }
        assert_eq!(p.eval(&[0.0, 0.0]).unwrap(), m.eval(&[0.0, 0.0]));
    }
}

#[test]
fn applying_kernel_transform_is_convolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for trial in 0..12 {
        let d = 1 + trial % 2;
        let k = poly_kernel(3 + trial, d).unwrap();
        let shape: Vec<usize> = (0..d).map(|_| rng.random_range(2..9)).collect();
        let len = shape.iter().product();
        let data = (0..len)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let origin = (0..d).map(|_| rng.random_range(-5..5)).collect();
        let f = LatticeSeq::from_data(origin, shape, data).unwrap();
        let direct = convolve(&f, &k).unwrap();
        let applied = apply_multiplier(&TorusMultiplier::from_kernel(k), &f).unwrap();
        assert!(applied.seq.max_abs_diff(&direct) < 1e-8, "trial {trial}");
    }
}

#[test]
fn major_arc_witnesses_satisfy_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let mut majors = 0;
    for _ in 0..3000 {
        let d = rng.random_range(1..=3usize);
        let n: u64 = 1 << rng.random_range(12..40);
        let nu = 1.0 / d.max(12) as f64;
        let nf = n as f64;
        // half the samples are planted near a rational of small height
        let alpha: Vec<f64> = if rng.random_bool(0.5) {
            let q = rng.random_range(1..=nf.powf(nu).floor().max(1.0) as u64);
            (1..=d)
                .map(|j| {
                    let r = nf.powf(-(j as f64) + nu);
                    (rng.random_range(0..q) as f64 / q as f64 + rng.random_range(-r..r) * 0.5)
                        .rem_euclid(1.0)
                })
                .collect()
        } else {
            (0..d).map(|_| rng.random_range(0.0..1.0)).collect()
        };
        match classify_arc(&alpha, n, d).unwrap() {
            ArcClassification::Major { theta, beta, q } => {
                majors += 1;
                assert_eq!(theta.height(), q);
                assert!(q as f64 <= nf.powf(nu) * (1.0 + 1e-9));
                for j in 0..d {
                    assert!(beta[j].abs() <= nf.powf(-(j as f64 + 1.0) + nu) * (1.0 + 1e-9));
                    let back = (theta.to_f64()[j] + beta[j]).rem_euclid(1.0);
                    let gap = (back - alpha[j]).abs();
                    assert!(gap.min(1.0 - gap) < 1e-12);
                }
            }
            ArcClassification::Minor => {}
        }
    }
    assert!(majors >= 1000, "only {majors} major samples");
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[test]
fn quadratic_major_arc_factorization_residual_decays() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let nu = 1.0 / 12.0;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for e in 8..=12 {
        let n = 1usize << e;
        let nf = n as f64;
        let k = poly_kernel(n, 2).unwrap();
        let mut worst = 0f64;
        for _ in 0..60 {
            let q = rng.random_range(1..=5u64);
            let (a1, a2) = (rng.random_range(0..q), rng.random_range(0..q));
            let theta = FreqPoint::new(vec![
                ReducedFraction::reduce(a1 as i128, q).unwrap(),
                ReducedFraction::reduce(a2 as i128, q).unwrap(),
            ])
            .unwrap();
            let beta = [
                rng.random_range(-1.0..1.0) * nf.powf(-1.0 + nu),
                rng.random_range(-1.0..1.0) * nf.powf(-2.0 + nu),
            ];
            let th = theta.to_f64();
            let alpha = [th[0] + beta[0], th[1] + beta[1]];
            let approx = complete_poly_sum(theta.height(), &theta, 2).unwrap()
                * cm_ft(nf, &beta, 2).unwrap();
            worst = worst.max((kernel_ft(&k, &alpha).unwrap() - approx).norm());
        }
        xs.push(nf.ln());
        ys.push(worst.ln());
    }
    let delta = -slope(&xs, &ys);
    assert!(delta > 0.0, "fitted decay exponent {delta}");
}

#[test]
fn prime_major_arc_residual_decreases() {
    let tables = build_tables(1 << 18).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    let mut worst_by_n = Vec::new();
    for ex in [12u32, 15, 18] {
        let n = 1usize << ex;
        let nf = n as f64;
        let k = prime_kernel(n, &tables).unwrap();
        let l2 = nf.ln().powi(2);
        let mut worst = 0f64;
        for _ in 0..150 {
            let q = rng.random_range(1..=l2.floor() as u64);
            let a = loop {
                let a = rng.random_range(0..q);
                if gcd(a, q) == 1 {
                    break a;
                }
            };
            let beta = rng.random_range(-1.0..1.0) * l2 / nf;
            let theta = FreqPoint::from_pairs(&[(a, q)]).unwrap();
            let s = coeffs(Family::Prime, &theta).unwrap();
            let avg: Complex64 = (1..=n).map(|m| e(m as f64 * beta)).sum::<Complex64>() / nf;
            let got = kernel_ft(&k, &[a as f64 / q as f64 + beta]).unwrap();
            worst = worst.max((got - s * avg).norm());
        }
        worst_by_n.push(worst);
    }
    assert!(worst_by_n[2] < worst_by_n[0], "{worst_by_n:?}");
}

#[test]
fn inverse_transform_identity_small_grids() {
    for d in 1..=2usize {
        for q in 1..=6u64 {
            for big_q in [2.0, 5.0, 25.0] {
                let window = if d == 1 { 40 } else { 8 };
                let r = poly_l1_identity(q, big_q, d, window).unwrap();
                assert!(
                    r.max_residual < 1e-8,
                    "q={q} Q={big_q} d={d}: {:e}",
                    r.max_residual
                );
            }
        }
    }
    assert!(poly_l1_identity(11, 2.0, 1, 4).is_err());
}

#[test]
fn inverse_transform_mass_is_uniform_in_q() {
    let masses: Vec<f64> = (1..=10u64)
        .map(|q| poly_l1_identity(q, 2.0, 2, 60).unwrap().l1_mass)
        .collect();
    let hi = masses.iter().copied().fold(0.0, f64::max);
    let lo = masses.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(hi.is_finite() && hi <= 2.0 * lo, "{masses:?}");
}

proptest! {
    #[test]
    fn prime_coefficients_bounded(a in 0u64..2000, q in 1u64..2000) {
        prop_assume!(gcd(a, q) == 1);
        let theta = FreqPoint::from_pairs(&[(a % q, q)]).unwrap();
        prop_assert!(coeffs(Family::Prime, &theta).unwrap().norm() <= 1.0);
    }

    #[test]
    fn multiplier_is_periodic(x in 0.0f64..1.0, y in 0.0f64..1.0, k in -3i32..4) {
        let m = level_multiplier(3, 128, Family::Poly(2)).unwrap();
        let a = m.eval(&[x, y]).unwrap();
        let b = m.eval(&[x + k as f64, y - k as f64]).unwrap();
        prop_assert!((a - b).norm() < 1e-9);
    }
}
