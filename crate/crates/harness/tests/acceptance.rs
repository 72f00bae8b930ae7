//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits nonzero if any of them fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qvar_core::arith::{
    build_tables, complete_poly_sum, gcd, mobius_of, ramanujan_sum, reduced_residues, FreqPoint,
    ReducedFraction,
};
use qvar_core::kernels::{cm_ft, convolve, poly_kernel, prime_kernel};
use qvar_core::lattice::LatticeSeq;
use qvar_core::multiplier::{
    apply_multiplier, mobius_restricted_level, periodize, poly_l1_identity,
    restricted_level_direct, Family, RealMultiplier, TorusMultiplier,
};
use qvar_core::varnorm::{
    build_parent_partition, greedy_jump_count, hvar, lazy_jump_count, short_long_split,
    SampledPath, TimeGrid,
};
use qvar_core::{e, Complex64};
use qvar_harness::scans::{approx_point, quadratic_sum_scan, variation_ratio_scan};
use qvar_harness::{ExperimentConfig, FamilySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    summary: String,
}

type Criterion = fn() -> Result<Outcome, String>;

fn outcome(passed: bool, summary: impl Into<String>) -> Result<Outcome, String> {
    Ok(Outcome {
        passed,
        summary: summary.into(),
    })
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn weyl_grid(n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            (0..dim)
                .map(|j| ((i as f64 + 0.5) * (0.569_840_290_998_053 + 0.2071 * j as f64)).fract())
                .collect()
        })
        .collect()
}

fn exact_identities() -> Result<Outcome, String> {
    let tables = build_tables(500).map_err(err)?;
    let mut worst = 0f64;
    let mut counts_ok = true;
    for q in 1..=500u64 {
        let res = reduced_residues(q).map_err(err)?;
        // count by hand, independent of the sieve
        let phi = (1..=q).filter(|&a| gcd(a, q) == 1).count();
        counts_ok &= res.len() == phi && phi as u64 == tables.totient(q as usize);
        let mu = mobius_of(q) as f64;
        counts_ok &= tables.mobius(q as usize) as f64 == mu;
        for &a in &res {
            worst = worst.max((ramanujan_sum(q, a).map_err(err)? - mu).norm());
        }
    }
    // d = 1 continuous average against composite Gauss-Legendre quadrature
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cm_worst = 0f64;
    let (nodes, weights) = gauss_legendre_8();
    for _ in 0..1000 {
        let t = 10f64.powf(rng.random_range(0.0..4.0));
        let beta = rng.random_range(-1.0..1.0) * 10f64.powf(rng.random_range(-6.0..0.0));
        let phase = beta * t;
        let panels = (phase.abs() * 8.0).ceil().max(1.0) as usize;
        let h = 1.0 / panels as f64;
        let mut quad = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            for (x, w) in nodes.iter().zip(&weights) {
                let u = (p as f64 + 0.5 + 0.5 * x) * h;
                quad += e(phase * u) * (0.5 * h * w);
            }
        }
        cm_worst = cm_worst.max((cm_ft(t, &[beta], 1).map_err(err)? - quad).norm());
    }
    outcome(
        worst < 1e-9 && counts_ok && cm_worst < 1e-8,
        format!("Ramanujan residual {worst:.2e}, residue counts {}, continuous average residual {cm_worst:.2e}",
            if counts_ok { "exact" } else { "WRONG" }),
    )
}

fn gauss_legendre_8() -> (Vec<f64>, Vec<f64>) {
    let x = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    let w = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let nodes = x.iter().flat_map(|&v| [-v, v]).collect();
    let weights = w.iter().flat_map(|&v| [v, v]).collect();
    (nodes, weights)
}

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
        SampledPath::from_real_vectors(&rows).expect("rows have equal length")
    }
}

fn hvar_subsets(p: &SampledPath, q: f64) -> f64 {
    let n = p.len();
    let mut best = 0f64;
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        best = best.max(idx.windows(2).map(|w| p.dist(w[0], w[1]).powf(q)).sum());
    }
    best.powf(1.0 / q)
}

fn variation_suite() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    let rel = 1.0 + 1e-12;
    for trial in 0..500 {
        let p = random_path(&mut rng, 200);
        let n = p.len();
        for &lambda in &[0.05, 0.3, 1.0, 2.5] {
            let g = greedy_jump_count(&p, lambda).map_err(err)?;
            let l = lazy_jump_count(&p, lambda).map_err(err)?;
            let g2 = greedy_jump_count(&p, lambda / 2.0).map_err(err)?;
            if !(g <= l && l <= g2) {
                failures.push(format!("path {trial}: counts {g} {l} {g2} at {lambda}"));
            }
        }
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
        for &q in &[2.0, 3.0] {
            let h = hvar(&p, q).map_err(err)?;
            for &lambda in &[0.1, 0.5, 1.5] {
                let l = lazy_jump_count(&p, lambda).map_err(err)? as f64;
                if lambda * l.powf(1.0 / q) > h * rel {
                    failures.push(format!("path {trial}: jump lower bound at {lambda}"));
                }
            }
            if max > 0.0 {
                let (lo, hi) = (min.log2().floor() as i32 - 1, max.log2().ceil() as i32);
                let mut sum = 0.0;
                for k in lo..=hi {
                    sum += 2f64.powf(k as f64 * q)
                        * greedy_jump_count(&p, 2f64.powi(k)).map_err(err)? as f64;
                }
                if h > 4.0 * sum.powf(1.0 / q) * rel {
                    failures.push(format!("path {trial}: dyadic upper bound"));
                }
            }
            if n >= 2 {
                let mut pts: Vec<u64> = (2..n as u64).filter(|_| rng.random_bool(0.2)).collect();
                pts.extend([1, n as u64]);
                let grid = TimeGrid::from_points(pts).map_err(err)?;
                let s = short_long_split(&p, &grid, q).map_err(err)?;
                if h > (s.long + 2.0 * s.short) * rel {
                    failures.push(format!("path {trial}: long/short split"));
                }
            }
        }
    }
    for trial in 0..500 {
        let p = random_path(&mut rng, 10);
        for &q in &[1.0, 2.0, 2.5, 3.0] {
            let (a, b) = (hvar(&p, q).map_err(err)?, hvar_subsets(&p, q));
            if (a - b).abs() > 1e-12 * b.max(1.0) {
                failures.push(format!(
                    "short path {trial}: dynamic program {a} vs enumeration {b}"
                ));
            }
        }
    }
    outcome(
        failures.is_empty(),
        match failures.first() {
            None => "500 paths up to length 200 and 500 paths up to length 10, no violations"
                .to_string(),
            Some(f) => format!("{} violations, first: {f}", failures.len()),
        },
    )
}

fn parent_partition() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = 0;
    let mut levels = 0;
    for _ in 0..200 {
        let p = random_path(&mut rng, 200);
        let lambda = rng.random_range(0.01..1.0);
        let part = build_parent_partition(&p, lambda).map_err(err)?;
        let path = part.path();
        levels = levels.max(part.levels());
        let mut ok = part.check_invariants().all_hold();
        // second, independent scan over the table
        for n in 0..part.levels() {
            let lvl = part.level(n);
            let up = part.level(n + 1);
            let scale = lambda * (n as f64).exp2();
            for t in 0..lvl.len().saturating_sub(1) {
                if lvl[t] != lvl[t + 1] && path.dist(lvl[t], lvl[t + 1]) <= scale {
                    ok = false;
                }
            }
            for t in 0..lvl.len() {
                if path.dist(lvl[t], up[t]) > 2.0 * scale {
                    ok = false;
                }
            }
            let lower = part.jump_set(n);
            if part.jump_set(n + 1).iter().any(|t| !lower.contains(t)) {
                ok = false;
            }
        }
        bad += usize::from(!ok);
    }
    outcome(
        bad == 0,
        format!("200 paths, up to {levels} levels, {bad} with violations"),
    )
}

fn hua_scan() -> Result<Outcome, String> {
    let scan = quadratic_sum_scan(200).map_err(err)?;
    // spot check the quadratic sums by plain summation
    let mut direct_worst = 0f64;
    for (q, a1, a2) in [(7u64, 3u64, 5u64), (101, 0, 17), (199, 42, 1), (12, 5, 7)] {
        let direct: Complex64 = (0..q)
            .map(|x| e(((a1 * x + a2 * x * x) % q) as f64 / q as f64))
            .sum::<Complex64>()
            / q as f64;
        let theta = FreqPoint::new(vec![
            ReducedFraction::reduce(a1 as i128, q).map_err(err)?,
            ReducedFraction::reduce(a2 as i128, q).map_err(err)?,
        ])
        .map_err(err)?;
        let s = complete_poly_sum(q, &theta, 2).map_err(err)?;
        direct_worst = direct_worst.max((s - direct).norm());
    }
    outcome(
        scan.constant.is_finite() && scan.gauss_residual < 1e-9 && direct_worst < 1e-9,
        format!(
            "max |S| q^0.45 = {:.4} (q = {}), Gauss magnitude residual {:.2e}, direct sums {:.2e}",
            scan.constant, scan.constant_at, scan.gauss_residual, direct_worst
        ),
    )
}

fn prime_decay() -> Result<Outcome, String> {
    let cfg = ExperimentConfig {
        family: FamilySpec::Prime,
        density: 4,
        ..Default::default()
    };
    let tables = build_tables(1 << 16).map_err(err)?;
    let mut errs = Vec::new();
    for ex in [10u32, 12, 14, 16] {
        let n = 1u64 << ex;
        let k = prime_kernel(n as usize, &tables).map_err(err)?;
        errs.push(approx_point(&cfg, n, &k).map_err(err)?.sup_error);
    }
    let list: Vec<String> = errs.iter().map(|v| format!("{v:.4}")).collect();
    outcome(
        errs[3] < errs[0],
        format!("sup errors at 2^10..2^16: {}", list.join(", ")),
    )
}

fn poly_decay() -> Result<Outcome, String> {
    let cfg = ExperimentConfig {
        family: FamilySpec::Poly(2),
        density: 4,
        ..Default::default()
    };
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for ex in 6..=12u32 {
        let n = 1u64 << ex;
        let k = poly_kernel(n as usize, 2).map_err(err)?;
        let v = approx_point(&cfg, n, &k).map_err(err)?.sup_error;
        xs.push((n as f64).ln());
        ys.push(v.ln());
    }
    let s = slope(&xs, &ys);
    outcome(
        s <= -0.05,
        format!(
            "slope {s:.4} of log sup error vs log N, first {:.4}, last {:.4}",
            ys[0].exp(),
            ys[6].exp()
        ),
    )
}

fn bump(r2: f64, u: &[f64]) -> Complex64 {
    let r: f64 = u.iter().map(|x| x * x).sum();
    if r < r2 {
        Complex64::new((-1.0 / (r2 - r)).exp(), 0.0)
    } else {
        Complex64::new(0.0, 0.0)
    }
}

fn multiplier_identities() -> Result<Outcome, String> {
    let mut mobius = 0f64;
    let mut peak = 0f64;
    for q in 1..=12u64 {
        let cases = [
            (Family::Custom, 1, 2.0, 500.0),
            (Family::Prime, 1, 2.0, 500.0),
            (Family::Custom, 2, 1.0, 300.0),
        ];
        for (fam, d, lo, hi) in cases {
            let a = mobius_restricted_level(q, lo, hi, fam, d).map_err(err)?;
            let b = restricted_level_direct(q, lo, hi, fam, d).map_err(err)?;
            for x in weyl_grid(1000, d) {
                let (va, vb) = (a.eval(&x).map_err(err)?, b.eval(&x).map_err(err)?);
                mobius = mobius.max((va - vb).norm());
                peak = peak.max(vb.norm());
            }
        }
    }

    let m = RealMultiplier::new(vec![-0.3, -0.6], |u| bump(0.08, u) * (1.0 + u[0])).map_err(err)?;
    let mut shift = 0f64;
    for q in 1..=10u64 {
        let p = periodize(&m, q).map_err(err)?;
        for xi in weyl_grid(300, 2) {
            let base = p.eval(&xi).map_err(err)?;
            for i in 0..2 {
                let mut s = xi.clone();
                s[i] += 1.0 / q as f64;
                shift = shift.max((p.eval(&s).map_err(err)? - base).norm());
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tables = build_tables(200).map_err(err)?;
    let mut apply = 0f64;
    for trial in 0..16usize {
        // squares reach height N² in the second coordinate, so N stays small there
        let k = match trial % 4 {
            0 => prime_kernel(50 + trial * 10, &tables).map_err(err)?,
            1 | 3 => poly_kernel(3 + trial / 2, 2).map_err(err)?,
            _ => poly_kernel(10 + 5 * trial, 1).map_err(err)?,
        };
        let d = k.dim();
        let shape: Vec<usize> = (0..d).map(|_| rng.random_range(2..12)).collect();
        let len = shape.iter().product();
        let data = (0..len)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let origin = (0..d).map(|_| rng.random_range(-5..5)).collect();
        let f = LatticeSeq::from_data(origin, shape, data).map_err(err)?;
        let direct = convolve(&f, &k).map_err(err)?;
        let applied = apply_multiplier(&TorusMultiplier::from_kernel(k), &f).map_err(err)?;
        apply = apply.max(applied.seq.max_abs_diff(&direct));
    }

    let mut l1 = 0f64;
    for d in 1..=2usize {
        for q in 1..=6u64 {
            // the identity needs q ≤ 5Q, so Q starts at 2 for q ≤ 6
            for big_q in [2.0, 5.0, 10.0, 25.0] {
                let window = if d == 1 { 40 } else { 8 };
                l1 = l1.max(
                    poly_l1_identity(q, big_q, d, window)
                        .map_err(err)?
                        .max_residual,
                );
            }
        }
    }
    outcome(
        mobius < 1e-10 && peak > 0.1 && shift < 1e-12 && apply < 1e-8 && l1 < 1e-8,
        format!("Möbius assembly {mobius:.2e} (peak {peak:.3}), shift {shift:.2e}, apply vs convolve {apply:.2e}, inverse transform {l1:.2e}"),
    )
}

fn variation_ratio() -> Result<Outcome, String> {
    let cfg = ExperimentConfig {
        family: FamilySpec::Prime,
        p_exponent: 2.0,
        q_exponent: 3.0,
        epsilon: 0.7,
        variation_n_max: 1 << 14,
        ensemble: 50,
        windows: vec![64, 128, 256],
        ..Default::default()
    };
    let rec = variation_ratio_scan(&cfg).map_err(err)?;
    let growth = rec
        .checks
        .iter()
        .find(|c| c.name == "max_ratio_growth")
        .ok_or("growth check missing")?;
    let maxima: Vec<String> = cfg
        .windows
        .iter()
        .map(|w| format!("W{w} {:.4}", rec.fits[&format!("max_ratio_w{w}")]))
        .collect();
    outcome(
        rec.all_passed(),
        format!(
            "max ratios {}, worst growth {:+.4}",
            maxima.join(", "),
            growth.value.unwrap_or(f64::NAN)
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion, u64); 8] = [
        ("exact identities", exact_identities, 60),
        ("variation and jump suite", variation_suite, 120),
        ("parent partition", parent_partition, 30),
        ("complete quadratic sums", hua_scan, 120),
        ("approximation decay, primes", prime_decay, 600),
        ("approximation decay, squares", poly_decay, 600),
        ("multiplier identities", multiplier_identities, 300),
        ("variation ratio boundedness", variation_ratio, 900),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(budget);
        let (passed, summary) = match result {
            Ok(o) => (o.passed && in_time, o.summary),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!passed);
        println!(
            "criterion {} ({name}): {} | {summary} | {:.1} s of {budget} s",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of 8 criteria pass", 8 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
