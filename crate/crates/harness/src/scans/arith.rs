use std::f64::consts::PI;

use qvar_core::arith::{
    complete_poly_sum, gcd, ramanujan_sum, reduced_residues, ArithTables, FreqPoint,
    ReducedFraction,
};
use qvar_core::kernels::cm_ft;
use qvar_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::env;
use crate::error::{HarnessError, Result};
use crate::record::{Cell, Check, RunRecord};
use crate::stats::derive_seed;

/// Exponent saving over the trivial bound used when scanning quadratic sums.
pub const HUA_SAVING: f64 = 0.05;

/// Runs the arithmetic identity suite on freshly built (or cached) tables.
pub fn verify_arith(config: &ExperimentConfig) -> Result<RunRecord> {
    let tables = env::tables(config.limit.max(2) as usize)?;
    verify_arith_with_tables(config, &tables)
}

/// [`verify_arith`] against caller-supplied tables, so a corrupted table can
/// be injected.
pub fn verify_arith_with_tables(
    config: &ExperimentConfig,
    tables: &ArithTables,
) -> Result<RunRecord> {
    if config.limit as usize > tables.limit() {
        return Err(HarnessError::Usage(format!(
            "limit {} exceeds the table size {}",
            config.limit,
            tables.limit()
        )));
    }
    let mut rec = RunRecord::new(
        "verify-arith",
        config,
        &[
            "q",
            "mobius",
            "totient",
            "residues",
            "max_residual",
            "worst_a",
            "passed",
        ],
    );
    let tol = config.tol("ramanujan");

    let per_q: Vec<(u64, usize, f64, u64)> = (1..=config.limit)
        .into_par_iter()
        .map(|q| {
            let residues = reduced_residues(q)?;
            let mu = tables.mobius(q as usize) as f64;
            let mut worst = (0.0f64, residues.first().copied().unwrap_or(0));
            for &a in &residues {
                let r = (ramanujan_sum(q, a)? - Complex64::new(mu, 0.0)).norm();
                if r > worst.0 {
                    worst = (r, a);
                }
            }
            Ok((q, residues.len(), worst.0, worst.1))
        })
        .collect::<qvar_core::Result<_>>()?;

    let mut max_res = 0f64;
    let mut first_bad: Option<(u64, u64, f64)> = None;
    let mut count_bad: Option<(u64, usize, u64)> = None;
    for &(q, count, res, a) in &per_q {
        let phi = tables.totient(q as usize);
        let ok = res < tol && count as u64 == phi;
        if res >= tol && first_bad.is_none() {
            first_bad = Some((q, a, res));
        }
        if count as u64 != phi && count_bad.is_none() {
            count_bad = Some((q, count, phi));
        }
        max_res = max_res.max(res);
        rec.push_row(vec![
            q.into(),
            (tables.mobius(q as usize) as i64).into(),
            phi.into(),
            count.into(),
            res.into(),
            a.into(),
            Cell::Int(ok as i64),
        ]);
    }
    rec.check(Check::new(
        "ramanujan_equals_mobius",
        first_bad.is_none(),
        Some(max_res),
        match first_bad {
            Some((q, a, r)) => format!("fails at (q, a) = ({q}, {a}) with residual {r:.3e}"),
            None => format!("all q <= {} within {tol:e}", config.limit),
        },
    ));
    rec.check(Check::new(
        "residue_count_equals_totient",
        count_bad.is_none(),
        None,
        match count_bad {
            Some((q, c, phi)) => format!("q = {q}: {c} residues but totient {phi}"),
            None => "exact for every q".to_string(),
        },
    ));

    let cm = continuous_average_check(config)?;
    rec.check(cm);

    let hua = quadratic_sum_scan(config.hua_limit)?;
    rec.fit("hua_constant", hua.constant);
    rec.check(Check::new(
        "hua_constant_finite",
        hua.constant.is_finite(),
        Some(hua.constant),
        format!(
            "max |S| q^(1/2 - {HUA_SAVING}) over heights <= {}, attained at q = {}",
            config.hua_limit, hua.constant_at
        ),
    ));
    let gtol = config.tol("gauss_sum");
    rec.check(Check::new(
        "gauss_sum_magnitude",
        hua.gauss_residual < gtol,
        Some(hua.gauss_residual),
        format!(
            "odd primes <= {}: | |S| - q^(-1/2) | < {gtol:e}",
            config.hua_limit
        ),
    ));
    rec.check(Check::new(
        "complete_sums_bounded",
        hua.max_abs <= 1.0 + 1e-12,
        Some(hua.max_abs),
        "|S| <= 1",
    ));
    Ok(rec)
}

/// `(e(a) − 1)/(2πia)`, the exact one-dimensional continuous average.
pub fn linear_average(a: f64) -> Complex64 {
    if a == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let s = (PI * a).sin();
    Complex64::new(-2.0 * s * s, (2.0 * PI * a).sin()) / Complex64::new(0.0, 2.0 * PI * a)
}

fn continuous_average_check(config: &ExperimentConfig) -> Result<Check> {
    let tol = config.tol("cm_closed_form");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[1]));
    let samples: Vec<(f64, f64)> = (0..config.cm_samples)
        .map(|_| {
            let t = 10f64.powf(rng.random_range(0.0..5.0));
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            (t, sign * 10f64.powf(rng.random_range(-8.0..0.0)))
        })
        .collect();
    let residuals: Vec<f64> = samples
        .par_iter()
        .map(|&(t, b)| Ok((cm_ft(t, &[b], 1)? - linear_average(b * t)).norm()))
        .collect::<qvar_core::Result<_>>()?;
    let (worst_i, worst) =
        residuals.iter().copied().enumerate().fold(
            (0, 0f64),
            |acc, (i, r)| if r > acc.1 { (i, r) } else { acc },
        );
    let detail = match samples.get(worst_i) {
        Some((t, b)) => format!(
            "{} samples, worst at t = {t:.6e}, beta = {b:.6e}",
            samples.len()
        ),
        None => "no samples".to_string(),
    };
    Ok(Check::new(
        "continuous_average_closed_form",
        worst < tol,
        Some(worst),
        detail,
    ))
}

/// Summary of the scan over all quadratic complete sums of bounded height.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticScan {
    /// `max |S(θ)| q^{1/2 − 0.05}`.
    pub constant: f64,
    pub constant_at: u64,
    /// Largest `| |S| − q^{−1/2} |` at odd prime heights with `a_2 ≠ 0`.
    pub gauss_residual: f64,
    pub max_abs: f64,
    pub points: usize,
}

pub fn quadratic_sum_scan(limit: u64) -> Result<QuadraticScan> {
    let per_q: Vec<(u64, f64, f64, f64, usize)> = (1..=limit)
        .into_par_iter()
        .map(|q| {
            let prime = q > 2 && (2..q).take_while(|d| d * d <= q).all(|d| q % d != 0);
            let mut max_abs = 0f64;
            let mut gauss = 0f64;
            let mut points = 0;
            for a2 in 0..q {
                let c2 = ReducedFraction::reduce(a2 as i128, q)?;
                for a1 in 0..q {
                    if gcd(gcd(a1, a2), q) != 1 {
                        continue;
                    }
                    let theta = FreqPoint::new(vec![ReducedFraction::reduce(a1 as i128, q)?, c2])?;
                    let s = complete_poly_sum(q, &theta, 2)?.norm();
                    points += 1;
                    max_abs = max_abs.max(s);
                    if prime && a2 != 0 {
                        gauss = gauss.max((s - (q as f64).powf(-0.5)).abs());
                    }
                }
            }
            let c = max_abs * (q as f64).powf(0.5 - HUA_SAVING);
            Ok((q, c, gauss, max_abs, points))
        })
        .collect::<qvar_core::Result<_>>()?;
    let mut out = QuadraticScan {
        constant: 0.0,
        constant_at: 1,
        gauss_residual: 0.0,
        max_abs: 0.0,
        points: 0,
    };
    for (q, c, g, m, p) in per_q {
        if c > out.constant {
            out.constant = c;
            out.constant_at = q;
        }
        out.gauss_residual = out.gauss_residual.max(g);
        out.max_abs = out.max_abs.max(m);
        out.points += p;
    }
    Ok(out)
}
