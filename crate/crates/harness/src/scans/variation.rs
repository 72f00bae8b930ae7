use qvar_core::arith::ArithTables;
use qvar_core::varnorm::{
    hvar, ivar, make_time_grid, short_long_split, sup_norm, SampledPath, TimeGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, FamilySpec};
use crate::env;
use crate::error::{HarnessError, Result};
use crate::record::{Cell, Check, RunRecord};
use crate::stats::{derive_seed, median};

/// Time grid, kernel weights and exponents for one variation scan.
#[derive(Clone, Debug)]
pub struct VariationSetup {
    /// The averaging lengths `N` of the time grid.
    pub times: Vec<u64>,
    /// Dyadic subgrid used for the long/short split, always containing the
    /// first and last time.
    pub coarse: TimeGrid,
    /// `w[n]`: unnormalized kernel weight at `n`, so `K_N(n) = w[n]/N`.
    pub weights: Vec<f64>,
    pub p: f64,
    pub q: f64,
}

impl VariationSetup {
    pub fn new(
        family: FamilySpec,
        epsilon: f64,
        n_max: u64,
        p: f64,
        q: f64,
        tables: Option<&ArithTables>,
    ) -> Result<Self> {
        if n_max < 2 {
            return Err(HarnessError::Config(
                "variation_n_max must be at least 2".into(),
            ));
        }
        let lg = (n_max as f64).log2();
        let k_max = lg.powf(1.0 / epsilon).ceil() as u32 + 1;
        let times = make_time_grid(epsilon, k_max)?
            .truncate_to(n_max)
            .points()
            .to_vec();
        let mut coarse = vec![times[0]];
        let mut next = times[0].next_power_of_two();
        for &t in &times {
            if t >= next {
                coarse.push(t);
                next = (t + 1).next_power_of_two();
            }
        }
        coarse.push(*times.last().unwrap());
        let coarse = TimeGrid::from_points(coarse)?;
        let top = *times.last().unwrap() as usize;
        let weights = match family {
            FamilySpec::Prime => {
                let t = tables
                    .ok_or_else(|| HarnessError::Usage("prime family needs tables".into()))?;
                if t.limit() < top {
                    return Err(HarnessError::Usage(format!(
                        "tables stop at {}, need {top}",
                        t.limit()
                    )));
                }
                (0..=top)
                    .map(|n| if n == 0 { 0.0 } else { t.von_mangoldt(n) })
                    .collect()
            }
            FamilySpec::Poly(1) => (0..=top).map(|n| if n == 0 { 0.0 } else { 1.0 }).collect(),
            FamilySpec::Poly(d) => {
                return Err(qvar_core::Error::Unsupported(format!(
                    "variation scan runs on Z only; degree {d} averages live on Z^{d}"
                ))
                .into())
            }
        };
        Ok(Self {
            times,
            coarse,
            weights,
            p,
            q,
        })
    }
}

/// Per-function outcome of the variation measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioMeasurement {
    pub f_norm: f64,
    /// `‖ iV^q_N (K_N ∗ f)(x) ‖_{ℓ^p_x}`.
    pub ivar_norm: f64,
    /// `ivar_norm / f_norm`; `None` for `f = 0`.
    pub ratio: Option<f64>,
    pub long_norm: f64,
    pub short_norm: f64,
    /// Whether `iV ≥ sup_N |·|` and `iV ≥ hV` held at every `x`.
    pub cross_checks_hold: bool,
}

fn lp(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    values.map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `(K_N ∗ f)(x)` for every grid `N` and every `x` where it can be nonzero.
/// `f` is supported on `0..f.len()`; row `x` of the result holds the
/// values at `x` for increasing `N`.
pub fn averages(setup: &VariationSetup, f: &[f64]) -> Vec<Vec<f64>> {
    let top = *setup.times.last().unwrap() as usize;
    let width = f.len() + top;
    let mut acc = vec![0.0; width];
    let mut out = vec![Vec::with_capacity(setup.times.len()); width];
    let mut k = 0;
    for n in 1..=top {
        let w = setup.weights[n];
        if w != 0.0 {
            for (j, &v) in f.iter().enumerate() {
                acc[j + n] += w * v;
            }
        }
        while k < setup.times.len() && setup.times[k] as usize == n {
            let nf = n as f64;
            for (row, &a) in out.iter_mut().zip(&acc) {
                row.push(a / nf);
            }
            k += 1;
        }
    }
    out
}

pub fn variation_ratio(setup: &VariationSetup, f: &[f64]) -> Result<RatioMeasurement> {
    let times: Vec<f64> = setup.times.iter().map(|&t| t as f64).collect();
    let mut iv = Vec::new();
    let mut long = Vec::new();
    let mut short = Vec::new();
    let mut ok = true;
    for row in averages(setup, f) {
        let path = SampledPath::from_real_with_times(times.clone(), &row)?;
        let i = ivar(&path, setup.q)?;
        let h = hvar(&path, setup.q)?;
        let s = sup_norm(&path);
        let slack = 1e-12 * i.max(1e-300);
        ok &= i + slack >= s && i + slack >= h;
        let ls = short_long_split(&path, &setup.coarse, setup.q)?;
        iv.push(i);
        long.push(ls.long);
        short.push(ls.short);
    }
    let f_norm = lp(f.iter().copied(), setup.p);
    let ivar_norm = lp(iv.into_iter(), setup.p);
    Ok(RatioMeasurement {
        f_norm,
        ivar_norm,
        ratio: (f_norm > 0.0).then(|| ivar_norm / f_norm),
        long_norm: lp(long.into_iter(), setup.p),
        short_norm: lp(short.into_iter(), setup.p),
        cross_checks_hold: ok,
    })
}

/// Ensemble member: even indices draw Rademacher signs, odd ones standard
/// Gaussians.
pub fn ensemble_member(seed: u64, width: usize, member: usize) -> (&'static str, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[width as u64, member as u64]));
    if member.is_multiple_of(2) {
        (
            "rademacher",
            (0..width)
                .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                .collect(),
        )
    } else {
        (
            "gaussian",
            (0..width).map(|_| rng.sample(StandardNormal)).collect(),
        )
    }
}

/// Ratios `‖ iV^q (K_N ∗ f) ‖_{ℓ^p} / ‖f‖_{ℓ^p}` over random ensembles, per
/// window width, with the long/short split of every member.
pub fn variation_ratio_scan(config: &ExperimentConfig) -> Result<RunRecord> {
    if config.ensemble == 0 {
        return Err(HarnessError::Config("ensemble must be at least 1".into()));
    }
    if config.windows.is_empty() {
        return Err(HarnessError::Config("windows must not be empty".into()));
    }
    let tables = match config.family {
        FamilySpec::Prime => Some(env::tables(config.variation_n_max as usize)?),
        FamilySpec::Poly(_) => None,
    };
    let setup = VariationSetup::new(
        config.family,
        config.epsilon,
        config.variation_n_max,
        config.p_exponent,
        config.q_exponent,
        tables.as_ref(),
    )?;
    let mut rec = RunRecord::new(
        "variation-scan",
        config,
        &[
            "window",
            "member",
            "distribution",
            "f_norm",
            "ivar_norm",
            "ratio",
            "long_norm",
            "short_norm",
            "cross_checks",
        ],
    );
    rec.notes.push(format!(
        "time grid: {} values of floor(2^(k^{})) up to {}; long/short split on the {}-point dyadic subgrid",
        setup.times.len(),
        config.epsilon,
        setup.times.last().unwrap(),
        setup.coarse.len()
    ));
    rec.notes.push("ensembles alternate Rademacher and standard Gaussian entries; seeds derive from (seed, window, member)".into());

    let mut maxima = Vec::new();
    let mut all_ok = true;
    for &w in &config.windows {
        let results: Vec<(&str, RatioMeasurement)> = (0..config.ensemble)
            .into_par_iter()
            .map(|m| {
                let (dist, f) = ensemble_member(config.seed, w, m);
                variation_ratio(&setup, &f).map(|r| (dist, r))
            })
            .collect::<Result<_>>()?;
        let mut ratios = Vec::new();
        for (m, (dist, r)) in results.iter().enumerate() {
            all_ok &= r.cross_checks_hold;
            if let Some(x) = r.ratio {
                ratios.push(x);
            }
            rec.push_row(vec![
                w.into(),
                m.into(),
                (*dist).into(),
                r.f_norm.into(),
                r.ivar_norm.into(),
                r.ratio.map_or(Cell::Missing, Cell::float),
                r.long_norm.into(),
                r.short_norm.into(),
                Cell::Int(r.cross_checks_hold as i64),
            ]);
        }
        let max = ratios.iter().copied().fold(f64::NAN, f64::max);
        rec.fit(&format!("max_ratio_w{w}"), max);
        rec.fit(&format!("median_ratio_w{w}"), median(&ratios));
        maxima.push((w, max));
    }
    rec.check(Check::new(
        "ivar_dominates_sup_and_hvar",
        all_ok,
        None,
        "checked at every x of every member",
    ));
    let tol = config.tol("window_growth");
    let mut worst = f64::NEG_INFINITY;
    for pair in maxima.windows(2) {
        let g = pair[1].1 / pair[0].1 - 1.0;
        rec.fit(&format!("growth_w{}_to_w{}", pair[0].0, pair[1].0), g);
        worst = worst.max(g);
    }
    if maxima.len() >= 2 {
        rec.check(Check::new(
            "max_ratio_growth",
            worst < tol,
            Some(worst),
            format!("largest relative growth of the maximal ratio between consecutive windows, limit {tol}"),
        ));
    }
    Ok(rec)
}
