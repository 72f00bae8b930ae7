use std::collections::BTreeMap;

use qvar_core::varnorm::{greedy_jump_count, hvar, SampledPath};
use qvar_core::{e, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::record::{Cell, Check, RunRecord};
use crate::stats::{derive_seed, linear_fit};

/// Length of the interval `I = [0, L]` the frequencies are tested on.
pub const INTERVAL: f64 = 4.0;
/// Quadrature nodes per unit length and per frequency.
const NODES_PER_UNIT: usize = 32;
const POWER_ITERATIONS: usize = 500;

/// Both sides of the jump-counting bound for one coefficient path, plus
/// the normalized quantity of the multi-frequency corollary.
#[derive(Clone, Debug, PartialEq)]
pub struct MultifreqMeasurement {
    /// `‖ ‖⟨c_t, g(y)⟩‖_{hV^q_t} ‖_{L²_y(I)}` with `g(y) = (e(ξ_l y))_l`.
    pub lhs: f64,
    /// `∫_0^∞ min(M J_λ^{1/2}, ‖g‖ J_λ^{1/q}) dλ`, `J_λ` the greedy count.
    pub envelope: f64,
    /// `sup_{‖c‖=1} ‖⟨c, g⟩‖_{L²(I)}`.
    pub m: f64,
    /// `‖g‖_{L²(I, ℓ²)} = (#ξ · |I|)^{1/2}`.
    pub g_norm: f64,
    /// `‖c‖_{hV^r(ℓ²)}`.
    pub path_rvar: f64,
}

impl MultifreqMeasurement {
    pub fn envelope_ratio(&self) -> Option<f64> {
        (self.envelope > 0.0).then(|| self.lhs / self.envelope)
    }

    /// `lhs / (|I|^{1/2} ‖c‖_{hV^r})`.
    pub fn corollary_ratio(&self, interval: f64) -> Option<f64> {
        let den = interval.sqrt() * self.path_rvar;
        (den > 0.0).then(|| self.lhs / den)
    }
}

/// Largest singular value of `c ↦ ⟨c, g⟩` from `ℓ²` to `L²(I)`: the square
/// root of the top eigenvalue of the Gram matrix
/// `G_{lk} = ∫_0^L e((ξ_l − ξ_k) y) dy`, found by power iteration.
pub fn dual_norm(freqs: &[f64], interval: f64) -> f64 {
    let n = freqs.len();
    if n == 0 {
        return 0.0;
    }
    let gram: Vec<Complex64> = (0..n * n)
        .map(|i| {
            let d = freqs[i / n] - freqs[i % n];
            if d == 0.0 {
                Complex64::new(interval, 0.0)
            } else {
                (e(d * interval) - 1.0) / Complex64::new(0.0, 2.0 * std::f64::consts::PI * d)
            }
        })
        .collect();
    let mut v = vec![Complex64::new(1.0, 0.0); n];
    let mut lambda = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w: Vec<Complex64> = (0..n)
            .map(|i| (0..n).map(|k| gram[i * n + k] * v[k]).sum())
            .collect();
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm / v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v = w.into_iter().map(|z| z / norm).collect();
        if (next - lambda).abs() <= 1e-14 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

/// `∫_0^∞ min(a J_λ^{1/2}, b J_λ^{1/q}) dλ`, exact: `J_λ` is constant
/// between consecutive pairwise distances of the path.
pub fn jump_envelope(path: &SampledPath, a: f64, b: f64, q: f64) -> Result<f64> {
    let n = path.len();
    let mut cuts: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| path.dist(i, j))
        .collect();
    cuts.retain(|d| *d > 0.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    let mut lo = 0.0;
    for &hi in &cuts {
        let jumps = greedy_jump_count(path, 0.5 * (lo + hi))? as f64;
        total += (hi - lo) * (a * jumps.sqrt()).min(b * jumps.powf(1.0 / q));
        lo = hi;
    }
    Ok(total)
}

/// Evaluates both sides for frequencies `freqs` and coefficient rows
/// `paths[t][l]`.
pub fn measure(
    freqs: &[f64],
    paths: &[Vec<Complex64>],
    interval: f64,
    q: f64,
    r: f64,
) -> Result<MultifreqMeasurement> {
    let nf = freqs.len();
    if nf == 0 || paths.is_empty() || paths.iter().any(|p| p.len() != nf) {
        return Err(HarnessError::Usage(
            "need at least one frequency and matching coefficient rows".into(),
        ));
    }
    let times: Vec<f64> = (1..=paths.len()).map(|t| t as f64).collect();
    let flat: Vec<Complex64> = paths.iter().flatten().copied().collect();
    let cpath = SampledPath::new(times.clone(), nf, flat)?;
    let nodes = (NODES_PER_UNIT as f64 * interval).ceil() as usize * (nf + 1);
    let h = interval / nodes as f64;
    let mut acc = 0.0;
    for i in 0..nodes {
        let y = (i as f64 + 0.5) * h;
        let g: Vec<Complex64> = freqs.iter().map(|&x| e(x * y)).collect();
        let vals: Vec<Complex64> = paths
            .iter()
            .map(|c| c.iter().zip(&g).map(|(a, b)| a * b).sum())
            .collect();
        let v = hvar(&SampledPath::from_complex(times.clone(), vals)?, q)?;
        acc += v * v * h;
    }
    let m = dual_norm(freqs, interval);
    let g_norm = (nf as f64 * interval).sqrt();
    Ok(MultifreqMeasurement {
        lhs: acc.sqrt(),
        envelope: jump_envelope(&cpath, m, g_norm, q)?,
        m,
        g_norm,
        path_rvar: hvar(&cpath, r)?,
    })
}

/// Frequencies `l + u_l`, `u_l ∈ [0, 1/4)`, so neighbours are at least
/// `3/4` apart.
pub fn separated_frequencies(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    (0..count)
        .map(|l| l as f64 + rng.random_range(0.0..0.25))
        .collect()
}

/// Random walk in `C^count` with standard complex Gaussian steps.
pub fn random_path(rng: &mut ChaCha8Rng, count: usize, len: usize) -> Vec<Vec<Complex64>> {
    let mut cur = vec![Complex64::new(0.0, 0.0); count];
    (0..len)
        .map(|_| {
            for z in cur.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *z += Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            }
            cur.clone()
        })
        .collect()
}

/// Empirical constants of the multi-frequency variation bounds: the
/// jump-counting envelope ratio, the growth exponent in the number of
/// frequencies, and the constant against the `(q (log N + 1)/(q − 2))²`
/// shape.
pub fn multifreq_constant_scan(config: &ExperimentConfig) -> Result<RunRecord> {
    if config.freq_counts.is_empty() || config.freq_counts.contains(&0) {
        return Err(HarnessError::Config(
            "freq_counts must be nonempty and positive".into(),
        ));
    }
    if config.path_length == 0 || config.trials == 0 {
        return Err(HarnessError::Config(
            "path_length and trials must be positive".into(),
        ));
    }
    let q = config.q_exponent;
    let r = config.r_exponent;
    let mut rec = RunRecord::new(
        "multifreq-scan",
        config,
        &[
            "freq_count",
            "trial",
            "lhs",
            "envelope",
            "envelope_ratio",
            "corollary_ratio",
            "dual_norm",
            "g_norm",
        ],
    );
    rec.notes.push(format!(
        "frequencies l + U[0, 1/4) on I = [0, {INTERVAL}]; coefficient paths are complex Gaussian random walks of length {}",
        config.path_length
    ));

    let mut envelope_max = 0f64;
    let mut cor_max: BTreeMap<usize, f64> = BTreeMap::new();
    for &nf in &config.freq_counts {
        let results: Vec<MultifreqMeasurement> = (0..config.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[nf as u64, t as u64]));
                let freqs = separated_frequencies(&mut rng, nf);
                let paths = random_path(&mut rng, nf, config.path_length);
                measure(&freqs, &paths, INTERVAL, q, r)
            })
            .collect::<Result<_>>()?;
        let mut worst = 0f64;
        for (t, m) in results.iter().enumerate() {
            let lr = m.envelope_ratio();
            let cr = m.corollary_ratio(INTERVAL);
            envelope_max = envelope_max.max(lr.unwrap_or(0.0));
            worst = worst.max(cr.unwrap_or(0.0));
            rec.push_row(vec![
                nf.into(),
                t.into(),
                m.lhs.into(),
                m.envelope.into(),
                lr.map_or(Cell::Missing, Cell::float),
                cr.map_or(Cell::Missing, Cell::float),
                m.m.into(),
                m.g_norm.into(),
            ]);
        }
        cor_max.insert(nf, worst);
    }
    rec.fit("envelope_constant", envelope_max);
    rec.check(Check::new(
        "envelope_constant_finite",
        envelope_max.is_finite(),
        Some(envelope_max),
        "max over trials of lhs / envelope",
    ));
    let shape = |n: usize| (q * ((n as f64).ln() + 1.0) / (q - 2.0)).powi(2);
    let prop_const = cor_max
        .iter()
        .map(|(&n, &c)| c / shape(n))
        .fold(0.0, f64::max);
    rec.fit("log_shape_constant", prop_const);

    let predicted = (0.5 - 1.0 / r) * q / (q - 2.0);
    rec.fit("predicted_exponent", predicted);
    let pts: Vec<(f64, f64)> = cor_max
        .iter()
        .filter(|(_, &c)| c > 0.0)
        .map(|(&n, &c)| ((n as f64).ln(), c.ln()))
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    match linear_fit(&x, &y) {
        Some((slope, _)) => {
            rec.fit("fitted_exponent", slope);
            let slack = config.tol("exponent_slack");
            rec.check(Check::new(
                "exponent_within_prediction",
                slope <= predicted + slack,
                Some(slope),
                format!("fitted growth in the number of frequencies vs ({predicted:.4} + {slack})"),
            ));
        }
        None => rec
            .notes
            .push("fewer than two frequency counts: no exponent fit".into()),
    }
    Ok(rec)
}
