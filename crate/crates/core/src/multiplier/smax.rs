use std::sync::OnceLock;

use rustfft::FftPlanner;

use super::Family;
use crate::arith::{build_tables, factorize, ArithTables};
use crate::error::{invalid, Error};
use crate::{e_rat, Complex64, Result};

/// Default bound for the omitted levels of a truncated full multiplier.
pub const DEFAULT_TAIL_TOL: f64 = 1e-4;
/// Exponent loss `δ` in the fitted polynomial decay `C 2^{-s(1/d − δ)}`.
pub const POLY_FIT_DELTA: f64 = 0.05;

/// Levels where the prime family maximum is read off exact tables.
const PRIME_EXACT_LEVELS: u32 = 20;
/// Levels beyond which the tail is treated as zero.
const LEVEL_CEILING: u32 = 400;

fn prime_tables() -> &'static ArithTables {
    static TABLES: OnceLock<ArithTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        build_tables(1 << (PRIME_EXACT_LEVELS + 1)).expect("table size is below the sieve cap")
    })
}

/// `max |(1/p^k) Σ_{n mod p^k} e(P(n)/p^k)|` over polynomials
/// `P = A_1 n + … + A_d n^d` with `A_j` not all divisible by `p`,
/// by exhaustive search.
pub fn max_complete_sum_prime_power(p: u64, k: u32, d: usize) -> Result<f64> {
    if d == 0 || k == 0 {
        return Err(invalid("need d ≥ 1 and k ≥ 1"));
    }
    let m = p.pow(k);
    let count = (m as f64).powi(d as i32);
    if count > 5e7 {
        return Err(Error::ResourceLimit(format!(
            "exhaustive search over {m}^{d} coefficient vectors"
        )));
    }
    // FFT over A_1 for every choice of the higher coefficients
    let roots: Vec<Complex64> = (0..m).map(|k| e_rat(k as i128, m)).collect();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(m as usize);
    let mut buf = vec![Complex64::new(0.0, 0.0); m as usize];
    let mut high = vec![0u64; d - 1];
    let mut best = 0.0f64;
    loop {
        let high_unit = high.iter().any(|&x| x % p != 0);
        for (n, slot) in buf.iter_mut().enumerate() {
            let n = n as u128;
            let mut phase = 0u128;
            let mut pow = n * n % m as u128;
            for &a in &high {
                phase = (phase + a as u128 * pow) % m as u128;
                pow = pow * n % m as u128;
            }
            *slot = roots[phase as usize];
        }
        fft.process(&mut buf);
        for (k, v) in buf.iter().enumerate() {
            // bin k carries A_1 = −k mod m
            if high_unit || !(k as u64).is_multiple_of(p) {
                best = best.max(v.norm() / m as f64);
            }
        }
        let mut j = high.len();
        loop {
            if j == 0 {
                return Ok(best);
            }
            j -= 1;
            high[j] += 1;
            if high[j] < m {
                break;
            }
            high[j] = 0;
        }
    }
}

/// Decay model for `S_max(s) = max_{θ ∈ R_s} |S(θ)|` and its tail sums.
#[derive(Clone, Debug)]
pub struct SmaxModel {
    family: Family,
    /// Exact values for levels `0..exact.len()`.
    exact: Vec<f64>,
    /// Constant `C` of the fitted bound used past the exact range.
    fit: Option<f64>,
}

impl SmaxModel {
    pub fn for_family(family: Family) -> Result<Self> {
        match family {
            Family::Prime => {
                let t = prime_tables();
                let mu = t.mobius_slice();
                let phi = t.totient_slice();
                let exact = (0..=PRIME_EXACT_LEVELS)
                    .map(|s| {
                        (1usize << s..1usize << (s + 1))
                            .filter(|&q| mu[q] != 0)
                            .map(|q| 1.0 / phi[q] as f64)
                            .fold(0.0, f64::max)
                    })
                    .collect();
                Ok(Self {
                    family,
                    exact,
                    fit: None,
                })
            }
            Family::Poly(1) => Ok(Self {
                family,
                exact: vec![1.0],
                fit: None,
            }),
            Family::Poly(2) => {
                // |S| at height q is at most q^{-1/2}, times √2 when q is even
                let exact: Vec<f64> = (0..=12).map(quadratic_smax).collect();
                let fit = fit_constant(&exact, 2);
                Ok(Self {
                    family,
                    exact,
                    fit: Some(fit),
                })
            }
            Family::Poly(d) if (3..=crate::kernels::MAX_POLY_DEGREE).contains(&d) => {
                let s_fit = match d {
                    3 => 6,
                    _ => 4,
                };
                let exact = poly_exact_levels(s_fit, d)?;
                let fit = fit_constant(&exact, d);
                Ok(Self {
                    family,
                    exact,
                    fit: Some(fit),
                })
            }
            Family::Poly(d) => Err(Error::Unsupported(format!("polynomial degree {d}"))),
            Family::Custom => Err(invalid(
                "custom multipliers have no coefficient decay model",
            )),
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Fitted constant `C` in `S_max(s) ≤ C 2^{-s(1/d − δ)}`, polynomial families.
    pub fn fit_constant(&self) -> Option<f64> {
        self.fit
    }

    /// Number of levels computed exactly.
    pub fn exact_levels(&self) -> usize {
        self.exact.len()
    }

    /// `S_max(s)`, exact where tabulated and a bound beyond.
    pub fn smax(&self, s: u32) -> f64 {
        if let Some(&v) = self.exact.get(s as usize) {
            return v;
        }
        match self.family {
            Family::Prime => prime_bound(s),
            Family::Poly(1) => 0.0,
            Family::Poly(2) => quadratic_smax(s),
            Family::Poly(d) => {
                let c = self.fit.unwrap_or(1.0);
                c * 2f64.powf(-(s as f64) * (1.0 / d as f64 - POLY_FIT_DELTA))
            }
            Family::Custom => 0.0,
        }
    }

    /// `Σ_{s > s_max} S_max(s)`.
    pub fn tail(&self, s_max: u32) -> f64 {
        let mut acc = 0.0;
        for s in s_max + 1..=LEVEL_CEILING {
            let v = self.smax(s);
            acc += v;
            if v < 1e-30 {
                break;
            }
        }
        acc
    }

    /// Smallest `s_max` whose tail is at most `tol`.
    pub fn required_s_max(&self, tol: f64) -> Result<u32> {
        if !(tol > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        (0..LEVEL_CEILING)
            .find(|&s| self.tail(s) <= tol)
            .ok_or_else(|| {
                Error::ResourceLimit(format!("no s_max below {LEVEL_CEILING} reaches {tol:e}"))
            })
    }
}

/// Rosser–Schoenfeld: `q/φ(q) < e^γ ln ln q + 3/ln ln q` for `q ≥ 3`.
fn prime_bound(s: u32) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let lo = (s as f64) * std::f64::consts::LN_2;
    let hi = lo + std::f64::consts::LN_2;
    (EULER_GAMMA.exp() * hi.ln() + 3.0 / lo.ln()) * 2f64.powi(-(s as i32))
}

fn quadratic_smax(s: u32) -> f64 {
    match s {
        0 => 1.0,
        _ => std::f64::consts::SQRT_2 * 2f64.powf(-(s as f64) / 2.0),
    }
}

fn fit_constant(exact: &[f64], d: usize) -> f64 {
    let rate = 1.0 / d as f64 - POLY_FIT_DELTA;
    exact
        .iter()
        .enumerate()
        .map(|(s, v)| v * 2f64.powf(s as f64 * rate))
        .fold(0.0, f64::max)
}

/// `S_max(s)` for `s ≤ s_fit` as the largest product of prime-power maxima
/// over the heights in each level; by the Chinese remainder theorem the
/// local factors vary independently.
fn poly_exact_levels(s_fit: u32, d: usize) -> Result<Vec<f64>> {
    let top = 1u64 << (s_fit + 1);
    let mut local = std::collections::HashMap::new();
    let mut levels = Vec::new();
    for s in 0..=s_fit {
        let mut best = 0.0f64;
        for q in 1u64 << s..(1u64 << (s + 1)).min(top) {
            let mut v = 1.0;
            for (p, k) in factorize(q) {
                let m = match local.get(&(p, k)) {
                    Some(&m) => m,
                    None => {
                        let m = max_complete_sum_prime_power(p, k, d)?;
                        local.insert((p, k), m);
                        m
                    }
                };
                v *= m;
            }
            best = best.max(v);
        }
        levels.push(best);
    }
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_levels_match_totients() {
        let m = SmaxModel::for_family(Family::Prime).unwrap();
        assert_eq!(m.smax(0), 1.0);
        assert_eq!(m.smax(1), 1.0); // q = 2
        assert_eq!(m.smax(2), 0.5); // q = 6 has φ = 2
        for s in 3..PRIME_EXACT_LEVELS {
            assert!(m.smax(s) <= prime_bound(s), "s = {s}");
        }
    }

    #[test]
    fn prime_tail_against_totient_sum() {
        // Σ_{s>12} max 1/φ(q) over each level, with |μ| ≤ 1
        let m = SmaxModel::for_family(Family::Prime).unwrap();
        let t = prime_tables();
        let phi = t.totient_slice();
        let mut direct = 0.0;
        for s in 13..=PRIME_EXACT_LEVELS {
            direct += (1usize << s..1usize << (s + 1))
                .map(|q| 1.0 / phi[q] as f64)
                .fold(0.0, f64::max);
        }
        let tail_exact: f64 = (13..=PRIME_EXACT_LEVELS).map(|s| m.smax(s)).sum();
        assert!(tail_exact <= direct + 1e-15);
        assert!(m.tail(12) > 0.0);
    }

    #[test]
    fn quadratic_local_maxima() {
        for p in [3u64, 5, 7, 11, 13] {
            let v = max_complete_sum_prime_power(p, 1, 2).unwrap();
            assert!((v - (p as f64).powf(-0.5)).abs() < 1e-12);
        }
        assert!((max_complete_sum_prime_power(2, 1, 2).unwrap() - 1.0).abs() < 1e-12);
        for k in 2..=5u32 {
            let v = max_complete_sum_prime_power(2, k, 2).unwrap();
            assert!(
                (v - 2f64.powf((1.0 - k as f64) / 2.0)).abs() < 1e-12,
                "k = {k}"
            );
        }
        let exact = poly_exact_levels(7, 2).unwrap();
        for (s, v) in exact.iter().enumerate() {
            assert!((v - quadratic_smax(s as u32)).abs() < 1e-12, "s = {s}");
        }
    }

    #[test]
    fn required_levels() {
        let p = SmaxModel::for_family(Family::Prime).unwrap();
        let s = p.required_s_max(DEFAULT_TAIL_TOL).unwrap();
        assert!(p.tail(s) <= DEFAULT_TAIL_TOL && p.tail(s - 1) > DEFAULT_TAIL_TOL);
        let q = SmaxModel::for_family(Family::Poly(2)).unwrap();
        let s2 = q.required_s_max(DEFAULT_TAIL_TOL).unwrap();
        assert!(s2 > s);
        assert!(q.fit_constant().unwrap() >= 1.0);
        let c = SmaxModel::for_family(Family::Poly(1)).unwrap();
        assert_eq!(c.required_s_max(1e-12).unwrap(), 0);
    }

    #[test]
    fn cubic_model_is_bounded_by_fit() {
        let m = SmaxModel::for_family(Family::Poly(3)).unwrap();
        let c = m.fit_constant().unwrap();
        for s in 0..m.exact_levels() as u32 {
            assert!(m.smax(s) <= c * 2f64.powf(-(s as f64) * (1.0 / 3.0 - POLY_FIT_DELTA)) + 1e-15);
        }
    }
}
