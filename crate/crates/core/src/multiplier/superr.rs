use std::fmt::Write as _;

use rayon::prelude::*;
use rustfft::FftPlanner;

use super::{Candidate, TorusMultiplier};
use crate::error::{invalid, Error};
use crate::kernels::{frac_product, kernel_ft, DiscreteKernel};
use crate::{e, Complex64, Result};

/// Irrational grid offsets, one per coordinate, so that no grid point is a
/// rational with small denominator.
const OFFSETS: [f64; 4] = [
    0.618_033_988_749_894_9,
    0.414_213_562_373_095_1,
    0.732_050_807_568_877_2,
    0.236_067_977_499_789_8,
];
const GRID_BUDGET: f64 = (1u64 << 30) as f64;
const TOP: usize = 10;
const REFINE_STEPS: usize = 30;

/// Outcome of a sup-norm scan of `K̂ − L`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupErrorReport {
    /// Largest difference found, after refinement.
    pub value: f64,
    /// Largest difference on the uniform grid alone.
    pub grid_max: f64,
    pub argmax: Vec<f64>,
    /// Number of evaluation points used.
    pub points: usize,
    pub density: usize,
}

/// `max |K̂(α) − L(α)|` over a uniform grid of `grid_density` points per
/// coordinate, refined locally around the ten largest grid values. This is
/// an estimate from below, not a certified maximum.
pub fn sup_error(k: &DiscreteKernel, l: &TorusMultiplier, grid_density: usize) -> Result<f64> {
    Ok(sup_error_report(k, l, grid_density)?.value)
}

#[derive(Clone, Copy, Debug)]
struct Peak {
    value: f64,
    index: usize,
}

/// Keeps the largest values, dropping any that sit within two grid cells
/// of a larger one.
#[derive(Clone, Debug)]
struct TopList {
    peaks: Vec<Peak>,
    m: usize,
    d: usize,
}

impl TopList {
    fn new(m: usize, d: usize) -> Self {
        Self {
            peaks: Vec::with_capacity(TOP + 1),
            m,
            d,
        }
    }

    fn near(&self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (a, b);
        for _ in 0..self.d {
            let (x, y) = (a % self.m, b % self.m);
            let gap = x.abs_diff(y);
            if gap.min(self.m - gap) > 2 {
                return false;
            }
            a /= self.m;
            b /= self.m;
        }
        true
    }

    fn floor(&self) -> f64 {
        if self.peaks.len() < TOP {
            f64::NEG_INFINITY
        } else {
            self.peaks[TOP - 1].value
        }
    }

    fn offer(&mut self, p: Peak) {
        if p.value <= self.floor() {
            return;
        }
        if let Some(i) = self.peaks.iter().position(|q| self.near(q.index, p.index)) {
            if better(&p, &self.peaks[i]) {
                self.peaks.remove(i);
            } else {
                return;
            }
        }
        let at = self
            .peaks
            .iter()
            .position(|q| better(&p, q))
            .unwrap_or(self.peaks.len());
        self.peaks.insert(at, p);
        self.peaks.truncate(TOP);
    }

    fn merge(mut self, other: TopList) -> TopList {
        for p in other.peaks {
            self.offer(p);
        }
        self
    }
}

/// Total order: larger value first, ties by index.
fn better(a: &Peak, b: &Peak) -> bool {
    a.value > b.value || (a.value == b.value && a.index < b.index)
}

/// [`sup_error`] with the full report.
pub fn sup_error_report(
    k: &DiscreteKernel,
    l: &TorusMultiplier,
    grid_density: usize,
) -> Result<SupErrorReport> {
    let d = k.dim();
    if l.dim() != d {
        return Err(invalid(format!(
            "kernel has dimension {d}, multiplier has {}",
            l.dim()
        )));
    }
    if d > OFFSETS.len() {
        return Err(Error::Unsupported(format!("dimension {d}")));
    }
    let m = grid_density.max(1);
    if (m as f64).powi(d as i32) > GRID_BUDGET {
        return Err(Error::ResourceLimit(format!("{m}^{d} grid points")));
    }
    let coord = |j: usize, i: usize| (i as f64 + OFFSETS[j]) / m as f64;
    let bourgain = l.as_bourgain();
    // per-coordinate candidate lists, shared by every row
    let lists: Option<Vec<Vec<Vec<Candidate>>>> = bourgain.map(|b| {
        (0..d)
            .map(|j| {
                (0..m)
                    .into_par_iter()
                    .map(|i| b.candidates(coord(j, i)))
                    .collect()
            })
            .collect()
    });
    let rows = m.pow(d as u32 - 1);
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(m);
    let top = (0..rows)
        .into_par_iter()
        .map(|row| -> Result<TopList> {
            let mut top = TopList::new(m, d);
            // row index encodes coordinates 1..d, coordinate 0 runs along the FFT
            let mut rest = vec![0usize; d];
            let mut r = row;
            for j in (1..d).rev() {
                rest[j] = r % m;
                r /= m;
            }
            let alpha_rest: Vec<f64> = (1..d).map(|j| coord(j, rest[j])).collect();
            let mut buf = vec![Complex64::new(0.0, 0.0); m];
            let shift = OFFSETS[0] / m as f64;
            for (x, w) in k.iter() {
                let mut ph = frac_product(shift, x[0]);
                for j in 1..d {
                    ph += frac_product(alpha_rest[j - 1], x[j]);
                }
                buf[x[0].rem_euclid(m as i64) as usize] += e(ph) * w;
            }
            fft.process(&mut buf);
            let mut alpha = vec![0.0; d];
            alpha[1..].copy_from_slice(&alpha_rest);
            for (i, kv) in buf.iter().enumerate() {
                alpha[0] = coord(0, i);
                let lv = match (&lists, bourgain) {
                    (Some(lists), Some(b)) => {
                        let mut refs: Vec<&[Candidate]> = Vec::with_capacity(d);
                        refs.push(&lists[0][i]);
                        for j in 1..d {
                            refs.push(&lists[j][rest[j]]);
                        }
                        b.eval_candidates(&refs)?
                    }
                    _ => l.eval(&alpha)?,
                };
                let index = row * m + i;
                top.offer(Peak {
                    value: (kv - lv).norm(),
                    index,
                });
            }
            Ok(top)
        })
        .try_reduce(|| TopList::new(m, d), |a, b| Ok(a.merge(b)))?;
    let grid_max = top.peaks.first().map_or(0.0, |p| p.value);
    let point_of = |index: usize| -> Vec<f64> {
        let mut out = vec![0.0; d];
        out[0] = coord(0, index % m);
        let mut r = index / m;
        for j in (1..d).rev() {
            out[j] = coord(j, r % m);
            r /= m;
        }
        out
    };
    let diff = |a: &[f64]| -> Result<f64> { Ok((kernel_ft(k, a)? - l.eval(a)?).norm()) };
    let refined: Vec<(f64, Vec<f64>, usize)> = top
        .peaks
        .par_iter()
        .map(|p| -> Result<(f64, Vec<f64>, usize)> {
            let mut center = point_of(p.index);
            let mut best = p.value;
            let mut h = 1.0 / m as f64;
            let mut evals = 0;
            let stencil = 5usize.pow(d as u32);
            for _ in 0..REFINE_STEPS {
                let mut next = center.clone();
                for c in 0..stencil {
                    let mut a = center.clone();
                    let mut r = c;
                    for v in a.iter_mut() {
                        *v += h * ((r % 5) as f64 - 2.0) / 2.0;
                        r /= 5;
                    }
                    let v = diff(&a)?;
                    evals += 1;
                    if v > best {
                        best = v;
                        next = a;
                    }
                }
                center = next;
                h /= 2.0;
            }
            Ok((best, center, evals))
        })
        .collect::<Result<_>>()?;
    let mut value = grid_max;
    let mut argmax = top
        .peaks
        .first()
        .map(|p| point_of(p.index))
        .unwrap_or_else(|| vec![0.0; d]);
    let mut points = rows * m;
    for (v, a, n) in refined {
        points += n;
        if v > value {
            value = v;
            argmax = a;
        }
    }
    for a in argmax.iter_mut() {
        *a -= a.floor();
    }
    Ok(SupErrorReport {
        value,
        grid_max,
        argmax,
        points,
        density: m,
    })
}

/// Samples a multiplier at `α = k/density`, one CSV row per point with
/// columns `alpha0, …, re, im`.
pub fn dump_multiplier_grid(m: &TorusMultiplier, density: usize) -> Result<String> {
    let d = m.dim();
    if density == 0 {
        return Err(invalid("density must be positive"));
    }
    if (density as f64).powi(d as i32) > (1u64 << 22) as f64 {
        return Err(Error::ResourceLimit(format!("{density}^{d} grid points")));
    }
    let mut out = String::new();
    for j in 0..d {
        let _ = write!(out, "alpha{j},");
    }
    out.push_str("re,im\n");
    let total = density.pow(d as u32);
    let rows: Vec<String> = (0..total)
        .into_par_iter()
        .map(|idx| -> Result<String> {
            let mut alpha = vec![0.0; d];
            let mut r = idx;
            for j in (0..d).rev() {
                alpha[j] = (r % density) as f64 / density as f64;
                r /= density;
            }
            let v = m.eval(&alpha)?;
            let mut line = String::new();
            for a in &alpha {
                let _ = write!(line, "{a:.17e},");
            }
            let _ = writeln!(line, "{:.17e},{:.17e}", v.re, v.im);
            Ok(line)
        })
        .collect::<Result<_>>()?;
    for r in rows {
        out.push_str(&r);
    }
    Ok(out)
}
