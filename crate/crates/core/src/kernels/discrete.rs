use std::collections::HashSet;
use std::fmt::Write as _;

use crate::arith::ArithTables;
use crate::error::invalid;
use crate::{e, Complex64, Result};

/// Largest polynomial degree accepted by [`poly_kernel`].
pub const MAX_POLY_DEGREE: usize = 4;

/// Finitely supported real weights on `Z^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteKernel {
    dim: usize,
    points: Vec<i64>,
    weights: Vec<f64>,
}

impl DiscreteKernel {
    /// `points` is flat: point `k` occupies `points[k*dim .. (k+1)*dim]`.
    pub fn new(dim: usize, points: Vec<i64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("kernel dimension must be at least 1"));
        }
        if points.len() != weights.len() * dim {
            return Err(invalid("points and weights have mismatched lengths"));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("kernel weights must be finite"));
        }
        let mut seen = HashSet::with_capacity(weights.len());
        for p in points.chunks(dim) {
            if !seen.insert(p) {
                return Err(invalid(format!("support point {p:?} repeated")));
            }
        }
        Ok(Self {
            dim,
            points,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, k: usize) -> &[i64] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    pub fn points_flat(&self) -> &[i64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], f64)> + '_ {
        self.points
            .chunks(self.dim)
            .zip(self.weights.iter().copied())
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Smallest box `(lo, hi)` containing the support, inclusive.
    pub fn bounding_box(&self) -> Option<(Vec<i64>, Vec<i64>)> {
        if self.is_empty() {
            return None;
        }
        let mut lo = self.point(0).to_vec();
        let mut hi = lo.clone();
        for p in self.points.chunks(self.dim) {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Some((lo, hi))
    }

    /// CSV with columns `x0,…,x{d-1},weight`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for k in 0..self.dim {
            let _ = write!(out, "x{k},");
        }
        out.push_str("weight\n");
        for (p, w) in self.iter() {
            for x in p {
                let _ = write!(out, "{x},");
            }
            let _ = writeln!(out, "{w:.16e}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| invalid("empty CSV"))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols.last() != Some(&"weight") {
            return Err(invalid(format!("unexpected CSV header `{header}`")));
        }
        let dim = cols.len() - 1;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != cols.len() {
                return Err(invalid(format!("line {}: wrong field count", i + 2)));
            }
            for f in &fields[..dim] {
                points.push(
                    f.parse::<i64>()
                        .map_err(|e| invalid(format!("line {}: {e}", i + 2)))?,
                );
            }
            weights.push(
                fields[dim]
                    .parse::<f64>()
                    .map_err(|e| invalid(format!("line {}: {e}", i + 2)))?,
            );
        }
        Self::new(dim, points, weights)
    }
}

/// `Λ(n)/N` at each `n ≤ N` with `Λ(n) > 0`.
pub fn prime_kernel(n: usize, tables: &ArithTables) -> Result<DiscreteKernel> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    if tables.limit() < n {
        return Err(invalid(format!(
            "tables reach {} but N = {n}",
            tables.limit()
        )));
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let lam = tables.von_mangoldt_slice();
    for m in 1..=n {
        let l = lam[m];
        if l > 0.0 {
            points.push(m as i64);
            weights.push(l / n as f64);
        }
    }
    DiscreteKernel::new(1, points, weights)
}

/// Uniform weight `1/N` on `(n, n², …, n^d)` for `n = 1..=N`.
pub fn poly_kernel(n: usize, d: usize) -> Result<DiscreteKernel> {
    if n == 0 || d == 0 {
        return Err(invalid("N and d must be at least 1"));
    }
    if d > MAX_POLY_DEGREE {
        return Err(invalid(format!(
            "degree {d} exceeds the supported maximum {MAX_POLY_DEGREE}"
        )));
    }
    let top = (n as i64)
        .checked_pow(d as u32)
        .ok_or_else(|| invalid(format!("{n}^{d} overflows 64-bit integers")))?;
    // keep one bit of headroom for sums of positions
    if top > i64::MAX / 4 {
        return Err(invalid(format!(
            "{n}^{d} is too close to the integer limit"
        )));
    }
    let mut points = Vec::with_capacity(n * d);
    for m in 1..=n as i64 {
        let mut p = 1i64;
        for _ in 0..d {
            p *= m;
            points.push(p);
        }
    }
    DiscreteKernel::new(d, points, vec![1.0 / n as f64; n])
}

/// Fractional part of `a·x` with the rounding error of the product
/// recovered by a fused multiply-add.
#[inline]
pub fn frac_product(a: f64, x: i64) -> f64 {
    let xf = x as f64;
    let p = a * xf;
    let err = a.mul_add(xf, -p);
    (p - p.round()) + err
}

/// `Σ_x K(x) e(α·x)` by direct summation.
pub fn kernel_ft(k: &DiscreteKernel, alpha: &[f64]) -> Result<Complex64> {
    if alpha.len() != k.dim() {
        return Err(invalid(format!(
            "frequency has dimension {}, kernel has {}",
            alpha.len(),
            k.dim()
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (p, w) in k.iter() {
        let mut ph = 0.0;
        for (a, &x) in alpha.iter().zip(p) {
            ph += frac_product(*a, x);
        }
        acc += e(ph) * w;
    }
    Ok(acc)
}
