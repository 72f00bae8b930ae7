use rayon::prelude::*;

use super::TorusMultiplier;
use crate::error::{invalid, Error};
use crate::lattice::{fft_nd, LatticeSeq};
use crate::{Complex64, Result};

/// Settings for [`apply_multiplier_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct ApplyOptions {
    /// Largest accepted change between the `M` and `2M` grids.
    pub tol: f64,
    /// Cap on `M^d`.
    pub max_points: usize,
    /// Starting grid size; by default eight times the support diameter
    /// plus the multiplier's reach, rounded up to a power of two.
    pub initial_grid: Option<usize>,
}

impl Default for ApplyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_points: 1 << 24,
            initial_grid: None,
        }
    }
}

/// Result of applying a multiplier on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AppliedMultiplier {
    /// Output on a window of one period, centered on the input support.
    pub seq: LatticeSeq,
    /// Grid size `M` per coordinate.
    pub grid: usize,
    /// Largest change against the half-size grid on the common window.
    pub alias_bound: f64,
}

/// `(m f̂)ˇ` with default options.
pub fn apply_multiplier(m: &TorusMultiplier, f: &LatticeSeq) -> Result<AppliedMultiplier> {
    apply_multiplier_with(m, f, &ApplyOptions::default())
}

/// Applies `m` to `f` through the discrete transform on `(Z/M)^d`:
/// `out(x) = M^{-d} Σ_k m(k/M) f̂(k/M) e(−k·x/M)`. The grid doubles until
/// two successive grids agree to `opts.tol` on the smaller window.
pub fn apply_multiplier_with(
    m: &TorusMultiplier,
    f: &LatticeSeq,
    opts: &ApplyOptions,
) -> Result<AppliedMultiplier> {
    let d = f.dim();
    if m.dim() != d {
        return Err(invalid(format!(
            "sequence has dimension {d}, multiplier has {}",
            m.dim()
        )));
    }
    let diam = f.shape().iter().copied().max().unwrap_or(1).max(1);
    let reach = m.meta().reach.unwrap_or(0) as usize;
    let mut grid = match opts.initial_grid {
        Some(g) => g.max(1),
        None => (8 * (diam + reach)).next_power_of_two(),
    };
    let fits = |g: usize| (g as f64).powi(d as i32) <= opts.max_points as f64;
    if !fits(grid) {
        return Err(Error::ResourceLimit(format!(
            "initial grid {grid}^{d} exceeds {} points",
            opts.max_points
        )));
    }
    let mut coarse = apply_on_grid(m, f, grid)?;
    loop {
        let fine_grid = grid * 2;
        if !fits(fine_grid) {
            return Err(Error::ResourceLimit(format!(
                "grid {fine_grid}^{d} needed to reach tolerance {:e}",
                opts.tol
            )));
        }
        let fine = apply_on_grid(m, f, fine_grid)?;
        let bound = coarse
            .iter()
            .map(|(x, v)| (v - fine.get(&x)).norm())
            .fold(0.0, f64::max);
        if bound <= opts.tol {
            return Ok(AppliedMultiplier {
                seq: fine,
                grid: fine_grid,
                alias_bound: bound,
            });
        }
        grid = fine_grid;
        coarse = fine;
    }
}

fn apply_on_grid(m: &TorusMultiplier, f: &LatticeSeq, grid: usize) -> Result<LatticeSeq> {
    let d = f.dim();
    let shape = vec![grid; d];
    let total = grid.pow(d as u32);
    let flat = |x: &[i64]| -> usize {
        x.iter().fold(0usize, |acc, &v| {
            acc * grid + v.rem_euclid(grid as i64) as usize
        })
    };
    let mut buf = vec![Complex64::new(0.0, 0.0); total];
    for (x, v) in f.iter() {
        buf[flat(&x)] += v;
    }
    // f̂(k/M) = Σ_y f(y) e(k·y/M)
    fft_nd(&mut buf, &shape, true);
    let samples: Vec<Complex64> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut alpha = vec![0.0; d];
            let mut r = idx;
            for j in (0..d).rev() {
                alpha[j] = (r % grid) as f64 / grid as f64;
                r /= grid;
            }
            m.eval(&alpha)
        })
        .collect::<Result<_>>()?;
    for (b, s) in buf.iter_mut().zip(&samples) {
        *b *= s;
    }
    fft_nd(&mut buf, &shape, false);
    let scale = 1.0 / total as f64;
    let origin: Vec<i64> = f
        .origin()
        .iter()
        .zip(f.shape())
        .map(|(&o, &s)| o - (grid as i64 - s as i64) / 2)
        .collect();
    let mut out = LatticeSeq::zeros(origin, shape)?;
    for idx in 0..total {
        let x = out.point_of(idx);
        out.data_mut()[idx] = buf[flat(&x)] * scale;
    }
    Ok(out)
}
