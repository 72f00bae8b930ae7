use super::{SampledPath, TimeGrid};
use crate::error::{invalid, Error};
use crate::Result;

fn check_q(q: f64) -> Result<()> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::Unsupported(format!(
            "q-variation needs q >= 1, got {q}"
        )));
    }
    Ok(())
}

/// `|x|^q` given `|x|²`, avoiding `powf` for the common small integer
/// exponents.
#[inline]
fn pow_from_sq(sq: f64, q: f64) -> f64 {
    if q == 2.0 {
        sq
    } else if q == 1.0 {
        sq.sqrt()
    } else if q == 3.0 {
        sq * sq.sqrt()
    } else if q == 4.0 {
        sq * sq
    } else if q.is_infinite() {
        sq.sqrt()
    } else {
        sq.powf(0.5 * q)
    }
}

/// Largest `q`-th power sum of increments over chains in `path`. For
/// `q = ∞` this is the largest single increment.
fn chain_power_sum(path: &SampledPath, q: f64) -> f64 {
    let n = path.len();
    if n < 2 {
        return 0.0;
    }
    if q.is_infinite() {
        let mut best = 0f64;
        for j in 1..n {
            for i in 0..j {
                best = best.max(path.dist_sq(i, j));
            }
        }
        return best.sqrt();
    }
    let mut best = vec![0f64; n];
    let mut overall = 0f64;
    for j in 1..n {
        let mut bj = 0f64;
        for i in 0..j {
            let cand = best[i] + pow_from_sq(path.dist_sq(i, j), q);
            if cand > bj {
                bj = cand;
            }
        }
        best[j] = bj;
        overall = overall.max(bj);
    }
    overall
}

/// Homogeneous q-variation: the supremum over increasing index chains of
/// the ℓ^q norm of consecutive increments, computed exactly by chain DP.
pub fn hvar(path: &SampledPath, q: f64) -> Result<f64> {
    check_q(q)?;
    let s = chain_power_sum(path, q);
    Ok(if q.is_infinite() { s } else { s.powf(1.0 / q) })
}

/// Largest Euclidean norm of a path value.
pub fn sup_norm(path: &SampledPath) -> f64 {
    (0..path.len()).map(|i| path.norm(i)).fold(0.0, f64::max)
}

/// Inhomogeneous q-variation `(hvar^q + sup^q)^{1/q}`.
pub fn ivar(path: &SampledPath, q: f64) -> Result<f64> {
    let h = hvar(path, q)?;
    let s = sup_norm(path);
    if q.is_infinite() {
        return Ok(h.max(s));
    }
    Ok((h.powf(q) + s.powf(q)).powf(1.0 / q))
}

/// Long and short variation of a path relative to a coarse grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LongShort {
    pub long: f64,
    pub short: f64,
}

/// Splits the q-variation along `grid`: `long` is the variation of the path
/// sampled at the grid times, `short` the ℓ^q sum of the variations inside
/// consecutive grid blocks.
///
/// Every grid point must be a path time, and the first and last path times
/// must belong to the grid.
pub fn short_long_split(path: &SampledPath, grid: &TimeGrid, q: f64) -> Result<LongShort> {
    check_q(q)?;
    if path.is_empty() {
        return Ok(LongShort {
            long: 0.0,
            short: 0.0,
        });
    }
    let mut idx = Vec::with_capacity(grid.points().len());
    for &g in grid.points() {
        let i = path
            .index_of_time(g as f64)
            .ok_or_else(|| invalid(format!("grid point {g} is not a path time")))?;
        idx.push(i);
    }
    if idx.first() != Some(&0) || idx.last() != Some(&(path.len() - 1)) {
        return Err(invalid("grid does not cover the path's time range"));
    }
    let long = hvar(&path.select(&idx)?, q)?;
    let mut acc = 0f64;
    for w in idx.windows(2) {
        let block: Vec<usize> = (w[0]..=w[1]).collect();
        let h = hvar(&path.select(&block)?, q)?;
        if q.is_infinite() {
            acc = acc.max(h);
        } else {
            acc += h.powf(q);
        }
    }
    let short = if q.is_infinite() {
        acc
    } else {
        acc.powf(1.0 / q)
    };
    Ok(LongShort { long, short })
}
