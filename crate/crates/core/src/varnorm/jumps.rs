use super::SampledPath;
use crate::error::invalid;
use crate::Result;

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!(
            "jump threshold must be positive, got {lambda}"
        )));
    }
    Ok(())
}

/// Greedy jump count: the longest chain `t_0 < … < t_J` whose consecutive
/// increments all exceed `lambda` in norm.
pub fn greedy_jump_count(path: &SampledPath, lambda: f64) -> Result<usize> {
    check_lambda(lambda)?;
    let n = path.len();
    let thr = lambda * lambda;
    // longest[j]: most jumps in a chain ending at j
    let mut longest = vec![0usize; n];
    let mut best = 0;
    for j in 1..n {
        let mut lj = 0;
        for i in 0..j {
            if longest[i] + 1 > lj && path.dist_sq(i, j) > thr {
                lj = longest[i] + 1;
            }
        }
        longest[j] = lj;
        best = best.max(lj);
    }
    Ok(best)
}

/// Lazy jump count: the most pairs `s_1 < t_1 ≤ s_2 < t_2 ≤ …` with
/// `|c_{t_j} − c_{s_j}| > lambda`.
pub fn lazy_jump_count(path: &SampledPath, lambda: f64) -> Result<usize> {
    Ok(lazy_jump_pairs(path, lambda)?.len())
}

/// A maximal family of lazy jump pairs, as index pairs `(s_j, t_j)`.
///
/// Each pair closes at the earliest admissible `t` after the previous
/// endpoint; this is the earliest-finish rule for interval scheduling with
/// touching endpoints allowed, which is optimal.
pub fn lazy_jump_pairs(path: &SampledPath, lambda: f64) -> Result<Vec<(usize, usize)>> {
    check_lambda(lambda)?;
    let thr = lambda * lambda;
    let n = path.len();
    let mut pairs = Vec::new();
    let mut start = 0;
    let mut t = 1;
    while t < n {
        if let Some(s) = (start..t).find(|&s| path.dist_sq(s, t) > thr) {
            pairs.push((s, t));
            start = t;
        }
        t += 1;
    }
    Ok(pairs)
}
