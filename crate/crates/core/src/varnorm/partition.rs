use super::SampledPath;
use crate::error::invalid;
use crate::Result;

/// Nested coarsenings of a path's index set.
///
/// Level 0 is the identity; level `n + 1` keeps pointing at its previous
/// representative while the level-`n` representative stays within `2^{n+1}λ`
/// of it. Indices refer to the collapsed path, whose adjacent increments
/// all exceed `λ`; `kept` maps them back to the input.
#[derive(Clone, Debug, PartialEq)]
pub struct ParentPartition {
    lambda: f64,
    kept: Vec<usize>,
    input_len: usize,
    rho: Vec<Vec<usize>>,
    path: SampledPath,
}

/// Outcome of the post-hoc invariant scan.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InvariantReport {
    /// `(n, t)` where a level-n jump is not larger than `2^n λ`.
    pub lower_violations: Vec<(usize, usize)>,
    /// `(n, t)` where `|c_{ρ(n,t)} − c_{ρ(n+1,t)}| > 2^{n+1} λ`.
    pub upper_violations: Vec<(usize, usize)>,
    /// `(n, t)` with `t ∈ J_{n+1}` but `t ∉ J_n`.
    pub nesting_violations: Vec<(usize, usize)>,
    /// `(n, t)` where ρ fails to be nondecreasing in t or nonincreasing in n.
    pub monotonicity_violations: Vec<(usize, usize)>,
}

impl InvariantReport {
    pub fn all_hold(&self) -> bool {
        self.lower_violations.is_empty()
            && self.upper_violations.is_empty()
            && self.nesting_violations.is_empty()
            && self.monotonicity_violations.is_empty()
    }
}

impl ParentPartition {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Input indices retained by the collapse, in order.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    /// Number of input entries dropped by the collapse.
    pub fn removed(&self) -> usize {
        self.input_len - self.kept.len()
    }

    /// The collapsed path the table refers to.
    pub fn path(&self) -> &SampledPath {
        &self.path
    }

    /// Number of levels stored; the last one is constant.
    pub fn levels(&self) -> usize {
        self.rho.len()
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    /// `ρ(n, t)`; levels past the stored top repeat the top level.
    pub fn rho(&self, n: usize, t: usize) -> usize {
        let n = n.min(self.rho.len() - 1);
        self.rho[n][t]
    }

    pub fn level(&self, n: usize) -> &[usize] {
        &self.rho[n.min(self.rho.len() - 1)]
    }

    /// Jump set `J_n = {t : ρ(n,t) ≠ ρ(n,t+1)}`.
    pub fn jump_set(&self, n: usize) -> Vec<usize> {
        let lvl = self.level(n);
        (0..lvl.len().saturating_sub(1))
            .filter(|&t| lvl[t] != lvl[t + 1])
            .collect()
    }

    /// Exhaustive scan of the three structural properties plus monotonicity.
    pub fn check_invariants(&self) -> InvariantReport {
        let mut rep = InvariantReport::default();
        let len = self.len();
        let levels = self.levels();
        let scale = |n: usize| self.lambda * (n as f64).exp2();
        for n in 0..levels {
            let lvl = &self.rho[n];
            for t in 0..len.saturating_sub(1) {
                if lvl[t] != lvl[t + 1] && self.path.dist(lvl[t], lvl[t + 1]) <= scale(n) {
                    rep.lower_violations.push((n, t));
                }
                if lvl[t] > lvl[t + 1] {
                    rep.monotonicity_violations.push((n, t));
                }
            }
            if n + 1 < levels {
                let up = &self.rho[n + 1];
                for t in 0..len {
                    if self.path.dist(lvl[t], up[t]) > scale(n + 1) {
                        rep.upper_violations.push((n, t));
                    }
                    if up[t] > lvl[t] {
                        rep.monotonicity_violations.push((n, t));
                    }
                }
                for t in 0..len.saturating_sub(1) {
                    if up[t] != up[t + 1] && lvl[t] == lvl[t + 1] {
                        rep.nesting_violations.push((n, t));
                    }
                }
            }
        }
        rep
    }
}

/// Builds the parent-partition table for `path` at threshold `lambda`.
///
/// Entries within `lambda` of the last retained entry are dropped first, so
/// that all adjacent increments of the working path exceed `lambda`. Levels
/// are generated until one is constant; index 0 is the common root.
pub fn build_parent_partition(path: &SampledPath, lambda: f64) -> Result<ParentPartition> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    let mut kept = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        match kept.last() {
            Some(&last) if path.dist(last, i) <= lambda => {}
            _ => kept.push(i),
        }
    }
    let work = path.select(&kept)?;
    let len = work.len();
    let mut rho = vec![(0..len).collect::<Vec<usize>>()];
    while rho.last().unwrap().iter().any(|&r| r != 0) {
        let n = rho.len() - 1;
        let prev = &rho[n];
        let bound = lambda * ((n + 1) as f64).exp2();
        let mut next = vec![0usize; len];
        for t in 0..len.saturating_sub(1) {
            next[t + 1] = if work.dist(next[t], prev[t + 1]) <= bound {
                next[t]
            } else {
                prev[t + 1]
            };
        }
        rho.push(next);
        if rho.len() > 2100 {
            return Err(invalid("partition levels did not terminate"));
        }
    }
    Ok(ParentPartition {
        lambda,
        kept,
        input_len: path.len(),
        rho,
        path: work,
    })
}
