use crate::error::invalid;
use crate::Result;

/// Increasing list of positive integer times used as a coarse grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    epsilon: Option<f64>,
    points: Vec<u64>,
}

impl TimeGrid {
    /// Arbitrary grid; points are sorted and deduplicated.
    pub fn from_points(mut points: Vec<u64>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("a time grid needs at least one point"));
        }
        points.sort_unstable();
        points.dedup();
        Ok(Self {
            epsilon: None,
            points,
        })
    }

    /// The exponent the grid was generated from, if any.
    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn points(&self) -> &[u64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points not exceeding `n`.
    pub fn truncate_to(&self, n: u64) -> Self {
        Self {
            epsilon: self.epsilon,
            points: self.points.iter().copied().filter(|&p| p <= n).collect(),
        }
    }

    /// Relative block sizes `(N_{k+1} − N_k) / N_k`.
    pub fn relative_block_sizes(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .map(|w| (w[1] - w[0]) as f64 / w[0] as f64)
            .collect()
    }
}

/// `⌊2^{k^ε}⌋` for `k = 1..=k_max`, deduplicated.
pub fn make_time_grid(epsilon: f64, k_max: u32) -> Result<TimeGrid> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(invalid(format!(
            "epsilon must lie in (0, 1], got {epsilon}"
        )));
    }
    if k_max == 0 {
        return Err(invalid("k_max must be at least 1"));
    }
    let mut points = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let mut e = (k as f64).powf(epsilon);
        // keep exact powers of two exact
        if (e - e.round()).abs() < 1e-12 {
            e = e.round();
        }
        if e >= 63.0 {
            return Err(invalid(format!(
                "2^({k}^{epsilon}) does not fit in 64 bits"
            )));
        }
        let v = e.exp2().floor() as u64;
        if points.last() != Some(&v) {
            points.push(v);
        }
    }
    Ok(TimeGrid {
        epsilon: Some(epsilon),
        points,
    })
}
