use std::fmt::Write as _;

use crate::arith::{FreqPoint, ReducedFraction};
use crate::error::{invalid, Error};
use crate::Result;

/// Largest denominator bound `N^ν` the exhaustive search accepts.
pub const ARC_SEARCH_BUDGET: u64 = 10_000_000;

/// Major or minor arc membership of a frequency.
#[derive(Clone, Debug, PartialEq)]
pub enum ArcClassification {
    /// `α = θ + β` with `θ` of height `q ≤ N^ν` and `|β_j| ≤ N^{−j+ν}`.
    Major {
        theta: FreqPoint,
        beta: Vec<f64>,
        q: u64,
    },
    Minor,
}

impl ArcClassification {
    pub fn is_major(&self) -> bool {
        matches!(self, ArcClassification::Major { .. })
    }
}

/// Finds the smallest `q ≤ N^ν`, `ν = 1/max(d, 12)`, such that the nearest
/// fractions with denominator `q` approximate every coordinate within
/// `|α_j − a_j/q| ≤ N^{−j+ν}`.
pub fn classify_arc(alpha: &[f64], n: u64, d: usize) -> Result<ArcClassification> {
    if alpha.len() != d || d == 0 {
        return Err(invalid(format!("expected a point of dimension {d}")));
    }
    if n < 2 {
        return Err(invalid("N must be at least 2"));
    }
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(invalid("frequency must be finite"));
    }
    let nu = 1.0 / d.max(12) as f64;
    let nf = n as f64;
    // guard exact powers against rounding below the integer
    let big_q = (nf.ln() * nu).exp() * (1.0 + 1e-12);
    let big_q = big_q.floor() as u64;
    if big_q > ARC_SEARCH_BUDGET {
        return Err(Error::ResourceLimit(format!(
            "denominator bound {big_q} exceeds the search budget {ARC_SEARCH_BUDGET}"
        )));
    }
    let radii: Vec<f64> = (1..=d).map(|j| nf.powf(-(j as f64) + nu)).collect();
    let frac: Vec<f64> = alpha.iter().map(|a| a - a.floor()).collect();
    'outer: for q in 1..=big_q.max(1) {
        let qf = q as f64;
        let mut nums = Vec::with_capacity(d);
        let mut beta = Vec::with_capacity(d);
        for (x, r) in frac.iter().zip(&radii) {
            let a = (x * qf).round();
            let b = x - a / qf;
            if b.abs() > *r {
                continue 'outer;
            }
            nums.push(a as u64 % q);
            beta.push(b);
        }
        let coords = nums
            .iter()
            .map(|&a| ReducedFraction::reduce(a as i128, q))
            .collect::<Result<Vec<_>>>()?;
        let theta = FreqPoint::new(coords)?;
        let q = theta.height();
        return Ok(ArcClassification::Major { theta, beta, q });
    }
    Ok(ArcClassification::Minor)
}

/// Batch mode: one `α` per CSV row (an optional non-numeric header is
/// skipped). Output columns are `kind, q, theta0…, beta0…`; minor rows leave
/// the witness fields empty.
pub fn classify_batch_csv(input: &str, n: u64, d: usize) -> Result<String> {
    let mut out = String::from("kind,q");
    for j in 0..d {
        let _ = write!(out, ",theta{j}");
    }
    for j in 0..d {
        let _ = write!(out, ",beta{j}");
    }
    out.push('\n');
    for (lineno, line) in input.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let alpha = match fields {
            Ok(v) => v,
            Err(_) if lineno == 0 => continue,
            Err(_) => {
                return Err(invalid(format!(
                    "line {}: not a row of numbers",
                    lineno + 1
                )))
            }
        };
        if alpha.len() != d {
            return Err(invalid(format!(
                "line {}: expected {d} values, found {}",
                lineno + 1,
                alpha.len()
            )));
        }
        match classify_arc(&alpha, n, d)? {
            ArcClassification::Major { theta, beta, q } => {
                let _ = write!(out, "major,{q}");
                for c in theta.coords() {
                    let _ = write!(out, ",{c}");
                }
                for b in beta {
                    let _ = write!(out, ",{b:.17e}");
                }
            }
            ArcClassification::Minor => {
                out.push_str("minor,");
                out.push_str(&",".repeat(2 * d));
            }
        }
        out.push('\n');
    }
    Ok(out)
}
