use crate::error::{invalid, Error};
use crate::quad::gauss_legendre;
use crate::{e, Complex64, Result};

/// Tensor grids larger than this are refused.
const MAX_NODES: usize = 1 << 24;

/// `‖Σ_k c_k e(ξ_k·y)‖_{L²(I)}` over a box `I`, to absolute accuracy 1e-6.
pub fn exp_sum_l2_norm(
    box_: &[(f64, f64)],
    freqs: &[Vec<f64>],
    coeffs: &[Complex64],
) -> Result<f64> {
    exp_sum_l2_norm_with_tol(box_, freqs, coeffs, 1e-6)
}

/// [`exp_sum_l2_norm`] with an explicit tolerance. Gauss–Legendre tensor
/// rules sized by the frequency spread are compared against a finer rule;
/// disagreement beyond `tol` after refinement is a numeric failure.
pub fn exp_sum_l2_norm_with_tol(
    box_: &[(f64, f64)],
    freqs: &[Vec<f64>],
    coeffs: &[Complex64],
    tol: f64,
) -> Result<f64> {
    if freqs.len() != coeffs.len() {
        return Err(invalid("need one coefficient per frequency"));
    }
    let d = box_.len();
    if d == 0
        || box_
            .iter()
            .any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite())
    {
        return Err(invalid(
            "integration box must be a nonempty product of intervals",
        ));
    }
    if freqs.iter().any(|f| f.len() != d) {
        return Err(invalid("frequencies must match the box dimension"));
    }
    if freqs.is_empty() {
        return Ok(0.0);
    }
    // |g|² only contains frequency differences
    let spans: Vec<f64> = (0..d)
        .map(|j| {
            let (lo, hi) = freqs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), f| {
                    (l.min(f[j]), h.max(f[j]))
                });
            (hi - lo) * (box_[j].1 - box_[j].0)
        })
        .collect();
    let mut nodes: Vec<usize> = spans
        .iter()
        .map(|s| (2.0 * s).ceil() as usize + 16)
        .collect();
    let mut prev = tensor_sq(box_, freqs, coeffs, &nodes)?;
    for _ in 0..6 {
        let finer: Vec<usize> = nodes.iter().map(|n| n + n / 2 + 8).collect();
        let cur = tensor_sq(box_, freqs, coeffs, &finer)?;
        let diff = (cur.sqrt() - prev.sqrt()).abs();
        if diff <= tol {
            return Ok(cur.max(0.0).sqrt());
        }
        nodes = finer;
        prev = cur;
    }
    Err(Error::NumericFailure {
        message: "tensor quadrature for the L² norm did not settle".into(),
        estimate: prev.max(0.0).sqrt(),
        evaluations: nodes.iter().product(),
    })
}

fn tensor_sq(
    box_: &[(f64, f64)],
    freqs: &[Vec<f64>],
    coeffs: &[Complex64],
    nodes: &[usize],
) -> Result<f64> {
    let total = nodes.iter().try_fold(1usize, |a, &n| a.checked_mul(n));
    if total.is_none_or(|t| t > MAX_NODES) {
        return Err(Error::NumericFailure {
            message: format!("tensor grid {nodes:?} exceeds the node budget"),
            estimate: f64::NAN,
            evaluations: 0,
        });
    }
    let d = box_.len();
    let rules: Vec<(Vec<f64>, Vec<f64>)> = nodes
        .iter()
        .zip(box_)
        .map(|(&n, &(a, b))| {
            let (x, w) = gauss_legendre(n);
            let h = 0.5 * (b - a);
            let c = 0.5 * (a + b);
            (
                x.iter().map(|t| c + h * t).collect(),
                w.iter().map(|w| w * h).collect(),
            )
        })
        .collect();
    // per-axis phase tables e(ξ_kj y_j)
    let tables: Vec<Vec<Complex64>> = (0..d)
        .map(|j| {
            let ys = &rules[j].0;
            let mut t = Vec::with_capacity(freqs.len() * ys.len());
            for f in freqs {
                for &y in ys {
                    t.push(e(f[j] * y));
                }
            }
            t
        })
        .collect();
    let mut idx = vec![0usize; d];
    let mut acc = 0.0;
    loop {
        let mut w = 1.0;
        for j in 0..d {
            w *= rules[j].1[idx[j]];
        }
        let mut g = Complex64::new(0.0, 0.0);
        for (k, c) in coeffs.iter().enumerate() {
            let mut ph = *c;
            for j in 0..d {
                ph *= tables[j][k * nodes[j] + idx[j]];
            }
            g += ph;
        }
        acc += w * g.norm_sqr();
        // odometer
        let mut j = d;
        loop {
            if j == 0 {
                return Ok(acc);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < nodes[j] {
                break;
            }
            idx[j] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Exact Gram form: Σ_{k,l} c_k c̄_l Π_j ∫_{I_j} e((ξ_k − ξ_l)_j y) dy.
    fn gram_oracle(box_: &[(f64, f64)], freqs: &[Vec<f64>], coeffs: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, ck) in coeffs.iter().enumerate() {
            for (l, cl) in coeffs.iter().enumerate() {
                let mut prod = Complex64::new(1.0, 0.0);
                for (j, &(a, b)) in box_.iter().enumerate() {
                    let w = freqs[k][j] - freqs[l][j];
                    prod *= if w == 0.0 {
                        Complex64::new(b - a, 0.0)
                    } else {
                        (e(w * b) - e(w * a)) / Complex64::new(0.0, 2.0 * PI * w)
                    };
                }
                acc += ck * cl.conj() * prod;
            }
        }
        acc.re.sqrt()
    }

    #[test]
    fn single_frequency() {
        let v = exp_sum_l2_norm(
            &[(0.0, 3.0), (1.0, 2.5)],
            &[vec![4.3, -1.2]],
            &[Complex64::new(1.0, 0.0)],
        )
        .unwrap();
        assert!((v - 4.5f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn parseval_on_unit_interval() {
        let freqs: Vec<Vec<f64>> = (0..6).map(|k| vec![k as f64]).collect();
        let coeffs: Vec<Complex64> = (0..6)
            .map(|k| Complex64::new(k as f64 - 2.0, 0.5))
            .collect();
        let v = exp_sum_l2_norm(&[(0.0, 1.0)], &freqs, &coeffs).unwrap();
        let l2 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        assert!((v - l2).abs() < 1e-9);
    }

    #[test]
    fn matches_gram_oracle() {
        let box_ = [(-1.0, 2.0), (0.5, 1.25)];
        let freqs = vec![vec![0.3, 7.0], vec![-2.2, 1.1], vec![5.5, -3.0]];
        let coeffs = vec![
            Complex64::new(1.0, -0.5),
            Complex64::new(0.2, 0.9),
            Complex64::new(-0.7, 0.1),
        ];
        let v = exp_sum_l2_norm(&box_, &freqs, &coeffs).unwrap();
        assert!((v - gram_oracle(&box_, &freqs, &coeffs)).abs() < 1e-9);
    }

    #[test]
    fn rejects_mismatch() {
        assert!(exp_sum_l2_norm(&[(0.0, 1.0)], &[vec![1.0]], &[]).is_err());
        assert!(exp_sum_l2_norm(&[(1.0, 0.0)], &[], &[]).is_err());
    }
}
