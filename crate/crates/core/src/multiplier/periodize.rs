use std::fmt;
use std::sync::Arc;

use super::TorusMultiplier;
use crate::error::invalid;
use crate::{Complex64, Result};

const SUPPORT_SAMPLES: usize = 4096;

type RealFn = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// A function on `R^d` that vanishes outside the half-open cube
/// `lo + [0, 1)^d`, where the cube contains the origin.
#[derive(Clone)]
pub struct RealMultiplier {
    dim: usize,
    lo: Vec<f64>,
    f: Arc<RealFn>,
}

impl fmt::Debug for RealMultiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealMultiplier")
            .field("dim", &self.dim)
            .field("lo", &self.lo)
            .finish_non_exhaustive()
    }
}

impl RealMultiplier {
    pub fn new<F>(lo: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        if lo.is_empty() {
            return Err(invalid("dimension must be at least 1"));
        }
        if lo.iter().any(|&l| !(l <= 0.0 && 0.0 < l + 1.0)) {
            return Err(invalid("the support cube must contain the origin"));
        }
        Ok(Self {
            dim: lo.len(),
            lo,
            f: Arc::new(f),
        })
    }

    /// Support cube `[−1/2, 1/2)^d`.
    pub fn centered<F>(dim: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(vec![-0.5; dim], f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower_corner(&self) -> &[f64] {
        &self.lo
    }

    pub fn eval(&self, u: &[f64]) -> Complex64 {
        (self.f)(u)
    }

    /// Samples the shell `lo + [−1, 2)^d` outside the cube and checks that
    /// the function vanishes there. Returns the largest value seen inside.
    fn check_support(&self) -> Result<f64> {
        let d = self.dim;
        let mut inside_max = 0.0f64;
        let mut u = vec![0.0; d];
        for i in 0..SUPPORT_SAMPLES {
            let mut outside = false;
            for (j, v) in u.iter_mut().enumerate() {
                // Weyl sequence in [−1, 2)
                let w = ((i as f64 + 0.5)
                    * (0.754_877_666_246_692_7 + 0.569_840_290_998_053_3 * j as f64))
                    .fract();
                let off = 3.0 * w - 1.0;
                *v = self.lo[j] + off;
                outside |= !(0.0..1.0).contains(&off);
            }
            let val = (self.f)(&u).norm();
            if outside {
                if val != 0.0 {
                    return Err(invalid(format!(
                        "multiplier is {val:e} at {u:?}, outside its support cube"
                    )));
                }
            } else {
                inside_max = inside_max.max(val);
            }
        }
        Ok(inside_max)
    }
}

/// `ξ ↦ Σ_{l ∈ Z^d} m(qξ − l)`. With `m` supported in a half-open unit cube
/// exactly one `l` contributes per point, so the result is `m` evaluated at
/// the representative of `qξ` in the cube. The support is verified by
/// sampling beforehand.
pub fn periodize(m: &RealMultiplier, q: u64) -> Result<TorusMultiplier> {
    if q == 0 {
        return Err(invalid("q must be at least 1"));
    }
    // the recorded bound is the sampled supremum, not a certified one
    let sampled = m.check_support()?;
    let m = m.clone();
    let qf = q as f64;
    Ok(TorusMultiplier::from_fn(m.dim, sampled, move |xi| {
        let u: Vec<f64> = xi
            .iter()
            .zip(&m.lo)
            .map(|(&x, &lo)| {
                let v = qf * (x - x.floor()) - lo;
                let mut r = v - v.floor();
                if r >= 1.0 {
                    r = 0.0;
                }
                lo + r
            })
            .collect();
        Ok(m.eval(&u))
    }))
}
