use crate::error::invalid;
use crate::quad::poly_phase_integral;
use crate::{Complex64, Result};

/// Default absolute accuracy of [`cm_ft`].
pub const DEFAULT_CM_TOL: f64 = 1e-8;

/// `(1/t) ∫_0^t e(β_1 s + β_2 s² + … + β_d s^d) ds`, the Fourier transform of
/// the normalized arc-length measure on the moment curve up to time `t`.
pub fn cm_ft(t: f64, beta: &[f64], d: usize) -> Result<Complex64> {
    ContinuousAverage::new(t, d)?.eval(beta)
}

/// Continuous average of length `t` in dimension `d`, with its quadrature
/// tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuousAverage {
    t: f64,
    dim: usize,
    tol: f64,
}

impl ContinuousAverage {
    pub fn new(t: f64, dim: usize) -> Result<Self> {
        Self::with_tol(t, dim, DEFAULT_CM_TOL)
    }

    pub fn with_tol(t: f64, dim: usize, tol: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(invalid(format!("t must be positive, got {t}")));
        }
        if dim == 0 {
            return Err(invalid("dimension must be at least 1"));
        }
        if !(tol > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        Ok(Self { t, dim, tol })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, beta: &[f64]) -> Result<Complex64> {
        if beta.len() != self.dim {
            return Err(invalid(format!(
                "β has dimension {}, expected {}",
                beta.len(),
                self.dim
            )));
        }
        // substitute s = t u
        let mut c = Vec::with_capacity(self.dim);
        let mut tp = 1.0;
        for &b in beta {
            tp *= self.t;
            c.push(b * tp);
        }
        // leave headroom under the requested accuracy for the panel sums
        poly_phase_integral(&c, 0.25 * self.tol)
    }
}
