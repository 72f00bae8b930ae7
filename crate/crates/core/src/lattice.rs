//! Finitely supported sequences on `Z^d`, stored densely on a box, plus the
//! multi-dimensional FFT helpers shared by convolution and multiplier
//! application.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::invalid;
use crate::{Complex64, Result};

/// A complex sequence on `Z^d` that vanishes outside the box
/// `origin + [0, shape)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSeq {
    origin: Vec<i64>,
    shape: Vec<usize>,
    data: Vec<Complex64>,
}

impl LatticeSeq {
    pub fn zeros(origin: Vec<i64>, shape: Vec<usize>) -> Result<Self> {
        if origin.is_empty() || origin.len() != shape.len() {
            return Err(invalid(
                "origin and shape must have the same positive length",
            ));
        }
        let len = shape.iter().product();
        Ok(Self {
            origin,
            shape,
            data: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn from_data(origin: Vec<i64>, shape: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let mut s = Self::zeros(origin, shape)?;
        if data.len() != s.data.len() {
            return Err(invalid(format!(
                "data length {} does not match box size {}",
                data.len(),
                s.data.len()
            )));
        }
        s.data = data;
        Ok(s)
    }

    /// One-dimensional sequence with real values starting at `origin`.
    pub fn from_real_1d(origin: i64, values: &[f64]) -> Self {
        Self {
            origin: vec![origin],
            shape: vec![values.len()],
            data: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    /// Unit mass at the origin of `Z^d`.
    pub fn delta(d: usize) -> Self {
        Self {
            origin: vec![0; d],
            shape: vec![1; d],
            data: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self) -> &[i64] {
        &self.origin
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Flat index of a point inside the box, if any.
    pub fn index_of(&self, x: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for k in 0..self.dim() {
            let off = x[k] - self.origin[k];
            if off < 0 || off as usize >= self.shape[k] {
                return None;
            }
            idx = idx * self.shape[k] + off as usize;
        }
        Some(idx)
    }

    /// The lattice point stored at a flat index.
    pub fn point_of(&self, mut idx: usize) -> Vec<i64> {
        let d = self.dim();
        let mut x = vec![0i64; d];
        for k in (0..d).rev() {
            x[k] = self.origin[k] + (idx % self.shape[k]) as i64;
            idx /= self.shape[k];
        }
        x
    }

    pub fn get(&self, x: &[i64]) -> Complex64 {
        self.index_of(x)
            .map(|i| self.data[i])
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn set(&mut self, x: &[i64], v: Complex64) -> Result<()> {
        let i = self
            .index_of(x)
            .ok_or_else(|| invalid(format!("{x:?} lies outside the stored box")))?;
        self.data[i] = v;
        Ok(())
    }

    /// Iterator over `(point, value)` pairs in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        self.data
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.point_of(i), v))
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        self.data
            .iter()
            .map(|v| v.norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    pub fn max_abs_diff(&self, other: &LatticeSeq) -> f64 {
        let mut worst = 0f64;
        for (x, v) in self.iter() {
            worst = worst.max((v - other.get(&x)).norm());
        }
        for (x, v) in other.iter() {
            if self.index_of(&x).is_none() {
                worst = worst.max(v.norm());
            }
        }
        worst
    }
}

/// In-place d-dimensional FFT on a row-major array. `inverse` selects the
/// `e(+kn/M)` kernel; no normalization is applied.
pub(crate) fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let d = shape.len();
    let total: usize = shape.iter().product();
    for axis in 0..d {
        let n = shape[axis];
        if n == 1 {
            continue;
        }
        let plan: Arc<dyn Fft<f64>> = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let stride: usize = shape[axis + 1..].iter().product();
        let outer = total / (n * stride);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + k * stride];
                }
                plan.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }
}
