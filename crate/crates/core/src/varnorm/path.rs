use std::fmt::Write as _;

use crate::error::invalid;
use crate::{Complex64, Result};

/// Values of a process on a strictly increasing finite set of times. Values
/// live in `C^m` with the Euclidean norm; real paths simply carry zero
/// imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath {
    times: Vec<f64>,
    dim: usize,
    values: Vec<Complex64>,
}

impl SampledPath {
    /// `values` is row-major: the value at time `i` occupies
    /// `values[i*dim .. (i+1)*dim]`.
    pub fn new(times: Vec<f64>, dim: usize, values: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("path values need dimension at least 1"));
        }
        if values.len() != times.len() * dim {
            return Err(invalid(format!(
                "{} values do not fit {} times of dimension {dim}",
                values.len(),
                times.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("times must be finite"));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("times must be strictly increasing"));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(invalid("path values must be finite"));
        }
        Ok(Self { times, dim, values })
    }

    /// Real scalar path on times `1, 2, …, len`.
    pub fn from_real(values: &[f64]) -> Self {
        let times = (1..=values.len()).map(|t| t as f64).collect();
        Self::new(
            times,
            1,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
        .expect("consecutive integer times")
    }

    pub fn from_real_with_times(times: Vec<f64>, values: &[f64]) -> Result<Self> {
        Self::new(
            times,
            1,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    /// Path valued in `R^m`, one inner vector per time `1, 2, …`.
    pub fn from_real_vectors(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(1, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(invalid("all rows must have the same dimension"));
        }
        let times = (1..=rows.len()).map(|t| t as f64).collect();
        let values = rows
            .iter()
            .flat_map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)))
            .collect();
        Self::new(times, dim, values)
    }

    pub fn from_complex(times: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        Self::new(times, 1, values)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn value(&self, i: usize) -> &[Complex64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn dist_sq(&self, i: usize, j: usize) -> f64 {
        if self.dim == 1 {
            return (self.values[i] - self.values[j]).norm_sqr();
        }
        let a = self.value(i);
        let b = self.value(j);
        a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist_sq(i, j).sqrt()
    }

    pub fn norm(&self, i: usize) -> f64 {
        self.value(i)
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Sub-path on the given increasing index list.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut times = Vec::with_capacity(indices.len());
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            if i >= self.len() {
                return Err(invalid(format!("index {i} out of range")));
            }
            times.push(self.times[i]);
            values.extend_from_slice(self.value(i));
        }
        Self::new(times, self.dim, values)
    }

    /// Sub-path on the closed time interval `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> Self {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| self.times[i] >= lo && self.times[i] <= hi)
            .collect();
        self.select(&idx)
            .expect("indices are in range and increasing")
    }

    /// Index of a time in the path, if present.
    pub fn index_of_time(&self, t: f64) -> Option<usize> {
        self.times
            .binary_search_by(|x| x.partial_cmp(&t).expect("finite times"))
            .ok()
    }

    /// Coordinate `k` as a scalar path.
    pub fn component(&self, k: usize) -> Self {
        let values = (0..self.len()).map(|i| self.value(i)[k]).collect();
        Self::new(self.times.clone(), 1, values).expect("same times")
    }

    /// CSV with a header and `time,value_re,value_im` columns (one re/im
    /// pair per component).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time");
        if self.dim == 1 {
            out.push_str(",value_re,value_im");
        } else {
            for k in 0..self.dim {
                let _ = write!(out, ",value{k}_re,value{k}_im");
            }
        }
        out.push('\n');
        for i in 0..self.len() {
            let _ = write!(out, "{:.16e}", self.times[i]);
            for v in self.value(i) {
                let _ = write!(out, ",{:.16e},{:.16e}", v.re, v.im);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| invalid("empty CSV"))?;
        let cols = header.split(',').count();
        if cols < 3 || (cols - 1) % 2 != 0 || !header.starts_with("time") {
            return Err(invalid(format!("unexpected CSV header `{header}`")));
        }
        let dim = (cols - 1) / 2;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| invalid(format!("line {}: {e}", lineno + 2)))?;
            if fields.len() != cols {
                return Err(invalid(format!(
                    "line {}: expected {cols} fields, found {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            times.push(fields[0]);
            for k in 0..dim {
                values.push(Complex64::new(fields[1 + 2 * k], fields[2 + 2 * k]));
            }
        }
        Self::new(times, dim, values)
    }
}
