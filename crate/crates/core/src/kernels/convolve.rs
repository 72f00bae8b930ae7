use super::DiscreteKernel;
use crate::error::invalid;
use crate::lattice::{fft_nd, LatticeSeq};
use crate::{Complex64, Result};

/// Dense FFT grids above this many cells are never attempted.
const FFT_CELL_LIMIT: usize = 1 << 26;

fn output_box(f: &LatticeSeq, k: &DiscreteKernel) -> Option<(Vec<i64>, Vec<usize>)> {
    let (lo, hi) = k.bounding_box()?;
    let origin: Vec<i64> = f.origin().iter().zip(&lo).map(|(a, b)| a + b).collect();
    let shape: Vec<usize> = f
        .shape()
        .iter()
        .zip(lo.iter().zip(&hi))
        .map(|(&s, (l, h))| s + (h - l) as usize)
        .collect();
    Some((origin, shape))
}

fn check_dims(f: &LatticeSeq, k: &DiscreteKernel) -> Result<()> {
    if f.dim() != k.dim() {
        return Err(invalid(format!(
            "sequence has dimension {}, kernel has {}",
            f.dim(),
            k.dim()
        )));
    }
    Ok(())
}

/// `(K∗f)(x) = Σ_y K(y) f(x−y)` by direct summation.
pub fn convolve_direct(f: &LatticeSeq, k: &DiscreteKernel) -> Result<LatticeSeq> {
    check_dims(f, k)?;
    let Some((origin, shape)) = output_box(f, k) else {
        return LatticeSeq::zeros(f.origin().to_vec(), vec![0; f.dim()]);
    };
    let mut out = LatticeSeq::zeros(origin, shape)?;
    let d = f.dim();
    let mut x = vec![0i64; d];
    for (fi, &fv) in f.data().iter().enumerate() {
        if fv == Complex64::new(0.0, 0.0) {
            continue;
        }
        let z = f.point_of(fi);
        for (y, w) in k.iter() {
            for j in 0..d {
                x[j] = z[j] + y[j];
            }
            let idx = out.index_of(&x).expect("output box covers all sums");
            out.data_mut()[idx] += fv * w;
        }
    }
    Ok(out)
}

/// Same as [`convolve_direct`] via a zero-padded multidimensional FFT over
/// the kernel's bounding box.
pub fn convolve_fft(f: &LatticeSeq, k: &DiscreteKernel) -> Result<LatticeSeq> {
    check_dims(f, k)?;
    let Some((origin, shape)) = output_box(f, k) else {
        return LatticeSeq::zeros(f.origin().to_vec(), vec![0; f.dim()]);
    };
    let (lo, _) = k.bounding_box().expect("nonempty kernel");
    let cells: usize = shape
        .iter()
        .try_fold(1usize, |a, &s| a.checked_mul(s))
        .unwrap_or(usize::MAX);
    if cells > FFT_CELL_LIMIT {
        return Err(crate::Error::ResourceLimit(format!(
            "FFT grid of {cells} cells"
        )));
    }
    let d = f.dim();
    let mut a = vec![Complex64::new(0.0, 0.0); cells];
    let mut b = vec![Complex64::new(0.0, 0.0); cells];
    let flat = |p: &[i64]| -> usize {
        let mut i = 0usize;
        for j in 0..d {
            i = i * shape[j] + p[j] as usize;
        }
        i
    };
    let mut off = vec![0i64; d];
    for (fi, &fv) in f.data().iter().enumerate() {
        let z = f.point_of(fi);
        for j in 0..d {
            off[j] = z[j] - f.origin()[j];
        }
        a[flat(&off)] = fv;
    }
    for (y, w) in k.iter() {
        for j in 0..d {
            off[j] = y[j] - lo[j];
        }
        b[flat(&off)] += Complex64::new(w, 0.0);
    }
    fft_nd(&mut a, &shape, false);
    fft_nd(&mut b, &shape, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fft_nd(&mut a, &shape, true);
    let scale = 1.0 / cells as f64;
    for v in a.iter_mut() {
        *v *= scale;
    }
    LatticeSeq::from_data(origin, shape, a)
}

/// Convolution, choosing the cheaper of direct summation and FFT.
pub fn convolve(f: &LatticeSeq, k: &DiscreteKernel) -> Result<LatticeSeq> {
    check_dims(f, k)?;
    let Some((_, shape)) = output_box(f, k) else {
        return convolve_direct(f, k);
    };
    let direct = (f.len() as f64) * (k.len() as f64);
    let cells: f64 = shape.iter().map(|&s| s as f64).product();
    let fft = 3.0 * cells * cells.log2().max(1.0) * 4.0;
    if fft < direct && cells <= FFT_CELL_LIMIT as f64 {
        convolve_fft(f, k)
    } else {
        convolve_direct(f, k)
    }
}
