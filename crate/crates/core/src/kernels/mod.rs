//! Averaging kernels on `Z^d`, their exponential sums, the continuous
//! average along the moment curve and the smooth frequency cutoff.

mod continuous;
mod convolve;
mod cutoff;
mod discrete;
mod l2;

pub use continuous::{cm_ft, ContinuousAverage, DEFAULT_CM_TOL};
pub use convolve::{convolve, convolve_direct, convolve_fft};
pub use cutoff::{cutoff_ft, cutoff_profile, Cutoff, CUTOFF_PLATEAU, CUTOFF_SUPPORT};
pub use discrete::{
    frac_product, kernel_ft, poly_kernel, prime_kernel, DiscreteKernel, MAX_POLY_DEGREE,
};
pub use l2::{exp_sum_l2_norm, exp_sum_l2_norm_with_tol};
