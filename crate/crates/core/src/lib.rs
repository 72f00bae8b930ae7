//! Numerical toolkit for q-variation estimates of discrete averages along
//! the primes and along polynomial orbits.
//!
//! The crate is split by concern:
//!
//! * [`arith`]: sieves, Möbius/totient/von Mangoldt tables, rational
//!   frequency sets and complete exponential sums.
//! * [`varnorm`]: jump counting functions, homogeneous and inhomogeneous
//!   q-variation, long/short splits and the parent-partition construction.
//! * [`quad`]: Gauss–Kronrod and oscillatory quadrature used by the kernels.
//! * [`kernels`]: the averaging kernels, their Fourier transforms, the
//!   continuous average and the smooth cutoff.
//! * [`multiplier`]: multi-frequency approximating multipliers, arc
//!   classification, periodization and multiplier application.
//!
//! Throughout, `e(x)` denotes `exp(2πix)` and Fourier transforms on `Z^d`
//! use the `+` sign: `K̂(α) = Σ_x K(x) e(α·x)`. The inverse transform of a
//! torus function `m` at `x` is `∫ m(α) e(−α·x) dα`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod arith;
mod error;
pub mod kernels;
pub mod lattice;
pub mod multiplier;
pub mod quad;
pub mod varnorm;

pub use error::{Error, Result};
pub use num_complex::Complex64;

use std::f64::consts::TAU;

/// `e(x) = exp(2πix)`, with `x` reduced mod 1 before scaling.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let r = x - x.round();
    let (s, c) = (TAU * r).sin_cos();
    Complex64::new(c, s)
}

/// `e(num/den)` for an exact rational phase.
#[inline]
pub fn e_rat(num: i128, den: u64) -> Complex64 {
    let d = den as i128;
    let r = num.rem_euclid(d);
    e(r as f64 / den as f64)
}
