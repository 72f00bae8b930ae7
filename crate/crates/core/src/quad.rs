//! Numerical quadrature: adaptive Gauss–Kronrod, Gauss–Legendre rules and
//! oscillatory integrals with polynomial phase.

use std::f64::consts::PI;

use crate::error::{invalid, Error};
use crate::{e, Complex64, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// One 15-point Kronrod step with the embedded 7-point Gauss error estimate.
pub fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Adaptive Gauss–Kronrod on `[a, b]` to absolute tolerance `tol`.
///
/// Intervals whose local estimate exceeds their share of `tol` are bisected;
/// `max_evals` bounds the work, after which a numeric failure carrying the
/// running estimate is returned.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_evals: usize,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) || !(tol > 0.0) {
        return Err(invalid(
            "integration needs finite limits and positive tolerance",
        ));
    }
    if a == b {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    let width = (b - a).abs();
    let mut stack = vec![(a, b, gk15(&mut f, a, b))];
    let mut evals = 15;
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    while let Some((lo, hi, (v, err))) = stack.pop() {
        let share = tol * (hi - lo).abs() / width;
        let tiny = (hi - lo).abs() <= width * 1e-14;
        if err <= share || tiny {
            value += v;
            error += err;
            continue;
        }
        if evals + 30 > max_evals {
            let pending: Complex64 = stack.iter().map(|s| s.2 .0).sum::<Complex64>() + v;
            return Err(Error::NumericFailure {
                message: format!("adaptive quadrature on [{a}, {b}] did not reach {tol:e}"),
                estimate: (value + pending).norm(),
                evaluations: evals,
            });
        }
        let mid = 0.5 * (lo + hi);
        let left = gk15(&mut f, lo, mid);
        let right = gk15(&mut f, mid, hi);
        evals += 30;
        stack.push((mid, hi, right));
        stack.push((lo, mid, left));
    }
    Ok(QuadResult {
        value,
        error,
        evaluations: evals,
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Phase variation, in cycles, above which degree ≤ 2 phases are handled by
/// the asymptotic endpoint expansion instead of panel quadrature.
pub const ASYMPTOTIC_CYCLES: f64 = 64.0;
/// Largest phase variation accepted for degree ≥ 3 panel quadrature.
pub const MAX_PANEL_CYCLES: f64 = 1e6;

/// `∫_0^1 e(c_1 u + c_2 u² + …) du` with `coeffs = [c_1, c_2, …]`, to absolute
/// accuracy `tol`.
pub fn poly_phase_integral(coeffs: &[f64], tol: f64) -> Result<Complex64> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(invalid("phase coefficients must be finite"));
    }
    let deg = coeffs.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
    if deg == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let c = &coeffs[..deg];
    // sup of |φ'| on [0, 1]
    let slope: f64 = c
        .iter()
        .enumerate()
        .map(|(j, v)| (j + 1) as f64 * v.abs())
        .sum();
    if deg <= 2 && slope > ASYMPTOTIC_CYCLES {
        let b = if deg == 2 { c[1] } else { 0.0 };
        return quadratic_phase(c[0], b, tol);
    }
    if slope > MAX_PANEL_CYCLES {
        return Err(Error::NumericFailure {
            message: format!("degree-{deg} phase varies by up to {slope:.3e} cycles"),
            estimate: f64::NAN,
            evaluations: 0,
        });
    }
    panel_quadrature(c, 0.0, 1.0, tol)
}

fn phase(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &cj| (acc + cj) * u)
}

/// Equal panels of at most one cycle each, adaptive GK on every panel.
fn panel_quadrature(c: &[f64], lo: f64, hi: f64, tol: f64) -> Result<Complex64> {
    let slope: f64 = c
        .iter()
        .enumerate()
        .map(|(j, v)| (j + 1) as f64 * v.abs() * lo.abs().max(hi.abs()).powi(j as i32))
        .sum();
    let panels = ((slope * (hi - lo)).ceil() as usize).max(1);
    let h = (hi - lo) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let a = lo + k as f64 * h;
        let b = if k + 1 == panels { hi } else { a + h };
        let r = integrate(|u| e(phase(c, u)), a, b, tol / panels as f64, 20_000)?;
        total += r.value;
    }
    Ok(total)
}

/// `∫_0^1 e(a u + b u²) du`.
///
/// Where `|φ'| ≥ 5√|b|` the antiderivative `e(φ)·Σ_k h_k` with
/// `h_k = (2k−1)!! (φ'')^k / ((2πi)^{k+1} φ'^{2k+1})` is summed up to its
/// smallest term; the remaining window around the stationary point carries
/// at most a few cycles and is integrated numerically.
fn quadratic_phase(a: f64, b: f64, tol: f64) -> Result<Complex64> {
    let c = [a, b];
    let dphi = |u: f64| a + 2.0 * b * u;
    let (near_lo, near_hi) = if b == 0.0 {
        (f64::INFINITY, f64::NEG_INFINITY)
    } else {
        let us = -a / (2.0 * b);
        let half = 2.5 / b.abs().sqrt();
        ((us - half).max(0.0), (us + half).min(1.0))
    };
    let antideriv = |u: f64| -> Complex64 {
        let p1 = dphi(u);
        let p2 = 2.0 * b;
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        let mut term = 1.0 / (two_pi_i * p1);
        let mut sum = term;
        let mut prev = term.norm();
        for k in 1..200 {
            let next = term * ((2 * k - 1) as f64 * p2) / (two_pi_i * p1 * p1);
            let mag = next.norm();
            if mag >= prev || mag == 0.0 {
                break;
            }
            sum += next;
            term = next;
            prev = mag;
            if mag < 1e-18 {
                break;
            }
        }
        e(phase(&c, u)) * sum
    };
    let mut total = Complex64::new(0.0, 0.0);
    if near_lo >= near_hi {
        // stationary window misses [0, 1]
        return Ok(antideriv(1.0) - antideriv(0.0));
    }
    if near_lo > 0.0 {
        total += antideriv(near_lo) - antideriv(0.0);
    }
    if near_hi < 1.0 {
        total += antideriv(1.0) - antideriv(near_hi);
    }
    total += panel_window(&c, near_lo, near_hi, tol)?;
    Ok(total)
}

/// Panel quadrature on `[lo, hi]` for a quadratic phase, with panels sized
/// by the local phase derivative.
fn panel_window(c: &[f64; 2], lo: f64, hi: f64, tol: f64) -> Result<Complex64> {
    let slope = (c[0] + 2.0 * c[1] * lo)
        .abs()
        .max((c[0] + 2.0 * c[1] * hi).abs());
    let panels = ((slope * (hi - lo)).ceil() as usize).max(1);
    let h = (hi - lo) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let a = lo + k as f64 * h;
        let b = if k + 1 == panels { hi } else { a + h };
        let r = integrate(|u| e(phase(c, u)), a, b, tol / panels as f64, 20_000)?;
        total += r.value;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let s: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((s - 2.0).abs() < 1e-15);
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gk15_polynomial_exactness() {
        // Kronrod 15 is exact through degree 22, embedded Gauss 7 through 13
        for deg in 0..=22 {
            let mut f = |x: f64| Complex64::new(x.powi(deg), 0.0);
            let (v, _) = gk15(&mut f, 0.0, 1.0);
            let exact = 1.0 / (deg + 1) as f64;
            assert!((v.re - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn gauss_legendre_exactness() {
        for n in [1usize, 2, 5, 16, 40] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let s: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg + 1) as f64
                };
                assert!((s - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn adaptive_handles_peaks() {
        let r = integrate(
            |x| Complex64::new(1.0 / (1e-4 + x * x), 0.0),
            -1.0,
            1.0,
            1e-10,
            100_000,
        )
        .unwrap();
        let exact = 2.0 * (1.0 / 1e-2_f64) * (1.0 / 1e-2_f64).atan();
        assert!((r.value.re - exact).abs() < 1e-8);
    }

    #[test]
    fn adaptive_reports_failure() {
        let r = integrate(
            |x| Complex64::new((1.0 / x.abs().max(1e-300)).sin(), 0.0),
            -1.0,
            1.0,
            1e-14,
            300,
        );
        assert!(matches!(r, Err(Error::NumericFailure { .. })));
    }

    fn linear_closed_form(a: f64) -> Complex64 {
        if a == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        // e(a) − 1 without cancellation
        let num = Complex64::new(-2.0 * (PI * a).sin().powi(2), (2.0 * PI * a).sin());
        num / Complex64::new(0.0, 2.0 * PI * a)
    }

    #[test]
    fn linear_phase_both_routes() {
        for a in [0.0, 1e-9, 0.3, 7.5, 63.9, 64.1, 1234.5, 9.87e6, -3.3e5] {
            let v = poly_phase_integral(&[a], 1e-10).unwrap();
            assert!((v - linear_closed_form(a)).norm() < 1e-10, "a={a}");
        }
    }

    #[test]
    fn quadratic_routes_agree() {
        // just above the switch the asymptotic route must match panels
        for &(a, b) in &[
            (10.0, 30.0),
            (-40.0, 50.0),
            (3.0, -60.0),
            (65.0, 0.5),
            (-100.0, 60.0),
        ] {
            let fast = poly_phase_integral(&[a, b], 1e-12).unwrap();
            let slow = panel_quadrature(&[a, b], 0.0, 1.0, 1e-12).unwrap();
            assert!(
                (fast - slow).norm() < 1e-10,
                "a={a} b={b}: {fast} vs {slow}"
            );
        }
    }

    #[test]
    fn fresnel_limit() {
        // ∫_0^1 e(b u²) → e(1/8)/(2√(2b)) as b → ∞
        let b = 1e8;
        let v = poly_phase_integral(&[0.0, b], 1e-12).unwrap();
        let lead = e(0.125) / (2.0 * (2.0 * b).sqrt());
        let err = (v - lead).norm();
        assert!(err < 2.0 / (2.0 * PI * 2.0 * b), "{v} vs {lead}: {err}");
    }

    #[test]
    fn cubic_panels() {
        let v = poly_phase_integral(&[0.0, 0.0, 5.0], 1e-10).unwrap();
        let slow = integrate(|u| e(5.0 * u * u * u), 0.0, 1.0, 1e-12, 1_000_000).unwrap();
        assert!((v - slow.value).norm() < 1e-10);
        assert!(poly_phase_integral(&[0.0, 0.0, 1e7], 1e-8).is_err());
    }
}
