use super::Family;
use crate::arith::{
    complete_poly_sum, euler_phi, factorize, mobius_of, phase_coefficients, FreqPoint, RootTable,
};
use crate::error::{invalid, Error};
use crate::{e_rat, Complex64, Result};

/// Heights up to this are summed directly.
const DIRECT_HEIGHT: u64 = 1 << 12;
/// Largest prime-power modulus summed by brute force.
const COMPONENT_LIMIT: u64 = 1 << 24;

/// The coefficient `S(θ)`: `μ(q)/φ(q)` for the primes, the complete sum
/// `(1/q) Σ_{n ≤ q} e(θ_1 n + … + θ_d n^d)` for polynomial orbits.
pub fn coeffs(family: Family, theta: &FreqPoint) -> Result<Complex64> {
    match family {
        Family::Prime => {
            if theta.dim() != 1 {
                return Err(invalid(format!(
                    "prime coefficients live in dimension 1, got {}",
                    theta.dim()
                )));
            }
            let q = theta.height();
            Ok(Complex64::new(
                mobius_of(q) as f64 / euler_phi(q) as f64,
                0.0,
            ))
        }
        Family::Poly(d) => {
            let q = theta.height();
            if q <= DIRECT_HEIGHT {
                complete_poly_sum(q, theta, d)
            } else {
                if theta.dim() != d {
                    return Err(invalid(format!(
                        "point has dimension {}, expected {d}",
                        theta.dim()
                    )));
                }
                factored_sum(q, &phase_coefficients(theta))
            }
        }
        Family::Custom => Err(invalid("custom multipliers carry no coefficient family")),
    }
}

fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    debug_assert_eq!(r0, 1);
    t0.rem_euclid(m as i128) as u64
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// Splits the period-`q` sum into prime-power factors by the Chinese
/// remainder theorem: with `c = (q/m)^{-1} mod m` the factor at `m = p^k`
/// has coefficients `c·A_j mod m`.
fn factored_sum(q: u64, a: &[u64]) -> Result<Complex64> {
    let mut acc = Complex64::new(1.0, 0.0);
    for (p, k) in factorize(q) {
        let m = p.pow(k);
        let c = mod_inverse(q / m, m);
        let local: Vec<u64> = a.iter().map(|&x| mul_mod(x % m, c, m)).collect();
        let v = prime_power_sum(p, k, &local)?;
        if v == Complex64::new(0.0, 0.0) {
            return Ok(v);
        }
        acc *= v;
    }
    Ok(acc)
}

/// `(1/m) Σ_{n mod m} e((A_1 n + … + A_d n^d)/m)` for `m = p^k`.
pub(crate) fn prime_power_sum(p: u64, k: u32, a: &[u64]) -> Result<Complex64> {
    let m = p.pow(k);
    match a.len() {
        1 => Ok(if a[0].is_multiple_of(m) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }),
        2 => Ok(quadratic_sum(p, k, a[0] % m, a[1] % m)),
        _ if m <= COMPONENT_LIMIT => Ok(RootTable::new(m).poly_average(a)),
        _ => Err(Error::ResourceLimit(format!(
            "complete sum of degree {} modulo {p}^{k}",
            a.len()
        ))),
    }
}

/// Jacobi symbol `(a/n)` for odd `n`.
fn jacobi(mut a: u64, mut n: u64) -> i32 {
    a %= n;
    let mut t = 1;
    while a != 0 {
        while a.is_multiple_of(2) {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Normalized Gauss sum `(1/m) Σ_{n mod m} e(a n²/m)` for `gcd(a, m) = 1`.
fn gauss(a: u64, p: u64, k: u32, m: u64) -> Complex64 {
    let root = (m as f64).sqrt() / m as f64;
    if p == 2 {
        // (1 + i^a)(2/a)^k 2^{k/2}, valid for k ≥ 2
        let ia = match a % 4 {
            1 => Complex64::new(0.0, 1.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let sign = if k % 2 == 1 && (a % 8 == 3 || a % 8 == 5) {
            -1.0
        } else {
            1.0
        };
        (Complex64::new(1.0, 0.0) + ia) * (sign * root)
    } else {
        let eps = if m % 4 == 1 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 1.0)
        };
        eps * (jacobi(a, m) as f64 * root)
    }
}

/// Quadratic complete sums by completing the square.
fn quadratic_sum(p: u64, k: u32, a1: u64, a2: u64) -> Complex64 {
    let m = p.pow(k);
    let zero = Complex64::new(0.0, 0.0);
    if m <= 8 {
        return RootTable::new(m).poly_average(&[a1, a2]);
    }
    if a1.is_multiple_of(p) && a2.is_multiple_of(p) {
        return quadratic_sum(p, k - 1, a1 / p, a2 / p);
    }
    if a2.is_multiple_of(p) {
        // the shift n → n + m/p multiplies the sum by e(a1/p) ≠ 1
        return zero;
    }
    let b = if p == 2 {
        if a1 % 2 == 1 {
            return zero;
        }
        mul_mod(a1 / 2, mod_inverse(a2, m), m)
    } else {
        mul_mod(a1, mod_inverse(mul_mod(2, a2, m), m), m)
    };
    // a2 n² + a1 n = a2 (n + b)² − a2 b²
    let shift = mul_mod(a2, mul_mod(b, b, m), m);
    e_rat(-(shift as i128), m) * gauss(a2, p, k, m)
}
