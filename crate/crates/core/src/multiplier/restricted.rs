use super::{Family, LevelTag, MultiplierMeta, TorusMultiplier};
use crate::arith::{
    complete_poly_sum, divisors, euler_phi, gcd, mobius_of, FreqPoint, ReducedFraction,
};
use crate::error::{invalid, Error};
use crate::kernels::{cutoff_profile, ContinuousAverage, CUTOFF_SUPPORT};
use crate::quad::integrate;
use crate::{e, Complex64, Result};

/// Cap on the number of divisors in a Möbius assembly.
const DIVISOR_BUDGET: usize = 1 << 12;
/// Cap on `q^d` for sums over all residues.
const RESIDUE_BUDGET: u64 = 1 << 22;

fn check_level_args(q: u64, big_q: f64, t: f64, dim: usize) -> Result<()> {
    if q == 0 || dim == 0 {
        return Err(invalid("need q ≥ 1 and d ≥ 1"));
    }
    if !(big_q > 0.0) || !(t > 0.0) {
        return Err(invalid("Q and t must be positive"));
    }
    if q as f64 > 25.0 * big_q {
        return Err(invalid(format!("q = {q} exceeds 25Q = {}", 25.0 * big_q)));
    }
    Ok(())
}

/// Overall constant of a restricted level: `μ(q)/φ(q)` for the primes.
fn family_scale(family: Family, q: u64, dim: usize) -> Result<f64> {
    match family {
        Family::Prime if dim == 1 => Ok(mobius_of(q) as f64 / euler_phi(q) as f64),
        Family::Prime => Err(invalid("prime coefficients live in dimension 1")),
        Family::Custom => Ok(1.0),
        Family::Poly(_) => Err(Error::Unsupported(
            "polynomial coefficients vary over residues and do not factor out".into(),
        )),
    }
}

/// `Σ_{a ∈ (Z/q)^d} m̂_t(α − a/q) χ̂(Q(α − a/q))`. For `q ≤ 25Q` the
/// cutoffs around different `a/q` have disjoint supports, so only the
/// nearest residue in each coordinate is evaluated.
pub fn full_residue_level(q: u64, big_q: f64, t: f64, dim: usize) -> Result<TorusMultiplier> {
    check_level_args(q, big_q, t, dim)?;
    let avg = ContinuousAverage::new(t, dim)?;
    let meta = MultiplierMeta {
        family: Family::Custom,
        level: LevelTag::None,
        n: Some(t),
        bound: 1.0,
        tail_bound: None,
        reach: None,
    };
    Ok(TorusMultiplier::from_fn(dim, 1.0, move |alpha| {
        nearest_term(alpha, q, big_q, &avg, |_| true)
    })
    .with_meta(meta))
}

fn nearest_term(
    alpha: &[f64],
    q: u64,
    big_q: f64,
    avg: &ContinuousAverage,
    keep: impl Fn(&[u64]) -> bool,
) -> Result<Complex64> {
    let mut a = Vec::with_capacity(alpha.len());
    let mut beta = Vec::with_capacity(alpha.len());
    let mut cut = 1.0;
    for &x in alpha {
        let x = x - x.floor();
        let k = (x * q as f64).round();
        let b = x - k / q as f64;
        cut *= cutoff_profile(big_q * b);
        if cut == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        a.push(k as u64 % q);
        beta.push(b);
    }
    if !keep(&a) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(avg.eval(&beta)? * cut)
}

/// The level restricted to `a ∈ A_q^d = {a : gcd(a_1, …, a_d, q) = 1}`,
/// assembled from full-residue levels as `Σ_{d'|q} μ(q/d') L_{d'}`, and
/// scaled by `μ(q)/φ(q)` for the prime family (`1` for custom).
pub fn mobius_restricted_level(
    q: u64,
    big_q: f64,
    t: f64,
    family: Family,
    dim: usize,
) -> Result<TorusMultiplier> {
    check_level_args(q, big_q, t, dim)?;
    let scale = family_scale(family, q, dim)?;
    let divs = divisors(q);
    if divs.len() > DIVISOR_BUDGET {
        return Err(Error::ResourceLimit(format!(
            "{q} has {} divisors",
            divs.len()
        )));
    }
    let parts: Vec<(f64, TorusMultiplier)> = divs
        .into_iter()
        .filter_map(|dp| {
            let mu = mobius_of(q / dp);
            (mu != 0).then(|| full_residue_level(dp, big_q, t, dim).map(|m| (mu as f64, m)))
        })
        .collect::<Result<_>>()?;
    let meta = MultiplierMeta {
        family,
        level: LevelTag::None,
        n: Some(t),
        bound: scale.abs() * parts.len() as f64,
        tail_bound: None,
        reach: None,
    };
    Ok(TorusMultiplier::from_fn(dim, meta.bound, move |alpha| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (mu, m) in &parts {
            acc += m.eval(alpha)? * *mu;
        }
        Ok(acc * scale)
    })
    .with_meta(meta))
}

/// The same restricted level summed term by term over all of `A_q^d`.
pub fn restricted_level_direct(
    q: u64,
    big_q: f64,
    t: f64,
    family: Family,
    dim: usize,
) -> Result<TorusMultiplier> {
    check_level_args(q, big_q, t, dim)?;
    let scale = family_scale(family, q, dim)?;
    if (q as f64).powi(dim as i32) > RESIDUE_BUDGET as f64 {
        return Err(Error::ResourceLimit(format!("{q}^{dim} residues")));
    }
    let avg = ContinuousAverage::new(t, dim)?;
    let residues: Vec<Vec<u64>> = all_residues(q, dim)
        .into_iter()
        .filter(|a| a.iter().fold(q, |g, &x| gcd(g, x)) == 1)
        .collect();
    let meta = MultiplierMeta {
        family,
        level: LevelTag::None,
        n: Some(t),
        bound: scale.abs(),
        tail_bound: None,
        reach: None,
    };
    Ok(TorusMultiplier::from_fn(dim, scale.abs(), move |alpha| {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut beta = vec![0.0; alpha.len()];
        for a in &residues {
            let mut cut = 1.0;
            for ((b, &x), &aj) in beta.iter_mut().zip(alpha).zip(a) {
                let r = x - aj as f64 / q as f64;
                *b = r - r.round();
                cut *= cutoff_profile(big_q * *b);
            }
            if cut != 0.0 {
                acc += avg.eval(&beta)? * cut;
            }
        }
        Ok(acc * scale)
    })
    .with_meta(meta))
}

fn all_residues(q: u64, dim: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut a = vec![0u64; dim];
    loop {
        out.push(a.clone());
        let mut j = dim;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            a[j] += 1;
            if a[j] < q {
                break;
            }
            a[j] = 0;
        }
    }
}

/// Outcome of the inverse-transform identity check for polynomial
/// coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct L1IdentityReport {
    pub q: u64,
    pub big_q: f64,
    pub d: usize,
    /// Half-width of the spatial window `[−W, W]^d`.
    pub window: i64,
    /// `max_x |LHS(x) − RHS(x)|` over the window.
    pub max_residual: f64,
    /// `Σ_x |LHS(x)|` over the window.
    pub l1_mass: f64,
}

/// Compares the inverse transform of
/// `G(α) = Σ_{a ∈ (Z/q)^d} S(a/q) χ̂((Q/4)(α − a/q))`, computed by
/// quadrature over each bump, with the closed form
/// `c(x_1)⋯c(x_d) · q^{d−1} · 1[x_j ≡ x_1^j mod q for all j]`, where
/// `c(x) = ∫ χ̂(Qu/4) e(−ux) du`. Requires `q ≤ 5Q`.
pub fn poly_l1_identity(q: u64, big_q: f64, d: usize, window: i64) -> Result<L1IdentityReport> {
    if q == 0 || d == 0 || window < 0 {
        return Err(invalid("need q ≥ 1, d ≥ 1 and a nonnegative window"));
    }
    if !(big_q > 0.0) {
        return Err(invalid("Q must be positive"));
    }
    if q as f64 > 5.0 * big_q {
        return Err(invalid(format!("q = {q} exceeds 5Q = {}", 5.0 * big_q)));
    }
    let width = (2 * window + 1) as usize;
    if (q as f64).powi(d as i32) * (width as f64).powi(d as i32) > 4e8 {
        return Err(Error::ResourceLimit(format!(
            "{q}^{d} residues over a window of {width}^{d} points"
        )));
    }
    let dil = big_q / 4.0;
    let radius = CUTOFF_SUPPORT / dil;
    let tol = 1e-13;
    let budget = 1 << 20;
    // g[a][x] = ∫ χ̂(dil (α − a/q)) e(−α x) dα over the bump at a/q
    let mut g = vec![Complex64::new(0.0, 0.0); q as usize * width];
    for a in 0..q {
        let center = a as f64 / q as f64;
        for (i, x) in (-window..=window).enumerate() {
            let r = integrate(
                |al: f64| e(-al * x as f64) * cutoff_profile(dil * (al - center)),
                center - radius,
                center + radius,
                tol,
                budget,
            )?;
            g[a as usize * width + i] = r.value;
        }
    }
    let c: Vec<Complex64> = (-window..=window)
        .map(|x| {
            integrate(
                |u: f64| e(-u * x as f64) * cutoff_profile(dil * u),
                -radius,
                radius,
                tol,
                budget,
            )
            .map(|r| r.value)
        })
        .collect::<Result<_>>()?;
    let residues = all_residues(q, d);
    let coeffs: Vec<Complex64> = residues
        .iter()
        .map(|a| {
            let coords = a
                .iter()
                .map(|&x| ReducedFraction::reduce(x as i128, q))
                .collect::<Result<Vec<_>>>()?;
            let theta = FreqPoint::new(coords)?;
            complete_poly_sum(theta.height(), &theta, d)
        })
        .collect::<Result<_>>()?;
    let mut max_residual = 0.0f64;
    let mut l1_mass = 0.0;
    let mut idx = vec![0usize; d];
    let qi = q as i128;
    loop {
        let mut lhs = Complex64::new(0.0, 0.0);
        for (a, s) in residues.iter().zip(&coeffs) {
            let mut p = *s;
            for j in 0..d {
                p *= g[a[j] as usize * width + idx[j]];
            }
            lhs += p;
        }
        let x: Vec<i128> = idx.iter().map(|&i| i as i128 - window as i128).collect();
        let on_curve = (1..d).all(|j| (x[j] - x[0].pow(j as u32 + 1)).rem_euclid(qi) == 0);
        let rhs = if on_curve {
            idx.iter().fold(
                Complex64::new((q as f64).powi(d as i32 - 1), 0.0),
                |acc, &i| acc * c[i],
            )
        } else {
            Complex64::new(0.0, 0.0)
        };
        max_residual = max_residual.max((lhs - rhs).norm());
        l1_mass += lhs.norm();
        let mut j = d;
        loop {
            if j == 0 {
                return Ok(L1IdentityReport {
                    q,
                    big_q,
                    d,
                    window,
                    max_residual,
                    l1_mass,
                });
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < width {
                break;
            }
            idx[j] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, dim: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                (0..dim)
                    .map(|j| ((i as f64 + 0.5) * (0.618_033_988_7 + j as f64 * 0.3)).fract())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn q_one_is_full_residue() {
        let a = mobius_restricted_level(1, 3.0, 20.0, Family::Custom, 1).unwrap();
        let b = full_residue_level(1, 3.0, 20.0, 1).unwrap();
        for p in grid(200, 1) {
            assert_eq!(a.eval(&p).unwrap(), b.eval(&p).unwrap());
        }
    }

    #[test]
    fn mobius_matches_direct_on_q4() {
        let a = mobius_restricted_level(4, 1.0, 30.0, Family::Custom, 1).unwrap();
        let b = restricted_level_direct(4, 1.0, 30.0, Family::Custom, 1).unwrap();
        let mut hits = 0;
        for i in 0..1000 {
            let p = [i as f64 / 1000.0 + 1e-4];
            let (u, v) = (a.eval(&p).unwrap(), b.eval(&p).unwrap());
            assert!((u - v).norm() < 1e-10);
            if v.norm() > 0.0 {
                hits += 1;
            }
        }
        assert!(hits > 10);
    }

    #[test]
    fn prime_q_drops_zero_residue() {
        let p = 7;
        let a = mobius_restricted_level(p, 1.0, 10.0, Family::Custom, 2).unwrap();
        let all = full_residue_level(p, 1.0, 10.0, 2).unwrap();
        let zero = full_residue_level(1, 1.0, 10.0, 2).unwrap();
        for x in grid(300, 2) {
            let expect = all.eval(&x).unwrap() - zero.eval(&x).unwrap();
            assert!((a.eval(&x).unwrap() - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn prime_family_scale() {
        let a = mobius_restricted_level(3, 1.0, 10.0, Family::Prime, 1).unwrap();
        let v = a.eval(&[1.0 / 3.0]).unwrap();
        assert!((v.re + 0.5).abs() < 1e-12);
        assert!(mobius_restricted_level(3, 1.0, 10.0, Family::Poly(2), 2).is_err());
        assert!(mobius_restricted_level(30, 1.0, 10.0, Family::Custom, 1).is_err());
    }

    #[test]
    fn l1_identity_small() {
        let r = poly_l1_identity(3, 2.0, 2, 12).unwrap();
        assert!(r.max_residual < 1e-8, "{r:?}");
        assert!(r.l1_mass > 0.0);
        assert!(poly_l1_identity(11, 2.0, 1, 3).is_err());
    }
}
