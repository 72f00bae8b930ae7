//! Exact number-theoretic primitives.
//!
//! Tables are built once by a linear sieve and never mutated afterwards, so a
//! shared reference can be handed to any number of threads.

use std::cmp::Ordering;
use std::fmt;
use std::io::{Read, Write};

use crate::error::invalid;
use crate::{e_rat, Complex64, Error, Result};

/// Default upper bound on the sieve range.
pub const DEFAULT_SIEVE_CAP: usize = 10_000_000;

/// Upper bound on the number of points `enumerate_rats` will materialize.
pub const RATS_BUDGET: u128 = 20_000_000;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Least common multiple, `None` on overflow.
pub fn lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// Positive divisors of `n` in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

/// Prime factorization by trial division, as `(p, k)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut k = 0;
            while n.is_multiple_of(p) {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// A fraction `a/q` in lowest terms with `0 ≤ a/q < 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ReducedFraction {
    num: u64,
    den: u64,
}

impl ReducedFraction {
    pub const ZERO: ReducedFraction = ReducedFraction { num: 0, den: 1 };

    /// Validating constructor: rejects non-reduced or out-of-range input.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(invalid("denominator must be positive"));
        }
        if num >= den {
            return Err(invalid(format!("{num}/{den} is not in [0,1)")));
        }
        if gcd(num, den) != 1 {
            return Err(invalid(format!("{num}/{den} is not reduced")));
        }
        Ok(Self { num, den })
    }

    /// Reduces `num/den` modulo 1 and to lowest terms.
    pub fn reduce(num: i128, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(invalid("denominator must be positive"));
        }
        let r = num.rem_euclid(den as i128) as u64;
        let g = gcd(r, den);
        Ok(Self {
            num: r / g,
            den: den / g,
        })
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Ord for ReducedFraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for ReducedFraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ReducedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A rational point of the torus `[0,1)^d` together with its height, the
/// lcm of the coordinate denominators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FreqPoint {
    coords: Vec<ReducedFraction>,
    height: u64,
}

impl FreqPoint {
    pub fn new(coords: Vec<ReducedFraction>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("a frequency point needs at least one coordinate"));
        }
        let mut height = 1u64;
        for c in &coords {
            height = lcm(height, c.den)
                .ok_or_else(|| Error::ResourceLimit("lcm of denominators overflows u64".into()))?;
        }
        Ok(Self { coords, height })
    }

    pub fn zero(d: usize) -> Self {
        Self {
            coords: vec![ReducedFraction::ZERO; d],
            height: 1,
        }
    }

    /// Convenience constructor from `(numerator, denominator)` pairs.
    pub fn from_pairs(pairs: &[(u64, u64)]) -> Result<Self> {
        let coords = pairs
            .iter()
            .map(|&(a, q)| ReducedFraction::new(a, q))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coords)
    }

    pub fn coords(&self) -> &[ReducedFraction] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    /// The level `s` with `2^s ≤ height < 2^{s+1}`.
    pub fn level(&self) -> u32 {
        63 - self.height.leading_zeros()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(ReducedFraction::to_f64).collect()
    }
}

impl fmt::Display for FreqPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Von Mangoldt, Möbius and totient values for `1..=limit`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArithTables {
    limit: usize,
    von_mangoldt: Vec<f64>,
    mobius: Vec<i8>,
    totient: Vec<u64>,
}

const CACHE_MAGIC: &[u8; 8] = b"QVARTBL\0";
const CACHE_VERSION: u32 = 1;

/// Linear sieve up to `limit`, capped at [`DEFAULT_SIEVE_CAP`].
pub fn build_tables(limit: usize) -> Result<ArithTables> {
    build_tables_with_cap(limit, DEFAULT_SIEVE_CAP)
}

pub fn build_tables_with_cap(limit: usize, cap: usize) -> Result<ArithTables> {
    if limit == 0 {
        return Err(invalid("sieve limit must be at least 1"));
    }
    if limit > cap {
        return Err(Error::ResourceLimit(format!(
            "sieve limit {limit} exceeds the configured cap {cap}"
        )));
    }
    let n = limit;
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    let mut mobius = vec![0i8; n + 1];
    let mut totient = vec![0u64; n + 1];
    let mut von_mangoldt = vec![0f64; n + 1];
    mobius[1] = 1;
    totient[1] = 1;
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
            mobius[i] = -1;
            totient[i] = (i - 1) as u64;
        }
        for &p in &primes {
            let p = p as usize;
            if p > spf[i] as usize || i * p > n {
                break;
            }
            let ip = i * p;
            spf[ip] = p as u32;
            if i % p == 0 {
                mobius[ip] = 0;
                totient[ip] = totient[i] * p as u64;
            } else {
                mobius[ip] = -mobius[i];
                totient[ip] = totient[i] * (p as u64 - 1);
            }
        }
    }
    for i in 2..=n {
        let p = spf[i] as usize;
        let mut m = i;
        while m % p == 0 {
            m /= p;
        }
        if m == 1 {
            von_mangoldt[i] = (p as f64).ln();
        }
    }
    Ok(ArithTables {
        limit,
        von_mangoldt,
        mobius,
        totient,
    })
}

impl ArithTables {
    pub fn limit(&self) -> usize {
        self.limit
    }

    fn check(&self, n: usize) {
        assert!(
            n >= 1 && n <= self.limit,
            "index {n} outside table range 1..={}",
            self.limit
        );
    }

    pub fn von_mangoldt(&self, n: usize) -> f64 {
        self.check(n);
        self.von_mangoldt[n]
    }

    pub fn mobius(&self, n: usize) -> i8 {
        self.check(n);
        self.mobius[n]
    }

    pub fn totient(&self, n: usize) -> u64 {
        self.check(n);
        self.totient[n]
    }

    /// Chebyshev's `ψ(N) = Σ_{n ≤ N} Λ(n)`.
    pub fn psi(&self, n: usize) -> f64 {
        self.check(n);
        self.von_mangoldt[1..=n].iter().sum()
    }

    /// Raw slices indexed by `n` (entry 0 is a placeholder).
    pub fn von_mangoldt_slice(&self) -> &[f64] {
        &self.von_mangoldt
    }

    pub fn mobius_slice(&self) -> &[i8] {
        &self.mobius
    }

    pub fn totient_slice(&self) -> &[u64] {
        &self.totient
    }

    /// Overwrites a single Möbius entry. Only meant for fault-injection runs.
    #[doc(hidden)]
    pub fn corrupt_mobius(&mut self, n: usize, value: i8) {
        self.check(n);
        self.mobius[n] = value;
    }

    /// Writes the tables in the flat cache format: magic, version, limit,
    /// then the three arrays, all little-endian.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&(self.limit as u64).to_le_bytes())?;
        for v in &self.von_mangoldt[1..] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.mobius[1..] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in &self.totient[1..] {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(invalid("not an arithmetic table cache (bad magic)"));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != CACHE_VERSION {
            return Err(invalid(format!("unsupported cache version {version}")));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let limit = u64::from_le_bytes(b8) as usize;
        if limit == 0 || limit > DEFAULT_SIEVE_CAP * 100 {
            return Err(invalid(format!("implausible cached limit {limit}")));
        }
        let mut von_mangoldt = vec![0f64; limit + 1];
        let mut mobius = vec![0i8; limit + 1];
        let mut totient = vec![0u64; limit + 1];
        for v in von_mangoldt.iter_mut().skip(1) {
            r.read_exact(&mut b8)?;
            *v = f64::from_le_bytes(b8);
        }
        let mut b1 = [0u8; 1];
        for v in mobius.iter_mut().skip(1) {
            r.read_exact(&mut b1)?;
            *v = i8::from_le_bytes(b1);
        }
        for v in totient.iter_mut().skip(1) {
            r.read_exact(&mut b8)?;
            *v = u64::from_le_bytes(b8);
        }
        Ok(Self {
            limit,
            von_mangoldt,
            mobius,
            totient,
        })
    }
}

/// `A_q = { r ∈ 1..=q : gcd(r, q) = 1 }`.
pub fn reduced_residues(q: u64) -> Result<Vec<u64>> {
    if q == 0 {
        return Err(invalid("modulus must be positive"));
    }
    Ok((1..=q).filter(|&r| gcd(r, q) == 1).collect())
}

/// `Σ_{r ∈ A_q} e(ra/q)`, defined here only for `gcd(a, q) = 1`.
pub fn ramanujan_sum(q: u64, a: u64) -> Result<Complex64> {
    if q == 0 {
        return Err(invalid("modulus must be positive"));
    }
    if gcd(a, q) != 1 {
        return Err(invalid(format!("gcd({a}, {q}) != 1")));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for r in reduced_residues(q)? {
        acc += e_rat(r as i128 * a as i128, q);
    }
    Ok(acc)
}

/// All reduced rational points of `[0,1)^d` whose height lies in
/// `[2^s, 2^{s+1})`, in lexicographic order of denominators then numerators.
pub fn enumerate_rats(s: u32, d: usize) -> Result<Vec<FreqPoint>> {
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if s >= 40 {
        return Err(Error::ResourceLimit(format!(
            "level {s} is beyond exact enumeration"
        )));
    }
    let lo = 1u64 << s;
    let hi = 1u64 << (s + 1);
    // |R_s| ≤ (number of denominators < 2^{s+1})^d ⋅ (2^{s+1})^d
    let rough = (hi as u128).pow(2 * d as u32);
    if rough > RATS_BUDGET * 64 {
        let estimate = estimate_rats_size(s, d);
        if estimate > RATS_BUDGET {
            return Err(Error::ResourceLimit(format!(
                "R_{s} in dimension {d} has about {estimate} points (budget {RATS_BUDGET})"
            )));
        }
    }
    let residues: Vec<Vec<u64>> = (0..hi)
        .map(|q| {
            if q == 0 {
                Vec::new()
            } else if q == 1 {
                vec![0]
            } else {
                (1..q).filter(|&a| gcd(a, q) == 1).collect()
            }
        })
        .collect();
    let mut out = Vec::new();
    let mut dens = vec![1u64; d];
    loop {
        let height = dens
            .iter()
            .try_fold(1u64, |acc, &q| lcm(acc, q))
            .unwrap_or(u64::MAX);
        if height >= lo && height < hi {
            push_numerators(&dens, &residues, &mut out);
        }
        // odometer over denominators 1..hi
        let mut i = d;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            dens[i] += 1;
            if dens[i] < hi {
                break;
            }
            dens[i] = 1;
        }
    }
}

fn push_numerators(dens: &[u64], residues: &[Vec<u64>], out: &mut Vec<FreqPoint>) {
    let d = dens.len();
    let lists: Vec<&Vec<u64>> = dens.iter().map(|&q| &residues[q as usize]).collect();
    let mut idx = vec![0usize; d];
    loop {
        let coords = (0..d)
            .map(|i| ReducedFraction {
                num: lists[i][idx[i]],
                den: dens[i],
            })
            .collect::<Vec<_>>();
        out.push(FreqPoint::new(coords).expect("height fits"));
        let mut i = d;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < lists[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

fn estimate_rats_size(s: u32, d: usize) -> u128 {
    // Every point of height < 2^{s+1} has each coordinate among the Farey
    // fractions of order 2^{s+1}; count those and raise to the d-th power.
    let hi = 1u64 << (s + 1);
    let farey: u128 = (1..hi)
        .map(|q| if q == 1 { 1 } else { euler_phi(q) as u128 })
        .sum();
    farey.saturating_pow(d as u32)
}

/// Totient by trial division, for values outside any table.
pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// Möbius function by trial division.
pub fn mobius_of(n: u64) -> i8 {
    let f = factorize(n);
    if f.iter().any(|&(_, k)| k > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Root-of-unity table for exact period-`q` exponential sums.
#[derive(Clone, Debug)]
pub struct RootTable {
    q: u64,
    roots: Vec<Complex64>,
}

impl RootTable {
    pub fn new(q: u64) -> Self {
        assert!(q >= 1);
        let roots = (0..q).map(|k| e_rat(k as i128, q)).collect();
        Self { q, roots }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// `e(k/q)` for any integer `k`.
    #[inline]
    pub fn root(&self, k: u64) -> Complex64 {
        self.roots[(k % self.q) as usize]
    }

    /// `(1/q) Σ_{n=1}^{q} e((A_1 n + … + A_d n^d)/q)` for integer phase
    /// coefficients `A_j` taken mod `q`.
    pub fn poly_average(&self, coeffs: &[u64]) -> Complex64 {
        let q = self.q as u128;
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 1..=self.q as u128 {
            let mut pow = n % q;
            let mut phase = 0u128;
            for &a in coeffs {
                phase = (phase + (a as u128 % q) * pow) % q;
                pow = pow * (n % q) % q;
            }
            acc += self.roots[phase as usize];
        }
        acc / self.q as f64
    }
}

/// Integer phase coefficients `A_j = a_j ⋅ (q / q_j) mod q` of a point of
/// height `q`.
pub fn phase_coefficients(theta: &FreqPoint) -> Vec<u64> {
    let q = theta.height();
    theta
        .coords()
        .iter()
        .map(|c| ((c.numerator() as u128 * (q / c.denominator()) as u128) % q as u128) as u64)
        .collect()
}

/// The complete sum `(1/q) Σ_{n=1}^{q} e(θ_1 n + θ_2 n² + … + θ_d n^d)`
/// for `q` the height of `θ`.
pub fn complete_poly_sum(q: u64, theta: &FreqPoint, d: usize) -> Result<Complex64> {
    if theta.dim() != d {
        return Err(invalid(format!(
            "point has dimension {}, expected {d}",
            theta.dim()
        )));
    }
    if q != theta.height() {
        return Err(invalid(format!(
            "modulus {q} differs from the height {} of {theta}",
            theta.height()
        )));
    }
    if q > 1 << 32 {
        return Err(Error::ResourceLimit(format!("complete sum of period {q}")));
    }
    Ok(RootTable::new(q).poly_average(&phase_coefficients(theta)))
}

/// `ψ(N; q, r) = Σ_{n ≤ N, n ≡ r mod q} Λ(n)`.
pub fn psi_progression(tables: &ArithTables, n: usize, q: usize, r: usize) -> Result<f64> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    if q == 0 || r == 0 || r > q {
        return Err(invalid(format!("need 1 ≤ r ≤ q, got r={r}, q={q}")));
    }
    if n > tables.limit() {
        return Err(invalid(format!(
            "N = {n} exceeds the table limit {}",
            tables.limit()
        )));
    }
    let lam = tables.von_mangoldt_slice();
    Ok((r..=n).step_by(q).map(|m| lam[m]).sum())
}

/// The smallest `φ(n) / n^{1−δ}` over `1..=limit`, with its argmin.
pub fn totient_lower_constant(tables: &ArithTables, delta: f64) -> (f64, usize) {
    let phi = tables.totient_slice();
    (1..=tables.limit())
        .map(|n| (phi[n] as f64 / (n as f64).powf(1.0 - delta), n))
        .fold(
            (f64::INFINITY, 0),
            |best, cur| if cur.0 < best.0 { cur } else { best },
        )
}
