use super::smax::{SmaxModel, DEFAULT_TAIL_TOL};
use super::{coeffs, Family, LevelTag, MultiplierMeta, TorusMultiplier};
use crate::arith::{lcm, FreqPoint, ReducedFraction};
use crate::error::{invalid, Error};
use crate::kernels::{cutoff_profile, ContinuousAverage, CUTOFF_SUPPORT};
use crate::{Complex64, Result};

/// Largest level the exact lookup handles; heights stay below `2^63`.
const MAX_LEVEL: u32 = 61;

/// A rational `num/den` near a coordinate, with the signed torus offset
/// `diff = x − num/den ∈ [−1/2, 1/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub num: u64,
    pub den: u64,
    pub diff: f64,
}

fn level_radius(s: u32) -> f64 {
    CUTOFF_SUPPORT * 10f64.powi(-(s as i32))
}

fn level_of(q: u64) -> u32 {
    63 - q.leading_zeros()
}

/// `x − p/q` with the product error recovered by a fused multiply-add.
fn offset(x: f64, p: u64, q: u64) -> f64 {
    let qf = q as f64;
    let r = x * qf;
    let err = x.mul_add(qf, -r);
    ((r - p as f64) + err) / qf
}

/// Rationals `a/q` with `q ≤ max_den` that can carry a level term at `x`.
///
/// A level-`s` term at `θ` is nonzero only if `|x − a/q| < 10^{-s}/50`, and
/// since `q < 2^{s+1}` this forces `|x − a/q| < 1/(2q²)`. By Legendre's
/// theorem `a/q` is then a continued-fraction convergent of `x`, which is
/// computed exactly from the binary expansion of `x`.
pub fn convergent_candidates(x: f64, max_den: u64) -> Vec<Candidate> {
    let mut x = x - x.floor();
    if x >= 1.0 {
        x = 0.0;
    }
    let mut out: Vec<Candidate> = Vec::with_capacity(4);
    let mut push = |c: Candidate| {
        // keep only offsets inside the widest support the level allows
        if c.diff.abs() < level_radius(level_of(c.den)) {
            if let Some(prev) = out.iter_mut().find(|o| o.num == c.num && o.den == c.den) {
                if c.diff.abs() < prev.diff.abs() {
                    *prev = c;
                }
            } else {
                out.push(c);
            }
        }
    };
    if x == 0.0 {
        push(Candidate {
            num: 0,
            den: 1,
            diff: 0.0,
        });
        return out;
    }
    // closeness to 1 is measured against 0/1 on the torus
    push(Candidate {
        num: 0,
        den: 1,
        diff: if x < 0.5 { x } else { x - 1.0 },
    });
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let (mant, e2) = if exp == 0 {
        (bits & ((1 << 52) - 1), -1074)
    } else {
        ((bits & ((1 << 52) - 1)) | (1 << 52), exp - 1075)
    };
    let k = -e2 - mant.trailing_zeros() as i64;
    if k > 120 {
        // every further convergent has a denominator beyond 2^60
        return out;
    }
    let mut num = (mant >> mant.trailing_zeros()) as u128;
    let mut den = 1u128 << k;
    let (mut p2, mut q2, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    while den != 0 {
        let a = num / den;
        let (n2, d2) = (den, num - a * den);
        num = n2;
        den = d2;
        let Some(p) = a.checked_mul(p1).and_then(|v| v.checked_add(p2)) else {
            break;
        };
        let Some(q) = a.checked_mul(q1).and_then(|v| v.checked_add(q2)) else {
            break;
        };
        p2 = p1;
        q2 = q1;
        p1 = p;
        q1 = q;
        if q > max_den as u128 {
            break;
        }
        let (p, q) = (p as u64, q as u64);
        if p == q {
            push(Candidate {
                num: 0,
                den: 1,
                diff: x - 1.0,
            });
        } else if p < q {
            push(Candidate {
                num: p,
                den: q,
                diff: offset(x, p, q),
            });
        }
    }
    out
}

/// One nonzero term of a multi-frequency sum at a given point.
#[derive(Clone, Debug, PartialEq)]
pub struct ActiveTerm {
    pub theta: FreqPoint,
    pub level: u32,
    pub beta: Vec<f64>,
    pub value: Complex64,
}

/// `α ↦ Σ_{s_min ≤ s ≤ s_max} Σ_{θ ∈ R_s} S(θ) m̂_N(α−θ) χ̂(10^s(α−θ))`.
#[derive(Clone, Debug)]
pub struct BourgainMultiplier {
    family: Family,
    dim: usize,
    s_min: u32,
    s_max: u32,
    avg: ContinuousAverage,
}

impl BourgainMultiplier {
    pub fn new(family: Family, n: f64, s_min: u32, s_max: u32) -> Result<Self> {
        let dim = family
            .dim()
            .ok_or_else(|| invalid("a coefficient family is required"))?;
        if s_min > s_max {
            return Err(invalid("empty level range"));
        }
        if s_max > MAX_LEVEL {
            return Err(Error::ResourceLimit(format!(
                "level {s_max} exceeds the exact-arithmetic range (max {MAX_LEVEL})"
            )));
        }
        Ok(Self {
            family,
            dim,
            s_min,
            s_max,
            avg: ContinuousAverage::new(n, dim)?,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> (u32, u32) {
        (self.s_min, self.s_max)
    }

    pub fn n(&self) -> f64 {
        self.avg.t()
    }

    /// Candidates for one coordinate value, restricted to this level range.
    pub fn candidates(&self, x: f64) -> Vec<Candidate> {
        convergent_candidates(x, (1u64 << (self.s_max + 1)) - 1)
    }

    /// All nonzero terms at `alpha`.
    pub fn active_terms(&self, alpha: &[f64]) -> Result<Vec<ActiveTerm>> {
        let lists: Vec<Vec<Candidate>> = alpha.iter().map(|&x| self.candidates(x)).collect();
        let refs: Vec<&[Candidate]> = lists.iter().map(Vec::as_slice).collect();
        self.terms_from(&refs)
    }

    pub fn eval(&self, alpha: &[f64]) -> Result<Complex64> {
        if alpha.len() != self.dim {
            return Err(invalid("point dimension mismatch"));
        }
        let lists: Vec<Vec<Candidate>> = alpha.iter().map(|&x| self.candidates(x)).collect();
        let refs: Vec<&[Candidate]> = lists.iter().map(Vec::as_slice).collect();
        self.eval_candidates(&refs)
    }

    /// Evaluation from precomputed per-coordinate candidate lists.
    pub fn eval_candidates(&self, lists: &[&[Candidate]]) -> Result<Complex64> {
        if lists.iter().any(|l| l.is_empty()) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.terms_from(lists)?.iter().map(|t| t.value).sum())
    }

    fn terms_from(&self, lists: &[&[Candidate]]) -> Result<Vec<ActiveTerm>> {
        let d = lists.len();
        let mut out = Vec::new();
        if lists.iter().any(|l| l.is_empty()) {
            return Ok(out);
        }
        let mut idx = vec![0usize; d];
        loop {
            if let Some(t) = self.term(lists, &idx)? {
                out.push(t);
            }
            let mut j = d;
            loop {
                if j == 0 {
                    return Ok(out);
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < lists[j].len() {
                    break;
                }
                idx[j] = 0;
            }
        }
    }

    fn term(&self, lists: &[&[Candidate]], idx: &[usize]) -> Result<Option<ActiveTerm>> {
        let mut q = 1u64;
        for (l, &i) in lists.iter().zip(idx) {
            match lcm(q, l[i].den) {
                Some(v) => q = v,
                None => return Ok(None),
            }
        }
        let s = level_of(q);
        if s < self.s_min || s > self.s_max {
            return Ok(None);
        }
        let scale = 10f64.powi(s as i32);
        let mut cut = 1.0;
        for (l, &i) in lists.iter().zip(idx) {
            cut *= cutoff_profile(scale * l[i].diff);
            if cut == 0.0 {
                return Ok(None);
            }
        }
        let coords = lists
            .iter()
            .zip(idx)
            .map(|(l, &i)| ReducedFraction::new(l[i].num, l[i].den))
            .collect::<Result<Vec<_>>>()?;
        let theta = FreqPoint::new(coords)?;
        let beta: Vec<f64> = lists.iter().zip(idx).map(|(l, &i)| l[i].diff).collect();
        let value = coeffs(self.family, &theta)? * self.avg.eval(&beta)? * cut;
        Ok(Some(ActiveTerm {
            theta,
            level: s,
            beta,
            value,
        }))
    }
}

/// The single-level multiplier `L̂_{s,N}` of a coefficient family.
pub fn level_multiplier(s: u32, n: u64, family: Family) -> Result<TorusMultiplier> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let b = BourgainMultiplier::new(family, n as f64, s, s)?;
    let meta = MultiplierMeta {
        family,
        level: LevelTag::Level(s),
        n: Some(n as f64),
        bound: 1.0,
        tail_bound: None,
        reach: None,
    };
    Ok(TorusMultiplier::from_bourgain(b, meta))
}

/// `Σ_{s ≤ s_max} L̂_{s,N}` with a certified (prime) or fitted (polynomial)
/// bound on the omitted levels. Fails with a resource-limit error naming the
/// required `s_max` when that bound exceeds `tol` (default `1e-4`).
pub fn full_multiplier(
    n: u64,
    s_max: u32,
    family: Family,
    tol: Option<f64>,
) -> Result<TorusMultiplier> {
    if n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let tol = tol.unwrap_or(DEFAULT_TAIL_TOL);
    let model = SmaxModel::for_family(family)?;
    let tail = model.tail(s_max);
    if tail > tol {
        let need = model.required_s_max(tol)?;
        return Err(Error::ResourceLimit(format!(
            "tail bound {tail:.3e} exceeds {tol:.1e} at s_max = {s_max}; s_max must be at least {need}"
        )));
    }
    let b = BourgainMultiplier::new(family, n as f64, 0, s_max)?;
    let bound = (0..=s_max).map(|s| model.smax(s)).fold(0.0, f64::max);
    let meta = MultiplierMeta {
        family,
        level: LevelTag::Full { s_max },
        n: Some(n as f64),
        bound: bound.max(1.0),
        tail_bound: Some(tail),
        reach: None,
    };
    Ok(TorusMultiplier::from_bourgain(b, meta))
}
