//! Multi-frequency approximating multipliers on the torus, their
//! coefficient families, arc classification, periodization and application
//! to finitely supported sequences.

mod apply;
mod arcs;
mod bourgain;
mod coeffs;
mod periodize;
mod restricted;
mod smax;
mod superr;

use std::fmt;
use std::sync::Arc;

pub use apply::{apply_multiplier, apply_multiplier_with, AppliedMultiplier, ApplyOptions};
pub use arcs::{classify_arc, classify_batch_csv, ArcClassification, ARC_SEARCH_BUDGET};
pub use bourgain::{
    convergent_candidates, full_multiplier, level_multiplier, ActiveTerm, BourgainMultiplier,
    Candidate,
};
pub use coeffs::coeffs;
pub use periodize::{periodize, RealMultiplier};
pub use restricted::{
    full_residue_level, mobius_restricted_level, poly_l1_identity, restricted_level_direct,
    L1IdentityReport,
};
pub use smax::{max_complete_sum_prime_power, SmaxModel, DEFAULT_TAIL_TOL, POLY_FIT_DELTA};
pub use superr::{dump_multiplier_grid, sup_error, sup_error_report, SupErrorReport};

use crate::error::invalid;
use crate::kernels::{kernel_ft, DiscreteKernel};
use crate::{Complex64, Result};

/// Which averaging problem a multiplier or coefficient belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// Von Mangoldt weighted averages on `Z`.
    Prime,
    /// Averages along `(n, n², …, n^d)`.
    Poly(usize),
    /// Anything else; carries no intrinsic coefficients.
    Custom,
}

impl Family {
    /// Ambient dimension, if determined by the family.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Family::Prime => Some(1),
            Family::Poly(d) => Some(*d),
            Family::Custom => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Prime => write!(f, "prime"),
            Family::Poly(d) => write!(f, "poly{d}"),
            Family::Custom => write!(f, "custom"),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = crate::Error;

    /// Accepts `prime`, `custom`, `poly2`, `poly(2)` and `poly:2`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "prime" | "primes" => return Ok(Family::Prime),
            "custom" => return Ok(Family::Custom),
            _ => {}
        }
        let rest = t
            .strip_prefix("poly")
            .ok_or_else(|| invalid(format!("unknown family `{s}`")))?;
        let digits = rest.trim_matches(|c: char| c == '(' || c == ')' || c == ':' || c == ' ');
        let d: usize = digits
            .parse()
            .map_err(|_| invalid(format!("unknown family `{s}`")))?;
        if d == 0 {
            return Err(invalid("polynomial degree must be at least 1"));
        }
        Ok(Family::Poly(d))
    }
}

/// Which part of the multi-frequency sum a multiplier represents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LevelTag {
    Level(u32),
    Full { s_max: u32 },
    None,
}

/// Descriptive data carried alongside a multiplier.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierMeta {
    pub family: Family,
    pub level: LevelTag,
    /// Averaging length, when there is one.
    pub n: Option<f64>,
    /// A bound for `|m|` over the torus.
    pub bound: f64,
    /// Truncation bound for levels beyond `s_max`.
    pub tail_bound: Option<f64>,
    /// Radius of the spatial support of the inverse transform, if finite.
    pub reach: Option<u64>,
}

type EvalFn = dyn Fn(&[f64]) -> Result<Complex64> + Send + Sync;

#[derive(Clone)]
enum Repr {
    Func(Arc<EvalFn>),
    Bourgain(Arc<BourgainMultiplier>),
    Kernel(Arc<DiscreteKernel>),
}

/// A complex function on `(R/Z)^d`.
#[derive(Clone)]
pub struct TorusMultiplier {
    dim: usize,
    repr: Repr,
    meta: MultiplierMeta,
}

impl fmt::Debug for TorusMultiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TorusMultiplier")
            .field("dim", &self.dim)
            .field("meta", &self.meta)
            .finish_non_exhaustive()
    }
}

impl TorusMultiplier {
    /// Wraps an arbitrary evaluator, which must be 1-periodic.
    pub fn from_fn<F>(dim: usize, bound: f64, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self {
            dim,
            repr: Repr::Func(Arc::new(f)),
            meta: MultiplierMeta {
                family: Family::Custom,
                level: LevelTag::None,
                n: None,
                bound,
                tail_bound: None,
                reach: None,
            },
        }
    }

    /// The exponential sum `K̂` of a kernel, used as a multiplier.
    pub fn from_kernel(k: DiscreteKernel) -> Self {
        let reach = k.bounding_box().map(|(lo, hi)| {
            lo.iter()
                .chain(&hi)
                .map(|v| v.unsigned_abs())
                .max()
                .unwrap_or(0)
        });
        let bound = k.weights().iter().map(|w| w.abs()).sum();
        Self {
            dim: k.dim(),
            repr: Repr::Kernel(Arc::new(k)),
            meta: MultiplierMeta {
                family: Family::Custom,
                level: LevelTag::None,
                n: None,
                bound,
                tail_bound: None,
                reach,
            },
        }
    }

    pub(crate) fn from_bourgain(b: BourgainMultiplier, meta: MultiplierMeta) -> Self {
        Self {
            dim: b.dim(),
            repr: Repr::Bourgain(Arc::new(b)),
            meta,
        }
    }

    pub fn with_meta(mut self, meta: MultiplierMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn meta(&self) -> &MultiplierMeta {
        &self.meta
    }

    /// The structured form, when this is a multi-frequency multiplier.
    pub fn as_bourgain(&self) -> Option<&BourgainMultiplier> {
        match &self.repr {
            Repr::Bourgain(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_kernel(&self) -> Option<&DiscreteKernel> {
        match &self.repr {
            Repr::Kernel(k) => Some(k),
            _ => None,
        }
    }

    pub fn eval(&self, alpha: &[f64]) -> Result<Complex64> {
        if alpha.len() != self.dim {
            return Err(invalid(format!(
                "point has dimension {}, multiplier has {}",
                alpha.len(),
                self.dim
            )));
        }
        match &self.repr {
            Repr::Func(f) => f(alpha),
            Repr::Bourgain(b) => b.eval(alpha),
            Repr::Kernel(k) => kernel_ft(k, alpha),
        }
    }

    /// Pointwise sum of multipliers of equal dimension.
    pub fn sum(parts: Vec<TorusMultiplier>) -> Result<TorusMultiplier> {
        let dim = parts
            .first()
            .map(|p| p.dim)
            .ok_or_else(|| invalid("cannot sum an empty list of multipliers"))?;
        if parts.iter().any(|p| p.dim != dim) {
            return Err(invalid("multipliers have different dimensions"));
        }
        let bound = parts.iter().map(|p| p.meta.bound).sum();
        Ok(TorusMultiplier::from_fn(dim, bound, move |a| {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in &parts {
                acc += p.eval(a)?;
            }
            Ok(acc)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_parsing() {
        assert_eq!("prime".parse::<Family>().unwrap(), Family::Prime);
        assert_eq!("poly2".parse::<Family>().unwrap(), Family::Poly(2));
        assert_eq!("poly(3)".parse::<Family>().unwrap(), Family::Poly(3));
        assert!("poly0".parse::<Family>().is_err());
        assert!("wave".parse::<Family>().is_err());
        assert_eq!(Family::Poly(2).to_string(), "poly2");
    }

    #[test]
    fn dimension_checked() {
        let m = TorusMultiplier::from_fn(2, 1.0, |_| Ok(Complex64::new(1.0, 0.0)));
        assert!(m.eval(&[0.1]).is_err());
        assert_eq!(m.eval(&[0.1, 0.2]).unwrap(), Complex64::new(1.0, 0.0));
    }
}
