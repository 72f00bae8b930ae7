use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use qvar_core::multiplier::Family;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

/// Averaging family selected in a config, serialized as `prime` or `poly<d>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FamilySpec {
    Prime,
    Poly(usize),
}

impl FamilySpec {
    pub fn family(self) -> Family {
        match self {
            FamilySpec::Prime => Family::Prime,
            FamilySpec::Poly(d) => Family::Poly(d),
        }
    }

    pub fn dim(self) -> usize {
        match self {
            FamilySpec::Prime => 1,
            FamilySpec::Poly(d) => d,
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Prime => write!(f, "prime"),
            FamilySpec::Poly(d) => write!(f, "poly{d}"),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim().to_ascii_lowercase();
        if t == "prime" || t == "primes" {
            return Ok(FamilySpec::Prime);
        }
        let digits = t
            .strip_prefix("poly")
            .map(|r| r.trim_start_matches([':', '(']).trim_end_matches(')'));
        match digits.and_then(|r| r.parse::<usize>().ok()) {
            Some(d) if (1..=4).contains(&d) => Ok(FamilySpec::Poly(d)),
            _ => Err(format!(
                "unknown family '{s}' (expected prime or poly1..poly4)"
            )),
        }
    }
}

impl TryFrom<String> for FamilySpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<FamilySpec> for String {
    fn from(f: FamilySpec) -> String {
        f.to_string()
    }
}

/// Parameters shared by every scan. Read from a flat TOML file; keys not
/// given take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    pub p_exponent: f64,
    pub q_exponent: f64,
    pub n_grid: Vec<u64>,
    pub epsilon: f64,
    /// Highest level of the approximating multiplier; derived from the tail
    /// tolerance when absent.
    pub s_max: Option<u32>,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub output_path: Option<String>,
    /// Largest modulus in the Ramanujan-sum check.
    pub limit: u64,
    /// Largest height in the quadratic complete-sum scan.
    pub hua_limit: u64,
    pub cm_samples: usize,
    /// Sup-error grid points per axis, as a multiple of `N`.
    pub density: usize,
    pub ensemble: usize,
    pub windows: Vec<usize>,
    /// Largest `N` of the time grid in the variation scan.
    pub variation_n_max: u64,
    pub r_exponent: f64,
    pub freq_counts: Vec<usize>,
    pub path_length: usize,
    pub trials: usize,
}

pub fn default_tolerances() -> BTreeMap<String, f64> {
    [
        ("ramanujan", 1e-9),
        ("cm_closed_form", 1e-8),
        ("gauss_sum", 1e-9),
        ("tail", 1e-4),
        ("window_growth", 0.10),
        ("exponent_slack", 0.1),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            family: FamilySpec::Prime,
            p_exponent: 2.0,
            q_exponent: 3.0,
            n_grid: vec![1 << 10, 1 << 12, 1 << 14, 1 << 16],
            epsilon: 0.7,
            s_max: None,
            seed: 20_240_601,
            tolerances: default_tolerances(),
            output_path: None,
            limit: 500,
            hua_limit: 200,
            cm_samples: 1000,
            density: 4,
            ensemble: 50,
            windows: vec![64, 128, 256],
            variation_n_max: 1 << 14,
            r_exponent: 2.5,
            freq_counts: vec![2, 4, 8, 16, 32],
            path_length: 8,
            trials: 200,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let mut cfg: Self =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        // a partial tolerance table keeps the remaining defaults
        for (k, v) in default_tolerances() {
            cfg.tolerances.entry(k).or_insert(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn tol(&self, key: &str) -> f64 {
        self.tolerances
            .get(key)
            .copied()
            .or_else(|| default_tolerances().get(key).copied())
            .unwrap_or(f64::NAN)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !(self.p_exponent > 1.0) || !self.p_exponent.is_finite() {
            return bad(format!("p_exponent must exceed 1, got {}", self.p_exponent));
        }
        if !(self.q_exponent > 2.0) || !self.q_exponent.is_finite() {
            return bad(format!("q_exponent must exceed 2, got {}", self.q_exponent));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return bad(format!("epsilon must lie in (0, 1], got {}", self.epsilon));
        }
        if self.n_grid.contains(&0) {
            return bad("n_grid entries must be positive".into());
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_grid must be strictly increasing".into());
        }
        if self.density < 2 {
            return bad(format!("density must be at least 2, got {}", self.density));
        }
        if self.windows.contains(&0) {
            return bad("window widths must be positive".into());
        }
        if !(self.r_exponent > 2.0 && self.r_exponent < self.q_exponent) {
            return bad(format!(
                "r_exponent must lie in (2, q_exponent), got {}",
                self.r_exponent
            ));
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0)) {
            return bad(format!("tolerance {k} must be positive, got {v}"));
        }
        Ok(())
    }

    /// Warnings about parameters outside the range where the variation
    /// bounds are known to hold. Recorded, never enforced.
    pub fn range_notes(&self) -> Vec<String> {
        let mut notes = Vec::new();
        if let FamilySpec::Poly(d) = self.family {
            let gap = (1.0 / self.p_exponent - 0.5).abs();
            let allowed = 1.0 / (2.0 * (d as f64 + 1.0));
            if gap >= allowed {
                notes.push(format!(
                    "p = {} lies outside the range |1/p - 1/2| < {allowed:.4} covered for degree {d}",
                    self.p_exponent
                ));
            }
        }
        notes
    }
}
