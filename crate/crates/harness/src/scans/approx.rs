use qvar_core::kernels::{poly_kernel, prime_kernel, DiscreteKernel};
use qvar_core::multiplier::{full_multiplier, sup_error_report, SmaxModel};

use crate::config::{ExperimentConfig, FamilySpec};
use crate::env;
use crate::error::{HarnessError, Result};
use crate::record::{Check, RunRecord};
use crate::stats::linear_fit;

/// One measured point of the approximation error.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxPoint {
    pub n: u64,
    pub sup_error: f64,
    pub grid_max: f64,
    pub grid_density: usize,
    pub s_max: u32,
    pub tail_bound: f64,
    pub argmax: Vec<f64>,
}

/// Level cutoff for the configured family: the explicit `s_max` if given,
/// otherwise the smallest one whose tail bound meets the tolerance.
pub fn resolve_s_max(config: &ExperimentConfig) -> Result<u32> {
    match config.s_max {
        Some(s) => Ok(s),
        None => Ok(
            SmaxModel::for_family(config.family.family())?.required_s_max(config.tol("tail"))?
        ),
    }
}

/// Sup error between the kernel transform and the full multiplier at one `N`.
pub fn approx_point(
    config: &ExperimentConfig,
    n: u64,
    kernel: &DiscreteKernel,
) -> Result<ApproxPoint> {
    let ctx = format!("N = {n}");
    let s_max = resolve_s_max(config)?;
    let l = full_multiplier(n, s_max, config.family.family(), Some(config.tol("tail")))
        .map_err(HarnessError::at(ctx.clone()))?;
    let density = config
        .density
        .checked_mul(n as usize)
        .ok_or_else(|| HarnessError::At {
            context: ctx.clone(),
            source: qvar_core::Error::ResourceLimit("grid density overflows".into()),
        })?;
    let rep = sup_error_report(kernel, &l, density).map_err(HarnessError::at(ctx))?;
    Ok(ApproxPoint {
        n,
        sup_error: rep.value,
        grid_max: rep.grid_max,
        grid_density: rep.density,
        s_max,
        tail_bound: l.meta().tail_bound.unwrap_or(0.0),
        argmax: rep.argmax,
    })
}

/// Scans `‖K̂_N − L̂_N‖_∞` over the configured `N` grid and fits the decay:
/// against `log N` for polynomial families and `log log N` for primes.
pub fn approx_error_scan(config: &ExperimentConfig) -> Result<RunRecord> {
    if config.n_grid.is_empty() {
        return Err(HarnessError::Config("n_grid must not be empty".into()));
    }
    let mut rec = RunRecord::new(
        "approx-scan",
        config,
        &[
            "N",
            "sup_error",
            "grid_max",
            "grid_density",
            "s_max",
            "tail_bound",
            "argmax",
        ],
    );
    let tables = match config.family {
        FamilySpec::Prime => Some(env::tables(*config.n_grid.last().unwrap() as usize)?),
        FamilySpec::Poly(_) => None,
    };
    let mut points = Vec::new();
    for &n in &config.n_grid {
        let kernel = match (&tables, config.family) {
            (Some(t), _) => prime_kernel(n as usize, t),
            (None, FamilySpec::Poly(d)) => poly_kernel(n as usize, d),
            (None, FamilySpec::Prime) => unreachable!("prime tables are always built"),
        }
        .map_err(HarnessError::at(format!("N = {n}")))?;
        let p = approx_point(config, n, &kernel)?;
        let arg: Vec<String> = p.argmax.iter().map(|a| format!("{a:.17e}")).collect();
        rec.push_row(vec![
            p.n.into(),
            p.sup_error.into(),
            p.grid_max.into(),
            p.grid_density.into(),
            (p.s_max as u64).into(),
            p.tail_bound.into(),
            arg.join(" ").into(),
        ]);
        points.push(p);
    }
    rec.notes.push(format!(
        "sup error estimated on a uniform grid of {}N points per axis with local refinement; not a certified maximum",
        config.density
    ));

    if points.len() < 2 {
        rec.notes.push("single N: no fit".into());
        return Ok(rec);
    }
    let first = points.first().unwrap().sup_error;
    let last = points.last().unwrap().sup_error;
    rec.fit("endpoint_ratio", last / first);
    let y: Vec<f64> = points.iter().map(|p| p.sup_error.ln()).collect();
    match config.family {
        FamilySpec::Prime => {
            let x: Vec<f64> = points.iter().map(|p| (p.n as f64).ln().ln()).collect();
            if let Some((slope, _)) = linear_fit(&x, &y) {
                rec.fit("slope_vs_loglog_n", slope);
            }
            rec.check(Check::new(
                "error_decreases",
                last < first,
                Some(last / first),
                format!(
                    "error at N = {} vs N = {}",
                    points.last().unwrap().n,
                    points[0].n
                ),
            ));
        }
        FamilySpec::Poly(_) => {
            let x: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
            let slope = linear_fit(&x, &y).map_or(f64::NAN, |f| f.0);
            rec.fit("slope_vs_log_n", slope);
            rec.fit("delta_fit", -slope);
            rec.check(Check::new(
                "power_decay",
                slope < 0.0,
                Some(-slope),
                "least-squares exponent of log error against log N",
            ));
        }
    }
    Ok(rec)
}
