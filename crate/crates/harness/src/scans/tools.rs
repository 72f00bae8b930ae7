use qvar_core::multiplier::{classify_batch_csv, dump_multiplier_grid, full_multiplier};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::record::{Cell, RunRecord};
use crate::scans::approx::resolve_s_max;

fn parse_cell(s: &str) -> Cell {
    if s.is_empty() {
        Cell::Missing
    } else if let Ok(i) = s.parse::<i64>() {
        Cell::Int(i)
    } else if let Ok(x) = s.parse::<f64>() {
        Cell::float(x)
    } else {
        Cell::Text(s.to_string())
    }
}

/// Loads a header-plus-rows CSV produced by the core crate into a record.
fn table_record(command: &str, config: &ExperimentConfig, csv: &str) -> RunRecord {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let mut rec = RunRecord::new(command, config, &header);
    for line in lines.filter(|l| !l.is_empty()) {
        rec.push_row(line.split(',').map(parse_cell).collect());
    }
    rec
}

/// Major/minor arc classification of every `α` row in `input`.
pub fn arc_classify(config: &ExperimentConfig, input: &str, n: u64) -> Result<RunRecord> {
    let d = config.family.dim();
    let out = classify_batch_csv(input, n, d)?;
    let mut rec = table_record("arc-classify", config, &out);
    rec.notes
        .push(format!("N = {n}, d = {d}, nu = 1/{}", d.max(12)));
    Ok(rec)
}

/// The full approximating multiplier at `N` sampled on a uniform grid of
/// `points` per axis.
pub fn dump_multiplier(config: &ExperimentConfig, n: u64, points: usize) -> Result<RunRecord> {
    let s_max = resolve_s_max(config)?;
    let m = full_multiplier(n, s_max, config.family.family(), Some(config.tol("tail")))
        .map_err(HarnessError::at(format!("N = {n}")))?;
    let csv = dump_multiplier_grid(&m, points)?;
    let mut rec = table_record("dump-multiplier", config, &csv);
    rec.notes.push(format!(
        "N = {n}, s_max = {s_max}, {points} points per axis"
    ));
    Ok(rec)
}
