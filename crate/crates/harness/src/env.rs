use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use qvar_core::arith::{build_tables, ArithTables};

use crate::error::Result;

pub const THREADS_VAR: &str = "QVAR_THREADS";
pub const CACHE_VAR: &str = "QVAR_CACHE_DIR";

/// Thread count requested through the environment, if any.
pub fn requested_threads() -> Option<usize> {
    std::env::var(THREADS_VAR)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

/// Sizes the global rayon pool from `QVAR_THREADS`. A pool that is already
/// running is left alone.
pub fn init_thread_pool() {
    if let Some(n) = requested_threads() {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_VAR)
        .map(PathBuf::from)
        .filter(|p| !p.as_os_str().is_empty())
}

/// Arithmetic tables up to `limit`, read from and written to
/// `QVAR_CACHE_DIR` when it is set. An unreadable cache file is rebuilt.
pub fn tables(limit: usize) -> Result<ArithTables> {
    let Some(dir) = cache_dir() else {
        return Ok(build_tables(limit)?);
    };
    let path = dir.join(format!("arith-{limit}.bin"));
    if let Ok(f) = File::open(&path) {
        if let Ok(t) = ArithTables::read_cache(BufReader::new(f)) {
            if t.limit() == limit {
                return Ok(t);
            }
        }
    }
    let t = build_tables(limit)?;
    std::fs::create_dir_all(&dir)?;
    // write to a temporary name first so concurrent readers never see a torn file
    let tmp = dir.join(format!("arith-{limit}.bin.{}", std::process::id()));
    let mut w = BufWriter::new(File::create(&tmp)?);
    t.write_cache(&mut w)?;
    w.flush()?;
    std::fs::rename(&tmp, &path)?;
    Ok(t)
}
