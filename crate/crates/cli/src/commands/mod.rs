pub mod eval;
pub mod figures;
pub mod filter;
pub mod gen;
pub mod index;
pub mod ingest;
pub mod scaling;
pub mod search;

use anyhow::Result;
use serde::Serialize;
use std::path::Path;

/// Pretty-print a JSON report to stdout and, when a path is given, to disk.
pub fn emit_report<T: Serialize>(report: &T, path: Option<&Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    println!("{json}");
    if let Some(path) = path {
        std::fs::write(path, format!("{json}\n"))
            .map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display()))?;
    }
    Ok(())
}
