//! Query sets travel as JSON Lines: one query object per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::Query;

#[derive(Debug, Error)]
pub enum QueryFileError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {detail}")]
    Parse {
        path: PathBuf,
        line: usize,
        detail: String,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> QueryFileError {
    QueryFileError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Read a query set; blank lines are ignored.
pub fn read_queries(path: &Path) -> Result<Vec<Query>, QueryFileError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut queries = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let query: Query = serde_json::from_str(&line).map_err(|e| QueryFileError::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            detail: e.to_string(),
        })?;
        queries.push(query);
    }
    Ok(queries)
}

/// Write a query set, one JSON object per line, trailing newline included.
pub fn write_queries(path: &Path, queries: &[Query]) -> Result<(), QueryFileError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut writer = BufWriter::new(file);
    for query in queries {
        let line = serde_json::to_string(query).expect("query serialization is infallible");
        writeln!(writer, "{line}").map_err(|e| io_err(path, e))?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}
