//! Shared helpers for the integration test targets: loading the golden
//! ingestion corpus and comparing against its frozen expected outputs.

use std::path::{Path, PathBuf};

use texrank_core::ingest::{ingest_project, IngestError, IngestOptions, IngestedDocument};
use texrank_core::latex::{FlattenOptions, LatexProject};

pub fn golden_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden")
}

/// Project directories of the golden corpus, sorted by name.
pub fn golden_project_dirs() -> Vec<PathBuf> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(golden_root())
        .expect("golden corpus directory exists")
        .map(|e| e.expect("readable dir entry").path())
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    dirs
}

/// Ingestion options used for the golden corpus: lenient about missing
/// include targets so the corpus can exercise that path.
pub fn lenient_options() -> IngestOptions {
    IngestOptions {
        flatten: FlattenOptions { lenient: true },
        ..IngestOptions::default()
    }
}

pub fn project_name(dir: &Path) -> String {
    dir.file_name().unwrap().to_string_lossy().into_owned()
}

pub fn ingest_golden(dir: &Path) -> Result<IngestedDocument, IngestError> {
    let project =
        LatexProject::from_dir(project_name(dir), dir).expect("golden project loads from disk");
    ingest_project(&project, &lenient_options())
}

fn compare_or_write(
    expected_dir: &Path,
    file: &str,
    actual: &str,
    regen: bool,
    mismatches: &mut Vec<String>,
) {
    let path = expected_dir.join(file);
    if regen {
        std::fs::create_dir_all(expected_dir).expect("create expected dir");
        std::fs::write(&path, actual).expect("write golden file");
        return;
    }
    match std::fs::read_to_string(&path) {
        Ok(expected) if expected == actual => {}
        Ok(_) => mismatches.push(format!("{file} differs from the frozen golden")),
        Err(_) => mismatches.push(format!("golden file {file} is missing")),
    }
}

/// Check one golden project against its frozen outputs. Returns mismatch
/// descriptions; empty means pass. With `regen` the outputs are rewritten
/// instead (used only when intentionally refreshing fixtures).
pub fn check_golden_project(dir: &Path, regen: bool) -> Vec<String> {
    let mut mismatches = Vec::new();
    let expected_dir = dir.join("expected");
    match ingest_golden(dir) {
        Ok(doc) => {
            if !regen && expected_dir.join("error.txt").exists() {
                mismatches.push("ingestion succeeded but an error was expected".into());
                return mismatches;
            }
            let structure = serde_json::to_string_pretty(&doc.structure)
                .expect("structure serializes")
                + "\n";
            let diagnostics = if doc.diagnostics.is_empty() {
                String::new()
            } else {
                doc.diagnostics.notes().join("\n") + "\n"
            };
            compare_or_write(&expected_dir, "flattened.txt", &doc.flat.text, regen, &mut mismatches);
            compare_or_write(&expected_dir, "normalized.txt", &doc.normalized, regen, &mut mismatches);
            compare_or_write(&expected_dir, "structure.json", &structure, regen, &mut mismatches);
            compare_or_write(&expected_dir, "diagnostics.txt", &diagnostics, regen, &mut mismatches);
        }
        Err(err) => {
            let rendered = format!("{err}\n");
            compare_or_write(&expected_dir, "error.txt", &rendered, regen, &mut mismatches);
            if !regen && expected_dir.join("flattened.txt").exists() {
                mismatches.push(format!("ingestion failed unexpectedly: {err}"));
            }
        }
    }
    mismatches
}
