//! File formats: OFF meshes, whitespace point tables, CSV/PGM matrix export
//! and the `ECTKIT v1` archive.

mod archive;
mod export;
mod off;
mod points;

use std::io::Write;
use std::path::Path;

pub use archive::{read_archive, write_archive, Archive, ArchiveBody, Provenance, ARCHIVE_HEADER};
pub use export::{read_matrix_csv, write_matrix_csv, write_matrix_pgm, CsvMatrix, PgmScaling};
pub use off::{read_off_mesh, write_off_mesh, OffMesh};
pub use points::{read_point_cloud_text, write_point_cloud_text};

use crate::error::{EctError, Result};

/// Writes `contents` to a temporary file next to `path`, then renames it into
/// place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| EctError::io(path, e))?;
    tmp.write_all(contents).map_err(|e| EctError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| EctError::io(path, e))?;
    tmp.persist(path).map_err(|e| EctError::io(path, e.error))?;
    Ok(())
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| EctError::io(path, e))
}
