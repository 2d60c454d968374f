//! Plain-text output helpers shared by reports and the CLI.

use std::path::Path;

use crate::linalg::RMatrix;
use crate::{Error, Result};

/// Twelve significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

/// Labeled matrix as CSV: first column holds `row_labels`, header holds
/// `corner` followed by `col_labels`.
pub fn write_matrix_csv(
    path: impl AsRef<Path>,
    corner: &str,
    row_labels: &[String],
    col_labels: &[String],
    m: &RMatrix,
) -> Result<()> {
    let mut w = csv_writer(path)?;
    let mut head = vec![corner.to_string()];
    head.extend(col_labels.iter().cloned());
    w.write_record(&head)?;
    for (i, label) in row_labels.iter().enumerate() {
        let mut row = vec![label.clone()];
        row.extend(m.row(i).iter().map(|v| fmt_num(*v)));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn csv_writer(path: impl AsRef<Path>) -> Result<csv::Writer<std::fs::File>> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
