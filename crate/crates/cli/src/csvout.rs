//! Deterministic CSV emission: fixed column orders, configurable
//! significant digits, no wall-clock content. Identical inputs produce
//! byte-identical files.

use std::io::Write;
use std::path::Path;

use crate::config::CliError;

#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Scientific notation with `precision` significant digits; the exact
/// shortest form is not needed, stability across runs is.
pub fn fmt_float(x: f64, precision: usize) -> String {
    format!("{:.*e}", precision.saturating_sub(1), x)
}

fn quote(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Write an RFC-4180-style CSV with a header row.
pub fn write_csv(table: &Table, path: &Path) -> Result<(), CliError> {
    if table.header.is_empty() {
        return Err(CliError::Usage("refusing to write an empty table".into()));
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(
        out,
        "{}",
        table
            .header
            .iter()
            .map(|h| quote(h))
            .collect::<Vec<_>>()
            .join(",")
    )?;
    for row in &table.rows {
        writeln!(
            out,
            "{}",
            row.iter().map(|f| quote(f)).collect::<Vec<_>>().join(",")
        )?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_uses_configured_digits() {
        assert_eq!(fmt_float(1.0 / 3.0, 17), "3.3333333333333331e-1");
        assert_eq!(fmt_float(1.0 / 3.0, 5), "3.3333e-1");
        assert_eq!(fmt_float(0.0, 3), "0.00e0");
    }

    #[test]
    fn quoting_handles_commas_and_quotes() {
        assert_eq!(quote("plain"), "plain");
        assert_eq!(quote("a,b"), "\"a,b\"");
        assert_eq!(quote("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}
