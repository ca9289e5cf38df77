//! CSV tables with a `#`-prefixed metadata header, plus a JSON sidecar.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Twelve significant digits in scientific notation.
pub fn format_number(v: f64) -> String {
    format!("{v:.11e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    /// Written as `# block <label>` before the rows.
    pub label: String,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub blocks: Vec<Block>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            metadata: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            blocks: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn row_count(&self) -> usize {
        self.blocks.iter().map(|b| b.rows.len()).sum()
    }

    pub fn render(&self) -> Result<String> {
        if self.row_count() == 0 {
            return Err(Error::Config("refusing to export an empty table".into()));
        }
        let mut out = String::new();
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}").expect("writing to a String");
        }
        writeln!(out, "# columns: {}", self.columns.join(",")).expect("writing to a String");
        writeln!(out, "{}", self.columns.join(",")).expect("writing to a String");
        for block in &self.blocks {
            writeln!(out, "# block {}", block.label).expect("writing to a String");
            for row in &block.rows {
                if row.len() != self.columns.len() {
                    return Err(Error::numerical(format!(
                        "row of {} cells under {} columns",
                        row.len(),
                        self.columns.len()
                    )));
                }
                let cells: Vec<String> = row.iter().map(Cell::render).collect();
                writeln!(out, "{}", cells.join(",")).expect("writing to a String");
            }
        }
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.render()?.as_bytes())
    }
}

/// Path of the JSON sidecar next to a CSV file.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    std::io::Write::write_all(&mut tmp, bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Parsed contents of an exported table.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTable {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    /// `(block label, rows of raw cells)`
    pub blocks: Vec<(String, Vec<Vec<String>>)>,
}

impl ParsedTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn rows(&self) -> impl Iterator<Item = &Vec<String>> {
        self.blocks.iter().flat_map(|(_, r)| r)
    }
}

pub fn parse_table(text: &str) -> Result<ParsedTable> {
    let mut metadata = Vec::new();
    let mut columns = None;
    let mut blocks: Vec<(String, Vec<Vec<String>>)> = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# block ") {
            blocks.push((rest.to_string(), Vec::new()));
        } else if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once(": ") {
                metadata.push((k.to_string(), v.to_string()));
            }
        } else if columns.is_none() {
            columns = Some(line.split(',').map(str::to_string).collect::<Vec<_>>());
        } else {
            let row = line.split(',').map(str::to_string).collect();
            match blocks.last_mut() {
                Some(b) => b.1.push(row),
                None => return Err(Error::Config("row before any block header".into())),
            }
        }
    }
    Ok(ParsedTable {
        metadata,
        columns: columns.ok_or_else(|| Error::Config("table has no column header".into()))?,
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::round_sig;

    #[test]
    fn round_trip_at_twelve_digits() {
        let mut t = Table::new(&["lambda", "value", "flag"]);
        t.meta("config_digest", "abc");
        let vals = [0.0, 1.0 / 3.0, -2.5e-17, 12.0, 6.02214076e23, std::f64::consts::PI];
        t.blocks.push(Block {
            label: "N=8".into(),
            rows: vals
                .iter()
                .map(|&v| vec![Cell::Num(v), Cell::Num(v * 2.0), Cell::Bool(v > 1.0)])
                .collect(),
        });
        let text = t.render().unwrap();
        let parsed = parse_table(&text).unwrap();
        assert_eq!(parsed.meta("config_digest"), Some("abc"));
        assert_eq!(parsed.columns, vec!["lambda", "value", "flag"]);
        assert_eq!(parsed.blocks[0].0, "N=8");
        for (row, &v) in parsed.rows().zip(&vals) {
            let x: f64 = row[0].parse().unwrap();
            assert_eq!(x, round_sig(v, 12));
            assert_eq!(format_number(x), row[0]);
        }
    }

    #[test]
    fn empty_tables_are_refused() {
        let t = Table::new(&["a"]);
        assert!(matches!(t.render(), Err(Error::Config(_))));
    }

    #[test]
    fn write_reports_path_on_failure() {
        let t = {
            let mut t = Table::new(&["a"]);
            t.blocks.push(Block {
                label: "x".into(),
                rows: vec![vec![Cell::Int(1)]],
            });
            t
        };
        let err = t.write(Path::new("/nonexistent-dir/xy/out.csv")).unwrap_err();
        assert!(err.to_string().contains("nonexistent-dir"));
    }
}
