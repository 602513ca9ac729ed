use std::io::Write;

use clap::ValueEnum;
use periodiag_core::series::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Pretty,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self, format: Format) -> String {
        match (self, format) {
            (Cell::Int(v), _) => v.to_string(),
            (Cell::Num(v), Format::Csv) => fmt_f64(*v),
            (Cell::Num(v), Format::Pretty) => format!("{v:.6}"),
            (Cell::Text(t), _) => t.clone(),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// A table followed by `key: value` summary lines. In CSV form the summary lines
/// are `#` comments, so the output still loads as a table.
#[derive(Debug, Default)]
pub struct Report {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
}

impl Report {
    pub fn new(header: &[&'static str]) -> Self {
        Report { header: header.to_vec(), ..Default::default() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        self.rows.push(cells);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<Cell>) {
        self.summary.push((key.into(), value.into()));
    }

    pub fn write(&self, out: &mut dyn Write, format: Format) -> std::io::Result<()> {
        let rendered: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(|c| c.render(format)).collect()).collect();
        if !self.header.is_empty() {
            match format {
                Format::Csv => {
                    writeln!(out, "{}", self.header.join(","))?;
                    for row in &rendered {
                        writeln!(out, "{}", row.join(","))?;
                    }
                }
                Format::Pretty => {
                    let widths: Vec<usize> = (0..self.header.len())
                        .map(|j| rendered.iter().map(|r| r[j].len()).chain([self.header[j].len()]).max().unwrap_or(0))
                        .collect();
                    let line = |cells: Vec<&str>| {
                        cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ")
                    };
                    writeln!(out, "{}", line(self.header.clone()))?;
                    for row in &rendered {
                        writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
                    }
                }
            }
        }
        if !self.summary.is_empty() && format == Format::Pretty && !self.header.is_empty() {
            writeln!(out)?;
        }
        for (key, value) in &self.summary {
            let value = value.render(format);
            match format {
                Format::Csv => writeln!(out, "# {key}: {value}")?,
                Format::Pretty => writeln!(out, "{key}: {value}")?,
            }
        }
        Ok(())
    }
}
