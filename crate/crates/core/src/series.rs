//! Seasonal series data model, transforms and CSV ingestion.
//!
//! A [`SeasonalSeries`] holds `N` complete years of `s` periods each. Values are
//! stored in linear-time order, `t = s(r - 1) + m`, with `r` and `m` 1-based.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transform applied to the raw observations before analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", content = "c", rename_all = "snake_case")]
pub enum Transform {
    #[default]
    None,
    Log,
    LogPlusC(f64),
}

/// Position in linear time together with its (year, period) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinearTime {
    pub t: usize,
    pub year: usize,
    pub period: usize,
}

impl LinearTime {
    pub fn from_year_period(year: usize, period: usize, s: usize) -> Self {
        assert!(year >= 1 && (1..=s).contains(&period), "year/period out of range");
        LinearTime { t: s * (year - 1) + period, year, period }
    }

    pub fn from_t(t: usize, s: usize) -> Self {
        assert!(t >= 1, "linear time starts at 1");
        let year = (t - 1) / s + 1;
        LinearTime { t, year, period: t - s * (year - 1) }
    }
}

/// Period (1-based) of a possibly non-positive linear time index.
pub fn period_of(t: i64, s: usize) -> usize {
    let s = s as i64;
    ((t - 1).rem_euclid(s) + 1) as usize
}

/// Complete-year seasonal time series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonalSeries {
    values: Vec<f64>,
    s: usize,
    n_years: usize,
    pub label: String,
    pub transform: Transform,
}

impl SeasonalSeries {
    /// Builds a series from observations in time order.
    pub fn from_flat(values: &[f64], s: usize) -> Result<Self> {
        if s < 2 {
            return Err(Error::InvalidArgument(format!("periods per year must be >= 2, got {s}")));
        }
        if values.is_empty() || values.len() % s != 0 {
            return Err(Error::IncompleteYear(format!(
                "{} observations is not a positive multiple of s = {s}",
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::BadValue { index });
        }
        let n_years = values.len() / s;
        if n_years < 2 {
            return Err(Error::TooShort(format!("need at least 2 complete years, got {n_years}")));
        }
        Ok(SeasonalSeries {
            values: values.to_vec(),
            s,
            n_years,
            label: String::new(),
            transform: Transform::None,
        })
    }

    /// Builds a series from rows of `s` values, one row per year.
    pub fn from_years(rows: &[Vec<f64>]) -> Result<Self> {
        let s = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|row| row.len() != s) {
            return Err(Error::IncompleteYear(format!("year {} has {} values, expected {s}", r + 1, rows[r].len())));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_flat(&flat, s)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n_years(&self) -> usize {
        self.n_years
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Observations in linear-time order.
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Value at 1-based `(year, period)`.
    pub fn get(&self, year: usize, period: usize) -> f64 {
        self.values[LinearTime::from_year_period(year, period, self.s).t - 1]
    }

    /// Value at 1-based linear time `t`, or `None` outside the sample.
    pub fn at(&self, t: i64) -> Option<f64> {
        if t >= 1 && (t as usize) <= self.values.len() {
            Some(self.values[t as usize - 1])
        } else {
            None
        }
    }

    /// Observations of one period across all years.
    pub fn period_values(&self, period: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(period - 1).step_by(self.s).copied()
    }

    /// Rows of `s` values, one per year.
    pub fn years(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.s)
    }

    /// The first `n_years` years.
    pub fn truncate_years(&self, n_years: usize) -> Result<Self> {
        if n_years > self.n_years {
            return Err(Error::InvalidArgument(format!(
                "cannot keep {n_years} years of a {}-year series",
                self.n_years
            )));
        }
        let mut out = Self::from_flat(&self.values[..n_years * self.s], self.s)?;
        out.label.clone_from(&self.label);
        out.transform = self.transform;
        Ok(out)
    }

    /// Element-wise natural logarithm.
    pub fn log_transform(&self) -> Result<Self> {
        self.log_shifted(0.0, Transform::Log)
    }

    /// Element-wise `ln(z + c)`, for series containing zeros.
    pub fn log_plus_c(&self, c: f64) -> Result<Self> {
        self.log_shifted(c, Transform::LogPlusC(c))
    }

    fn log_shifted(&self, c: f64, transform: Transform) -> Result<Self> {
        if self.transform != Transform::None {
            return Err(Error::InvalidArgument("series is already transformed".into()));
        }
        let mut values = Vec::with_capacity(self.values.len());
        for (i, &v) in self.values.iter().enumerate() {
            let shifted = v + c;
            if shifted <= 0.0 {
                let pos = LinearTime::from_t(i + 1, self.s);
                return Err(Error::NonPositive { year: pos.year, period: pos.period });
            }
            values.push(shifted.ln());
        }
        Ok(SeasonalSeries { values, transform, ..self.clone() })
    }
}

/// File layout for [`read_csv`] and [`write_csv`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// One observation per row, in time order.
    FlatColumn,
    /// A year label followed by `s` values per row.
    YearByPeriod,
}

/// Formats a number with 17 significant digits so that it parses back exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Reads a series from a CSV file. A single non-numeric header row is skipped.
pub fn read_csv(path: impl AsRef<Path>, layout: Layout, s: usize) -> Result<SeasonalSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let label = path.file_stem().map(|p| p.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(read_csv_from(file, layout, s)?.with_label(label))
}

/// [`read_csv`] over any reader.
pub fn read_csv_from<R: std::io::Read>(reader: R, layout: Layout, s: usize) -> Result<SeasonalSeries> {
    SeasonalSeries::from_flat(&read_values_from(reader, layout, s)?, s)
}

/// Reads a single column of numbers of any length, such as a residual sequence.
pub fn read_values(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let values = read_values_from(file, Layout::FlatColumn, 1)?;
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::BadValue { index });
    }
    Ok(values)
}

fn read_values_from<R: std::io::Read>(reader: R, layout: Layout, s: usize) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let mut values = Vec::new();
    let mut first = true;
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let fields: Vec<&str> = record.iter().filter(|f| !f.is_empty()).collect();
        if fields.is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        let parsed = match parsed {
            Ok(p) => p,
            Err(_) if first => {
                first = false;
                continue;
            }
            Err(e) => return Err(Error::Parse { line, message: e.to_string() }),
        };
        first = false;
        match layout {
            Layout::FlatColumn => {
                if parsed.len() != 1 {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected one value per row, found {}", parsed.len()),
                    });
                }
                values.push(parsed[0]);
            }
            Layout::YearByPeriod => {
                if parsed.len() != s + 1 {
                    return Err(Error::IncompleteYear(format!(
                        "line {line} has {} values after the year label, expected {s}",
                        parsed.len().saturating_sub(1)
                    )));
                }
                values.extend_from_slice(&parsed[1..]);
            }
        }
    }
    Ok(values)
}

/// Writes a series as CSV with 17 significant digits.
pub fn write_csv(series: &SeasonalSeries, path: impl AsRef<Path>, layout: Layout) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match layout {
        Layout::FlatColumn => {
            for &v in series.as_slice() {
                writeln!(out, "{}", fmt_f64(v))?;
            }
        }
        Layout::YearByPeriod => {
            for (r, row) in series.years().enumerate() {
                let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
                writeln!(out, "{},{}", r + 1, cells.join(","))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_flat_indexes_by_linear_time() {
        let z = SeasonalSeries::from_flat(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(z.n_years(), 2);
        assert_eq!(z.get(2, 1), 3.0);
        assert_eq!(z.get(1, 2), 2.0);
    }

    #[test]
    fn from_flat_rejects_partial_year() {
        assert!(matches!(SeasonalSeries::from_flat(&[1.0, 2.0, 3.0], 2), Err(Error::IncompleteYear(_))));
    }

    #[test]
    fn from_flat_rejects_non_finite() {
        let err = SeasonalSeries::from_flat(&[1.0, f64::NAN, 3.0, 4.0], 2).unwrap_err();
        assert_eq!(err, Error::BadValue { index: 1 });
    }

    #[test]
    fn from_flat_requires_two_years_and_two_periods() {
        assert!(SeasonalSeries::from_flat(&[1.0, 2.0], 2).is_err());
        assert!(SeasonalSeries::from_flat(&[1.0, 2.0, 3.0], 1).is_err());
    }

    #[test]
    fn linear_time_bijection() {
        for t in 1..=60 {
            let pos = LinearTime::from_t(t, 12);
            assert_eq!(LinearTime::from_year_period(pos.year, pos.period, 12).t, t);
        }
        assert_eq!(period_of(0, 12), 12);
        assert_eq!(period_of(-1, 12), 11);
        assert_eq!(period_of(13, 12), 1);
    }

    #[test]
    fn log_of_ones_is_zero() {
        let z = SeasonalSeries::from_flat(&[1.0; 24], 12).unwrap().log_transform().unwrap();
        assert!(z.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!(z.transform, Transform::Log);
    }

    #[test]
    fn log_of_e_is_one() {
        let mut v = vec![2.0; 4];
        v[0] = std::f64::consts::E;
        let z = SeasonalSeries::from_flat(&v, 2).unwrap().log_transform().unwrap();
        assert!((z.get(1, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_names_offending_cell() {
        let mut v = vec![1.0; 24];
        v[2] = 0.0;
        let err = SeasonalSeries::from_flat(&v, 12).unwrap().log_transform().unwrap_err();
        assert_eq!(err, Error::NonPositive { year: 1, period: 3 });
    }

    #[test]
    fn log_plus_c_handles_zero_flows() {
        let z = SeasonalSeries::from_flat(&[0.0, 1.0, 2.0, 3.0], 2).unwrap().log_plus_c(1.0).unwrap();
        assert_eq!(z.get(1, 1), 0.0);
        assert_eq!(z.transform, Transform::LogPlusC(1.0));
    }

    #[test]
    fn csv_flat_matches_from_flat() {
        let z = read_csv_from("1\n2\n3\n4\n".as_bytes(), Layout::FlatColumn, 2).unwrap();
        assert_eq!(z, SeasonalSeries::from_flat(&[1.0, 2.0, 3.0, 4.0], 2).unwrap());
    }

    #[test]
    fn csv_header_is_skipped() {
        let mut text = String::from("flow\n");
        for i in 0..24 {
            text.push_str(&format!("{}\n", i as f64 * 0.5));
        }
        let z = read_csv_from(text.as_bytes(), Layout::FlatColumn, 12).unwrap();
        assert_eq!(z.n_years(), 2);
    }

    #[test]
    fn csv_ragged_year_row() {
        let row11: Vec<String> = (0..11).map(|i| i.to_string()).collect();
        let text = format!("1915,{}\n", row11.join(","));
        let err = read_csv_from(text.as_bytes(), Layout::YearByPeriod, 12).unwrap_err();
        assert!(matches!(err, Error::IncompleteYear(_)));
    }

    #[test]
    fn csv_reports_line_of_bad_number() {
        let err = read_csv_from("x\n1\n2\nabc\n".as_bytes(), Layout::FlatColumn, 2).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err:?}");
    }

    #[test]
    fn csv_year_by_period_layout() {
        let text = "year,a,b\n1990,1,2\n1991,3,4\n";
        let z = read_csv_from(text.as_bytes(), Layout::YearByPeriod, 2).unwrap();
        assert_eq!(z.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
    }
}
