//! Earthquake catalog CSV ingestion.
//!
//! Input: header row with at least `time` and `magnitude` columns (extra
//! columns such as `lat`, `lon` are ignored). Timestamps are UTC.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hawkes::EventCatalog;

const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;
const TIE_STEP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatalogOptions {
    /// Inclusive threshold.
    pub min_magnitude: f64,
    /// Window `[start, end)`.
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl Default for CatalogOptions {
    fn default() -> Self {
        Self {
            min_magnitude: 5.0,
            start: utc(2008, 1, 1),
            end: utc(2024, 1, 1),
        }
    }
}

fn utc(y: i32, m: u32, d: u32) -> DateTime<Utc> {
    NaiveDate::from_ymd_opt(y, m, d)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid calendar date")
        .and_utc()
}

impl CatalogOptions {
    pub fn horizon_years(&self) -> f64 {
        years_between(self.start, self.end)
    }

    pub fn validate(&self) -> Result<()> {
        if self.end <= self.start {
            return Err(Error::Config(format!("catalog window end {} is not after start {}", self.end, self.start)));
        }
        if !self.min_magnitude.is_finite() {
            return Err(Error::invalid("min_magnitude", "must be finite"));
        }
        Ok(())
    }
}

fn years_between(a: DateTime<Utc>, b: DateTime<Utc>) -> f64 {
    let d = b - a;
    let secs = d.num_seconds() as f64 + d.subsec_nanos() as f64 * 1e-9;
    secs / SECONDS_PER_YEAR
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct IngestReport {
    pub rows: usize,
    pub kept: usize,
    pub below_threshold: usize,
    pub outside_window: usize,
    /// Events shifted forward to break timestamp ties.
    pub perturbed: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct LoadedCatalog {
    pub catalog: EventCatalog,
    pub report: IngestReport,
}

/// Accepts RFC 3339, `YYYY-MM-DD[ T]HH:MM:SS[.f]` (read as UTC) and `YYYY-MM-DD`.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t.and_utc());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|t| t.and_utc())
}

pub fn load_catalog(path: impl AsRef<Path>, options: &CatalogOptions) -> Result<LoadedCatalog> {
    let file = std::fs::File::open(path.as_ref())?;
    read_catalog(file, options)
}

pub fn read_catalog<R: Read>(input: R, options: &CatalogOptions) -> Result<LoadedCatalog> {
    options.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(tcol), Some(mcol)) = (column("time"), column("magnitude")) else {
        return Err(Error::CatalogRow {
            line: 1,
            reason: format!("header must name `time` and `magnitude` columns, got {:?}", headers.iter().collect::<Vec<_>>()),
        });
    };

    let horizon = options.horizon_years();
    let mut report = IngestReport::default();
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // Header is line 1.
        let line = i + 2;
        let record = record?;
        report.rows += 1;
        let field = |c: usize| record.get(c).unwrap_or("");
        let ts = parse_timestamp(field(tcol)).ok_or_else(|| Error::CatalogRow {
            line,
            reason: format!("unparseable timestamp {:?}", field(tcol)),
        })?;
        let mag: f64 = field(mcol)
            .parse()
            .ok()
            .filter(|m: &f64| m.is_finite())
            .ok_or_else(|| Error::CatalogRow {
                line,
                reason: format!("magnitude {:?} is not a finite number", field(mcol)),
            })?;
        if ts < options.start || ts >= options.end {
            report.outside_window += 1;
            continue;
        }
        if mag < options.min_magnitude {
            report.below_threshold += 1;
            continue;
        }
        rows.push((years_between(options.start, ts), mag));
    }

    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    for i in 1..rows.len() {
        if rows[i].0 <= rows[i - 1].0 {
            rows[i].0 = rows[i - 1].0 + TIE_STEP;
            report.perturbed += 1;
        }
    }
    if let Some(last) = rows.last() {
        if last.0 > horizon {
            return Err(Error::InvalidCatalog(format!(
                "tie-breaking pushed an event past the window end ({} > {horizon})",
                last.0
            )));
        }
    }
    report.kept = rows.len();
    if rows.is_empty() {
        report.warnings.push(format!(
            "no events at or above magnitude {} in the window",
            options.min_magnitude
        ));
    }
    if report.perturbed > 0 {
        report.warnings.push(format!("{} tied timestamps shifted by {TIE_STEP} years", report.perturbed));
    }
    let (times, mags): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
    let catalog = EventCatalog::new(times, horizon, Some(mags))?;
    Ok(LoadedCatalog { catalog, report })
}

/// Keeps events with magnitude `>= min_magnitude`; catalogs without
/// magnitudes are returned unchanged.
pub fn filter_magnitude(catalog: &EventCatalog, min_magnitude: f64) -> Result<EventCatalog> {
    let Some(mags) = catalog.magnitudes() else {
        return Ok(catalog.clone());
    };
    let (t, m): (Vec<f64>, Vec<f64>) = catalog
        .times()
        .iter()
        .zip(mags)
        .filter(|(_, &m)| m >= min_magnitude)
        .map(|(&t, &m)| (t, m))
        .unzip();
    EventCatalog::new(t, catalog.horizon(), Some(m))
}

/// Normalized form: `t_years[,magnitude]`, round-trip precision.
pub fn write_normalized<W: Write>(catalog: &EventCatalog, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match catalog.magnitudes() {
        Some(m) => {
            w.write_record(["t_years", "magnitude"])?;
            for (t, m) in catalog.times().iter().zip(m) {
                w.write_record([format!("{t:?}"), format!("{m:?}")])?;
            }
        }
        None => {
            w.write_record(["t_years"])?;
            for t in catalog.times() {
                w.write_record([format!("{t:?}")])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads the normalized form back; the horizon is not stored in the file.
pub fn read_normalized<R: Read>(input: R, horizon: f64) -> Result<EventCatalog> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let tcol = headers
        .iter()
        .position(|h| h == "t_years")
        .ok_or_else(|| Error::CatalogRow {
            line: 1,
            reason: "missing `t_years` column".into(),
        })?;
    let mcol = headers.iter().position(|h| h == "magnitude");
    let mut times = Vec::new();
    let mut mags = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let num = |c: usize| -> Result<f64> {
            record.get(c).and_then(|s| s.parse().ok()).ok_or_else(|| Error::CatalogRow {
                line: i + 2,
                reason: format!("column {c} is not a number"),
            })
        };
        times.push(num(tcol)?);
        if let Some(c) = mcol {
            mags.push(num(c)?);
        }
    }
    EventCatalog::new(times, horizon, mcol.map(|_| mags))
}

/// True when the first line of the file names a `t_years` column.
pub fn is_normalized(path: impl AsRef<Path>) -> Result<bool> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    Ok(reader.headers()?.iter().any(|h| h == "t_years"))
}
