//! CSV ingestion and writing.
//!
//! The default schema follows the public KPI-competition layout:
//! `timestamp,value,label,KPI ID` with a required header row. Column names
//! are configurable; the label and KPI columns are optional.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::series::{Series, TimePoint};
use crate::error::{Error, Result};

/// Maps schema roles to CSV column names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMapping {
    pub timestamp: String,
    pub value: String,
    pub label: String,
    pub kpi_id: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            timestamp: "timestamp".into(),
            value: "value".into(),
            label: "label".into(),
            kpi_id: "KPI ID".into(),
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Load all series from a CSV file, one per distinct KPI id.
///
/// Rows may arrive in any order; points are sorted by timestamp and the
/// sampling interval is inferred as the modal gap. Duplicate timestamps
/// within one KPI and non-finite values are rejected with the offending
/// row number.
pub fn load_csv(path: impl AsRef<Path>, mapping: &ColumnMapping) -> Result<Vec<Series>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => io_err(path, io),
            other => Error::MalformedRow {
                row: 0,
                reason: format!("{other:?}"),
            },
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::MalformedRow {
            row: 1,
            reason: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let ts_col = col(&mapping.timestamp).ok_or_else(|| {
        Error::InvalidParameter(format!("missing required column '{}'", mapping.timestamp))
    })?;
    let val_col = col(&mapping.value).ok_or_else(|| {
        Error::InvalidParameter(format!("missing required column '{}'", mapping.value))
    })?;
    let label_col = col(&mapping.label);
    let kpi_col = col(&mapping.kpi_id);

    let mut groups: BTreeMap<String, Vec<(usize, TimePoint)>> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let record = record.map_err(|e| Error::MalformedRow {
            row: line,
            reason: e.to_string(),
        })?;
        let field = |idx: usize| record.get(idx).unwrap_or("");

        let timestamp: i64 = field(ts_col).parse().map_err(|_| Error::MalformedRow {
            row: line,
            reason: format!("unparseable timestamp '{}'", field(ts_col)),
        })?;
        let value: f64 = field(val_col).parse().map_err(|_| Error::MalformedRow {
            row: line,
            reason: format!("unparseable value '{}'", field(val_col)),
        })?;
        if !value.is_finite() {
            return Err(Error::MalformedRow {
                row: line,
                reason: format!("non-finite value '{}'", field(val_col)),
            });
        }
        let label = match label_col.map(field) {
            None | Some("") => None,
            Some("0") | Some("false") => Some(false),
            Some("1") | Some("true") => Some(true),
            Some(other) => {
                return Err(Error::MalformedRow {
                    row: line,
                    reason: format!("unparseable label '{other}'"),
                })
            }
        };
        let id = match kpi_col.map(field) {
            Some(s) if !s.is_empty() => s.to_string(),
            _ => "series".to_string(),
        };
        groups.entry(id).or_default().push((
            line,
            TimePoint {
                timestamp,
                value,
                label,
            },
        ));
    }

    let mut out = Vec::new();
    for (id, mut rows) in groups {
        rows.sort_by_key(|(_, p)| p.timestamp);
        for pair in rows.windows(2) {
            if pair[0].1.timestamp == pair[1].1.timestamp {
                return Err(Error::DuplicateTimestamp {
                    id,
                    timestamp: pair[0].1.timestamp,
                });
            }
        }
        let points: Vec<TimePoint> = rows.into_iter().map(|(_, p)| p).collect();
        let interval = infer_interval(&points);
        out.push(Series::new(id, points, interval)?);
    }
    if out.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(out)
}

/// Modal gap between consecutive timestamps; 1 for single-point series.
fn infer_interval(points: &[TimePoint]) -> i64 {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for pair in points.windows(2) {
        *counts
            .entry(pair[1].timestamp - pair[0].timestamp)
            .or_insert(0) += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|(gap, _)| gap)
        .unwrap_or(1)
}

/// Write series to CSV using the given schema (always emits all four columns).
pub fn write_csv(path: impl AsRef<Path>, series: &[Series], mapping: &ColumnMapping) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => io_err(path, io),
        other => Error::InvalidParameter(format!("{other:?}")),
    })?;
    writer
        .write_record([
            mapping.timestamp.as_str(),
            mapping.value.as_str(),
            mapping.label.as_str(),
            mapping.kpi_id.as_str(),
        ])
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    for s in series {
        for p in &s.points {
            let label = match p.label {
                None => String::new(),
                Some(false) => "0".into(),
                Some(true) => "1".into(),
            };
            writer
                .write_record([
                    p.timestamp.to_string(),
                    format!("{}", p.value),
                    label,
                    s.id.clone(),
                ])
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        }
    }
    writer.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}
