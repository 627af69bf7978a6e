//! Typed columnar datasets loaded from delimited files.
//!
//! Every cell is parsed against a declared [`ColumnSchema`]; cells that
//! cannot be parsed are kept as explicit `unparseable` evidence instead of
//! aborting the load, and sentinel strings become explicit missing values.
//! A loaded [`Dataset`] is immutable and safe to share across threads.
//!
//! # Example
//!
//! ```
//! use readiness::dataset::{ColumnKind, ColumnRole, ColumnSchema, Dataset, LoadOptions};
//!
//! let dir = std::env::temp_dir().join("readiness-doc-dataset");
//! std::fs::create_dir_all(&dir).unwrap();
//! let path = dir.join("tiny.csv");
//! std::fs::write(&path, "temp,label\n1.5,a\nNA,b\nx,a\n").unwrap();
//!
//! let schema = vec![
//!     ColumnSchema::new("temp", ColumnKind::Continuous, ColumnRole::Feature),
//!     ColumnSchema::new("label", ColumnKind::Categorical, ColumnRole::Feature),
//! ];
//! let ds = Dataset::load_csv(&path, &schema, &LoadOptions::default()).unwrap();
//! assert_eq!(ds.n_rows(), 3);
//! assert!(ds.column("temp").unwrap().missing[1]); // "NA" sentinel
//! assert!(ds.column("temp").unwrap().missing[2]); // "x" unparseable
//! ```

use crate::error::{Error, Result};
use crate::finding::{Finding, Question, Severity};
use chrono::{DateTime, SecondsFormat};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Data type of a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Ordinal,
    Categorical,
    Text,
    Timestamp,
}

/// Role of a column in the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    Feature,
    Target,
    Time,
    Ignore,
}

/// Optional per-column constraints checked by [`validate_schema`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constraints {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed_categories: Option<Vec<String>>,
}

/// Declared name, kind, role, and constraints of one column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub role: ColumnRole,
    #[serde(default, skip_serializing_if = "is_default_constraints")]
    pub constraints: Constraints,
}

fn is_default_constraints(c: &Constraints) -> bool {
    *c == Constraints::default()
}

impl ColumnSchema {
    pub fn new(name: &str, kind: ColumnKind, role: ColumnRole) -> ColumnSchema {
        ColumnSchema {
            name: name.to_string(),
            kind,
            role,
            constraints: Constraints::default(),
        }
    }

    pub fn with_range(mut self, min: Option<f64>, max: Option<f64>) -> ColumnSchema {
        self.constraints.min = min;
        self.constraints.max = max;
        self
    }

    pub fn with_categories(mut self, categories: &[&str]) -> ColumnSchema {
        self.constraints.allowed_categories =
            Some(categories.iter().map(|s| s.to_string()).collect());
        self
    }
}

/// Parse provenance of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseFlag {
    Ok,
    MissingSentinel,
    Unparseable,
}

/// Detected wire format of a timestamp column, fixed by the first cell
/// that parses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimestampFormat {
    EpochSeconds,
    Rfc3339,
}

/// Parsed values of a column. Missing cells hold a placeholder; consult
/// the column's missing mask.
#[derive(Debug, Clone)]
pub enum ColumnData {
    Continuous(Vec<f64>),
    Ordinal(Vec<String>),
    Categorical(Vec<String>),
    Text(Vec<String>),
    /// Epoch seconds, UTC.
    Timestamp(Vec<i64>),
}

impl PartialEq for ColumnData {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ColumnData::Continuous(a), ColumnData::Continuous(b)) => {
                // NaN placeholders at missing cells compare equal
                a.len() == b.len()
                    && a.iter()
                        .zip(b.iter())
                        .all(|(x, y)| x == y || (x.is_nan() && y.is_nan()))
            }
            (ColumnData::Ordinal(a), ColumnData::Ordinal(b)) => a == b,
            (ColumnData::Categorical(a), ColumnData::Categorical(b)) => a == b,
            (ColumnData::Text(a), ColumnData::Text(b)) => a == b,
            (ColumnData::Timestamp(a), ColumnData::Timestamp(b)) => a == b,
            _ => false,
        }
    }
}

/// One loaded column: schema, parsed cells, missing mask, and per-cell
/// parse provenance. Unparseable raw text is retained so a dataset can be
/// written back out without losing evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub schema: ColumnSchema,
    pub data: ColumnData,
    pub missing: Vec<bool>,
    pub flags: Vec<ParseFlag>,
    raw_unparseable: BTreeMap<usize, String>,
    ts_format: Option<TimestampFormat>,
}

/// Loading options: delimiter and the sentinel strings treated as missing.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    /// Compared case-insensitively.
    pub missing_sentinels: Vec<String>,
}

impl Default for LoadOptions {
    fn default() -> LoadOptions {
        LoadOptions {
            delimiter: b',',
            missing_sentinels: ["", "NA", "NaN", "null"].iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl LoadOptions {
    fn is_sentinel(&self, raw: &str) -> bool {
        self.missing_sentinels
            .iter()
            .any(|s| s.eq_ignore_ascii_case(raw))
    }

    fn write_sentinel(&self) -> &str {
        self.missing_sentinels.first().map(String::as_str).unwrap_or("")
    }
}

/// Per-column summary statistics over non-missing cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub count: usize,
    pub missing_count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub stddev: Option<f64>,
    pub distinct_count: Option<usize>,
}

/// A numeric view of one column: parallel row indices and values for the
/// non-missing cells.
#[derive(Debug, Clone)]
pub struct NumericColumn {
    pub name: String,
    pub rows: Vec<usize>,
    pub values: Vec<f64>,
}

/// An immutable typed table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    n_rows: usize,
}

fn check_schema(schema: &[ColumnSchema]) -> Result<()> {
    let mut seen = BTreeSet::new();
    let mut time_cols = 0;
    for col in schema {
        if !seen.insert(col.name.clone()) {
            return Err(Error::DuplicateColumn(col.name.clone()));
        }
        if col.role == ColumnRole::Time {
            time_cols += 1;
            if col.kind != ColumnKind::Timestamp {
                return Err(Error::InvalidSchema(format!(
                    "time column {:?} must have kind timestamp",
                    col.name
                )));
            }
        }
        if col.kind == ColumnKind::Ordinal && col.constraints.allowed_categories.is_none() {
            return Err(Error::InvalidSchema(format!(
                "ordinal column {:?} must declare an ordered category list",
                col.name
            )));
        }
    }
    if time_cols > 1 {
        return Err(Error::InvalidSchema("at most one column may have role time".into()));
    }
    Ok(())
}

impl Dataset {
    /// Load a delimited file against a declared schema. The header must
    /// match the schema names as a set; cells that fail to parse become
    /// explicit unparseable-and-missing evidence rather than an error.
    pub fn load_csv(path: &Path, schema: &[ColumnSchema], options: &LoadOptions) -> Result<Dataset> {
        check_schema(schema)?;
        let file = std::fs::File::open(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(options.delimiter)
            .has_headers(true)
            .from_reader(file);

        let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
        let mut header_set = BTreeSet::new();
        for h in &headers {
            if !header_set.insert(h.clone()) {
                return Err(Error::DuplicateColumn(h.clone()));
            }
        }
        let schema_names: BTreeSet<String> = schema.iter().map(|c| c.name.clone()).collect();
        let missing: Vec<String> = schema_names.difference(&header_set).cloned().collect();
        let extra: Vec<String> = header_set.difference(&schema_names).cloned().collect();
        if !missing.is_empty() || !extra.is_empty() {
            return Err(Error::HeaderMismatch { missing, extra });
        }
        let file_index: Vec<usize> = schema
            .iter()
            .map(|c| headers.iter().position(|h| h == &c.name).unwrap())
            .collect();

        let mut raw_columns: Vec<Vec<String>> = vec![Vec::new(); schema.len()];
        for record in reader.records() {
            let record = record?;
            for (ci, fi) in file_index.iter().enumerate() {
                raw_columns[ci].push(record.get(*fi).unwrap_or("").to_string());
            }
        }
        let n_rows = raw_columns.first().map(|c| c.len()).unwrap_or(0);
        if n_rows == 0 {
            return Err(Error::EmptyDataset);
        }

        let columns = schema
            .iter()
            .zip(raw_columns)
            .map(|(cs, raw)| parse_column(cs, &raw, options))
            .collect();
        Ok(Dataset { columns, n_rows })
    }

    /// Write the dataset back to a delimited file. Missing cells become the
    /// first configured sentinel; unparseable cells keep their raw text, so
    /// a load → write → load round trip preserves cells, masks, and flags.
    pub fn write_csv(&self, path: &Path, options: &LoadOptions) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut writer = csv::WriterBuilder::new()
            .delimiter(options.delimiter)
            .from_writer(file);
        writer.write_record(self.columns.iter().map(|c| c.schema.name.as_str()))?;
        for row in 0..self.n_rows {
            let mut record: Vec<String> = Vec::with_capacity(self.columns.len());
            for col in &self.columns {
                record.push(col.render_cell(row, options));
            }
            writer.write_record(&record)?;
        }
        writer.flush().map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.schema.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    /// The single time-role column, if declared.
    pub fn time_column(&self) -> Option<&Column> {
        self.columns.iter().find(|c| c.schema.role == ColumnRole::Time)
    }

    /// The single target-role column, if declared.
    pub fn target_column(&self) -> Option<&Column> {
        self.columns.iter().find(|c| c.schema.role == ColumnRole::Target)
    }

    /// Non-missing numeric view of a continuous, ordinal (rank), or
    /// timestamp (epoch) column.
    pub fn numeric_column(&self, name: &str) -> Result<NumericColumn> {
        let col = self.column(name)?;
        let mut rows = Vec::new();
        let mut values = Vec::new();
        for row in 0..self.n_rows {
            if col.missing[row] {
                continue;
            }
            if let Some(v) = col.numeric_value(row) {
                rows.push(row);
                values.push(v);
            }
        }
        Ok(NumericColumn {
            name: name.to_string(),
            rows,
            values,
        })
    }

    /// Summary statistics for one column.
    pub fn column_summary(&self, name: &str) -> Result<SummaryStats> {
        let col = self.column(name)?;
        let missing_count = col.missing.iter().filter(|m| **m).count();
        let mut stats = SummaryStats {
            count: self.n_rows,
            missing_count,
            min: None,
            max: None,
            mean: None,
            stddev: None,
            distinct_count: None,
        };
        match &col.data {
            ColumnData::Continuous(values) => {
                let present: Vec<f64> = values
                    .iter()
                    .zip(&col.missing)
                    .filter(|(_, m)| !**m)
                    .map(|(v, _)| *v)
                    .collect();
                if !present.is_empty() {
                    stats.min = Some(present.iter().copied().fold(f64::INFINITY, f64::min));
                    stats.max = Some(present.iter().copied().fold(f64::NEG_INFINITY, f64::max));
                    stats.mean = Some(crate::stats::mean(&present));
                    if present.len() >= 2 {
                        stats.stddev = Some(crate::stats::sample_stddev(&present));
                    }
                }
            }
            ColumnData::Timestamp(values) => {
                let present: Vec<i64> = values
                    .iter()
                    .zip(&col.missing)
                    .filter(|(_, m)| !**m)
                    .map(|(v, _)| *v)
                    .collect();
                if !present.is_empty() {
                    stats.min = present.iter().min().map(|v| *v as f64);
                    stats.max = present.iter().max().map(|v| *v as f64);
                }
            }
            ColumnData::Ordinal(values) | ColumnData::Categorical(values) | ColumnData::Text(values) => {
                let distinct: BTreeSet<&String> = values
                    .iter()
                    .zip(&col.missing)
                    .filter(|(_, m)| !**m)
                    .map(|(v, _)| v)
                    .collect();
                stats.distinct_count = Some(distinct.len());
            }
        }
        Ok(stats)
    }
}

impl Column {
    pub fn name(&self) -> &str {
        &self.schema.name
    }

    /// Numeric value of a non-missing cell: continuous as-is, ordinal as
    /// its rank in the declared order, timestamp as epoch seconds.
    pub fn numeric_value(&self, row: usize) -> Option<f64> {
        if self.missing[row] {
            return None;
        }
        match &self.data {
            ColumnData::Continuous(v) => Some(v[row]),
            ColumnData::Timestamp(v) => Some(v[row] as f64),
            ColumnData::Ordinal(v) => {
                let order = self.schema.constraints.allowed_categories.as_ref()?;
                order.iter().position(|c| c == &v[row]).map(|i| i as f64)
            }
            _ => None,
        }
    }

    /// String value of a non-missing categorical, ordinal, or text cell.
    pub fn string_value(&self, row: usize) -> Option<&str> {
        if self.missing[row] {
            return None;
        }
        match &self.data {
            ColumnData::Ordinal(v) | ColumnData::Categorical(v) | ColumnData::Text(v) => {
                Some(v[row].as_str())
            }
            _ => None,
        }
    }

    /// Epoch-seconds value of a non-missing timestamp cell.
    pub fn time_value(&self, row: usize) -> Option<i64> {
        if self.missing[row] {
            return None;
        }
        match &self.data {
            ColumnData::Timestamp(v) => Some(v[row]),
            _ => None,
        }
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|m| **m).count()
    }

    pub fn unparseable_rows(&self) -> Vec<usize> {
        self.raw_unparseable.keys().copied().collect()
    }

    fn render_cell(&self, row: usize, options: &LoadOptions) -> String {
        match self.flags[row] {
            ParseFlag::Unparseable => self.raw_unparseable[&row].clone(),
            ParseFlag::MissingSentinel => options.write_sentinel().to_string(),
            ParseFlag::Ok => match &self.data {
                ColumnData::Continuous(v) => format!("{}", v[row]),
                ColumnData::Ordinal(v) | ColumnData::Categorical(v) | ColumnData::Text(v) => {
                    v[row].clone()
                }
                ColumnData::Timestamp(v) => match self.ts_format {
                    Some(TimestampFormat::Rfc3339) => DateTime::from_timestamp(v[row], 0)
                        .map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true))
                        .unwrap_or_else(|| v[row].to_string()),
                    _ => v[row].to_string(),
                },
            },
        }
    }
}

fn parse_column(schema: &ColumnSchema, raw: &[String], options: &LoadOptions) -> Column {
    let n = raw.len();
    let mut missing = vec![false; n];
    let mut flags = vec![ParseFlag::Ok; n];
    let mut raw_unparseable = BTreeMap::new();
    let mut ts_format: Option<TimestampFormat> = None;

    let data = match schema.kind {
        ColumnKind::Continuous => {
            let mut values = vec![f64::NAN; n];
            for (row, cell) in raw.iter().enumerate() {
                if options.is_sentinel(cell) {
                    missing[row] = true;
                    flags[row] = ParseFlag::MissingSentinel;
                } else {
                    match cell.trim().parse::<f64>() {
                        Ok(v) if v.is_finite() => values[row] = v,
                        _ => {
                            missing[row] = true;
                            flags[row] = ParseFlag::Unparseable;
                            raw_unparseable.insert(row, cell.clone());
                        }
                    }
                }
            }
            ColumnData::Continuous(values)
        }
        ColumnKind::Timestamp => {
            let mut values = vec![0i64; n];
            for (row, cell) in raw.iter().enumerate() {
                if options.is_sentinel(cell) {
                    missing[row] = true;
                    flags[row] = ParseFlag::MissingSentinel;
                    continue;
                }
                let parsed = parse_timestamp(cell, &mut ts_format);
                match parsed {
                    Some(t) => values[row] = t,
                    None => {
                        missing[row] = true;
                        flags[row] = ParseFlag::Unparseable;
                        raw_unparseable.insert(row, cell.clone());
                    }
                }
            }
            ColumnData::Timestamp(values)
        }
        ColumnKind::Ordinal | ColumnKind::Categorical | ColumnKind::Text => {
            let mut values = vec![String::new(); n];
            for (row, cell) in raw.iter().enumerate() {
                if options.is_sentinel(cell) {
                    missing[row] = true;
                    flags[row] = ParseFlag::MissingSentinel;
                } else {
                    values[row] = cell.clone();
                }
            }
            match schema.kind {
                ColumnKind::Ordinal => ColumnData::Ordinal(values),
                ColumnKind::Categorical => ColumnData::Categorical(values),
                _ => ColumnData::Text(values),
            }
        }
    };

    Column {
        schema: schema.clone(),
        data,
        missing,
        flags,
        raw_unparseable,
        ts_format,
    }
}

/// Parse one timestamp cell. The column's wire format (RFC 3339 or epoch
/// seconds) is fixed by the first cell that parses; later cells must match.
fn parse_timestamp(cell: &str, format: &mut Option<TimestampFormat>) -> Option<i64> {
    let cell = cell.trim();
    match format {
        Some(TimestampFormat::Rfc3339) => DateTime::parse_from_rfc3339(cell)
            .ok()
            .map(|t| t.timestamp()),
        Some(TimestampFormat::EpochSeconds) => cell.parse::<i64>().ok(),
        None => {
            if let Ok(t) = DateTime::parse_from_rfc3339(cell) {
                *format = Some(TimestampFormat::Rfc3339);
                Some(t.timestamp())
            } else if let Ok(t) = cell.parse::<i64>() {
                *format = Some(TimestampFormat::EpochSeconds);
                Some(t)
            } else {
                None
            }
        }
    }
}

/// Cap for row indices cited in finding evidence.
const EVIDENCE_ROW_CAP: usize = 50;

fn rows_evidence(column: &str, rows: &[usize], extra: serde_json::Value) -> serde_json::Value {
    let cited: Vec<usize> = rows.iter().copied().take(EVIDENCE_ROW_CAP).collect();
    let mut obj = serde_json::json!({
        "column": column,
        "rows": cited,
        "total": rows.len(),
    });
    if let (Some(o), serde_json::Value::Object(e)) = (obj.as_object_mut(), extra) {
        for (k, v) in e {
            o.insert(k, v);
        }
    }
    obj
}

/// Check every declared constraint and report violations as B5 findings:
/// out-of-range continuous values, categories outside the allowed list,
/// and unparseable cells. An empty list means the dataset is clean.
pub fn validate_schema(ds: &Dataset) -> Vec<Finding> {
    let mut findings = Vec::new();
    for col in ds.columns() {
        let name = col.schema.name.clone();

        if let ColumnData::Continuous(values) = &col.data {
            let (min, max) = (col.schema.constraints.min, col.schema.constraints.max);
            if min.is_some() || max.is_some() {
                let bad: Vec<usize> = (0..ds.n_rows())
                    .filter(|row| {
                        !col.missing[*row]
                            && (min.map_or(false, |m| values[*row] < m)
                                || max.map_or(false, |m| values[*row] > m))
                    })
                    .collect();
                if !bad.is_empty() {
                    findings.push(Finding::new(
                        Question::B5,
                        Severity::Fail,
                        "range-violation",
                        format!(
                            "{} value(s) in column {:?} fall outside the declared range",
                            bad.len(),
                            name
                        ),
                        rows_evidence(
                            &name,
                            &bad,
                            serde_json::json!({ "min": min, "max": max }),
                        ),
                    ));
                }
            }
        }

        if let Some(allowed) = &col.schema.constraints.allowed_categories {
            if matches!(col.data, ColumnData::Categorical(_) | ColumnData::Ordinal(_)) {
                let allowed_set: BTreeSet<&str> = allowed.iter().map(String::as_str).collect();
                let mut bad_rows = Vec::new();
                let mut bad_values = BTreeSet::new();
                for row in 0..ds.n_rows() {
                    if let Some(v) = col.string_value(row) {
                        if !allowed_set.contains(v) {
                            bad_rows.push(row);
                            bad_values.insert(v.to_string());
                        }
                    }
                }
                if !bad_rows.is_empty() {
                    let values: Vec<String> = bad_values.into_iter().take(10).collect();
                    findings.push(Finding::new(
                        Question::B5,
                        Severity::Fail,
                        "category-violation",
                        format!(
                            "column {:?} contains categories outside the allowed set: {:?}",
                            name, values
                        ),
                        rows_evidence(&name, &bad_rows, serde_json::json!({ "values": values })),
                    ));
                }
            }
        }

        let unparseable = col.unparseable_rows();
        if !unparseable.is_empty() {
            findings.push(Finding::new(
                Question::B5,
                Severity::Fail,
                "unparseable-cells",
                format!(
                    "{} cell(s) in column {:?} could not be parsed as {:?}; unreadable records can \
                     also point at an upstream accessibility problem, so review where they came from",
                    unparseable.len(),
                    name,
                    col.schema.kind
                ),
                rows_evidence(&name, &unparseable, serde_json::json!({})),
            ));
        }
    }
    crate::finding::sort_findings(&mut findings);
    findings
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn basic_schema() -> Vec<ColumnSchema> {
        vec![
            ColumnSchema::new("x", ColumnKind::Continuous, ColumnRole::Feature),
            ColumnSchema::new("cat", ColumnKind::Categorical, ColumnRole::Feature),
        ]
    }

    #[test]
    fn clean_file_loads_without_missing() {
        let f = write_tmp("x,cat\n1,a\n2,b\n3,a\n");
        let ds = Dataset::load_csv(f.path(), &basic_schema(), &LoadOptions::default()).unwrap();
        assert_eq!(ds.n_rows(), 3);
        for col in ds.columns() {
            assert!(col.missing.iter().all(|m| !m));
            assert!(col.flags.iter().all(|f| *f == ParseFlag::Ok));
        }
    }

    #[test]
    fn unparseable_cell_is_kept_and_flagged() {
        let f = write_tmp("x,cat\nabc,a\n2,b\n");
        let ds = Dataset::load_csv(f.path(), &basic_schema(), &LoadOptions::default()).unwrap();
        let x = ds.column("x").unwrap();
        assert!(x.missing[0]);
        assert_eq!(x.flags[0], ParseFlag::Unparseable);
        assert_eq!(ds.n_rows(), 2); // row retained
    }

    #[test]
    fn sentinel_cell_is_missing() {
        let f = write_tmp("x,cat\nNA,a\n2,b\n");
        let ds = Dataset::load_csv(f.path(), &basic_schema(), &LoadOptions::default()).unwrap();
        let x = ds.column("x").unwrap();
        assert!(x.missing[0]);
        assert_eq!(x.flags[0], ParseFlag::MissingSentinel);
    }

    #[test]
    fn header_mismatch_lists_missing_and_extra() {
        let f = write_tmp("x,dog\n1,a\n");
        let err = Dataset::load_csv(f.path(), &basic_schema(), &LoadOptions::default());
        match err {
            Err(Error::HeaderMismatch { missing, extra }) => {
                assert_eq!(missing, vec!["cat".to_string()]);
                assert_eq!(extra, vec!["dog".to_string()]);
            }
            other => panic!("expected header mismatch, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_header_and_empty_file_errors() {
        let f = write_tmp("x,x\n1,2\n");
        let schema = vec![ColumnSchema::new("x", ColumnKind::Continuous, ColumnRole::Feature)];
        assert!(matches!(
            Dataset::load_csv(f.path(), &schema, &LoadOptions::default()),
            Err(Error::DuplicateColumn(_))
        ));
        let f = write_tmp("x,cat\n");
        assert!(matches!(
            Dataset::load_csv(f.path(), &basic_schema(), &LoadOptions::default()),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn timestamp_format_fixed_by_first_parsing_cell() {
        let schema = vec![ColumnSchema::new("t", ColumnKind::Timestamp, ColumnRole::Time)];
        let f = write_tmp("t\n2020-01-01T00:00:00Z\n1000\n");
        let ds = Dataset::load_csv(f.path(), &schema, &LoadOptions::default()).unwrap();
        let t = ds.column("t").unwrap();
        assert_eq!(t.time_value(0), Some(1577836800));
        assert!(t.missing[1]); // "1000" is not RFC 3339

        let f = write_tmp("t\n1000\n2020-01-01T00:00:00Z\n");
        let ds = Dataset::load_csv(f.path(), &schema, &LoadOptions::default()).unwrap();
        let t = ds.column("t").unwrap();
        assert_eq!(t.time_value(0), Some(1000));
        assert!(t.missing[1]);
    }

    #[test]
    fn summary_hand_arithmetic() {
        let f = write_tmp("x,cat\n1,A\n2,A\nNA,B\n4,A\n");
        let ds = Dataset::load_csv(f.path(), &basic_schema(), &LoadOptions::default()).unwrap();
        let s = ds.column_summary("x").unwrap();
        assert_eq!(s.count, 4);
        assert_eq!(s.missing_count, 1);
        assert!((s.mean.unwrap() - 7.0 / 3.0).abs() < 1e-12);
        let c = ds.column_summary("cat").unwrap();
        assert_eq!(c.distinct_count, Some(2));
        assert!(c.mean.is_none());
    }

    #[test]
    fn summary_all_missing_has_no_numeric_stats() {
        let f = write_tmp("x,cat\nNA,a\nNA,b\n");
        let ds = Dataset::load_csv(f.path(), &basic_schema(), &LoadOptions::default()).unwrap();
        let s = ds.column_summary("x").unwrap();
        assert_eq!(s.missing_count, 2);
        assert!(s.min.is_none() && s.mean.is_none());
        assert!(matches!(ds.column_summary("nope"), Err(Error::UnknownColumn(_))));
    }

    #[test]
    fn validate_schema_clean_and_violations() {
        let schema = vec![
            ColumnSchema::new("x", ColumnKind::Continuous, ColumnRole::Feature)
                .with_range(Some(0.0), Some(5.0)),
            ColumnSchema::new("cat", ColumnKind::Categorical, ColumnRole::Feature)
                .with_categories(&["A", "B"]),
        ];
        let f = write_tmp("x,cat\n1,A\n2,B\n3,A\n");
        let ds = Dataset::load_csv(f.path(), &schema, &LoadOptions::default()).unwrap();
        assert!(validate_schema(&ds).is_empty());

        let f = write_tmp("x,cat\n-4,A\n2,Z\n");
        let ds = Dataset::load_csv(f.path(), &schema, &LoadOptions::default()).unwrap();
        let findings = validate_schema(&ds);
        assert_eq!(findings.len(), 2);
        let range = findings.iter().find(|f| f.code == "range-violation").unwrap();
        assert_eq!(range.question, Question::B5);
        assert_eq!(range.evidence["rows"][0], 0);
        let cat = findings.iter().find(|f| f.code == "category-violation").unwrap();
        assert!(cat.message.contains("\"Z\""));
    }

    #[test]
    fn round_trip_preserves_cells_masks_and_flags() {
        let schema = vec![
            ColumnSchema::new("x", ColumnKind::Continuous, ColumnRole::Feature),
            ColumnSchema::new("cat", ColumnKind::Categorical, ColumnRole::Feature),
            ColumnSchema::new("t", ColumnKind::Timestamp, ColumnRole::Time),
        ];
        let f = write_tmp("x,cat,t\n1.5,a,100\nabc,NA,2020-01-01T00:00:00Z\nNA,b,xyz\n0.25,c,300\n");
        let opts = LoadOptions::default();
        let ds = Dataset::load_csv(f.path(), &schema, &opts).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        ds.write_csv(out.path(), &opts).unwrap();
        let ds2 = Dataset::load_csv(out.path(), &schema, &opts).unwrap();
        assert_eq!(ds, ds2);
    }
}
