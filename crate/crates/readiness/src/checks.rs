//! Automated band-B checks: missing values (B4), flaws/outliers/modes
//! (B5), and distribution shifts over collection time (B7).
//!
//! Shift detection works on [`TimeBucketSeries`]: a column aggregated over
//! uniform collection-time buckets. Sudden persistent level changes are
//! found by an exhaustive mean-shift scan with a Bonferroni-corrected
//! Welch test; slow drifts by a slope test; collection anomalies by
//! autocorrelation and zero-run scans over the count series.

use crate::dataset::{ColumnData, ColumnKind, Dataset, NumericColumn};
use crate::error::{Error, Result};
use crate::finding::{Finding, Question, Severity};
use crate::stats;
use serde_json::json;
use std::collections::BTreeMap;

/// Hampel multiplier: flag |v − median| > 3·1.4826·MAD.
const HAMPEL_K: f64 = 3.0 * 1.4826;

/// Default thresholds for missing-value findings.
pub const DEFAULT_MISSING_WARN: f64 = 0.01;
pub const DEFAULT_MISSING_FAIL: f64 = 0.30;

/// Effect size above which a feature is reported as a missingness pattern.
pub const MISSING_PATTERN_EFFECT: f64 = 0.3;

/// Significance level for shift detection (before Bonferroni correction).
const SHIFT_ALPHA: f64 = 0.01;

/// Minimum buckets on each side of a candidate change point.
const MIN_SEGMENT: usize = 4;

/// Most change points reported per series.
const MAX_CHANGE_POINTS: usize = 4;

// ── time bucket series ────────────────────────────────────────────────

/// Aggregate applied per time bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    Mean,
    Count,
    /// Per-bucket sample standard deviation; surfaces changes in spread
    /// that mean and count aggregates hide.
    Stddev,
}

/// One variable aggregated over uniform collection-time buckets. Empty
/// buckets are present: counts are zero, means and stddevs are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeBucketSeries {
    pub column: String,
    pub aggregate: Aggregate,
    pub bucket_start: Vec<i64>,
    pub values: Vec<Option<f64>>,
    /// Bucket width in seconds.
    pub bucket_width: i64,
}

impl TimeBucketSeries {
    /// Bucket indices and values of the non-missing buckets.
    pub fn present(&self) -> (Vec<usize>, Vec<f64>) {
        let mut idx = Vec::new();
        let mut vals = Vec::new();
        for (i, v) in self.values.iter().enumerate() {
            if let Some(v) = v {
                idx.push(i);
                vals.push(*v);
            }
        }
        (idx, vals)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Local maxima of a column's density estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeReport {
    pub mode_locations: Vec<f64>,
    pub mode_densities: Vec<f64>,
}

/// Category-by-time occurrence counts for the heatmap overview.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryTimeMatrix {
    /// Sorted by total count, descending.
    pub categories: Vec<String>,
    pub bucket_start: Vec<i64>,
    pub bucket_width: i64,
    /// `counts[i][j]` = occurrences of category `i` in bucket `j`.
    pub counts: Vec<Vec<u64>>,
}

// ── outliers and modes ────────────────────────────────────────────────

/// Hampel outlier scan over one numeric column. When the MAD degenerates
/// to zero the mean absolute deviation from the median takes its place;
/// if that is also zero the column has no usable spread and only an info
/// finding is emitted. All flagged rows aggregate into one B5 finding.
pub fn detect_outliers(col: &NumericColumn) -> Vec<Finding> {
    if col.values.len() < 20 {
        return vec![Finding::new(
            Question::B5,
            Severity::Info,
            "outliers-skipped",
            format!(
                "column {:?} has {} non-missing values; outlier scan needs ≥ 20",
                col.name,
                col.values.len()
            ),
            json!({ "column": col.name, "count": col.values.len() }),
        )];
    }
    let med = stats::median(&col.values);
    let mut scale = stats::median_abs_deviation(&col.values);
    let mut fallback = false;
    if scale == 0.0 {
        fallback = true;
        scale = col.values.iter().map(|v| (v - med).abs()).sum::<f64>() / col.values.len() as f64;
    }
    if scale == 0.0 {
        return vec![Finding::new(
            Question::B5,
            Severity::Info,
            "outliers-degenerate",
            format!("column {:?} has no spread; outlier scan not applicable", col.name),
            json!({ "column": col.name }),
        )];
    }
    let threshold = HAMPEL_K * scale;
    let flagged: Vec<usize> = col
        .values
        .iter()
        .zip(&col.rows)
        .filter(|(v, _)| (**v - med).abs() > threshold)
        .map(|(_, r)| *r)
        .collect();
    if flagged.is_empty() {
        return Vec::new();
    }
    let cited: Vec<usize> = flagged.iter().copied().take(50).collect();
    vec![Finding::new(
        Question::B5,
        Severity::Warn,
        "outliers",
        format!(
            "{} value(s) in column {:?} lie more than {:.3} from the median {:.3}",
            flagged.len(),
            col.name,
            threshold,
            med
        ),
        json!({
            "column": col.name,
            "rows": cited,
            "total": flagged.len(),
            "median": med,
            "threshold": threshold,
            "mad_fallback": fallback,
        }),
    )]
}

/// Modes of a column: strict local maxima of its KDE whose density is at
/// least 5% of the global maximum. Locations come back sorted.
pub fn mode_report(values: &[f64]) -> Result<ModeReport> {
    let curve = stats::kde(values, 512)?;
    let d = &curve.density;
    let peak = d.iter().copied().fold(0.0f64, f64::max);
    let floor = 0.05 * peak;
    let mut locations = Vec::new();
    let mut densities = Vec::new();
    for i in 1..d.len() - 1 {
        if d[i] > d[i - 1] && d[i] > d[i + 1] && d[i] >= floor {
            locations.push(curve.grid[i]);
            densities.push(d[i]);
        }
    }
    Ok(ModeReport {
        mode_locations: locations,
        mode_densities: densities,
    })
}

// ── missing values ────────────────────────────────────────────────────

/// Per-column missing fractions, mapped to B4: warn above `warn_threshold`
/// and fail above `fail_threshold`. Clean columns produce nothing.
pub fn missing_summary(ds: &Dataset, warn_threshold: f64, fail_threshold: f64) -> Vec<Finding> {
    let mut findings = Vec::new();
    for col in ds.columns() {
        let missing = col.missing_count();
        if missing == 0 {
            continue;
        }
        let fraction = missing as f64 / ds.n_rows() as f64;
        let severity = if fraction > fail_threshold {
            Severity::Fail
        } else if fraction > warn_threshold {
            Severity::Warn
        } else {
            continue;
        };
        findings.push(Finding::new(
            Question::B4,
            severity,
            "missing-fraction",
            format!(
                "column {:?} is missing {} of {} values ({:.1}%)",
                col.name(),
                missing,
                ds.n_rows(),
                fraction * 100.0
            ),
            json!({
                "column": col.name(),
                "missing": missing,
                "total": ds.n_rows(),
                "fraction": fraction,
            }),
        ));
    }
    crate::finding::sort_findings(&mut findings);
    findings
}

/// Search for a pattern behind one column's missingness: compare every
/// other feature's distribution on missing rows against present rows.
/// Continuous features are compared by standardized mean difference,
/// categorical ones by total variation distance; features whose effect
/// exceeds `effect_threshold` are reported ranked by effect size.
pub fn missing_pattern(ds: &Dataset, column: &str, effect_threshold: f64) -> Result<Vec<Finding>> {
    let col = ds.column(column)?;
    let missing_rows: Vec<usize> = (0..ds.n_rows()).filter(|r| col.missing[*r]).collect();
    let present_rows: Vec<usize> = (0..ds.n_rows()).filter(|r| !col.missing[*r]).collect();
    if missing_rows.len() < 10 || present_rows.len() < 10 {
        return Ok(vec![Finding::new(
            Question::B4,
            Severity::Info,
            "missing-pattern-skipped",
            format!(
                "column {:?} has insufficient missingness for pattern mining \
                 ({} missing / {} present rows; both sides need ≥ 10)",
                column,
                missing_rows.len(),
                present_rows.len()
            ),
            json!({
                "column": column,
                "missing_rows": missing_rows.len(),
                "present_rows": present_rows.len(),
            }),
        )]);
    }

    let mut effects: Vec<(String, f64, &'static str)> = Vec::new();
    for other in ds.columns() {
        if other.name() == column {
            continue;
        }
        match other.schema.kind {
            ColumnKind::Continuous => {
                let on: Vec<f64> = missing_rows
                    .iter()
                    .filter_map(|r| other.numeric_value(*r))
                    .collect();
                let off: Vec<f64> = present_rows
                    .iter()
                    .filter_map(|r| other.numeric_value(*r))
                    .collect();
                if on.len() < 2 || off.len() < 2 {
                    continue;
                }
                if let Some(smd) = standardized_mean_difference(&on, &off) {
                    effects.push((other.name().to_string(), smd, "standardized_mean_difference"));
                }
            }
            ColumnKind::Categorical | ColumnKind::Ordinal => {
                let tvd = total_variation_distance(
                    &category_frequencies(other, &missing_rows),
                    &category_frequencies(other, &present_rows),
                );
                if let Some(tvd) = tvd {
                    effects.push((other.name().to_string(), tvd, "total_variation_distance"));
                }
            }
            _ => {}
        }
    }

    effects.retain(|(_, e, _)| *e > effect_threshold);
    effects.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    if effects.is_empty() {
        return Ok(Vec::new());
    }
    let ranked: Vec<serde_json::Value> = effects
        .iter()
        .map(|(name, effect, metric)| json!({ "feature": name, "effect": effect, "metric": metric }))
        .collect();
    Ok(vec![Finding::new(
        Question::B4,
        Severity::Warn,
        "missing-pattern",
        format!(
            "missingness in column {:?} is associated with {} other feature(s); strongest: {:?} \
             (effect {:.2})",
            column,
            effects.len(),
            effects[0].0,
            effects[0].1
        ),
        json!({
            "column": column,
            "ranked_features": ranked,
            "effect_threshold": effect_threshold,
        }),
    )])
}

fn standardized_mean_difference(a: &[f64], b: &[f64]) -> Option<f64> {
    let ma = stats::mean(a);
    let mb = stats::mean(b);
    let va = stats::sample_variance(a);
    let vb = stats::sample_variance(b);
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let pooled = (((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0)).sqrt();
    if pooled > 0.0 {
        Some((ma - mb).abs() / pooled)
    } else if ma == mb {
        Some(0.0)
    } else {
        None
    }
}

fn category_frequencies(col: &crate::dataset::Column, rows: &[usize]) -> BTreeMap<String, f64> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut total = 0usize;
    for r in rows {
        if let Some(v) = col.string_value(*r) {
            *counts.entry(v.to_string()).or_insert(0) += 1;
            total += 1;
        }
    }
    counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / total.max(1) as f64))
        .collect()
}

fn total_variation_distance(a: &BTreeMap<String, f64>, b: &BTreeMap<String, f64>) -> Option<f64> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    let sum: f64 = keys
        .into_iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .sum();
    Some(sum / 2.0)
}

// ── time bucketing ────────────────────────────────────────────────────

/// Pick a bucket width (hour, day, or week) so the span yields 50–200
/// buckets, or the closest achievable.
pub fn auto_bucket_width(min_time: i64, max_time: i64) -> i64 {
    const CANDIDATES: [i64; 3] = [3600, 86_400, 604_800];
    let span = (max_time - min_time).max(1);
    let mut best = CANDIDATES[0];
    let mut best_penalty = i64::MAX;
    for w in CANDIDATES {
        let buckets = span / w + 1;
        let penalty = if buckets < 50 {
            50 - buckets
        } else if buckets > 200 {
            buckets - 200
        } else {
            0
        };
        if penalty < best_penalty {
            best_penalty = penalty;
            best = w;
        }
    }
    best
}

/// Aggregate one column over uniform time buckets spanning floor(min time)
/// to max time. Every bucket is present: empty buckets count zero and have
/// missing mean/stddev.
pub fn bucket_by_time(
    ds: &Dataset,
    column: &str,
    aggregate: Aggregate,
    bucket_width: i64,
) -> Result<TimeBucketSeries> {
    let time = ds
        .time_column()
        .ok_or_else(|| Error::InvalidArgument("dataset has no time column".into()))?;
    if bucket_width <= 0 {
        return Err(Error::InvalidArgument("bucket width must be positive".into()));
    }
    let col = ds.column(column)?;

    // rows where both the clock and the column are usable
    let mut stamped: Vec<(i64, f64)> = Vec::new();
    for row in 0..ds.n_rows() {
        let Some(t) = time.time_value(row) else { continue };
        if col.missing[row] {
            continue;
        }
        let v = match &col.data {
            ColumnData::Continuous(_) | ColumnData::Ordinal(_) | ColumnData::Timestamp(_) => {
                col.numeric_value(row).unwrap_or(f64::NAN)
            }
            // counting is all the aggregate can do for these
            ColumnData::Categorical(_) | ColumnData::Text(_) => 0.0,
        };
        stamped.push((t, v));
    }
    if stamped.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no rows with both time and {column:?} present"
        )));
    }
    let min_t = stamped.iter().map(|(t, _)| *t).min().unwrap();
    let max_t = stamped.iter().map(|(t, _)| *t).max().unwrap();
    let start = min_t.div_euclid(bucket_width) * bucket_width;
    let n_buckets = ((max_t - start).div_euclid(bucket_width) + 1) as usize;
    if n_buckets < 2 {
        return Err(Error::InsufficientData(
            "time span yields a single bucket; narrow the bucket width".into(),
        ));
    }

    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); n_buckets];
    for (t, v) in stamped {
        let idx = ((t - start).div_euclid(bucket_width)) as usize;
        groups[idx].push(v);
    }
    let values: Vec<Option<f64>> = groups
        .iter()
        .map(|g| match aggregate {
            Aggregate::Count => Some(g.len() as f64),
            Aggregate::Mean => {
                if g.is_empty() {
                    None
                } else {
                    Some(stats::mean(g))
                }
            }
            Aggregate::Stddev => {
                if g.len() < 2 {
                    None
                } else {
                    Some(stats::sample_stddev(g))
                }
            }
        })
        .collect();

    Ok(TimeBucketSeries {
        column: column.to_string(),
        aggregate,
        bucket_start: (0..n_buckets).map(|i| start + i as i64 * bucket_width).collect(),
        values,
        bucket_width,
    })
}

// ── change points ─────────────────────────────────────────────────────

/// Welch statistic and degrees of freedom between two segments.
fn welch(left: &[f64], right: &[f64]) -> (f64, f64) {
    let (nl, nr) = (left.len() as f64, right.len() as f64);
    let (ml, mr) = (stats::mean(left), stats::mean(right));
    let (vl, vr) = (stats::sample_variance(left), stats::sample_variance(right));
    let se2 = vl / nl + vr / nr;
    if se2 <= 0.0 {
        let t = if ml == mr { 0.0 } else { f64::INFINITY };
        return (t, nl + nr - 2.0);
    }
    let t = (ml - mr) / se2.sqrt();
    let denom = (vl / nl).powi(2) / (nl - 1.0) + (vr / nr).powi(2) / (nr - 1.0);
    let df = if denom > 0.0 { se2 * se2 / denom } else { nl + nr - 2.0 };
    (t, df)
}

/// Best split of `values[lo..hi]` by Welch statistic, with its
/// Bonferroni-adjusted p-value. Returns (split, |t|, p_adjusted).
fn best_split(values: &[f64], lo: usize, hi: usize) -> Option<(usize, f64, f64)> {
    if hi - lo < 2 * MIN_SEGMENT {
        return None;
    }
    let candidates = hi - lo - 2 * MIN_SEGMENT + 1;
    let mut best: Option<(usize, f64, f64)> = None;
    for s in (lo + MIN_SEGMENT)..=(hi - MIN_SEGMENT) {
        let (t, df) = welch(&values[lo..s], &values[s..hi]);
        let p = stats::t_test_pvalue(t, df);
        let p_adj = (p * candidates as f64).min(1.0);
        let better = match &best {
            None => true,
            Some((_, bt, _)) => t.abs() > *bt,
        };
        if better {
            best = Some((s, t.abs(), p_adj));
        }
    }
    best
}

fn recurse_splits(
    values: &[f64],
    lo: usize,
    hi: usize,
    found: &mut Vec<(usize, f64, f64)>,
) {
    if found.len() >= MAX_CHANGE_POINTS {
        return;
    }
    if let Some((s, t, p_adj)) = best_split(values, lo, hi) {
        if p_adj < SHIFT_ALPHA {
            found.push((s, t, p_adj));
            recurse_splits(values, lo, s, found);
            if found.len() < MAX_CHANGE_POINTS {
                recurse_splits(values, s, hi, found);
            }
        }
    }
}

/// Exhaustive mean-shift scan over a bucket series. Each detected change
/// point becomes a B7 fail finding citing the first bucket of the new
/// segment and the segment means on both sides.
pub fn detect_change_points(series: &TimeBucketSeries) -> Vec<Finding> {
    let (idx, vals) = series.present();
    if vals.len() < 10 {
        return vec![Finding::new(
            Question::B7,
            Severity::Info,
            "change-points-skipped",
            format!(
                "series for {:?} has {} non-missing buckets; change-point scan needs ≥ 10",
                series.column,
                vals.len()
            ),
            json!({ "column": series.column, "buckets": vals.len() }),
        )];
    }
    let mut found = Vec::new();
    recurse_splits(&vals, 0, vals.len(), &mut found);
    found.sort_by_key(|(s, _, _)| *s);

    found
        .into_iter()
        .map(|(s, t, p_adj)| {
            let left = &vals[..s];
            let right = &vals[s..];
            let bucket = idx[s];
            Finding::new(
                Question::B7,
                Severity::Fail,
                "change-point",
                format!(
                    "{} of {:?} shifts persistently at bucket {} (level {:.3} → {:.3})",
                    aggregate_name(series.aggregate),
                    series.column,
                    bucket,
                    stats::mean(left),
                    stats::mean(right)
                ),
                json!({
                    "column": series.column,
                    "aggregate": series.aggregate,
                    "bucket_index": bucket,
                    "bucket_start": series.bucket_start[bucket],
                    "left_mean": stats::mean(left),
                    "right_mean": stats::mean(right),
                    "statistic": t,
                    "p_adjusted": p_adj,
                }),
            )
        })
        .collect()
}

fn aggregate_name(a: Aggregate) -> &'static str {
    match a {
        Aggregate::Mean => "mean",
        Aggregate::Count => "count",
        Aggregate::Stddev => "stddev",
    }
}

// ── trend ─────────────────────────────────────────────────────────────

/// Slow-drift scan: OLS slope over bucket index, flagged when the slope
/// is significant (p < 0.01) and the accumulated drift exceeds half the
/// series spread. Returns `None` when no drift is flagged.
pub fn detect_trend(series: &TimeBucketSeries) -> Result<Option<Finding>> {
    let (idx, vals) = series.present();
    if vals.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "trend scan needs ≥ 10 non-missing buckets, got {}",
            vals.len()
        )));
    }
    let x: Vec<f64> = idx.iter().map(|i| *i as f64).collect();
    let fit = stats::linear_fit_ci(&x, &vals)?;
    let p = if fit.slope_stderr > 0.0 {
        stats::t_test_pvalue(fit.slope / fit.slope_stderr, (vals.len() - 2) as f64)
    } else if fit.slope != 0.0 {
        0.0
    } else {
        1.0
    };
    let span = x.last().unwrap() - x.first().unwrap();
    let drift = fit.slope.abs() * span;
    let spread = stats::sample_stddev(&vals);
    if p < 0.01 && drift > 0.5 * spread {
        Ok(Some(Finding::new(
            Question::B7,
            Severity::Warn,
            "trend",
            format!(
                "{} of {:?} drifts by {:.3} per bucket over the collection window",
                aggregate_name(series.aggregate),
                series.column,
                fit.slope
            ),
            json!({
                "column": series.column,
                "aggregate": series.aggregate,
                "slope": fit.slope,
                "intercept": fit.intercept,
                "p_value": p,
                "total_drift": drift,
                "series_stddev": spread,
            }),
        )))
    } else {
        Ok(None)
    }
}

/// Run the change-point and trend detectors on one series and apply the
/// dedup rule: a significant change point demotes the trend finding to a
/// secondary info note, since a step also reads as a drift.
pub fn scan_series(series: &TimeBucketSeries) -> Vec<Finding> {
    let mut findings = detect_change_points(series);
    let has_change = findings.iter().any(|f| f.code == "change-point");
    if let Ok(Some(mut trend)) = detect_trend(series) {
        if has_change {
            trend.severity = Severity::Info;
            trend.code = "trend-secondary".into();
            if let Some(obj) = trend.evidence.as_object_mut() {
                obj.insert("secondary".into(), json!(true));
            }
            trend.message.push_str(" (secondary to a detected change point)");
        }
        findings.push(trend);
    }
    findings
}

// ── collection anomalies ──────────────────────────────────────────────

/// Scan a count series for unexpected collection patterns: oscillation
/// (lag-k autocorrelation above 0.5), gaps (runs of ≥ 3 empty buckets),
/// and monotone drift (delegated to the trend detector).
pub fn detect_collection_anomalies(series: &TimeBucketSeries) -> Result<Vec<Finding>> {
    if series.aggregate != Aggregate::Count {
        return Err(Error::InvalidArgument(
            "collection-anomaly scan requires a count series".into(),
        ));
    }
    let counts: Vec<f64> = series.values.iter().map(|v| v.unwrap_or(0.0)).collect();
    if counts.len() < 12 {
        return Ok(vec![Finding::new(
            Question::B7,
            Severity::Info,
            "collection-scan-skipped",
            format!(
                "count series for {:?} has {} buckets; anomaly scan needs ≥ 12",
                series.column,
                counts.len()
            ),
            json!({ "column": series.column, "buckets": counts.len() }),
        )]);
    }
    let mut findings = Vec::new();

    // (a) oscillation: smallest lag whose autocorrelation exceeds 0.5
    let max_lag = counts.len() / 3;
    for k in 2..=max_lag {
        let r = autocorrelation(&counts, k);
        if r > 0.5 {
            findings.push(Finding::new(
                Question::B7,
                Severity::Warn,
                "collection-oscillation",
                format!(
                    "collection volume for {:?} oscillates with period {} buckets \
                     (autocorrelation {:.2})",
                    series.column, k, r
                ),
                json!({
                    "column": series.column,
                    "period": k,
                    "autocorrelation": r,
                }),
            ));
            break;
        }
    }

    // (b) gaps: runs of ≥ 3 empty buckets
    let mut run_start = None;
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, c) in counts.iter().enumerate() {
        if *c == 0.0 {
            run_start.get_or_insert(i);
        } else if let Some(s) = run_start.take() {
            if i - s >= 3 {
                runs.push((s, i - 1));
            }
        }
    }
    if let Some(s) = run_start {
        if counts.len() - s >= 3 {
            runs.push((s, counts.len() - 1));
        }
    }
    for (s, e) in runs {
        findings.push(Finding::new(
            Question::B7,
            Severity::Warn,
            "collection-gap",
            format!(
                "no values collected for {:?} in buckets {}..={} ({} empty buckets)",
                series.column,
                s,
                e,
                e - s + 1
            ),
            json!({ "column": series.column, "gap_start": s, "gap_end": e }),
        ));
    }

    // (c) monotone drift
    if let Ok(Some(mut trend)) = detect_trend(series) {
        trend.code = "collection-drift".into();
        findings.push(trend);
    }

    Ok(findings)
}

/// Sample autocorrelation at lag `k`.
pub fn autocorrelation(values: &[f64], k: usize) -> f64 {
    let n = values.len();
    if k >= n {
        return 0.0;
    }
    let m = stats::mean(values);
    let denom: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    if denom <= 0.0 {
        return 0.0;
    }
    let num: f64 = (k..n).map(|i| (values[i] - m) * (values[i - k] - m)).sum();
    num / denom
}

// ── category × time ───────────────────────────────────────────────────

/// Occurrences of each category over time buckets; rows are sorted by
/// total count descending so the heatmap reads top-down.
pub fn category_time_matrix(
    ds: &Dataset,
    category_column: &str,
    bucket_width: i64,
) -> Result<CategoryTimeMatrix> {
    let time = ds
        .time_column()
        .ok_or_else(|| Error::InvalidArgument("dataset has no time column".into()))?;
    let col = ds.column(category_column)?;
    if !matches!(col.schema.kind, ColumnKind::Categorical | ColumnKind::Ordinal) {
        return Err(Error::InvalidArgument(format!(
            "column {category_column:?} is not categorical"
        )));
    }
    let mut stamped: Vec<(i64, String)> = Vec::new();
    for row in 0..ds.n_rows() {
        let (Some(t), Some(v)) = (time.time_value(row), col.string_value(row)) else {
            continue;
        };
        stamped.push((t, v.to_string()));
    }
    if stamped.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no rows with both time and {category_column:?} present"
        )));
    }
    let min_t = stamped.iter().map(|(t, _)| *t).min().unwrap();
    let max_t = stamped.iter().map(|(t, _)| *t).max().unwrap();
    let start = min_t.div_euclid(bucket_width) * bucket_width;
    let n_buckets = ((max_t - start).div_euclid(bucket_width) + 1) as usize;

    let mut per_category: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for (t, v) in stamped {
        let idx = ((t - start).div_euclid(bucket_width)) as usize;
        per_category.entry(v).or_insert_with(|| vec![0; n_buckets])[idx] += 1;
    }
    let mut order: Vec<(String, u64)> = per_category
        .iter()
        .map(|(k, counts)| (k.clone(), counts.iter().sum()))
        .collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let categories: Vec<String> = order.iter().map(|(k, _)| k.clone()).collect();
    let counts = categories
        .iter()
        .map(|k| per_category.remove(k).unwrap())
        .collect();
    Ok(CategoryTimeMatrix {
        categories,
        bucket_start: (0..n_buckets).map(|i| start + i as i64 * bucket_width).collect(),
        bucket_width,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ColumnRole, ColumnSchema, Dataset, LoadOptions};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal as NormalDist};
    use std::io::Write;

    fn series(values: Vec<Option<f64>>, aggregate: Aggregate) -> TimeBucketSeries {
        TimeBucketSeries {
            column: "v".into(),
            aggregate,
            bucket_start: (0..values.len() as i64).map(|i| i * 3600).collect(),
            values,
            bucket_width: 3600,
        }
    }

    fn load(content: &str, schema: &[ColumnSchema]) -> Dataset {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        Dataset::load_csv(f.path(), schema, &LoadOptions::default()).unwrap()
    }

    fn numeric(values: Vec<f64>) -> NumericColumn {
        NumericColumn {
            name: "v".into(),
            rows: (0..values.len()).collect(),
            values,
        }
    }

    #[test]
    fn outlier_found_via_mad_fallback() {
        // 100 zeros and one 50: MAD is 0, mean abs deviation is 50/101,
        // so the threshold is 3·1.4826·50/101 ≈ 2.2 and 50 is flagged.
        let mut values = vec![0.0; 100];
        values.push(50.0);
        let findings = detect_outliers(&numeric(values));
        assert_eq!(findings.len(), 1);
        let f = &findings[0];
        assert_eq!(f.code, "outliers");
        assert_eq!(f.evidence["rows"][0], 100);
        assert_eq!(f.evidence["total"], 1);
        assert_eq!(f.evidence["mad_fallback"], true);
        let expected = 3.0 * 1.4826 * (50.0 / 101.0);
        assert!((f.evidence["threshold"].as_f64().unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn outlier_rate_on_clean_gaussian_is_low() {
        let mut ok = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(400 + seed);
            let d = NormalDist::new(0.0, 1.0).unwrap();
            let values: Vec<f64> = (0..1000).map(|_| d.sample(&mut rng)).collect();
            let findings = detect_outliers(&numeric(values));
            let flagged = findings
                .first()
                .and_then(|f| f.evidence["total"].as_u64())
                .unwrap_or(0);
            if flagged as f64 / 1000.0 <= 0.02 {
                ok += 1;
            }
        }
        assert!(ok >= 95, "clean rate ok in {ok}/100 seeds");
    }

    #[test]
    fn constant_column_gives_info_only() {
        let findings = detect_outliers(&numeric(vec![7.0; 50]));
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].severity, Severity::Info);
        assert_eq!(findings[0].code, "outliers-degenerate");
    }

    #[test]
    fn modes_unimodal_and_bimodal() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d = NormalDist::new(0.0, 1.0).unwrap();
        let values: Vec<f64> = (0..4000).map(|_| d.sample(&mut rng)).collect();
        let report = mode_report(&values).unwrap();
        assert_eq!(report.mode_locations.len(), 1);
        assert!(report.mode_locations[0].abs() < 0.5);

        let mut mixture: Vec<f64> = (0..2000).map(|_| d.sample(&mut rng) - 5.0).collect();
        mixture.extend((0..2000).map(|_| d.sample(&mut rng) + 5.0));
        let report = mode_report(&mixture).unwrap();
        assert_eq!(report.mode_locations.len(), 2);
        assert!((report.mode_locations[0] + 5.0).abs() < 0.5);
        assert!((report.mode_locations[1] - 5.0).abs() < 0.5);
        // sorted ascending
        let mut sorted = report.mode_locations.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(sorted, report.mode_locations);
    }

    #[test]
    fn missing_summary_thresholds() {
        let schema = vec![
            ColumnSchema::new("a", crate::dataset::ColumnKind::Continuous, ColumnRole::Feature),
            ColumnSchema::new("b", crate::dataset::ColumnKind::Continuous, ColumnRole::Feature),
        ];
        let mut rows = String::from("a,b\n");
        for i in 0..100 {
            let a = if i < 40 { "NA".into() } else { format!("{i}") };
            let b = if i < 2 { "NA".into() } else { format!("{i}") };
            rows.push_str(&format!("{a},{b}\n"));
        }
        let ds = load(&rows, &schema);
        let findings = missing_summary(&ds, DEFAULT_MISSING_WARN, DEFAULT_MISSING_FAIL);
        assert_eq!(findings.len(), 2);
        let a = findings.iter().find(|f| f.subject() == "a").unwrap();
        assert_eq!(a.severity, Severity::Fail);
        assert!((a.evidence["fraction"].as_f64().unwrap() - 0.4).abs() < 1e-12);
        let b = findings.iter().find(|f| f.subject() == "b").unwrap();
        assert_eq!(b.severity, Severity::Warn);

        let clean = load("a,b\n1,2\n3,4\n", &schema);
        assert!(missing_summary(&clean, DEFAULT_MISSING_WARN, DEFAULT_MISSING_FAIL).is_empty());
    }

    #[test]
    fn missing_pattern_finds_threshold_cause() {
        // x missing exactly when b > 0
        let schema = vec![
            ColumnSchema::new("x", crate::dataset::ColumnKind::Continuous, ColumnRole::Feature),
            ColumnSchema::new("b", crate::dataset::ColumnKind::Continuous, ColumnRole::Feature),
            ColumnSchema::new("c", crate::dataset::ColumnKind::Continuous, ColumnRole::Feature),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let d = NormalDist::new(0.0, 1.0).unwrap();
        let mut content = String::from("x,b,c\n");
        for _ in 0..200 {
            let b: f64 = d.sample(&mut rng);
            let c: f64 = d.sample(&mut rng);
            let x = if b > 0.0 { "NA".into() } else { format!("{:.6}", d.sample(&mut rng)) };
            content.push_str(&format!("{x},{b:.6},{c:.6}\n"));
        }
        let ds = load(&content, &schema);
        let findings = missing_pattern(&ds, "x", MISSING_PATTERN_EFFECT).unwrap();
        assert_eq!(findings.len(), 1);
        let ranked = findings[0].evidence["ranked_features"].as_array().unwrap();
        assert_eq!(ranked[0]["feature"], "b");
        assert!(ranked[0]["effect"].as_f64().unwrap() >= 0.3);

        // oracle: direct standardized mean difference for the construction
        let b_col = ds.numeric_column("b").unwrap();
        let x_col = ds.column("x").unwrap();
        let on: Vec<f64> = b_col
            .rows
            .iter()
            .zip(&b_col.values)
            .filter(|(r, _)| x_col.missing[**r])
            .map(|(_, v)| *v)
            .collect();
        let off: Vec<f64> = b_col
            .rows
            .iter()
            .zip(&b_col.values)
            .filter(|(r, _)| !x_col.missing[**r])
            .map(|(_, v)| *v)
            .collect();
        let oracle = standardized_mean_difference(&on, &off).unwrap();
        assert!((ranked[0]["effect"].as_f64().unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn missing_pattern_random_is_quiet() {
        let schema = vec![
            ColumnSchema::new("x", crate::dataset::ColumnKind::Continuous, ColumnRole::Feature),
            ColumnSchema::new("b", crate::dataset::ColumnKind::Continuous, ColumnRole::Feature),
            ColumnSchema::new("c", crate::dataset::ColumnKind::Continuous, ColumnRole::Feature),
        ];
        let mut quiet = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(800 + seed);
            let d = NormalDist::new(0.0, 1.0).unwrap();
            let mut content = String::from("x,b,c\n");
            for i in 0..1000 {
                let x = if i % 5 == 0 { "NA".into() } else { format!("{:.6}", d.sample(&mut rng)) };
                content.push_str(&format!("{x},{:.6},{:.6}\n", d.sample(&mut rng), d.sample(&mut rng)));
            }
            let ds = load(&content, &schema);
            if missing_pattern(&ds, "x", MISSING_PATTERN_EFFECT).unwrap().is_empty() {
                quiet += 1;
            }
        }
        assert!(quiet >= 90, "quiet in {quiet}/100 seeds");
    }

    #[test]
    fn missing_pattern_without_missing_is_info() {
        let schema = vec![
            ColumnSchema::new("x", crate::dataset::ColumnKind::Continuous, ColumnRole::Feature),
            ColumnSchema::new("b", crate::dataset::ColumnKind::Continuous, ColumnRole::Feature),
        ];
        let ds = load("x,b\n1,2\n3,4\n", &schema);
        let findings = missing_pattern(&ds, "x", MISSING_PATTERN_EFFECT).unwrap();
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].severity, Severity::Info);
        assert_eq!(findings[0].code, "missing-pattern-skipped");
    }

    #[test]
    fn bucket_counts_match_hand_tally() {
        let schema = vec![
            ColumnSchema::new("t", crate::dataset::ColumnKind::Timestamp, ColumnRole::Time),
            ColumnSchema::new("v", crate::dataset::ColumnKind::Continuous, ColumnRole::Feature),
        ];
        // 10 events over 2 days: 7 on day 0, 3 on day 1
        let day = 86_400;
        let mut content = String::from("t,v\n");
        for i in 0..7 {
            content.push_str(&format!("{},{}\n", i * 1000, i));
        }
        for i in 0..3 {
            content.push_str(&format!("{},{}\n", day + i * 1000, i));
        }
        let ds = load(&content, &schema);
        let counts = bucket_by_time(&ds, "v", Aggregate::Count, day).unwrap();
        assert_eq!(counts.values, vec![Some(7.0), Some(3.0)]);

        let means = bucket_by_time(&ds, "v", Aggregate::Mean, day).unwrap();
        assert!((means.values[0].unwrap() - 3.0).abs() < 1e-12);
        assert!((means.values[1].unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_middle_bucket_is_present() {
        let schema = vec![
            ColumnSchema::new("t", crate::dataset::ColumnKind::Timestamp, ColumnRole::Time),
            ColumnSchema::new("v", crate::dataset::ColumnKind::Continuous, ColumnRole::Feature),
        ];
        let day = 86_400;
        let content = format!("t,v\n0,1\n{},9\n", 2 * day);
        let ds = load(&content, &schema);
        let counts = bucket_by_time(&ds, "v", Aggregate::Count, day).unwrap();
        assert_eq!(counts.values, vec![Some(1.0), Some(0.0), Some(1.0)]);
        let means = bucket_by_time(&ds, "v", Aggregate::Mean, day).unwrap();
        assert_eq!(means.values[1], None);
    }

    #[test]
    fn change_point_step_detected_at_split() {
        let mut values: Vec<Option<f64>> = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = NormalDist::new(0.0, 1.0).unwrap();
        for i in 0..100 {
            let level = if i < 50 { 0.0 } else { 5.0 };
            values.push(Some(level + d.sample(&mut rng)));
        }
        let findings = detect_change_points(&series(values, Aggregate::Mean));
        let cps: Vec<i64> = findings
            .iter()
            .filter(|f| f.code == "change-point")
            .map(|f| f.evidence["bucket_index"].as_i64().unwrap())
            .collect();
        assert!(!cps.is_empty());
        assert!(cps.iter().any(|c| (c - 50).abs() <= 2), "change points {cps:?}");
    }

    #[test]
    fn change_point_two_steps_found() {
        let mut ok = 0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(4242 + seed);
            let d = NormalDist::new(0.0, 1.0).unwrap();
            let values: Vec<Option<f64>> = (0..100)
                .map(|i| {
                    let level = if i < 30 {
                        0.0
                    } else if i < 70 {
                        5.0
                    } else {
                        -5.0
                    };
                    Some(level + d.sample(&mut rng))
                })
                .collect();
            let findings = detect_change_points(&series(values, Aggregate::Mean));
            let cps: Vec<i64> = findings
                .iter()
                .filter(|f| f.code == "change-point")
                .map(|f| f.evidence["bucket_index"].as_i64().unwrap())
                .collect();
            let hit30 = cps.iter().any(|c| (c - 30).abs() <= 2);
            let hit70 = cps.iter().any(|c| (c - 70).abs() <= 2);
            if hit30 && hit70 {
                ok += 1;
            }
        }
        assert!(ok >= 19, "both steps found in {ok}/20 seeds");
    }

    #[test]
    fn change_point_quiet_on_noise() {
        let mut quiet = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
            let d = NormalDist::new(0.0, 0.1).unwrap();
            let values: Vec<Option<f64>> = (0..100).map(|_| Some(1.0 + d.sample(&mut rng))).collect();
            let findings = detect_change_points(&series(values, Aggregate::Mean));
            if !findings.iter().any(|f| f.code == "change-point") {
                quiet += 1;
            }
        }
        assert!(quiet >= 95, "quiet in {quiet}/100 seeds");
    }

    #[test]
    fn trend_exact_ramp_flagged() {
        let values: Vec<Option<f64>> = (0..50).map(|i| Some(0.5 * i as f64)).collect();
        let finding = detect_trend(&series(values, Aggregate::Mean)).unwrap().unwrap();
        assert_eq!(finding.severity, Severity::Warn);
        assert!((finding.evidence["slope"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn trend_quiet_on_white_noise() {
        let mut flagged = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(1500 + seed);
            let d = NormalDist::new(0.0, 1.0).unwrap();
            let values: Vec<Option<f64>> = (0..60).map(|_| Some(d.sample(&mut rng))).collect();
            if detect_trend(&series(values, Aggregate::Mean)).unwrap().is_some() {
                flagged += 1;
            }
        }
        assert!(flagged <= 5, "white noise flagged in {flagged}/100 seeds");
    }

    #[test]
    fn step_series_demotes_trend_to_secondary() {
        let values: Vec<Option<f64>> = (0..60)
            .map(|i| Some(if i < 30 { 0.0 } else { 5.0 }))
            .collect();
        let findings = scan_series(&series(values, Aggregate::Mean));
        assert!(findings.iter().any(|f| f.code == "change-point"));
        let trend = findings.iter().find(|f| f.code == "trend-secondary");
        if let Some(t) = trend {
            assert_eq!(t.severity, Severity::Info);
            assert_eq!(t.evidence["secondary"], true);
        }
    }

    #[test]
    fn oscillation_matches_autocorrelation_oracle() {
        let values: Vec<Option<f64>> = (0..40)
            .map(|i| Some(if i % 2 == 0 { 10.0 } else { 0.0 }))
            .collect();
        let s = series(values, Aggregate::Count);
        // hand check: lag-2 autocorrelation of an alternating series
        let counts: Vec<f64> = s.values.iter().map(|v| v.unwrap()).collect();
        let r2 = autocorrelation(&counts, 2);
        assert!(r2 > 0.5, "lag-2 autocorrelation {r2}");
        let findings = detect_collection_anomalies(&s).unwrap();
        let osc = findings
            .iter()
            .find(|f| f.code == "collection-oscillation")
            .expect("oscillation finding");
        assert_eq!(osc.evidence["period"], 2);
    }

    #[test]
    fn poisson_counts_rarely_oscillate() {
        let mut quiet = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(7000 + seed);
            let d = rand_distr::Poisson::new(10.0).unwrap();
            let values: Vec<Option<f64>> = (0..60).map(|_| Some(d.sample(&mut rng))).collect();
            let findings = detect_collection_anomalies(&series(values, Aggregate::Count)).unwrap();
            if !findings.iter().any(|f| f.code == "collection-oscillation") {
                quiet += 1;
            }
        }
        assert!(quiet >= 90, "quiet in {quiet}/100 seeds");
    }

    #[test]
    fn gap_run_reported_with_bounds() {
        let mut values: Vec<Option<f64>> = vec![Some(5.0); 30];
        for v in values.iter_mut().take(15).skip(10) {
            *v = Some(0.0);
        }
        let findings = detect_collection_anomalies(&series(values, Aggregate::Count)).unwrap();
        let gap = findings.iter().find(|f| f.code == "collection-gap").unwrap();
        assert_eq!(gap.evidence["gap_start"], 10);
        assert_eq!(gap.evidence["gap_end"], 14);
        assert!(matches!(
            detect_collection_anomalies(&series(vec![Some(1.0); 30], Aggregate::Mean)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn category_matrix_counts_and_row_sums() {
        let schema = vec![
            ColumnSchema::new("t", crate::dataset::ColumnKind::Timestamp, ColumnRole::Time),
            ColumnSchema::new("cat", crate::dataset::ColumnKind::Categorical, ColumnRole::Feature),
        ];
        let day = 86_400;
        let mut content = String::from("t,cat\n");
        // category "a": 1 in bucket 0, 2 in bucket 1, 3 in bucket 2
        for (bucket, n) in [(0, 1), (1, 2), (2, 3)] {
            for i in 0..n {
                content.push_str(&format!("{},a\n", bucket * day + i));
            }
        }
        let ds = load(&content, &schema);
        let m = category_time_matrix(&ds, "cat", day).unwrap();
        assert_eq!(m.categories, vec!["a"]);
        assert_eq!(m.counts, vec![vec![1, 2, 3]]);
        let row_sum: u64 = m.counts[0].iter().sum();
        assert_eq!(row_sum, 6);
    }

    #[test]
    fn category_appearing_late_has_leading_zeros() {
        let schema = vec![
            ColumnSchema::new("t", crate::dataset::ColumnKind::Timestamp, ColumnRole::Time),
            ColumnSchema::new("cat", crate::dataset::ColumnKind::Categorical, ColumnRole::Feature),
        ];
        let day = 86_400;
        let mut content = String::from("t,cat\n");
        for b in 0..6 {
            content.push_str(&format!("{},base\n", b * day));
            if b >= 3 {
                content.push_str(&format!("{},late\n", b * day + 1));
                content.push_str(&format!("{},late\n", b * day + 2));
            }
        }
        let ds = load(&content, &schema);
        let m = category_time_matrix(&ds, "cat", day).unwrap();
        let late_row = m.categories.iter().position(|c| c == "late").unwrap();
        assert_eq!(m.counts[late_row][..3], [0, 0, 0]);
        assert!(m.counts[late_row][3..].iter().all(|c| *c > 0));
        // rows sorted by total desc: "late" has 6, "base" has 6 — tie broken by name
        assert_eq!(m.categories.len(), 2);
    }

    #[test]
    fn auto_width_targets_50_to_200_buckets() {
        // 100 days of data: daily buckets give 101, hourly 2400+, weekly 15
        let w = auto_bucket_width(0, 100 * 86_400);
        assert_eq!(w, 86_400);
        // 100 hours: hourly gives 101
        let w = auto_bucket_width(0, 100 * 3600);
        assert_eq!(w, 3600);
    }
}
