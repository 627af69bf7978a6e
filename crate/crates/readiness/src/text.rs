//! Text-column readiness: normalize documents, embed them, project the
//! embedding to 2D, and inspect the projection for outliers, clusters,
//! and association with the target variable.
//!
//! The built-in embedding is TF-IDF, which keeps the pipeline
//! self-contained and deterministic; vectors from an external language
//! model can be imported instead via [`import_embeddings`] (one line per
//! document, space-separated floats).

use crate::error::{Error, Result};
use crate::finding::{Finding, Question, Severity};
use serde_json::json;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

/// Purity verdict thresholds: fail below the first, warn below the second.
pub const DEFAULT_PURITY_FAIL: f64 = 0.10;
pub const DEFAULT_PURITY_WARN: f64 = 0.25;

/// Default neighbor counts.
pub const DEFAULT_OUTLIER_K: usize = 5;
pub const DEFAULT_PURITY_K: usize = 10;

/// Token normalization config: a stopword list and a domain word map
/// (project-specific synonyms folded onto a canonical term).
#[derive(Debug, Clone, Default)]
pub struct TextNormalizer {
    pub stopwords: BTreeSet<String>,
    pub word_map: BTreeMap<String, String>,
}

/// Where an embedding came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingSource {
    Tfidf,
    ExternalFile,
}

/// Row-per-document embedding. All rows share the same dimension and
/// contain only finite values; all-empty documents embed as zero rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub vectors: Vec<Vec<f64>>,
    pub vocab: Option<Vec<String>>,
    pub source: EmbeddingSource,
}

impl EmbeddingMatrix {
    pub fn n_docs(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map(Vec::len).unwrap_or(0)
    }
}

/// 2D projection of an embedding with the variance fraction captured by
/// each axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection2D {
    pub points: Vec<[f64; 2]>,
    pub explained_variance: [f64; 2],
}

/// Verdict of the neighborhood-purity check, mapped to question A2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PurityVerdict {
    Pass,
    Warn,
    Fail,
}

/// Neighborhood purity: how strongly the projection's local structure
/// agrees with the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurityReport {
    /// 0 = no better than chance, 1 = perfectly aligned.
    pub score: f64,
    pub verdict: PurityVerdict,
}

/// Target values for the purity check.
#[derive(Debug, Clone)]
pub enum PurityTarget {
    Continuous(Vec<f64>),
    Categorical(Vec<String>),
}

/// One dense region of the projection.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSummary {
    pub id: usize,
    pub size: usize,
    /// Up to five terms with the highest mean TF-IDF weight in the cluster.
    pub top_terms: Vec<String>,
    /// Document closest to the cluster centroid.
    pub exemplar: usize,
}

/// Grid-density clustering result: a cluster id per point (`None` =
/// noise) and a summary per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    pub assignment: Vec<Option<usize>>,
    pub clusters: Vec<ClusterSummary>,
}

// ── normalization and embedding ───────────────────────────────────────

/// Lowercase, strip punctuation, split on whitespace, drop stopwords, and
/// fold domain synonyms through the word map.
///
/// ```
/// use readiness::text::{normalize_text, TextNormalizer};
///
/// let cfg = TextNormalizer::default();
/// assert_eq!(normalize_text("Forest FIRE!!", &cfg), vec!["forest", "fire"]);
/// assert!(normalize_text("", &cfg).is_empty());
/// ```
pub fn normalize_text(doc: &str, config: &TextNormalizer) -> Vec<String> {
    let lowered = doc.to_lowercase();
    let cleaned: String = lowered
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    cleaned
        .split_whitespace()
        .filter(|tok| !config.stopwords.contains(*tok))
        .map(|tok| config.word_map.get(tok).cloned().unwrap_or_else(|| tok.to_string()))
        .collect()
}

/// TF-IDF embedding with smoothed inverse document frequency
/// ln((1 + n)/(1 + df)) + 1 and L2-normalized rows. Documents that
/// normalize to nothing become zero rows and are reported as a B4 finding.
pub fn embed_corpus(
    docs: &[String],
    config: &TextNormalizer,
) -> Result<(EmbeddingMatrix, Vec<Finding>)> {
    if docs.len() < 2 {
        return Err(Error::InsufficientData("embedding needs ≥ 2 documents".into()));
    }
    let tokenized: Vec<Vec<String>> = docs.iter().map(|d| normalize_text(d, config)).collect();

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for tokens in &tokenized {
        let distinct: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
        for term in distinct {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let vocab: Vec<String> = df.keys().map(|s| s.to_string()).collect();
    let index: BTreeMap<&str, usize> = vocab
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let n = docs.len() as f64;
    let idf: Vec<f64> = vocab
        .iter()
        .map(|t| ((1.0 + n) / (1.0 + df[t.as_str()] as f64)).ln() + 1.0)
        .collect();

    let mut vectors = Vec::with_capacity(docs.len());
    let mut empty_docs = Vec::new();
    for (i, tokens) in tokenized.iter().enumerate() {
        let mut row = vec![0.0; vocab.len()];
        for tok in tokens {
            row[index[tok.as_str()]] += 1.0;
        }
        for (j, w) in row.iter_mut().enumerate() {
            *w *= idf[j];
        }
        let norm = row.iter().map(|w| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for w in row.iter_mut() {
                *w /= norm;
            }
        } else {
            empty_docs.push(i);
        }
        vectors.push(row);
    }

    let mut findings = Vec::new();
    if !empty_docs.is_empty() {
        findings.push(Finding::new(
            Question::B4,
            Severity::Warn,
            "empty-documents",
            format!(
                "{} document(s) contain no usable tokens and embed as zero vectors",
                empty_docs.len()
            ),
            json!({ "docs": empty_docs.iter().take(50).collect::<Vec<_>>(), "total": empty_docs.len() }),
        ));
    }
    Ok((
        EmbeddingMatrix {
            vectors,
            vocab: Some(vocab),
            source: EmbeddingSource::Tfidf,
        },
        findings,
    ))
}

/// Import external embedding vectors: one line per document,
/// space-separated decimal floats, constant arity.
pub fn import_embeddings(path: &Path, expected_rows: usize) -> Result<EmbeddingMatrix> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split_whitespace() {
            let v: f64 = field.parse().map_err(|_| {
                Error::InvalidArgument(format!(
                    "vector file line {}: {:?} is not a decimal number",
                    lineno + 1,
                    field
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "vector file line {}: non-finite entry {:?}",
                    lineno + 1,
                    field
                )));
            }
            row.push(v);
        }
        if let Some(first) = vectors.first() {
            if row.len() != first.len() {
                return Err(Error::InvalidArgument(format!(
                    "vector file line {}: arity {} differs from {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        vectors.push(row);
    }
    if vectors.len() != expected_rows {
        return Err(Error::InvalidArgument(format!(
            "vector file has {} rows but the corpus has {} documents",
            vectors.len(),
            expected_rows
        )));
    }
    if vectors.first().map(Vec::len).unwrap_or(0) < 2 {
        return Err(Error::InvalidArgument(
            "imported vectors must have dimension ≥ 2".into(),
        ));
    }
    Ok(EmbeddingMatrix {
        vectors,
        vocab: None,
        source: EmbeddingSource::ExternalFile,
    })
}

// ── projection ────────────────────────────────────────────────────────

const POWER_TOL: f64 = 1e-9;
const POWER_MAX_ITERS: usize = 1000;

/// Project an embedding onto its top two principal directions, computed
/// by power iteration with deflation on the mean-centered matrix. Sign
/// convention: the largest-magnitude loading of each direction is
/// positive.
pub fn project_2d(e: &EmbeddingMatrix) -> Result<Projection2D> {
    let n = e.n_docs();
    let d = e.dim();
    if n < 3 {
        return Err(Error::InsufficientData("projection needs ≥ 3 documents".into()));
    }
    if d < 2 {
        return Err(Error::InvalidArgument("projection needs dimension ≥ 2".into()));
    }
    let max_abs = e
        .vectors
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if max_abs < 1e-12 {
        return Err(Error::Degenerate("rank-0 embedding matrix".into()));
    }

    let mut mean = vec![0.0; d];
    for row in &e.vectors {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let centered: Vec<Vec<f64>> = e
        .vectors
        .iter()
        .map(|row| row.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();

    let denom = (n - 1) as f64;
    let total_var: f64 = (0..d)
        .map(|j| centered.iter().map(|r| r[j] * r[j]).sum::<f64>() / denom)
        .sum();
    if total_var < 1e-18 {
        // no variance: every document sits at the same point
        return Ok(Projection2D {
            points: vec![[0.0, 0.0]; n],
            explained_variance: [0.0, 0.0],
        });
    }

    // covariance-vector product without materializing the d×d matrix
    let cov_mul = |v: &[f64]| -> Vec<f64> {
        let mut xv = vec![0.0; n];
        for (i, row) in centered.iter().enumerate() {
            xv[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        let mut out = vec![0.0; d];
        for (i, row) in centered.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * xv[i];
            }
        }
        for o in out.iter_mut() {
            *o /= denom;
        }
        out
    };

    let diag: Vec<f64> = (0..d)
        .map(|j| centered.iter().map(|r| r[j] * r[j]).sum::<f64>() / denom)
        .collect();
    let power = |deflate: Option<(&[f64], f64)>| -> (Vec<f64>, f64) {
        let mut v = diag.clone();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in v.iter_mut() {
                *x /= norm;
            }
        } else {
            let peak = diag
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap_or(0);
            v = vec![0.0; d];
            v[peak] = 1.0;
        }
        for _ in 0..POWER_MAX_ITERS {
            let mut next = cov_mul(&v);
            if let Some((u, lambda)) = deflate {
                let proj: f64 = u.iter().zip(&next).map(|(a, b)| a * b).sum();
                // subtract λ(u·v)u using the already-multiplied vector:
                // (C − λuuᵀ)v = Cv − λ(u·v)u
                let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                let _ = proj;
                for (nx, ui) in next.iter_mut().zip(u) {
                    *nx -= lambda * uv * ui;
                }
            }
            let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-300 {
                break;
            }
            for x in next.iter_mut() {
                *x /= norm;
            }
            let dot: f64 = next.iter().zip(&v).map(|(a, b)| a * b).sum();
            v = next;
            if (1.0 - dot.abs()) < POWER_TOL {
                break;
            }
        }
        let cv = cov_mul(&v);
        let mut lambda: f64 = v.iter().zip(&cv).map(|(a, b)| a * b).sum();
        if let Some((u, l1)) = deflate {
            let uv: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
            lambda -= l1 * uv * uv;
        }
        (v, lambda.max(0.0))
    };

    let fix_sign = |v: &mut [f64]| {
        let peak = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap().then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if v[peak] < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    };

    let (mut v1, l1) = power(None);
    fix_sign(&mut v1);
    let (mut v2, l2) = power(Some((&v1, l1)));
    // re-orthogonalize against v1 before fixing the sign
    let overlap: f64 = v1.iter().zip(&v2).map(|(a, b)| a * b).sum();
    for (x, u) in v2.iter_mut().zip(&v1) {
        *x -= overlap * u;
    }
    let norm = v2.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1e-300 {
        for x in v2.iter_mut() {
            *x /= norm;
        }
    }
    fix_sign(&mut v2);
    let l2 = l2.min(l1);

    let points: Vec<[f64; 2]> = centered
        .iter()
        .map(|row| {
            [
                row.iter().zip(&v1).map(|(a, b)| a * b).sum(),
                row.iter().zip(&v2).map(|(a, b)| a * b).sum(),
            ]
        })
        .collect();
    Ok(Projection2D {
        points,
        explained_variance: [
            (l1 / total_var).clamp(0.0, 1.0),
            (l2 / total_var).clamp(0.0, 1.0),
        ],
    })
}

// ── outliers ──────────────────────────────────────────────────────────

/// Flag documents whose mean distance to their `k` nearest distinct
/// neighbors in embedding space exceeds the Hampel bound over all scores.
/// Distances are measured against the set of distinct vector values, so
/// duplicating the corpus leaves every score unchanged.
pub fn text_outliers(e: &EmbeddingMatrix, docs: &[String], k: usize) -> Result<Vec<Finding>> {
    let n = e.n_docs();
    if docs.len() != n {
        return Err(Error::InvalidArgument("docs/embedding length mismatch".into()));
    }
    if k == 0 || n <= k {
        return Err(Error::InvalidArgument(format!(
            "text outlier scan needs n > k ≥ 1 (n = {n}, k = {k})"
        )));
    }

    // distinct vector values
    let mut unique: Vec<&Vec<f64>> = Vec::new();
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    for row in &e.vectors {
        let bits: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
        if seen.insert(bits) {
            unique.push(row);
        }
    }
    if unique.len() < 2 {
        return Ok(vec![Finding::new(
            Question::B5,
            Severity::Info,
            "text-outliers-degenerate",
            "all documents embed identically; nearest-neighbor scan not applicable",
            json!({ "unique_vectors": unique.len() }),
        )]);
    }

    let scores: Vec<f64> = e
        .vectors
        .iter()
        .map(|row| {
            let mut dists: Vec<f64> = unique
                .iter()
                .filter(|u| *u != &row)
                .map(|u| euclidean(row, u))
                .collect();
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let take = k.min(dists.len());
            dists[..take].iter().sum::<f64>() / take as f64
        })
        .collect();

    let med = crate::stats::median(&scores);
    let mut scale = crate::stats::median_abs_deviation(&scores);
    if scale == 0.0 {
        scale = scores.iter().map(|s| (s - med).abs()).sum::<f64>() / scores.len() as f64;
    }
    if scale == 0.0 {
        return Ok(vec![Finding::new(
            Question::B5,
            Severity::Info,
            "text-outliers-degenerate",
            "all neighbor scores are equal; no outliers distinguishable",
            json!({ "score": med }),
        )]);
    }
    let bound = med + 3.0 * 1.4826 * scale;
    let flagged: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > bound)
        .map(|(i, _)| i)
        .collect();
    if flagged.is_empty() {
        return Ok(Vec::new());
    }
    let snippets: Vec<serde_json::Value> = flagged
        .iter()
        .take(20)
        .map(|i| {
            let snippet: String = docs[*i].chars().take(60).collect();
            json!({ "doc": i, "score": scores[*i], "snippet": snippet })
        })
        .collect();
    Ok(vec![Finding::new(
        Question::B5,
        Severity::Warn,
        "text-outliers",
        format!(
            "{} document(s) sit far from their nearest neighbors in embedding space",
            flagged.len()
        ),
        json!({
            "docs": flagged.iter().take(50).collect::<Vec<_>>(),
            "total": flagged.len(),
            "bound": bound,
            "snippets": snippets,
        }),
    )])
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

// ── neighborhood purity ───────────────────────────────────────────────

/// Agreement between the projected neighborhood structure and the target.
///
/// Categorical targets: mean fraction of each point's `k` nearest
/// neighbors sharing its label, rescaled so the chance level (sum of
/// squared class priors) maps to 0 and perfect purity stays 1.
/// Continuous targets: 1 − (mean |target − neighbor-mean target|) /
/// (mean |target − global mean|), floored at 0 — invariant to rescaling
/// the target's units.
pub fn neighborhood_purity(
    p: &Projection2D,
    target: &PurityTarget,
    k: usize,
    fail_below: f64,
    warn_below: f64,
) -> Result<PurityReport> {
    let n = p.points.len();
    let target_len = match target {
        PurityTarget::Continuous(t) => t.len(),
        PurityTarget::Categorical(t) => t.len(),
    };
    if target_len != n {
        return Err(Error::InvalidArgument("target/projection length mismatch".into()));
    }
    if k == 0 || n <= k {
        return Err(Error::InvalidArgument(format!(
            "purity needs n > k ≥ 1 (n = {n}, k = {k})"
        )));
    }

    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut dist: Vec<(f64, usize)> = (0..n)
                .filter(|j| *j != i)
                .map(|j| {
                    let dx = p.points[i][0] - p.points[j][0];
                    let dy = p.points[i][1] - p.points[j][1];
                    (dx * dx + dy * dy, j)
                })
                .collect();
            dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            dist[..k].iter().map(|(_, j)| *j).collect()
        })
        .collect();

    let score = match target {
        PurityTarget::Categorical(labels) => {
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for l in labels {
                *counts.entry(l.as_str()).or_insert(0) += 1;
            }
            let chance: f64 = counts
                .values()
                .map(|c| (*c as f64 / n as f64).powi(2))
                .sum();
            if 1.0 - chance < 1e-12 {
                return Err(Error::Degenerate("degenerate target".into()));
            }
            let raw: f64 = (0..n)
                .map(|i| {
                    let same = neighbors[i]
                        .iter()
                        .filter(|j| labels[**j] == labels[i])
                        .count();
                    same as f64 / k as f64
                })
                .sum::<f64>()
                / n as f64;
            ((raw - chance) / (1.0 - chance)).max(0.0)
        }
        PurityTarget::Continuous(t) => {
            let global = crate::stats::mean(t);
            let denom: f64 = t.iter().map(|v| (v - global).abs()).sum::<f64>() / n as f64;
            if denom <= 0.0 {
                return Err(Error::Degenerate("degenerate target".into()));
            }
            let num: f64 = (0..n)
                .map(|i| {
                    let knn_mean =
                        neighbors[i].iter().map(|j| t[*j]).sum::<f64>() / k as f64;
                    (t[i] - knn_mean).abs()
                })
                .sum::<f64>()
                / n as f64;
            (1.0 - num / denom).max(0.0)
        }
    };

    let verdict = if score < fail_below {
        PurityVerdict::Fail
    } else if score < warn_below {
        PurityVerdict::Warn
    } else {
        PurityVerdict::Pass
    };
    Ok(PurityReport { score, verdict })
}

// ── clusters ──────────────────────────────────────────────────────────

const CLUSTER_GRID: usize = 32;

/// Grid-density clustering of the projection: a 32×32 grid over the
/// bounding box, cells holding at least max(3, n/200) points are marked,
/// and marked cells merge 4-connectedly into clusters. Points outside
/// marked cells are noise. Clusters come back largest first with their
/// top TF-IDF terms and an exemplar document.
pub fn cluster_summaries(
    p: &Projection2D,
    e: &EmbeddingMatrix,
    docs: &[String],
) -> Result<ClusterReport> {
    let n = p.points.len();
    if n != e.n_docs() || n != docs.len() {
        return Err(Error::InvalidArgument(
            "projection, embedding, and docs must have the same length".into(),
        ));
    }
    let min_x = p.points.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min);
    let max_x = p.points.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max);
    let min_y = p.points.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min);
    let max_y = p.points.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max);
    let cell_of = |q: &[f64; 2]| -> (usize, usize) {
        let gx = if max_x > min_x {
            (((q[0] - min_x) / (max_x - min_x)) * CLUSTER_GRID as f64) as usize
        } else {
            0
        };
        let gy = if max_y > min_y {
            (((q[1] - min_y) / (max_y - min_y)) * CLUSTER_GRID as f64) as usize
        } else {
            0
        };
        (gx.min(CLUSTER_GRID - 1), gy.min(CLUSTER_GRID - 1))
    };

    let mut cell_points: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, q) in p.points.iter().enumerate() {
        cell_points.entry(cell_of(q)).or_default().push(i);
    }
    let threshold = 3.0f64.max(n as f64 / 200.0);
    let marked: BTreeSet<(usize, usize)> = cell_points
        .iter()
        .filter(|(_, pts)| pts.len() as f64 >= threshold)
        .map(|(c, _)| *c)
        .collect();

    // 4-connected flood fill over marked cells
    let mut cell_cluster: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut raw_clusters: Vec<Vec<(usize, usize)>> = Vec::new();
    for &cell in &marked {
        if cell_cluster.contains_key(&cell) {
            continue;
        }
        let id = raw_clusters.len();
        let mut stack = vec![cell];
        let mut cells = Vec::new();
        while let Some(c) = stack.pop() {
            if cell_cluster.contains_key(&c) {
                continue;
            }
            cell_cluster.insert(c, id);
            cells.push(c);
            let (x, y) = c;
            let mut push = |nx: isize, ny: isize| {
                if nx >= 0 && ny >= 0 {
                    let nc = (nx as usize, ny as usize);
                    if marked.contains(&nc) && !cell_cluster.contains_key(&nc) {
                        stack.push(nc);
                    }
                }
            };
            push(x as isize - 1, y as isize);
            push(x as isize + 1, y as isize);
            push(x as isize, y as isize - 1);
            push(x as isize, y as isize + 1);
        }
        raw_clusters.push(cells);
    }

    // points per raw cluster
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); raw_clusters.len()];
    for (cell, pts) in &cell_points {
        if let Some(id) = cell_cluster.get(cell) {
            members[*id].extend(pts.iter().copied());
        }
    }
    for m in members.iter_mut() {
        m.sort_unstable();
    }

    // order clusters by size descending, ties by first member
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by(|&a, &b| {
        members[b]
            .len()
            .cmp(&members[a].len())
            .then(members[a].first().cmp(&members[b].first()))
    });

    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut clusters = Vec::new();
    for (new_id, &old_id) in order.iter().enumerate() {
        let pts = &members[old_id];
        if pts.is_empty() {
            continue;
        }
        for &i in pts {
            assignment[i] = Some(new_id);
        }
        let cx = pts.iter().map(|&i| p.points[i][0]).sum::<f64>() / pts.len() as f64;
        let cy = pts.iter().map(|&i| p.points[i][1]).sum::<f64>() / pts.len() as f64;
        let exemplar = pts
            .iter()
            .copied()
            .min_by(|&a, &b| {
                let da = (p.points[a][0] - cx).powi(2) + (p.points[a][1] - cy).powi(2);
                let db = (p.points[b][0] - cx).powi(2) + (p.points[b][1] - cy).powi(2);
                da.partial_cmp(&db).unwrap().then(a.cmp(&b))
            })
            .unwrap();

        let top_terms = match &e.vocab {
            Some(vocab) if !vocab.is_empty() => {
                let dim = e.dim();
                let mut mean_w = vec![0.0; dim];
                for &i in pts {
                    for (w, v) in mean_w.iter_mut().zip(&e.vectors[i]) {
                        *w += v;
                    }
                }
                let mut idx: Vec<usize> = (0..dim).collect();
                idx.sort_by(|&a, &b| mean_w[b].partial_cmp(&mean_w[a]).unwrap().then(a.cmp(&b)));
                idx.into_iter()
                    .take(5)
                    .filter(|&j| mean_w[j] > 0.0)
                    .map(|j| vocab[j].clone())
                    .collect()
            }
            _ => Vec::new(),
        };

        clusters.push(ClusterSummary {
            id: new_id,
            size: pts.len(),
            top_terms,
            exemplar,
        });
    }

    Ok(ClusterReport {
        assignment,
        clusters,
    })
}
