//! Statistical primitives shared by every check: binning, kernel density
//! estimation, moments, rank correlation, power transforms, a normality
//! test, and ordinary least squares with confidence bands.
//!
//! All functions are pure and operate on plain `&[f64]` slices of
//! non-missing values; callers strip missing cells first.
//!
//! # Example
//!
//! ```
//! use readiness::stats::{histogram, BinRule};
//!
//! let values: Vec<f64> = (0..100).map(f64::from).collect();
//! let h = histogram(&values, BinRule::FreedmanDiaconis).unwrap();
//! assert_eq!(h.counts.iter().sum::<u64>(), 100);
//! ```

use crate::error::{Error, Result};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// Binning rule for [`histogram`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinRule {
    /// Width from 2·IQR·n^(−1/3), snapped to a round value.
    FreedmanDiaconis,
    /// Caller-chosen width, used verbatim.
    FixedWidth(f64),
    /// Caller-chosen bin count; the realized count may differ slightly
    /// because the width snaps to a round value.
    FixedCount(usize),
}

/// Equal-width histogram. Edges are anchored on a multiple of the bin
/// width, so the first edge is ≤ min and the last edge is ≥ max. Bins are
/// right-open except the last, which is closed.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub bin_rule: BinRuleKind,
    /// Set when the sample had no usable spread and a single catch-all bin
    /// was produced.
    pub degenerate: bool,
}

/// Which rule produced a histogram (payload-free mirror of [`BinRule`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinRuleKind {
    FreedmanDiaconis,
    FixedWidth,
    FixedCount,
}

/// Kernel density estimate on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

/// A fitted Box–Cox transform: `((v + shift)^lambda − 1) / lambda`,
/// natural log at lambda ≈ 0. The shift makes every input positive.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PowerTransform {
    pub lambda: f64,
    pub shift: f64,
}

/// Ordinary least squares fit with a pointwise 95% confidence band for the
/// mean response.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r2: f64,
    /// Grid over the x range with the fitted line and its 95% band.
    pub grid: Vec<f64>,
    pub fitted: Vec<f64>,
    pub ci95_lower: Vec<f64>,
    pub ci95_upper: Vec<f64>,
}

/// Result of the normality check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalityResult {
    pub statistic: f64,
    pub passed: bool,
    pub fitted_mean: f64,
    pub fitted_sigma: f64,
}

/// Sample moments. `skewness`/`excess_kurtosis` are `None` for degenerate
/// or too-small samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
}

/// Correlation method for [`correlation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

/// Correlation coefficient together with the pair count it was computed on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub coefficient: f64,
    pub n: usize,
}

// ── basic helpers ─────────────────────────────────────────────────────

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Bias-corrected sample variance (n − 1 denominator).
pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

pub fn sample_stddev(values: &[f64]) -> f64 {
    sample_variance(values).sqrt()
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Linear-interpolation quantile (the common "type 7" rule) on sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= n {
        sorted[n - 1]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

pub fn median(values: &[f64]) -> f64 {
    quantile_sorted(&sorted(values), 0.5)
}

pub fn interquartile_range(values: &[f64]) -> f64 {
    let s = sorted(values);
    quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25)
}

/// Median absolute deviation from the median (unscaled).
pub fn median_abs_deviation(values: &[f64]) -> f64 {
    let med = median(values);
    let devs: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
    median(&devs)
}

/// Mid-ranks (1-based, ties get the average rank).
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j share the average rank
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            ranks[order[k]] = avg;
        }
        i = j + 1;
    }
    ranks
}

// ── histogram ─────────────────────────────────────────────────────────

/// Snap a raw bin width to the nearest value on the {1, 2, 5}·10^m ladder
/// (nearest in log space), so edges land on round numbers.
fn nice_width(raw: f64) -> f64 {
    let exp = raw.log10().floor();
    let base = 10f64.powf(exp);
    let mut best = base;
    let mut best_dist = f64::INFINITY;
    for c in [1.0, 2.0, 5.0, 10.0] {
        let w = c * base;
        let d = (raw / w).ln().abs();
        if d < best_dist {
            best_dist = d;
            best = w;
        }
    }
    best
}

/// Build an equal-width histogram. With `FreedmanDiaconis` the width is
/// 2·IQR·n^(−1/3) snapped to a round value and the bin count is clamped to
/// [1, 512]. Degenerate samples (no spread) collapse to a single flagged
/// bin instead of failing.
pub fn histogram(values: &[f64], rule: BinRule) -> Result<Histogram> {
    let vals: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if vals.is_empty() {
        return Err(Error::InsufficientData("histogram of empty sample".into()));
    }
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    let kind = match rule {
        BinRule::FreedmanDiaconis => BinRuleKind::FreedmanDiaconis,
        BinRule::FixedWidth(_) => BinRuleKind::FixedWidth,
        BinRule::FixedCount(_) => BinRuleKind::FixedCount,
    };

    let degenerate_hist = |kind| {
        let center = min;
        Histogram {
            edges: vec![center - 0.5, center + 0.5],
            counts: vec![vals.len() as u64],
            bin_rule: kind,
            degenerate: true,
        }
    };

    if range <= 0.0 {
        return Ok(degenerate_hist(kind));
    }

    let width = match rule {
        BinRule::FreedmanDiaconis => {
            let iqr = interquartile_range(&vals);
            if iqr <= 0.0 {
                return Ok(degenerate_hist(kind));
            }
            let raw = 2.0 * iqr * (vals.len() as f64).powf(-1.0 / 3.0);
            nice_width(raw)
        }
        BinRule::FixedWidth(w) => {
            if !(w > 0.0) {
                return Err(Error::InvalidArgument("bin width must be positive".into()));
            }
            w
        }
        BinRule::FixedCount(k) => {
            if k == 0 {
                return Err(Error::InvalidArgument("bin count must be ≥ 1".into()));
            }
            nice_width(range / k as f64)
        }
    };

    // Anchor the first edge on a multiple of the width.
    let mut edges = Vec::new();
    let anchor = (min / width).floor() * width;
    let mut e = anchor;
    edges.push(e);
    while e < max {
        e = anchor + edges.len() as f64 * width;
        edges.push(e);
    }
    if edges.len() - 1 > 512 {
        // Fall back to 512 equal bins over [min, max].
        edges = (0..=512).map(|i| min + range * i as f64 / 512.0).collect();
    }

    let k = edges.len() - 1;
    let mut counts = vec![0u64; k];
    for v in &vals {
        let mut idx = ((v - edges[0]) / (edges[k] - edges[0]) * k as f64).floor() as usize;
        if idx >= k {
            idx = k - 1;
        }
        // Correct for floating error at bin boundaries.
        while idx > 0 && *v < edges[idx] {
            idx -= 1;
        }
        while idx + 1 < k && *v >= edges[idx + 1] {
            idx += 1;
        }
        counts[idx] += 1;
    }

    Ok(Histogram {
        edges,
        counts,
        bin_rule: kind,
        degenerate: false,
    })
}

// ── kernel density estimate ───────────────────────────────────────────

/// Gaussian KDE with Silverman's bandwidth 0.9·min(σ, IQR/1.34)·n^(−1/5),
/// evaluated on a uniform grid spanning [min − 3h, max + 3h].
pub fn kde(values: &[f64], grid_size: usize) -> Result<DensityCurve> {
    if values.len() < 2 {
        return Err(Error::InsufficientData("kde needs ≥ 2 values".into()));
    }
    if grid_size < 16 {
        return Err(Error::InvalidArgument("kde grid_size must be ≥ 16".into()));
    }
    let sd = sample_stddev(values);
    let iqr = interquartile_range(values);
    if sd <= 0.0 {
        return Err(Error::Degenerate("degenerate sample".into()));
    }
    let scale = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let h = 0.9 * scale * (values.len() as f64).powf(-0.2);

    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = min - 3.0 * h;
    let hi = max + 3.0 * h;
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| lo + (hi - lo) * i as f64 / (grid_size - 1) as f64)
        .collect();

    let norm = 1.0 / (values.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let density: Vec<f64> = grid
        .iter()
        .map(|g| {
            let s: f64 = values
                .iter()
                .map(|x| {
                    let z = (g - x) / h;
                    (-0.5 * z * z).exp()
                })
                .sum();
            s * norm
        })
        .collect();

    Ok(DensityCurve {
        grid,
        density,
        bandwidth: h,
    })
}

/// Trapezoid integral of a density curve over its grid.
pub fn trapezoid_integral(curve: &DensityCurve) -> f64 {
    curve
        .grid
        .windows(2)
        .zip(curve.density.windows(2))
        .map(|(g, d)| (g[1] - g[0]) * (d[0] + d[1]) / 2.0)
        .sum()
}

// ── moments ───────────────────────────────────────────────────────────

/// Sample moments: bias-corrected variance, plug-in skewness and excess
/// kurtosis. Skewness needs ≥ 3 values and nonzero spread.
pub fn moments(values: &[f64]) -> Result<Moments> {
    if values.len() < 2 {
        return Err(Error::InsufficientData("moments need ≥ 2 values".into()));
    }
    let n = values.len() as f64;
    let m = mean(values);
    let m2 = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let variance = m2 * n / (n - 1.0);
    let (skewness, excess_kurtosis) = if values.len() >= 3 && m2 > 0.0 {
        let m3 = values.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
        let m4 = values.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
        (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2) - 3.0))
    } else {
        (None, None)
    };
    Ok(Moments {
        mean: m,
        variance,
        skewness,
        excess_kurtosis,
    })
}

// ── correlation ───────────────────────────────────────────────────────

/// Pearson or Spearman correlation over pairwise-finite entries. Spearman
/// is Pearson over mid-ranks with average-rank ties.
pub fn correlation(x: &[f64], y: &[f64], method: CorrelationMethod) -> Result<Correlation> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("correlation inputs differ in length".into()));
    }
    let pairs: (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y.iter())
        .filter(|(a, b)| a.is_finite() && b.is_finite())
        .map(|(a, b)| (*a, *b))
        .unzip();
    let (xf, yf) = pairs;
    if xf.len() < 3 {
        return Err(Error::InsufficientData(
            "correlation needs ≥ 3 complete pairs".into(),
        ));
    }
    let (xs, ys) = match method {
        CorrelationMethod::Pearson => (xf.clone(), yf.clone()),
        CorrelationMethod::Spearman => (midranks(&xf), midranks(&yf)),
    };
    let mx = mean(&xs);
    let my = mean(&ys);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in xs.iter().zip(ys.iter()) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::Degenerate("zero spread in correlation input".into()));
    }
    Ok(Correlation {
        coefficient: sxy / (sxx * syy).sqrt(),
        n: xf.len(),
    })
}

// ── Box–Cox ───────────────────────────────────────────────────────────

/// Fit a Box–Cox transform by scanning λ ∈ [−3, 3] in steps of 0.01 for
/// the maximum profile log-likelihood. A shift of max(0, ε − min) with
/// ε = 1e-6·spread makes every input positive before the transform.
pub fn box_cox_fit(values: &[f64]) -> Result<PowerTransform> {
    if values.len() < 20 {
        return Err(Error::InsufficientData("box-cox fit needs ≥ 20 values".into()));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = max - min;
    if spread <= 0.0 {
        return Err(Error::Degenerate("zero spread".into()));
    }
    let eps = 1e-6 * spread;
    let shift = (eps - min).max(0.0);
    let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
    let log_sum: f64 = shifted.iter().map(|v| v.ln()).sum();
    let n = shifted.len() as f64;

    let mut best_lambda = 0.0;
    let mut best_ll = f64::NEG_INFINITY;
    for i in 0..=600 {
        let lambda = (i as f64 - 300.0) / 100.0;
        let t = PowerTransform { lambda, shift: 0.0 };
        let y: Vec<f64> = shifted.iter().map(|v| t.transform_one(*v)).collect();
        let my = mean(&y);
        let var = y.iter().map(|v| (v - my).powi(2)).sum::<f64>() / n;
        if var <= 0.0 {
            continue;
        }
        let ll = -0.5 * n * var.ln() + (lambda - 1.0) * log_sum;
        if ll > best_ll {
            best_ll = ll;
            best_lambda = lambda;
        }
    }
    Ok(PowerTransform {
        lambda: best_lambda,
        shift,
    })
}

impl PowerTransform {
    fn transform_one(&self, v: f64) -> f64 {
        let s = v + self.shift;
        if self.lambda.abs() < 1e-9 {
            s.ln()
        } else {
            (s.powf(self.lambda) - 1.0) / self.lambda
        }
    }
}

/// Apply a Box–Cox transform elementwise. Strictly monotone in the input.
pub fn box_cox_apply(t: &PowerTransform, values: &[f64]) -> Result<Vec<f64>> {
    for v in values {
        if v + t.shift <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "non-positive shifted value {} in box-cox apply",
                v + t.shift
            )));
        }
    }
    Ok(values.iter().map(|v| t.transform_one(*v)).collect())
}

// ── normality ─────────────────────────────────────────────────────────

/// Anderson–Darling normality test with estimated parameters. The small-
/// sample-adjusted statistic A²·(1 + 0.75/n + 2.25/n²) is compared against
/// the critical values 0.752 (α = 0.05) and 1.035 (α = 0.01).
pub fn normality_check(values: &[f64], alpha: f64) -> Result<NormalityResult> {
    if values.len() < 20 {
        return Err(Error::InsufficientData(
            "normality check needs ≥ 20 values".into(),
        ));
    }
    let threshold = if (alpha - 0.05).abs() < 1e-12 {
        0.752
    } else if (alpha - 0.01).abs() < 1e-12 {
        1.035
    } else {
        return Err(Error::InvalidArgument(
            "normality alpha must be 0.05 or 0.01".into(),
        ));
    };
    let m = mean(values);
    let s = sample_stddev(values);
    if s <= 0.0 {
        return Err(Error::Degenerate("zero spread".into()));
    }
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut z = sorted(values);
    for v in z.iter_mut() {
        *v = std_normal.cdf((*v - m) / s).clamp(1e-300, 1.0 - 1e-16);
    }
    let n = z.len();
    let mut a2 = 0.0;
    for i in 0..n {
        a2 += (2 * i + 1) as f64 * (z[i].ln() + (1.0 - z[n - 1 - i]).ln());
    }
    let a2 = -(n as f64) - a2 / n as f64;
    let nf = n as f64;
    let adjusted = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    Ok(NormalityResult {
        statistic: adjusted,
        passed: adjusted < threshold,
        fitted_mean: m,
        fitted_sigma: s,
    })
}

// ── linear fit ────────────────────────────────────────────────────────

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
pub fn t_test_pvalue(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    if df <= 0.0 {
        return 1.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid t distribution");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

/// Quantile of the t distribution with `df` degrees of freedom.
pub fn t_quantile(p: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid t distribution");
    dist.inverse_cdf(p)
}

/// Ordinary least squares of y on x with a 95% confidence band for the
/// mean response (t quantile, n − 2 degrees of freedom) evaluated on a
/// 100-point grid over the x range.
pub fn linear_fit_ci(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("linear fit inputs differ in length".into()));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData("linear fit needs ≥ 3 points".into()));
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx <= 0.0 {
        return Err(Error::Degenerate("degenerate x in linear fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y.iter())
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    let ss_tot: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let df = (n - 2) as f64;
    let sigma2 = if df > 0.0 { ss_res / df } else { 0.0 };
    let slope_stderr = (sigma2 / sxx).sqrt();
    let tq = t_quantile(0.975, df);

    let xmin = x.iter().copied().fold(f64::INFINITY, f64::min);
    let xmax = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let grid: Vec<f64> = (0..100)
        .map(|i| xmin + (xmax - xmin) * i as f64 / 99.0)
        .collect();
    let mut fitted = Vec::with_capacity(grid.len());
    let mut lower = Vec::with_capacity(grid.len());
    let mut upper = Vec::with_capacity(grid.len());
    for g in &grid {
        let f = intercept + slope * g;
        let half = tq * (sigma2 * (1.0 / n as f64 + (g - mx) * (g - mx) / sxx)).sqrt();
        fitted.push(f);
        lower.push(f - half);
        upper.push(f + half);
    }
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
        r2,
        grid,
        fitted,
        ci95_lower: lower,
        ci95_upper: upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp, Normal as NormalDist};

    fn standard_normal(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = NormalDist::new(0.0, 1.0).unwrap();
        (0..n).map(|_| d.sample(&mut rng)).collect()
    }

    #[test]
    fn fd_histogram_matches_formula_oracle() {
        // IQR of 0..=99 is 49.5, so the raw width is 2·49.5·100^(−1/3).
        let values: Vec<f64> = (0..100).map(f64::from).collect();
        let raw = 2.0 * 49.5 * 100f64.powf(-1.0 / 3.0);
        assert!((raw - 21.33).abs() < 0.01);
        let h = histogram(&values, BinRule::FreedmanDiaconis).unwrap();
        assert_eq!(h.counts.len(), 5);
        assert_eq!(h.counts.iter().sum::<u64>(), 100);
        assert!(!h.degenerate);
    }

    #[test]
    fn degenerate_sample_collapses_to_one_flagged_bin() {
        let h = histogram(&[5.0, 5.0, 5.0], BinRule::FreedmanDiaconis).unwrap();
        assert_eq!(h.counts, vec![3]);
        assert!(h.degenerate);
    }

    #[test]
    fn fixed_count_bins_land_on_round_edges() {
        let values: Vec<f64> = (0..=7).map(f64::from).collect();
        let h = histogram(&values, BinRule::FixedCount(4)).unwrap();
        assert_eq!(h.edges, vec![0.0, 2.0, 4.0, 6.0, 8.0]);
        assert_eq!(h.counts, vec![2, 2, 2, 2]);
    }

    #[test]
    fn kde_peak_matches_unit_normal_density() {
        let values = standard_normal(10_000, 11);
        let curve = kde(&values, 512).unwrap();
        let (argmax, peak) = curve
            .grid
            .iter()
            .zip(curve.density.iter())
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(g, d)| (*g, *d))
            .unwrap();
        // analytic N(0,1) density peaks at 1/sqrt(2π) ≈ 0.3989
        assert!((peak - 0.3989).abs() < 0.03, "peak {peak}");
        assert!(argmax.abs() < 0.2, "argmax {argmax}");
        let integral = trapezoid_integral(&curve);
        assert!((0.99..=1.01).contains(&integral), "integral {integral}");
    }

    #[test]
    fn kde_symmetric_sample_gives_symmetric_density() {
        let values = vec![-3.0, -2.0, -1.0, 1.0, 2.0, 3.0];
        let curve = kde(&values, 257).unwrap();
        let k = curve.grid.len();
        for i in 0..k {
            let diff = (curve.density[i] - curve.density[k - 1 - i]).abs();
            assert!(diff < 1e-9, "asymmetry {diff} at {i}");
        }
    }

    #[test]
    fn kde_rejects_zero_spread() {
        assert!(matches!(kde(&[2.0, 2.0, 2.0], 64), Err(Error::Degenerate(_))));
    }

    #[test]
    fn moments_hand_arithmetic() {
        let m = moments(&[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.variance, 1.0);
        let flat = moments(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(flat.variance, 0.0);
        assert!(flat.skewness.is_none());
    }

    #[test]
    fn moments_exponential_skewness_near_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = Exp::new(1.0).unwrap();
        let values: Vec<f64> = (0..200_00).map(|_| d.sample(&mut rng)).collect();
        let m = moments(&values).unwrap();
        let skew = m.skewness.unwrap();
        assert!((skew - 2.0).abs() < 0.15, "skewness {skew}");
    }

    #[test]
    fn correlation_trivial_cases() {
        let p = correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0], CorrelationMethod::Pearson)
            .unwrap();
        assert!((p.coefficient - 1.0).abs() < 1e-12);
        let n = correlation(&[1.0, 2.0, 3.0], &[-1.0, -2.0, -3.0], CorrelationMethod::Pearson)
            .unwrap();
        assert!((n.coefficient + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_matches_rank_formula_oracle() {
        // no ties: 1 − 6Σd²/(n(n²−1)) with d = [0, 1, −1, 0] gives 0.8
        let s = correlation(
            &[1.0, 2.0, 3.0, 4.0],
            &[1.0, 3.0, 2.0, 4.0],
            CorrelationMethod::Spearman,
        )
        .unwrap();
        assert!((s.coefficient - 0.8).abs() < 1e-12);
    }

    #[test]
    fn box_cox_lambda_near_zero_for_lognormal() {
        let values: Vec<f64> = standard_normal(5000, 3).iter().map(|v| v.exp()).collect();
        let t = box_cox_fit(&values).unwrap();
        assert!(t.lambda.abs() <= 0.15, "lambda {}", t.lambda);
        assert_eq!(t.shift, 0.0);
    }

    #[test]
    fn box_cox_lambda_near_one_for_normal_positive() {
        let values: Vec<f64> = standard_normal(5000, 4).iter().map(|v| v + 10.0).collect();
        let t = box_cox_fit(&values).unwrap();
        assert!((0.7..=1.3).contains(&t.lambda), "lambda {}", t.lambda);
    }

    #[test]
    fn box_cox_apply_definitions() {
        let id = PowerTransform { lambda: 1.0, shift: 0.0 };
        let out = box_cox_apply(&id, &[3.0]).unwrap();
        assert!((out[0] - 2.0).abs() < 1e-12); // shifted input − 1

        let log = PowerTransform { lambda: 0.0, shift: 0.0 };
        let out = box_cox_apply(&log, &[std::f64::consts::E]).unwrap();
        assert!((out[0] - 1.0).abs() < 1e-12);

        let sq = PowerTransform { lambda: 2.0, shift: 0.0 };
        let out = box_cox_apply(&sq, &[3.0]).unwrap();
        assert!((out[0] - 4.0).abs() < 1e-12);

        assert!(box_cox_apply(&log, &[0.0]).is_err());
    }

    #[test]
    fn normality_monte_carlo_pass_and_fail_rates() {
        let mut normal_pass = 0;
        let mut exp_fail = 0;
        for seed in 0..100 {
            let values = standard_normal(1000, 1000 + seed);
            if normality_check(&values, 0.01).unwrap().passed {
                normal_pass += 1;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
            let d = Exp::new(1.0).unwrap();
            let values: Vec<f64> = (0..1000).map(|_| d.sample(&mut rng)).collect();
            if !normality_check(&values, 0.01).unwrap().passed {
                exp_fail += 1;
            }
        }
        assert!(normal_pass >= 95, "normal passed {normal_pass}/100");
        assert!(exp_fail >= 99, "exponential failed {exp_fail}/100");
    }

    #[test]
    fn normality_fitted_mean_is_sample_mean() {
        let values = standard_normal(500, 9);
        let r = normality_check(&values, 0.05).unwrap();
        assert_eq!(r.fitted_mean, mean(&values));
    }

    #[test]
    fn linear_fit_exact_line() {
        let x: Vec<f64> = (0..20).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let fit = linear_fit_ci(&x, &y).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-9);
        assert!((fit.intercept - 1.0).abs() < 1e-9);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        for (lo, hi) in fit.ci95_lower.iter().zip(fit.ci95_upper.iter()) {
            assert!((hi - lo).abs() < 1e-9);
        }
    }

    #[test]
    fn linear_fit_constant_y() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y = vec![4.0; 10];
        let fit = linear_fit_ci(&x, &y).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r2, 0.0);
    }

    #[test]
    fn linear_fit_ci_covers_true_slope() {
        let mut covered = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
            let noise = NormalDist::new(0.0, 1.0).unwrap();
            let x: Vec<f64> = (0..50).map(f64::from).collect();
            let y: Vec<f64> = x.iter().map(|v| v + noise.sample(&mut rng)).collect();
            let fit = linear_fit_ci(&x, &y).unwrap();
            let tq = t_quantile(0.975, 48.0);
            let lo = fit.slope - tq * fit.slope_stderr;
            let hi = fit.slope + tq * fit.slope_stderr;
            if (lo..=hi).contains(&1.0) {
                covered += 1;
            }
        }
        assert!(covered >= 90, "true slope covered {covered}/100");
    }

    #[test]
    fn linear_fit_band_ordering() {
        let x: Vec<f64> = (0..30).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.5 * v + (v * 7.0).sin()).collect();
        let fit = linear_fit_ci(&x, &y).unwrap();
        for i in 0..fit.grid.len() {
            assert!(fit.ci95_lower[i] <= fit.fitted[i]);
            assert!(fit.fitted[i] <= fit.ci95_upper[i]);
        }
    }

    #[test]
    fn midranks_average_ties() {
        assert_eq!(midranks(&[10.0, 20.0, 20.0, 30.0]), vec![1.0, 2.5, 2.5, 4.0]);
    }
}
