//! Inter-arrival gap analysis over a labeled corpus.
//!
//! Related pairs share an event label; unrelated pairs have exactly one
//! labeled tweet. Pairs of two differently labeled tweets, and pairs of two
//! unlabeled tweets, belong to neither category. Bucketing the two gap
//! populations gives the empirical probability that a pair at a given gap
//! is related; a straight-line fit of its logarithm yields the decay rate
//! and from it the time constant used by the clustering pipeline.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use crate::config::{Bandwidth, RunConfig};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GapSample {
    pub related_gaps: Vec<f64>,
    pub unrelated_gaps: Vec<f64>,
    /// Both tweets unlabeled.
    pub excluded_unlabeled: usize,
    /// Both labeled, different events.
    pub excluded_cross_event: usize,
    /// Gap larger than `max_gap`.
    pub beyond_max_gap: usize,
}

impl GapSample {
    pub fn total_pairs(&self) -> usize {
        self.related_gaps.len()
            + self.unrelated_gaps.len()
            + self.excluded_unlabeled
            + self.excluded_cross_event
            + self.beyond_max_gap
    }

    pub fn analyzed_pairs(&self) -> usize {
        self.related_gaps.len() + self.unrelated_gaps.len()
    }
}

/// Enumerates unordered pairs `(i, j)`, `i < j`, in corpus order.
pub fn extract_gaps(corpus: &Corpus, max_gap: f64) -> Result<GapSample> {
    if !corpus.has_labels() {
        return Err(Error::NoLabels);
    }
    let tweets = corpus.tweets();
    let mut out = GapSample::default();
    for (i, a) in tweets.iter().enumerate() {
        for b in &tweets[i + 1..] {
            let gap = a.timestamp.abs_diff(b.timestamp) as f64;
            let related = match (&a.event_label, &b.event_label) {
                (None, None) => {
                    out.excluded_unlabeled += 1;
                    continue;
                }
                (Some(x), Some(y)) if x != y => {
                    out.excluded_cross_event += 1;
                    continue;
                }
                (Some(_), Some(_)) => true,
                _ => false,
            };
            if gap > max_gap {
                out.beyond_max_gap += 1;
            } else if related {
                out.related_gaps.push(gap);
            } else {
                out.unrelated_gaps.push(gap);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bucket {
    pub center: f64,
    pub related: usize,
    pub unrelated: usize,
    /// `related / (related + unrelated)`; `None` for an empty bucket.
    pub p_related: Option<f64>,
}

impl Bucket {
    pub fn total(&self) -> usize {
        self.related + self.unrelated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketCurve {
    pub bucket_width: f64,
    pub buckets: Vec<Bucket>,
}

/// Half-open buckets `[k*w, (k+1)*w)` covering `[0, max_gap)`.
pub fn bucketize(sample: &GapSample, width: f64, max_gap: f64) -> BucketCurve {
    assert!(width > 0.0, "bucket width must be positive");
    let n = (max_gap / width).ceil().max(0.0) as usize;
    let mut related = vec![0usize; n];
    let mut unrelated = vec![0usize; n];
    let slot = |g: f64| -> Option<usize> {
        if g < 0.0 || g >= max_gap {
            return None;
        }
        Some(((g / width).floor() as usize).min(n - 1))
    };
    for &g in &sample.related_gaps {
        if let Some(k) = slot(g) {
            related[k] += 1;
        }
    }
    for &g in &sample.unrelated_gaps {
        if let Some(k) = slot(g) {
            unrelated[k] += 1;
        }
    }
    let buckets = (0..n)
        .map(|k| {
            let total = related[k] + unrelated[k];
            Bucket {
                center: (k as f64 + 0.5) * width,
                related: related[k],
                unrelated: unrelated[k],
                p_related: (total > 0).then(|| related[k] as f64 / total as f64),
            }
        })
        .collect();
    BucketCurve {
        bucket_width: width,
        buckets,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// Per second; the decay rate is `-slope`.
    pub slope: f64,
    /// Natural log of the probability-model constant.
    pub intercept: f64,
    pub r_squared: f64,
    pub buckets_used: usize,
    /// Centers of buckets that met the pair threshold but had no related
    /// pairs, so were left out of the fit.
    pub zero_probability_buckets: Vec<f64>,
}

/// Unweighted least squares of `ln p_related` against bucket center over
/// buckets with at least `min_pairs` pairs and a positive probability.
pub fn fit_loglinear(curve: &BucketCurve, min_pairs: usize) -> Result<DecayFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut zero = Vec::new();
    for b in &curve.buckets {
        if b.total() < min_pairs {
            continue;
        }
        match b.p_related {
            Some(p) if p > 0.0 => {
                xs.push(b.center);
                ys.push(p.ln());
            }
            _ => zero.push(b.center),
        }
    }
    if xs.len() < 3 {
        return Err(Error::TooFewBuckets { found: xs.len() });
    }
    let line = least_squares(&xs, &ys);
    Ok(DecayFit {
        slope: line.slope,
        intercept: line.intercept,
        r_squared: line.r_squared,
        buckets_used: xs.len(),
        zero_probability_buckets: zero,
    })
}

struct Line {
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> Line {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum();
    let r_squared = if ss_tot <= f64::EPSILON * f64::EPSILON * n {
        // flat data: a flat line explains all of (no) variance
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Line {
        slope,
        intercept,
        r_squared,
    }
}

/// Decay time constant `-1 / slope`.
pub fn calibrate_tp(fit: &DecayFit) -> Result<f64> {
    if fit.slope < 0.0 {
        Ok(-1.0 / fit.slope)
    } else {
        Err(Error::NoDecay { slope: fit.slope })
    }
}

pub const DENSITY_GRID_POINTS: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCurve {
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

/// `n^(-1/5)` times the sample standard deviation.
pub fn scott_bandwidth(sample: &[f64]) -> Result<f64> {
    if sample.len() < 2 {
        return Err(Error::TooFewSamples { got: sample.len() });
    }
    let n = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / n;
    let var = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(var.sqrt() * n.powf(-0.2))
}

/// Gaussian kernel density on 512 evenly spaced points over `[0, upper]`.
pub fn kde_density(gaps: &[f64], bandwidth: Bandwidth, upper: f64) -> Result<DensityCurve> {
    if gaps.len() < 2 {
        return Err(Error::TooFewSamples { got: gaps.len() });
    }
    // Scott's rule errors on a constant sample; a fixed bandwidth does not
    // need the variance but a constant sample is still degenerate
    let h = match bandwidth {
        Bandwidth::Scott => scott_bandwidth(gaps)?,
        Bandwidth::Fixed(h) => {
            if gaps.iter().all(|&g| g == gaps[0]) {
                return Err(Error::ZeroVariance);
            }
            h
        }
    };
    let mut sorted = gaps.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let norm = 1.0 / (n * h * (2.0 * std::f64::consts::PI).sqrt());
    let cutoff = 8.0 * h;

    let step = upper / (DENSITY_GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..DENSITY_GRID_POINTS).map(|k| k as f64 * step).collect();
    let density = grid
        .iter()
        .map(|&x| {
            let lo = sorted.partition_point(|&g| g < x - cutoff);
            let hi = sorted.partition_point(|&g| g <= x + cutoff);
            let s: f64 = sorted[lo..hi]
                .iter()
                .map(|&g| {
                    let u = (x - g) / h;
                    (-0.5 * u * u).exp()
                })
                .sum();
            s * norm
        })
        .collect();
    Ok(DensityCurve {
        bandwidth: h,
        grid,
        density,
    })
}

/// `bucket_center,related,unrelated,p_related,ln_p`; undefined values are
/// left empty.
pub fn write_gap_curve(curve: &BucketCurve, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["bucket_center", "related", "unrelated", "p_related", "ln_p"])?;
    for b in &curve.buckets {
        let p = b.p_related.map(|p| p.to_string()).unwrap_or_default();
        let ln_p = b
            .p_related
            .filter(|&p| p > 0.0)
            .map(|p| p.ln().to_string())
            .unwrap_or_default();
        w.write_record([
            b.center.to_string(),
            b.related.to_string(),
            b.unrelated.to_string(),
            p,
            ln_p,
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// `t,related_density,unrelated_density`. A missing curve leaves its column
/// empty. Both curves must share a grid when present.
pub fn write_density(
    related: Option<&DensityCurve>,
    unrelated: Option<&DensityCurve>,
    upper: f64,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["t", "related_density", "unrelated_density"])?;
    let step = upper / (DENSITY_GRID_POINTS - 1) as f64;
    let cell = |c: Option<&DensityCurve>, k: usize| {
        c.map(|c| c.density[k].to_string()).unwrap_or_default()
    };
    for k in 0..DENSITY_GRID_POINTS {
        w.write_record([
            (k as f64 * step).to_string(),
            cell(related, k),
            cell(unrelated, k),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Every gap-analysis product for one corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct GapAnalysis {
    pub sample: GapSample,
    pub curve: BucketCurve,
    pub fit: DecayFit,
    /// `None` when the fitted slope shows no decay.
    pub recommended_t_p: Option<f64>,
    pub related_density: Result<DensityCurve, String>,
    pub unrelated_density: Result<DensityCurve, String>,
}

/// Extracts gaps, buckets them, fits the log-linear decay and estimates
/// both gap densities over `[0, max_gap]`. Fails only when no fit is
/// possible; a density that cannot be estimated is reported in place.
pub fn analyze_gaps(corpus: &Corpus, cfg: &RunConfig) -> Result<GapAnalysis> {
    let sample = extract_gaps(corpus, cfg.max_gap)?;
    let curve = bucketize(&sample, cfg.bucket_width, cfg.max_gap);
    let fit = fit_loglinear(&curve, cfg.min_pairs_per_bucket)?;
    let recommended_t_p = calibrate_tp(&fit).ok();
    let density =
        |g: &[f64]| kde_density(g, cfg.kde_bandwidth, cfg.max_gap).map_err(|e| e.to_string());
    Ok(GapAnalysis {
        related_density: density(&sample.related_gaps),
        unrelated_density: density(&sample.unrelated_gaps),
        sample,
        curve,
        fit,
        recommended_t_p,
    })
}
