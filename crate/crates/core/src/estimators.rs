//! Late-set extraction and the statistics measured on it: disc counts at
//! fixed and late centers, ordered pair counts at a distance scale, log-log
//! exponent fits across sizes, and per-seed summaries.

use alloc::vec::Vec;

use crate::numeric::{ceil, ln, sqrt};
use crate::walk::{FirstHitField, Point};
use core::f64::consts::PI;
use rand_core::RngCore;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorError {
    /// `alpha` must be positive (the CLI additionally restricts to (0, 1]).
    InvalidAlpha,
    /// Torus side must be at least 2 for `ln n` to be positive.
    SideTooSmall,
    /// The field's walk is shorter than the late threshold, so lateness at
    /// that threshold is undefined for unvisited sites.
    InsufficientRun {
        needed: u64,
        walk_length: u64,
    },
    /// Disc/pair radii beyond `n/2` make the wrapped metric ambiguous.
    RadiusTooLarge,
    /// Fits need at least three distinct sizes with positive statistics.
    TooFewSamples,
    /// All sample sizes coincide.
    DegenerateSamples,
    EmptyInput,
}

impl core::fmt::Display for EstimatorError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EstimatorError::InvalidAlpha => f.write_str("alpha must be positive"),
            EstimatorError::SideTooSmall => f.write_str("torus side must be at least 2"),
            EstimatorError::InsufficientRun {
                needed,
                walk_length,
            } => write!(
                f,
                "walk length {walk_length} is below the late threshold {needed}"
            ),
            EstimatorError::RadiusTooLarge => f.write_str("radius exceeds half the torus side"),
            EstimatorError::TooFewSamples => {
                f.write_str("need at least three distinct sizes with positive statistics")
            }
            EstimatorError::DegenerateSamples => f.write_str("all sample sizes coincide"),
            EstimatorError::EmptyInput => f.write_str("empty input"),
        }
    }
}

/// Squared L²-distance between two torus points, using the coordinate-wise
/// minimal wrapped difference. Exact integer arithmetic.
#[inline]
pub fn torus_distance_sq(n: u32, a: Point, b: Point) -> u64 {
    let dx = a.x.abs_diff(b.x);
    let dy = a.y.abs_diff(b.y);
    let dx = dx.min(n - dx) as u64;
    let dy = dy.min(n - dy) as u64;
    dx * dx + dy * dy
}

/// Euclidean length of the minimal wrapped difference.
#[inline]
pub fn torus_distance(n: u32, a: Point, b: Point) -> f64 {
    sqrt(torus_distance_sq(n, a, b) as f64)
}

/// First-hit threshold for `α`-lateness: `⌈α · (4/π) · (n ln n)²⌉`.
pub fn late_threshold(alpha: f64, n: u32) -> Result<u64, EstimatorError> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(EstimatorError::InvalidAlpha);
    }
    if n < 2 {
        return Err(EstimatorError::SideTooSmall);
    }
    let nl = n as f64 * ln(n as f64);
    Ok(ceil(alpha * (4.0 / PI) * nl * nl) as u64)
}

/// The set of sites whose first visit happened at or after the late
/// threshold, in row-major order. Sites still unvisited at the end of the
/// run are included, which is sound because the run is required to have
/// reached the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct LateSet {
    pub n: u32,
    pub alpha: f64,
    pub threshold: u64,
    pub points: Vec<Point>,
}

impl LateSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Extracts the late set at level `alpha` from a first-hit field.
pub fn late_set(field: &FirstHitField, alpha: f64) -> Result<LateSet, EstimatorError> {
    let threshold = late_threshold(alpha, field.n)?;
    if field.walk_length < threshold {
        return Err(EstimatorError::InsufficientRun {
            needed: threshold,
            walk_length: field.walk_length,
        });
    }
    let n = field.n;
    let mut points = Vec::new();
    for (i, &hit) in field.hits.iter().enumerate() {
        if hit >= threshold {
            points.push(Point {
                x: (i % n as usize) as u32,
                y: (i / n as usize) as u32,
            });
        }
    }
    Ok(LateSet {
        n,
        alpha,
        threshold,
        points,
    })
}

/// Number of set points strictly within `radius` of `center` in the torus
/// metric.
pub fn disc_count(set: &LateSet, center: Point, radius: f64) -> Result<u64, EstimatorError> {
    if !(radius >= 0.0) || radius > set.n as f64 / 2.0 {
        return Err(EstimatorError::RadiusTooLarge);
    }
    let rsq = radius * radius;
    Ok(set
        .points
        .iter()
        .filter(|&&p| (torus_distance_sq(set.n, center, p) as f64) < rsq)
        .count() as u64)
}

/// Number of ordered pairs `(x, y)` of set points with wrapped distance
/// `≤ radius`; the diagonal is included, so the result is at least the set
/// size. Uses cell-list bucketing with bucket side at least `radius`.
pub fn pair_count(set: &LateSet, radius: f64) -> Result<u64, EstimatorError> {
    if !(radius >= 0.0) || radius > set.n as f64 / 2.0 {
        return Err(EstimatorError::RadiusTooLarge);
    }
    let n = set.n;
    let rsq = radius * radius;
    let within = |a: Point, b: Point| torus_distance_sq(n, a, b) as f64 <= rsq;

    // Bucket side at least the radius; also wide enough to cap the grid at
    // 256×256 cells, since finer grids only cost memory.
    let bucket_side = (ceil(radius) as u32).max(1).max(n.div_ceil(256));
    let grid = n / bucket_side;
    if grid < 4 || set.points.len() < 64 {
        let mut count = 0u64;
        for &a in &set.points {
            for &b in &set.points {
                if within(a, b) {
                    count += 1;
                }
            }
        }
        return Ok(count);
    }

    // Points bucketed into a grid×grid wrapped cell list; every cell has
    // side ≥ bucket_side ≥ radius (the last row/column absorbs the
    // remainder), so partners live in the 3×3 neighborhood.
    let cell_of = |c: u32| (c / bucket_side).min(grid - 1);
    let mut cells: Vec<Vec<Point>> = alloc::vec![Vec::new(); (grid * grid) as usize];
    for &p in &set.points {
        cells[(cell_of(p.y) * grid + cell_of(p.x)) as usize].push(p);
    }
    let mut count = 0u64;
    for &a in &set.points {
        let (cx, cy) = (cell_of(a.x), cell_of(a.y));
        for dy in [grid - 1, 0, 1] {
            for dx in [grid - 1, 0, 1] {
                let cell = &cells[(((cy + dy) % grid) * grid + (cx + dx) % grid) as usize];
                for &b in cell {
                    if within(a, b) {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// Draws a uniform point of the set from the supplied stream (a modulo draw;
/// the bias is negligible for any realistic set size and the draw is
/// reproducible from the stream). Returns `None` on an empty set.
pub fn sample_late_point(set: &LateSet, rng: &mut dyn RngCore) -> Option<Point> {
    if set.points.is_empty() {
        return None;
    }
    let idx = (rng.next_u64() % set.points.len() as u64) as usize;
    Some(set.points[idx])
}

/// Least-squares fit of `ln statistic` against `ln n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentFit {
    /// The `(ln n, ln statistic)` pairs actually used.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual per degree of freedom.
    pub residual: f64,
    /// Two standard errors of the slope.
    pub halfwidth: f64,
    /// Samples dropped because the statistic was zero or negative.
    pub excluded_zeros: usize,
}

/// Fits `ln statistic = slope · ln n + intercept` over `(n, statistic)`
/// samples. Nonpositive statistics are excluded and reported via
/// `excluded_zeros`; at least three distinct sizes must survive.
pub fn fit_exponent(samples: &[(f64, f64)]) -> Result<ExponentFit, EstimatorError> {
    let mut points = Vec::new();
    let mut excluded = 0usize;
    for &(n, s) in samples {
        if s > 0.0 {
            points.push((ln(n), ln(s)));
        } else {
            excluded += 1;
        }
    }
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_unstable_by(|a, b| a.total_cmp(b));
    xs.dedup();
    if xs.len() < 3 {
        return Err(if points.len() >= 3 && xs.len() == 1 {
            EstimatorError::DegenerateSamples
        } else {
            EstimatorError::TooFewSamples
        });
    }

    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    let dof = (points.len() as f64 - 2.0).max(1.0);
    let residual = sqrt(ssr / dof);
    let halfwidth = 2.0 * residual / sqrt(sxx);
    Ok(ExponentFit {
        points,
        slope,
        intercept,
        residual,
        halfwidth,
        excluded_zeros: excluded,
    })
}

/// Order statistics of per-seed values: lower median, mean, and the
/// quartile order statistics at indices `⌊(m−1)/4⌋` and `⌊3(m−1)/4⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSummary {
    pub sorted: Vec<f64>,
    pub median: f64,
    pub mean: f64,
    pub q1: f64,
    pub q3: f64,
}

pub fn summarize(values: &[f64]) -> Result<SeedSummary, EstimatorError> {
    if values.is_empty() {
        return Err(EstimatorError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.total_cmp(b));
    let m = sorted.len();
    let median = sorted[(m - 1) / 2];
    let mean = sorted.iter().sum::<f64>() / m as f64;
    let q1 = sorted[(m - 1) / 4];
    let q3 = sorted[3 * (m - 1) / 4];
    Ok(SeedSummary {
        sorted,
        median,
        mean,
        q1,
        q3,
    })
}
