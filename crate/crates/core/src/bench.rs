//! Runtime scaling study: time triangulation, MNC selection and vortex
//! construction on seeded random point sets and fit `t ≈ k·m·n²`.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::delaunay_triangulate;
use crate::nerve::maximal_nerves;
use crate::synth::uniform_points;
use crate::vortex::{betti_number, build_vortex_nerve, DEFAULT_MAX_RINGS};

/// Side of the square the random points are drawn from.
pub const BENCH_EXTENT: f64 = 1000.0;
/// Point sets tried per `n` when looking for one with the requested MNC count.
pub const MAX_SELECTION_ATTEMPTS: u64 = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("no point counts given")]
    NoSizes,
    #[error("point counts must be strictly ascending and at least 3")]
    BadSizes,
    #[error("repeats must be at least 3, got {0}")]
    TooFewRepeats(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    /// Number of maximal nerve complexes in the timed point set.
    pub m: usize,
    /// Seed of the point set that was timed.
    pub point_seed: u64,
    pub times_s: Vec<f64>,
    pub median_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares scale in `t ≈ k·m·n²`, seconds.
    pub k: f64,
    /// Share of the variance of the median times explained by `k·m·n²`.
    pub r_squared: f64,
    /// Least-squares slope of `ln t` against `ln n`.
    pub log_log_slope: f64,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,m,point_seed,median_s,predicted_s\n");
        for r in &self.rows {
            let predicted = self.k * r.m as f64 * (r.n as f64).powi(2);
            let _ = writeln!(out, "{},{},{},{:.9},{:.9}", r.n, r.m, r.point_seed, r.median_s, predicted);
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "k = {:.6e} s, R^2 = {:.4}, log-log slope = {:.3}",
            self.k, self.r_squared, self.log_log_slope
        )
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv())
    }
}

fn point_seed(seed: u64, n: usize, attempt: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((n as u64) << 20)
        .wrapping_add(attempt)
}

fn mnc_count(n: usize, seed: u64) -> usize {
    delaunay_triangulate(&uniform_points(n, seed, BENCH_EXTENT))
        .ok()
        .and_then(|tri| maximal_nerves(&tri).ok())
        .map_or(0, |sel| sel.len())
}

/// Picks the first derived seed whose point set has exactly `m_target`
/// MNCs, or the closest one seen if none does.
pub fn select_point_seed(n: usize, m_target: usize, seed: u64) -> (u64, usize) {
    let mut best = (point_seed(seed, n, 0), usize::MAX);
    for attempt in 0..MAX_SELECTION_ATTEMPTS {
        let s = point_seed(seed, n, attempt);
        let m = mnc_count(n, s);
        if m == m_target {
            return (s, m);
        }
        if m.abs_diff(m_target) < best.1.abs_diff(m_target) {
            best = (s, m);
        }
    }
    best
}

/// One timed pass; returns the elapsed seconds.
pub fn time_once(n: usize, point_seed: u64) -> f64 {
    let points = uniform_points(n, point_seed, BENCH_EXTENT);
    let start = Instant::now();
    if let Ok(tri) = delaunay_triangulate(&points) {
        if let Ok(sel) = maximal_nerves(&tri) {
            for nerve in &sel.nerves {
                if let Ok(vn) = build_vortex_nerve(nerve, &tri, DEFAULT_MAX_RINGS) {
                    std::hint::black_box(betti_number(&vn).ok());
                }
            }
        }
    }
    start.elapsed().as_secs_f64()
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

/// Least-squares fit of `y ≈ k·x` through the origin, with its R².
pub fn fit_through_origin(x: &[f64], y: &[f64]) -> (f64, f64) {
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let k = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - k * a).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (k, r2)
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Times the geometric pipeline for each `n` on the calling thread and fits
/// the scaling law. Point sets are chosen so that the MNC count is
/// `m_target` where possible.
pub fn bench_complexity(
    n_values: &[usize],
    m_target: usize,
    seed: u64,
    repeats: usize,
) -> Result<BenchReport, BenchError> {
    if n_values.is_empty() {
        return Err(BenchError::NoSizes);
    }
    if n_values[0] < 3 || n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BenchError::BadSizes);
    }
    if repeats < 3 {
        return Err(BenchError::TooFewRepeats(repeats));
    }
    let selected: Vec<(usize, u64, usize)> = n_values
        .iter()
        .map(|&n| {
            let (s, m) = select_point_seed(n, m_target, seed);
            (n, s, m)
        })
        .collect();
    // Warm-up pass so allocation and cache effects do not land on the first
    // measured repeat.
    for &(n, s, _) in &selected {
        time_once(n, s);
    }
    // Repeats are interleaved across sizes so that a burst of machine noise
    // spreads over every n instead of skewing one of them.
    let mut times: Vec<Vec<f64>> = vec![Vec::with_capacity(repeats); selected.len()];
    for _ in 0..repeats {
        for (slot, &(n, s, _)) in times.iter_mut().zip(&selected) {
            slot.push(time_once(n, s));
        }
    }
    let rows: Vec<BenchRow> = selected
        .iter()
        .zip(times)
        .map(|(&(n, point_seed, m), times_s)| BenchRow {
            n,
            m,
            point_seed,
            median_s: median(&times_s),
            times_s,
        })
        .collect();
    let x: Vec<f64> = rows.iter().map(|r| r.m as f64 * (r.n as f64).powi(2)).collect();
    let t: Vec<f64> = rows.iter().map(|r| r.median_s).collect();
    let (k, r_squared) = fit_through_origin(&x, &t);
    let ln_n: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ln_t: Vec<f64> = t.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let log_log_slope = if rows.len() >= 2 { ols_slope(&ln_n, &ln_t) } else { f64::NAN };
    Ok(BenchReport {
        rows,
        k,
        r_squared,
        log_log_slope,
    })
}
