//! Frame loading, binarization and hole (dark region) extraction.

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::DynamicImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest dark component kept as a hole unless overridden.
pub const DEFAULT_MIN_HOLE_AREA: usize = 9;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("frame directory {0} does not exist")]
    MissingDir(PathBuf),
    #[error("invalid frame pattern {pattern:?}: {reason}")]
    BadPattern { pattern: String, reason: String },
    #[error("no frames matched {pattern:?} in {dir}")]
    NoFrames { dir: PathBuf, pattern: String },
    #[error("cannot read frame {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("cannot list {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("frame must be at least 1x1 and match its pixel buffer ({width}x{height}, {len} pixels)")]
    BadDimensions { width: usize, height: usize, len: usize },
    #[error("invalid threshold {0:?}: expected `otsu` or an integer in 0..=255")]
    BadThreshold(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    pub index: usize,
    pub source: Option<PathBuf>,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>, index: usize) -> Result<Self, IngestError> {
        if width == 0 || height == 0 || pixels.len() != width * height {
            return Err(IngestError::BadDimensions {
                width,
                height,
                len: pixels.len(),
            });
        }
        Ok(GrayFrame {
            width,
            height,
            pixels,
            index,
            source: None,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Converts a decoded image, using round(0.299 R + 0.587 G + 0.114 B)
    /// for color input.
    pub fn from_image(img: &DynamicImage, index: usize) -> Result<Self, IngestError> {
        let (width, height) = (img.width() as usize, img.height() as usize);
        let pixels = match img {
            DynamicImage::ImageLuma8(gray) => gray.as_raw().clone(),
            DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) => {
                img.to_luma8().into_raw()
            }
            _ => img.to_rgb8().pixels().map(|p| luma(p.0)).collect(),
        };
        GrayFrame::new(width, height, pixels, index)
    }
}

pub fn luma([r, g, b]: [u8; 3]) -> u8 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
        .round()
        .clamp(0.0, 255.0) as u8
}

/// Compares file names so that embedded digit runs order numerically
/// (`fr2` before `fr10`).
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut ai, mut bi) = (a.chars().peekable(), b.chars().peekable());
    loop {
        match (ai.peek().copied(), bi.peek().copied()) {
            (None, None) => return a.cmp(b),
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) if x.is_ascii_digit() && y.is_ascii_digit() => {
                let mut da = String::new();
                while let Some(c) = ai.peek().copied().filter(char::is_ascii_digit) {
                    da.push(c);
                    ai.next();
                }
                let mut db = String::new();
                while let Some(c) = bi.peek().copied().filter(char::is_ascii_digit) {
                    db.push(c);
                    bi.next();
                }
                let ta = da.trim_start_matches('0');
                let tb = db.trim_start_matches('0');
                let ord = ta.len().cmp(&tb.len()).then_with(|| ta.cmp(tb));
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            (Some(x), Some(y)) => {
                if x != y {
                    return x.cmp(&y);
                }
                ai.next();
                bi.next();
            }
        }
    }
}

/// Lists the files in `dir` whose names match `pattern`, in natural order.
pub fn list_frames(dir: &Path, pattern: &str) -> Result<Vec<PathBuf>, IngestError> {
    if !dir.is_dir() {
        return Err(IngestError::MissingDir(dir.to_path_buf()));
    }
    let matcher = glob::Pattern::new(pattern).map_err(|e| IngestError::BadPattern {
        pattern: pattern.to_string(),
        reason: e.to_string(),
    })?;
    let entries = std::fs::read_dir(dir).map_err(|source| IngestError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| IngestError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
            if matcher.matches(name) {
                names.push(name.to_string());
            }
        }
    }
    if names.is_empty() {
        return Err(IngestError::NoFrames {
            dir: dir.to_path_buf(),
            pattern: pattern.to_string(),
        });
    }
    names.sort_by(|a, b| natural_cmp(a, b));
    Ok(names.into_iter().map(|n| dir.join(n)).collect())
}

pub fn load_frame(path: &Path, index: usize) -> Result<GrayFrame, IngestError> {
    let img = image::open(path).map_err(|source| IngestError::Unreadable {
        path: path.to_path_buf(),
        source,
    })?;
    let mut frame = GrayFrame::from_image(&img, index)?;
    frame.source = Some(path.to_path_buf());
    Ok(frame)
}

/// Loads every frame matching `pattern`, indexed 0..f-1 in natural filename
/// order.
pub fn load_frames(dir: &Path, pattern: &str) -> Result<Vec<GrayFrame>, IngestError> {
    list_frames(dir, pattern)?
        .iter()
        .enumerate()
        .map(|(i, p)| load_frame(p, i))
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdMethod {
    Fixed(u8),
    #[default]
    Otsu,
}

impl FromStr for ThresholdMethod {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("otsu") {
            return Ok(ThresholdMethod::Otsu);
        }
        s.parse::<u8>()
            .map(ThresholdMethod::Fixed)
            .map_err(|_| IngestError::BadThreshold(s.to_string()))
    }
}

impl std::fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ThresholdMethod::Fixed(t) => write!(f, "{t}"),
            ThresholdMethod::Otsu => f.write_str("otsu"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryFrame {
    pub width: usize,
    pub height: usize,
    /// Row-major; `true` marks a dark (hole) pixel.
    pub mask: Vec<bool>,
    pub threshold: u8,
    pub source_index: usize,
}

impl BinaryFrame {
    pub fn is_dark(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }
}

/// Otsu threshold over the 256-bin histogram, with dark = intensity <= t.
///
/// When the between-class variance is maximal over a run of thresholds that
/// all induce the same split, the middle of that run is returned.
pub fn otsu_threshold(pixels: &[u8]) -> u8 {
    let mut hist = [0u64; 256];
    for &p in pixels {
        hist[p as usize] += 1;
    }
    let total = pixels.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();

    let mut variances = [f64::NEG_INFINITY; 256];
    let (mut count_dark, mut sum_dark) = (0.0f64, 0.0f64);
    for t in 0..256 {
        count_dark += hist[t] as f64;
        sum_dark += t as f64 * hist[t] as f64;
        let count_light = total - count_dark;
        if count_dark == 0.0 || count_light == 0.0 {
            continue;
        }
        let diff = total * sum_dark - sum_all * count_dark;
        variances[t] = diff * diff / (count_dark * count_light);
    }

    let best = variances.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        // Uniform frame: any threshold splits nothing.
        return pixels.first().copied().unwrap_or(0);
    }
    let first = variances.iter().position(|&v| v == best).unwrap_or(0);
    let mut last = first;
    while last + 1 < 256 && variances[last + 1] == best {
        last += 1;
    }
    ((first + last) / 2) as u8
}

pub fn binarize(frame: &GrayFrame, method: ThresholdMethod) -> BinaryFrame {
    let threshold = match method {
        ThresholdMethod::Fixed(t) => t,
        ThresholdMethod::Otsu => otsu_threshold(frame.pixels()),
    };
    BinaryFrame {
        width: frame.width(),
        height: frame.height(),
        mask: frame.pixels().iter().map(|&p| p <= threshold).collect(),
        threshold,
        source_index: frame.index,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoleRegion {
    pub label: u32,
    /// (x, y) pixel coordinates in raster order.
    pub pixel_coords: Vec<(u32, u32)>,
}

impl HoleRegion {
    pub fn area(&self) -> usize {
        self.pixel_coords.len()
    }
}

/// 8-connected dark components with at least `min_hole_area` pixels.
///
/// Surviving regions are labelled 1, 2, ... in the raster order of their
/// first pixel.
pub fn label_holes(bf: &BinaryFrame, min_hole_area: usize) -> Vec<HoleRegion> {
    let (w, h) = (bf.width, bf.height);
    let mut seen = vec![false; w * h];
    let mut regions = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !bf.mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut pixels = Vec::new();
        while let Some(i) = queue.pop_front() {
            let (x, y) = (i % w, i / w);
            pixels.push((x as u32, y as u32));
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if bf.mask[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        if pixels.len() >= min_hole_area.max(1) {
            pixels.sort_unstable_by_key(|&(x, y)| (y, x));
            regions.push(HoleRegion {
                label: regions.len() as u32 + 1,
                pixel_coords: pixels,
            });
        }
    }
    regions
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub x: f64,
    pub y: f64,
    pub region_label: u32,
}

/// Center of mass of each region: the mean of its pixel coordinates.
pub fn compute_centroids(regions: &[HoleRegion]) -> Vec<Centroid> {
    regions
        .iter()
        .filter(|r| !r.pixel_coords.is_empty())
        .map(|r| {
            let (sx, sy) = r
                .pixel_coords
                .iter()
                .fold((0u64, 0u64), |(sx, sy), &(x, y)| (sx + x as u64, sy + y as u64));
            let n = r.area() as f64;
            Centroid {
                x: sx as f64 / n,
                y: sy as f64 / n,
                region_label: r.label,
            }
        })
        .collect()
}
