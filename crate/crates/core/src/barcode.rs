//! Per-frame Betti numbers arranged as a barcode: one row per Betti value,
//! one column per frame.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vortex::BettiResult;

/// Shortest run that counts as persistent unless overridden.
pub const DEFAULT_MIN_RUN: usize = 2;

#[derive(Debug, Error)]
pub enum BarcodeError {
    #[error("frame {0} appears more than once")]
    DuplicateFrame(usize),
    #[error("frame {frame} is outside a barcode of {frame_count} frames")]
    FrameOutOfRange { frame: usize, frame_count: usize },
    #[error("malformed barcode line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("malformed barcode json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown barcode format {0:?}")]
    UnknownFormat(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BarcodeFormat {
    Csv,
    Json,
}

impl BarcodeFormat {
    pub fn extension(self) -> &'static str {
        match self {
            BarcodeFormat::Csv => "csv",
            BarcodeFormat::Json => "json",
        }
    }
}

impl FromStr for BarcodeFormat {
    type Err = BarcodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(BarcodeFormat::Csv),
            "json" => Ok(BarcodeFormat::Json),
            other => Err(BarcodeError::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Barcode {
    frame_count: usize,
    /// Sorted Betti multiset per frame; frames without a nerve are absent.
    entries: BTreeMap<usize, Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct BarcodeJson {
    frame_count: usize,
    entries: Vec<(usize, Vec<usize>)>,
}

impl Barcode {
    pub fn new(frame_count: usize) -> Self {
        Barcode {
            frame_count,
            entries: BTreeMap::new(),
        }
    }

    /// Adds one bar to a column.
    pub fn push(&mut self, frame: usize, betti: usize) -> Result<(), BarcodeError> {
        if frame >= self.frame_count {
            return Err(BarcodeError::FrameOutOfRange {
                frame,
                frame_count: self.frame_count,
            });
        }
        let column = self.entries.entry(frame).or_default();
        let at = column.partition_point(|&v| v <= betti);
        column.insert(at, betti);
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        self.frame_count
    }

    /// Betti multiset of a frame (empty when no nerve was built).
    pub fn column(&self, frame: usize) -> &[usize] {
        self.entries.get(&frame).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn columns(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.entries.iter().map(|(&f, v)| (f, v.as_slice()))
    }

    /// Distinct Betti values, ascending.
    pub fn betti_domain(&self) -> Vec<usize> {
        self.entries
            .values()
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// Frames whose column contains `betti`, ascending.
    pub fn frames_with(&self, betti: usize) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|(_, v)| v.binary_search(&betti).is_ok())
            .map(|(&f, _)| f)
            .collect()
    }

    /// Number of (frame, distinct value) bars drawn for the barcode.
    pub fn bar_count(&self) -> usize {
        self.entries
            .values()
            .map(|v| v.iter().collect::<BTreeSet<_>>().len())
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame,betti\n");
        for (frame, values) in &self.entries {
            for v in values {
                let _ = writeln!(out, "{frame},{v}");
            }
        }
        out
    }

    /// Parses the CSV form. The format has no frame-count field, so it is
    /// taken from `frame_count` or else inferred as the last frame + 1.
    pub fn from_csv(text: &str, frame_count: Option<usize>) -> Result<Self, BarcodeError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "frame,betti" => {}
            _ => {
                return Err(BarcodeError::Parse {
                    line: 1,
                    reason: "expected header `frame,betti`".into(),
                })
            }
        }
        let mut pairs = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let parse = |s: Option<&str>| -> Result<usize, BarcodeError> {
                s.and_then(|s| s.trim().parse().ok()).ok_or(BarcodeError::Parse {
                    line: i + 1,
                    reason: format!("expected `frame,betti`, got {line:?}"),
                })
            };
            let mut fields = line.split(',');
            let frame = parse(fields.next())?;
            let betti = parse(fields.next())?;
            if fields.next().is_some() {
                return Err(BarcodeError::Parse {
                    line: i + 1,
                    reason: "too many fields".into(),
                });
            }
            pairs.push((frame, betti));
        }
        let inferred = pairs.iter().map(|&(f, _)| f + 1).max().unwrap_or(0);
        let mut bc = Barcode::new(frame_count.unwrap_or(inferred));
        for (frame, betti) in pairs {
            bc.push(frame, betti)?;
        }
        Ok(bc)
    }

    pub fn to_json(&self) -> String {
        let doc = BarcodeJson {
            frame_count: self.frame_count,
            entries: self.entries.iter().map(|(&f, v)| (f, v.clone())).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("barcode serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, BarcodeError> {
        let doc: BarcodeJson = serde_json::from_str(text)?;
        let mut bc = Barcode::new(doc.frame_count);
        let mut seen = BTreeSet::new();
        for (frame, values) in doc.entries {
            if !seen.insert(frame) {
                return Err(BarcodeError::DuplicateFrame(frame));
            }
            for v in values {
                bc.push(frame, v)?;
            }
        }
        Ok(bc)
    }
}

/// Builds the barcode from every processed frame. Frames with no Betti
/// result keep an empty column; the frame count is the largest index + 1.
pub fn assemble_barcode(per_frame: &[(usize, Vec<BettiResult>)]) -> Result<Barcode, BarcodeError> {
    let frame_count = per_frame.iter().map(|(f, _)| f + 1).max().unwrap_or(0);
    let mut bc = Barcode::new(frame_count);
    let mut seen = BTreeSet::new();
    for (frame, results) in per_frame {
        if !seen.insert(*frame) {
            return Err(BarcodeError::DuplicateFrame(*frame));
        }
        for r in results {
            bc.push(*frame, r.value)?;
        }
    }
    Ok(bc)
}

pub fn write_barcode(bc: &Barcode, format: BarcodeFormat, path: &Path) -> Result<(), BarcodeError> {
    let text = match format {
        BarcodeFormat::Csv => bc.to_csv(),
        BarcodeFormat::Json => bc.to_json(),
    };
    std::fs::write(path, text).map_err(|source| BarcodeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_barcode(path: &Path, format: BarcodeFormat) -> Result<Barcode, BarcodeError> {
    let text = std::fs::read_to_string(path).map_err(|source| BarcodeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        BarcodeFormat::Csv => Barcode::from_csv(&text, None),
        BarcodeFormat::Json => Barcode::from_json(&text),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersistenceInterval {
    pub betti_value: usize,
    pub start_frame: usize,
    /// Inclusive.
    pub end_frame: usize,
}

impl PersistenceInterval {
    pub fn length(&self) -> usize {
        self.end_frame - self.start_frame + 1
    }

    pub fn frames(&self) -> std::ops::RangeInclusive<usize> {
        self.start_frame..=self.end_frame
    }
}

/// Maximal runs of consecutive frames sharing a Betti value, sorted by
/// value and then start frame.
pub fn persistence_intervals(bc: &Barcode) -> Vec<PersistenceInterval> {
    let mut out = Vec::new();
    for value in bc.betti_domain() {
        let mut run: Option<(usize, usize)> = None;
        for frame in bc.frames_with(value) {
            run = match run {
                Some((start, end)) if frame == end + 1 => Some((start, frame)),
                Some((start, end)) => {
                    out.push(PersistenceInterval {
                        betti_value: value,
                        start_frame: start,
                        end_frame: end,
                    });
                    Some((frame, frame))
                }
                None => Some((frame, frame)),
            };
        }
        if let Some((start, end)) = run {
            out.push(PersistenceInterval {
                betti_value: value,
                start_frame: start,
                end_frame: end,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShrinkPlan {
    pub target_betti: usize,
    pub retained_frames: Vec<usize>,
    pub min_run_length: usize,
}

impl ShrinkPlan {
    /// Newline-separated frame indices.
    pub fn to_text(&self) -> String {
        self.retained_frames
            .iter()
            .map(|f| format!("{f}\n"))
            .collect()
    }

    pub fn from_text(text: &str, target_betti: usize, min_run_length: usize) -> Result<Self, BarcodeError> {
        let mut retained_frames = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            retained_frames.push(line.parse().map_err(|_| BarcodeError::Parse {
                line: i + 1,
                reason: format!("expected a frame index, got {line:?}"),
            })?);
        }
        retained_frames.sort_unstable();
        retained_frames.dedup();
        Ok(ShrinkPlan {
            target_betti,
            retained_frames,
            min_run_length,
        })
    }
}

/// Keeps the frames of every run of `target_betti` lasting at least
/// `min_run_length` frames.
pub fn shrink(bc: &Barcode, target_betti: usize, min_run_length: usize) -> ShrinkPlan {
    let retained_frames = persistence_intervals(bc)
        .into_iter()
        .filter(|iv| iv.betti_value == target_betti && iv.length() >= min_run_length)
        .flat_map(|iv| iv.frames())
        .collect();
    ShrinkPlan {
        target_betti,
        retained_frames,
        min_run_length,
    }
}
