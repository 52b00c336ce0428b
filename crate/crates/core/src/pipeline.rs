//! End-to-end processing of a frame directory into a barcode, plus the
//! single-frame and shrink helpers used by the command line.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::barcode::{
    assemble_barcode, shrink, write_barcode, Barcode, BarcodeError, BarcodeFormat, ShrinkPlan, DEFAULT_MIN_RUN,
};
use crate::frame_ingest::{
    binarize, compute_centroids, label_holes, list_frames, load_frame, GrayFrame, IngestError, ThresholdMethod,
    DEFAULT_MIN_HOLE_AREA,
};
use crate::geometry::{delaunay_triangulate, Point2, Triangulation};
use crate::nerve::{maximal_nerves, MncSelection};
use crate::render::{render_barcode_svg, render_frame_overlay_svg, RenderStyle};
use crate::vortex::{betti_number, build_vortex_nerve, BettiResult, VortexNerve, DEFAULT_MAX_RINGS};

pub const DEFAULT_PATTERN: &str = "*.png";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Barcode(#[from] BarcodeError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    fn io(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
        move |source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Which maximal nerve complexes of a frame get a vortex nerve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MncPolicy {
    /// The first MNC, by nucleus index, whose vortex nerve can be built.
    First,
    /// Every tied MNC.
    #[default]
    All,
}

impl FromStr for MncPolicy {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "first" => Ok(MncPolicy::First),
            "all" => Ok(MncPolicy::All),
            other => Err(PipelineError::Config(format!(
                "mnc_policy must be `first` or `all`, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineConfig {
    pub frames_dir: PathBuf,
    pub pattern: String,
    pub threshold: ThresholdMethod,
    pub min_hole_area: usize,
    pub max_rings: usize,
    pub mnc_policy: MncPolicy,
    pub betti_target: Option<usize>,
    pub min_run: usize,
    pub out_dir: PathBuf,
    /// Only used by the benchmark.
    pub seed: Option<u64>,
    pub render_barcode: bool,
    pub render_frames: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            frames_dir: PathBuf::new(),
            pattern: DEFAULT_PATTERN.to_string(),
            threshold: ThresholdMethod::Otsu,
            min_hole_area: DEFAULT_MIN_HOLE_AREA,
            max_rings: DEFAULT_MAX_RINGS,
            mnc_policy: MncPolicy::All,
            betti_target: None,
            min_run: DEFAULT_MIN_RUN,
            out_dir: PathBuf::from("out"),
            seed: None,
            render_barcode: false,
            render_frames: false,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, PipelineError> {
    value
        .parse()
        .map_err(|_| PipelineError::Config(format!("{key} expects a non-negative integer, got {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, PipelineError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(PipelineError::Config(format!("{key} expects true or false, got {value:?}"))),
    }
}

impl PipelineConfig {
    /// Sets one option by its config-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), PipelineError> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "frames_dir" | "frames" => self.frames_dir = PathBuf::from(value),
            "pattern" => self.pattern = value.to_string(),
            "threshold" => {
                self.threshold = value
                    .parse()
                    .map_err(|e: IngestError| PipelineError::Config(e.to_string()))?
            }
            "min_hole_area" => self.min_hole_area = parse_num(key, value)?,
            "max_rings" => self.max_rings = parse_num(key, value)?,
            "mnc_policy" => self.mnc_policy = value.parse()?,
            "betti_target" | "betti" => {
                self.betti_target = if value.is_empty() || value == "none" {
                    None
                } else {
                    Some(parse_num(key, value)?)
                }
            }
            "min_run" => self.min_run = parse_num(key, value)?,
            "out_dir" | "out" => self.out_dir = PathBuf::from(value),
            "seed" => self.seed = Some(parse_num(key, value)?),
            "render_barcode" => self.render_barcode = parse_bool(key, value)?,
            "render_frames" => self.render_frames = parse_bool(key, value)?,
            other => return Err(PipelineError::Config(format!("unknown option {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_config_text(&mut self, text: &str) -> Result<(), PipelineError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| PipelineError::Config(format!("line {}: expected key=value, got {raw:?}", i + 1)))?;
            self.set(key, value)
                .map_err(|e| PipelineError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn apply_config_file(&mut self, path: &Path) -> Result<(), PipelineError> {
        let text = std::fs::read_to_string(path).map_err(PipelineError::io(path))?;
        self.apply_config_text(&text)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.frames_dir.as_os_str().is_empty() {
            return Err(PipelineError::Config("no frame directory given".into()));
        }
        if self.max_rings == 0 {
            return Err(PipelineError::Config("max_rings must be at least 1".into()));
        }
        if self.min_run == 0 {
            return Err(PipelineError::Config("min_run must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameStatus {
    Ok,
    /// Too few or collinear centroids to triangulate.
    Degenerate,
    /// Triangulated, but no maximal nerve grew a vortex nerve.
    NoVortex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub frame: usize,
    pub centroid_count: usize,
    pub mnc_count: usize,
    pub betti: Vec<BettiResult>,
    pub status: FrameStatus,
    pub elapsed_ms: f64,
    /// Why the frame produced no Betti number, if it did not.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Everything computed for one frame.
#[derive(Debug, Clone)]
pub struct FrameAnalysis {
    pub report: FrameReport,
    pub centroids: Vec<Point2>,
    pub triangulation: Option<Triangulation>,
    pub nerves: Vec<VortexNerve>,
}

/// Vortex nerves built from a frame's maximal nerve complexes.
#[derive(Debug, Clone, Default)]
pub struct NerveOutcome {
    pub nerves: Vec<VortexNerve>,
    pub betti: Vec<BettiResult>,
    /// One message per MNC whose vortex nerve could not be built.
    pub failures: Vec<String>,
}

/// Builds vortex nerves in nucleus order. Under [`MncPolicy::First`] MNCs
/// that fail (for example on the hull) are skipped until one succeeds.
pub fn vortex_nerves(tri: &Triangulation, mnc: &MncSelection, policy: MncPolicy, max_rings: usize) -> NerveOutcome {
    let mut out = NerveOutcome::default();
    for nerve in &mnc.nerves {
        match build_vortex_nerve(nerve, tri, max_rings).and_then(|vn| betti_number(&vn).map(|b| (vn, b))) {
            Ok((vn, b)) => {
                out.betti.push(b);
                out.nerves.push(vn);
                if policy == MncPolicy::First {
                    break;
                }
            }
            Err(e) => out.failures.push(format!("nucleus {}: {e}", nerve.nucleus)),
        }
    }
    out
}

/// Runs binarization through Betti numbers on one frame. Geometric failures
/// are recorded in the report rather than returned.
pub fn analyze_frame(frame: &GrayFrame, cfg: &PipelineConfig) -> FrameAnalysis {
    let start = Instant::now();
    let bf = binarize(frame, cfg.threshold);
    let regions = label_holes(&bf, cfg.min_hole_area);
    let centroids: Vec<Point2> = compute_centroids(&regions)
        .iter()
        .map(|c| Point2::new(c.x, c.y))
        .collect();
    let mut report = FrameReport {
        frame: frame.index,
        centroid_count: centroids.len(),
        mnc_count: 0,
        betti: Vec::new(),
        status: FrameStatus::Degenerate,
        elapsed_ms: 0.0,
        detail: None,
    };
    let mut nerves = Vec::new();
    let triangulation = match delaunay_triangulate(&centroids) {
        Ok(tri) => Some(tri),
        Err(e) => {
            report.detail = Some(e.to_string());
            None
        }
    };
    if let Some(tri) = &triangulation {
        match maximal_nerves(tri) {
            Ok(mnc) => {
                report.mnc_count = mnc.len();
                let outcome = vortex_nerves(tri, &mnc, cfg.mnc_policy, cfg.max_rings);
                report.betti = outcome.betti;
                nerves = outcome.nerves;
                if report.betti.is_empty() {
                    report.status = FrameStatus::NoVortex;
                    report.detail = Some(outcome.failures.join("; "));
                } else {
                    report.status = FrameStatus::Ok;
                }
            }
            Err(e) => report.detail = Some(e.to_string()),
        }
    }
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    FrameAnalysis {
        report,
        centroids,
        triangulation,
        nerves,
    }
}

/// Overlay SVG for an analysed frame; frames that could not be triangulated
/// render as an empty canvas.
pub fn frame_overlay(analysis: &FrameAnalysis, style: &RenderStyle) -> String {
    match &analysis.triangulation {
        Some(tri) => render_frame_overlay_svg(tri, &analysis.nerves, style),
        None => {
            let empty = Triangulation::from_triangles(Vec::new(), &[]).expect("empty complex is valid");
            render_frame_overlay_svg(&empty, &[], style)
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub barcode: Barcode,
    pub reports: Vec<FrameReport>,
    pub plan: Option<ShrinkPlan>,
    pub frame_paths: Vec<PathBuf>,
}

impl PipelineRun {
    /// True when at least one frame produced a Betti number.
    pub fn any_nerve(&self) -> bool {
        self.reports.iter().any(|r| r.status == FrameStatus::Ok)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    std::fs::write(path, contents).map_err(PipelineError::io(path))
}

/// Processes every matching frame in parallel and writes `barcode.csv`,
/// `barcode.json`, `report.json`, and optionally `barcode.svg`,
/// `frames/*.svg` and `plan.txt` into the output directory.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineRun, PipelineError> {
    cfg.validate()?;
    let frame_paths = list_frames(&cfg.frames_dir, &cfg.pattern)?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(PipelineError::io(&cfg.out_dir))?;
    let frames_out = cfg.out_dir.join("frames");
    if cfg.render_frames {
        std::fs::create_dir_all(&frames_out).map_err(PipelineError::io(&frames_out))?;
    }
    let style = RenderStyle::default();

    let reports = frame_paths
        .par_iter()
        .enumerate()
        .map(|(i, path)| -> Result<FrameReport, PipelineError> {
            let frame = load_frame(path, i)?;
            let analysis = analyze_frame(&frame, cfg);
            if cfg.render_frames {
                let svg_path = frames_out.join(format!("frame_{i:05}.svg"));
                write_file(&svg_path, &frame_overlay(&analysis, &style))?;
            }
            Ok(analysis.report)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let per_frame: Vec<(usize, Vec<BettiResult>)> = reports.iter().map(|r| (r.frame, r.betti.clone())).collect();
    let barcode = assemble_barcode(&per_frame)?;
    write_barcode(&barcode, BarcodeFormat::Csv, &cfg.out_dir.join("barcode.csv"))?;
    write_barcode(&barcode, BarcodeFormat::Json, &cfg.out_dir.join("barcode.json"))?;
    let report_json = serde_json::to_string_pretty(&reports).expect("reports serialize");
    write_file(&cfg.out_dir.join("report.json"), &report_json)?;
    if cfg.render_barcode {
        write_file(&cfg.out_dir.join("barcode.svg"), &render_barcode_svg(&barcode, &style))?;
    }
    let plan = cfg.betti_target.map(|target| shrink(&barcode, target, cfg.min_run));
    if let Some(plan) = &plan {
        write_file(&cfg.out_dir.join("plan.txt"), &plan.to_text())?;
    }
    Ok(PipelineRun {
        barcode,
        reports,
        plan,
        frame_paths,
    })
}

/// Copies the retained frame files into `out_dir`, keeping their names.
/// Frame `i` is the `i`-th entry of `frame_paths`.
pub fn apply_shrink(frame_paths: &[PathBuf], plan: &ShrinkPlan, out_dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    std::fs::create_dir_all(out_dir).map_err(PipelineError::io(out_dir))?;
    let mut copied = Vec::with_capacity(plan.retained_frames.len());
    for &frame in &plan.retained_frames {
        let src = frame_paths.get(frame).ok_or_else(|| {
            PipelineError::Config(format!(
                "plan retains frame {frame} but only {} frames were found",
                frame_paths.len()
            ))
        })?;
        let dst = out_dir.join(src.file_name().expect("listed frames are files"));
        std::fs::copy(src, &dst).map_err(PipelineError::io(&dst))?;
        copied.push(dst);
    }
    Ok(copied)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn config_text_overrides_defaults() {
        let mut cfg = PipelineConfig::default();
        cfg.apply_config_text(
            "# comment\nframes = data\nthreshold = 128\nmnc_policy = first\nbetti = 8\nmin-run = 3\n\nrender_frames = yes\n",
        )
        .unwrap();
        assert_eq!(cfg.frames_dir, PathBuf::from("data"));
        assert_eq!(cfg.threshold, ThresholdMethod::Fixed(128));
        assert_eq!(cfg.mnc_policy, MncPolicy::First);
        assert_eq!(cfg.betti_target, Some(8));
        assert_eq!(cfg.min_run, 3);
        assert!(cfg.render_frames);
        assert_eq!(cfg.max_rings, DEFAULT_MAX_RINGS);
    }

    #[test]
    fn config_errors() {
        let mut cfg = PipelineConfig::default();
        assert!(cfg.apply_config_text("nonsense").is_err());
        assert!(cfg.apply_config_text("colour = red").is_err());
        assert!(cfg.apply_config_text("max_rings = -1").is_err());
        assert!(cfg.validate().is_err());
        cfg.frames_dir = "x".into();
        cfg.max_rings = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn fan_frame_reports_betti_eight() {
        let a = analyze_frame(&synth::fan_frame(6, 4), &PipelineConfig::default());
        assert_eq!(a.report.status, FrameStatus::Ok);
        assert_eq!(a.report.frame, 4);
        assert_eq!(a.report.centroid_count, 13);
        assert_eq!(a.report.mnc_count, 1);
        assert_eq!(a.report.betti.iter().map(|b| b.value).collect::<Vec<_>>(), vec![8]);
    }

    #[test]
    fn sparse_frame_is_degenerate() {
        let a = analyze_frame(&synth::sparse_frame(0), &PipelineConfig::default());
        assert_eq!(a.report.status, FrameStatus::Degenerate);
        assert!(a.report.betti.is_empty());
        assert!(a.report.detail.is_some());
        assert!(frame_overlay(&a, &RenderStyle::default()).contains("<svg"));
    }

    #[test]
    fn policy_controls_tied_nerves() {
        let frame = synth::twin_fan_frame(0);
        let all = analyze_frame(&frame, &PipelineConfig::default());
        assert_eq!(all.report.mnc_count, 2);
        assert_eq!(all.report.betti.iter().map(|b| b.value).collect::<Vec<_>>(), vec![10, 10]);
        let cfg = PipelineConfig {
            mnc_policy: MncPolicy::First,
            ..PipelineConfig::default()
        };
        let first = analyze_frame(&frame, &cfg);
        assert_eq!(first.report.betti.len(), 1);
    }

    #[test]
    fn first_policy_falls_back_past_hull_nerve() {
        // Vertex 0 is the apex of an open half fan of six triangles (on the
        // hull); vertex 8 centres a closed hexagonal fan. Both have degree 6.
        let mut points = vec![Point2::new(0.0, 0.0)];
        for i in 0..7 {
            let a = std::f64::consts::PI * i as f64 / 6.0;
            points.push(Point2::new(a.cos(), a.sin()));
        }
        points.extend(synth::concentric_points(6, &[1.0]).iter().map(|p| Point2::new(p.x + 10.0, p.y)));
        let mut tris: Vec<[usize; 3]> = (0..6).map(|i| [0, 1 + i, 2 + i]).collect();
        tris.extend((0..6).map(|i| [8, 9 + i, 9 + (i + 1) % 6]));
        let tri = Triangulation::from_triangles(points, &tris).unwrap();
        let mnc = maximal_nerves(&tri).unwrap();
        assert_eq!(mnc.nerves.iter().map(|n| n.nucleus).collect::<Vec<_>>(), vec![0, 8]);

        let first = vortex_nerves(&tri, &mnc, MncPolicy::First, DEFAULT_MAX_RINGS);
        assert_eq!(first.betti.iter().map(|b| b.nucleus).collect::<Vec<_>>(), vec![8]);
        assert_eq!(first.failures.len(), 1);
        let all = vortex_nerves(&tri, &mnc, MncPolicy::All, DEFAULT_MAX_RINGS);
        assert_eq!(all.betti.len(), 1);
        assert_eq!(all.failures.len(), 1);
    }
}
