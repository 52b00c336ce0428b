//! SVG pictographs: the barcode itself and per-frame triangulation overlays.

use std::fmt::Write as _;

use thiserror::Error;

use crate::barcode::Barcode;
use crate::geometry::{Point2, Triangulation};
use crate::vortex::VortexNerve;

/// Width of every emitted SVG canvas.
pub const CANVAS_WIDTH: f64 = 1000.0;
const MARGIN: f64 = 20.0;
const LABEL_GUTTER: f64 = 50.0;
const AXIS_GUTTER: f64 = 30.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("style dimension {name} must be positive and finite, got {value}")]
    BadDimension { name: &'static str, value: f64 },
    #[error("cycle palette is empty")]
    EmptyPalette,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    bar_width: f64,
    bar_height: f64,
    row_gap: f64,
    cycle_palette: Vec<String>,
    show_labels: bool,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            bar_width: 6.0,
            bar_height: 14.0,
            row_gap: 6.0,
            cycle_palette: ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            show_labels: true,
        }
    }
}

impl RenderStyle {
    pub fn new(
        bar_width: f64,
        bar_height: f64,
        row_gap: f64,
        cycle_palette: Vec<String>,
        show_labels: bool,
    ) -> Result<Self, RenderError> {
        for (name, value) in [("bar_width", bar_width), ("bar_height", bar_height), ("row_gap", row_gap)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(RenderError::BadDimension { name, value });
            }
        }
        if cycle_palette.is_empty() {
            return Err(RenderError::EmptyPalette);
        }
        Ok(RenderStyle {
            bar_width,
            bar_height,
            row_gap,
            cycle_palette,
            show_labels,
        })
    }

    pub fn bar_width(&self) -> f64 {
        self.bar_width
    }

    pub fn bar_height(&self) -> f64 {
        self.bar_height
    }

    pub fn row_gap(&self) -> f64 {
        self.row_gap
    }

    pub fn show_labels(&self) -> bool {
        self.show_labels
    }

    pub fn with_labels(mut self, show: bool) -> Self {
        self.show_labels = show;
        self
    }

    /// Stroke color for ring `ring`, cycling through the palette.
    pub fn cycle_color(&self, ring: usize) -> &str {
        &self.cycle_palette[ring % self.cycle_palette.len()]
    }
}

/// Placement of barcode bars on the canvas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarcodeLayout {
    pub plot_left: f64,
    pub plot_top: f64,
    pub frame_pitch: f64,
    pub bar_width: f64,
    pub row_pitch: f64,
    pub rows: usize,
    pub height: f64,
}

impl BarcodeLayout {
    pub fn new(bc: &Barcode, style: &RenderStyle) -> Self {
        let rows = bc.betti_domain().len();
        let plot_left = MARGIN + if style.show_labels { LABEL_GUTTER } else { 0.0 };
        let plot_width = CANVAS_WIDTH - plot_left - MARGIN;
        let frame_pitch = plot_width / bc.frame_count().max(1) as f64;
        let row_pitch = style.bar_height + style.row_gap;
        let bottom = MARGIN + if style.show_labels { AXIS_GUTTER } else { 0.0 };
        BarcodeLayout {
            plot_left,
            plot_top: MARGIN,
            frame_pitch,
            bar_width: style.bar_width.min(frame_pitch),
            row_pitch,
            rows,
            height: MARGIN + rows as f64 * row_pitch + bottom,
        }
    }

    /// Left edge of the bar for `frame`.
    pub fn bar_x(&self, frame: usize) -> f64 {
        self.plot_left + frame as f64 * self.frame_pitch
    }

    /// Top edge of row `row`, where row 0 is the lowest Betti value and is
    /// drawn at the bottom.
    pub fn row_y(&self, row: usize) -> f64 {
        self.plot_top + (self.rows - 1 - row) as f64 * self.row_pitch
    }
}

fn fmt(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

pub fn render_barcode_svg(bc: &Barcode, style: &RenderStyle) -> String {
    let layout = BarcodeLayout::new(bc, style);
    let domain = bc.betti_domain();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = fmt(CANVAS_WIDTH),
        h = fmt(layout.height)
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (row, &value) in domain.iter().enumerate() {
        let y = layout.row_y(row);
        let _ = writeln!(out, r#"<g class="band" data-betti="{value}">"#);
        if style.show_labels {
            let _ = writeln!(
                out,
                r#"<text class="betti-label" x="{}" y="{}" font-size="11" text-anchor="end">{value}</text>"#,
                fmt(layout.plot_left - 6.0),
                fmt(y + style.bar_height * 0.8)
            );
        }
        for frame in bc.frames_with(value) {
            let _ = writeln!(
                out,
                r#"<rect class="bar" data-frame="{frame}" data-betti="{value}" x="{}" y="{}" width="{}" height="{}" fill="black"/>"#,
                fmt(layout.bar_x(frame)),
                fmt(y),
                fmt(layout.bar_width),
                fmt(style.bar_height)
            );
        }
        let _ = writeln!(out, "</g>");
    }
    if style.show_labels && bc.frame_count() > 0 {
        let axis_y = layout.plot_top + layout.rows as f64 * layout.row_pitch + 4.0;
        let _ = writeln!(
            out,
            r#"<line class="frame-axis" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="gray"/>"#,
            fmt(layout.plot_left),
            fmt(CANVAS_WIDTH - MARGIN),
            y = fmt(axis_y)
        );
        let step = tick_step(bc.frame_count());
        for frame in (0..bc.frame_count()).step_by(step) {
            let _ = writeln!(
                out,
                r#"<text class="frame-label" x="{}" y="{}" font-size="10" text-anchor="middle">{frame}</text>"#,
                fmt(layout.bar_x(frame) + layout.bar_width / 2.0),
                fmt(axis_y + 14.0)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Roughly ten frame ticks whatever the sequence length.
fn tick_step(frame_count: usize) -> usize {
    let raw = frame_count.div_ceil(10).max(1);
    [1, 2, 5, 10, 20, 25, 50, 100, 200, 250, 500, 1000]
        .into_iter()
        .find(|&s| s >= raw)
        .unwrap_or(raw)
}

/// Affine map from triangulation coordinates to the overlay canvas. The
/// scale is uniform and the axes keep their orientation (image y points down).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viewport {
    pub min: Point2,
    pub scale: f64,
    pub height: f64,
}

impl Viewport {
    pub fn fit(points: &[Point2]) -> Self {
        if points.is_empty() {
            return Viewport {
                min: Point2::new(0.0, 0.0),
                scale: 1.0,
                height: 2.0 * MARGIN,
            };
        }
        let (mut lo, mut hi) = (points[0], points[0]);
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let span_x = hi.x - lo.x;
        let span_y = hi.y - lo.y;
        let inner = CANVAS_WIDTH - 2.0 * MARGIN;
        let scale = if span_x > 0.0 {
            inner / span_x
        } else if span_y > 0.0 {
            inner / span_y
        } else {
            1.0
        };
        Viewport {
            min: lo,
            scale,
            height: span_y * scale + 2.0 * MARGIN,
        }
    }

    pub fn map(&self, p: Point2) -> (f64, f64) {
        (
            MARGIN + (p.x - self.min.x) * self.scale,
            MARGIN + (p.y - self.min.y) * self.scale,
        )
    }
}

fn points_attr(vp: &Viewport, pts: impl IntoIterator<Item = Point2>) -> String {
    pts.into_iter()
        .map(|p| {
            let (x, y) = vp.map(p);
            format!("{},{}", fmt(x), fmt(y))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render_frame_overlay_svg(tri: &Triangulation, nerves: &[VortexNerve], style: &RenderStyle) -> String {
    let vp = Viewport::fit(tri.points());
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = fmt(CANVAS_WIDTH),
        h = fmt(vp.height)
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r##"<g class="triangles" fill="none" stroke="#999" stroke-width="1">"##);
    for t in tri.triangles() {
        let _ = writeln!(
            out,
            r#"<polygon class="triangle" data-id="{}" points="{}"/>"#,
            t.id,
            points_attr(&vp, tri.corners(t.id))
        );
    }
    out.push_str("</g>\n");
    let _ = writeln!(out, r##"<g class="barycenters" fill="#444">"##);
    for b in tri.barycenters() {
        let (x, y) = vp.map(b.location);
        let _ = writeln!(
            out,
            r#"<circle class="barycenter" data-triangle="{}" cx="{}" cy="{}" r="2.5"/>"#,
            b.triangle_id,
            fmt(x),
            fmt(y)
        );
    }
    out.push_str("</g>\n");
    for vn in nerves {
        let _ = writeln!(out, r#"<g class="vortex-nerve" data-nucleus="{}">"#, vn.mnc_nucleus);
        for f in &vn.filaments {
            let (a, b) = vn.filament_segment(f);
            let (x1, y1) = vp.map(a);
            let (x2, y2) = vp.map(b);
            let _ = writeln!(
                out,
                r##"<line class="filament" data-generator="{}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="#000" stroke-width="1.5"/>"##,
                f.generator,
                fmt(x1),
                fmt(y1),
                fmt(x2),
                fmt(y2)
            );
        }
        for c in &vn.cycles {
            let _ = writeln!(
                out,
                r#"<polygon class="cycle" data-ring="{}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
                c.ring_index,
                points_attr(&vp, c.polygon()),
                style.cycle_color(c.ring_index)
            );
        }
        let (nx, ny) = vp.map(vn.nucleus);
        let _ = writeln!(
            out,
            r#"<circle class="nucleus" cx="{}" cy="{}" r="4" fill="{}"/>"#,
            fmt(nx),
            fmt(ny),
            style.cycle_color(0)
        );
        if style.show_labels {
            let _ = writeln!(
                out,
                r#"<text class="nucleus-label" x="{}" y="{}" font-size="11">v{}</text>"#,
                fmt(nx + 6.0),
                fmt(ny - 6.0),
                vn.mnc_nucleus
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
