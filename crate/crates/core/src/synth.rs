//! Synthetic point layouts and frames with known nerve structure.
//!
//! `concentric_points(k, radii)` places a nucleus at the origin and `k`
//! points on each circle, with every other layer rotated by half a step.
//! Its Delaunay triangulation is a fan of `k` triangles around the nucleus
//! followed by bands of `2k` triangles between consecutive layers, so the
//! vortex nerve at the nucleus has one cycle per layer.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frame_ingest::GrayFrame;
use crate::geometry::{delaunay_triangulate, GeometryError, Point2, Triangulation};

/// Nucleus at index 0, then `spokes` points per layer, layer by layer.
pub fn concentric_points(spokes: usize, radii: &[f64]) -> Vec<Point2> {
    let mut pts = vec![Point2::new(0.0, 0.0)];
    for (layer, &r) in radii.iter().enumerate() {
        let offset = if layer % 2 == 1 { 0.5 } else { 0.0 };
        for i in 0..spokes {
            let a = 2.0 * PI * (i as f64 + offset) / spokes as f64;
            pts.push(Point2::new(r * a.cos(), r * a.sin()));
        }
    }
    pts
}

pub fn concentric_triangulation(spokes: usize, radii: &[f64]) -> Result<Triangulation, GeometryError> {
    delaunay_triangulate(&concentric_points(spokes, radii))
}

/// A bare fan: nucleus 0 joined to `spokes` points on the unit circle.
pub fn isolated_fan(spokes: usize) -> Triangulation {
    let points = concentric_points(spokes, &[1.0]);
    let tris: Vec<[usize; 3]> = (0..spokes)
        .map(|i| [0, 1 + i, 1 + (i + 1) % spokes])
        .collect();
    Triangulation::from_triangles(points, &tris).expect("regular fan is a valid complex")
}

/// `n` points uniform in `[0, extent)^2`, reproducible from `seed`.
pub fn uniform_points(n: usize, seed: u64, extent: f64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Point2::new(rng.gen_range(0.0..extent), rng.gen_range(0.0..extent)))
        .collect()
}

/// Side length of the frames produced by [`fan_frame`] and friends.
pub const FRAME_SIZE: usize = 200;
const FAN_SCALE: f64 = 40.0;
const BLOB_HALF: usize = 2;

/// White frame with a dark `(2*half+1)`-pixel square centered on each
/// rounded point. Centroids of the squares sit exactly on those pixels.
pub fn render_hole_frame(
    points: &[Point2],
    width: usize,
    height: usize,
    half: usize,
    index: usize,
) -> GrayFrame {
    let mut px = vec![255u8; width * height];
    for p in points {
        let (cx, cy) = (p.x.round() as i64, p.y.round() as i64);
        for y in cy - half as i64..=cy + half as i64 {
            for x in cx - half as i64..=cx + half as i64 {
                if x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height {
                    px[y as usize * width + x as usize] = 0;
                }
            }
        }
    }
    GrayFrame::new(width, height, px, index).expect("dimensions are positive")
}

/// Pixel positions of a two-layer concentric layout centered in the frame.
pub fn fan_layout_pixels(spokes: usize) -> Vec<Point2> {
    let c = FRAME_SIZE as f64 / 2.0;
    concentric_points(spokes, &[1.0, 2.0])
        .into_iter()
        .map(|p| Point2::new((c + FAN_SCALE * p.x).round(), (c + FAN_SCALE * p.y).round()))
        .collect()
}

/// Frame whose holes triangulate into a `spokes`-fan ringed by `2 * spokes`
/// triangles; for `spokes >= 6` the nucleus is the unique maximal nerve and
/// its vortex nerve has Betti number `spokes + 2`.
pub fn fan_frame(spokes: usize, index: usize) -> GrayFrame {
    render_hole_frame(&fan_layout_pixels(spokes), FRAME_SIZE, FRAME_SIZE, BLOB_HALF, index)
}

/// Frame with only two holes, which cannot be triangulated.
pub fn sparse_frame(index: usize) -> GrayFrame {
    let pts = [Point2::new(60.0, 100.0), Point2::new(140.0, 100.0)];
    render_hole_frame(&pts, FRAME_SIZE, FRAME_SIZE, BLOB_HALF, index)
}

/// Two 8-spoke layouts side by side; the two nuclei tie as maximal nerves
/// (6-spoke layouts would not, as triangles bridging the gap raise some hull
/// vertices to degree 7).
pub fn twin_fan_frame(index: usize) -> GrayFrame {
    let width = 2 * FRAME_SIZE;
    let mut pts = fan_layout_pixels(8);
    let shifted: Vec<Point2> = pts
        .iter()
        .map(|p| Point2::new(p.x + FRAME_SIZE as f64, p.y))
        .collect();
    pts.extend(shifted);
    render_hole_frame(&pts, width, FRAME_SIZE, BLOB_HALF, index)
}
