//! Independent oracles shared by the integration tests. Everything here uses
//! exact integer arithmetic or brute force and none of the library's own
//! predicates.

#![allow(dead_code)]

use std::path::Path;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use vortex_barcode::frame_ingest::GrayFrame;
use vortex_barcode::geometry::{Point2, Triangulation};
use vortex_barcode::vortex::VortexNerve;

/// A point whose coordinates are exact integers, all sharing one implicit
/// power-of-two scale with the other points of the same set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IPoint {
    pub x: BigInt,
    pub y: BigInt,
}

/// `(mantissa, exponent)` with `v == mantissa * 2^exponent`.
fn decompose(v: f64) -> (i64, i32) {
    assert!(v.is_finite(), "finite coordinate");
    if v == 0.0 {
        return (0, 0);
    }
    let bits = v.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (mant, exp) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1i64 << 52), raw_exp - 1075)
    };
    (sign * mant, exp)
}

/// Converts a point set to exact integers under a common scale `2^-e`,
/// where `e` is the smallest exponent among the nonzero coordinates.
pub fn exact_points(points: &[Point2]) -> Vec<IPoint> {
    let parts: Vec<[(i64, i32); 2]> = points.iter().map(|p| [decompose(p.x), decompose(p.y)]).collect();
    let min_exp = parts
        .iter()
        .flatten()
        .filter(|(m, _)| *m != 0)
        .map(|&(_, e)| e)
        .min()
        .unwrap_or(0);
    let lift = |(m, e): (i64, i32)| BigInt::from(m) << ((e - min_exp) as usize);
    parts
        .into_iter()
        .map(|[x, y]| IPoint { x: lift(x), y: lift(y) })
        .collect()
}

/// Twice the signed area of `a b c`; positive when counterclockwise.
pub fn orient_exact(a: &IPoint, b: &IPoint, c: &IPoint) -> BigInt {
    (&b.x - &a.x) * (&c.y - &a.y) - (&b.y - &a.y) * (&c.x - &a.x)
}

/// In-circle determinant; for counterclockwise `a b c` it is positive
/// exactly when `d` is strictly inside the circumcircle.
pub fn incircle_exact(a: &IPoint, b: &IPoint, c: &IPoint, d: &IPoint) -> BigInt {
    let (adx, ady) = (&a.x - &d.x, &a.y - &d.y);
    let (bdx, bdy) = (&b.x - &d.x, &b.y - &d.y);
    let (cdx, cdy) = (&c.x - &d.x, &c.y - &d.y);
    let al = &adx * &adx + &ady * &ady;
    let bl = &bdx * &bdx + &bdy * &bdy;
    let cl = &cdx * &cdx + &cdy * &cdy;
    al * (&bdx * &cdy - &cdx * &bdy) - bl * (&adx * &cdy - &cdx * &ady) + cl * (&adx * &bdy - &bdx * &ady)
}

/// Brute-force count of (triangle, vertex) pairs where the vertex lies
/// strictly inside the triangle's circumcircle.
pub fn empty_circle_violations(tri: &Triangulation) -> usize {
    let pts = exact_points(tri.points());
    let mut violations = 0;
    for t in tri.triangles() {
        let [a, b, c] = t.v;
        let sign = orient_exact(&pts[a], &pts[b], &pts[c]);
        assert!(!sign.is_zero(), "degenerate triangle {:?}", t.v);
        for (d, pd) in pts.iter().enumerate() {
            if t.v.contains(&d) {
                continue;
            }
            let det = incircle_exact(&pts[a], &pts[b], &pts[c], pd);
            if det.sign() == sign.sign() && !det.is_zero() {
                violations += 1;
            }
        }
    }
    violations
}

/// Number of points on the convex hull boundary (including points in the
/// relative interior of hull edges), by brute force over all point pairs.
pub fn hull_point_count(points: &[Point2]) -> usize {
    let pts = exact_points(points);
    let n = pts.len();
    let mut on_hull = vec![false; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || pts[i] == pts[j] {
                continue;
            }
            // i -> j is a hull edge direction if no point is strictly right of it.
            let supporting = (0..n).all(|k| !orient_exact(&pts[i], &pts[j], &pts[k]).is_negative());
            if supporting {
                for k in 0..n {
                    if orient_exact(&pts[i], &pts[j], &pts[k]).is_zero() {
                        on_hull[k] = true;
                    }
                }
            }
        }
    }
    on_hull.iter().filter(|&&h| h).count()
}

/// Exact strict point-in-polygon test by crossing parity; points on the
/// boundary count as outside.
pub fn strictly_inside(poly: &[Point2], p: Point2) -> bool {
    let mut all = poly.to_vec();
    all.push(p);
    let mut qs = exact_points(&all);
    let qp = qs.pop().expect("query point");
    let n = qs.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (&qs[i], &qs[(i + 1) % n]);
        let o = orient_exact(a, b, &qp);
        let within_x = qp.x >= a.x.clone().min(b.x.clone()) && qp.x <= a.x.clone().max(b.x.clone());
        let within_y = qp.y >= a.y.clone().min(b.y.clone()) && qp.y <= a.y.clone().max(b.y.clone());
        if o.is_zero() && within_x && within_y {
            return false;
        }
        // The edge crosses the horizontal line through p to the right of p
        // exactly when p lies on the side of the edge given by its direction.
        if (a.y > qp.y) != (b.y > qp.y) {
            let upward = b.y > a.y;
            if o.is_positive() == upward {
                inside = !inside;
            }
        }
    }
    inside
}

/// Closed-segment intersection, exact: true when `ab` and `cd` share any
/// point, including touching endpoints and collinear overlap.
pub fn segments_meet_exact(a: &IPoint, b: &IPoint, c: &IPoint, d: &IPoint) -> bool {
    let within = |p: &IPoint, q: &IPoint, r: &IPoint| {
        r.x >= p.x.clone().min(q.x.clone())
            && r.x <= p.x.clone().max(q.x.clone())
            && r.y >= p.y.clone().min(q.y.clone())
            && r.y <= p.y.clone().max(q.y.clone())
    };
    let (d1, d2) = (orient_exact(a, b, c), orient_exact(a, b, d));
    let (d3, d4) = (orient_exact(c, d, a), orient_exact(c, d, b));
    if d1.sign() * d2.sign() == num_bigint::Sign::Minus && d3.sign() * d4.sign() == num_bigint::Sign::Minus {
        return true;
    }
    (d1.is_zero() && within(a, b, c))
        || (d2.is_zero() && within(a, b, d))
        || (d3.is_zero() && within(c, d, a))
        || (d4.is_zero() && within(c, d, b))
}

/// Generator count predicted by accumulating one cycle plus one filament per
/// inner-cycle vertex for each ring beyond the first.
pub fn accumulated_generators(vn: &VortexNerve) -> usize {
    1 + vn.cycles.windows(2).map(|w| w[0].vertices.len() + 1).sum::<usize>()
}

/// Checks that every vertex of each cycle lies strictly inside the next one.
pub fn strictly_nested(vn: &VortexNerve) -> bool {
    vn.cycles.windows(2).all(|w| {
        let outer = w[1].polygon();
        strictly_inside(&outer, vn.nucleus) && w[0].polygon().iter().all(|&p| strictly_inside(&outer, p))
    })
}

pub fn write_png(frame: &GrayFrame, path: &Path) {
    let img = image::GrayImage::from_raw(frame.width() as u32, frame.height() as u32, frame.pixels().to_vec())
        .expect("buffer matches dimensions");
    img.save(path).expect("png written");
}

/// Expected Betti numbers of the planted 20-frame sequence, `None` where the
/// frame is degenerate.
pub fn planted_expectation(frame: usize) -> Option<usize> {
    match frame {
        0..=5 | 12..=15 => Some(8),
        6..=11 => Some(10),
        _ => None,
    }
}

/// Writes the planted sequence: 6-spoke layouts (Betti 8) in frames 0-5 and
/// 12-15, 8-spoke layouts (Betti 10) in 6-11, and two-hole frames in 16-19.
pub fn write_planted_sequence(dir: &Path) {
    use vortex_barcode::synth::{fan_frame, sparse_frame};
    for i in 0..20 {
        let frame = match planted_expectation(i) {
            Some(8) => fan_frame(6, i),
            Some(_) => fan_frame(8, i),
            None => sparse_frame(i),
        };
        write_png(&frame, &dir.join(format!("frame_{i}.png")));
    }
}
