//! Planar primitives, robust predicates and Delaunay triangulation of
//! centroid sets.
//!
//! Orientation and in-circle signs come from Shewchuk's adaptive-precision
//! predicates (the `robust` crate), so near-cocircular centroids of pixel
//! grids are classified exactly.

use std::collections::BTreeMap;
use std::fmt;

use robust::Coord;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Points closer than this are merged before triangulation.
pub const MERGE_DISTANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("frame is degenerate: {0}")]
    FrameDegenerate(String),
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
    #[error("predicate undefined: reference points are collinear")]
    CollinearReference,
    #[error("polygon is not simple")]
    PolygonNotSimple,
    #[error("polygon needs at least 3 vertices, got {0}")]
    PolygonTooSmall(usize),
    #[error("triangle {tri} is invalid: {reason}")]
    InvalidTriangle { tri: usize, reason: String },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_squared(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    fn coord(&self) -> Coord<f64> {
        Coord { x: self.x, y: self.y }
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
    Collinear,
}

/// Exact orientation of `c` relative to the directed line `a -> b`.
pub fn orientation(a: Point2, b: Point2, c: Point2) -> Orientation {
    let det = robust::orient2d(a.coord(), b.coord(), c.coord());
    if det > 0.0 {
        Orientation::CounterClockwise
    } else if det < 0.0 {
        Orientation::Clockwise
    } else {
        Orientation::Collinear
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CirclePosition {
    Inside,
    On,
    Outside,
}

/// Position of `d` relative to the circle through `a`, `b`, `c`.
///
/// The reference points may be given in either orientation; they are
/// reordered counterclockwise before the determinant is evaluated.
pub fn in_circle(
    a: Point2,
    b: Point2,
    c: Point2,
    d: Point2,
) -> Result<CirclePosition, GeometryError> {
    let (a, b) = match orientation(a, b, c) {
        Orientation::Collinear => return Err(GeometryError::CollinearReference),
        Orientation::CounterClockwise => (a, b),
        Orientation::Clockwise => (b, a),
    };
    Ok(incircle_ccw(a, b, c, d))
}

fn incircle_ccw(a: Point2, b: Point2, c: Point2, d: Point2) -> CirclePosition {
    let det = robust::incircle(a.coord(), b.coord(), c.coord(), d.coord());
    if det > 0.0 {
        CirclePosition::Inside
    } else if det < 0.0 {
        CirclePosition::Outside
    } else {
        CirclePosition::On
    }
}

/// `p` lies on the closed segment `a b` (exact).
pub fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
        && orientation(a, b, p) == Orientation::Collinear
}

/// Closed segments `a b` and `c d` share at least one point.
pub fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    if a.x.max(b.x) < c.x.min(d.x)
        || c.x.max(d.x) < a.x.min(b.x)
        || a.y.max(b.y) < c.y.min(d.y)
        || c.y.max(d.y) < a.y.min(b.y)
    {
        return false;
    }
    let o1 = orientation(a, b, c);
    let o2 = orientation(a, b, d);
    let o3 = orientation(c, d, a);
    let o4 = orientation(c, d, b);
    if o1 != o2
        && o3 != o4
        && o1 != Orientation::Collinear
        && o2 != Orientation::Collinear
        && o3 != Orientation::Collinear
        && o4 != Orientation::Collinear
    {
        return true;
    }
    on_segment(a, b, c) || on_segment(a, b, d) || on_segment(c, d, a) || on_segment(c, d, b)
}

/// Checks that the closed polyline through `poly` is a simple polygon:
/// no repeated vertices, no zero-length edges, and no two edges meeting
/// anywhere except the shared endpoint of consecutive edges.
pub fn is_simple_polygon(poly: &[Point2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if poly[i] == poly[j] {
                return false;
            }
        }
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                // Consecutive edges share one endpoint; they must not fold back.
                let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                let folds = orientation(p, shared, q) == Orientation::Collinear
                    && (on_segment(shared, p, q) || on_segment(shared, q, p));
                if folds {
                    return false;
                }
                continue;
            }
            if segments_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    true
}

/// Strict containment of `q` in the simple polygon `poly`.
///
/// Points on the boundary are reported as outside.
pub fn polygon_contains(poly: &[Point2], q: Point2) -> Result<bool, GeometryError> {
    if poly.len() < 3 {
        return Err(GeometryError::PolygonTooSmall(poly.len()));
    }
    if !is_simple_polygon(poly) {
        return Err(GeometryError::PolygonNotSimple);
    }
    Ok(contains_unchecked(poly, q))
}

/// Winding-number containment without the simplicity check.
pub(crate) fn contains_unchecked(poly: &[Point2], q: Point2) -> bool {
    let n = poly.len();
    let mut winding = 0i32;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if on_segment(a, b, q) {
            return false;
        }
        if a.y <= q.y {
            if b.y > q.y && orientation(a, b, q) == Orientation::CounterClockwise {
                winding += 1;
            }
        } else if b.y <= q.y && orientation(a, b, q) == Orientation::Clockwise {
            winding -= 1;
        }
    }
    winding != 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triangle {
    pub id: usize,
    /// Vertex indices in counterclockwise order.
    pub v: [usize; 3],
}

impl Triangle {
    pub fn contains_vertex(&self, vertex: usize) -> bool {
        self.v.contains(&vertex)
    }

    pub fn edges(&self) -> [(usize, usize); 3] {
        [
            (self.v[0], self.v[1]),
            (self.v[1], self.v[2]),
            (self.v[2], self.v[0]),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Barycenter {
    pub location: Point2,
    pub triangle_id: usize,
}

/// Intersection of the triangle's medians.
pub fn barycenter(tri: &Triangle, points: &[Point2]) -> Barycenter {
    let [a, b, c] = tri.v.map(|i| points[i]);
    Barycenter {
        location: Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0),
        triangle_id: tri.id,
    }
}

/// Undirected edge key, smaller index first.
pub fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A triangulated point set with vertex stars and edge adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    points: Vec<Point2>,
    triangles: Vec<Triangle>,
    vertex_stars: Vec<Vec<usize>>,
    edge_adjacency: BTreeMap<(usize, usize), Vec<usize>>,
    boundary: Vec<bool>,
    input_to_vertex: Vec<usize>,
}

impl Triangulation {
    /// Builds a triangulation from explicit triangles.
    ///
    /// Triangles are reoriented counterclockwise; ids are their positions.
    /// No Delaunay property is asserted, which makes this the entry point for
    /// hand-built complexes.
    pub fn from_triangles(
        points: Vec<Point2>,
        triangles: &[[usize; 3]],
    ) -> Result<Self, GeometryError> {
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(GeometryError::NonFinite(i));
            }
        }
        let mut tris = Vec::with_capacity(triangles.len());
        for (id, t) in triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= points.len()) {
                return Err(GeometryError::InvalidTriangle {
                    tri: id,
                    reason: "vertex index out of range".into(),
                });
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(GeometryError::InvalidTriangle {
                    tri: id,
                    reason: "repeated vertex".into(),
                });
            }
            let v = match orientation(points[t[0]], points[t[1]], points[t[2]]) {
                Orientation::CounterClockwise => *t,
                Orientation::Clockwise => [t[0], t[2], t[1]],
                Orientation::Collinear => {
                    return Err(GeometryError::InvalidTriangle {
                        tri: id,
                        reason: "zero area".into(),
                    })
                }
            };
            tris.push(Triangle { id, v });
        }
        let n = points.len();
        Ok(Self::assemble(points, tris, (0..n).collect()))
    }

    fn assemble(points: Vec<Point2>, triangles: Vec<Triangle>, input_to_vertex: Vec<usize>) -> Self {
        let mut vertex_stars = vec![Vec::new(); points.len()];
        let mut edge_adjacency: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for t in &triangles {
            for &v in &t.v {
                vertex_stars[v].push(t.id);
            }
            for (a, b) in t.edges() {
                edge_adjacency.entry(edge_key(a, b)).or_default().push(t.id);
            }
        }
        let mut boundary = vec![false; points.len()];
        for (&(a, b), tris) in &edge_adjacency {
            if tris.len() == 1 {
                boundary[a] = true;
                boundary[b] = true;
            }
        }
        Triangulation {
            points,
            triangles,
            vertex_stars,
            edge_adjacency,
            boundary,
            input_to_vertex,
        }
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn triangle(&self, id: usize) -> &Triangle {
        &self.triangles[id]
    }

    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    /// Ids of the triangles incident to `v`, ascending.
    pub fn vertex_star(&self, v: usize) -> &[usize] {
        &self.vertex_stars[v]
    }

    pub fn edge_adjacency(&self) -> &BTreeMap<(usize, usize), Vec<usize>> {
        &self.edge_adjacency
    }

    /// Whether `v` lies on the outer boundary of the triangulated region
    /// (the convex hull for Delaunay output).
    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_vertex_count(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    /// Maps an input point index to its (possibly merged) vertex index.
    pub fn vertex_of_input(&self, input: usize) -> usize {
        self.input_to_vertex[input]
    }

    pub fn barycenter(&self, triangle_id: usize) -> Barycenter {
        barycenter(&self.triangles[triangle_id], &self.points)
    }

    pub fn barycenters(&self) -> Vec<Barycenter> {
        self.triangles
            .iter()
            .map(|t| barycenter(t, &self.points))
            .collect()
    }

    /// Corner coordinates of a triangle.
    pub fn corners(&self, triangle_id: usize) -> [Point2; 3] {
        self.triangles[triangle_id].v.map(|i| self.points[i])
    }
}

const GHOST: usize = usize::MAX;

/// Incremental Bowyer-Watson triangulation.
///
/// Exterior space is covered by ghost triangles sharing a vertex at
/// infinity, so the result tiles the convex hull exactly. Every insertion
/// scans the full triangle list for circumcircle conflicts, so the build is
/// quadratic in the number of points. Cocircular ties are then resolved by
/// flipping toward the diagonal with the smaller lower endpoint index.
pub fn delaunay_triangulate(input: &[Point2]) -> Result<Triangulation, GeometryError> {
    for (i, p) in input.iter().enumerate() {
        if !p.is_finite() {
            return Err(GeometryError::NonFinite(i));
        }
    }
    let (points, input_to_vertex) = merge_duplicates(input);
    if points.len() < 3 {
        return Err(GeometryError::FrameDegenerate(format!(
            "{} distinct points, need at least 3",
            points.len()
        )));
    }

    let seed = (2..points.len())
        .find(|&k| orientation(points[0], points[1], points[k]) != Orientation::Collinear)
        .ok_or_else(|| GeometryError::FrameDegenerate("all points are collinear".into()))?;

    let mut tris: Vec<[usize; 3]> = Vec::with_capacity(2 * points.len() + 4);
    let first = match orientation(points[0], points[1], points[seed]) {
        Orientation::CounterClockwise => [0, 1, seed],
        _ => [0, seed, 1],
    };
    tris.push(first);
    for (a, b) in [(first[0], first[1]), (first[1], first[2]), (first[2], first[0])] {
        tris.push([b, a, GHOST]);
    }

    let mut conflict = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for p in 1..points.len() {
        if p == 1 || p == seed {
            continue;
        }
        insert_point(&points, &mut tris, p, &mut conflict, &mut edges);
    }

    let mut real: Vec<[usize; 3]> = tris.into_iter().filter(|t| !t.contains(&GHOST)).collect();
    resolve_cocircular(&points, &mut real);

    // Canonical order: rotate each triangle to start at its smallest vertex,
    // then sort.
    for t in real.iter_mut() {
        let m = (0..3).min_by_key(|&i| t[i]).unwrap_or(0);
        t.rotate_left(m);
    }
    real.sort_unstable();
    let triangles = real
        .into_iter()
        .enumerate()
        .map(|(id, v)| Triangle { id, v })
        .collect();
    Ok(Triangulation::assemble(points, triangles, input_to_vertex))
}

fn merge_duplicates(input: &[Point2]) -> (Vec<Point2>, Vec<usize>) {
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }

    let mut order: Vec<usize> = (0..input.len()).collect();
    order.sort_by(|&a, &b| input[a].x.total_cmp(&input[b].x).then(a.cmp(&b)));
    let mut parent: Vec<usize> = (0..input.len()).collect();
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[pos + 1..] {
            if input[j].x - input[i].x >= MERGE_DISTANCE {
                break;
            }
            if input[i].distance(&input[j]) < MERGE_DISTANCE {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                // The lowest input index represents the merged group.
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }

    let mut points = Vec::new();
    let mut vertex_of_root = vec![usize::MAX; input.len()];
    let mut input_to_vertex = Vec::with_capacity(input.len());
    for i in 0..input.len() {
        let r = root(&mut parent, i);
        if vertex_of_root[r] == usize::MAX {
            points.push(input[r]);
            vertex_of_root[r] = points.len() - 1;
        }
        input_to_vertex.push(vertex_of_root[r]);
    }
    (points, input_to_vertex)
}

fn in_conflict(points: &[Point2], t: &[usize; 3], p: Point2) -> bool {
    if t[2] == GHOST {
        let (a, b) = (points[t[0]], points[t[1]]);
        match orientation(a, b, p) {
            Orientation::CounterClockwise => true,
            Orientation::Clockwise => false,
            Orientation::Collinear => strictly_between(a, b, p),
        }
    } else {
        incircle_ccw(points[t[0]], points[t[1]], points[t[2]], p) == CirclePosition::Inside
    }
}

fn strictly_between(a: Point2, b: Point2, p: Point2) -> bool {
    if a.x != b.x {
        p.x > a.x.min(b.x) && p.x < a.x.max(b.x)
    } else {
        p.y > a.y.min(b.y) && p.y < a.y.max(b.y)
    }
}

fn insert_point(
    points: &[Point2],
    tris: &mut Vec<[usize; 3]>,
    p: usize,
    conflict: &mut Vec<usize>,
    edges: &mut Vec<(usize, usize)>,
) {
    let pt = points[p];
    conflict.clear();
    conflict.extend((0..tris.len()).filter(|&i| in_conflict(points, &tris[i], pt)));
    debug_assert!(!conflict.is_empty(), "point {p} conflicts with nothing");

    // The cavity has a handful of edges, so a sorted vector beats hashing.
    edges.clear();
    for &i in conflict.iter() {
        let t = tris[i];
        for k in 0..3 {
            edges.push((t[k], t[(k + 1) % 3]));
        }
    }
    edges.sort_unstable();

    for &i in conflict.iter().rev() {
        tris.swap_remove(i);
    }
    // Cavity boundary edges are those whose twin is not in the cavity.
    for &(a, b) in edges.iter() {
        if edges.binary_search(&(b, a)).is_ok() {
            continue;
        }
        let t = if a == GHOST {
            [b, p, GHOST]
        } else if b == GHOST {
            [p, a, GHOST]
        } else {
            [a, b, p]
        };
        tris.push(t);
    }
}

fn third_vertex(t: &[usize; 3], a: usize, b: usize) -> usize {
    t.iter().copied().find(|&v| v != a && v != b).unwrap_or(GHOST)
}

/// Directed edge `(from, to)` to the triangle on its left, stored per
/// source vertex. Vertex degrees are small, so lookups are short scans.
struct DirectedEdges {
    out: Vec<Vec<(usize, usize)>>,
}

impl DirectedEdges {
    fn new(vertex_count: usize, tris: &[[usize; 3]]) -> Self {
        let mut edges = DirectedEdges {
            out: vec![Vec::new(); vertex_count],
        };
        for (i, t) in tris.iter().enumerate() {
            edges.insert_triangle(i, t);
        }
        edges
    }

    fn get(&self, a: usize, b: usize) -> Option<usize> {
        self.out[a].iter().find(|&&(to, _)| to == b).map(|&(_, t)| t)
    }

    fn insert_triangle(&mut self, id: usize, t: &[usize; 3]) {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            match self.out[a].iter_mut().find(|(to, _)| *to == b) {
                Some(slot) => slot.1 = id,
                None => self.out[a].push((b, id)),
            }
        }
    }

    fn remove(&mut self, a: usize, b: usize) {
        self.out[a].retain(|&(to, _)| to != b);
    }
}

fn resolve_cocircular(points: &[Point2], tris: &mut [[usize; 3]]) {
    let mut directed = DirectedEdges::new(points.len(), tris);
    let mut work: Vec<(usize, usize)> = directed
        .out
        .iter()
        .enumerate()
        .flat_map(|(a, outs)| outs.iter().map(move |&(b, _)| (a, b)))
        .filter(|&(a, b)| a < b && directed.get(b, a).is_some())
        .collect();
    work.sort_unstable();
    work.reverse();

    while let Some((a, b)) = work.pop() {
        let (Some(t1), Some(t2)) = (directed.get(a, b), directed.get(b, a)) else {
            continue;
        };
        let c = third_vertex(&tris[t1], a, b);
        let d = third_vertex(&tris[t2], a, b);
        if c.min(d) >= a.min(b) {
            continue;
        }
        if incircle_ccw(points[a], points[b], points[c], points[d]) != CirclePosition::On {
            continue;
        }
        // Quad in counterclockwise order: a, d, b, c.
        for (u, v) in [(a, b), (b, c), (c, a), (b, a), (a, d), (d, b)] {
            directed.remove(u, v);
        }
        tris[t1] = [a, d, c];
        tris[t2] = [d, b, c];
        directed.insert_triangle(t1, &tris[t1]);
        directed.insert_triangle(t2, &tris[t2]);
        for (u, v) in [(a, d), (d, b), (b, c), (c, a)] {
            if directed.get(v, u).is_some() {
                work.push(edge_key(u, v));
            }
        }
    }
}
