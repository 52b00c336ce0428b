//! Alexandroff nerves (vertex stars) and maximal nerve complexes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Triangulation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NerveError {
    #[error("vertex {vertex} out of range (triangulation has {count} vertices)")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("triangulation has no triangles")]
    EmptyTriangulation,
}

/// All triangles sharing the nucleus vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlexandroffNerve {
    pub nucleus: usize,
    /// Ascending triangle ids.
    pub triangle_ids: Vec<usize>,
    pub on_hull: bool,
}

impl AlexandroffNerve {
    pub fn degree(&self) -> usize {
        self.triangle_ids.len()
    }
}

pub fn vertex_star(tri: &Triangulation, v: usize) -> Result<AlexandroffNerve, NerveError> {
    if v >= tri.vertex_count() {
        return Err(NerveError::VertexOutOfRange {
            vertex: v,
            count: tri.vertex_count(),
        });
    }
    let mut triangle_ids = tri.vertex_star(v).to_vec();
    triangle_ids.sort_unstable();
    Ok(AlexandroffNerve {
        nucleus: v,
        triangle_ids,
        on_hull: tri.is_boundary_vertex(v),
    })
}

/// Every nerve of maximal degree, by ascending nucleus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MncSelection {
    pub nerves: Vec<AlexandroffNerve>,
    pub max_degree: usize,
}

impl MncSelection {
    pub fn len(&self) -> usize {
        self.nerves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nerves.is_empty()
    }
}

pub fn maximal_nerves(tri: &Triangulation) -> Result<MncSelection, NerveError> {
    if tri.triangles().is_empty() {
        return Err(NerveError::EmptyTriangulation);
    }
    let max_degree = (0..tri.vertex_count())
        .map(|v| tri.vertex_star(v).len())
        .max()
        .unwrap_or(0);
    let nerves = (0..tri.vertex_count())
        .filter(|&v| tri.vertex_star(v).len() == max_degree)
        .map(|v| vertex_star(tri, v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MncSelection { nerves, max_degree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{delaunay_triangulate, Point2};
    use crate::synth;

    #[test]
    fn hexagonal_fan_center_has_degree_six() {
        let tri = synth::isolated_fan(6);
        let star = vertex_star(&tri, 0).unwrap();
        assert_eq!(star.degree(), 6);
        assert!(!star.on_hull);
        assert!(star.triangle_ids.iter().all(|&t| tri.triangle(t).contains_vertex(0)));
    }

    #[test]
    fn unit_square_corner_degrees_follow_diagonal() {
        let sq = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let tri = delaunay_triangulate(&sq).unwrap();
        // Diagonal 0-2: corners 0 and 2 touch both triangles.
        let degrees: Vec<_> = (0..4).map(|v| vertex_star(&tri, v).unwrap().degree()).collect();
        assert_eq!(degrees, vec![2, 1, 2, 1]);
    }

    #[test]
    fn single_triangle_star_and_ties() {
        let pts = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let tri = delaunay_triangulate(&pts).unwrap();
        assert_eq!(vertex_star(&tri, 2).unwrap().degree(), 1);
        let mnc = maximal_nerves(&tri).unwrap();
        assert_eq!(mnc.max_degree, 1);
        assert_eq!(mnc.nerves.iter().map(|n| n.nucleus).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(mnc.nerves.iter().all(|n| n.on_hull));
    }

    #[test]
    fn out_of_range_vertex() {
        let tri = synth::isolated_fan(4);
        assert_eq!(
            vertex_star(&tri, 99),
            Err(NerveError::VertexOutOfRange { vertex: 99, count: 5 })
        );
    }

    #[test]
    fn fan_with_hanging_triangle_has_single_mnc() {
        // Hexagonal fan plus one triangle glued to the outside of edge 1-2.
        let mut points: Vec<Point2> = synth::isolated_fan(6).points().to_vec();
        points.push(Point2::new(1.5, 0.9));
        let mut tris: Vec<[usize; 3]> = (0..6).map(|i| [0, 1 + i, 1 + (i + 1) % 6]).collect();
        tris.push([1, 7, 2]);
        let tri = Triangulation::from_triangles(points, &tris).unwrap();
        let mnc = maximal_nerves(&tri).unwrap();
        assert_eq!(mnc.max_degree, 6);
        assert_eq!(mnc.len(), 1);
        assert_eq!(mnc.nerves[0].nucleus, 0);
    }

    #[test]
    fn two_equal_fans_tie_in_nucleus_order() {
        let a = synth::isolated_fan(5);
        let mut points = a.points().to_vec();
        let shift = points.len();
        points.extend(a.points().iter().map(|p| Point2::new(p.x + 10.0, p.y)));
        let mut tris: Vec<[usize; 3]> = a.triangles().iter().map(|t| t.v).collect();
        tris.extend(a.triangles().iter().map(|t| t.v.map(|v| v + shift)));
        let tri = Triangulation::from_triangles(points, &tris).unwrap();
        let mnc = maximal_nerves(&tri).unwrap();
        assert_eq!(mnc.max_degree, 5);
        assert_eq!(mnc.nerves.iter().map(|n| n.nucleus).collect::<Vec<_>>(), vec![0, shift]);
    }

    #[test]
    fn empty_triangulation_is_an_error() {
        let tri = Triangulation::from_triangles(vec![Point2::new(0.0, 0.0)], &[]).unwrap();
        assert_eq!(maximal_nerves(&tri), Err(NerveError::EmptyTriangulation));
    }
}
