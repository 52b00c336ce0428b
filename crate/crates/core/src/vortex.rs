//! Barycentric vortex nerves built outward from a maximal nerve complex.
//!
//! Ring 0 is the closed cycle through the barycenters of the nucleus star.
//! Each further ring takes every unused triangle that shares a vertex with
//! the previous ring, orders the barycenters by angle about the nucleus, and
//! is accepted only if the resulting simple polygon strictly encloses the
//! previous cycle. Consecutive rings are joined by filaments, one per inner
//! vertex.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    contains_unchecked, is_simple_polygon, segments_intersect, Barycenter, Point2, Triangulation,
};
use crate::nerve::AlexandroffNerve;

/// Ring limit used when none is configured.
pub const DEFAULT_MAX_RINGS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VortexError {
    #[error("nerve at vertex {nucleus} has degree {degree}; a vortex cycle needs at least 3 triangles")]
    NerveTooSmall { nucleus: usize, degree: usize },
    #[error("nerve at vertex {nucleus} lies on the hull; its barycenters cannot close a ring")]
    RingOpen { nucleus: usize },
    #[error("ring limit must be at least 1")]
    InvalidRingLimit,
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("cannot parse path word: {0}")]
    BadWord(String),
    #[error("generator count {generators} disagrees with ring accumulation {accumulated} at nucleus {nucleus}")]
    InvariantViolation {
        nucleus: usize,
        generators: usize,
        accumulated: usize,
    },
}

/// Free generator of a vortex nerve: one per cycle, one per filament.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GeneratorLabel {
    /// Cycle on the given ring.
    Cycle(usize),
    /// Filament number, 1-based in construction order.
    Filament(usize),
}

impl fmt::Display for GeneratorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorLabel::Cycle(r) => write!(f, "c{r}"),
            GeneratorLabel::Filament(i) => write!(f, "e{i}"),
        }
    }
}

impl FromStr for GeneratorLabel {
    type Err = VortexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || VortexError::BadWord(format!("bad generator {s:?}"));
        let (kind, num) = s.split_at(s.char_indices().nth(1).map(|(i, _)| i).ok_or_else(bad)?);
        let n: usize = num.parse().map_err(|_| bad())?;
        match kind {
            "c" => Ok(GeneratorLabel::Cycle(n)),
            "e" if n >= 1 => Ok(GeneratorLabel::Filament(n)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexCycle {
    pub ring_index: usize,
    /// Barycenters in increasing angle about the nucleus.
    pub vertices: Vec<Barycenter>,
    /// Triangles whose barycenters form this ring.
    pub triangle_ids: Vec<usize>,
    pub generator: GeneratorLabel,
}

impl VortexCycle {
    pub fn polygon(&self) -> Vec<Point2> {
        self.vertices.iter().map(|b| b.location).collect()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filament {
    /// Ring of the outer endpoint; the inner endpoint is on `ring - 1`.
    pub ring: usize,
    pub inner_vertex: usize,
    pub outer_vertex: usize,
    pub generator: GeneratorLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexNerve {
    pub mnc_nucleus: usize,
    pub nucleus: Point2,
    pub cycles: Vec<VortexCycle>,
    pub filaments: Vec<Filament>,
    /// All cycle generators, then all filament generators.
    pub generators: Vec<GeneratorLabel>,
}

impl VortexNerve {
    fn triangles_used(&self, triangle_count: usize) -> Vec<bool> {
        let mut used = vec![false; triangle_count];
        for &t in self.cycles.iter().flat_map(|c| &c.triangle_ids) {
            used[t] = true;
        }
        used
    }

    fn refresh_generators(&mut self) {
        self.generators = self
            .cycles
            .iter()
            .map(|c| c.generator)
            .chain(self.filaments.iter().map(|f| f.generator))
            .collect();
    }

    /// Endpoints of a filament.
    pub fn filament_segment(&self, f: &Filament) -> (Point2, Point2) {
        (
            self.cycles[f.ring - 1].vertices[f.inner_vertex].location,
            self.cycles[f.ring].vertices[f.outer_vertex].location,
        )
    }
}

/// Why ring expansion ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// No unused triangle touches the current ring.
    Exhausted,
    TooFewTriangles,
    NotSimple,
    /// The candidate polygon does not strictly contain the previous cycle.
    NotEnclosing,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expansion {
    Ring(VortexCycle),
    Stop(StopReason),
}

fn angular_order(nucleus: Point2, tri: &Triangulation, triangle_ids: &[usize]) -> Vec<Barycenter> {
    let mut keyed: Vec<(f64, f64, Barycenter)> = triangle_ids
        .iter()
        .map(|&t| {
            let b = tri.barycenter(t);
            let (dx, dy) = (b.location.x - nucleus.x, b.location.y - nucleus.y);
            (dy.atan2(dx), dx * dx + dy * dy, b)
        })
        .collect();
    keyed.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.triangle_id.cmp(&b.2.triangle_id))
    });
    keyed.into_iter().map(|(_, _, b)| b).collect()
}

pub fn build_inner_cycle(
    nerve: &AlexandroffNerve,
    tri: &Triangulation,
) -> Result<VortexCycle, VortexError> {
    if nerve.degree() < 3 {
        return Err(VortexError::NerveTooSmall {
            nucleus: nerve.nucleus,
            degree: nerve.degree(),
        });
    }
    if nerve.on_hull {
        return Err(VortexError::RingOpen {
            nucleus: nerve.nucleus,
        });
    }
    let nucleus = tri.points()[nerve.nucleus];
    let vertices = angular_order(nucleus, tri, &nerve.triangle_ids);
    let polygon: Vec<Point2> = vertices.iter().map(|b| b.location).collect();
    if !is_simple_polygon(&polygon) || !contains_unchecked(&polygon, nucleus) {
        return Err(VortexError::RingOpen {
            nucleus: nerve.nucleus,
        });
    }
    Ok(VortexCycle {
        ring_index: 0,
        vertices,
        triangle_ids: nerve.triangle_ids.clone(),
        generator: GeneratorLabel::Cycle(0),
    })
}

/// Attempts the next ring outward from the last cycle of `state`.
pub fn expand_ring(state: &VortexNerve, tri: &Triangulation) -> Expansion {
    let Some(last) = state.cycles.last() else {
        return Expansion::Stop(StopReason::Exhausted);
    };
    let used = state.triangles_used(tri.triangles().len());
    let ring_vertices: BTreeSet<usize> = last
        .triangle_ids
        .iter()
        .flat_map(|&t| tri.triangle(t).v)
        .collect();
    let candidates: Vec<usize> = ring_vertices
        .iter()
        .flat_map(|&v| tri.vertex_star(v).iter().copied())
        .filter(|&t| !used[t])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if candidates.is_empty() {
        return Expansion::Stop(StopReason::Exhausted);
    }
    if candidates.len() < 3 {
        return Expansion::Stop(StopReason::TooFewTriangles);
    }
    let vertices = angular_order(state.nucleus, tri, &candidates);
    let polygon: Vec<Point2> = vertices.iter().map(|b| b.location).collect();
    if !is_simple_polygon(&polygon) {
        return Expansion::Stop(StopReason::NotSimple);
    }
    let encloses = contains_unchecked(&polygon, state.nucleus)
        && last
            .vertices
            .iter()
            .all(|b| contains_unchecked(&polygon, b.location));
    if !encloses {
        return Expansion::Stop(StopReason::NotEnclosing);
    }
    let ring_index = last.ring_index + 1;
    Expansion::Ring(VortexCycle {
        ring_index,
        vertices,
        triangle_ids: candidates,
        generator: GeneratorLabel::Cycle(ring_index),
    })
}

fn crosses_ring(p: Point2, q: Point2, ring: &[Point2], skip: usize) -> bool {
    let n = ring.len();
    (0..n).any(|i| {
        let j = (i + 1) % n;
        i != skip && j != skip && segments_intersect(p, q, ring[i], ring[j])
    })
}

/// Joins every inner vertex to its nearest outer vertex, skipping targets
/// whose segment would cross an edge of either cycle. Distance ties go to the
/// lower outer index. Filament generators are numbered from 1 here.
pub fn attach_filaments(inner: &VortexCycle, outer: &VortexCycle) -> Vec<Filament> {
    let inner_poly = inner.polygon();
    let outer_poly = outer.polygon();
    inner_poly
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let visible = |j: usize| {
                let q = outer_poly[j];
                !crosses_ring(p, q, &inner_poly, i) && !crosses_ring(p, q, &outer_poly, j)
            };
            let key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            let mut order: Vec<(f64, usize)> = outer_poly
                .iter()
                .enumerate()
                .map(|(j, q)| (p.distance_squared(q), j))
                .collect();
            let nearest = order.iter().copied().min_by(key).expect("outer cycle is nonempty").1;
            // The nearest vertex is almost always visible; only sort when it is not.
            let target = if visible(nearest) {
                nearest
            } else {
                order.sort_by(key);
                order
                    .iter()
                    .map(|&(_, j)| j)
                    .find(|&j| visible(j))
                    .unwrap_or(nearest)
            };
            Filament {
                ring: outer.ring_index,
                inner_vertex: i,
                outer_vertex: target,
                generator: GeneratorLabel::Filament(i + 1),
            }
        })
        .collect()
}

pub fn build_vortex_nerve(
    nerve: &AlexandroffNerve,
    tri: &Triangulation,
    max_rings: usize,
) -> Result<VortexNerve, VortexError> {
    if max_rings == 0 {
        return Err(VortexError::InvalidRingLimit);
    }
    let inner = build_inner_cycle(nerve, tri)?;
    let mut vn = VortexNerve {
        mnc_nucleus: nerve.nucleus,
        nucleus: tri.points()[nerve.nucleus],
        cycles: vec![inner],
        filaments: Vec::new(),
        generators: Vec::new(),
    };
    while vn.cycles.len() < max_rings {
        match expand_ring(&vn, tri) {
            Expansion::Ring(cycle) => {
                let offset = vn.filaments.len();
                let prev = &vn.cycles[vn.cycles.len() - 1];
                let filaments = attach_filaments(prev, &cycle);
                vn.filaments.extend(filaments.into_iter().map(|mut f| {
                    if let GeneratorLabel::Filament(k) = f.generator {
                        f.generator = GeneratorLabel::Filament(k + offset);
                    }
                    f
                }));
                vn.cycles.push(cycle);
            }
            Expansion::Stop(_) => break,
        }
    }
    vn.refresh_generators();
    Ok(vn)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiResult {
    pub value: usize,
    /// Running total of the ring-by-ring accumulation: starts at 1 and adds
    /// `|previous cycle| + 1` for every ring after the first.
    pub per_ring_contributions: Vec<usize>,
    pub nucleus: usize,
}

/// Generator count of the nerve, cross-checked against the ring-by-ring
/// accumulation.
pub fn betti_number(vn: &VortexNerve) -> Result<BettiResult, VortexError> {
    let generators = vn.cycles.len() + vn.filaments.len();
    let mut running = 1usize;
    let mut per_ring_contributions = vec![running];
    for j in 1..vn.cycles.len() {
        running += vn.cycles[j - 1].len() + 1;
        per_ring_contributions.push(running);
    }
    if vn.cycles.is_empty() || running != generators || vn.generators.len() != generators {
        return Err(VortexError::InvariantViolation {
            nucleus: vn.mnc_nucleus,
            generators,
            accumulated: running,
        });
    }
    Ok(BettiResult {
        value: generators,
        per_ring_contributions,
        nucleus: vn.mnc_nucleus,
    })
}

/// One signed traversal of a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStep {
    pub generator: GeneratorLabel,
    pub reverse: bool,
}

impl PathStep {
    pub fn forward(generator: GeneratorLabel) -> Self {
        PathStep {
            generator,
            reverse: false,
        }
    }

    pub fn reverse(generator: GeneratorLabel) -> Self {
        PathStep {
            generator,
            reverse: true,
        }
    }
}

/// Parses words such as `c0 + c0 - e3`.
pub fn parse_path_word(word: &str) -> Result<Vec<PathStep>, VortexError> {
    let mut steps = Vec::new();
    let mut reverse = false;
    let mut expect_term = true;
    for token in word
        .replace('+', " + ")
        .replace('-', " - ")
        .split_whitespace()
    {
        match token {
            "+" | "-" => {
                if token == "-" {
                    reverse = !reverse;
                }
                expect_term = true;
            }
            term => {
                if !expect_term {
                    return Err(VortexError::BadWord(format!("missing operator before {term:?}")));
                }
                steps.push(PathStep {
                    generator: term.parse()?,
                    reverse,
                });
                reverse = false;
                expect_term = false;
            }
        }
    }
    if expect_term && !steps.is_empty() {
        return Err(VortexError::BadWord("dangling operator".into()));
    }
    Ok(steps)
}

/// Reduced path word: generators with nonzero coefficient (always 1).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalForm {
    pub terms: BTreeMap<GeneratorLabel, u8>,
}

impl NormalForm {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, g: GeneratorLabel) -> u8 {
        self.terms.get(&g).copied().unwrap_or(0)
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.keys().map(|g| g.to_string()).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Cycle coefficients add modulo 2; a filament survives once whenever its
/// forward and reverse traversals do not cancel.
pub fn reduce_path_word(vn: &VortexNerve, word: &[PathStep]) -> Result<NormalForm, VortexError> {
    let mut net: BTreeMap<GeneratorLabel, i64> = BTreeMap::new();
    for step in word {
        if !vn.generators.contains(&step.generator) {
            return Err(VortexError::UnknownGenerator(step.generator.to_string()));
        }
        *net.entry(step.generator).or_default() += if step.reverse { -1 } else { 1 };
    }
    let terms = net
        .into_iter()
        .filter_map(|(g, n)| {
            let coefficient = match g {
                GeneratorLabel::Cycle(_) => n.rem_euclid(2) as u8,
                GeneratorLabel::Filament(_) => u8::from(n != 0),
            };
            (coefficient != 0).then_some((g, coefficient))
        })
        .collect();
    Ok(NormalForm { terms })
}
