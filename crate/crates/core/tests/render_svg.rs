use proptest::prelude::*;

use vortex_barcode::barcode::Barcode;
use vortex_barcode::geometry::{delaunay_triangulate, Point2, Triangulation};
use vortex_barcode::nerve::maximal_nerves;
use vortex_barcode::render::{render_barcode_svg, render_frame_overlay_svg, RenderStyle};
use vortex_barcode::synth::{concentric_triangulation, isolated_fan, uniform_points};
use vortex_barcode::vortex::{build_vortex_nerve, VortexNerve, DEFAULT_MAX_RINGS};

/// Canvas conventions the renderer documents: a 1000 px wide canvas with a
/// 20 px margin, plus a 50 px gutter for row labels when labels are shown.
const WIDTH: f64 = 1000.0;
const MARGIN: f64 = 20.0;
const LABEL_GUTTER: f64 = 50.0;
const TOLERANCE: f64 = 0.5;

fn num(node: roxmltree::Node, attr: &str) -> f64 {
    node.attribute(attr)
        .unwrap_or_else(|| panic!("missing {attr}"))
        .parse()
        .unwrap()
}

fn with_class<'a, 'i>(doc: &'a roxmltree::Document<'i>, class: &str) -> Vec<roxmltree::Node<'a, 'i>> {
    doc.descendants().filter(|n| n.attribute("class") == Some(class)).collect()
}

fn point_list(node: roxmltree::Node) -> Vec<(f64, f64)> {
    node.attribute("points")
        .unwrap()
        .split_whitespace()
        .map(|pair| {
            let (x, y) = pair.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

/// Uniform-scale fit of the triangulation's bounding box into the canvas
/// width, keeping the image orientation.
fn expected_map(points: &[Point2]) -> impl Fn(Point2) -> (f64, f64) {
    let min_x = points.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let max_x = points.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let min_y = points.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let max_y = points.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    let span = if max_x > min_x { max_x - min_x } else { max_y - min_y };
    let scale = (WIDTH - 2.0 * MARGIN) / span;
    move |p| (MARGIN + (p.x - min_x) * scale, MARGIN + (p.y - min_y) * scale)
}

fn close(a: (f64, f64), b: (f64, f64)) -> bool {
    (a.0 - b.0).abs() <= TOLERANCE && (a.1 - b.1).abs() <= TOLERANCE
}

fn first_nerve(tri: &Triangulation, max_rings: usize) -> VortexNerve {
    let sel = maximal_nerves(tri).unwrap();
    build_vortex_nerve(&sel.nerves[0], tri, max_rings).unwrap()
}

fn check_overlay(tri: &Triangulation, nerves: &[VortexNerve]) {
    let svg = render_frame_overlay_svg(tri, nerves, &RenderStyle::default());
    let doc = roxmltree::Document::parse(&svg).expect("well-formed SVG");
    let map = expected_map(tri.points());

    let polygons = with_class(&doc, "triangle");
    assert_eq!(polygons.len(), tri.triangles().len());
    for node in polygons {
        let id: usize = node.attribute("data-id").unwrap().parse().unwrap();
        let drawn = point_list(node);
        let want: Vec<(f64, f64)> = tri.corners(id).iter().map(|&p| map(p)).collect();
        assert!(drawn.iter().zip(&want).all(|(&a, &b)| close(a, b)), "triangle {id}");
    }
    let dots = with_class(&doc, "barycenter");
    assert_eq!(dots.len(), tri.triangles().len());
    for node in dots {
        let id: usize = node.attribute("data-triangle").unwrap().parse().unwrap();
        let want = map(tri.barycenter(id).location);
        assert!(close((num(node, "cx"), num(node, "cy")), want));
    }

    let groups = with_class(&doc, "vortex-nerve");
    assert_eq!(groups.len(), nerves.len());
    for (group, vn) in groups.iter().zip(nerves) {
        let cycles: Vec<_> = group.descendants().filter(|n| n.attribute("class") == Some("cycle")).collect();
        assert_eq!(cycles.len(), vn.cycles.len());
        for (node, c) in cycles.iter().zip(&vn.cycles) {
            let drawn = point_list(*node);
            assert_eq!(drawn.len(), c.len());
            assert!(drawn.iter().zip(c.polygon()).all(|(&a, b)| close(a, map(b))));
        }
        let lines: Vec<_> = group.descendants().filter(|n| n.attribute("class") == Some("filament")).collect();
        assert_eq!(lines.len(), vn.filaments.len());
        for (node, f) in lines.iter().zip(&vn.filaments) {
            let a = vn.cycles[f.ring - 1].vertices[f.inner_vertex].location;
            let b = vn.cycles[f.ring].vertices[f.outer_vertex].location;
            assert!(close((num(*node, "x1"), num(*node, "y1")), map(a)));
            assert!(close((num(*node, "x2"), num(*node, "y2")), map(b)));
        }
    }
}

#[test]
fn barcode_examples() {
    let style = RenderStyle::default();
    let mut three = Barcode::new(3);
    for f in 0..3 {
        three.push(f, 8).unwrap();
    }
    let svg = render_barcode_svg(&three, &style);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(with_class(&doc, "band").len(), 1);
    let xs: Vec<f64> = with_class(&doc, "bar").iter().map(|n| num(*n, "x")).collect();
    assert_eq!(xs.len(), 3);
    assert!(((xs[1] - xs[0]) - (xs[2] - xs[1])).abs() <= TOLERANCE && xs[1] > xs[0]);

    let mut two = Barcode::new(2);
    two.push(0, 8).unwrap();
    two.push(1, 5).unwrap();
    let doc_svg = render_barcode_svg(&two, &style);
    let doc = roxmltree::Document::parse(&doc_svg).unwrap();
    let y_of = |v: &str| {
        with_class(&doc, "bar")
            .into_iter()
            .find(|n| n.attribute("data-betti") == Some(v))
            .map(|n| num(n, "y"))
            .unwrap()
    };
    assert!(y_of("5") > y_of("8"), "value 5 must sit below value 8");

    let empty = render_barcode_svg(&Barcode::new(0), &style);
    let doc = roxmltree::Document::parse(&empty).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    assert!(with_class(&doc, "bar").is_empty());
}

#[test]
fn overlay_examples() {
    let single = Triangulation::from_triangles(
        vec![Point2::new(0.0, 0.0), Point2::new(4.0, 0.0), Point2::new(0.0, 3.0)],
        &[[0, 1, 2]],
    )
    .unwrap();
    let svg = render_frame_overlay_svg(&single, &[], &RenderStyle::default());
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(with_class(&doc, "triangle").len(), 1);
    assert_eq!(with_class(&doc, "barycenter").len(), 1);
    check_overlay(&single, &[]);

    let fan = isolated_fan(6);
    let hex = first_nerve(&fan, DEFAULT_MAX_RINGS);
    let svg = render_frame_overlay_svg(&fan, std::slice::from_ref(&hex), &RenderStyle::default());
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let cycles = with_class(&doc, "cycle");
    assert_eq!(cycles.len(), 1);
    assert_eq!(point_list(cycles[0]).len(), 6);
    check_overlay(&fan, &[hex]);

    let rings = concentric_triangulation(6, &[1.0, 2.0]).unwrap();
    let two = first_nerve(&rings, DEFAULT_MAX_RINGS);
    let svg = render_frame_overlay_svg(&rings, std::slice::from_ref(&two), &RenderStyle::default());
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(with_class(&doc, "cycle").len(), 2);
    assert_eq!(with_class(&doc, "filament").len(), 6);
    let style = RenderStyle::default();
    let strokes: Vec<&str> = with_class(&doc, "cycle").iter().map(|n| n.attribute("stroke").unwrap()).collect();
    assert_eq!(strokes, vec![style.cycle_color(0), style.cycle_color(1)]);
    check_overlay(&rings, &[two]);
}

#[test]
fn overlays_of_random_clouds_follow_the_viewport() {
    for seed in 0..25 {
        let tri = delaunay_triangulate(&uniform_points(12 + seed as usize, seed, 500.0)).unwrap();
        let nerves: Vec<VortexNerve> = maximal_nerves(&tri)
            .unwrap()
            .nerves
            .iter()
            .filter_map(|n| build_vortex_nerve(n, &tri, DEFAULT_MAX_RINGS).ok())
            .collect();
        check_overlay(&tri, &nerves);
    }
}

proptest! {
    #[test]
    fn bars_sit_at_their_frame_and_row(
        cols in prop::collection::vec(prop::collection::vec(3usize..9, 0..=3), 1..60),
        labels in any::<bool>(),
    ) {
        let mut bc = Barcode::new(cols.len());
        for (f, values) in cols.iter().enumerate() {
            for &v in values {
                bc.push(f, v).unwrap();
            }
        }
        let style = RenderStyle::default().with_labels(labels);
        let svg = render_barcode_svg(&bc, &style);
        let doc = roxmltree::Document::parse(&svg).expect("well-formed SVG");
        let bars = with_class(&doc, "bar");
        let distinct: usize = cols
            .iter()
            .map(|c| c.iter().collect::<std::collections::BTreeSet<_>>().len())
            .sum();
        prop_assert_eq!(bars.len(), distinct);

        let left = MARGIN + if labels { LABEL_GUTTER } else { 0.0 };
        let pitch = (WIDTH - left - MARGIN) / cols.len() as f64;
        let domain = bc.betti_domain();
        let mut row_y = vec![None; domain.len()];
        for bar in bars {
            let frame: usize = bar.attribute("data-frame").unwrap().parse().unwrap();
            let value: usize = bar.attribute("data-betti").unwrap().parse().unwrap();
            prop_assert!(cols[frame].contains(&value));
            prop_assert!((num(bar, "x") - (left + frame as f64 * pitch)).abs() <= TOLERANCE);
            let row = domain.iter().position(|&v| v == value).unwrap();
            let y = num(bar, "y");
            match row_y[row] {
                None => row_y[row] = Some(y),
                Some(seen) => prop_assert!((seen - y).abs() <= TOLERANCE),
            }
        }
        // Higher Betti values sit higher on the canvas.
        let ys: Vec<f64> = row_y.into_iter().flatten().collect();
        prop_assert!(ys.windows(2).all(|w| w[0] > w[1]));
    }
}
