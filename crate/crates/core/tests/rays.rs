use std::collections::BTreeSet;

use sdex::metric::lemma2d_check;
use sdex::rays::{build_rays, crossing_distance, render_svg, verify_rays, Orientation, RayClause};
use sdex::subdivision::barycenter;
use sdex::SimplexRef;

#[test]
fn partitions_verify_through_depth_four() {
    for n in 0..=4 {
        let l = build_rays(n).unwrap();
        let report = verify_rays(&l);
        assert!(report.is_empty(), "n = {n}: {report:?}");
        assert!(l.space.validate().is_empty());
    }
}

#[test]
fn crossing_count_agrees_with_shortest_avoiding_paths() {
    for n in 0..=4 {
        let l = build_rays(n).unwrap();
        let crossings = crossing_distance(&l).unwrap();
        assert_eq!(crossings, 1 << n);
        assert_eq!(crossings, lemma2d_check(n).unwrap().minimum);
    }
}

#[test]
fn first_subdivision_labels() {
    let l = build_rays(1).unwrap();
    // each small triangle is a corner, an edge midpoint and the centre
    let expected = [
        (["[0]", "[0,1]"], 1),
        (["[1]", "[0,1]"], 1),
        (["[1]", "[1,2]"], 1),
        (["[0]", "[0,2]"], 2),
        (["[2]", "[0,2]"], 2),
        (["[2]", "[1,2]"], 2),
    ];
    let mut labels = Vec::new();
    for t in 0..l.triangles.len() {
        let chain = l.chain(t);
        assert_eq!(chain[2], "[0,1,2]");
        let (_, ray) = expected.iter().find(|(c, _)| chain[0] == c[0] && chain[1] == c[1]).unwrap();
        assert_eq!(l.triangles[t].ray, *ray, "{chain:?}");
        labels.push(l.triangles[t].ray);
    }
    labels.sort_unstable();
    assert_eq!(labels, vec![1, 1, 1, 2, 2, 2]);
}

#[test]
fn second_subdivision_point_locations() {
    // one point inside each ray of the second subdivision, in a frame with A = (0, 0), B = (8, 0), C = (4, 6)
    let l = build_rays(2).unwrap();
    let to_barycentric = |x: f64, y: f64| {
        let c = y / 6.0;
        let b = (x - 4.0 * c) / 8.0;
        [1.0 - b - c, b, c]
    };
    for (x, y, ray) in [(3.6, 0.5, 1), (5.5, 1.5, 2), (4.2, 3.0, 3), (2.9, 3.9, 4)] {
        assert_eq!(l.ray_at(to_barycentric(x, y)), Some(ray), "point ({x}, {y})");
    }
}

#[test]
fn recursion_tables_hold_inside_every_triangle() {
    for n in 0..=3 {
        let coarse = build_rays(n).unwrap();
        let fine = build_rays(n + 1).unwrap();
        for t in &coarse.triangles {
            let centre = barycenter(&coarse.space, SimplexRef::new(2, t.simplex));
            let children: Vec<_> = fine.triangles.iter().filter(|c| c.vertices.contains(&centre)).collect();
            assert_eq!(children.len(), 6);
            let i = t.ray;
            let at = |v: usize| barycenter(&coarse.space, SimplexRef::vertex(v));
            for c in children {
                let near = |v: usize| c.vertices.contains(&at(v));
                let expected = match t.orientation {
                    Orientation::TypeA { apex, .. } => {
                        if near(apex) { 2 * i - 1 } else { 2 * i }
                    }
                    Orientation::TypeB { apex, .. } => {
                        if near(apex) { 2 * i } else { 2 * i - 1 }
                    }
                    Orientation::Fan { x, .. } => {
                        let ax = [[0, x], [x, 0]]
                            .iter()
                            .find_map(|e| coarse.space.simplices_with_vertices(e).first().copied())
                            .unwrap();
                        if near(x) || c.vertices.contains(&barycenter(&coarse.space, ax)) {
                            2 * i - 1
                        } else {
                            2 * i
                        }
                    }
                };
                assert_eq!(c.ray, expected);
            }
        }
    }
}

#[test]
fn swapped_label_is_reported() {
    let mut l = build_rays(2).unwrap();
    let t = l.triangles.iter().position(|t| t.ray == 2 && !t.vertices.contains(&0)).unwrap();
    l.triangles[t].ray = 3;
    let report = verify_rays(&l);
    assert!(!report.is_empty());
    assert!(report.iter().any(|v| v.clause == RayClause::Orientation));
}

#[test]
fn out_of_range_label_is_reported() {
    let mut l = build_rays(1).unwrap();
    l.triangles[0].ray = 3;
    let report = verify_rays(&l);
    assert_eq!(report[0].clause, RayClause::Partition);
}

#[test]
fn svg_parses_back() {
    for (n, triangles, colours) in [(0, 1, 1), (1, 6, 2), (2, 36, 4)] {
        let svg = render_svg(&build_rays(n).unwrap());
        let doc = roxmltree::Document::parse(&svg).unwrap();
        let polys: Vec<_> = doc.descendants().filter(|e| e.has_tag_name("polygon")).collect();
        assert_eq!(polys.len(), triangles);
        let fills: BTreeSet<&str> = polys.iter().map(|p| p.attribute("fill").unwrap()).collect();
        assert_eq!(fills.len(), colours);
        let texts: Vec<&str> = doc.descendants().filter(|e| e.has_tag_name("text")).filter_map(|e| e.text()).collect();
        assert_eq!(texts, vec!["A", "B", "C"]);
        assert_eq!(svg, render_svg(&build_rays(n).unwrap()));
    }
}
