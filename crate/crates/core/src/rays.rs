//! Partition of the `6^n` triangles of `Sd^n Δ₂` into `2^n` rays around the
//! vertex `A`, built by recursion on `n`. A checker verifies the partition on
//! the chain encoding; the crossing count bounds paths avoiding `A`.
//!
//! The vertices `A, B, C` are the original vertices 0, 1, 2. Side `AB` acts
//! as ray 0 and side `AC` as ray `2^n + 1`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::sset::{standard_simplex, SimplexRef, SimplicialSet};
use crate::subdivision::{barycenter, sd};

/// Deepest subdivision `build_rays` accepts.
pub const MAX_RAY_DEPTH: usize = 6;

const A: usize = 0;
const NOT_C: u32 = 0b100;
const NOT_B: u32 = 0b010;
const NOT_A: u32 = 0b001;

/// Roles of the vertices of a triangle in the recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Contains `A`. Edge `A x` borders ray `i - 1` and edge `A y` borders ray `i + 1`.
    Fan { x: usize, y: usize },
    /// `edge` borders ray `i + 1`; `apex` lies on the boundary with ray `i - 1`.
    TypeA { edge: [usize; 2], apex: usize },
    /// `edge` borders ray `i - 1`; `apex` lies on the boundary with ray `i + 1`.
    TypeB { edge: [usize; 2], apex: usize },
}

impl Orientation {
    pub fn name(&self) -> &'static str {
        match self {
            Orientation::Fan { .. } => "fan",
            Orientation::TypeA { .. } => "type-2a",
            Orientation::TypeB { .. } => "type-2b",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RayTriangle {
    /// id of the 2-simplex in `Sd^n Δ₂`
    pub simplex: usize,
    pub vertices: [usize; 3],
    pub ray: usize,
    pub orientation: Orientation,
}

#[derive(Clone, Debug)]
pub struct LabeledTriangulation {
    pub n: usize,
    pub space: SimplicialSet,
    /// barycentric coordinates of each vertex with respect to `A, B, C`
    pub positions: Vec<[f64; 3]>,
    /// bitmask of the original vertices spanning the carrier face of each vertex
    pub carriers: Vec<u32>,
    /// one entry per 2-simplex, in simplex order
    pub triangles: Vec<RayTriangle>,
}

impl LabeledTriangulation {
    pub fn ray_count(&self) -> usize {
        1 << self.n
    }

    /// The chain of faces behind a triangle, as the labels of its vertices.
    pub fn chain(&self, t: usize) -> Vec<String> {
        self.triangles[t].vertices.iter().map(|&v| self.space.vertex_name(v)).collect()
    }

    /// Ray of the triangle containing a point given in barycentric
    /// coordinates, if the point is inside `ABC`.
    pub fn ray_at(&self, point: [f64; 3]) -> Option<usize> {
        let plane = |p: [f64; 3]| (p[1] + 0.5 * p[2], p[2]);
        let q = plane(point);
        self.triangles.iter().find_map(|t| {
            let [a, b, c] = t.vertices.map(|v| plane(self.positions[v]));
            let cross = |u: (f64, f64), v: (f64, f64)| (v.0 - u.0) * (q.1 - u.1) - (v.1 - u.1) * (q.0 - u.0);
            let s = [cross(a, b), cross(b, c), cross(c, a)];
            let eps = 1e-12;
            let inside = s.iter().all(|&x| x >= -eps) || s.iter().all(|&x| x <= eps);
            inside.then_some(t.ray)
        })
    }

    pub fn to_json(&self) -> Value {
        let name = |v: usize| self.space.vertex_name(v);
        let triangles: Vec<Value> = (0..self.triangles.len())
            .map(|t| {
                let tri = &self.triangles[t];
                let roles = match tri.orientation {
                    Orientation::Fan { x, y } => json!({ "toward_ab": name(x), "toward_ac": name(y) }),
                    Orientation::TypeA { edge, apex } | Orientation::TypeB { edge, apex } => {
                        json!({ "edge": [name(edge[0]), name(edge[1])], "apex": name(apex) })
                    }
                };
                json!({
                    "chain": self.chain(t),
                    "ray": tri.ray,
                    "type": tri.orientation.name(),
                    "roles": roles,
                })
            })
            .collect();
        json!({ "n": self.n, "rays": self.ray_count(), "triangles": triangles })
    }
}

fn edge_of(x: &SimplicialSet, u: usize, v: usize) -> SimplexRef {
    x.simplices_with_vertices(&[u, v])
        .first()
        .or_else(|| x.simplices_with_vertices(&[v, u]).first())
        .copied()
        .expect("triangle edges are simplices")
}

fn subdivide(
    x: &SimplicialSet,
    positions: &[[f64; 3]],
    carriers: &[u32],
    triangles: &[RayTriangle],
) -> Result<(SimplicialSet, Vec<[f64; 3]>, Vec<u32>, Vec<RayTriangle>)> {
    let y = sd(x)?;
    let mut new_positions = Vec::with_capacity(y.count(0));
    let mut new_carriers = Vec::with_capacity(y.count(0));
    for d in 0..=x.max_dim() {
        for s in x.simplices(d) {
            let vs = x.vertices(s);
            let mut p = [0.0; 3];
            for &v in vs {
                for c in 0..3 {
                    p[c] += positions[v][c] / vs.len() as f64;
                }
            }
            new_positions.push(p);
            new_carriers.push(vs.iter().fold(0, |m, &v| m | carriers[v]));
        }
    }
    let bv = |u: usize| barycenter(x, SimplexRef::vertex(u));
    let be = |u: usize, v: usize| barycenter(x, edge_of(x, u, v));
    let mut out = Vec::with_capacity(triangles.len() * 6);
    for t in triangles {
        let c = barycenter(x, SimplexRef::new(2, t.simplex));
        let i = t.ray;
        let mut push = |corner: usize, toward: usize, ray: usize, orientation: Orientation| {
            let vertices = [bv(corner), be(corner, toward), c];
            let simplex = y.simplices_with_vertices(&vertices)[0].id;
            out.push(RayTriangle { simplex, vertices, ray, orientation });
        };
        match t.orientation {
            Orientation::Fan { x: p, y: q } => {
                push(A, p, 2 * i - 1, Orientation::Fan { x: be(A, p), y: c });
                push(A, q, 2 * i, Orientation::Fan { x: c, y: be(A, q) });
                push(p, A, 2 * i - 1, Orientation::TypeB { edge: [bv(p), be(A, p)], apex: c });
                push(p, q, 2 * i - 1, Orientation::TypeA { edge: [be(p, q), c], apex: bv(p) });
                push(q, A, 2 * i, Orientation::TypeA { edge: [bv(q), be(A, q)], apex: c });
                push(q, p, 2 * i, Orientation::TypeB { edge: [be(p, q), c], apex: bv(q) });
            }
            Orientation::TypeA { edge, apex } | Orientation::TypeB { edge, apex } => {
                let is_a = matches!(t.orientation, Orientation::TypeA { .. });
                let same = |edge, apex| if is_a { Orientation::TypeA { edge, apex } } else { Orientation::TypeB { edge, apex } };
                let flip = |edge, apex| if is_a { Orientation::TypeB { edge, apex } } else { Orientation::TypeA { edge, apex } };
                let (at_apex, rest) = if is_a { (2 * i - 1, 2 * i) } else { (2 * i, 2 * i - 1) };
                for (end, far) in [(edge[0], edge[1]), (edge[1], edge[0])] {
                    push(apex, end, at_apex, same([be(apex, end), c], bv(apex)));
                    push(end, apex, rest, flip([be(apex, end), c], bv(end)));
                    push(end, far, rest, same([bv(end), be(end, far)], c));
                }
            }
        }
    }
    out.sort_by_key(|t| t.simplex);
    Ok((y, new_positions, new_carriers, out))
}

/// The ray partition of `Sd^n Δ₂`.
pub fn build_rays(n: usize) -> Result<LabeledTriangulation> {
    if n > MAX_RAY_DEPTH {
        return Err(Error::Budget(format!("ray partitions are built up to depth {MAX_RAY_DEPTH}")));
    }
    let mut space = standard_simplex(2);
    let mut positions = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut carriers = vec![0b001, 0b010, 0b100];
    let mut triangles = vec![RayTriangle {
        simplex: 0,
        vertices: [0, 1, 2],
        ray: 1,
        orientation: Orientation::Fan { x: 1, y: 2 },
    }];
    for _ in 0..n {
        (space, positions, carriers, triangles) = subdivide(&space, &positions, &carriers, &triangles)?;
    }
    Ok(LabeledTriangulation { n, space, positions, carriers, triangles })
}

/// Which property a [`RayViolation`] breaks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RayClause {
    /// every triangle carries exactly one label in `1..=2^n`
    Partition,
    /// sides `AB` and `AC` lie on the first and last ray
    Sides,
    /// the recorded roles of a triangle match its neighbours
    Orientation,
    /// an interior edge away from `A` either separates consecutive rays or spans one
    EdgeClass,
    /// every label is used
    Nonempty,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RayViolation {
    pub clause: RayClause,
    pub triangle: Option<usize>,
    pub detail: String,
}

struct Adjacency<'a> {
    l: &'a LabeledTriangulation,
    by_edge: BTreeMap<(usize, usize), Vec<usize>>,
    rays_at: Vec<BTreeSet<usize>>,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

impl<'a> Adjacency<'a> {
    fn new(l: &'a LabeledTriangulation) -> Self {
        let mut by_edge: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        let mut rays_at = vec![BTreeSet::new(); l.space.count(0)];
        for (t, tri) in l.triangles.iter().enumerate() {
            let [a, b, c] = tri.vertices;
            for (u, v) in [(a, b), (b, c), (a, c)] {
                by_edge.entry(key(u, v)).or_default().push(t);
            }
            for v in tri.vertices {
                rays_at[v].insert(tri.ray);
            }
        }
        Self { l, by_edge, rays_at }
    }

    fn outside_misses(&self, u: usize, v: usize, mask: u32) -> bool {
        (self.l.carriers[u] | self.l.carriers[v]) & mask == 0
    }

    /// Label on the far side of edge `uv` from triangle `t`; `None` on side `BC`.
    fn across(&self, t: usize, u: usize, v: usize) -> Option<usize> {
        let others = self.by_edge.get(&key(u, v)).map_or(&[][..], Vec::as_slice);
        if let Some(&s) = others.iter().find(|&&s| s != t) {
            return Some(self.l.triangles[s].ray);
        }
        if self.outside_misses(u, v, NOT_C) {
            Some(0)
        } else if self.outside_misses(u, v, NOT_B) {
            Some(self.l.ray_count() + 1)
        } else {
            None
        }
    }

    /// Whether vertex `v` lies in the closure of ray `j`.
    fn on_ray(&self, v: usize, j: usize) -> bool {
        let c = self.l.carriers[v];
        (j == 0 && c & NOT_C == 0) || (j == self.l.ray_count() + 1 && c & NOT_B == 0) || self.rays_at[v].contains(&j)
    }

    /// Number of rays an edge away from `A` crosses: 0 along a ray boundary, 1 otherwise.
    fn crossing_cost(&self, u: usize, v: usize) -> usize {
        let ts = &self.by_edge[&key(u, v)];
        let labels: Vec<usize> = match ts.as_slice() {
            [s] => match self.across(*s, u, v) {
                Some(side) => vec![self.l.triangles[*s].ray, side],
                None => vec![self.l.triangles[*s].ray],
            },
            _ => ts.iter().map(|&s| self.l.triangles[s].ray).collect(),
        };
        usize::from(!(labels.len() == 2 && labels[0].abs_diff(labels[1]) == 1))
    }
}

/// Checks the ray properties on the chain encoding: every violation found,
/// empty when the partition is sound.
pub fn verify_rays(l: &LabeledTriangulation) -> Vec<RayViolation> {
    let mut out = Vec::new();
    let mut report = |clause, triangle, detail: String| out.push(RayViolation { clause, triangle, detail });
    let top = l.ray_count();
    let x = &l.space;

    if l.triangles.len() != x.count(2) {
        report(RayClause::Partition, None, format!("{} labels for {} triangles", l.triangles.len(), x.count(2)));
    }
    let mut seen = vec![false; x.count(2)];
    for (t, tri) in l.triangles.iter().enumerate() {
        let fits = tri.simplex < x.count(2) && {
            let mut vs = tri.vertices;
            vs.sort_unstable();
            let mut ws = x.vertices(SimplexRef::new(2, tri.simplex)).to_vec();
            ws.sort_unstable();
            vs[..] == ws[..]
        };
        if !fits {
            report(RayClause::Partition, Some(t), "vertices do not span the recorded simplex".into());
        } else if std::mem::replace(&mut seen[tri.simplex], true) {
            report(RayClause::Partition, Some(t), format!("simplex {} is labelled twice", tri.simplex));
        }
        if !(1..=top).contains(&tri.ray) {
            report(RayClause::Partition, Some(t), format!("label {} outside 1..={top}", tri.ray));
        }
    }
    if !out.is_empty() {
        return out;
    }

    let adj = Adjacency::new(l);
    let mut report = |clause, triangle, detail: String| out.push(RayViolation { clause, triangle, detail });

    for (&(u, v), ts) in &adj.by_edge {
        if ts.len() > 2 {
            report(RayClause::Partition, Some(ts[2]), format!("edge ({u}, {v}) lies on {} triangles", ts.len()));
        }
        if ts.len() == 1 {
            let ray = l.triangles[ts[0]].ray;
            if adj.outside_misses(u, v, NOT_C) && ray != 1 {
                report(RayClause::Sides, Some(ts[0]), format!("edge ({u}, {v}) on side AB is on ray {ray}"));
            }
            if adj.outside_misses(u, v, NOT_B) && ray != top {
                report(RayClause::Sides, Some(ts[0]), format!("edge ({u}, {v}) on side AC is on ray {ray}"));
            }
        }
    }

    for (t, tri) in l.triangles.iter().enumerate() {
        let i = tri.ray;
        let has_a = tri.vertices.contains(&A);
        let mut vs = tri.vertices;
        vs.sort_unstable();
        match tri.orientation {
            Orientation::Fan { x: p, y: q } => {
                let mut roles = [A, p, q];
                roles.sort_unstable();
                if !has_a || roles != vs {
                    report(RayClause::Orientation, Some(t), "fan roles do not match a triangle at A".into());
                    continue;
                }
                if adj.across(t, A, p) != Some(i - 1) {
                    report(RayClause::Orientation, Some(t), format!("fan side toward AB does not border ray {}", i - 1));
                }
                if adj.across(t, A, q) != Some(i + 1) {
                    report(RayClause::Orientation, Some(t), format!("fan side toward AC does not border ray {}", i + 1));
                }
            }
            Orientation::TypeA { edge, apex } | Orientation::TypeB { edge, apex } => {
                let mut roles = [edge[0], edge[1], apex];
                roles.sort_unstable();
                if has_a || roles != vs || edge.contains(&apex) || edge[0] == edge[1] {
                    report(RayClause::Orientation, Some(t), "edge and apex roles do not match a triangle away from A".into());
                    continue;
                }
                let (edge_ray, apex_ray) = match tri.orientation {
                    Orientation::TypeA { .. } => (i + 1, i - 1),
                    _ => (i - 1, i + 1),
                };
                let name = tri.orientation.name();
                if adj.across(t, edge[0], edge[1]) != Some(edge_ray) {
                    report(RayClause::Orientation, Some(t), format!("{name} edge does not border ray {edge_ray}"));
                }
                if !adj.on_ray(apex, apex_ray) {
                    report(RayClause::Orientation, Some(t), format!("{name} apex is not on ray {apex_ray}"));
                }
                for end in edge {
                    let side = adj.across(t, apex, end);
                    if side.is_some_and(|s| s != i) {
                        report(RayClause::Orientation, Some(t), format!("{name} side edge borders ray {}", side.unwrap()));
                    }
                }
            }
        }
    }

    for (&(u, v), ts) in &adj.by_edge {
        if u == A || ts.len() != 2 {
            continue;
        }
        let (r, s) = (l.triangles[ts[0]].ray, l.triangles[ts[1]].ray);
        let ok = r.abs_diff(s) == 1
            || (r == s && ((adj.on_ray(u, r - 1) && adj.on_ray(v, r + 1)) || (adj.on_ray(v, r - 1) && adj.on_ray(u, r + 1))));
        if !ok {
            report(RayClause::EdgeClass, Some(ts[0]), format!("edge ({u}, {v}) between rays {r} and {s} neither separates nor spans"));
        }
    }

    let used: BTreeSet<usize> = l.triangles.iter().map(|t| t.ray).collect();
    for j in 1..=top {
        if !used.contains(&j) {
            report(RayClause::Nonempty, None, format!("ray {j} is empty"));
        }
    }
    out
}

/// Least number of rays crossed by an edge path from side `AB` to side `AC`
/// avoiding `A`, counting an edge as a crossing unless it runs along the
/// boundary of two consecutive rays.
pub fn crossing_distance(l: &LabeledTriangulation) -> Option<usize> {
    let adj = Adjacency::new(l);
    let nv = l.space.count(0);
    let mut nbrs = vec![Vec::new(); nv];
    for &(u, v) in adj.by_edge.keys() {
        if u != A && v != A {
            let cost = adj.crossing_cost(u, v);
            nbrs[u].push((v, cost));
            nbrs[v].push((u, cost));
        }
    }
    let mut dist = vec![usize::MAX; nv];
    let mut queue = VecDeque::new();
    for v in 1..nv {
        if l.carriers[v] & NOT_C == 0 {
            dist[v] = 0;
            queue.push_back(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &(w, cost) in &nbrs[u] {
            if dist[u] + cost < dist[w] {
                dist[w] = dist[u] + cost;
                if cost == 0 {
                    queue.push_front(w);
                } else {
                    queue.push_back(w);
                }
            }
        }
    }
    (1..nv).filter(|&v| l.carriers[v] & NOT_B == 0).map(|v| dist[v]).filter(|&d| d != usize::MAX).min()
}

/// Whether `v` is the vertex `A`, `B` or `C` of the subdivided triangle.
pub fn corner_of(l: &LabeledTriangulation, v: usize) -> Option<char> {
    match l.carriers[v] {
        c if c == NOT_A => Some('A'),
        c if c == NOT_B => Some('B'),
        c if c == NOT_C => Some('C'),
        _ => None,
    }
}

fn ray_colour(j: usize, rays: usize) -> String {
    let h = (j - 1) as f64 / rays as f64 * 6.0;
    let (s, l) = (0.55, 0.62);
    let c = (1.0 - (2.0 * l - 1.0f64).abs()) * s;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as usize {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

/// The partition as an SVG 1.1 document, one filled polygon per triangle.
pub fn render_svg(l: &LabeledTriangulation) -> String {
    let (w, h, pad) = (400.0, 360.0, 24.0);
    let corners = [(pad, h - pad), (w - pad, h - pad), (w / 2.0, h - pad - (w - 2.0 * pad) * 3f64.sqrt() / 2.0)];
    let place = |p: [f64; 3]| {
        let x = p[0] * corners[0].0 + p[1] * corners[1].0 + p[2] * corners[2].0;
        let y = p[0] * corners[0].1 + p[1] * corners[1].1 + p[2] * corners[2].1;
        (x, y)
    };
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let stroke = if l.n >= 4 { 0.2 } else { 0.6 };
    for t in &l.triangles {
        let pts: Vec<String> = t
            .vertices
            .iter()
            .map(|&v| {
                let (x, y) = place(l.positions[v]);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r##"  <polygon class="ray-{}" points="{}" fill="{}" stroke="#333333" stroke-width="{stroke}"/>"##,
            t.ray,
            pts.join(" "),
            ray_colour(t.ray, l.ray_count())
        );
    }
    for (name, (x, y), dx, dy) in [("A", corners[0], -16.0, 14.0), ("B", corners[1], 6.0, 14.0), ("C", corners[2], -5.0, -6.0)] {
        let _ = writeln!(
            svg,
            r#"  <text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="14">{name}</text>"#,
            x + dx,
            y + dy
        );
    }
    svg.push_str("</svg>\n");
    svg
}
