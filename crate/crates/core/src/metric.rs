//! Edge distance on the 1-skeleton and the bounded fibrant-replacement tower
//! `R_j`, with exhaustive checks of the distance bounds behind it.

use std::collections::VecDeque;
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hom::{for_each_map, unwrap_images, Extender, TargetIndex};
use crate::sset::{boundary_inclusion, horn, pushout_many, standard_simplex, FaceRecord, SimplicialMap, SimplicialSet};
use crate::subdivision::{face_poset, sd, sd_iter_map};

/// Upper limit on the cells glued in a single tower stage.
pub const MAX_ATTACHMENTS: usize = 250_000;

/// The undirected 1-skeleton; degenerate edges never appear and loops are dropped.
#[derive(Clone, Debug)]
pub struct SkeletonGraph {
    labels: Vec<String>,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl SkeletonGraph {
    pub fn new(x: &SimplicialSet) -> Self {
        let n = x.count(0);
        let labels = (0..n).map(|v| x.vertex_name(v)).collect();
        let mut edges = Vec::with_capacity(x.count(1));
        let mut adj = vec![Vec::new(); n];
        for e in x.simplices(1) {
            let vs = x.vertices(e);
            let (a, b) = (vs[0].min(vs[1]), vs[0].max(vs[1]));
            edges.push((a, b));
            if a != b {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        Self { labels, edges, adj }
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    /// One entry per non-degenerate 1-simplex, as an unordered pair.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Distances from a set of sources, never entering `blocked` vertices.
    pub fn bfs(&self, sources: &[usize], blocked: &[bool]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() && !blocked.get(s).copied().unwrap_or(false) {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.adj[u] {
                if dist[w].is_none() && !blocked.get(w).copied().unwrap_or(false) {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn distance(&self, a: usize, b: usize) -> Option<usize> {
        self.bfs(&[a], &[])[b]
    }
}

/// Least number of edges on a zig-zag path from `a` to `b`; `None` when
/// they lie in different components.
pub fn edge_distance(x: &SimplicialSet, a: usize, b: usize) -> Result<Option<usize>> {
    let n = x.count(0);
    if a >= n || b >= n {
        return Err(Error::OutOfRange(format!("vertex pair ({a}, {b}) in a set with {n} vertices")));
    }
    Ok(SkeletonGraph::new(x).distance(a, b))
}

/// A pair of vertices whose image is farther apart than the pair itself.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistanceViolation {
    pub a: usize,
    pub b: usize,
    pub before: Option<usize>,
    pub after: Option<usize>,
}

/// Checks `d(a, b) >= d(f(a), f(b))` on the given pairs.
pub fn distance_nonincreasing_check(f: &SimplicialMap, pairs: &[(usize, usize)]) -> Vec<DistanceViolation> {
    let gs = SkeletonGraph::new(f.source());
    let gt = SkeletonGraph::new(f.target());
    let mut out = Vec::new();
    for &(a, b) in pairs {
        let before = gs.distance(a, b);
        let after = gt.distance(f.vertex_image(a), f.vertex_image(b));
        let ok = match (before, after) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(d), Some(e)) => e <= d,
        };
        if !ok {
            out.push(DistanceViolation { a, b, before, after });
        }
    }
    out
}

/// Every unordered pair of distinct vertices.
pub fn all_vertex_pairs(x: &SimplicialSet) -> Vec<(usize, usize)> {
    let n = x.count(0);
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

/// Cells of one horn shape glued during a stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Attachment {
    pub k: usize,
    pub i: usize,
    /// position of the attaching map among all maps glued in the stage
    pub map_id: usize,
}

/// `R_j(U)` with its canonical map `r_j : U -> R_j(U)`.
#[derive(Clone, Debug)]
pub struct TowerStage {
    pub j: usize,
    pub space: Arc<SimplicialSet>,
    pub canonical: SimplicialMap,
    pub attachments: Vec<Attachment>,
}

impl TowerStage {
    pub fn initial(u: Arc<SimplicialSet>) -> Self {
        Self { j: 0, canonical: SimplicialMap::identity(u.clone()), space: u, attachments: Vec::new() }
    }
}

/// A subdivided horn inclusion `Sd^{n+1} Λ^i_k ↪ Sd^{n+1} Δ_k`.
struct HornShape {
    k: usize,
    i: usize,
    inclusion: SimplicialMap,
}

fn horn_shapes(n: usize, k_max: usize) -> Result<Vec<HornShape>> {
    let mut out = Vec::new();
    for k in 1..=k_max {
        for i in 0..=k {
            let (_, incl) = horn(k, i)?;
            out.push(HornShape { k, i, inclusion: sd_iter_map(&incl, n + 1)? });
        }
    }
    Ok(out)
}

/// Visits, shape by shape and in search order, every map from a subdivided
/// horn into `x` that has no extension.
fn for_each_unfilled(
    x: &Arc<SimplicialSet>,
    shapes: &[HornShape],
    limit: usize,
    visit: &mut dyn FnMut(usize, Vec<Vec<FaceRecord>>),
) -> Result<()> {
    let mut seen = 0usize;
    for (t, shape) in shapes.iter().enumerate() {
        let a = shape.inclusion.source().clone();
        let index = TargetIndex::new(x.clone(), a.max_dim())?;
        let ext = Extender::new(&shape.inclusion, x.clone())?;
        let mut over = false;
        let _ = for_each_map(&a, &index, &mut |imgs| {
            let f = unwrap_images(imgs);
            if !ext.exists(&f) {
                if seen == limit {
                    over = true;
                    return ControlFlow::Break(());
                }
                seen += 1;
                visit(t, f);
            }
            ControlFlow::Continue(())
        })?;
        if over {
            return Err(Error::Budget(format!("more than {limit} cells in one stage")));
        }
    }
    Ok(())
}

/// Glues `Sd^{n+1} Δ_k` along every map `Sd^{n+1} Λ^i_k -> R_j` (`k <= k_max`)
/// that does not already extend, all in one simultaneous pushout.
pub fn attach_stage(s: &TowerStage, n: usize, k_max: usize) -> Result<TowerStage> {
    let x = &s.space;
    x.ensure_complete_through(k_max)?;
    let shapes = horn_shapes(n, k_max)?;
    let mut cells: Vec<(SimplicialMap, SimplicialMap)> = Vec::new();
    let mut attachments = Vec::new();
    for_each_unfilled(x, &shapes, MAX_ATTACHMENTS, &mut |t, f| {
        let shape = &shapes[t];
        attachments.push(Attachment { k: shape.k, i: shape.i, map_id: cells.len() });
        let a = shape.inclusion.source().clone();
        cells.push((shape.inclusion.clone(), SimplicialMap::new_unchecked(a, x.clone(), f)));
    })?;
    if cells.is_empty() {
        return Ok(TowerStage { j: s.j + 1, space: x.clone(), canonical: s.canonical.clone(), attachments });
    }
    let p = pushout_many(x, &cells)?;
    let canonical = p.from_x.compose(&s.canonical)?;
    Ok(TowerStage { j: s.j + 1, space: p.space, canonical, attachments })
}

/// Per-stage record of the distance argument.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageCertificate {
    pub j: usize,
    pub vertex_count: usize,
    pub edge_count: usize,
    /// `(k, i, count)` for every horn shape that received cells
    pub attachments: Vec<(usize, usize, usize)>,
    pub distance: Option<usize>,
    pub lift_exists: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TowerCertificate {
    pub n: usize,
    pub j_max: usize,
    pub k_max: usize,
    pub expected_distance: usize,
    pub stages: Vec<StageCertificate>,
}

impl TowerCertificate {
    /// Every stage keeps the endpoints `2^{n+1}` apart and admits no lift.
    pub fn holds(&self) -> bool {
        self.stages.iter().all(|s| s.distance == Some(self.expected_distance) && !s.lift_exists)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Vertices 1 and 2 of `Δ₂` keep their ids in every iterated subdivision:
/// they are the endpoints of the zig-zag `Sd^n Λ⁰₂`.
pub const ZIGZAG_ENDPOINTS: (usize, usize) = (1, 2);

/// Upper limit on the cells of the last stage of a certificate, which are
/// counted and measured but not glued.
pub const MAX_COUNTED_ATTACHMENTS: usize = 4_000_000;

fn counts_by_shape(attachments: impl Iterator<Item = (usize, usize)>) -> Vec<(usize, usize, usize)> {
    let mut counts: Vec<(usize, usize, usize)> = Vec::new();
    for (k, i) in attachments {
        match counts.last_mut() {
            Some(last) if (last.0, last.1) == (k, i) => last.2 += 1,
            _ => counts.push((k, i, 1)),
        }
    }
    counts
}

fn built_stage(stage: &TowerStage, lifting: &SimplicialMap) -> Result<StageCertificate> {
    let (x, y) = ZIGZAG_ENDPOINTS;
    let r = &stage.canonical;
    let g = SkeletonGraph::new(&stage.space);
    Ok(StageCertificate {
        j: stage.j,
        vertex_count: stage.space.count(0),
        edge_count: stage.space.count(1),
        attachments: counts_by_shape(stage.attachments.iter().map(|a| (a.k, a.i))),
        distance: g.distance(r.vertex_image(x), r.vertex_image(y)),
        lift_exists: Extender::new(lifting, stage.space.clone())?.extend(r).is_some(),
    })
}

/// Certifies `R_{j+1}` from `R_j` without gluing every cell. The 1-skeleton
/// of `R_{j+1}` is assembled from the attaching maps. A lift
/// `Sd^n Δ₂ -> R_{j+1}` sends each vertex within `radius` of the image of
/// `U`, so it is searched for in `R_j` plus the cells with a new vertex in
/// that ball.
fn summarized_stage(prev: &TowerStage, lifting: &SimplicialMap, n: usize, k_max: usize, radius: usize) -> Result<StageCertificate> {
    let x = &prev.space;
    x.ensure_complete_through(k_max)?;
    let shapes = horn_shapes(n, k_max)?;
    // per shape: the cell vertex behind each horn vertex, the cell's new
    // vertices, and its edges outside the horn
    let layouts: Vec<(Vec<Option<usize>>, Vec<usize>, Vec<(usize, usize)>)> = shapes
        .iter()
        .map(|shape| {
            let b = shape.inclusion.target();
            let mut horn_vertex = vec![None; b.count(0)];
            for v in 0..shape.inclusion.source().count(0) {
                horn_vertex[shape.inclusion.vertex_image(v)] = Some(v);
            }
            let fresh: Vec<usize> = (0..b.count(0)).filter(|&v| horn_vertex[v].is_none()).collect();
            let in_horn: Vec<bool> = {
                let mut m = vec![false; b.count(1)];
                for e in shape.inclusion.source().simplices(1) {
                    m[shape.inclusion.image(e).target.id] = true;
                }
                m
            };
            let edges = b
                .simplices(1)
                .filter(|e| !in_horn[e.id])
                .map(|e| (b.vertices(e)[0], b.vertices(e)[1]))
                .collect();
            (horn_vertex, fresh, edges)
        })
        .collect();

    let mut graph = SkeletonGraph::new(x);
    let mut edge_count = x.count(1);
    let mut shape_of_cell: Vec<usize> = Vec::new();
    let mut first_fresh: Vec<usize> = Vec::new();
    for_each_unfilled(x, &shapes, MAX_COUNTED_ATTACHMENTS, &mut |t, f| {
        let (horn_vertex, fresh, edges) = &layouts[t];
        let base = graph.vertex_count();
        let place = |v: usize| match horn_vertex[v] {
            Some(h) => f[0][h].target.id,
            None => base + fresh.binary_search(&v).expect("a new vertex"),
        };
        for _ in fresh {
            graph.labels.push(String::new());
            graph.adj.push(Vec::new());
        }
        for &(a, b) in edges {
            let (a, b) = (place(a), place(b));
            graph.edges.push((a.min(b), a.max(b)));
            graph.adj[a].push(b);
            graph.adj[b].push(a);
        }
        edge_count += edges.len();
        shape_of_cell.push(t);
        first_fresh.push(base);
    })?;

    let (ex, ey) = ZIGZAG_ENDPOINTS;
    let r = &prev.canonical;
    let distance = graph.distance(r.vertex_image(ex), r.vertex_image(ey));
    let sources: Vec<usize> = (0..r.source().count(0)).map(|v| r.vertex_image(v)).collect();
    let near = graph.bfs(&sources, &[]);
    let touching: Vec<bool> = (0..shape_of_cell.len())
        .map(|c| {
            let fresh = layouts[shape_of_cell[c]].1.len();
            (first_fresh[c]..first_fresh[c] + fresh).any(|v| near[v].is_some_and(|d| d <= radius))
        })
        .collect();
    let lift_exists = if touching.iter().any(|&t| t) {
        let mut cells = Vec::new();
        let mut c = 0;
        for_each_unfilled(x, &shapes, MAX_COUNTED_ATTACHMENTS, &mut |t, f| {
            if touching[c] {
                let a = shapes[t].inclusion.source().clone();
                cells.push((shapes[t].inclusion.clone(), SimplicialMap::new_unchecked(a, x.clone(), f)));
            }
            c += 1;
        })?;
        let p = pushout_many(x, &cells)?;
        let r = p.from_x.compose(r)?;
        Extender::new(lifting, p.space)?.extend(&r).is_some()
    } else {
        Extender::new(lifting, x.clone())?.extend(r).is_some()
    };
    Ok(StageCertificate {
        j: prev.j + 1,
        vertex_count: graph.vertex_count(),
        edge_count,
        attachments: counts_by_shape(shape_of_cell.iter().map(|&t| (shapes[t].k, shapes[t].i))),
        distance,
        lift_exists,
    })
}

/// Builds `R_0, ..., R_{j_max}` for `U = Sd^n Λ⁰₂`, gluing subdivided horns
/// of dimension at most `k_max`, and records the endpoint distance and the
/// absence of an extension of `r_j` along `Sd^n Λ⁰₂ ↪ Sd^n Δ₂` at each stage.
/// The last stage is certified from its attaching maps without being glued.
pub fn certify_counterexample(n: usize, j_max: usize, k_max: usize) -> Result<TowerCertificate> {
    let (_, incl) = horn(2, 0)?;
    let lifting = sd_iter_map(&incl, n)?;
    let u = lifting.source().clone();
    let sources: Vec<usize> = (0..u.count(0)).map(|v| lifting.vertex_image(v)).collect();
    let radius = SkeletonGraph::new(lifting.target())
        .bfs(&sources, &[])
        .into_iter()
        .map(|d| d.expect("Sd^n Δ₂ is connected"))
        .max()
        .unwrap_or(0);
    let mut stage = TowerStage::initial(u);
    let mut stages = Vec::new();
    for j in 0..=j_max {
        if j > 0 && j == j_max {
            stages.push(summarized_stage(&stage, &lifting, n, k_max, radius)?);
        } else {
            if j > 0 {
                stage = attach_stage(&stage, n, k_max)?;
            }
            stages.push(built_stage(&stage, &lifting)?);
        }
    }
    Ok(TowerCertificate { n, j_max, k_max, expected_distance: 1 << (n + 1), stages })
}

/// `Sd^n Δ_k` together with the carrier of each vertex: the bitmask of
/// original vertices spanning the smallest face of `Δ_k` containing it.
pub fn subdivided_simplex_with_carriers(k: usize, n: usize) -> Result<(SimplicialSet, Vec<u32>)> {
    if k >= 32 {
        return Err(Error::OutOfRange(format!("Δ_{k} is too large for carrier masks")));
    }
    let mut x = standard_simplex(k);
    let mut carriers: Vec<u32> = (0..=k).map(|v| 1 << v).collect();
    for _ in 0..n {
        let p = face_poset(&x)?;
        carriers = p
            .elements()
            .iter()
            .map(|&s| x.vertices(s).iter().fold(0, |m, &v| m | carriers[v]))
            .collect();
        x = sd(&x)?;
    }
    Ok((x, carriers))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lemma2dReport {
    pub n: usize,
    /// least length of a path from side `AB` to side `AC` avoiding `A`
    pub minimum: usize,
    pub witness: (usize, usize),
    pub lower_bound: usize,
}

impl Lemma2dReport {
    pub fn holds(&self) -> bool {
        self.minimum >= self.lower_bound
    }
}

/// In `Sd^n Δ₂` with `A, B, C` the original vertices 0, 1, 2: the least
/// length of an edge path avoiding `A` from a vertex of side `AB` to a
/// vertex of side `AC`, both other than `A`.
pub fn lemma2d_check(n: usize) -> Result<Lemma2dReport> {
    let (x, carriers) = subdivided_simplex_with_carriers(2, n)?;
    let g = SkeletonGraph::new(&x);
    let a = 0;
    let mut blocked = vec![false; x.count(0)];
    blocked[a] = true;
    let on_ab: Vec<usize> = (0..x.count(0)).filter(|&v| v != a && carriers[v] & 0b100 == 0).collect();
    let on_ac: Vec<usize> = (0..x.count(0)).filter(|&v| v != a && carriers[v] & 0b010 == 0).collect();
    let mut best: Option<(usize, (usize, usize))> = None;
    for &s in &on_ab {
        let dist = g.bfs(&[s], &blocked);
        for &t in &on_ac {
            if let Some(d) = dist[t] {
                if best.is_none_or(|(b, _)| d < b) {
                    best = Some((d, (s, t)));
                }
            }
        }
    }
    let (minimum, witness) = best.ok_or_else(|| Error::OutOfRange("sides are disconnected".into()))?;
    Ok(Lemma2dReport { n, minimum, witness, lower_bound: 1 << n })
}

/// A vertex pair of `Sd^n ∂Δ_k` whose distance in the boundary differs from
/// the distance of its image in `Sd^n Δ_k`, the latter being below `2^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Lemma3dViolation {
    pub a: usize,
    pub b: usize,
    pub boundary: Option<usize>,
    pub interior: usize,
}

/// Compares distances in `Sd^n ∂Δ_k` and `Sd^n Δ_k` for every vertex pair
/// whose interior distance is below `2^n`.
pub fn lemma3d_check(k: usize, n: usize) -> Result<Vec<Lemma3dViolation>> {
    if k < 2 {
        return Err(Error::OutOfRange("the boundary comparison needs k >= 2".into()));
    }
    let f = sd_iter_map(&boundary_inclusion(k)?, n)?;
    let gb = SkeletonGraph::new(f.source());
    let gi = SkeletonGraph::new(f.target());
    let bound = 1usize << n;
    let nb = gb.vertex_count();
    let mut out = Vec::new();
    for a in 0..nb {
        let db = gb.bfs(&[a], &[]);
        let di = gi.bfs(&[f.vertex_image(a)], &[]);
        for b in a + 1..nb {
            let Some(interior) = di[f.vertex_image(b)] else { continue };
            if interior < bound && db[b] != Some(interior) {
                out.push(Lemma3dViolation { a, b, boundary: db[b], interior });
            }
        }
    }
    Ok(out)
}
