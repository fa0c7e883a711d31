//! Backtracking search for simplicial maps: hom-set enumeration and
//! extension along monomorphisms.
//!
//! Source simplices are visited vertex by vertex in breadth-first order from
//! the already-fixed part; right after a vertex come the simplices whose last
//! visited vertex it is, highest dimension first. A vertex takes its
//! candidates from the target neighbours common to the images of all earlier
//! vertices it shares an edge with. A simplex of dimension `d >= 1` takes its
//! candidates from an index of the target keyed by the images of its faces
//! `d_0` and `d_d`, so most of the search is forced once the vertices are
//! placed.

use std::collections::{HashMap, VecDeque};
use std::ops::ControlFlow;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sset::{FaceRecord, SimplexRef, SimplicialMap, SimplicialSet};

/// Largest hom-set [`enumerate_maps`] will materialize.
pub const MAX_ENUMERATED_MAPS: usize = 5_000_000;

pub(crate) type Images = Vec<Vec<Option<FaceRecord>>>;

/// Lookup structures over the simplices of a search target.
pub struct TargetIndex {
    space: Arc<SimplicialSet>,
    by_faces: Vec<HashMap<(FaceRecord, FaceRecord), Vec<Candidate>>>,
    out_nbrs: Vec<Vec<usize>>,
    in_nbrs: Vec<Vec<usize>>,
}

impl TargetIndex {
    /// Indexes every simplex (degenerate ones included) through `max_dim`.
    pub fn new(space: Arc<SimplicialSet>, max_dim: usize) -> Result<Self> {
        space.ensure_complete_through(max_dim)?;
        let mut by_faces = vec![HashMap::new()];
        for d in 1..=max_dim {
            let mut m: HashMap<(FaceRecord, FaceRecord), Vec<Candidate>> = HashMap::new();
            for x in space.all_of_dim(d) {
                let faces: Vec<FaceRecord> = (0..=d).map(|i| space.face(&x, i)).collect();
                let key = (faces[0].clone(), faces[d].clone());
                m.entry(key).or_default().push(Candidate { simplex: x, faces });
            }
            by_faces.push(m);
        }
        let n = space.count(0);
        let mut out_nbrs = vec![Vec::new(); n];
        let mut in_nbrs = vec![Vec::new(); n];
        for v in 0..n {
            out_nbrs[v].push(v);
            in_nbrs[v].push(v);
        }
        for e in space.simplices(1) {
            let vs = space.vertices(e);
            out_nbrs[vs[0]].push(vs[1]);
            in_nbrs[vs[1]].push(vs[0]);
        }
        for l in out_nbrs.iter_mut().chain(in_nbrs.iter_mut()) {
            l.sort_unstable();
            l.dedup();
        }
        Ok(Self { space, by_faces, out_nbrs, in_nbrs })
    }

    pub fn space(&self) -> &Arc<SimplicialSet> {
        &self.space
    }

    fn max_dim(&self) -> usize {
        self.by_faces.len() - 1
    }
}

struct Candidate {
    simplex: FaceRecord,
    faces: Vec<FaceRecord>,
}

#[derive(Clone, Debug)]
enum Slot {
    /// `anchors`: earlier vertices joined to `v` by an edge, and whether
    /// the edge points into `v`
    Vertex { v: usize, anchors: Vec<(usize, bool)> },
    Cell(SimplexRef),
}

/// A precomputed visiting order over the free simplices of a source.
pub(crate) struct Plan {
    source: Arc<SimplicialSet>,
    slots: Vec<Slot>,
}

impl Plan {
    /// `fixed[d][id]` marks simplices whose images are supplied up front; the
    /// fixed part must be closed under faces.
    pub(crate) fn new(source: Arc<SimplicialSet>, fixed: &[Vec<bool>]) -> Self {
        let is_fixed = |s: SimplexRef| fixed.get(s.dim).is_some_and(|r| r[s.id]);
        let nv = source.count(0);
        let mut adj = vec![Vec::new(); nv];
        for e in source.simplices(1) {
            let vs = source.vertices(e);
            if vs[0] != vs[1] {
                adj[vs[0]].push(vs[1]);
                adj[vs[1]].push(vs[0]);
            }
        }
        let mut pos = vec![usize::MAX; nv];
        let mut order = Vec::with_capacity(nv);
        let mut queue = VecDeque::new();
        let mut visit = |v: usize, pos: &mut Vec<usize>, queue: &mut VecDeque<usize>| {
            if pos[v] == usize::MAX {
                pos[v] = order.len();
                order.push(v);
                queue.push_back(v);
            }
        };
        for v in 0..nv {
            if is_fixed(SimplexRef::vertex(v)) {
                visit(v, &mut pos, &mut queue);
            }
        }
        let mut next_seed = 0;
        loop {
            while let Some(u) = queue.pop_front() {
                for &w in &adj[u] {
                    visit(w, &mut pos, &mut queue);
                }
            }
            while next_seed < nv && pos[next_seed] != usize::MAX {
                next_seed += 1;
            }
            if next_seed == nv {
                break;
            }
            visit(next_seed, &mut pos, &mut queue);
        }

        let mut groups: Vec<Vec<SimplexRef>> = vec![Vec::new(); nv];
        for s in source.all_simplices() {
            if s.dim == 0 || is_fixed(s) {
                continue;
            }
            let last = source.vertices(s).iter().map(|&v| pos[v]).max().unwrap();
            groups[last].push(s);
        }
        let mut placed: Vec<Vec<bool>> = (0..=source.max_dim())
            .map(|d| (0..source.count(d)).map(|id| is_fixed(SimplexRef::new(d, id))).collect())
            .collect();
        let mut slots = Vec::new();
        for (p, &v) in order.iter().enumerate() {
            if !is_fixed(SimplexRef::vertex(v)) {
                let mut anchors = Vec::new();
                for e in source.simplices(1) {
                    let vs = source.vertices(e);
                    if vs[0] == vs[1] {
                        continue;
                    }
                    if vs[1] == v && pos[vs[0]] < p {
                        anchors.push((vs[0], true));
                    }
                    if vs[0] == v && pos[vs[1]] < p {
                        anchors.push((vs[1], false));
                    }
                }
                anchors.sort_unstable();
                anchors.dedup();
                slots.push(Slot::Vertex { v, anchors });
            }
            placed[0][v] = true;
            // a simplex goes in as soon as its faces are placed, higher dimensions first
            let mut pending = std::mem::take(&mut groups[p]);
            while !pending.is_empty() {
                let ready = |s: &SimplexRef| source.faces(*s).iter().all(|f| placed[f.target.dim][f.target.id]);
                let pick = (0..pending.len())
                    .filter(|&j| ready(&pending[j]))
                    .max_by_key(|&j| (pending[j].dim, std::cmp::Reverse(pending[j].id)))
                    .expect("faces of a group member lie in earlier groups or the group itself");
                let s = pending.remove(pick);
                placed[s.dim][s.id] = true;
                slots.push(Slot::Cell(s));
            }
        }
        Self { source, slots }
    }

    pub(crate) fn empty_images(&self) -> Images {
        (0..=self.source.max_dim()).map(|d| vec![None; self.source.count(d)]).collect()
    }

    /// Depth-first search over all completions of `images`; `accept` filters
    /// candidate images per slot, `visit` sees each complete assignment.
    pub(crate) fn run(
        &self,
        index: &TargetIndex,
        images: &mut Images,
        accept: &dyn Fn(SimplexRef, &FaceRecord) -> bool,
        visit: &mut dyn FnMut(&Images) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        self.step(0, index, images, accept, visit)
    }

    fn step(
        &self,
        k: usize,
        index: &TargetIndex,
        images: &mut Images,
        accept: &dyn Fn(SimplexRef, &FaceRecord) -> bool,
        visit: &mut dyn FnMut(&Images) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let Some(slot) = self.slots.get(k) else {
            return visit(images);
        };
        let x = &index.space;
        match *slot {
            Slot::Vertex { v, ref anchors } => {
                let s = SimplexRef::vertex(v);
                let nbrs = |&(u, into): &(usize, bool)| {
                    let w = vertex_of(images, u);
                    if into {
                        &index.out_nbrs[w]
                    } else {
                        &index.in_nbrs[w]
                    }
                };
                let candidates: Vec<usize> = match anchors.split_first() {
                    Some((first, rest)) => nbrs(first)
                        .iter()
                        .copied()
                        .filter(|c| rest.iter().all(|a| nbrs(a).binary_search(c).is_ok()))
                        .collect(),
                    None => (0..x.count(0)).collect(),
                };
                for c in candidates {
                    let img = FaceRecord::nondegenerate(SimplexRef::vertex(c));
                    if !accept(s, &img) {
                        continue;
                    }
                    images[0][v] = Some(img);
                    self.step(k + 1, index, images, accept, visit)?;
                }
                images[0][v] = None;
            }
            Slot::Cell(s) => {
                let faces = self.source.faces(s);
                let face_images: Vec<FaceRecord> = faces
                    .iter()
                    .map(|f| {
                        let img = images[f.target.dim][f.target.id].as_ref().expect("faces come first");
                        x.apply(&f.epi, img)
                    })
                    .collect();
                let d = s.dim;
                let key = (face_images[0].clone(), face_images[d].clone());
                let Some(bucket) = index.by_faces[d].get(&key) else {
                    return ControlFlow::Continue(());
                };
                for c in bucket {
                    if c.faces[1..d] != face_images[1..d] || !accept(s, &c.simplex) {
                        continue;
                    }
                    images[d][s.id] = Some(c.simplex.clone());
                    self.step(k + 1, index, images, accept, visit)?;
                }
                images[d][s.id] = None;
            }
        }
        ControlFlow::Continue(())
    }
}

fn vertex_of(images: &Images, u: usize) -> usize {
    images[0][u].as_ref().expect("anchor placed earlier").target.id
}

pub(crate) fn to_map(source: &Arc<SimplicialSet>, target: &Arc<SimplicialSet>, images: &Images) -> SimplicialMap {
    let images = images
        .iter()
        .map(|row| row.iter().map(|x| x.clone().expect("complete assignment")).collect())
        .collect();
    SimplicialMap::new_unchecked(source.clone(), target.clone(), images)
}

fn check_dims(a: &SimplicialSet, x: &SimplicialSet) -> Result<()> {
    a.ensure_complete_through(a.max_dim())?;
    x.ensure_complete_through(a.max_dim())
}

/// Every simplicial map `A -> X`, in the canonical search order.
pub fn enumerate_maps(a: &Arc<SimplicialSet>, x: &Arc<SimplicialSet>) -> Result<Vec<SimplicialMap>> {
    check_dims(a, x)?;
    let index = TargetIndex::new(x.clone(), a.max_dim())?;
    let plan = Plan::new(a.clone(), &[]);
    let mut images = plan.empty_images();
    let mut out = Vec::new();
    let mut over = false;
    let _ = plan.run(&index, &mut images, &|_, _| true, &mut |imgs| {
        if out.len() == MAX_ENUMERATED_MAPS {
            over = true;
            return ControlFlow::Break(());
        }
        out.push(to_map(a, x, imgs));
        ControlFlow::Continue(())
    });
    if over {
        return Err(Error::Budget(format!("more than {MAX_ENUMERATED_MAPS} maps")));
    }
    Ok(out)
}

/// `|Hom(A, X)|` without materializing the maps.
pub fn count_maps(a: &Arc<SimplicialSet>, x: &Arc<SimplicialSet>) -> Result<usize> {
    check_dims(a, x)?;
    let index = TargetIndex::new(x.clone(), a.max_dim())?;
    let plan = Plan::new(a.clone(), &[]);
    let mut images = plan.empty_images();
    let mut n = 0usize;
    let _ = plan.run(&index, &mut images, &|_, _| true, &mut |_| {
        n += 1;
        ControlFlow::Continue(())
    });
    Ok(n)
}

/// Extension problems along a fixed monomorphism `i : A ↪ B` into a fixed target.
pub struct Extender {
    inclusion: SimplicialMap,
    index: TargetIndex,
    plan: Plan,
}

impl Extender {
    pub fn new(inclusion: &SimplicialMap, target: Arc<SimplicialSet>) -> Result<Self> {
        if !inclusion.is_mono() {
            return Err(Error::NotMono);
        }
        let b = inclusion.target().clone();
        check_dims(&b, &target)?;
        let index = TargetIndex::new(target, b.max_dim())?;
        Ok(Self::with_index(inclusion, index))
    }

    pub(crate) fn with_index(inclusion: &SimplicialMap, index: TargetIndex) -> Self {
        let b = inclusion.target().clone();
        let mut fixed: Vec<Vec<bool>> = (0..=b.max_dim()).map(|d| vec![false; b.count(d)]).collect();
        for s in inclusion.source().all_simplices() {
            let t = inclusion.image(s).target;
            fixed[t.dim][t.id] = true;
        }
        let plan = Plan::new(b, &fixed);
        Self { inclusion: inclusion.clone(), index, plan }
    }

    pub fn target(&self) -> &Arc<SimplicialSet> {
        self.index.space()
    }

    fn seed(&self, f: &[Vec<FaceRecord>]) -> Images {
        let mut images = self.plan.empty_images();
        for s in self.inclusion.source().all_simplices() {
            let t = self.inclusion.image(s).target;
            images[t.dim][t.id] = Some(f[s.dim][s.id].clone());
        }
        images
    }

    /// First extension of `f` (given by its images on `A`) accepted by `accept`.
    pub(crate) fn find_images(
        &self,
        f: &[Vec<FaceRecord>],
        accept: &dyn Fn(SimplexRef, &FaceRecord) -> bool,
    ) -> Option<Images> {
        let mut images = self.seed(f);
        let mut found = None;
        let _ = self.plan.run(&self.index, &mut images, accept, &mut |imgs| {
            found = Some(imgs.clone());
            ControlFlow::Break(())
        });
        found
    }

    pub(crate) fn exists(&self, f: &[Vec<FaceRecord>]) -> bool {
        let mut images = self.seed(f);
        self.plan
            .run(&self.index, &mut images, &|_, _| true, &mut |_| ControlFlow::Break(()))
            .is_break()
    }

    /// Visits every extension of `f`.
    pub(crate) fn for_each(
        &self,
        f: &[Vec<FaceRecord>],
        visit: &mut dyn FnMut(&Images) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let mut images = self.seed(f);
        self.plan.run(&self.index, &mut images, &|_, _| true, visit)
    }

    pub fn extend(&self, f: &SimplicialMap) -> Option<SimplicialMap> {
        self.find_images(f.images(), &|_, _| true)
            .map(|imgs| to_map(self.inclusion.target(), self.index.space(), &imgs))
    }
}

/// Some `g` with `g ∘ i = f`, the first in search order, if one exists.
pub fn extend(f: &SimplicialMap, i: &SimplicialMap) -> Result<Option<SimplicialMap>> {
    if *f.source() != *i.source() {
        return Err(Error::InvalidMap("f and i have different sources".into()));
    }
    Ok(Extender::new(i, f.target().clone())?.extend(f))
}

/// Visits every map `A -> X` (by images) in canonical order.
pub(crate) fn for_each_map(
    a: &Arc<SimplicialSet>,
    index: &TargetIndex,
    visit: &mut dyn FnMut(&Images) -> ControlFlow<()>,
) -> Result<ControlFlow<()>> {
    check_dims(a, index.space())?;
    if index.max_dim() < a.max_dim() {
        return Err(Error::Truncated { bound: index.max_dim(), needed: a.max_dim() });
    }
    let plan = Plan::new(a.clone(), &[]);
    let mut images = plan.empty_images();
    Ok(plan.run(index, &mut images, &|_, _| true, visit))
}

pub(crate) fn unwrap_images(images: &Images) -> Vec<Vec<FaceRecord>> {
    images
        .iter()
        .map(|row| row.iter().map(|x| x.clone().expect("complete")).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sset::{horn, standard_simplex};
    use crate::subdivision::sd;

    fn arc(x: SimplicialSet) -> Arc<SimplicialSet> {
        Arc::new(x)
    }

    /// Independent count of maps from a vertex-determined `A` into a
    /// vertex-determined `X`: vertex functions under which every simplex of
    /// `A` lands on a (possibly degenerate) simplex of `X`.
    fn brute_force_vertex_maps(a: &SimplicialSet, x: &SimplicialSet) -> usize {
        let na = a.count(0);
        let nx = x.count(0);
        let mut count = 0;
        let mut f = vec![0usize; na];
        loop {
            let ok = a.all_simplices().all(|s| {
                let vs: Vec<usize> = a.vertices(s).iter().map(|&v| f[v]).collect();
                x.find_by_vertices(&vs).is_some()
            });
            if ok {
                count += 1;
            }
            let mut i = 0;
            while i < na {
                f[i] += 1;
                if f[i] < nx {
                    break;
                }
                f[i] = 0;
                i += 1;
            }
            if i == na {
                break;
            }
        }
        count
    }

    #[test]
    fn small_hom_sets() {
        let d0 = arc(standard_simplex(0));
        let d1 = arc(standard_simplex(1));
        let d2 = arc(standard_simplex(2));
        assert_eq!(enumerate_maps(&d0, &d2).unwrap().len(), 3);
        let maps = enumerate_maps(&d1, &d1).unwrap();
        let vs: Vec<Vec<usize>> = maps.iter().map(|m| m.vertex_map()).collect();
        assert_eq!(vs, vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn maps_from_subdivided_interval_match_brute_force() {
        let a = sd(&standard_simplex(1)).unwrap();
        let x = standard_simplex(2);
        let expected = brute_force_vertex_maps(&a, &x);
        // a vertex function f on the path 0 - 2 - 1 needs f(0), f(1) <= f(2): 1 + 4 + 9
        assert_eq!(expected, 14);
        assert_eq!(count_maps(&arc(a), &arc(x)).unwrap(), expected);
    }

    #[test]
    fn yoneda_counts() {
        let targets = [standard_simplex(2), horn(2, 0).unwrap().0, sd(&standard_simplex(1)).unwrap()];
        for x in targets {
            let x = arc(x);
            for m in 0..=3 {
                let dm = arc(standard_simplex(m));
                let all = x.all_of_dim(m).len();
                assert_eq!(count_maps(&dm, &x).unwrap(), all);
            }
        }
    }

    #[test]
    fn enumerated_maps_are_natural_and_distinct() {
        let a = arc(sd(&horn(2, 0).unwrap().0).unwrap());
        let x = arc(standard_simplex(2));
        let maps = enumerate_maps(&a, &x).unwrap();
        assert_eq!(maps.len(), brute_force_vertex_maps(&a, &x));
        for m in &maps {
            assert!(m.naturality_violations().is_empty());
        }
        let set: std::collections::HashSet<_> = maps.iter().map(|m| m.images().to_vec()).collect();
        assert_eq!(set.len(), maps.len());
    }

    #[test]
    fn outer_horn_into_interval_has_no_filler() {
        let (l, incl) = horn(2, 0).unwrap();
        let l = arc(l);
        let d1 = arc(standard_simplex(1));
        // d₂ edge {0,1} ↦ {0,1}; d₁ edge {0,2} ↦ constant at 0
        let f = SimplicialMap::from_vertex_function(l.clone(), d1.clone(), &[0, 1, 0]).unwrap();
        assert!(extend(&f, &incl).unwrap().is_none());
        // both edges ↦ {0,1}
        let g = SimplicialMap::from_vertex_function(l.clone(), d1.clone(), &[0, 1, 1]).unwrap();
        let filler = extend(&g, &incl).unwrap().unwrap();
        assert_eq!(filler.vertex_map(), vec![0, 1, 1]);
        assert_eq!(filler.compose(&incl).unwrap(), g);
    }

    #[test]
    fn extension_along_identity_is_the_map() {
        let x = arc(standard_simplex(2));
        let id = SimplicialMap::identity(x.clone());
        let f = SimplicialMap::from_vertex_function(x.clone(), arc(standard_simplex(1)), &[0, 0, 1]).unwrap();
        assert_eq!(extend(&f, &id).unwrap().unwrap(), f);
    }

    #[test]
    fn truncation_is_enforced() {
        let n = arc(crate::category::nerve(&crate::category::FiniteCategory::cyclic_group(2), 1));
        let d2 = arc(standard_simplex(2));
        assert!(matches!(enumerate_maps(&d2, &n), Err(Error::Truncated { .. })));
    }

    #[test]
    fn search_is_deterministic() {
        let a = arc(sd(&standard_simplex(1)).unwrap());
        let x = arc(horn(2, 1).unwrap().0);
        assert_eq!(enumerate_maps(&a, &x).unwrap(), enumerate_maps(&a, &x).unwrap());
    }
}
