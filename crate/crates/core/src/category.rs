//! Finite categories and their nerves, with the injectivity conditions that
//! characterize Kan-ness of `N C` and of `Ex^n N C`.

use std::collections::HashMap;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fibrancy::Verdict;
use crate::ordinal::OrdinalMap;
use crate::sset::{horn, standard_simplex, Builder, FaceRecord, SimplexRef, SimplicialSet};
use crate::subdivision::{face_poset, sd_iter, sd_iter_map};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub src: usize,
    pub dst: usize,
}

/// A finite category with a total composition table on composable pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteCategory {
    objects: Vec<String>,
    arrows: Vec<Arrow>,
    identities: Vec<usize>,
    /// `table[g][f] = g ∘ f` whenever `dst f = src g`
    table: Vec<Vec<Option<usize>>>,
    hom: Vec<Vec<Vec<usize>>>,
}

impl FiniteCategory {
    /// Validates composability, associativity and identities. Identities are
    /// recognized from the table.
    pub fn new(objects: Vec<String>, arrows: Vec<Arrow>, table: Vec<Vec<Option<usize>>>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidCategory(m));
        let na = arrows.len();
        if table.len() != na || table.iter().any(|r| r.len() != na) {
            return bad("composition table has the wrong shape".into());
        }
        for a in &arrows {
            if a.src >= objects.len() || a.dst >= objects.len() {
                return bad(format!("arrow {} has an unknown endpoint", a.name));
            }
        }
        for g in 0..na {
            for f in 0..na {
                let composable = arrows[f].dst == arrows[g].src;
                match (composable, table[g][f]) {
                    (true, None) => return bad(format!("{} ∘ {} is missing", arrows[g].name, arrows[f].name)),
                    (false, Some(_)) => {
                        return bad(format!("{} ∘ {} is not composable", arrows[g].name, arrows[f].name))
                    }
                    (true, Some(h)) => {
                        if h >= na || arrows[h].src != arrows[f].src || arrows[h].dst != arrows[g].dst {
                            return bad(format!("{} ∘ {} has the wrong type", arrows[g].name, arrows[f].name));
                        }
                    }
                    (false, None) => {}
                }
            }
        }
        for h in 0..na {
            for g in 0..na {
                let Some(hg) = table[h][g] else { continue };
                for f in 0..na {
                    let Some(gf) = table[g][f] else { continue };
                    if table[hg][f] != table[h][gf] {
                        return bad(format!(
                            "composition is not associative on ({}, {}, {})",
                            arrows[h].name, arrows[g].name, arrows[f].name
                        ));
                    }
                }
            }
        }
        let mut identities = Vec::with_capacity(objects.len());
        for x in 0..objects.len() {
            let id = (0..na).find(|&e| {
                arrows[e].src == x
                    && arrows[e].dst == x
                    && (0..na).all(|f| arrows[f].dst != x || table[e][f] == Some(f))
                    && (0..na).all(|g| arrows[g].src != x || table[g][e] == Some(g))
            });
            match id {
                Some(e) => identities.push(e),
                None => return bad(format!("object {} has no identity", objects[x])),
            }
        }
        let mut hom = vec![vec![Vec::new(); objects.len()]; objects.len()];
        for (i, a) in arrows.iter().enumerate() {
            hom[a.src][a.dst].push(i);
        }
        Ok(Self { objects, arrows, identities, table, hom })
    }

    /// One-object category; `table[x][y]` is the product `x · y`, read as `x ∘ y`.
    pub fn from_monoid(elements: &[&str], table: &[Vec<usize>]) -> Result<Self> {
        let arrows = elements.iter().map(|e| Arrow { name: e.to_string(), src: 0, dst: 0 }).collect();
        let table = table.iter().map(|r| r.iter().map(|&v| Some(v)).collect()).collect();
        Self::new(vec!["*".into()], arrows, table)
    }

    /// The cyclic group of order `n` as a one-object category.
    pub fn cyclic_group(n: usize) -> Self {
        let names: Vec<String> = (0..n)
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "g".to_string(),
                _ => format!("g{i}"),
            })
            .collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_monoid(&refs, &table).expect("cyclic groups are monoids")
    }

    /// The category with an arrow `a -> b` exactly when `a <= b`.
    pub fn from_poset(p: &FinitePoset) -> Self {
        let n = p.len();
        let mut arrows = Vec::new();
        let mut index = HashMap::new();
        for a in 0..n {
            for b in 0..n {
                if p.leq(a, b) {
                    let name = if a == b {
                        format!("id_{}", p.elements[a])
                    } else {
                        format!("{}<{}", p.elements[a], p.elements[b])
                    };
                    index.insert((a, b), arrows.len());
                    arrows.push(Arrow { name, src: a, dst: b });
                }
            }
        }
        let table = arrows
            .iter()
            .map(|g| arrows.iter().map(|f| (f.dst == g.src).then(|| index[&(f.src, g.dst)])).collect())
            .collect();
        Self::new(p.elements.clone(), arrows, table).expect("posets are categories")
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn identity(&self, x: usize) -> usize {
        self.identities[x]
    }

    pub fn is_identity(&self, a: usize) -> bool {
        self.identities[self.arrows[a].src] == a
    }

    /// `g ∘ f`, if composable.
    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        self.table[g][f]
    }

    /// Whether arrow `f` has a two-sided inverse.
    pub fn is_iso(&self, f: usize) -> bool {
        let a = &self.arrows[f];
        self.hom(a.dst, a.src).iter().any(|&g| {
            self.compose(g, f) == Some(self.identity(a.src)) && self.compose(f, g) == Some(self.identity(a.dst))
        })
    }

    pub fn hom(&self, x: usize, y: usize) -> &[usize] {
        &self.hom[x][y]
    }

    pub fn arrow_index(&self, name: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.name == name)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: CategoryWire = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        wire.build()
    }

    pub fn to_json(&self) -> String {
        let wire = FullWire {
            objects: self.objects.clone(),
            arrows: self
                .arrows
                .iter()
                .map(|a| ArrowWire {
                    id: a.name.clone(),
                    src: self.objects[a.src].clone(),
                    dst: self.objects[a.dst].clone(),
                })
                .collect(),
            compose: (0..self.arrows.len())
                .flat_map(|g| (0..self.arrows.len()).map(move |f| (g, f)))
                .filter_map(|(g, f)| {
                    self.table[g][f].map(|h| {
                        [self.arrows[g].name.clone(), self.arrows[f].name.clone(), self.arrows[h].name.clone()]
                    })
                })
                .collect(),
        };
        serde_json::to_string_pretty(&wire).expect("serializable")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrowWire {
    id: String,
    src: String,
    dst: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FullWire {
    objects: Vec<String>,
    arrows: Vec<ArrowWire>,
    compose: Vec<[String; 3]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MonoidWire {
    elements: Vec<String>,
    table: Vec<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PosetWire {
    elements: Vec<String>,
    order: Vec<[String; 2]>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CategoryWire {
    Full(FullWire),
    Monoid(MonoidWire),
    Poset(PosetWire),
}

fn position(names: &[String], name: &str, what: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::Malformed(format!("unknown {what} {name:?}")))
}

impl CategoryWire {
    fn build(self) -> Result<FiniteCategory> {
        match self {
            CategoryWire::Full(w) => {
                let arrows = w
                    .arrows
                    .iter()
                    .map(|a| {
                        Ok(Arrow {
                            name: a.id.clone(),
                            src: position(&w.objects, &a.src, "object")?,
                            dst: position(&w.objects, &a.dst, "object")?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let names: Vec<String> = arrows.iter().map(|a| a.name.clone()).collect();
                let mut table = vec![vec![None; names.len()]; names.len()];
                for [g, f, h] in &w.compose {
                    let (g, f, h) =
                        (position(&names, g, "arrow")?, position(&names, f, "arrow")?, position(&names, h, "arrow")?);
                    table[g][f] = Some(h);
                }
                FiniteCategory::new(w.objects, arrows, table)
            }
            CategoryWire::Monoid(w) => {
                let table = w
                    .table
                    .iter()
                    .map(|r| r.iter().map(|x| position(&w.elements, x, "element")).collect())
                    .collect::<Result<Vec<Vec<usize>>>>()?;
                if table.len() != w.elements.len() || table.iter().any(|r| r.len() != w.elements.len()) {
                    return Err(Error::InvalidCategory("monoid table has the wrong shape".into()));
                }
                let refs: Vec<&str> = w.elements.iter().map(String::as_str).collect();
                FiniteCategory::from_monoid(&refs, &table)
            }
            CategoryWire::Poset(w) => {
                let pairs = w
                    .order
                    .iter()
                    .map(|[a, b]| Ok((position(&w.elements, a, "element")?, position(&w.elements, b, "element")?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(FiniteCategory::from_poset(&FinitePoset::generated(w.elements, &pairs)?))
            }
        }
    }
}

/// Splits a string of arrows into its degeneracy and the identity-free part.
fn normalize(c: &FiniteCategory, start: usize, string: &[usize]) -> (OrdinalMap, usize, Vec<usize>) {
    let mut values = vec![0usize];
    let mut kept = Vec::new();
    for &a in string {
        if c.is_identity(a) {
            values.push(*values.last().unwrap());
        } else {
            kept.push(a);
            values.push(values.last().unwrap() + 1);
        }
    }
    let epi = OrdinalMap::new(&values, kept.len() + 1).expect("weakly increasing onto");
    (epi, start, kept)
}

/// The nerve of `c` through dimension `bound`: non-degenerate `m`-simplices
/// are strings of `m` composable non-identity arrows. The result is marked
/// complete when no string of length `bound + 1` exists.
pub fn nerve(c: &FiniteCategory, bound: usize) -> SimplicialSet {
    let mut b = Builder::new();
    for x in &c.objects {
        b.add_vertex(Some(x.clone()));
    }
    let non_id: Vec<usize> = (0..c.arrows.len()).filter(|&a| !c.is_identity(a)).collect();
    let mut ids: Vec<HashMap<Vec<usize>, usize>> = vec![HashMap::new()];
    let mut strings: Vec<Vec<usize>> = vec![Vec::new()];
    for m in 1..=bound + 1 {
        let mut next = Vec::new();
        for s in &strings {
            for &a in &non_id {
                if m == 1 || c.arrows[a].src == c.arrows[*s.last().unwrap()].dst {
                    let mut t = s.clone();
                    t.push(a);
                    next.push(t);
                }
            }
        }
        if m == bound + 1 {
            let complete = next.is_empty();
            return if complete { b.finish() } else { b.finish_truncated(bound).expect("bounded") };
        }
        let mut table = HashMap::new();
        for s in &next {
            let faces: Vec<FaceRecord> = (0..=m)
                .map(|i| {
                    let (start, face) = string_face(c, s, i);
                    let (epi, start, kept) = normalize(c, start, &face);
                    let target = if kept.is_empty() {
                        SimplexRef::vertex(start)
                    } else {
                        SimplexRef::new(kept.len(), ids[kept.len()][&kept])
                    };
                    FaceRecord::new(epi, target).expect("normal form")
                })
                .collect();
            let label = s.iter().map(|&a| c.arrows[a].name.as_str()).collect::<Vec<_>>().join(",");
            let r = b.add(faces, Some(label)).expect("faces were built first");
            table.insert(s.clone(), r.id);
        }
        ids.push(table);
        strings = next;
    }
    unreachable!()
}

/// `d_i` of a string of arrows: its start object and the shorter string.
fn string_face(c: &FiniteCategory, s: &[usize], i: usize) -> (usize, Vec<usize>) {
    let m = s.len();
    if i == 0 {
        (c.arrows[s[0]].dst, s[1..].to_vec())
    } else if i == m {
        (c.arrows[s[0]].src, s[..m - 1].to_vec())
    } else {
        let mut t = s[..i - 1].to_vec();
        t.push(c.compose(s[i], s[i - 1]).expect("composable string"));
        t.extend_from_slice(&s[i + 1..]);
        (c.arrows[s[0]].src, t)
    }
}

pub fn is_groupoid(c: &FiniteCategory) -> bool {
    (0..c.arrows.len()).all(|f| c.is_iso(f))
}

/// Why a category has no left calculus of fractions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FractionsFailure {
    /// `f : a -> b` and `g : a -> c` admit no `u, v` with `u ∘ f = v ∘ g`.
    Span { f: String, g: String },
    /// `u ∘ w = v ∘ w` but no `z` has `z ∘ u = z ∘ v`.
    Pair { u: String, v: String, w: String },
}

/// Span completion and coequalization of parallel pairs equalized by an
/// arrow, checked over all arrows.
pub fn left_fractions_check(c: &FiniteCategory) -> Option<FractionsFailure> {
    let na = c.arrows.len();
    let name = |a: usize| c.arrows[a].name.clone();
    for f in 0..na {
        for g in 0..na {
            if c.arrows[f].src != c.arrows[g].src {
                continue;
            }
            let (b, cc) = (c.arrows[f].dst, c.arrows[g].dst);
            let completes = (0..c.objects.len()).any(|d| {
                c.hom(b, d)
                    .iter()
                    .any(|&u| c.hom(cc, d).iter().any(|&v| c.compose(u, f) == c.compose(v, g)))
            });
            if !completes {
                return Some(FractionsFailure::Span { f: name(f), g: name(g) });
            }
        }
    }
    for u in 0..na {
        for v in 0..na {
            let (au, av) = (&c.arrows[u], &c.arrows[v]);
            if u == v || au.src != av.src || au.dst != av.dst {
                continue;
            }
            for w in (0..na).filter(|&w| c.arrows[w].dst == au.src) {
                if c.compose(u, w) != c.compose(v, w) {
                    continue;
                }
                let coequalized = (0..c.objects.len())
                    .any(|d| c.hom(au.dst, d).iter().any(|&z| c.compose(z, u) == c.compose(z, v)));
                if !coequalized {
                    return Some(FractionsFailure::Pair { u: name(u), v: name(v), w: name(w) });
                }
            }
        }
    }
    None
}

/// A finite partial order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePoset {
    elements: Vec<String>,
    order: Vec<Vec<bool>>,
}

impl FinitePoset {
    pub fn new(elements: Vec<String>, order: Vec<Vec<bool>>) -> Result<Self> {
        let n = elements.len();
        let bad = |m: &str| Err(Error::InvalidCategory(m.into()));
        if order.len() != n || order.iter().any(|r| r.len() != n) {
            return bad("order table has the wrong shape");
        }
        for a in 0..n {
            if !order[a][a] {
                return bad("order is not reflexive");
            }
            for b in 0..n {
                if a != b && order[a][b] && order[b][a] {
                    return bad("order is not antisymmetric");
                }
                for c in 0..n {
                    if order[a][b] && order[b][c] && !order[a][c] {
                        return bad("order is not transitive");
                    }
                }
            }
        }
        Ok(Self { elements, order })
    }

    /// The order generated by the given relations.
    pub fn generated(elements: Vec<String>, relations: &[(usize, usize)]) -> Result<Self> {
        let n = elements.len();
        let mut order = vec![vec![false; n]; n];
        for (a, row) in order.iter_mut().enumerate() {
            row[a] = true;
        }
        for &(a, b) in relations {
            order[a][b] = true;
        }
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    if order[a][k] && order[k][b] {
                        order[a][b] = true;
                    }
                }
            }
        }
        Self::new(elements, order)
    }

    /// `[k] = {0 < 1 < ... < k}`.
    pub fn linear(k: usize) -> Self {
        let elements = (0..=k).map(|i| i.to_string()).collect();
        let order = (0..=k).map(|a| (0..=k).map(|b| a <= b).collect()).collect();
        Self { elements, order }
    }

    /// `a < b`, `a < c`.
    pub fn v_shape() -> Self {
        Self::generated(vec!["a".into(), "b".into(), "c".into()], &[(0, 1), (0, 2)]).expect("a poset")
    }

    /// The non-degenerate simplices of a vertex-determined simplicial set
    /// under the face relation.
    pub fn of_faces(x: &SimplicialSet) -> Result<Self> {
        let p = face_poset(x)?;
        let elements = p
            .elements()
            .iter()
            .map(|&s| {
                let names: Vec<String> = x.vertices(s).iter().map(|&v| x.vertex_name(v)).collect();
                format!("[{}]", names.join(","))
            })
            .collect();
        Ok(Self { elements, order: p.order_table() })
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.order[a][b]
    }

    /// Whether the listing order is a linear extension.
    fn is_linear_extension(&self) -> bool {
        (0..self.len()).all(|a| (0..a).all(|b| !self.order[a][b]))
    }
}

/// An order embedding onto a downward-closed part of `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosetInclusion {
    pub target: FinitePoset,
    pub map: Vec<usize>,
}

/// `cat(Sd^n Δ_k)`: the face poset of `Sd^{n-1} Δ_k`.
pub fn cat_sd_simplex(n: usize, k: usize) -> Result<FinitePoset> {
    if n == 0 {
        return Err(Error::OutOfRange("use FinitePoset::linear for n = 0".into()));
    }
    FinitePoset::of_faces(&sd_iter(&standard_simplex(k), n - 1)?)
}

/// `cat(Sd^n Λ^i_k)` with its inclusion into `cat(Sd^n Δ_k)`.
pub fn cat_sd_horn(n: usize, k: usize, i: usize) -> Result<(FinitePoset, PosetInclusion)> {
    if n == 0 {
        return Err(Error::OutOfRange("use FinitePoset::linear for n = 0".into()));
    }
    let (_, incl) = horn(k, i)?;
    let f = sd_iter_map(&incl, n - 1)?;
    let source = FinitePoset::of_faces(f.source())?;
    let target = FinitePoset::of_faces(f.target())?;
    let tp = face_poset(f.target())?;
    let map = face_poset(f.source())?.elements().iter().map(|&s| tp.index_of(f.image(s).target)).collect();
    Ok((source, PosetInclusion { target, map }))
}

/// A functor from a finite poset: an object per element and an arrow per
/// comparable pair `x <= y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Functor {
    pub objects: Vec<usize>,
    pub arrows: Vec<Vec<Option<usize>>>,
}

impl Functor {
    pub fn to_json_value(&self, p: &FinitePoset, c: &FiniteCategory) -> serde_json::Value {
        let mut arrows = Vec::new();
        for x in 0..p.len() {
            for y in 0..p.len() {
                if x != y && p.leq(x, y) {
                    let a = self.arrows[x][y].expect("complete functor");
                    arrows.push(serde_json::json!([p.elements[x], p.elements[y], c.arrows[a].name]));
                }
            }
        }
        let objects: Vec<serde_json::Value> = (0..p.len())
            .map(|x| serde_json::json!([p.elements[x], c.objects[self.objects[x]]]))
            .collect();
        serde_json::json!({ "objects": objects, "arrows": arrows })
    }
}

/// How a free arrow is normalized under natural isomorphism: by an
/// automorphism of its codomain or of its domain.
#[derive(Clone, Copy, Debug)]
enum Gauge {
    Free,
    Post,
    Pre,
}

#[derive(Clone, Copy, Debug)]
enum Task {
    Object(usize),
    Arrow(usize, usize, Gauge),
}

/// Backtracking over functors `p -> c` extending a partial assignment.
///
/// With `up_to_iso`, only one functor per natural isomorphism class is
/// visited: objects are the least of their isomorphism class, and the first
/// free arrow touching an element is the least in its orbit under the
/// automorphisms of that element's object.
struct FunctorSearch<'a> {
    c: &'a FiniteCategory,
    p: &'a FinitePoset,
    tasks: Vec<Task>,
    /// elements strictly between `x` and `y`, for each task pair
    between: HashMap<(usize, usize), Vec<usize>>,
    fixed: Vec<bool>,
    up_to_iso: bool,
    /// least object isomorphic to each object
    iso_rep: Vec<usize>,
    automorphisms: Vec<Vec<usize>>,
}

impl<'a> FunctorSearch<'a> {
    fn new(c: &'a FiniteCategory, p: &'a FinitePoset, fixed: Vec<bool>) -> Self {
        Self::build(c, p, fixed, false)
    }

    fn up_to_iso(c: &'a FiniteCategory, p: &'a FinitePoset) -> Self {
        Self::build(c, p, vec![false; p.len()], true)
    }

    fn build(c: &'a FiniteCategory, p: &'a FinitePoset, fixed: Vec<bool>, up_to_iso: bool) -> Self {
        debug_assert!(p.is_linear_extension());
        let n = p.len();
        let mut tasks = Vec::new();
        let mut between = HashMap::new();
        let mut settled = vec![false; n];
        for y in 0..n {
            tasks.push(Task::Object(y));
            for x in (0..y).rev() {
                if p.leq(x, y) {
                    let mid: Vec<usize> = (x + 1..y).filter(|&z| p.leq(x, z) && p.leq(z, y)).collect();
                    let gauge = if !up_to_iso || !mid.is_empty() {
                        Gauge::Free
                    } else if !settled[y] {
                        Gauge::Post
                    } else if !settled[x] {
                        Gauge::Pre
                    } else {
                        Gauge::Free
                    };
                    settled[x] = true;
                    settled[y] = true;
                    tasks.push(Task::Arrow(x, y, gauge));
                    between.insert((x, y), mid);
                }
            }
        }
        let objects = c.objects.len();
        let iso_rep = (0..objects)
            .map(|o| (0..=o).find(|&r| c.hom(r, o).iter().any(|&f| c.is_iso(f))).expect("o is isomorphic to itself"))
            .collect();
        let automorphisms = (0..objects).map(|o| c.hom(o, o).iter().copied().filter(|&f| c.is_iso(f)).collect()).collect();
        Self { c, p, tasks, between, fixed, up_to_iso, iso_rep, automorphisms }
    }

    fn is_canonical(&self, h: usize, gauge: Gauge) -> bool {
        let c = self.c;
        match gauge {
            Gauge::Free => true,
            Gauge::Post => self.automorphisms[c.arrows[h].dst].iter().all(|&a| c.compose(a, h) >= Some(h)),
            Gauge::Pre => self.automorphisms[c.arrows[h].src].iter().all(|&a| c.compose(h, a) >= Some(h)),
        }
    }

    fn empty(&self) -> Functor {
        let n = self.p.len();
        Functor { objects: vec![usize::MAX; n], arrows: vec![vec![None; n]; n] }
    }

    fn run(&self, f: &mut Functor, visit: &mut dyn FnMut(&Functor) -> ControlFlow<()>) -> ControlFlow<()> {
        self.step(0, f, visit)
    }

    fn step(&self, t: usize, f: &mut Functor, visit: &mut dyn FnMut(&Functor) -> ControlFlow<()>) -> ControlFlow<()> {
        let Some(&task) = self.tasks.get(t) else {
            return visit(f);
        };
        let c = self.c;
        match task {
            Task::Object(y) => {
                if self.fixed[y] {
                    f.arrows[y][y] = Some(c.identity(f.objects[y]));
                    return self.step(t + 1, f, visit);
                }
                for o in 0..c.objects.len() {
                    if self.up_to_iso && self.iso_rep[o] != o {
                        continue;
                    }
                    f.objects[y] = o;
                    f.arrows[y][y] = Some(c.identity(o));
                    self.step(t + 1, f, visit)?;
                }
                f.objects[y] = usize::MAX;
            }
            Task::Arrow(x, y, gauge) => {
                let mid = &self.between[&(x, y)];
                let forced = mid
                    .first()
                    .map(|&z| c.compose(f.arrows[z][y].unwrap(), f.arrows[x][z].unwrap()).expect("typed"));
                let fixed = self.fixed[x] && self.fixed[y];
                let candidates: Vec<usize> = match (fixed, forced) {
                    (true, Some(h)) => {
                        if f.arrows[x][y] == Some(h) {
                            vec![h]
                        } else {
                            vec![]
                        }
                    }
                    (true, None) => vec![f.arrows[x][y].expect("fixed arrows are given")],
                    (false, Some(h)) => vec![h],
                    (false, None) => c.hom(f.objects[x], f.objects[y]).to_vec(),
                };
                for h in candidates {
                    let consistent = mid
                        .iter()
                        .all(|&z| c.compose(f.arrows[z][y].unwrap(), f.arrows[x][z].unwrap()) == Some(h));
                    if !consistent || !self.is_canonical(h, gauge) {
                        continue;
                    }
                    f.arrows[x][y] = Some(h);
                    self.step(t + 1, f, visit)?;
                }
                if !fixed {
                    f.arrows[x][y] = None;
                }
            }
        }
        ControlFlow::Continue(())
    }
}

/// Every functor `p -> c`, in search order.
pub fn enumerate_functors(p: &FinitePoset, c: &FiniteCategory) -> Vec<Functor> {
    let search = FunctorSearch::new(c, p, vec![false; p.len()]);
    let mut out = Vec::new();
    let mut f = search.empty();
    let _ = search.run(&mut f, &mut |g| {
        out.push(g.clone());
        ControlFlow::Continue(())
    });
    out
}

/// A functor that does not extend along a subdivided horn inclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjectivityFailure {
    pub k: usize,
    pub i: usize,
    pub functor: Functor,
}

/// An object `z` with arrows `u[x] : x -> z` such that `u[y] ∘ g = u[x]`
/// for every `g : x -> y`, i.e. a cocone under the identity functor.
pub fn cocone_over_identity(c: &FiniteCategory) -> Option<(usize, Vec<usize>)> {
    fn rec(c: &FiniteCategory, z: usize, u: &mut Vec<usize>) -> bool {
        let x = u.len();
        if x == c.objects.len() {
            return true;
        }
        for &ux in c.hom(x, z) {
            u.push(ux);
            let consistent = (0..=x).all(|a| {
                (0..=x).all(|b| c.hom(a, b).iter().all(|&g| c.compose(u[b], g) == Some(u[a])))
            });
            if consistent && rec(c, z, u) {
                return true;
            }
            u.pop();
        }
        false
    }
    (0..c.objects.len()).find_map(|z| {
        let mut u = Vec::new();
        rec(c, z, &mut u).then_some((z, u))
    })
}

/// Whether every functor `cat(Sd^n Λ^i_k) -> c` extends to `cat(Sd^n Δ_k)`
/// for `1 <= k <= k_max`.
///
/// A [`cocone_over_identity`] decides the question positively for `n >= 1`:
/// each new element of the subdivided simplex goes to `z`, with the cocone
/// arrows into it.
pub fn poset_injectivity_check(c: &FiniteCategory, n: usize, k_max: usize) -> Result<Verdict<InjectivityFailure>> {
    if n >= 1 && cocone_over_identity(c).is_some() {
        return Ok(Verdict { bound: k_max, failure: None });
    }
    injectivity_search(c, n, k_max, true)
}

/// [`poset_injectivity_check`] over every functor, without the cocone
/// shortcut or the reduction up to isomorphism.
pub fn poset_injectivity_check_exhaustive(
    c: &FiniteCategory,
    n: usize,
    k_max: usize,
) -> Result<Verdict<InjectivityFailure>> {
    injectivity_search(c, n, k_max, false)
}

fn injectivity_search(c: &FiniteCategory, n: usize, k_max: usize, up_to_iso: bool) -> Result<Verdict<InjectivityFailure>> {
    for k in 1..=k_max {
        for i in 0..=k {
            let (p, incl) = cat_sd_horn(n, k, i)?;
            let q = &incl.target;
            let mut fixed = vec![false; q.len()];
            for &y in &incl.map {
                fixed[y] = true;
            }
            let outer = if up_to_iso {
                FunctorSearch::up_to_iso(c, &p)
            } else {
                FunctorSearch::new(c, &p, vec![false; p.len()])
            };
            let inner = FunctorSearch::new(c, q, fixed);
            let mut failure = None;
            let mut f = outer.empty();
            let _ = outer.run(&mut f, &mut |g| {
                let mut h = inner.empty();
                for (x, &qx) in incl.map.iter().enumerate() {
                    h.objects[qx] = g.objects[x];
                    for (y, &qy) in incl.map.iter().enumerate() {
                        h.arrows[qx][qy] = g.arrows[x][y];
                    }
                }
                let extends = inner.run(&mut h, &mut |_| ControlFlow::Break(())).is_break();
                if extends {
                    ControlFlow::Continue(())
                } else {
                    failure = Some(InjectivityFailure { k, i, functor: g.clone() });
                    ControlFlow::Break(())
                }
            });
            if failure.is_some() {
                return Ok(Verdict { bound: k_max, failure });
            }
        }
    }
    Ok(Verdict { bound: k_max, failure: None })
}

/// Small categories spanning groupoids, categories with a left calculus of
/// fractions that are not groupoids, and ones without.
pub fn curated_family() -> Vec<(&'static str, FiniteCategory)> {
    let monoid = |names: &[&str], table: &[Vec<usize>]| FiniteCategory::from_monoid(names, table).expect("a monoid");
    vec![
        ("cyclic-2", FiniteCategory::cyclic_group(2)),
        ("cyclic-3", FiniteCategory::cyclic_group(3)),
        ("idempotent", monoid(&["1", "e"], &[vec![0, 1], vec![1, 1]])),
        // a·a = 0 with 0 absorbing
        ("square-zero", monoid(&["1", "a", "0"], &[vec![0, 1, 2], vec![1, 2, 2], vec![2, 2, 2]])),
        // idempotents a, b with a·b = b·a = b
        ("semilattice", monoid(&["1", "a", "b"], &[vec![0, 1, 2], vec![1, 1, 2], vec![2, 2, 2]])),
        ("v-poset", FiniteCategory::from_poset(&FinitePoset::v_shape())),
        ("linear-1", FiniteCategory::from_poset(&FinitePoset::linear(1))),
        ("linear-2", FiniteCategory::from_poset(&FinitePoset::linear(2))),
        // maps {0,1} -> {0,1}: id, swap, constant 0, constant 1; (g ∘ f)(x) = g(f(x))
        (
            "transformations-2",
            monoid(
                &["id", "swap", "c0", "c1"],
                &[vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![2, 2, 2, 2], vec![3, 3, 3, 3]],
            ),
        ),
        // x ∘ y = y on {a, b}
        ("right-zero", monoid(&["1", "a", "b"], &[vec![0, 1, 2], vec![1, 1, 2], vec![2, 1, 2]])),
        // x ∘ y = x on {a, b}
        ("left-zero", monoid(&["1", "a", "b"], &[vec![0, 1, 2], vec![1, 1, 1], vec![2, 2, 2]])),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Identity-free composable strings of length `m`, by filtering all
    /// `m`-tuples of arrows.
    fn brute_strings(c: &FiniteCategory, m: usize) -> usize {
        if m == 0 {
            return c.objects().len();
        }
        let na = c.arrows().len();
        let mut count = 0;
        let mut t = vec![0usize; m];
        loop {
            let ok = t.iter().all(|&a| !c.is_identity(a))
                && t.windows(2).all(|w| c.arrows()[w[0]].dst == c.arrows()[w[1]].src);
            if ok {
                count += 1;
            }
            let mut i = 0;
            while i < m {
                t[i] += 1;
                if t[i] < na {
                    break;
                }
                t[i] = 0;
                i += 1;
            }
            if i == m {
                return count;
            }
        }
    }

    fn family(name: &str) -> FiniteCategory {
        curated_family().into_iter().find(|(n, _)| *n == name).unwrap().1
    }

    #[test]
    fn nerve_of_terminal_category_is_a_point() {
        let c = FiniteCategory::from_monoid(&["1"], &[vec![0]]).unwrap();
        let n = nerve(&c, 3);
        assert!(!n.is_truncated());
        assert_eq!(n.counts(), vec![1]);
    }

    #[test]
    fn nerve_of_v_poset_is_outer_horn() {
        let n = nerve(&FiniteCategory::from_poset(&FinitePoset::v_shape()), 2);
        let (l, _) = horn(2, 0).unwrap();
        assert!(!n.is_truncated());
        assert_eq!(n.with_labels(|_| None), l.with_labels(|_| None));
    }

    #[test]
    fn nerve_counts_match_string_enumeration() {
        for (name, c) in curated_family() {
            let n = nerve(&c, 3);
            assert!(n.validate().is_empty(), "{name}");
            for m in 0..=3 {
                assert_eq!(n.count(m), brute_strings(&c, m), "{name} in dimension {m}");
            }
        }
        assert_eq!(nerve(&FiniteCategory::cyclic_group(2), 3).counts(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn nerve_of_poset_is_vertex_determined() {
        let n = nerve(&FiniteCategory::from_poset(&FinitePoset::linear(3)), 4);
        assert!(n.is_vertex_determined());
        assert_eq!(n.with_labels(|_| None), standard_simplex(3).with_labels(|_| None));
    }

    #[test]
    fn groupoid_examples() {
        assert!(is_groupoid(&FiniteCategory::cyclic_group(2)));
        assert!(!is_groupoid(&family("idempotent")));
        assert!(!is_groupoid(&family("v-poset")));
    }

    #[test]
    fn fractions_examples() {
        assert_eq!(left_fractions_check(&family("idempotent")), None);
        assert_eq!(left_fractions_check(&FiniteCategory::cyclic_group(3)), None);
        assert!(matches!(left_fractions_check(&family("v-poset")), Some(FractionsFailure::Span { .. })));
    }

    #[test]
    fn subdivided_posets() {
        assert_eq!(cat_sd_simplex(1, 2).unwrap().len(), 7);
        let (h, incl) = cat_sd_horn(1, 2, 0).unwrap();
        assert_eq!(h.len(), 5);
        assert_eq!(incl.target.len(), 7);
        for a in 0..h.len() {
            for b in 0..h.len() {
                assert_eq!(h.leq(a, b), incl.target.leq(incl.map[a], incl.map[b]));
            }
        }
        assert_eq!(cat_sd_simplex(2, 1).unwrap().len(), 5);
        assert!(cat_sd_simplex(0, 1).is_err());
    }

    #[test]
    fn functors_from_linear_order() {
        // functors [1] -> C are the arrows of C
        for (name, c) in curated_family() {
            assert_eq!(enumerate_functors(&FinitePoset::linear(1), &c).len(), c.arrows().len(), "{name}");
        }
    }

    #[test]
    fn injectivity_examples() {
        assert!(poset_injectivity_check(&FiniteCategory::cyclic_group(2), 1, 3).unwrap().holds());
        assert!(poset_injectivity_check(&family("idempotent"), 1, 3).unwrap().holds());
        let v = poset_injectivity_check(&family("v-poset"), 1, 2).unwrap();
        assert_eq!(v.failure.unwrap().k, 2);
    }

    #[test]
    fn json_forms() {
        let c = family("transformations-2");
        assert_eq!(FiniteCategory::from_json(&c.to_json()).unwrap(), c);
        let m = FiniteCategory::from_json(r#"{"elements": ["1", "e"], "table": [["1", "e"], ["e", "e"]]}"#).unwrap();
        assert_eq!(m, family("idempotent"));
        let p = FiniteCategory::from_json(r#"{"elements": ["a", "b", "c"], "order": [["a", "b"], ["a", "c"]]}"#).unwrap();
        assert_eq!(p, family("v-poset"));
        assert!(FiniteCategory::from_json(r#"{"elements": ["1"]}"#).is_err());
    }

    #[test]
    fn invalid_tables_are_rejected() {
        // not associative: (a·a)·b = 1·b = b but a·(a·b) = a·1 = a
        let t = vec![vec![0, 1, 2], vec![1, 0, 0], vec![2, 1, 2]];
        assert!(matches!(FiniteCategory::from_monoid(&["1", "a", "b"], &t), Err(Error::InvalidCategory(_))));
        // no identity
        assert!(FiniteCategory::from_monoid(&["a"], &[vec![0]]).is_ok());
        assert!(FiniteCategory::from_monoid(&["a", "b"], &[vec![0, 0], vec![0, 0]]).is_err());
    }
}
