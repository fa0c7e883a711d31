//! Finite simplicial sets presented by their non-degenerate simplices.
//!
//! Each non-degenerate `d`-simplex stores `d + 1` face records. A face record
//! `(epi, target)` says "this face is `target` degenerated along `epi`", which
//! is the Eilenberg–Zilber normal form of the face. Every other simplex of the
//! simplicial set is such a pair as well, so all operator actions reduce to
//! composing monotone maps and walking face records.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ordinal::OrdinalMap;

/// A non-degenerate simplex of a particular simplicial set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SimplexRef {
    pub dim: usize,
    pub id: usize,
}

impl SimplexRef {
    pub fn new(dim: usize, id: usize) -> Self {
        Self { dim, id }
    }

    pub fn vertex(id: usize) -> Self {
        Self { dim: 0, id }
    }
}

impl fmt::Display for SimplexRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.dim, self.id)
    }
}

/// An arbitrary simplex in normal form: `target` degenerated along the
/// surjection `epi : [m] -> [target.dim]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceRecord {
    pub epi: OrdinalMap,
    pub target: SimplexRef,
}

impl FaceRecord {
    pub fn new(epi: OrdinalMap, target: SimplexRef) -> Result<Self> {
        if !epi.is_surjective() {
            return Err(Error::Malformed(format!("face operator {epi} is not surjective")));
        }
        if epi.target_dim() != target.dim {
            return Err(Error::Malformed(format!(
                "operator {epi} does not land in dimension {}",
                target.dim
            )));
        }
        Ok(Self { epi, target })
    }

    /// The simplex itself, with no degeneracy applied.
    pub fn nondegenerate(target: SimplexRef) -> Self {
        Self { epi: OrdinalMap::identity(target.dim + 1), target }
    }

    pub fn dim(&self) -> usize {
        self.epi.source_dim()
    }

    pub fn is_degenerate(&self) -> bool {
        !self.epi.is_identity()
    }
}

impl fmt::Debug for FaceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.epi.is_identity() {
            write!(f, "{}", self.target)
        } else {
            write!(f, "{}*{}", self.epi, self.target)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Cell {
    faces: Vec<FaceRecord>,
    vertices: Vec<usize>,
    label: Option<String>,
}

/// A finite (possibly truncated) simplicial set.
///
/// `dim_bound` is always explicit. When `truncated` is false the listed
/// simplices are all of them; when it is true the set is only known through
/// `dim_bound` and anything needing higher simplices fails with
/// [`Error::Truncated`].
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "wire::SetWire", into = "wire::SetWire")]
pub struct SimplicialSet {
    dim_bound: usize,
    truncated: bool,
    cells: Vec<Vec<Cell>>,
    vertex_index: OnceLock<HashMap<Vec<usize>, Vec<SimplexRef>>>,
}

impl PartialEq for SimplicialSet {
    fn eq(&self, other: &Self) -> bool {
        self.dim_bound == other.dim_bound
            && self.truncated == other.truncated
            && self.cells == other.cells
    }
}

impl Eq for SimplicialSet {}

impl fmt::Debug for SimplicialSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimplicialSet")
            .field("counts", &self.counts())
            .field("dim_bound", &self.dim_bound)
            .field("truncated", &self.truncated)
            .finish()
    }
}

/// Incremental construction in (dimension, id) order.
#[derive(Default)]
pub struct Builder {
    cells: Vec<Vec<Cell>>,
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, label: Option<String>) -> SimplexRef {
        if self.cells.is_empty() {
            self.cells.push(Vec::new());
        }
        let id = self.cells[0].len();
        self.cells[0].push(Cell { faces: Vec::new(), vertices: vec![id], label });
        SimplexRef::vertex(id)
    }

    /// Adds a non-degenerate simplex of dimension `faces.len() - 1` whose
    /// faces are already present. Only the shape of the records is checked
    /// here; the simplicial identities are the business of [`SimplicialSet::validate`].
    pub fn add(&mut self, faces: Vec<FaceRecord>, label: Option<String>) -> Result<SimplexRef> {
        if faces.is_empty() {
            return Ok(self.add_vertex(label));
        }
        let dim = faces.len() - 1;
        if dim == 0 {
            return Err(Error::Malformed("a vertex has no faces".into()));
        }
        for (i, face) in faces.iter().enumerate() {
            self.check_face(dim, i, face)?;
        }
        let mut vertices = self.vertices_of(&faces[dim]);
        let last = self.vertices_of(&faces[0]);
        vertices.push(*last.last().unwrap());
        while self.cells.len() <= dim {
            self.cells.push(Vec::new());
        }
        let id = self.cells[dim].len();
        self.cells[dim].push(Cell { faces, vertices, label });
        Ok(SimplexRef::new(dim, id))
    }

    fn check_face(&self, dim: usize, i: usize, face: &FaceRecord) -> Result<()> {
        let t = face.target;
        if t.dim >= dim || self.cells.get(t.dim).map_or(true, |c| t.id >= c.len()) {
            return Err(Error::Malformed(format!("face {i} points at missing simplex {t}")));
        }
        if face.epi.domain_size() != dim || face.epi.target_dim() != t.dim || !face.epi.is_surjective() {
            return Err(Error::Malformed(format!(
                "face {i} of a {dim}-simplex has ill-shaped operator {}",
                face.epi
            )));
        }
        Ok(())
    }

    fn vertices_of(&self, face: &FaceRecord) -> Vec<usize> {
        let tv = &self.cells[face.target.dim][face.target.id].vertices;
        face.epi.raw().iter().map(|&j| tv[j as usize]).collect()
    }

    pub fn count(&self, dim: usize) -> usize {
        self.cells.get(dim).map_or(0, Vec::len)
    }

    /// A complete finite simplicial set.
    pub fn finish(mut self) -> SimplicialSet {
        while self.cells.last().is_some_and(Vec::is_empty) {
            self.cells.pop();
        }
        let dim_bound = self.cells.len().saturating_sub(1);
        SimplicialSet::from_cells(dim_bound, false, self.cells)
    }

    /// A simplicial set known only through dimension `bound`.
    pub fn finish_truncated(self, bound: usize) -> Result<SimplicialSet> {
        if self.cells.len() > bound + 1 && self.cells[bound + 1..].iter().any(|c| !c.is_empty()) {
            return Err(Error::Truncated { bound, needed: self.cells.len() - 1 });
        }
        let mut cells = self.cells;
        cells.truncate(bound + 1);
        Ok(SimplicialSet::from_cells(bound, true, cells))
    }
}

impl SimplicialSet {
    fn from_cells(dim_bound: usize, truncated: bool, cells: Vec<Vec<Cell>>) -> Self {
        Self { dim_bound, truncated, cells, vertex_index: OnceLock::new() }
    }

    /// Builds a simplicial set from a downward-closed family of strictly
    /// increasing vertex tuples. Tuples are listed in any order; ids follow
    /// (length, lexicographic) order. The result is vertex-determined.
    pub fn from_vertex_tuples(
        num_vertices: usize,
        tuples: impl IntoIterator<Item = Vec<usize>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let mut by_dim: Vec<Vec<Vec<usize>>> = vec![Vec::new()];
        for t in tuples {
            if t.len() < 2 {
                continue;
            }
            if t.windows(2).any(|w| w[0] >= w[1]) || *t.last().unwrap() >= num_vertices {
                return Err(Error::Malformed(format!("bad vertex tuple {t:?}")));
            }
            let d = t.len() - 1;
            while by_dim.len() <= d {
                by_dim.push(Vec::new());
            }
            by_dim[d].push(t);
        }
        let mut b = Builder::new();
        for v in 0..num_vertices {
            b.add_vertex(labels.as_ref().map(|l| l[v].clone()));
        }
        let mut ids: HashMap<Vec<usize>, usize> = (0..num_vertices).map(|v| (vec![v], v)).collect();
        for d in 1..by_dim.len() {
            let mut list = std::mem::take(&mut by_dim[d]);
            list.sort();
            list.dedup();
            for t in list {
                let mut faces = Vec::with_capacity(d + 1);
                for i in 0..=d {
                    let mut f = t.clone();
                    f.remove(i);
                    let id = *ids
                        .get(&f)
                        .ok_or_else(|| Error::Malformed(format!("face {f:?} of {t:?} missing")))?;
                    faces.push(FaceRecord::nondegenerate(SimplexRef::new(d - 1, id)));
                }
                let r = b.add(faces, None)?;
                ids.insert(t, r.id);
            }
        }
        Ok(b.finish())
    }

    pub fn dim_bound(&self) -> usize {
        self.dim_bound
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Highest dimension holding a non-degenerate simplex.
    pub fn max_dim(&self) -> usize {
        self.cells.iter().rposition(|c| !c.is_empty()).unwrap_or(0)
    }

    /// The simplices through dimension `d`, as a space truncated at `d`.
    pub fn skeleton(&self, d: usize) -> SimplicialSet {
        if !self.truncated && self.max_dim() <= d {
            return self.clone();
        }
        let mut cells = self.cells.clone();
        cells.truncate(d + 1);
        SimplicialSet::from_cells(d.min(self.dim_bound), true, cells)
    }

    /// Fails unless every simplex of dimension `needed` is known.
    pub fn ensure_complete_through(&self, needed: usize) -> Result<()> {
        if self.truncated && needed > self.dim_bound {
            return Err(Error::Truncated { bound: self.dim_bound, needed });
        }
        Ok(())
    }

    pub fn count(&self, dim: usize) -> usize {
        self.cells.get(dim).map_or(0, Vec::len)
    }

    /// Number of non-degenerate simplices per dimension, through `dim_bound`.
    pub fn counts(&self) -> Vec<usize> {
        (0..=self.dim_bound).map(|d| self.count(d)).collect()
    }

    pub fn total_count(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn simplices(&self, dim: usize) -> impl Iterator<Item = SimplexRef> + '_ {
        (0..self.count(dim)).map(move |id| SimplexRef::new(dim, id))
    }

    /// All non-degenerate simplices in (dimension, id) order.
    pub fn all_simplices(&self) -> impl Iterator<Item = SimplexRef> + '_ {
        (0..self.cells.len()).flat_map(move |d| self.simplices(d))
    }

    pub fn contains(&self, s: SimplexRef) -> bool {
        s.id < self.count(s.dim)
    }

    pub fn faces(&self, s: SimplexRef) -> &[FaceRecord] {
        &self.cells[s.dim][s.id].faces
    }

    /// Vertex ids of a non-degenerate simplex, in order.
    pub fn vertices(&self, s: SimplexRef) -> &[usize] {
        &self.cells[s.dim][s.id].vertices
    }

    /// Vertex ids of an arbitrary simplex, repeats included.
    pub fn vertices_of(&self, x: &FaceRecord) -> Vec<usize> {
        let tv = self.vertices(x.target);
        x.epi.raw().iter().map(|&j| tv[j as usize]).collect()
    }

    pub fn label(&self, s: SimplexRef) -> Option<&str> {
        self.cells[s.dim][s.id].label.as_deref()
    }

    /// Label of a vertex, falling back to its id.
    pub fn vertex_name(&self, v: usize) -> String {
        self.label(SimplexRef::vertex(v)).map_or_else(|| v.to_string(), str::to_owned)
    }

    pub fn with_labels(mut self, labels: impl Fn(SimplexRef) -> Option<String>) -> Self {
        for d in 0..self.cells.len() {
            for id in 0..self.cells[d].len() {
                self.cells[d][id].label = labels(SimplexRef::new(d, id));
            }
        }
        self
    }

    /// `θ*(x)` for `θ : [p] -> [m]` and an `m`-simplex `x`, in normal form.
    pub fn apply(&self, op: &OrdinalMap, x: &FaceRecord) -> FaceRecord {
        let (mut outer, mut mono) = x.epi.after(op).epi_mono_factor();
        let mut y = x.target;
        // invariant: result = outer*(mono*(y))
        while let Some((i, rest)) = mono.peel_coface() {
            let face = &self.cells[y.dim][y.id].faces[i];
            let (e, m) = face.epi.after(&rest).epi_mono_factor();
            outer = e.after(&outer);
            mono = m;
            y = face.target;
        }
        FaceRecord { epi: outer, target: y }
    }

    /// The `i`-th face of an arbitrary simplex.
    pub fn face(&self, x: &FaceRecord, i: usize) -> FaceRecord {
        self.apply(&OrdinalMap::coface(x.dim(), i), x)
    }

    /// The `j`-th degeneracy of an arbitrary simplex.
    pub fn degeneracy(&self, x: &FaceRecord, j: usize) -> FaceRecord {
        FaceRecord { epi: x.epi.after(&OrdinalMap::codegeneracy(x.dim(), j)), target: x.target }
    }

    /// Every simplex (degenerate or not) of dimension `dim`, ordered by
    /// (target dimension, operator, target id).
    pub fn all_of_dim(&self, dim: usize) -> Vec<FaceRecord> {
        let mut out = Vec::new();
        for e in 0..=dim.min(self.cells.len().saturating_sub(1)) {
            for epi in crate::ordinal::surjections(dim, e) {
                for t in self.simplices(e) {
                    out.push(FaceRecord { epi: epi.clone(), target: t });
                }
            }
        }
        out
    }

    fn vertex_index(&self) -> &HashMap<Vec<usize>, Vec<SimplexRef>> {
        self.vertex_index.get_or_init(|| {
            let mut m: HashMap<Vec<usize>, Vec<SimplexRef>> = HashMap::new();
            for s in self.all_simplices() {
                m.entry(self.vertices(s).to_vec()).or_default().push(s);
            }
            m
        })
    }

    /// Non-degenerate simplices with exactly this vertex sequence.
    pub fn simplices_with_vertices(&self, vertices: &[usize]) -> &[SimplexRef] {
        self.vertex_index().get(vertices).map_or(&[], Vec::as_slice)
    }

    /// The unique simplex (possibly degenerate) with this vertex sequence,
    /// when there is exactly one.
    pub fn find_by_vertices(&self, vertices: &[usize]) -> Option<FaceRecord> {
        let mut distinct = Vec::with_capacity(vertices.len());
        let mut epi = smallvec::SmallVec::<[u8; 16]>::new();
        for &v in vertices {
            if distinct.last() != Some(&v) {
                distinct.push(v);
            }
            epi.push(distinct.len() as u8 - 1);
        }
        match self.simplices_with_vertices(&distinct) {
            [t] => Some(FaceRecord { epi: OrdinalMap::from_raw(epi, distinct.len()), target: *t }),
            _ => None,
        }
    }

    /// Every non-degenerate simplex has distinct vertices and no two share a
    /// vertex set. Returns the first offender otherwise.
    pub fn check_vertex_determined(&self) -> Result<()> {
        let mut seen: HashMap<Vec<usize>, SimplexRef> = HashMap::new();
        for s in self.all_simplices() {
            let mut vs = self.vertices(s).to_vec();
            vs.sort_unstable();
            if vs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::NotVertexDetermined(format!("simplex {s} has a repeated vertex")));
            }
            if let Some(prev) = seen.insert(vs, s) {
                return Err(Error::NotVertexDetermined(format!(
                    "simplices {prev} and {s} share a vertex set"
                )));
            }
        }
        Ok(())
    }

    pub fn is_vertex_determined(&self) -> bool {
        self.check_vertex_determined().is_ok()
    }

    /// Copy with the face records of `s` replaced; only the shape of the new
    /// records is checked. Useful for building deliberately broken inputs.
    pub fn with_faces_replaced(&self, s: SimplexRef, faces: Vec<FaceRecord>) -> Result<Self> {
        if !self.contains(s) || faces.len() != self.faces(s).len() {
            return Err(Error::OutOfRange(format!("cannot replace faces of {s}")));
        }
        let mut b = Builder { cells: self.cells.clone() };
        for (i, f) in faces.iter().enumerate() {
            b.check_face(s.dim, i, f)?;
        }
        b.cells[s.dim][s.id].faces = faces;
        Ok(Self::from_cells(self.dim_bound, self.truncated, b.cells))
    }

    /// Checks the simplicial identities `d_i d_j = d_{j-1} d_i` (`i < j`) on
    /// every stored simplex.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for s in self.all_simplices() {
            let faces = self.faces(s);
            let d = s.dim;
            if d == 0 {
                continue;
            }
            for j in (0..=d).filter(|_| d >= 2) {
                for i in 0..j {
                    let lhs = self.face(&faces[j], i);
                    let rhs = self.face(&faces[i], j - 1);
                    if lhs != rhs {
                        out.push(Violation { simplex: s, kind: ViolationKind::Identity { i, j } });
                    }
                }
            }
        }
        out
    }

    /// Undirected 1-skeleton in Graphviz DOT form.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph skeleton {\n");
        for v in 0..self.count(0) {
            s.push_str(&format!("  v{v} [label=\"{}\"];\n", self.vertex_name(v).replace('"', "'")));
        }
        for e in self.simplices(1) {
            let vs = self.vertices(e);
            s.push_str(&format!("  v{} -- v{};\n", vs[0], vs[1]));
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// `d_i d_j != d_{j-1} d_i`.
    Identity { i: usize, j: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub simplex: SimplexRef,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::Identity { i, j } => write!(
                f,
                "simplex {}: d_{i} d_{j} differs from d_{} d_{i}",
                self.simplex,
                j - 1
            ),
        }
    }
}

/// The standard simplex `Δ_k`; its `d`-simplices are the `(d+1)`-subsets of `{0..k}`.
pub fn standard_simplex(k: usize) -> SimplicialSet {
    subsets_complex(k, |_| true)
}

/// `∂Δ_k`, the standard simplex without its top cell.
pub fn boundary(k: usize) -> Result<SimplicialSet> {
    if k == 0 {
        return Err(Error::OutOfRange("∂Δ_0 is empty".into()));
    }
    Ok(subsets_complex(k, |s| s.len() <= k))
}

/// The horn `Λ^i_k` together with its inclusion into `Δ_k`.
pub fn horn(k: usize, i: usize) -> Result<(SimplicialSet, SimplicialMap)> {
    if k == 0 || i > k {
        return Err(Error::OutOfRange(format!("no horn Λ^{i}_{k}")));
    }
    if k == 1 {
        // Λ^i_1 is the vertex i alone
        let horn = standard_simplex(0).with_labels(|_| Some(i.to_string()));
        let inclusion =
            SimplicialMap::from_vertex_function(Arc::new(horn.clone()), Arc::new(standard_simplex(1)), &[i])?;
        return Ok((horn, inclusion));
    }
    let horn = subsets_complex(k, |s| s.len() <= k && !(s.len() == k && !s.contains(&i)));
    let inclusion = SimplicialMap::from_vertex_function(
        Arc::new(horn.clone()),
        Arc::new(standard_simplex(k)),
        &(0..=k).collect::<Vec<_>>(),
    )?;
    Ok((horn, inclusion))
}

/// Inclusion `∂Δ_k ↪ Δ_k`.
pub fn boundary_inclusion(k: usize) -> Result<SimplicialMap> {
    SimplicialMap::from_vertex_function(
        Arc::new(boundary(k)?),
        Arc::new(standard_simplex(k)),
        &(0..=k).collect::<Vec<_>>(),
    )
}

/// The inclusion of `X` into the join `X ⋆ Δ₀`, whose apex `*` is the last
/// vertex of every cone simplex. A truncated `X` gives a cone truncated at
/// the same bound.
pub fn right_cone(x: &Arc<SimplicialSet>) -> SimplicialMap {
    let top = if x.truncated { x.dim_bound } else { x.max_dim() + 1 };
    let mut cells = x.cells.clone();
    cells.resize_with(top + 1, Vec::new);
    let apex = cells[0].len();
    cells[0].push(Cell { faces: Vec::new(), vertices: vec![apex], label: Some("*".into()) });
    // cone[d][id]: id of the (d+1)-simplex spanned by (d, id) and the apex
    let mut cone: Vec<Vec<usize>> = Vec::new();
    for d in 0..top {
        let mut row = Vec::with_capacity(x.count(d));
        for s in x.simplices(d) {
            let mut faces: Vec<FaceRecord> = if d == 0 {
                vec![FaceRecord::nondegenerate(SimplexRef::vertex(apex))]
            } else {
                x.faces(s)
                    .iter()
                    .map(|f| {
                        let e = f.target.dim;
                        let mut values = f.epi.values();
                        values.push(e + 1);
                        let epi = OrdinalMap::new(&values, e + 2).expect("extending by the top stays monotone");
                        FaceRecord { epi, target: SimplexRef::new(e + 1, cone[e][f.target.id]) }
                    })
                    .collect()
            };
            faces.push(FaceRecord::nondegenerate(s));
            let mut vertices = x.vertices(s).to_vec();
            vertices.push(apex);
            row.push(cells[d + 1].len());
            cells[d + 1].push(Cell { faces, vertices, label: None });
        }
        cone.push(row);
    }
    let space = Arc::new(SimplicialSet::from_cells(top, x.truncated, cells));
    SimplicialMap::identity(x.clone()).retarget(space)
}

fn subsets_complex(k: usize, keep: impl Fn(&[usize]) -> bool) -> SimplicialSet {
    let n = k + 1;
    let mut tuples = Vec::new();
    for mask in 1u32..(1 << n) {
        let s: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        if keep(&s) {
            tuples.push(s);
        }
    }
    let labels = (0..n).map(|v| v.to_string()).collect();
    SimplicialSet::from_vertex_tuples(n, tuples, Some(labels)).expect("subsets are downward closed")
}

/// A simplicial map, given on non-degenerate source simplices.
#[derive(Clone, PartialEq, Eq)]
pub struct SimplicialMap {
    source: Arc<SimplicialSet>,
    target: Arc<SimplicialSet>,
    images: Vec<Vec<FaceRecord>>,
}

impl fmt::Debug for SimplicialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.source.all_simplices().map(|s| (s, self.image(s))))
            .finish()
    }
}

impl SimplicialMap {
    /// Checks shapes and naturality.
    pub fn new(
        source: Arc<SimplicialSet>,
        target: Arc<SimplicialSet>,
        images: Vec<Vec<FaceRecord>>,
    ) -> Result<Self> {
        for d in 0..=source.max_dim() {
            let row = images.get(d).map_or(0, Vec::len);
            if row != source.count(d) {
                return Err(Error::InvalidMap(format!("{row} images given in dimension {d}")));
            }
        }
        for (d, row) in images.iter().enumerate() {
            for img in row {
                if img.dim() != d || !target.contains(img.target) {
                    return Err(Error::InvalidMap(format!("bad image {img:?} in dimension {d}")));
                }
            }
        }
        let map = Self { source, target, images };
        if let Some((s, i)) = map.naturality_violations().first() {
            return Err(Error::InvalidMap(format!("not natural at face {i} of {s}")));
        }
        Ok(map)
    }

    pub(crate) fn new_unchecked(
        source: Arc<SimplicialSet>,
        target: Arc<SimplicialSet>,
        images: Vec<Vec<FaceRecord>>,
    ) -> Self {
        Self { source, target, images }
    }

    pub fn identity(x: Arc<SimplicialSet>) -> Self {
        let images = (0..x.cells.len())
            .map(|d| x.simplices(d).map(FaceRecord::nondegenerate).collect())
            .collect();
        Self { source: x.clone(), target: x, images }
    }

    /// The map determined by a vertex function into a vertex-determined
    /// target: each simplex goes to the unique simplex on its image vertices.
    pub fn from_vertex_function(
        source: Arc<SimplicialSet>,
        target: Arc<SimplicialSet>,
        vertex_map: &[usize],
    ) -> Result<Self> {
        if vertex_map.len() != source.count(0) {
            return Err(Error::InvalidMap("vertex function has the wrong length".into()));
        }
        let mut images = Vec::with_capacity(source.cells.len());
        for d in 0..source.cells.len() {
            let mut row = Vec::with_capacity(source.count(d));
            for s in source.simplices(d) {
                let vs: Vec<usize> = source.vertices(s).iter().map(|&v| vertex_map[v]).collect();
                let img = target.find_by_vertices(&vs).ok_or_else(|| {
                    Error::InvalidMap(format!("no unique simplex on vertices {vs:?} for {s}"))
                })?;
                row.push(img);
            }
            images.push(row);
        }
        Self::new(source, target, images)
    }

    pub fn source(&self) -> &Arc<SimplicialSet> {
        &self.source
    }

    pub fn target(&self) -> &Arc<SimplicialSet> {
        &self.target
    }

    pub fn image(&self, s: SimplexRef) -> &FaceRecord {
        &self.images[s.dim][s.id]
    }

    pub fn images(&self) -> &[Vec<FaceRecord>] {
        &self.images
    }

    /// Image of an arbitrary source simplex.
    pub fn apply(&self, x: &FaceRecord) -> FaceRecord {
        self.target.apply(&x.epi, self.image(x.target))
    }

    pub fn vertex_image(&self, v: usize) -> usize {
        self.images[0][v].target.id
    }

    pub fn vertex_map(&self) -> Vec<usize> {
        (0..self.source.count(0)).map(|v| self.vertex_image(v)).collect()
    }

    /// Pairs `(s, i)` where the image of `d_i s` is not `d_i` of the image of `s`.
    pub fn naturality_violations(&self) -> Vec<(SimplexRef, usize)> {
        let mut out = Vec::new();
        for s in self.source.all_simplices() {
            if s.dim == 0 {
                continue;
            }
            let img = self.image(s);
            for (i, face) in self.source.faces(s).iter().enumerate() {
                if self.apply(face) != self.target.face(img, i) {
                    out.push((s, i));
                }
            }
        }
        out
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &SimplicialMap) -> Result<SimplicialMap> {
        if !Arc::ptr_eq(&first.target, &self.source) && *first.target != *self.source {
            return Err(Error::InvalidMap("composite of non-composable maps".into()));
        }
        let images = first
            .images
            .iter()
            .map(|row| row.iter().map(|x| self.apply(x)).collect())
            .collect();
        Ok(Self { source: first.source.clone(), target: self.target.clone(), images })
    }

    /// Injective on non-degenerate simplices with non-degenerate images.
    pub fn is_mono(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.images
            .iter()
            .flatten()
            .all(|img| !img.is_degenerate() && seen.insert(img.target))
    }

    /// Same images, viewed as landing in a larger simplicial set that
    /// contains the current target with unchanged ids.
    pub(crate) fn retarget(&self, target: Arc<SimplicialSet>) -> SimplicialMap {
        Self { source: self.source.clone(), target, images: self.images.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&wire::MapWire::from(self)).expect("serializable")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(wire::MapWire::from(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let w: wire::MapWire = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        w.try_into()
    }
}

/// `Δ_k -> Δ_m` induced by a weakly increasing vertex function.
pub fn map_from_vertex_function(k: usize, values: &[usize]) -> Result<SimplicialMap> {
    if values.len() != k + 1 {
        return Err(Error::SizeMismatch(format!("{} values for Δ_{k}", values.len())));
    }
    if values.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::NotMonotone(values.to_vec()));
    }
    let m = values.iter().copied().max().unwrap_or(0);
    SimplicialMap::from_vertex_function(
        Arc::new(standard_simplex(k)),
        Arc::new(standard_simplex(m)),
        values,
    )
}

pub fn is_mono(f: &SimplicialMap) -> bool {
    f.is_mono()
}

/// Result of gluing `B` onto `X` along `A`.
#[derive(Clone, Debug)]
pub struct Pushout {
    pub space: Arc<SimplicialSet>,
    pub from_x: SimplicialMap,
    pub from_b: Vec<SimplicialMap>,
}

/// The pushout of a monomorphism `i : A -> B` along `f : A -> X`.
pub fn pushout(i: &SimplicialMap, f: &SimplicialMap) -> Result<Pushout> {
    pushout_many(f.target(), &[(i.clone(), f.clone())])
}

/// Simultaneous pushout of several cells `(i_t : A_t ↪ B_t, f_t : A_t -> X)`.
/// The simplices of `X` keep their ids; the free simplices of each `B_t` are
/// appended in attachment order.
pub fn pushout_many(x: &Arc<SimplicialSet>, cells: &[(SimplicialMap, SimplicialMap)]) -> Result<Pushout> {
    let mut top = x.cells.len();
    for (i, f) in cells {
        if !i.is_mono() {
            return Err(Error::NotMono);
        }
        if *i.source != *f.source {
            return Err(Error::InvalidMap("span legs have different sources".into()));
        }
        if !Arc::ptr_eq(&f.target, x) && *f.target != **x {
            return Err(Error::InvalidMap("attaching map does not land in the base".into()));
        }
        top = top.max(i.target.cells.len());
    }
    if x.truncated && top > x.dim_bound + 1 {
        return Err(Error::Truncated { bound: x.dim_bound, needed: top - 1 });
    }
    let mut cells_out = x.cells.clone();
    cells_out.resize_with(top, Vec::new);
    // per attachment, where each simplex of B went
    let mut legs: Vec<Vec<Vec<FaceRecord>>> = Vec::with_capacity(cells.len());
    for (i, f) in cells {
        let b = &i.target;
        let mut preimage: HashMap<SimplexRef, SimplexRef> = HashMap::new();
        for s in i.source.all_simplices() {
            preimage.insert(i.image(s).target, s);
        }
        let mut leg: Vec<Vec<FaceRecord>> = vec![Vec::new(); b.cells.len()];
        for s in b.all_simplices() {
            let img = if let Some(&a) = preimage.get(&s) {
                f.image(a).clone()
            } else {
                let faces = b
                    .faces(s)
                    .iter()
                    .map(|face| {
                        let routed = &leg[face.target.dim][face.target.id];
                        apply_in(&cells_out, &face.epi, routed)
                    })
                    .collect::<Vec<_>>();
                let vertices = if s.dim == 0 {
                    vec![cells_out[0].len()]
                } else {
                    let mut vs = vertices_in(&cells_out, &faces[s.dim]);
                    vs.push(*vertices_in(&cells_out, &faces[0]).last().unwrap());
                    vs
                };
                let id = cells_out[s.dim].len();
                cells_out[s.dim].push(Cell { faces, vertices, label: b.label(s).map(str::to_owned) });
                FaceRecord::nondegenerate(SimplexRef::new(s.dim, id))
            };
            leg[s.dim].push(img);
        }
        legs.push(leg);
    }
    let space = Arc::new(if x.truncated {
        SimplicialSet::from_cells(x.dim_bound, true, cells_out)
    } else {
        let mut b = Builder { cells: cells_out };
        while b.cells.last().is_some_and(Vec::is_empty) {
            b.cells.pop();
        }
        b.finish()
    });
    let from_x = SimplicialMap::identity(x.clone()).retarget(space.clone());
    let from_b = cells
        .iter()
        .zip(legs)
        .map(|((i, _), leg)| SimplicialMap::new_unchecked(i.target.clone(), space.clone(), leg))
        .collect();
    Ok(Pushout { space, from_x, from_b })
}

fn apply_in(cells: &[Vec<Cell>], op: &OrdinalMap, x: &FaceRecord) -> FaceRecord {
    let (mut outer, mut mono) = x.epi.after(op).epi_mono_factor();
    let mut y = x.target;
    while let Some((i, rest)) = mono.peel_coface() {
        let face = &cells[y.dim][y.id].faces[i];
        let (e, m) = face.epi.after(&rest).epi_mono_factor();
        outer = e.after(&outer);
        mono = m;
        y = face.target;
    }
    FaceRecord { epi: outer, target: y }
}

fn vertices_in(cells: &[Vec<Cell>], x: &FaceRecord) -> Vec<usize> {
    let tv = &cells[x.target.dim][x.target.id].vertices;
    x.epi.raw().iter().map(|&j| tv[j as usize]).collect()
}

mod wire {
    use super::*;

    #[derive(Serialize, Deserialize)]
    pub struct FaceWire {
        pub epi: Vec<usize>,
        pub target: SimplexRef,
    }

    #[derive(Serialize, Deserialize)]
    pub struct SimplexWire {
        pub dim: usize,
        pub id: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub label: Option<String>,
        pub faces: Vec<FaceWire>,
    }

    #[derive(Serialize, Deserialize)]
    pub struct SetWire {
        pub dim_bound: usize,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        pub truncated: bool,
        pub simplices: Vec<SimplexWire>,
    }

    fn face_to_wire(f: &FaceRecord) -> FaceWire {
        FaceWire { epi: f.epi.values(), target: f.target }
    }

    fn face_from_wire(f: &FaceWire) -> Result<FaceRecord> {
        FaceRecord::new(OrdinalMap::new(&f.epi, f.target.dim + 1)?, f.target)
    }

    impl From<SimplicialSet> for SetWire {
        fn from(x: SimplicialSet) -> Self {
            (&x).into()
        }
    }

    impl From<&SimplicialSet> for SetWire {
        fn from(x: &SimplicialSet) -> Self {
            let simplices = x
                .all_simplices()
                .map(|s| SimplexWire {
                    dim: s.dim,
                    id: s.id,
                    label: x.label(s).map(str::to_owned),
                    faces: x.faces(s).iter().map(face_to_wire).collect(),
                })
                .collect();
            SetWire { dim_bound: x.dim_bound, truncated: x.truncated, simplices }
        }
    }

    impl TryFrom<SetWire> for SimplicialSet {
        type Error = Error;

        fn try_from(mut w: SetWire) -> Result<Self> {
            w.simplices.sort_by_key(|s| (s.dim, s.id));
            let mut b = Builder::new();
            for s in &w.simplices {
                if s.id != b.count(s.dim) || (s.dim > 0 && b.count(s.dim - 1) == 0) {
                    return Err(Error::Malformed(format!(
                        "simplex ids must be contiguous per dimension, got {}:{}",
                        s.dim, s.id
                    )));
                }
                if s.faces.len() != if s.dim == 0 { 0 } else { s.dim + 1 } {
                    return Err(Error::Malformed(format!("simplex {}:{} has {} faces", s.dim, s.id, s.faces.len())));
                }
                let faces = s.faces.iter().map(face_from_wire).collect::<Result<Vec<_>>>()?;
                b.add(faces, s.label.clone())?;
            }
            if w.truncated {
                b.finish_truncated(w.dim_bound)
            } else {
                let x = b.finish();
                if x.dim_bound > w.dim_bound {
                    return Err(Error::Malformed(format!(
                        "dim_bound {} below the top simplex dimension {}",
                        w.dim_bound, x.dim_bound
                    )));
                }
                Ok(x)
            }
        }
    }

    #[derive(Serialize, Deserialize)]
    pub struct ImageWire {
        pub dim: usize,
        pub id: usize,
        pub epi: Vec<usize>,
        pub target: SimplexRef,
    }

    #[derive(Serialize, Deserialize)]
    pub struct MapWire {
        pub source: SetWire,
        pub target: SetWire,
        pub assignment: Vec<ImageWire>,
    }

    impl From<&SimplicialMap> for MapWire {
        fn from(f: &SimplicialMap) -> Self {
            MapWire {
                source: f.source.as_ref().into(),
                target: f.target.as_ref().into(),
                assignment: f
                    .source
                    .all_simplices()
                    .map(|s| {
                        let img = f.image(s);
                        ImageWire { dim: s.dim, id: s.id, epi: img.epi.values(), target: img.target }
                    })
                    .collect(),
            }
        }
    }

    impl TryFrom<MapWire> for SimplicialMap {
        type Error = Error;

        fn try_from(mut w: MapWire) -> Result<Self> {
            let source: SimplicialSet = w.source.try_into()?;
            let target: SimplicialSet = w.target.try_into()?;
            w.assignment.sort_by_key(|a| (a.dim, a.id));
            let mut images: Vec<Vec<FaceRecord>> = vec![Vec::new(); source.max_dim() + 1];
            for a in &w.assignment {
                if a.dim >= images.len() || a.id != images[a.dim].len() {
                    return Err(Error::Malformed(format!("unexpected assignment for {}:{}", a.dim, a.id)));
                }
                images[a.dim].push(face_from_wire(&FaceWire { epi: a.epi.clone(), target: a.target })?);
            }
            SimplicialMap::new(Arc::new(source), Arc::new(target), images)
        }
    }
}
