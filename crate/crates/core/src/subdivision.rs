//! Kan's subdivision `Sd` on vertex-determined simplicial sets, realized as
//! the nerve of the poset of non-degenerate simplices.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sset::{SimplexRef, SimplicialMap, SimplicialSet};

/// Upper limit on the number of non-degenerate simplices a subdivision may produce.
pub const MAX_SUBDIVISION_SIZE: usize = 4_000_000;

/// Non-degenerate simplices of a vertex-determined simplicial set, ordered by
/// (dimension, id), under the face relation.
#[derive(Clone, Debug)]
pub struct FacePoset {
    elements: Vec<SimplexRef>,
    offsets: Vec<usize>,
    /// strict faces of each element, ascending
    down: Vec<Vec<usize>>,
}

impl FacePoset {
    pub fn elements(&self) -> &[SimplexRef] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn index_of(&self, s: SimplexRef) -> usize {
        self.offsets[s.dim] + s.id
    }

    /// Strict faces of element `a`, ascending.
    pub fn below(&self, a: usize) -> &[usize] {
        &self.down[a]
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        a == b || self.down[b].binary_search(&a).is_ok()
    }

    /// The order relation as a boolean table.
    pub fn order_table(&self) -> Vec<Vec<bool>> {
        (0..self.len()).map(|a| (0..self.len()).map(|b| self.leq(a, b)).collect()).collect()
    }

    /// Covering pairs `(a, b)`: `a` is a codimension-one face of `b`.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for b in 0..self.len() {
            for &a in &self.down[b] {
                if self.elements[a].dim + 1 == self.elements[b].dim {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

pub fn face_poset(x: &SimplicialSet) -> Result<FacePoset> {
    if x.is_truncated() {
        return Err(Error::Truncated { bound: x.dim_bound(), needed: x.dim_bound() + 1 });
    }
    x.check_vertex_determined()?;
    let elements: Vec<SimplexRef> = x.all_simplices().collect();
    let mut offsets = Vec::with_capacity(x.max_dim() + 1);
    let mut acc = 0;
    for d in 0..=x.max_dim() {
        offsets.push(acc);
        acc += x.count(d);
    }
    let mut down: Vec<Vec<usize>> = Vec::with_capacity(elements.len());
    for (idx, &s) in elements.iter().enumerate() {
        let mut below = Vec::new();
        for face in x.faces(s) {
            let f = offsets[face.target.dim] + face.target.id;
            below.push(f);
            below.extend_from_slice(&down[f]);
        }
        below.sort_unstable();
        below.dedup();
        debug_assert!(below.iter().all(|&b| b < idx));
        down.push(below);
    }
    Ok(FacePoset { elements, offsets, down })
}

/// Vertex of `Sd X` sitting at the barycenter of `s`.
pub fn barycenter(x: &SimplicialSet, s: SimplexRef) -> usize {
    (0..s.dim).map(|d| x.count(d)).sum::<usize>() + s.id
}

/// Nerve of a finite order given by strict down-sets over a linear extension
/// (every strict lower element has a smaller index).
pub(crate) fn order_nerve(down: &[Vec<usize>], labels: Option<Vec<String>>, limit: usize) -> Result<SimplicialSet> {
    let n = down.len();
    let mut chains_ending: Vec<usize> = vec![0; n];
    let mut total = 0usize;
    for t in 0..n {
        chains_ending[t] = 1 + down[t].iter().map(|&s| chains_ending[s]).sum::<usize>();
        total = total.saturating_add(chains_ending[t]);
        if total > limit {
            return Err(Error::Budget(format!("nerve would exceed {limit} simplices")));
        }
    }
    let mut tuples = Vec::with_capacity(total);
    let mut stack = Vec::new();
    fn rec(t: usize, down: &[Vec<usize>], stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        stack.push(t);
        let mut chain = stack.clone();
        chain.reverse();
        out.push(chain);
        for &s in &down[t] {
            rec(s, down, stack, out);
        }
        stack.pop();
    }
    for t in 0..n {
        rec(t, down, &mut stack, &mut tuples);
    }
    SimplicialSet::from_vertex_tuples(n, tuples, labels)
}

fn nested_label(x: &SimplicialSet, s: SimplexRef) -> String {
    let names: Vec<String> = x.vertices(s).iter().map(|&v| x.vertex_name(v)).collect();
    format!("[{}]", names.join(","))
}

/// `Sd X`: non-degenerate `d`-simplices are strictly increasing chains of
/// `d + 1` simplices of `X`. The barycenter of `s` is labelled by the list of
/// labels of the vertices of `s`.
pub fn sd(x: &SimplicialSet) -> Result<SimplicialSet> {
    let poset = face_poset(x)?;
    let labels = poset.elements.iter().map(|&s| nested_label(x, s)).collect();
    order_nerve(&poset.down, Some(labels), MAX_SUBDIVISION_SIZE)
}

/// `Sd f` for a map between vertex-determined simplicial sets: the barycenter
/// of `s` goes to the barycenter of the non-degenerate simplex underlying `f(s)`.
pub fn sd_map(f: &SimplicialMap) -> Result<SimplicialMap> {
    let src_poset = face_poset(f.source()).map_err(not_admitted)?;
    let tgt_poset = face_poset(f.target()).map_err(not_admitted)?;
    let vertex_map: Vec<usize> = src_poset
        .elements
        .iter()
        .map(|&s| tgt_poset.index_of(f.image(s).target))
        .collect();
    let source = Arc::new(sd(f.source())?);
    let target = Arc::new(sd(f.target())?);
    SimplicialMap::from_vertex_function(source, target, &vertex_map)
}

fn not_admitted(e: Error) -> Error {
    match e {
        Error::NotVertexDetermined(msg) => Error::NotSubdividable(msg),
        other => other,
    }
}

pub fn sd_iter(x: &SimplicialSet, n: usize) -> Result<SimplicialSet> {
    let mut cur = x.clone();
    for _ in 0..n {
        cur = sd(&cur)?;
    }
    Ok(cur)
}

pub fn sd_iter_map(f: &SimplicialMap, n: usize) -> Result<SimplicialMap> {
    let mut cur = f.clone();
    for _ in 0..n {
        cur = sd_map(&cur)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sset::{boundary_inclusion, horn, map_from_vertex_function, standard_simplex};

    /// Independent count of strictly increasing chains of nonempty subsets of
    /// `{0..k}` with `len` elements, by brute force over subset sequences.
    fn subset_chains(k: usize, len: usize) -> usize {
        let full = 1u32 << (k + 1);
        fn rec(prev: u32, left: usize, full: u32) -> usize {
            if left == 0 {
                return 1;
            }
            (1..full).filter(|&m| m != prev && m & prev == prev).map(|m| rec(m, left - 1, full)).sum()
        }
        (1..full).map(|m| rec(m, len - 1, full)).sum()
    }

    #[test]
    fn face_poset_sizes() {
        assert_eq!(face_poset(&standard_simplex(2)).unwrap().len(), 7);
        assert_eq!(face_poset(&horn(2, 0).unwrap().0).unwrap().len(), 5);
        assert_eq!(face_poset(&sd(&standard_simplex(1)).unwrap()).unwrap().len(), 5);
    }

    #[test]
    fn face_poset_order_is_partial_order_with_codim_one_covers() {
        let p = face_poset(&sd(&standard_simplex(2)).unwrap()).unwrap();
        let t = p.order_table();
        let n = p.len();
        for a in 0..n {
            assert!(t[a][a]);
            for b in 0..n {
                if a != b && t[a][b] {
                    assert!(!t[b][a]);
                }
                for c in 0..n {
                    if t[a][b] && t[b][c] {
                        assert!(t[a][c]);
                    }
                }
            }
        }
        // covering pairs are exactly codimension-one incidences
        for a in 0..n {
            for b in 0..n {
                let strictly = a != b && t[a][b];
                let covered = strictly && !(0..n).any(|c| c != a && c != b && t[a][c] && t[c][b]);
                let codim1 = strictly && p.elements()[a].dim + 1 == p.elements()[b].dim;
                assert_eq!(covered, codim1);
            }
        }
    }

    #[test]
    fn sd_counts() {
        assert_eq!(sd(&standard_simplex(1)).unwrap().counts(), vec![3, 2]);
        let s2 = sd(&standard_simplex(2)).unwrap();
        assert_eq!(s2.counts(), vec![7, 12, 6]);
        for len in 1..=3 {
            assert_eq!(s2.count(len - 1), subset_chains(2, len));
        }
        let l = sd(&horn(2, 0).unwrap().0).unwrap();
        assert_eq!(l.counts(), vec![5, 4]);
        assert_eq!(sd_iter(&standard_simplex(2), 2).unwrap().count(2), 36);
    }

    #[test]
    fn top_cells_of_first_subdivision_are_factorial() {
        for k in 0..=4 {
            let s = sd(&standard_simplex(k)).unwrap();
            assert_eq!(s.count(k), (1..=k + 1).product::<usize>());
            assert_eq!(s.count(k), subset_chains(k, k + 1));
        }
    }

    #[test]
    fn subdivision_is_vertex_determined_and_valid() {
        let s = sd_iter(&standard_simplex(2), 2).unwrap();
        assert!(s.is_vertex_determined());
        assert!(s.validate().is_empty());
        assert_eq!(s.vertex_name(0), "[[0]]");
    }

    #[test]
    fn sd_of_horn_inclusion_is_mono_into_subdivided_simplex() {
        let (_, incl) = horn(2, 0).unwrap();
        let s = sd_map(&incl).unwrap();
        assert!(s.is_mono());
        assert_eq!(s.source().counts(), vec![5, 4]);
        assert_eq!(s.target().counts(), vec![7, 12, 6]);
        assert!(s.naturality_violations().is_empty());
    }

    #[test]
    fn identity_is_preserved() {
        let x = Arc::new(standard_simplex(2));
        let id = SimplicialMap::identity(x);
        let s = sd_iter_map(&id, 3).unwrap();
        assert_eq!(s, SimplicialMap::identity(s.source().clone()));
    }

    #[test]
    fn functoriality_on_collapse_after_inclusion() {
        // g ∘ f with f : ∂Δ₃ ↪ Δ₃ and g the collapse Δ₃ -> Δ₂
        let f = boundary_inclusion(3).unwrap();
        let g = map_from_vertex_function(3, &[0, 1, 2, 2]).unwrap();
        let gf = g.compose(&f).unwrap();
        let lhs = sd_map(&gf).unwrap();
        let rhs = sd_map(&g).unwrap().compose(&sd_map(&f).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn non_vertex_determined_is_rejected() {
        let c = crate::category::FiniteCategory::cyclic_group(2);
        let n = crate::category::nerve(&c, 2);
        assert!(matches!(sd(&n), Err(Error::Truncated { .. }) | Err(Error::NotVertexDetermined(_))));
    }
}
