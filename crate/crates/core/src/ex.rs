//! Kan's extension functor `Ex`, truncated at a dimension bound:
//! `(Ex X)_m = Hom(Sd Δ_m, X)`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hom::enumerate_maps;
use crate::ordinal::{surjections, OrdinalMap};
use crate::sset::{map_from_vertex_function, standard_simplex, Builder, FaceRecord, SimplexRef, SimplicialMap, SimplicialSet};
use crate::subdivision::{face_poset, sd, sd_map};

type Key = Vec<Vec<FaceRecord>>;

/// `Ex X` through dimension `bound`, with the hom-set element behind each simplex.
pub struct ExTruncation {
    base: Arc<SimplicialSet>,
    space: Arc<SimplicialSet>,
    domains: Vec<Arc<SimplicialSet>>,
    /// non-degenerate simplices as maps `Sd Δ_m -> X`
    cells: Vec<Vec<SimplicialMap>>,
    /// every map `Sd Δ_m -> X` to its normal form
    lookup: Vec<HashMap<Key, FaceRecord>>,
}

impl ExTruncation {
    pub fn new(x: &Arc<SimplicialSet>, bound: usize) -> Result<Self> {
        x.ensure_complete_through(bound)?;
        let domains: Vec<Arc<SimplicialSet>> =
            (0..=bound).map(|m| sd(&standard_simplex(m)).map(Arc::new)).collect::<Result<_>>()?;
        let mut builder = Builder::new();
        let mut cells: Vec<Vec<SimplicialMap>> = Vec::new();
        let mut lookup: Vec<HashMap<Key, FaceRecord>> = Vec::new();
        for m in 0..=bound {
            let all = enumerate_maps(&domains[m], x)?;
            let mut table: HashMap<Key, FaceRecord> = HashMap::new();
            for e in 0..m {
                let collapses: Vec<(OrdinalMap, SimplicialMap)> = surjections(m, e)
                    .into_iter()
                    .map(|s| {
                        let vm = map_from_vertex_function(m, &s.values())?;
                        Ok((s, sd_map(&vm)?))
                    })
                    .collect::<Result<_>>()?;
                for (id, z) in cells[e].iter().enumerate() {
                    for (s, sd_s) in &collapses {
                        let y = z.compose(sd_s)?;
                        let rec = FaceRecord::new(s.clone(), SimplexRef::new(e, id))?;
                        table.insert(y.images().to_vec(), rec);
                    }
                }
            }
            let cofaces: Vec<SimplicialMap> = if m == 0 {
                Vec::new()
            } else {
                (0..=m)
                    .map(|i| {
                        let delta = SimplicialMap::from_vertex_function(
                            Arc::new(standard_simplex(m - 1)),
                            Arc::new(standard_simplex(m)),
                            &OrdinalMap::coface(m, i).values(),
                        )?;
                        sd_map(&delta)
                    })
                    .collect::<Result<_>>()?
            };
            let mut nondeg = Vec::new();
            for y in all {
                let key = y.images().to_vec();
                if table.contains_key(&key) {
                    continue;
                }
                let r = if m == 0 {
                    let v = y.vertex_image(0);
                    builder.add_vertex(Some(x.vertex_name(v)))
                } else {
                    let faces = cofaces
                        .iter()
                        .map(|c| {
                            let f = y.compose(c).expect("composable");
                            lookup[m - 1][f.images()].clone()
                        })
                        .collect();
                    builder.add(faces, None)?
                };
                table.insert(key, FaceRecord::nondegenerate(r));
                nondeg.push(y);
            }
            cells.push(nondeg);
            lookup.push(table);
        }
        let space = Arc::new(builder.finish_truncated(bound)?);
        Ok(Self { base: x.clone(), space, domains, cells, lookup })
    }

    pub fn base(&self) -> &Arc<SimplicialSet> {
        &self.base
    }

    pub fn space(&self) -> &Arc<SimplicialSet> {
        &self.space
    }

    pub fn bound(&self) -> usize {
        self.domains.len() - 1
    }

    /// `Sd Δ_m`, the domain of the `m`-simplices.
    pub fn domain(&self, m: usize) -> &Arc<SimplicialSet> {
        &self.domains[m]
    }

    /// The map `Sd Δ_m -> X` behind a non-degenerate simplex.
    pub fn cell(&self, s: SimplexRef) -> &SimplicialMap {
        &self.cells[s.dim][s.id]
    }

    /// Normal form of an arbitrary map `Sd Δ_m -> X`.
    pub fn normal_form(&self, y: &SimplicialMap) -> Option<FaceRecord> {
        let m = y.source().max_dim();
        self.lookup.get(m)?.get(y.images()).cloned()
    }
}

pub fn ex_truncated(x: &Arc<SimplicialSet>, bound: usize) -> Result<SimplicialSet> {
    Ok((*ExTruncation::new(x, bound)?.space).clone())
}

/// The last-vertex map `Sd Δ_m -> Δ_m`, sending the barycenter of a face to
/// its largest vertex.
pub fn last_vertex_map(m: usize) -> Result<SimplicialMap> {
    let dm = standard_simplex(m);
    let poset = face_poset(&dm)?;
    let values: Vec<usize> = poset.elements().iter().map(|&s| *dm.vertices(s).last().unwrap()).collect();
    SimplicialMap::from_vertex_function(Arc::new(sd(&dm)?), Arc::new(dm), &values)
}

/// `Δ_m -> X` classifying a (possibly degenerate) `m`-simplex `x`.
pub fn yoneda_map(x: &Arc<SimplicialSet>, simplex: &FaceRecord) -> SimplicialMap {
    let m = simplex.dim();
    let dm = Arc::new(standard_simplex(m));
    let images = (0..=m)
        .map(|d| {
            dm.simplices(d)
                .map(|s| {
                    let op = OrdinalMap::new(dm.vertices(s), m + 1).expect("face tuples increase");
                    x.apply(&op, simplex)
                })
                .collect()
        })
        .collect();
    SimplicialMap::new_unchecked(dm, x.clone(), images)
}

/// `η : X -> Ex X`, precomposition with the last-vertex maps.
pub fn ex_eta(ex: &ExTruncation) -> Result<SimplicialMap> {
    let x = ex.base();
    if x.max_dim() > ex.bound() {
        return Err(Error::Truncated { bound: ex.bound(), needed: x.max_dim() });
    }
    let lasts: Vec<SimplicialMap> = (0..=x.max_dim()).map(last_vertex_map).collect::<Result<_>>()?;
    let mut images = Vec::new();
    for d in 0..=x.max_dim() {
        let mut row = Vec::new();
        for s in x.simplices(d) {
            let y = yoneda_map(x, &FaceRecord::nondegenerate(s)).compose(&lasts[d])?;
            row.push(ex.normal_form(&y).expect("every map Sd Δ_m -> X is a simplex of Ex X"));
        }
        images.push(row);
    }
    SimplicialMap::new(x.clone(), ex.space().clone(), images)
}

/// `Ex f : Ex X -> Ex Y`, postcomposition with `f`.
pub fn ex_map(f: &SimplicialMap, source: &ExTruncation, target: &ExTruncation) -> Result<SimplicialMap> {
    if **f.source() != **source.base() || **f.target() != **target.base() {
        return Err(Error::InvalidMap("Ex truncations do not match f".into()));
    }
    if target.bound() < source.bound() {
        return Err(Error::Truncated { bound: target.bound(), needed: source.bound() });
    }
    let sp = source.space();
    let mut images = Vec::new();
    for d in 0..=sp.max_dim() {
        let mut row = Vec::new();
        for s in sp.simplices(d) {
            let y = f.compose(source.cell(s))?;
            row.push(target.normal_form(&y).expect("every map Sd Δ_m -> Y is a simplex of Ex Y"));
        }
        images.push(row);
    }
    SimplicialMap::new(sp.clone(), target.space().clone(), images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hom::count_maps;
    use crate::sset::{boundary, horn};

    fn arc(x: SimplicialSet) -> Arc<SimplicialSet> {
        Arc::new(x)
    }

    /// Maps from the path `0 -> 2 <- 1` (which is `Sd Δ₁`) into `X`,
    /// counted over vertex pairs joined by a possibly degenerate edge.
    fn cospans(x: &SimplicialSet) -> usize {
        let n = x.count(0);
        let edge = |a: usize, b: usize| a == b || x.find_by_vertices(&[a, b]).is_some();
        let mut count = 0;
        for top in 0..n {
            for a in 0..n {
                for b in 0..n {
                    if edge(a, top) && edge(b, top) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn ex_of_point_is_point() {
        let ex = ex_truncated(&arc(standard_simplex(0)), 3).unwrap();
        assert_eq!(ex.counts(), vec![1, 0, 0, 0]);
        assert!(ex.validate().is_empty());
    }

    #[test]
    fn vertices_and_edges_of_ex() {
        let l = arc(horn(2, 0).unwrap().0);
        let ex = ex_truncated(&l, 1).unwrap();
        assert_eq!(ex.count(0), 3);
        let all_edges = cospans(&l);
        assert_eq!(all_edges, 9);
        assert_eq!(ex.count(0) + ex.count(1), all_edges);
        assert!(ex.validate().is_empty());
    }

    #[test]
    fn every_hom_element_is_a_simplex() {
        let x = arc(boundary(2).unwrap());
        let ex = ExTruncation::new(&x, 2).unwrap();
        let sp = ex.space().clone();
        for m in 0..=2 {
            assert_eq!(sp.all_of_dim(m).len(), count_maps(ex.domain(m), &x).unwrap());
        }
        assert!(sp.validate().is_empty());
    }

    #[test]
    fn eta_is_mono_and_natural() {
        let d1 = arc(standard_simplex(1));
        let ex = ExTruncation::new(&d1, 1).unwrap();
        let eta = ex_eta(&ex).unwrap();
        assert!(eta.is_mono());
        assert_eq!(eta.vertex_map(), vec![0, 1]);

        let (_, f) = horn(2, 0).unwrap();
        let ex_l = ExTruncation::new(f.source(), 2).unwrap();
        let ex_d = ExTruncation::new(f.target(), 2).unwrap();
        let lhs = ex_map(&f, &ex_l, &ex_d).unwrap().compose(&ex_eta(&ex_l).unwrap()).unwrap();
        let rhs = ex_eta(&ex_d).unwrap().compose(&f).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn last_vertex_map_on_triangle() {
        let l = last_vertex_map(2).unwrap();
        assert_eq!(l.vertex_map(), vec![0, 1, 2, 1, 2, 2, 2]);
    }
}
