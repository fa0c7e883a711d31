//! Monotone maps between finite ordinals `[m] = {0, ..., m}`.
//!
//! Every operator of the simplex category is stored as its value sequence and
//! composed as an integer function. Cofaces and codegeneracies are just the
//! special injections and surjections.

use std::fmt;

use serde::Serialize;
use smallvec::SmallVec;

use crate::error::{Error, Result};

type Values = SmallVec<[u8; 16]>;

/// A weakly increasing map `[m] -> [n]`, stored as `m + 1` values in `0..=n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrdinalMap {
    codomain: u8,
    values: Values,
}

impl OrdinalMap {
    /// Builds a map with the given values into an ordinal with `codomain_size` elements.
    pub fn new(values: &[usize], codomain_size: usize) -> Result<Self> {
        if values.is_empty() || codomain_size == 0 {
            return Err(Error::SizeMismatch("ordinals are nonempty".into()));
        }
        if codomain_size > u8::MAX as usize || values.len() > u8::MAX as usize {
            return Err(Error::OutOfRange(format!(
                "ordinal of size {} exceeds the supported range",
                codomain_size.max(values.len())
            )));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::NotMonotone(values.to_vec()));
        }
        if let Some(&v) = values.iter().find(|&&v| v >= codomain_size) {
            return Err(Error::OutOfRange(format!(
                "value {v} outside an ordinal of size {codomain_size}"
            )));
        }
        Ok(Self {
            codomain: codomain_size as u8,
            values: values.iter().map(|&v| v as u8).collect(),
        })
    }

    pub(crate) fn from_raw(values: Values, codomain_size: usize) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        debug_assert!(values.iter().all(|&v| (v as usize) < codomain_size));
        Self { codomain: codomain_size as u8, values }
    }

    /// Identity on an ordinal with `size` elements.
    pub fn identity(size: usize) -> Self {
        Self::from_raw((0..size as u8).collect(), size)
    }

    /// The coface `[dim - 1] -> [dim]` that skips `i`.
    pub fn coface(dim: usize, i: usize) -> Self {
        assert!(dim >= 1 && i <= dim, "coface index {i} out of range for [{dim}]");
        Self::from_raw(
            (0..dim).map(|t| if t < i { t as u8 } else { t as u8 + 1 }).collect(),
            dim + 1,
        )
    }

    /// The codegeneracy `[dim + 1] -> [dim]` that repeats `j`.
    pub fn codegeneracy(dim: usize, j: usize) -> Self {
        assert!(j <= dim, "codegeneracy index {j} out of range for [{dim}]");
        Self::from_raw(
            (0..dim + 2).map(|t| if t <= j { t as u8 } else { t as u8 - 1 }).collect(),
            dim + 1,
        )
    }

    /// The constant map `[m] -> [n]` at `value`.
    pub fn vertex(m: usize, value: usize, codomain_size: usize) -> Self {
        Self::from_raw(std::iter::repeat(value as u8).take(m + 1).collect(), codomain_size)
    }

    pub fn domain_size(&self) -> usize {
        self.values.len()
    }

    pub fn codomain_size(&self) -> usize {
        self.codomain as usize
    }

    /// `m` for a map out of `[m]`.
    pub fn source_dim(&self) -> usize {
        self.values.len() - 1
    }

    /// `n` for a map into `[n]`.
    pub fn target_dim(&self) -> usize {
        self.codomain as usize - 1
    }

    pub fn get(&self, i: usize) -> usize {
        self.values[i] as usize
    }

    pub fn values(&self) -> Vec<usize> {
        self.values.iter().map(|&v| v as usize).collect()
    }

    pub(crate) fn raw(&self) -> &[u8] {
        &self.values
    }

    pub fn is_identity(&self) -> bool {
        self.values.len() == self.codomain as usize
            && self.values.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    pub fn is_injective(&self) -> bool {
        self.values.windows(2).all(|w| w[0] < w[1])
    }

    pub fn is_surjective(&self) -> bool {
        self.values[0] == 0
            && *self.values.last().unwrap() as usize == self.codomain as usize - 1
            && self.values.windows(2).all(|w| w[1] - w[0] <= 1)
    }

    /// `self ∘ g`, defined when `g` lands in the domain of `self`.
    pub fn compose(&self, g: &OrdinalMap) -> Result<OrdinalMap> {
        if g.codomain_size() != self.domain_size() {
            return Err(Error::SizeMismatch(format!(
                "cannot compose a map out of [{}] after a map into [{}]",
                self.source_dim(),
                g.target_dim()
            )));
        }
        Ok(self.after(g))
    }

    pub(crate) fn after(&self, g: &OrdinalMap) -> OrdinalMap {
        debug_assert_eq!(g.codomain_size(), self.domain_size());
        OrdinalMap {
            codomain: self.codomain,
            values: g.values.iter().map(|&v| self.values[v as usize]).collect(),
        }
    }

    /// The unique factorization `self = mono ∘ epi` with `epi` surjective and
    /// `mono` injective.
    pub fn epi_mono_factor(&self) -> (OrdinalMap, OrdinalMap) {
        let mut image: Values = SmallVec::new();
        let mut epi: Values = SmallVec::with_capacity(self.values.len());
        for &v in &self.values {
            if image.last() != Some(&v) {
                image.push(v);
            }
            epi.push(image.len() as u8 - 1);
        }
        let rank = image.len();
        (
            OrdinalMap::from_raw(epi, rank),
            OrdinalMap { codomain: self.codomain, values: image },
        )
    }

    /// For a non-surjective injection `δ_i ∘ rest`, returns `(i, rest)` with
    /// `i` the smallest value missed.
    pub(crate) fn peel_coface(&self) -> Option<(usize, OrdinalMap)> {
        let n = self.codomain as usize;
        if self.values.len() == n {
            return None;
        }
        let i = (0..n)
            .find(|&t| self.values.get(t).map(|&v| v as usize) != Some(t))
            .unwrap_or(n - 1);
        let rest = self
            .values
            .iter()
            .map(|&v| if (v as usize) > i { v - 1 } else { v })
            .collect();
        Some((i, OrdinalMap { codomain: self.codomain - 1, values: rest }))
    }
}

/// Function composition `f ∘ g`.
pub fn compose_ordinal(f: &OrdinalMap, g: &OrdinalMap) -> Result<OrdinalMap> {
    f.compose(g)
}

/// The unique epi–mono factorization `f = mono ∘ epi`.
pub fn epi_mono_factor(f: &OrdinalMap) -> (OrdinalMap, OrdinalMap) {
    f.epi_mono_factor()
}

/// All surjections `[m] -> [e]` in lexicographic order of their value sequences.
pub fn surjections(m: usize, e: usize) -> Vec<OrdinalMap> {
    let mut out = Vec::new();
    if e > m {
        return out;
    }
    // choose which of the m steps increase by one
    let mut steps = Vec::with_capacity(m);
    fn rec(m: usize, e: usize, steps: &mut Vec<bool>, out: &mut Vec<OrdinalMap>) {
        let ups = steps.iter().filter(|&&s| s).count();
        if steps.len() == m {
            if ups == e {
                let mut values: Values = SmallVec::with_capacity(m + 1);
                let mut cur = 0u8;
                values.push(0);
                for &s in steps.iter() {
                    if s {
                        cur += 1;
                    }
                    values.push(cur);
                }
                out.push(OrdinalMap::from_raw(values, e + 1));
            }
            return;
        }
        let remaining = m - steps.len();
        if ups + remaining > e {
            steps.push(false);
            rec(m, e, steps, out);
            steps.pop();
        }
        if ups < e {
            steps.push(true);
            rec(m, e, steps, out);
            steps.pop();
        }
    }
    rec(m, e, &mut steps, &mut out);
    out
}

/// All monotone maps `[m] -> [n]` in lexicographic order.
pub fn monotone_maps(m: usize, n: usize) -> Vec<OrdinalMap> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::with_capacity(m + 1);
    fn rec(m: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<OrdinalMap>) {
        if cur.len() == m + 1 {
            out.push(OrdinalMap::new(cur, n + 1).expect("monotone by construction"));
            return;
        }
        let lo = cur.last().copied().unwrap_or(0);
        for v in lo..=n {
            cur.push(v);
            rec(m, n, cur, out);
            cur.pop();
        }
    }
    rec(m, n, &mut cur, &mut out);
    out
}

impl fmt::Debug for OrdinalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}->[{}]", self.values(), self.target_dim())
    }
}

impl fmt::Display for OrdinalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

// Serialized as the bare value list; the codomain is recovered from context
// (for a face record it is the dimension of the target plus one).
impl Serialize for OrdinalMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.values().serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn om(v: &[usize], n: usize) -> OrdinalMap {
        OrdinalMap::new(v, n).unwrap()
    }

    #[test]
    fn identity_composition() {
        let id = OrdinalMap::identity(3);
        assert_eq!(compose_ordinal(&id, &id).unwrap(), id);
    }

    #[test]
    fn codegeneracy_after_coface_is_identity() {
        // σ₀ : [1] -> [0] after δ₀ : [0] -> [1]
        let s0 = OrdinalMap::codegeneracy(0, 0);
        let d0 = OrdinalMap::coface(1, 0);
        assert_eq!(compose_ordinal(&s0, &d0).unwrap(), OrdinalMap::identity(1));
    }

    #[test]
    fn coface_composite_picks_vertex() {
        // δ₁ : [1] -> [2] after δ₀ : [0] -> [1]; δ₀ sends 0 to 1, δ₁ sends 1 to 2
        let d1 = OrdinalMap::coface(2, 1);
        let d0 = OrdinalMap::coface(1, 0);
        assert_eq!(d0.values(), vec![1]);
        assert_eq!(d1.values(), vec![0, 2]);
        assert_eq!(compose_ordinal(&d1, &d0).unwrap(), om(&[2], 3));
    }

    #[test]
    fn compose_rejects_size_mismatch() {
        let d = OrdinalMap::coface(2, 0);
        assert!(matches!(d.compose(&d), Err(Error::SizeMismatch(_))));
    }

    #[test]
    fn rejects_non_monotone() {
        assert!(matches!(OrdinalMap::new(&[1, 0], 2), Err(Error::NotMonotone(_))));
        assert!(matches!(OrdinalMap::new(&[0, 3], 3), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn factor_examples() {
        let inj = om(&[0, 2], 3);
        assert_eq!(inj.epi_mono_factor(), (OrdinalMap::identity(2), inj.clone()));
        let sur = om(&[0, 0, 1], 2);
        assert_eq!(sur.epi_mono_factor(), (sur.clone(), OrdinalMap::identity(2)));
        let f = om(&[0, 0, 2], 3);
        let (e, m) = f.epi_mono_factor();
        assert_eq!(e, om(&[0, 0, 1], 2));
        assert_eq!(m, om(&[0, 2], 3));
    }

    #[test]
    fn cofaces_and_codegeneracies() {
        assert_eq!(OrdinalMap::coface(2, 0).values(), vec![1, 2]);
        assert_eq!(OrdinalMap::coface(2, 2).values(), vec![0, 1]);
        assert_eq!(OrdinalMap::codegeneracy(1, 0).values(), vec![0, 0, 1]);
        assert_eq!(OrdinalMap::codegeneracy(1, 1).values(), vec![0, 1, 1]);
    }

    #[test]
    fn surjection_counts_are_binomial() {
        for m in 0..6 {
            for e in 0..=m {
                let expected = (0..e).fold(1usize, |acc, t| acc * (m - t) / (t + 1));
                let all = surjections(m, e);
                assert_eq!(all.len(), expected, "m={m} e={e}");
                assert!(all.iter().all(|s| s.is_surjective()));
            }
        }
    }

    #[test]
    fn factorization_is_unique_exhaustively() {
        // brute force: among all pairs (epi, mono) of monotone maps, exactly one composes to f
        for m in 0..5 {
            for n in 0..5 {
                for f in monotone_maps(m, n) {
                    let mut found = Vec::new();
                    for e in 0..=m.min(n) {
                        for epi in monotone_maps(m, e).into_iter().filter(|x| x.is_surjective()) {
                            for mono in monotone_maps(e, n).into_iter().filter(|x| x.is_injective()) {
                                if mono.compose(&epi).unwrap() == f {
                                    found.push((epi.clone(), mono));
                                }
                            }
                        }
                    }
                    assert_eq!(found.len(), 1, "f = {f:?}");
                    assert_eq!(found[0], f.epi_mono_factor());
                }
            }
        }
    }

    #[test]
    fn associativity_exhaustive() {
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for h in monotone_maps(a, b) {
                        for g in monotone_maps(b, c) {
                            for f in monotone_maps(c, 2) {
                                let left = f.compose(&g).unwrap().compose(&h).unwrap();
                                let right = f.compose(&g.compose(&h).unwrap()).unwrap();
                                assert_eq!(left, right);
                            }
                        }
                    }
                }
            }
        }
    }
}
