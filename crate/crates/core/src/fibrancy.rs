//! Lifting problems, the Kan condition and the classes `fib_n`, all decided
//! up to an explicit dimension bound.

use std::ops::ControlFlow;
use std::sync::Arc;

use serde_json::json;

use crate::error::{Error, Result};
use crate::hom::{for_each_map, to_map, unwrap_images, Extender, TargetIndex};
use crate::sset::{horn, right_cone, standard_simplex, FaceRecord, SimplicialMap, SimplicialSet};
use crate::subdivision::sd_iter_map;

/// A lifting problem: `i : A ↪ B`, `f : A -> X`, optionally closed to a
/// square by `p : X -> Y` and `g : B -> Y`.
#[derive(Clone, Debug)]
pub struct LiftProblem {
    pub i: SimplicialMap,
    pub f: SimplicialMap,
    pub p: Option<SimplicialMap>,
    pub g: Option<SimplicialMap>,
}

impl LiftProblem {
    pub fn new(i: SimplicialMap, f: SimplicialMap, closing: Option<(SimplicialMap, SimplicialMap)>) -> Result<Self> {
        if !i.is_mono() {
            return Err(Error::NotMono);
        }
        if **i.source() != **f.source() {
            return Err(Error::InvalidMap("f and i have different sources".into()));
        }
        let (p, g) = match closing {
            None => (None, None),
            Some((p, g)) => {
                if p.compose(&f)? != g.compose(&i)? {
                    return Err(Error::InvalidMap("square does not commute".into()));
                }
                (Some(p), Some(g))
            }
        };
        Ok(Self { i, f, p, g })
    }

    /// A diagonal `h : B -> X` with `h ∘ i = f` and, for a square, `p ∘ h = g`.
    pub fn solve(&self) -> Result<Option<SimplicialMap>> {
        let ext = Extender::new(&self.i, self.f.target().clone())?;
        let Some(p) = &self.p else {
            return Ok(ext.extend(&self.f));
        };
        let g = self.g.as_ref().expect("g accompanies p");
        let found = ext.find_images(self.f.images(), &|s, h| p.apply(h) == *g.image(s));
        Ok(found.map(|imgs| to_map(self.i.target(), self.f.target(), &imgs)))
    }
}

/// A commuting square `p ∘ top = bottom ∘ i` without a diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftingSquare {
    pub top: SimplicialMap,
    pub bottom: SimplicialMap,
}

impl LiftingSquare {
    pub fn to_json_value(&self) -> serde_json::Value {
        json!({ "top": self.top.to_json_value(), "bottom": self.bottom.to_json_value() })
    }
}

/// An unfillable square against the inclusion of `Λ^i_k`, possibly subdivided.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HornFailure {
    pub k: usize,
    pub i: usize,
    pub square: LiftingSquare,
}

impl HornFailure {
    pub fn to_json_value(&self) -> serde_json::Value {
        json!({ "k": self.k, "i": self.i, "square": self.square.to_json_value() })
    }
}

/// An answer that holds up to dimension `bound`, or a witness that it fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict<W> {
    pub bound: usize,
    pub failure: Option<W>,
}

impl<W> Verdict<W> {
    pub fn holds(&self) -> bool {
        self.failure.is_none()
    }
}

/// The unique map `X -> Δ₀`.
pub fn terminal_map(x: &Arc<SimplicialSet>) -> SimplicialMap {
    let point = Arc::new(standard_simplex(0));
    let images = (0..=x.max_dim())
        .map(|d| {
            let img = point.all_of_dim(d).pop().expect("Δ₀ has one simplex per dimension");
            vec![img; x.count(d)]
        })
        .collect();
    SimplicialMap::new_unchecked(x.clone(), point, images)
}

fn is_point(y: &SimplicialSet) -> bool {
    !y.is_truncated() && y.counts() == [1]
}

/// Lifting against a fixed inclusion, with the extension searches prepared once.
struct Lifter {
    i: SimplicialMap,
    source_index: TargetIndex,
    up: Extender,
    down: Option<Extender>,
}

impl Lifter {
    fn new(p: &SimplicialMap, i: &SimplicialMap) -> Result<Self> {
        if !i.is_mono() {
            return Err(Error::NotMono);
        }
        let b = i.target();
        let x = p.source();
        let y = p.target();
        x.ensure_complete_through(b.max_dim())?;
        y.ensure_complete_through(b.max_dim())?;
        let source_index = TargetIndex::new(x.clone(), i.source().max_dim())?;
        let up = Extender::new(i, x.clone())?;
        let down = if is_point(y) { None } else { Some(Extender::new(i, y.clone())?) };
        Ok(Self { i: i.clone(), source_index, up, down })
    }

    /// First unfillable square in search order.
    fn counterexample(&self, p: &SimplicialMap) -> Result<Option<LiftingSquare>> {
        let a = self.i.source();
        let b = self.i.target();
        let x = p.source();
        let y = p.target();
        let mut found = None;
        let _ = for_each_map(a, &self.source_index, &mut |f_imgs| {
            let f = unwrap_images(f_imgs);
            match &self.down {
                None => {
                    if !self.up.exists(&f) {
                        let top = SimplicialMap::new_unchecked(a.clone(), x.clone(), f.clone());
                        let bottom = terminal_map(b);
                        found = Some(LiftingSquare { top, bottom });
                        return ControlFlow::Break(());
                    }
                }
                Some(down) => {
                    let pf: Vec<Vec<FaceRecord>> =
                        f.iter().map(|row| row.iter().map(|r| p.apply(r)).collect()).collect();
                    let flow = down.for_each(&pf, &mut |g_imgs| {
                        let accept = |s: crate::sset::SimplexRef, h: &FaceRecord| p.apply(h) == *g_imgs[s.dim][s.id].as_ref().unwrap();
                        if self.up.find_images(&f, &accept).is_none() {
                            let top = SimplicialMap::new_unchecked(a.clone(), x.clone(), f.clone());
                            let bottom = to_map(b, y, g_imgs);
                            found = Some(LiftingSquare { top, bottom });
                            return ControlFlow::Break(());
                        }
                        ControlFlow::Continue(())
                    });
                    if flow.is_break() {
                        return ControlFlow::Break(());
                    }
                }
            }
            ControlFlow::Continue(())
        })?;
        Ok(found)
    }
}

/// Whether `p` has the right lifting property against `i`; `bound` must
/// cover the dimension of `B`.
pub fn has_rlp(p: &SimplicialMap, i: &SimplicialMap, bound: usize) -> Result<Verdict<LiftingSquare>> {
    let needed = i.target().max_dim();
    if bound < needed {
        return Err(Error::Truncated { bound, needed });
    }
    let failure = Lifter::new(p, i)?.counterexample(p)?;
    Ok(Verdict { bound, failure })
}

/// Horn inclusions `Sd^n(Λ^i_k ↪ Δ_k)` for `1 <= k <= bound`, ordered by `(k, i)`.
pub fn subdivided_horns(n: usize, bound: usize) -> Result<Vec<(usize, usize, SimplicialMap)>> {
    let mut out = Vec::new();
    for k in 1..=bound {
        for i in 0..=k {
            let (_, incl) = horn(k, i)?;
            out.push((k, i, sd_iter_map(&incl, n)?));
        }
    }
    Ok(out)
}

/// A retraction `sk_bound X ⋆ Δ₀ -> X` of the cone on the `bound`-skeleton,
/// if one exists: a vertex every simplex of dimension below `bound` can be
/// coherently joined to.
pub fn cone_retraction(x: &Arc<SimplicialSet>, bound: usize) -> Result<Option<SimplicialMap>> {
    x.ensure_complete_through(bound)?;
    let sk = Arc::new(x.skeleton(bound));
    let inclusion = right_cone(&sk);
    let identity = SimplicialMap::identity(sk).retarget(x.clone());
    Ok(Extender::new(&inclusion, x.clone())?.extend(&identity))
}

/// Whether `Ex^n(p)` lifts against every horn of dimension at most `bound`,
/// decided by lifting `p` against the subdivided horn inclusions.
///
/// Two sufficient conditions settle `n >= 1` without enumerating squares:
///
/// - `p` lifts against the unsubdivided horns through `bound`. The inclusion
///   `Sd^n Λ^i_k ↪ Sd^n Δ_k` is a composite of pushouts of horn inclusions of
///   dimension at most `k`, since subdivision carries the elementary
///   collapse of `Δ_k` onto `Λ^i_k` to a sequence of elementary collapses.
/// - `p : X -> Δ₀` and `X` has a [`cone_retraction`]. `Sd^n Δ_k` arises from
///   `Sd^n Λ^i_k` by coning off the subdivided boundaries of the missing
///   simplices one at a time, and each cone maps into `X` through the
///   retraction.
pub fn is_fib_n(p: &SimplicialMap, n: usize, bound: usize) -> Result<Verdict<HornFailure>> {
    p.source().ensure_complete_through(bound)?;
    p.target().ensure_complete_through(bound)?;
    if n >= 1 && bound >= 1 {
        if is_point(p.target()) && cone_retraction(p.source(), bound)?.is_some() {
            return Ok(Verdict { bound, failure: None });
        }
        if is_fib_n(p, 0, bound)?.holds() {
            return Ok(Verdict { bound, failure: None });
        }
    }
    is_fib_n_exhaustive(p, n, bound)
}

/// [`is_fib_n`] by enumerating every square, without the shortcuts.
pub fn is_fib_n_exhaustive(p: &SimplicialMap, n: usize, bound: usize) -> Result<Verdict<HornFailure>> {
    p.source().ensure_complete_through(bound)?;
    p.target().ensure_complete_through(bound)?;
    for (k, i, incl) in subdivided_horns(n, bound)? {
        if let Some(square) = Lifter::new(p, &incl)?.counterexample(p)? {
            return Ok(Verdict { bound, failure: Some(HornFailure { k, i, square }) });
        }
    }
    Ok(Verdict { bound, failure: None })
}

/// `is_fib_n` for `X -> Δ₀`.
pub fn is_fib_n_object(x: &Arc<SimplicialSet>, n: usize, bound: usize) -> Result<Verdict<HornFailure>> {
    is_fib_n(&terminal_map(x), n, bound)
}

/// Whether every horn `Λ^i_k -> X` with `k <= bound` fills. Failures are
/// reported at the least `(k, i)`.
pub fn is_kan_up_to(x: &Arc<SimplicialSet>, bound: usize) -> Result<Verdict<HornFailure>> {
    is_fib_n_object(x, 0, bound)
}
