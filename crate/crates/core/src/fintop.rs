//! Finite topological spaces, partial maps between them, and partial
//! homeomorphisms.
//!
//! A finite space is stored through the minimal open neighbourhood of each
//! point. Every open set is a union of these, so continuity and openness
//! questions reduce to inclusions between minimal opens.

use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A subset of the points of a space, indexed by point position.
pub type PointSet = FixedBitSet;

/// Default cap on the number of points of a user supplied space.
pub const DEFAULT_MAX_POINTS: usize = 64;

/// Spaces above this size refuse to enumerate their open family.
const MAX_ENUMERABLE_POINTS: usize = 20;

pub fn point_set(len: usize, members: impl IntoIterator<Item = usize>) -> PointSet {
    let mut s = FixedBitSet::with_capacity(len);
    for m in members {
        s.insert(m);
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTopSpace {
    names: Vec<String>,
    index: HashMap<String, usize>,
    min_open: Vec<PointSet>,
}

fn check_bound(n: usize, bound: usize) -> Result<()> {
    if n > bound {
        return Err(Error::TooManyPoints { points: n, bound });
    }
    Ok(())
}

fn index_names(names: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if index.insert(n.clone(), i).is_some() {
            return Err(Error::Structure(format!("duplicate point `{n}`")));
        }
    }
    Ok(index)
}

impl FiniteTopSpace {
    pub fn discrete(names: Vec<String>) -> Result<Self> {
        Self::uniform(names, true, DEFAULT_MAX_POINTS)
    }

    pub fn indiscrete(names: Vec<String>) -> Result<Self> {
        Self::uniform(names, false, DEFAULT_MAX_POINTS)
    }

    pub(crate) fn uniform(names: Vec<String>, discrete: bool, max_points: usize) -> Result<Self> {
        check_bound(names.len(), max_points)?;
        let n = names.len();
        let min_open = (0..n).map(|p| if discrete { point_set(n, [p]) } else { point_set(n, 0..n) }).collect();
        Ok(Self { index: index_names(&names)?, names, min_open })
    }

    /// Builds a space from an explicit open family, which must already be
    /// closed under pairwise union and intersection and contain the empty
    /// and the full set.
    pub fn from_opens(names: Vec<String>, opens: &[Vec<usize>], max_points: usize) -> Result<Self> {
        check_bound(names.len(), max_points)?;
        let n = names.len();
        let sets: Vec<PointSet> = opens
            .iter()
            .map(|o| {
                if let Some(&bad) = o.iter().find(|&&p| p >= n) {
                    return Err(Error::UnknownPoint(format!("#{bad}")));
                }
                Ok(point_set(n, o.iter().copied()))
            })
            .collect::<Result<_>>()?;
        let family: HashSet<&PointSet> = sets.iter().collect();
        if !family.contains(&point_set(n, [])) {
            return Err(Error::NotATopology("empty set missing".into()));
        }
        if !family.contains(&point_set(n, 0..n)) {
            return Err(Error::NotATopology("full set missing".into()));
        }
        let show = |s: &PointSet| -> String {
            let v: Vec<&str> = s.ones().map(|p| names[p].as_str()).collect();
            format!("{{{}}}", v.join(","))
        };
        for (i, a) in sets.iter().enumerate() {
            for b in &sets[i + 1..] {
                let mut u = a.clone();
                u.union_with(b);
                if !family.contains(&u) {
                    return Err(Error::NotATopology(format!("union of {} and {} is not listed", show(a), show(b))));
                }
                let mut m = a.clone();
                m.intersect_with(b);
                if !family.contains(&m) {
                    return Err(Error::NotATopology(format!(
                        "intersection of {} and {} is not listed",
                        show(a),
                        show(b)
                    )));
                }
            }
        }
        Self::from_generating_sets(names, &sets)
    }

    /// Builds the coarsest topology in which every listed set is open.
    pub fn from_subbasis(names: Vec<String>, sets: &[Vec<usize>], max_points: usize) -> Result<Self> {
        check_bound(names.len(), max_points)?;
        let n = names.len();
        let sets: Vec<PointSet> = sets
            .iter()
            .map(|o| {
                if let Some(&bad) = o.iter().find(|&&p| p >= n) {
                    return Err(Error::UnknownPoint(format!("#{bad}")));
                }
                Ok(point_set(n, o.iter().copied()))
            })
            .collect::<Result<_>>()?;
        Self::from_generating_sets(names, &sets)
    }

    fn from_generating_sets(names: Vec<String>, sets: &[PointSet]) -> Result<Self> {
        let n = names.len();
        let min_open = (0..n)
            .map(|p| {
                let mut m = point_set(n, 0..n);
                for s in sets.iter().filter(|s| s.contains(p)) {
                    m.intersect_with(s);
                }
                m
            })
            .collect();
        Ok(Self { index: index_names(&names)?, names, min_open })
    }

    /// Internal constructor for derived spaces (products, pullbacks,
    /// quotients); not subject to the point bound.
    pub(crate) fn from_min_opens(names: Vec<String>, min_open: Vec<PointSet>) -> Self {
        debug_assert_eq!(names.len(), min_open.len());
        let index = names.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        Self { names, index, min_open }
    }

    /// Subspace of a product: point `i` has coordinates `coords[i]`, one per
    /// factor. Its minimal open is the set of points whose every coordinate
    /// lies in the minimal open of the matching coordinate.
    pub fn product_subspace(names: Vec<String>, coords: &[Vec<usize>], factors: &[&FiniteTopSpace]) -> Self {
        let n = coords.len();
        let min_open = coords
            .iter()
            .map(|p| {
                point_set(
                    n,
                    coords.iter().enumerate().filter_map(|(j, q)| {
                        let inside = factors.iter().enumerate().all(|(k, f)| f.min_open[p[k]].contains(q[k]));
                        inside.then_some(j)
                    }),
                )
            })
            .collect();
        Self::from_min_opens(names, min_open)
    }

    /// The same space with its points listed in the order of `order`.
    pub fn reindexed(&self, order: &[String]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::Structure(format!("space has {} points but {} were expected", self.len(), order.len())));
        }
        let pos: Vec<usize> = order.iter().map(|n| self.index_of(n)).collect::<Result<_>>()?;
        let mut inv = vec![0; order.len()];
        for (new, &old) in pos.iter().enumerate() {
            inv[old] = new;
        }
        let min_open =
            pos.iter().map(|&old| point_set(order.len(), self.min_open[old].ones().map(|q| inv[q]))).collect();
        Ok(Self::from_min_opens(order.to_vec(), min_open))
    }

    /// Subspace on the given points, listed in increasing order.
    pub fn subspace(&self, points: &PointSet) -> Self {
        let keep: Vec<usize> = points.ones().collect();
        let mut pos = vec![usize::MAX; self.len()];
        for (i, &p) in keep.iter().enumerate() {
            pos[p] = i;
        }
        let min_open = keep
            .iter()
            .map(|&p| point_set(keep.len(), self.min_open[p].ones().filter(|q| points.contains(*q)).map(|q| pos[q])))
            .collect();
        Self::from_min_opens(keep.iter().map(|&p| self.names[p].clone()).collect(), min_open)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, p: usize) -> &str {
        &self.names[p]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownPoint(name.to_string()))
    }

    /// Intersection of all opens containing the named point.
    pub fn minimal_open(&self, point: &str) -> Result<&PointSet> {
        Ok(&self.min_open[self.index_of(point)?])
    }

    /// Minimal open neighbourhood of the point at position `p`.
    pub fn min_open(&self, p: usize) -> &PointSet {
        &self.min_open[p]
    }

    pub fn is_open(&self, set: &PointSet) -> bool {
        set.ones().all(|p| self.min_open[p].is_subset(set))
    }

    /// Smallest open set containing `set`.
    pub fn open_hull(&self, set: &PointSet) -> PointSet {
        let mut h = point_set(self.len(), []);
        for p in set.ones() {
            h.union_with(&self.min_open[p]);
        }
        h
    }

    pub fn is_discrete(&self) -> bool {
        self.min_open.iter().all(|m| m.count_ones(..) == 1)
    }

    /// Every open set, in a deterministic order. Only available for small
    /// spaces; returns `None` above twenty points.
    pub fn opens(&self) -> Option<Vec<PointSet>> {
        if self.len() > MAX_ENUMERABLE_POINTS {
            return None;
        }
        let mut seen: HashSet<PointSet> = HashSet::new();
        let empty = point_set(self.len(), []);
        let mut frontier = vec![empty.clone()];
        seen.insert(empty);
        while let Some(o) = frontier.pop() {
            for m in &self.min_open {
                let mut u = o.clone();
                u.union_with(m);
                if seen.insert(u.clone()) {
                    frontier.push(u);
                }
            }
        }
        let mut all: Vec<PointSet> = seen.into_iter().collect();
        all.sort_by_key(|s| (s.count_ones(..), s.ones().collect::<Vec<_>>()));
        Some(all)
    }

    pub fn to_spec(&self) -> SpaceSpec {
        let points = self.names.clone();
        if self.len() <= 8 {
            if let Some(opens) = self.opens() {
                return SpaceSpec {
                    points,
                    opens: Some(opens.iter().map(|o| o.ones().map(|p| self.names[p].clone()).collect()).collect()),
                    basis: None,
                    kind: None,
                };
            }
        }
        SpaceSpec {
            points,
            opens: None,
            basis: Some(self.min_open.iter().map(|o| o.ones().map(|p| self.names[p].clone()).collect()).collect()),
            kind: None,
        }
    }
}

/// File representation of a space. Exactly one of `opens`, `basis` or
/// `kind` ("discrete" / "indiscrete") describes the topology.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub points: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opens: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

impl SpaceSpec {
    pub fn build(&self, max_points: usize) -> Result<FiniteTopSpace> {
        check_bound(self.points.len(), max_points)?;
        let names = self.points.clone();
        let index = index_names(&names)?;
        let resolve = |sets: &Vec<Vec<String>>| -> Result<Vec<Vec<usize>>> {
            sets.iter()
                .map(|s| {
                    s.iter().map(|p| index.get(p).copied().ok_or_else(|| Error::UnknownPoint(p.clone()))).collect()
                })
                .collect()
        };
        match (&self.opens, &self.basis, self.kind.as_deref()) {
            (Some(o), None, None) => FiniteTopSpace::from_opens(names, &resolve(o)?, max_points),
            (None, Some(b), None) => FiniteTopSpace::from_subbasis(names, &resolve(b)?, max_points),
            (None, None, Some("discrete")) => FiniteTopSpace::uniform(names, true, max_points),
            (None, None, Some("indiscrete")) => FiniteTopSpace::uniform(names, false, max_points),
            (None, None, Some(other)) => Err(Error::NotATopology(format!("unknown kind `{other}`"))),
            _ => Err(Error::NotATopology("exactly one of opens, basis, kind is required".into())),
        }
    }
}

/// A map defined on a subset of the source points.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartialMap {
    table: Vec<Option<usize>>,
}

impl PartialMap {
    pub fn new(table: Vec<Option<usize>>) -> Self {
        Self { table }
    }

    pub fn from_pairs(src_len: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut table = vec![None; src_len];
        for (p, q) in pairs {
            table[p] = Some(q);
        }
        Self { table }
    }

    pub fn identity(len: usize) -> Self {
        Self { table: (0..len).map(Some).collect() }
    }

    pub fn get(&self, p: usize) -> Option<usize> {
        self.table.get(p).copied().flatten()
    }

    pub fn domain(&self) -> PointSet {
        point_set(self.table.len(), self.table.iter().enumerate().filter_map(|(p, v)| v.map(|_| p)))
    }

    pub fn image(&self, tgt_len: usize) -> PointSet {
        point_set(tgt_len, self.table.iter().flatten().copied())
    }

    pub fn table(&self) -> &[Option<usize>] {
        &self.table
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = HashSet::new();
        self.table.iter().flatten().all(|q| seen.insert(*q))
    }

    /// Inverse table, defined on the image. Meaningful only when injective.
    pub fn inverse(&self, tgt_len: usize) -> PartialMap {
        let mut t = vec![None; tgt_len];
        for (p, q) in self.table.iter().enumerate() {
            if let Some(q) = q {
                t[*q] = Some(p);
            }
        }
        PartialMap { table: t }
    }

    /// `other ∘ self`, defined where `self` lands in the domain of `other`.
    pub fn then(&self, other: &PartialMap) -> PartialMap {
        PartialMap { table: self.table.iter().map(|v| v.and_then(|q| other.get(q))).collect() }
    }
}

/// True iff every open of `tgt` pulls back to an open of the subspace
/// `f.domain()` of `src`. The domain itself must be open.
pub fn is_continuous(f: &PartialMap, src: &FiniteTopSpace, tgt: &FiniteTopSpace) -> Result<bool> {
    let dom = f.domain();
    if !src.is_open(&dom) {
        return Err(Error::DomainNotOpen);
    }
    Ok(continuous_on_domain(f, src, tgt))
}

/// Continuity of `f` on the subspace given by its domain, without requiring
/// that domain to be open.
pub fn continuous_on_domain(f: &PartialMap, src: &FiniteTopSpace, tgt: &FiniteTopSpace) -> bool {
    continuity_witness(f, src, tgt).is_none()
}

/// A pair `(p, q)` with `q` in the minimal open of `p` but `f(q)` outside
/// the minimal open of `f(p)`, if continuity fails.
pub fn continuity_witness(f: &PartialMap, src: &FiniteTopSpace, tgt: &FiniteTopSpace) -> Option<(usize, usize)> {
    f.table.iter().enumerate().find_map(|(p, v)| {
        let target = tgt.min_open((*v)?);
        src.min_open(p).ones().find(|&q| f.get(q).is_some_and(|fq| !target.contains(fq))).map(|q| (p, q))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HomeoFailure {
    DomainNotOpen,
    NotInjective,
    ImageNotOpen,
    NotContinuous,
    InverseNotContinuous,
}

/// Injective partial map with open domain and open image, continuous in
/// both directions.
pub fn is_partial_homeomorphism(
    f: &PartialMap,
    src: &FiniteTopSpace,
    tgt: &FiniteTopSpace,
) -> std::result::Result<(), HomeoFailure> {
    if !src.is_open(&f.domain()) {
        return Err(HomeoFailure::DomainNotOpen);
    }
    if !f.is_injective() {
        return Err(HomeoFailure::NotInjective);
    }
    if !tgt.is_open(&f.image(tgt.len())) {
        return Err(HomeoFailure::ImageNotOpen);
    }
    if !continuous_on_domain(f, src, tgt) {
        return Err(HomeoFailure::NotContinuous);
    }
    if !continuous_on_domain(&f.inverse(tgt.len()), tgt, src) {
        return Err(HomeoFailure::InverseNotContinuous);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(ns: &[&str]) -> Vec<String> {
        ns.iter().map(|s| s.to_string()).collect()
    }

    fn sierpinski() -> FiniteTopSpace {
        FiniteTopSpace::from_opens(names(&["a", "b"]), &[vec![], vec![0], vec![0, 1]], 64).unwrap()
    }

    /// Preimage oracle: f⁻¹(O) open in the domain subspace for every open O.
    fn continuous_by_preimages(f: &PartialMap, src: &FiniteTopSpace, tgt: &FiniteTopSpace) -> bool {
        let dom = f.domain();
        let src_opens = src.opens().unwrap();
        tgt.opens().unwrap().iter().all(|o| {
            let pre = point_set(src.len(), dom.ones().filter(|&p| o.contains(f.get(p).unwrap())));
            src_opens.iter().any(|u| {
                let mut cut = u.clone();
                cut.intersect_with(&dom);
                cut == pre
            })
        })
    }

    #[test]
    fn minimal_opens_of_standard_spaces() {
        let d = FiniteTopSpace::discrete(names(&["a", "b"])).unwrap();
        assert_eq!(d.minimal_open("a").unwrap().ones().collect::<Vec<_>>(), vec![0]);
        let i = FiniteTopSpace::indiscrete(names(&["a", "b"])).unwrap();
        assert_eq!(i.minimal_open("a").unwrap().ones().collect::<Vec<_>>(), vec![0, 1]);
        let s = sierpinski();
        assert_eq!(s.minimal_open("b").unwrap().ones().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(s.minimal_open("a").unwrap().ones().collect::<Vec<_>>(), vec![0]);
        assert_eq!(s.minimal_open("z"), Err(Error::UnknownPoint("z".into())));
    }

    #[test]
    fn loader_reports_first_violated_pair() {
        let err = FiniteTopSpace::from_opens(names(&["a", "b", "c"]), &[vec![], vec![0], vec![1], vec![0, 1, 2]], 64)
            .unwrap_err();
        assert_eq!(err, Error::NotATopology("union of {a} and {b} is not listed".into()));
        assert!(FiniteTopSpace::from_opens(names(&["a"]), &[vec![0]], 64).is_err());
    }

    #[test]
    fn point_bound_is_enforced() {
        let many: Vec<String> = (0..70).map(|i| format!("p{i}")).collect();
        assert_eq!(FiniteTopSpace::discrete(many.clone()).unwrap_err(), Error::TooManyPoints { points: 70, bound: 64 });
        let spec = SpaceSpec { points: many, opens: None, basis: None, kind: Some("indiscrete".into()) };
        assert!(spec.build(100).is_ok());
        assert!(spec.build(10).is_err());
    }

    #[test]
    fn continuity_examples() {
        let s = sierpinski();
        assert!(is_continuous(&PartialMap::identity(2), &s, &s).unwrap());
        assert!(is_continuous(&PartialMap::new(vec![Some(1), Some(1)]), &s, &s).unwrap());
        let swap = PartialMap::new(vec![Some(1), Some(0)]);
        assert!(!is_continuous(&swap, &s, &s).unwrap());
        let bad_domain = PartialMap::new(vec![None, Some(0)]);
        assert_eq!(is_continuous(&bad_domain, &s, &s), Err(Error::DomainNotOpen));
    }

    #[test]
    fn partial_homeomorphism_examples() {
        let s = sierpinski();
        assert_eq!(is_partial_homeomorphism(&PartialMap::identity(2), &s, &s), Ok(()));
        let incl = PartialMap::new(vec![Some(0), None]);
        assert_eq!(is_partial_homeomorphism(&incl, &s, &s), Ok(()));
        let to_b = PartialMap::new(vec![Some(1), None]);
        assert_eq!(is_partial_homeomorphism(&to_b, &s, &s), Err(HomeoFailure::ImageNotOpen));
    }

    #[test]
    fn subbasis_closure_and_opens() {
        let s = FiniteTopSpace::from_subbasis(names(&["a", "b", "c"]), &[vec![0, 1], vec![1, 2]], 64).unwrap();
        assert_eq!(s.min_open(1).ones().collect::<Vec<_>>(), vec![1]);
        let opens = s.opens().unwrap();
        // ∅, {b}, {a,b}, {b,c}, {a,b,c}
        assert_eq!(opens.len(), 5);
        assert!(opens.iter().all(|o| s.is_open(o)));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_space() -> impl Strategy<Value = FiniteTopSpace> {
            (1usize..6).prop_flat_map(|n| {
                proptest::collection::vec(proptest::collection::vec(0..n, 0..n), 0..5).prop_map(move |sets| {
                    let ns = (0..n).map(|i| format!("p{i}")).collect();
                    FiniteTopSpace::from_subbasis(ns, &sets, 64).unwrap()
                })
            })
        }

        proptest! {
            #[test]
            fn minimal_open_is_least_open_neighbourhood(s in arb_space()) {
                let opens = s.opens().unwrap();
                for p in 0..s.len() {
                    let m = s.min_open(p);
                    prop_assert!(s.is_open(m));
                    prop_assert!(m.contains(p));
                    for o in opens.iter().filter(|o| o.contains(p)) {
                        prop_assert!(m.is_subset(o));
                    }
                }
            }

            #[test]
            fn continuity_agrees_with_preimage_oracle(
                (s, t, table) in (arb_space(), arb_space()).prop_flat_map(|(s, t)| {
                    let n = s.len();
                    let m = t.len();
                    (Just(s), Just(t), proptest::collection::vec(0..m, n))
                })
            ) {
                let f = PartialMap::new(table.into_iter().map(Some).collect());
                prop_assert_eq!(is_continuous(&f, &s, &t).unwrap(), continuous_by_preimages(&f, &s, &t));
            }

            #[test]
            fn composite_of_partial_homeomorphisms(
                (s, f, g) in arb_space().prop_flat_map(|s| {
                    let n = s.len();
                    let perm = Just((0..n).collect::<Vec<_>>()).prop_shuffle();
                    let mask = proptest::collection::vec(any::<bool>(), n);
                    (Just(s), (perm.clone(), mask.clone()), (perm, mask))
                })
            ) {
                let mk = |(perm, mask): (Vec<usize>, Vec<bool>)| {
                    let dom = point_set(s.len(), (0..s.len()).filter(|&p| mask[p]));
                    let dom = s.open_hull(&dom);
                    PartialMap::new((0..s.len()).map(|p| dom.contains(p).then(|| perm[p])).collect())
                };
                let (f, g) = (mk(f), mk(g));
                if is_partial_homeomorphism(&f, &s, &s).is_ok() && is_partial_homeomorphism(&g, &s, &s).is_ok() {
                    prop_assert_eq!(is_partial_homeomorphism(&f.then(&g), &s, &s), Ok(()));
                }
            }
        }
    }
}
