//! Local linear coadmissible sections of `D(C)` over a topologized crossed
//! module, their products and inverses, and bounded enumeration.

use std::collections::{BTreeSet, HashMap};

use crate::dgpd::{DoubleGroupoid, Square};
use crate::error::{Error, Result};
use crate::fintop::{self, point_set, FiniteTopSpace, PartialMap, PointSet};
use crate::report::Violation;
use crate::xmod::CrossedModule;

/// The double groupoid of a topologized crossed module together with the
/// spaces sections are judged against.
#[derive(Clone, Debug)]
pub struct Frame {
    dg: DoubleGroupoid,
    objects: FiniteTopSpace,
    edges: FiniteTopSpace,
    inner: FiniteTopSpace,
    squares: FiniteTopSpace,
    by_boundary: HashMap<(usize, usize, usize), Vec<usize>>,
}

impl Frame {
    /// Requires topologies on both `C` and `G`. Squares carry the subspace
    /// topology of `C × G × G × G` through `(interior, left, right, bottom)`.
    pub fn new(cm: &CrossedModule) -> Result<Self> {
        let (gt, ct) = match (cm.g().topology(), cm.c().topology()) {
            (Some(g), Some(c)) => (g.clone(), c.clone()),
            _ => return Err(Error::Structure("crossed module has no topology on C and G".into())),
        };
        let dg = DoubleGroupoid::build(cm)?;
        let squares = square_space(&dg, &ct.arrows, &gt.arrows, Some);
        let mut by_boundary: HashMap<(usize, usize, usize), Vec<usize>> = HashMap::new();
        for (u, s) in dg.squares().iter().enumerate() {
            by_boundary.entry((s.left, s.right, s.bottom)).or_default().push(u);
        }
        Ok(Self { dg, objects: gt.objects, edges: gt.arrows, inner: ct.arrows, squares, by_boundary })
    }

    pub fn dg(&self) -> &DoubleGroupoid {
        &self.dg
    }

    pub fn xmod(&self) -> &CrossedModule {
        self.dg.xmod()
    }

    pub fn object_space(&self) -> &FiniteTopSpace {
        &self.objects
    }

    pub fn edge_space(&self) -> &FiniteTopSpace {
        &self.edges
    }

    pub fn inner_space(&self) -> &FiniteTopSpace {
        &self.inner
    }

    pub fn square_space(&self) -> &FiniteTopSpace {
        &self.squares
    }

    pub fn sq(&self, u: usize) -> Square {
        self.dg.square(u)
    }

    pub(crate) fn with_boundary(&self, left: usize, right: usize, bottom: usize) -> &[usize] {
        self.by_boundary.get(&(left, right, bottom)).map(Vec::as_slice).unwrap_or(&[])
    }

    fn edge_name(&self, a: usize) -> &str {
        self.xmod().g().arrow_name(a)
    }
}

/// Subspace of `inner × G × G × G` on the squares whose interior has a
/// position in `inner` under `pos`; points are listed in square order.
pub(crate) fn square_space(
    dg: &DoubleGroupoid,
    inner: &FiniteTopSpace,
    edges: &FiniteTopSpace,
    pos: impl Fn(usize) -> Option<usize>,
) -> FiniteTopSpace {
    let (names, coords): (Vec<String>, Vec<Vec<usize>>) = dg
        .squares()
        .iter()
        .enumerate()
        .filter_map(|(u, s)| pos(s.interior).map(|w| (dg.name(u).to_string(), vec![w, s.left, s.right, s.bottom])))
        .unzip();
    FiniteTopSpace::product_subspace(names, &coords, &[inner, edges, edges, edges])
}

/// A local linear coadmissible section: `s0` on an open `U0 ⊆ X` and a
/// square for every arrow of an open `U1 ⊆ G`. The domains are the places
/// where the tables are defined.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalSection {
    pub s0: Vec<Option<usize>>,
    pub values: Vec<Option<usize>>,
}

impl LocalSection {
    /// The constant section `x ↦ 1_x`, `a ↦ ε₁(a)` on all of `G`.
    pub fn constant(fr: &Frame) -> Self {
        let g = fr.xmod().g();
        Self {
            s0: (0..g.num_objects()).map(|x| Some(g.unit(x))).collect(),
            values: (0..g.num_arrows()).map(|a| Some(fr.dg.eps1(a))).collect(),
        }
    }

    pub fn u0(&self) -> PointSet {
        point_set(self.s0.len(), self.s0.iter().enumerate().filter_map(|(x, v)| v.map(|_| x)))
    }

    pub fn u1(&self) -> PointSet {
        point_set(self.values.len(), self.values.iter().enumerate().filter_map(|(a, v)| v.map(|_| a)))
    }

    pub fn is_empty(&self) -> bool {
        self.values.iter().all(Option::is_none)
    }

    pub fn value(&self, a: usize) -> Option<usize> {
        self.values.get(a).copied().flatten()
    }

    pub fn square(&self, fr: &Frame, a: usize) -> Option<Square> {
        self.value(a).map(|u| fr.sq(u))
    }

    /// `f1 = α₁ ∘ s` as a partial map on `G`.
    pub fn f1(&self, fr: &Frame) -> PartialMap {
        PartialMap::new(self.values.iter().map(|v| v.map(|u| fr.sq(u).top)).collect())
    }

    /// `f0 = α ∘ s0` as a partial map on `X`.
    pub fn f0(&self, fr: &Frame) -> PartialMap {
        let g = fr.xmod().g();
        PartialMap::new(self.s0.iter().map(|v| v.map(|b| g.src(b))).collect())
    }

    /// Every violated defining condition; empty for a member of `Γ(D(C))`.
    pub fn violations(&self, fr: &Frame) -> Vec<Violation> {
        let g = fr.xmod().g();
        let mut out = Vec::new();
        let en = |a: usize| fr.edge_name(a).to_string();
        let (u0, u1) = (self.u0(), self.u1());
        if !fr.objects.is_open(&u0) || !fr.edges.is_open(&u1) {
            out.push(Violation::new("domain open", [fmt_set(&u0, &fr.objects), fmt_set(&u1, &fr.edges)]));
        }
        for a in u1.ones() {
            if !u0.contains(g.src(a)) || !u0.contains(g.tgt(a)) {
                out.push(Violation::new("feet in domain", [en(a)]));
            }
        }
        for (x, v) in self.s0.iter().enumerate() {
            if v.is_some_and(|b| g.tgt(b) != x) {
                out.push(Violation::new("beta s0 = id", [g.object_name(x)]));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for a in u1.ones() {
            let s = self.square(fr, a).expect("in domain");
            if s.bottom != a || Some(s.left) != self.s0[g.src(a)] || Some(s.right) != self.s0[g.tgt(a)] {
                out.push(Violation::new("section edges", [en(a)]));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for a in u1.ones() {
            for &b in g.outgoing(g.tgt(a)) {
                let Some(ab) = g.add(a, b).filter(|&c| u1.contains(b) && u1.contains(c)) else { continue };
                let (sa, sb) = (self.values[a].unwrap(), self.values[b].unwrap());
                if fr.dg.compose2(sa, sb) != self.values[ab] {
                    out.push(Violation::new("local linear", [en(a), en(b)]));
                }
            }
        }
        let (f0, f1) = (self.f0(fr), self.f1(fr));
        if let Err(e) = fintop::is_partial_homeomorphism(&f0, &fr.objects, &fr.objects) {
            out.push(Violation::new("f0 partial homeomorphism", [format!("{e:?}")]));
        }
        if let Err(e) = fintop::is_partial_homeomorphism(&f1, &fr.edges, &fr.edges) {
            out.push(Violation::new("f1 partial homeomorphism", [format!("{e:?}")]));
        }
        if let Some(w) = linearity_witness(fr, &f1) {
            out.push(Violation::new("f1 linear", [en(w.0), en(w.1)]));
        }
        if let Some(w) = linearity_witness(fr, &f1.inverse(g.num_arrows())) {
            out.push(Violation::new("f1 inverse linear", [en(w.0), en(w.1)]));
        }
        let s0 = PartialMap::new(self.s0.clone());
        if let Some((p, q)) = fintop::continuity_witness(&s0, &fr.objects, &fr.edges) {
            out.push(Violation::new("s0 continuous", [g.object_name(p), g.object_name(q)]));
        }
        let s1 = PartialMap::new(self.values.clone());
        if let Some((p, q)) = fintop::continuity_witness(&s1, &fr.edges, &fr.squares) {
            out.push(Violation::new("s continuous", [en(p), en(q)]));
        }
        out
    }

    pub fn is_valid(&self, fr: &Frame) -> bool {
        self.violations(fr).is_empty()
    }

    /// `self * tau`: defined at `z` when `tau` is and `self` is defined at
    /// `f1τ(z)`, with value `self(f1τ z) +₁ tau(z)`.
    pub fn mul(&self, fr: &Frame, tau: &LocalSection) -> LocalSection {
        let g = fr.xmod().g();
        let s0 = tau
            .s0
            .iter()
            .map(|v| {
                let b = (*v)?;
                let outer = self.s0[g.src(b)]?;
                g.add(outer, b)
            })
            .collect();
        let values = tau
            .values
            .iter()
            .map(|v| {
                let inner = (*v)?;
                let outer = self.value(fr.sq(inner).top)?;
                fr.dg.compose1(outer, inner)
            })
            .collect();
        LocalSection { s0, values }
    }

    /// `σ⁻¹(z) = -₁σ(f1⁻¹ z)` and `σ⁻¹0(x) = -σ0(f0⁻¹ x)`.
    pub fn inverse(&self, fr: &Frame) -> LocalSection {
        let g = fr.xmod().g();
        let mut s0 = vec![None; self.s0.len()];
        for b in self.s0.iter().flatten() {
            s0[g.src(*b)] = Some(g.neg(*b));
        }
        let mut values = vec![None; self.values.len()];
        for u in self.values.iter().flatten() {
            values[fr.sq(*u).top] = Some(fr.dg.neg1(*u));
        }
        LocalSection { s0, values }
    }

    /// Restriction to `u1` on arrows and `u0` on objects.
    pub fn restrict(&self, u0: &PointSet, u1: &PointSet) -> LocalSection {
        LocalSection {
            s0: self.s0.iter().enumerate().map(|(x, v)| v.filter(|_| u0.contains(x))).collect(),
            values: self.values.iter().enumerate().map(|(a, v)| v.filter(|_| u1.contains(a))).collect(),
        }
    }

    /// Restriction to the minimal open of `a` and the open hull of its feet.
    pub fn restrict_near(&self, fr: &Frame, a: usize) -> LocalSection {
        let u1 = fr.edges.min_open(a).clone();
        let u0 = feet_hull(fr, &u1);
        self.restrict(&u0, &u1)
    }

    /// `L_s(w) = s(α₁ w) +₁ w`.
    pub fn left_translate(&self, fr: &Frame, w: usize) -> Result<usize> {
        let top = fr.sq(w).top;
        let outer = self.value(top).ok_or_else(|| Error::OutsideDomain(fr.dg.name(w).to_string()))?;
        fr.dg.compose(crate::dgpd::Direction::Vertical, outer, w)
    }

    pub fn describe(&self, fr: &Frame) -> String {
        let g = fr.xmod().g();
        let s0: Vec<String> = self
            .s0
            .iter()
            .enumerate()
            .filter_map(|(x, v)| v.map(|b| format!("{}->{}", g.object_name(x), g.arrow_name(b))))
            .collect();
        let s: Vec<String> = self
            .values
            .iter()
            .enumerate()
            .filter_map(|(a, v)| v.map(|u| format!("{}->{}", g.arrow_name(a), fr.dg.name(u))))
            .collect();
        format!("s0{{{}}} s{{{}}}", s0.join(", "), s.join(", "))
    }
}

fn fmt_set(s: &PointSet, space: &FiniteTopSpace) -> String {
    let names: Vec<&str> = s.ones().map(|p| space.name(p)).collect();
    format!("{{{}}}", names.join(","))
}

/// A pair on which a partial map of `G` fails to preserve `+`.
fn linearity_witness(fr: &Frame, f: &PartialMap) -> Option<(usize, usize)> {
    let g = fr.xmod().g();
    (0..g.num_arrows()).find_map(|a| {
        let fa = f.get(a)?;
        g.outgoing(g.tgt(a)).iter().find_map(|&b| {
            let (fb, fab) = (f.get(b)?, f.get(g.add(a, b)?)?);
            (g.add(fa, fb) != Some(fab)).then_some((a, b))
        })
    })
}

/// Smallest open set of objects containing the feet of `u1`.
pub(crate) fn feet_hull(fr: &Frame, u1: &PointSet) -> PointSet {
    let g = fr.xmod().g();
    let feet = point_set(g.num_objects(), u1.ones().flat_map(|a| [g.src(a), g.tgt(a)]));
    fr.objects.open_hull(&feet)
}

/// The domains used for bounded enumeration: the minimal open of each
/// arrow with the open hull of its feet, without repeats.
pub fn minimal_domains(fr: &Frame) -> Vec<(PointSet, PointSet)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for a in 0..fr.edges.len() {
        let u1 = fr.edges.min_open(a).clone();
        let key: Vec<usize> = u1.ones().collect();
        if seen.insert(key) {
            out.push((feet_hull(fr, &u1), u1));
        }
    }
    out
}

/// Every valid section on one of the [`minimal_domains`] whose values lie
/// in `allowed` (all squares when `None`), sorted.
pub fn enumerate_minimal(fr: &Frame, allowed: Option<&PointSet>) -> Vec<LocalSection> {
    let mut out = Vec::new();
    for (u0, u1) in minimal_domains(fr) {
        enumerate_on(fr, &u0, &u1, allowed, &mut out);
    }
    out.sort();
    out.dedup();
    out
}

/// Every valid section with exactly the domains `(u0, u1)`.
pub fn enumerate_on(fr: &Frame, u0: &PointSet, u1: &PointSet, allowed: Option<&PointSet>, out: &mut Vec<LocalSection>) {
    let g = fr.xmod().g();
    let xs: Vec<usize> = u0.ones().collect();
    let zs: Vec<usize> = u1.ones().collect();
    let mut s0 = vec![None; g.num_objects()];
    let mut assign_s0 = Vec::new();
    product(&xs.iter().map(|&x| g.incoming(x).to_vec()).collect::<Vec<_>>(), &mut assign_s0, &mut |choice| {
        for (&x, &b) in xs.iter().zip(choice) {
            s0[x] = Some(b);
        }
        let options: Vec<Vec<usize>> = zs
            .iter()
            .map(|&z| {
                let (l, r) = (s0[g.src(z)].unwrap(), s0[g.tgt(z)].unwrap());
                fr.with_boundary(l, r, z).iter().copied().filter(|&u| allowed.is_none_or(|w| w.contains(u))).collect()
            })
            .collect();
        let mut values = vec![None; g.num_arrows()];
        assign_values(fr, &zs, &options, 0, &mut values, &mut |values| {
            let s = LocalSection { s0: s0.clone(), values: values.to_vec() };
            if s.is_valid(fr) {
                out.push(s);
            }
        });
    });
}

fn product(options: &[Vec<usize>], chosen: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if chosen.len() == options.len() {
        visit(chosen);
        return;
    }
    for &o in &options[chosen.len()] {
        chosen.push(o);
        product(options, chosen, visit);
        chosen.pop();
    }
}

/// Backtracking over square values, pruning on the local linear condition
/// as soon as all three arrows of a sum are assigned.
fn assign_values(
    fr: &Frame,
    zs: &[usize],
    options: &[Vec<usize>],
    i: usize,
    values: &mut Vec<Option<usize>>,
    visit: &mut dyn FnMut(&[Option<usize>]),
) {
    if i == zs.len() {
        visit(values);
        return;
    }
    let g = fr.xmod().g();
    let z = zs[i];
    for &u in &options[i] {
        values[z] = Some(u);
        let consistent = zs[..=i].iter().all(|&a| {
            zs[..=i].iter().all(|&b| match g.add(a, b) {
                Some(c) if values[c].is_some() => fr.dg.compose2(values[a].unwrap(), values[b].unwrap()) == values[c],
                _ => true,
            })
        });
        if consistent {
            assign_values(fr, zs, options, i + 1, values, visit);
        }
    }
    values[z] = None;
}

/// Closure of `seeds` under products and inverses, dropping empty
/// sections. Fails once more than `cap` sections have been produced.
pub fn closure(fr: &Frame, seeds: &[LocalSection], cap: usize) -> Result<Vec<LocalSection>> {
    let mut set: BTreeSet<LocalSection> = seeds.iter().filter(|s| !s.is_empty()).cloned().collect();
    let mut frontier: Vec<LocalSection> = set.iter().cloned().collect();
    while let Some(s) = frontier.pop() {
        let current: Vec<LocalSection> = set.iter().cloned().collect();
        let mut fresh = vec![s.inverse(fr)];
        for t in &current {
            fresh.push(s.mul(fr, t));
            fresh.push(t.mul(fr, &s));
        }
        for f in fresh {
            if !f.is_empty() && set.insert(f.clone()) {
                if set.len() > cap {
                    return Err(Error::Structure(format!("more than {cap} sections in the closure")));
                }
                frontier.push(f);
            }
        }
    }
    Ok(set.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{self, Topo};

    fn frame(topo: Topo) -> Frame {
        Frame::new(&corpus::z2z2(topo)).unwrap()
    }

    #[test]
    fn constant_section_is_valid_and_neutral() {
        for topo in [Topo::Discrete, Topo::Indiscrete] {
            let fr = frame(topo);
            let c = LocalSection::constant(&fr);
            assert!(c.is_valid(&fr), "{:?}", c.violations(&fr));
            for s in enumerate_minimal(&fr, None) {
                let cr = c.restrict(&s.u0(), &s.u1());
                assert_eq!(s.mul(&fr, &cr), s);
                assert_eq!(cr.mul(&fr, &s), s);
            }
        }
    }

    #[test]
    fn discrete_z2z2_sections() {
        // At 0 the value must be a horizontal identity. At 1 the sides are
        // equal and the interior must be 0, since an interior 1 would send
        // the arrow 1 to the identity.
        let fr = frame(Topo::Discrete);
        assert_eq!(enumerate_minimal(&fr, None).len(), 4);
    }

    #[test]
    fn products_and_inverses_stay_valid() {
        for cm in [corpus::pairz2(Topo::Indiscrete), corpus::pairz2_sierpinski(), corpus::z4int(Topo::Discrete)] {
            let fr = Frame::new(&cm).unwrap();
            let all = enumerate_minimal(&fr, None);
            assert!(!all.is_empty());
            for s in &all {
                let inv = s.inverse(&fr);
                assert!(inv.is_valid(&fr), "{}: {:?}", inv.describe(&fr), inv.violations(&fr));
                assert_eq!(s.mul(&fr, &inv).mul(&fr, s), *s);
                for t in &all {
                    let st = s.mul(&fr, t);
                    assert!(st.is_valid(&fr), "{:?}", st.violations(&fr));
                }
            }
        }
    }

    #[test]
    fn left_translation_by_constant_is_identity() {
        let fr = frame(Topo::Indiscrete);
        let c = LocalSection::constant(&fr);
        for w in 0..fr.dg().len() {
            assert_eq!(c.left_translate(&fr, w).unwrap(), w);
        }
    }

    #[test]
    fn invalid_tables_are_reported() {
        let fr = frame(Topo::Discrete);
        let mut s = LocalSection::constant(&fr);
        s.s0[0] = Some(1);
        let rules: Vec<String> = s.violations(&fr).into_iter().map(|v| v.rule).collect();
        assert!(rules.contains(&"section edges".to_string()), "{rules:?}");
    }
}
