//! Crossed modules of groupoids: a totally intransitive `C`, a groupoid `G`
//! over the same objects, a boundary `δ: C → G` and an action `c^a` of `G`
//! on `C`.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::groupoid::{search_morphisms, Groupoid, GroupoidMorphism, MorphismSearch};
use crate::report::Violation;

#[derive(Clone, Debug)]
pub struct CrossedModule {
    c: Groupoid,
    g: Groupoid,
    delta: Vec<usize>,
    action: HashMap<(usize, usize), usize>,
}

impl CrossedModule {
    /// Assembles a crossed module. Only structural requirements are
    /// enforced here: shared objects and an object-preserving `δ`. The
    /// axioms are reported by [`CrossedModule::check`].
    pub fn new(c: Groupoid, g: Groupoid, delta: Vec<usize>, action: HashMap<(usize, usize), usize>) -> Result<Self> {
        if c.objects() != g.objects() {
            return Err(Error::Structure("C and G must have the same objects in the same order".into()));
        }
        if delta.len() != c.num_arrows() || delta.iter().any(|&a| a >= g.num_arrows()) {
            return Err(Error::Structure("delta must send every arrow of C to an arrow of G".into()));
        }
        for (k, &d) in delta.iter().enumerate() {
            if g.src(d) != c.src(k) || g.tgt(d) != c.tgt(k) {
                return Err(Error::Structure(format!(
                    "delta is not the identity on objects at `{}` -> `{}`",
                    c.arrow_name(k),
                    g.arrow_name(d)
                )));
            }
        }
        if let Some((&(k, a), &v)) =
            action.iter().find(|(&(k, a), &v)| k >= c.num_arrows() || a >= g.num_arrows() || v >= c.num_arrows())
        {
            return Err(Error::Structure(format!("action entry ({k}, {a}) -> {v} is out of range")));
        }
        Ok(Self { c, g, delta, action })
    }

    /// Builds the action table from `act` on every pair with `β(c) = α(a)`.
    pub fn from_fn(
        c: Groupoid,
        g: Groupoid,
        delta: Vec<usize>,
        mut act: impl FnMut(usize, usize) -> usize,
    ) -> Result<Self> {
        let mut action = HashMap::new();
        for k in 0..c.num_arrows() {
            for &a in g.outgoing(c.tgt(k)) {
                action.insert((k, a), act(k, a));
            }
        }
        Self::new(c, g, delta, action)
    }

    pub fn c(&self) -> &Groupoid {
        &self.c
    }

    pub fn g(&self) -> &Groupoid {
        &self.g
    }

    /// Base objects, shared by `C` and `G`.
    pub fn objects(&self) -> &[String] {
        self.g.objects()
    }

    pub fn delta(&self, c: usize) -> usize {
        self.delta[c]
    }

    pub fn delta_table(&self) -> &[usize] {
        &self.delta
    }

    pub fn action_entries(&self) -> Vec<(usize, usize, usize)> {
        let mut v: Vec<_> = self.action.iter().map(|(&(c, a), &r)| (c, a, r)).collect();
        v.sort_unstable();
        v
    }

    /// `c^a`, when `β(c) = α(a)` and the table has an entry.
    pub fn act(&self, c: usize, a: usize) -> Option<usize> {
        self.action.get(&(c, a)).copied()
    }

    /// `c^a`, with an error naming both feet when they differ.
    pub fn apply_action(&self, c: usize, a: usize) -> Result<usize> {
        if self.c.tgt(c) != self.g.src(a) {
            return Err(Error::ActionFeet {
                beta_c: self.c.object_name(self.c.tgt(c)).to_string(),
                alpha_a: self.g.object_name(self.g.src(a)).to_string(),
            });
        }
        self.act(c, a).ok_or_else(|| {
            Error::Structure(format!(
                "action table has no entry for `{}`^`{}`",
                self.c.arrow_name(c),
                self.g.arrow_name(a)
            ))
        })
    }

    /// Every violated instance of the groupoid, action and crossed module
    /// axioms.
    pub fn check(&self) -> Vec<Violation> {
        let (c, g) = (&self.c, &self.g);
        let cn = |k: usize| c.arrow_name(k).to_string();
        let gn = |a: usize| g.arrow_name(a).to_string();
        let mut out: Vec<Violation> = Vec::new();
        out.extend(c.check().into_iter().map(|v| Violation { rule: format!("C {}", v.rule), ..v }));
        out.extend(g.check().into_iter().map(|v| Violation { rule: format!("G {}", v.rule), ..v }));
        if !out.is_empty() {
            return out;
        }
        for k in 0..c.num_arrows() {
            if !c.is_loop(k) {
                out.push(Violation::new("C totally intransitive", [cn(k)]));
            }
        }
        for (k1, k2, k3) in c.composition_entries() {
            if g.add(self.delta[k1], self.delta[k2]) != Some(self.delta[k3]) {
                out.push(Violation::new("delta morphism", [cn(k1), cn(k2)]));
            }
        }
        for &(k, a) in self.action.keys() {
            if c.tgt(k) != g.src(a) {
                out.push(Violation::new("action domain", [cn(k), gn(a)]));
            }
        }
        if !out.is_empty() {
            return out;
        }
        let mut missing = false;
        for k in 0..c.num_arrows() {
            for &a in g.outgoing(c.tgt(k)) {
                match self.act(k, a) {
                    None => {
                        out.push(Violation::new("action defined", [cn(k), gn(a)]));
                        missing = true;
                    }
                    Some(r) if c.tgt(r) != g.tgt(a) => out.push(Violation::new("action target", [cn(k), gn(a)])),
                    _ => {}
                }
            }
        }
        if missing {
            return out;
        }
        for x in 0..g.num_objects() {
            let loops: Vec<usize> = c.outgoing(x).to_vec();
            for &a in g.outgoing(x) {
                for &k1 in &loops {
                    for &k2 in &loops {
                        let lhs = self.act(c.add(k1, k2).unwrap(), a);
                        let rhs = c.add(self.act(k1, a).unwrap(), self.act(k2, a).unwrap());
                        if lhs != rhs {
                            out.push(Violation::new("action additive", [cn(k1), cn(k2), gn(a)]));
                        }
                    }
                }
                for &b in g.outgoing(g.tgt(a)) {
                    for &k in &loops {
                        let lhs = self.act(k, g.add(a, b).unwrap());
                        let rhs = self.act(self.act(k, a).unwrap(), b);
                        if lhs != rhs {
                            out.push(Violation::new("action composition", [cn(k), gn(a), gn(b)]));
                        }
                    }
                }
                for &k in &loops {
                    let r = self.act(k, a).unwrap();
                    let conj = g.sum(&[g.neg(a), self.delta[k], a]).unwrap();
                    if self.delta[r] != conj {
                        out.push(Violation::new("CM1", [cn(k), gn(a)]));
                    }
                }
            }
            for &k in &loops {
                if self.act(k, g.unit(x)) != Some(k) {
                    out.push(Violation::new("action unit", [cn(k)]));
                }
                for &k1 in &loops {
                    let lhs = self.act(k, self.delta[k1]);
                    let rhs = c.sum(&[c.neg(k1), k, k1]);
                    if lhs != rhs {
                        out.push(Violation::new("CM2", [cn(k), cn(k1)]));
                    }
                }
            }
        }
        out
    }

    /// A pair `(c, a)` with `c ∈ w`, `β(c) = α(a)` and `c^a ∉ w`, if any.
    pub fn equivariance_witness(&self, w: &FixedBitSet) -> Option<(usize, usize)> {
        w.ones().find_map(|k| {
            self.g
                .outgoing(self.c.tgt(k))
                .iter()
                .find(|&&a| self.act(k, a).is_some_and(|r| !w.contains(r)))
                .map(|&a| (k, a))
        })
    }

    pub fn is_equivariant(&self, w: &FixedBitSet) -> bool {
        self.equivariance_witness(w).is_none()
    }
}

/// Maps `f0` on objects, `f1` on `G`, `f2` on `C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XModMorphism {
    pub f0: Vec<usize>,
    pub f1: Vec<usize>,
    pub f2: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismReport {
    pub violations: Vec<Violation>,
    pub is_isomorphism: bool,
}

impl XModMorphism {
    pub fn identity(cm: &CrossedModule) -> Self {
        Self {
            f0: (0..cm.g.num_objects()).collect(),
            f1: (0..cm.g.num_arrows()).collect(),
            f2: (0..cm.c.num_arrows()).collect(),
        }
    }

    pub fn g_part(&self) -> GroupoidMorphism {
        GroupoidMorphism { objects: self.f0.clone(), arrows: self.f1.clone() }
    }

    pub fn c_part(&self) -> GroupoidMorphism {
        GroupoidMorphism { objects: self.f0.clone(), arrows: self.f2.clone() }
    }

    pub fn check(&self, src: &CrossedModule, tgt: &CrossedModule) -> MorphismReport {
        let mut violations = Vec::new();
        let sizes_ok = self.f0.len() == src.g.num_objects()
            && self.f1.len() == src.g.num_arrows()
            && self.f2.len() == src.c.num_arrows()
            && self.f0.iter().all(|&x| x < tgt.g.num_objects())
            && self.f1.iter().all(|&a| a < tgt.g.num_arrows())
            && self.f2.iter().all(|&k| k < tgt.c.num_arrows());
        if !sizes_ok {
            violations.push(Violation::new("maps defined", ["table sizes"]));
            return MorphismReport { violations, is_isomorphism: false };
        }
        let tag = |prefix: &str, v: Vec<Violation>| {
            v.into_iter().map(|v| Violation { rule: format!("{prefix} {}", v.rule), ..v }).collect::<Vec<_>>()
        };
        violations.extend(tag("f1", self.g_part().check(&src.g, &tgt.g)));
        violations.extend(tag("f2", self.c_part().check(&src.c, &tgt.c)));
        for k in 0..src.c.num_arrows() {
            if tgt.delta[self.f2[k]] != self.f1[src.delta[k]] {
                violations.push(Violation::new("f1 delta = delta f2", [src.c.arrow_name(k)]));
            }
        }
        for (k, a, r) in src.action_entries() {
            if tgt.act(self.f2[k], self.f1[a]) != Some(self.f2[r]) {
                violations.push(Violation::new("f2(c^a) = f2(c)^f1(a)", [src.c.arrow_name(k), src.g.arrow_name(a)]));
            }
        }
        let is_isomorphism = crate::groupoid::is_bijection(&self.f0, tgt.g.num_objects())
            && crate::groupoid::is_bijection(&self.f1, tgt.g.num_arrows())
            && crate::groupoid::is_bijection(&self.f2, tgt.c.num_arrows());
        MorphismReport { violations, is_isomorphism }
    }
}

/// Some isomorphism of crossed modules `src → tgt`, by exhaustive search.
pub fn find_isomorphism(src: &CrossedModule, tgt: &CrossedModule) -> Option<XModMorphism> {
    let mut found = None;
    let any = |_: usize, _: usize| true;
    let g_spec = MorphismSearch { objects: None, allowed: &any, injective: true };
    search_morphisms(&src.g, &tgt.g, &g_spec, &mut |f| {
        let f1 = f.arrows.clone();
        let allowed = |k: usize, k2: usize| tgt.delta[k2] == f1[src.delta[k]];
        let c_spec = MorphismSearch { objects: Some(&f.objects), allowed: &allowed, injective: true };
        search_morphisms(&src.c, &tgt.c, &c_spec, &mut |h| {
            let m = XModMorphism { f0: f.objects.clone(), f1: f1.clone(), f2: h.arrows.clone() };
            let r = m.check(src, tgt);
            if r.violations.is_empty() && r.is_isomorphism {
                found = Some(m);
                true
            } else {
                false
            }
        })
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{self, Topo};

    #[test]
    fn corpus_items_are_crossed_modules() {
        for item in corpus::standard(Topo::Discrete) {
            assert_eq!(item.xmod.check(), vec![], "{}", item.name);
        }
    }

    #[test]
    fn broken_cm2_witness() {
        let cm = corpus::broken_cm2();
        let v = cm.check();
        assert!(v.contains(&Violation::new("CM2", ["0", "1"])), "{v:?}");
    }

    #[test]
    fn broken_cm1_witness() {
        let cm = corpus::broken_cm1();
        let v = cm.check();
        assert!(v.contains(&Violation::new("CM1", ["1", "1"])), "{v:?}");
    }

    #[test]
    fn broken_action_witness() {
        let cm = corpus::broken_action();
        let v = cm.check();
        assert!(v.iter().any(|v| v.rule == "action composition"), "{v:?}");
    }

    #[test]
    fn apply_action_checks_feet() {
        let cm = corpus::pairz2(Topo::Discrete);
        let c = cm.c().arrow("y:1").unwrap();
        let a = cm.g().arrow("x>y").unwrap();
        assert_eq!(cm.apply_action(c, a), Err(Error::ActionFeet { beta_c: "y".into(), alpha_a: "x".into() }));
        let c = cm.c().arrow("x:1").unwrap();
        assert_eq!(cm.apply_action(c, a).unwrap(), cm.c().arrow("y:1").unwrap());
    }

    #[test]
    fn action_laws_by_table_lookup() {
        for item in corpus::standard(Topo::Discrete) {
            let (c, g) = (item.xmod.c(), item.xmod.g());
            for k in 0..c.num_arrows() {
                let x = c.tgt(k);
                assert_eq!(item.xmod.act(k, g.unit(x)), Some(k));
                for &a in g.outgoing(x) {
                    for &k2 in c.outgoing(x) {
                        let lhs = item.xmod.act(c.add(k, k2).unwrap(), a).unwrap();
                        let rhs = c.add(item.xmod.act(k, a).unwrap(), item.xmod.act(k2, a).unwrap()).unwrap();
                        assert_eq!(lhs, rhs);
                    }
                    for &b in g.outgoing(g.tgt(a)) {
                        let lhs = item.xmod.act(k, g.add(a, b).unwrap());
                        let rhs = item.xmod.act(item.xmod.act(k, a).unwrap(), b);
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_lands_in_vertex_groups() {
        for item in corpus::standard(Topo::Discrete) {
            let cm = &item.xmod;
            for k in 0..cm.c().num_arrows() {
                assert!(cm.g().is_loop(cm.delta(k)));
            }
        }
    }

    #[test]
    fn identity_and_equivariance_breaking_morphisms() {
        let cm = corpus::pairz2(Topo::Discrete);
        let id = XModMorphism::identity(&cm);
        let r = id.check(&cm, &cm);
        assert!(r.violations.is_empty() && r.is_isomorphism);
        let mut bad = id.clone();
        // swap C(y) elements only: still a groupoid automorphism, breaks equivariance
        let (y0, y1) = (cm.c().arrow("y:0").unwrap(), cm.c().arrow("y:1").unwrap());
        bad.f2[y0] = y1;
        bad.f2[y1] = y0;
        let r = bad.check(&cm, &cm);
        assert!(r.violations.iter().any(|v| v.rule == "f2(c^a) = f2(c)^f1(a)"), "{:?}", r.violations);
    }

    #[test]
    fn isomorphism_search_between_crossed_modules() {
        let a = corpus::z2z2(Topo::Discrete);
        let m = find_isomorphism(&a, &a).unwrap();
        assert!(m.check(&a, &a).is_isomorphism);
        assert!(find_isomorphism(&a, &corpus::pair2(Topo::Discrete)).is_none());
    }

    #[test]
    fn equivariance_of_subsets() {
        let cm = corpus::pairz2(Topo::Discrete);
        let c = cm.c();
        let all = c.arrow_set(0..c.num_arrows());
        assert!(cm.is_equivariant(&all));
        let lopsided = c.arrow_set(["x:0", "x:1", "y:0"].map(|n| c.arrow(n).unwrap()));
        assert!(!cm.is_equivariant(&lopsided));
    }
}
