//! Free derivations of a crossed module, their induced endomorphisms, the
//! Whitehead product, and globally defined linear sections of `D(C)`.

use serde::Serialize;

use crate::dgpd::{DoubleGroupoid, Square};
use crate::error::{Error, Result};
use crate::groupoid::is_bijection;
use crate::report::Violation;
use crate::xmod::{CrossedModule, XModMorphism};

/// `s0: X → G` with `β s0(x) = x` and `s1: G → C` with
/// `s1(a + b) = s1(a)^b + s1(b)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FreeDerivation {
    pub s0: Vec<usize>,
    pub s1: Vec<usize>,
}

impl FreeDerivation {
    /// `s0(x) = 1ₓ`, `s1(a) = 0`.
    pub fn constant(cm: &CrossedModule) -> Self {
        let (c, g) = (cm.c(), cm.g());
        Self {
            s0: (0..g.num_objects()).map(|x| g.unit(x)).collect(),
            s1: (0..g.num_arrows()).map(|a| c.unit(g.tgt(a))).collect(),
        }
    }

    /// Violations of the feet conditions and the derivation law.
    pub fn check(&self, cm: &CrossedModule) -> Vec<Violation> {
        let (c, g) = (cm.c(), cm.g());
        let mut out = Vec::new();
        if self.s0.len() != g.num_objects() || self.s1.len() != g.num_arrows() {
            out.push(Violation::new("table sizes", [format!("{} / {}", self.s0.len(), self.s1.len())]));
            return out;
        }
        for x in 0..g.num_objects() {
            if self.s0[x] >= g.num_arrows() || g.tgt(self.s0[x]) != x {
                out.push(Violation::new("beta s0 = id", [g.object_name(x)]));
            }
        }
        for a in 0..g.num_arrows() {
            if self.s1[a] >= c.num_arrows() || c.tgt(self.s1[a]) != g.tgt(a) {
                out.push(Violation::new("beta s1 = beta", [g.arrow_name(a)]));
            }
        }
        if !out.is_empty() {
            return out;
        }
        for (a, b, ab) in g.composition_entries() {
            let rhs = cm.act(self.s1[a], b).and_then(|t| c.add(t, self.s1[b]));
            if rhs != Some(self.s1[ab]) {
                out.push(Violation::new("derivation law", [g.arrow_name(a), g.arrow_name(b)]));
            }
        }
        out
    }

    pub fn describe(&self, cm: &CrossedModule) -> String {
        let (c, g) = (cm.c(), cm.g());
        let s0: Vec<String> =
            (0..g.num_objects()).map(|x| format!("{}->{}", g.object_name(x), g.arrow_name(self.s0[x]))).collect();
        let s1: Vec<String> =
            (0..g.num_arrows()).map(|a| format!("{}->{}", g.arrow_name(a), c.arrow_name(self.s1[a]))).collect();
        format!("s0[{}] s1[{}]", s0.join(" "), s1.join(" "))
    }
}

/// Every derivation `s1` (independently of `s0`), by propagating the
/// derivation law from arrow-by-arrow choices.
pub fn enumerate_s1(cm: &CrossedModule) -> Vec<Vec<usize>> {
    let (c, g) = (cm.c(), cm.g());
    let n = g.num_arrows();
    // s1 vanishes on identities: s1(1) = s1(1)^1 + s1(1)
    let mut start = vec![None; n];
    for x in 0..g.num_objects() {
        if !propagate(cm, &mut start, g.unit(x), c.unit(x)) {
            return Vec::new();
        }
    }
    let mut out = Vec::new();
    let mut stack = vec![start];
    while let Some(state) = stack.pop() {
        let Some(a) = state.iter().position(Option::is_none) else {
            out.push(state.into_iter().map(Option::unwrap).collect());
            continue;
        };
        for &k in c.outgoing(g.tgt(a)).iter().rev() {
            let mut next = state.clone();
            if propagate(cm, &mut next, a, k) {
                stack.push(next);
            }
        }
    }
    out.retain(|s1: &Vec<usize>| {
        FreeDerivation { s0: (0..g.num_objects()).map(|x| g.unit(x)).collect(), s1: s1.clone() }.check(cm).is_empty()
    });
    out.sort();
    out
}

fn propagate(cm: &CrossedModule, state: &mut [Option<usize>], a: usize, k: usize) -> bool {
    let (c, g) = (cm.c(), cm.g());
    let mut queue = vec![(a, k)];
    while let Some((a, k)) = queue.pop() {
        match state[a] {
            Some(old) if old == k => continue,
            Some(_) => return false,
            None => state[a] = Some(k),
        }
        for &b in g.outgoing(g.tgt(a)) {
            if let Some(kb) = state[b] {
                let Some(v) = cm.act(k, b).and_then(|t| c.add(t, kb)) else { return false };
                queue.push((g.add(a, b).expect("composable"), v));
            }
        }
        for &b in g.incoming(g.src(a)) {
            if let Some(kb) = state[b] {
                let Some(v) = cm.act(kb, a).and_then(|t| c.add(t, k)) else { return false };
                queue.push((g.add(b, a).expect("composable"), v));
            }
        }
    }
    true
}

/// All sections `s0` of `β: G → X`.
pub fn enumerate_s0(cm: &CrossedModule) -> Vec<Vec<usize>> {
    let g = cm.g();
    let mut out = vec![Vec::new()];
    for x in 0..g.num_objects() {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<usize>| {
                g.incoming(x).iter().map(move |&a| {
                    let mut p = prefix.clone();
                    p.push(a);
                    p
                })
            })
            .collect();
    }
    out
}

/// `FDer(C)` in a fixed order.
pub fn enumerate_derivations(cm: &CrossedModule) -> Vec<FreeDerivation> {
    let s1s = enumerate_s1(cm);
    let mut out: Vec<FreeDerivation> = enumerate_s0(cm)
        .into_iter()
        .flat_map(|s0| s1s.iter().map(move |s1| FreeDerivation { s0: s0.clone(), s1: s1.clone() }))
        .collect();
    out.sort();
    out
}

fn require_derivation(cm: &CrossedModule, s: &FreeDerivation) -> Result<()> {
    match s.check(cm).into_iter().next() {
        None => Ok(()),
        Some(v) => Err(Error::NotADerivation(v.to_string())),
    }
}

/// `Δ(s) = (f0, f1, f2)`:
/// `f0(x) = α s0(x)`,
/// `f1(a) = s0(αa) + a + δ s1(a) - s0(βa)`,
/// `f2(c) = (c + s1 δ c)^(-s0 β c)`.
pub fn delta_of(cm: &CrossedModule, s: &FreeDerivation) -> Result<XModMorphism> {
    require_derivation(cm, s)?;
    let (c, g) = (cm.c(), cm.g());
    let f0 = s.s0.iter().map(|&a| g.src(a)).collect();
    let f1 = (0..g.num_arrows())
        .map(|a| {
            g.sum(&[s.s0[g.src(a)], a, cm.delta(s.s1[a]), g.neg(s.s0[g.tgt(a)])]).expect("feet of a derivation compose")
        })
        .collect();
    let f2 = (0..c.num_arrows())
        .map(|k| {
            let inner = c.add(k, s.s1[cm.delta(k)]).expect("same vertex group");
            cm.act(inner, g.neg(s.s0[c.tgt(k)])).expect("feet match")
        })
        .collect();
    Ok(XModMorphism { f0, f1, f2 })
}

/// `(s*t)0(x) = s0(g0 x) + t0(x)`, `(s*t)1(z) = t1(z) + (s1 g1 z)^(t0 βz)`
/// with `g = Δ(t)`.
pub fn whitehead_mul(cm: &CrossedModule, s: &FreeDerivation, t: &FreeDerivation) -> Result<FreeDerivation> {
    require_derivation(cm, s)?;
    let d = delta_of(cm, t)?;
    let (c, g) = (cm.c(), cm.g());
    let s0 = (0..g.num_objects()).map(|x| g.add(s.s0[d.f0[x]], t.s0[x]).expect("feet compose")).collect();
    let s1 = (0..g.num_arrows())
        .map(|z| {
            let moved = cm.act(s.s1[d.f1[z]], t.s0[g.tgt(z)]).expect("feet match");
            c.add(t.s1[z], moved).expect("same vertex group")
        })
        .collect();
    Ok(FreeDerivation { s0, s1 })
}

/// Evidence for or against invertibility of a derivation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoadmissibleCertificate {
    pub f0_bijective: bool,
    pub f1_bijective: bool,
    pub f2_bijective: bool,
    /// Inverse given by `s⁻¹0(x) = -s0(f0⁻¹x)`,
    /// `s⁻¹1(z) = (-s1(f1⁻¹z))^(s⁻¹0(βz))`, present only when it was
    /// verified to be a two-sided inverse.
    pub inverse: Option<FreeDerivation>,
}

impl CoadmissibleCertificate {
    pub fn coadmissible(&self) -> bool {
        self.f1_bijective
    }
}

fn invert(map: &[usize]) -> Vec<usize> {
    let mut inv = vec![usize::MAX; map.len()];
    for (i, &v) in map.iter().enumerate() {
        inv[v] = i;
    }
    inv
}

/// Decides coadmissibility (`f1` bijective) and reports the inverse when it
/// exists.
pub fn is_coadmissible(cm: &CrossedModule, s: &FreeDerivation) -> Result<CoadmissibleCertificate> {
    let d = delta_of(cm, s)?;
    let (c, g) = (cm.c(), cm.g());
    let f0_bijective = is_bijection(&d.f0, g.num_objects());
    let f1_bijective = is_bijection(&d.f1, g.num_arrows());
    let f2_bijective = is_bijection(&d.f2, c.num_arrows());
    let mut inverse = None;
    if f0_bijective && f1_bijective {
        let (i0, i1) = (invert(&d.f0), invert(&d.f1));
        let s0: Vec<usize> = (0..g.num_objects()).map(|x| g.neg(s.s0[i0[x]])).collect();
        let s1 = (0..g.num_arrows()).map(|z| cm.act(c.neg(s.s1[i1[z]]), s0[g.tgt(z)])).collect::<Option<Vec<usize>>>();
        if let Some(s1) = s1 {
            let candidate = FreeDerivation { s0, s1 };
            let unit = FreeDerivation::constant(cm);
            let ok = candidate.check(cm).is_empty()
                && whitehead_mul(cm, s, &candidate).ok().as_ref() == Some(&unit)
                && whitehead_mul(cm, &candidate, s).ok().as_ref() == Some(&unit);
            if ok {
                inverse = Some(candidate);
            }
        }
    }
    Ok(CoadmissibleCertificate { f0_bijective, f1_bijective, f2_bijective, inverse })
}

/// A globally defined section `σ` of `D(C)` over `G`: `σ0: X → G` and the
/// square `σ(a)` with bottom `a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LinearSection {
    pub s0: Vec<usize>,
    pub values: Vec<usize>,
}

impl LinearSection {
    pub fn square(&self, dg: &DoubleGroupoid, a: usize) -> Square {
        dg.square(self.values[a])
    }

    /// `α₁ σ`, the top edge of each value.
    pub fn f1(&self, dg: &DoubleGroupoid) -> Vec<usize> {
        self.values.iter().map(|&u| dg.square(u).top).collect()
    }

    /// `α σ0`.
    pub fn f0(&self, dg: &DoubleGroupoid) -> Vec<usize> {
        self.s0.iter().map(|&a| dg.edges().src(a)).collect()
    }

    /// Violations of the defining conditions of a linear coadmissible
    /// section.
    pub fn check(&self, dg: &DoubleGroupoid) -> Vec<Violation> {
        let g = dg.edges();
        let mut out = Vec::new();
        for x in 0..g.num_objects() {
            if g.tgt(self.s0[x]) != x {
                out.push(Violation::new("beta s0 = id", [g.object_name(x)]));
            }
        }
        for a in 0..g.num_arrows() {
            let s = self.square(dg, a);
            if s.bottom != a || s.left != self.s0[g.src(a)] || s.right != self.s0[g.tgt(a)] {
                out.push(Violation::new("section edges", [g.arrow_name(a)]));
            }
        }
        for (a, b, ab) in g.composition_entries() {
            if dg.compose2(self.values[a], self.values[b]) != Some(self.values[ab]) {
                out.push(Violation::new("linearity", [g.arrow_name(a), g.arrow_name(b)]));
            }
        }
        if !is_bijection(&self.f0(dg), g.num_objects()) {
            out.push(Violation::new("alpha s0 bijective", Vec::<String>::new()));
        }
        let f1 = crate::groupoid::GroupoidMorphism { objects: self.f0(dg), arrows: self.f1(dg) };
        if !f1.check(g, g).is_empty() || !is_bijection(&f1.arrows, g.num_arrows()) {
            out.push(Violation::new("alpha1 sigma automorphism", Vec::<String>::new()));
        }
        out
    }

    pub fn describe(&self, dg: &DoubleGroupoid) -> String {
        let g = dg.edges();
        let v: Vec<String> =
            (0..g.num_arrows()).map(|a| format!("{}->{}", g.arrow_name(a), dg.name(self.values[a]))).collect();
        format!("sigma[{}]", v.join(" "))
    }
}

/// `σ(a) = (s1(a); f1(a), s0(αa), s0(βa), a)` for a coadmissible `s`.
pub fn derivation_to_section(dg: &DoubleGroupoid, s: &FreeDerivation) -> Result<LinearSection> {
    let cm = dg.xmod();
    let cert = is_coadmissible(cm, s)?;
    if !cert.coadmissible() {
        return Err(Error::NotCoadmissible(format!(
            "f1 bijective: {}, f2 bijective: {}",
            cert.f1_bijective, cert.f2_bijective
        )));
    }
    let d = delta_of(cm, s)?;
    let g = cm.g();
    let values = (0..g.num_arrows())
        .map(|a| {
            let sq = Square { interior: s.s1[a], top: d.f1[a], left: s.s0[g.src(a)], right: s.s0[g.tgt(a)], bottom: a };
            dg.index_of(&sq).ok_or_else(|| Error::Structure(format!("square for `{}` is missing", g.arrow_name(a))))
        })
        .collect::<Result<_>>()?;
    Ok(LinearSection { s0: s.s0.clone(), values })
}

/// Reads the interiors of a section back as a derivation.
pub fn section_to_derivation(dg: &DoubleGroupoid, sigma: &LinearSection) -> FreeDerivation {
    FreeDerivation { s0: sigma.s0.clone(), s1: sigma.values.iter().map(|&u| dg.square(u).interior).collect() }
}

/// `(σ*τ)0(x) = σ0(α τ0 x) + τ0(x)`, `(σ*τ)(z) = σ(α₁ τ(z)) +₁ τ(z)`.
pub fn linsec_mul(dg: &DoubleGroupoid, sigma: &LinearSection, tau: &LinearSection) -> Result<LinearSection> {
    let g = dg.edges();
    let s0 = (0..g.num_objects())
        .map(|x| {
            g.add(sigma.s0[g.src(tau.s0[x])], tau.s0[x])
                .ok_or_else(|| Error::Structure("object parts do not compose".into()))
        })
        .collect::<Result<_>>()?;
    let values = (0..g.num_arrows())
        .map(|z| {
            let t = tau.values[z];
            dg.compose(crate::dgpd::Direction::Vertical, sigma.values[dg.square(t).top], t)
        })
        .collect::<Result<_>>()?;
    Ok(LinearSection { s0, values })
}

/// The section of the constant derivation: `σ(a) = ε₂`-type square on `a`
/// with identity sides.
pub fn unit_section(dg: &DoubleGroupoid) -> LinearSection {
    let g = dg.edges();
    LinearSection {
        s0: (0..g.num_objects()).map(|x| g.unit(x)).collect(),
        values: (0..g.num_arrows()).map(|a| dg.eps1(a)).collect(),
    }
}

/// `LinSec(D(C))` enumerated from the squares directly, independently of
/// derivations.
pub fn enumerate_linear_sections(dg: &DoubleGroupoid) -> Vec<LinearSection> {
    let g = dg.edges();
    let n = g.num_arrows();
    let mut out = Vec::new();
    for s0 in enumerate_s0(dg.xmod()) {
        let candidates: Vec<Vec<usize>> = (0..n)
            .map(|a| {
                (0..dg.len())
                    .filter(|&u| {
                        let s = dg.square(u);
                        s.bottom == a && s.left == s0[g.src(a)] && s.right == s0[g.tgt(a)]
                    })
                    .collect()
            })
            .collect();
        let mut values = vec![usize::MAX; n];
        fill(dg, &candidates, &mut values, 0, &mut |values| {
            let sigma = LinearSection { s0: s0.clone(), values: values.to_vec() };
            if sigma.check(dg).is_empty() {
                out.push(sigma);
            }
        });
    }
    out.sort();
    out
}

fn fill(
    dg: &DoubleGroupoid,
    candidates: &[Vec<usize>],
    values: &mut [usize],
    a: usize,
    emit: &mut dyn FnMut(&[usize]),
) {
    if a == values.len() {
        emit(values);
        return;
    }
    let g = dg.edges();
    for &u in &candidates[a] {
        values[a] = u;
        // linearity against arrows already fixed
        let consistent = (0..=a).all(|b| {
            let pairs = [(a, b), (b, a)];
            pairs.iter().all(|&(p, q)| match g.add(p, q) {
                Some(pq) if pq <= a => dg.compose2(values[p], values[q]) == Some(values[pq]),
                _ => true,
            })
        });
        if consistent {
            fill(dg, candidates, values, a + 1, emit);
        }
    }
    values[a] = usize::MAX;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{self, Topo};

    fn z2z2() -> (CrossedModule, DoubleGroupoid) {
        let cm = corpus::z2z2(Topo::Discrete);
        let dg = DoubleGroupoid::build(&cm).unwrap();
        (cm, dg)
    }

    #[test]
    fn z2z2_has_four_derivations_two_coadmissible() {
        let (cm, _) = z2z2();
        let all = enumerate_derivations(&cm);
        assert_eq!(all.len(), 4);
        let good = all.iter().filter(|s| is_coadmissible(&cm, s).unwrap().coadmissible()).count();
        assert_eq!(good, 2);
    }

    #[test]
    fn constant_derivation_induces_identity() {
        for item in corpus::standard(Topo::Discrete) {
            let cm = &item.xmod;
            let d = delta_of(cm, &FreeDerivation::constant(cm)).unwrap();
            assert_eq!(d, XModMorphism::identity(cm), "{}", item.name);
        }
    }

    #[test]
    fn identity_s1_on_z2z2_kills_f1() {
        let (cm, _) = z2z2();
        let s = FreeDerivation { s0: vec![0], s1: vec![0, 1] };
        assert_eq!(delta_of(&cm, &s).unwrap().f1, vec![0, 0]);
    }

    #[test]
    fn non_derivation_is_rejected_with_witness() {
        let (cm, _) = z2z2();
        // s1(0) must vanish
        let s = FreeDerivation { s0: vec![0], s1: vec![1, 1] };
        let err = delta_of(&cm, &s).unwrap_err();
        assert!(matches!(err, Error::NotADerivation(ref m) if m.contains("derivation law")), "{err}");
    }

    #[test]
    fn induced_endomorphisms_are_morphisms() {
        for item in corpus::standard(Topo::Discrete) {
            let cm = &item.xmod;
            for s in enumerate_derivations(cm) {
                let d = delta_of(cm, &s).unwrap();
                assert!(d.check(cm, cm).violations.is_empty(), "{} {}", item.name, s.describe(cm));
            }
        }
    }

    #[test]
    fn whitehead_product_monoid_laws() {
        for item in corpus::standard(Topo::Discrete) {
            let cm = &item.xmod;
            let all = enumerate_derivations(cm);
            let unit = FreeDerivation::constant(cm);
            for s in &all {
                assert_eq!(&whitehead_mul(cm, &unit, s).unwrap(), s);
                assert_eq!(&whitehead_mul(cm, s, &unit).unwrap(), s);
                for t in &all {
                    let st = whitehead_mul(cm, s, t).unwrap();
                    assert!(st.check(cm).is_empty());
                    let (ds, dt, dst) =
                        (delta_of(cm, s).unwrap(), delta_of(cm, t).unwrap(), delta_of(cm, &st).unwrap());
                    let composed: Vec<usize> = dt.f1.iter().map(|&a| ds.f1[a]).collect();
                    assert_eq!(dst.f1, composed);
                }
            }
            if all.len() <= 16 {
                for s in &all {
                    for t in &all {
                        for u in &all {
                            let l = whitehead_mul(cm, &whitehead_mul(cm, s, t).unwrap(), u).unwrap();
                            let r = whitehead_mul(cm, s, &whitehead_mul(cm, t, u).unwrap()).unwrap();
                            assert_eq!(l, r);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn inverse_formula_and_bijectivity_agree() {
        for item in corpus::standard(Topo::Discrete) {
            let cm = &item.xmod;
            for s in enumerate_derivations(cm) {
                let cert = is_coadmissible(cm, &s).unwrap();
                assert_eq!(cert.f1_bijective, cert.f2_bijective, "{}", item.name);
                assert_eq!(cert.f1_bijective, cert.inverse.is_some(), "{}", item.name);
                if let Some(inv) = cert.inverse {
                    let (d, di) = (delta_of(cm, &s).unwrap(), delta_of(cm, &inv).unwrap());
                    for a in 0..cm.g().num_arrows() {
                        assert_eq!(di.f1[d.f1[a]], a);
                    }
                }
            }
        }
    }

    #[test]
    fn sections_round_trip_and_multiply() {
        for item in corpus::standard(Topo::Discrete) {
            let cm = &item.xmod;
            let dg = DoubleGroupoid::build(cm).unwrap();
            let good: Vec<FreeDerivation> = enumerate_derivations(cm)
                .into_iter()
                .filter(|s| is_coadmissible(cm, s).unwrap().coadmissible())
                .collect();
            let mut images: Vec<LinearSection> = Vec::new();
            for s in &good {
                let sigma = derivation_to_section(&dg, s).unwrap();
                assert!(sigma.check(&dg).is_empty());
                assert_eq!(&section_to_derivation(&dg, &sigma), s);
                images.push(sigma);
            }
            assert_eq!(derivation_to_section(&dg, &FreeDerivation::constant(cm)).unwrap(), unit_section(&dg));
            images.sort();
            assert_eq!(images, enumerate_linear_sections(&dg), "{}", item.name);
            for s in &good {
                for t in &good {
                    let st = derivation_to_section(&dg, &whitehead_mul(cm, s, t).unwrap()).unwrap();
                    let prod = linsec_mul(
                        &dg,
                        &derivation_to_section(&dg, s).unwrap(),
                        &derivation_to_section(&dg, t).unwrap(),
                    )
                    .unwrap();
                    assert_eq!(st, prod);
                }
            }
        }
    }

    #[test]
    fn non_coadmissible_section_request_fails() {
        let (cm, dg) = z2z2();
        let s = FreeDerivation { s0: vec![0], s1: vec![0, 1] };
        assert!(matches!(derivation_to_section(&dg, &s), Err(Error::NotCoadmissible(_))));
        let _ = cm;
    }
}
