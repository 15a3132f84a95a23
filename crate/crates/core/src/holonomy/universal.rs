//! The universal morphism `μ′ : D(A) → Hol` lifting a morphism
//! `μ : D(A) → D(C)` of vertical square groupoids through `ψ`.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::fintop::{self, point_set, PartialMap, PointSet};
use crate::groupoid::{search_morphisms, GroupoidMorphism, MorphismSearch};
use crate::report::{Verdict, Violation};
use crate::xmod::{CrossedModule, XModMorphism};

use super::hol::HolonomyGroupoid;
use super::section::{enumerate_minimal, Frame, LocalSection};

#[derive(Clone, Copy, Debug)]
pub struct UniversalOptions {
    /// Longest factorisation `w = w_n +₁ … +₁ w_1` that is tried.
    pub word_bound: usize,
    /// Refuse when a hypothesis fails instead of reporting it.
    pub require_hypotheses: bool,
}

impl Default for UniversalOptions {
    fn default() -> Self {
        Self { word_bound: 8, require_hypotheses: true }
    }
}

#[derive(Clone, Debug)]
pub struct UniversalMorphism {
    /// `μ′(w)` per square of `D(A)`; `None` where no factorisation exists.
    pub mu_prime: Vec<Option<usize>>,
    pub hypotheses: Vec<Verdict>,
    pub verdicts: Vec<Verdict>,
    /// Number of morphisms satisfying both conditions, counted up to two.
    pub qualifying: usize,
}

/// The map on squares induced by a morphism of crossed modules.
pub fn induced_square_map(src: &Frame, tgt: &Frame, f: &XModMorphism) -> Result<GroupoidMorphism> {
    let arrows = src
        .dg()
        .squares()
        .iter()
        .map(|s| {
            let image = crate::dgpd::Square {
                interior: f.f2[s.interior],
                top: f.f1[s.top],
                left: f.f1[s.left],
                right: f.f1[s.right],
                bottom: f.f1[s.bottom],
            };
            tgt.dg().index_of(&image).ok_or_else(|| Error::Structure("image of a square is not a square".into()))
        })
        .collect::<Result<_>>()?;
    Ok(GroupoidMorphism { objects: f.f1.clone(), arrows })
}

/// `μθ`: the section of `D(C)` obtained by applying `μ` to edges and squares.
fn push_forward(mu: &GroupoidMorphism, theta: &LocalSection) -> LocalSection {
    LocalSection {
        s0: theta.s0.iter().map(|v| v.map(|b| mu.objects[b])).collect(),
        values: theta.values.iter().map(|v| v.map(|u| mu.arrows[u])).collect(),
    }
}

/// Builds `μ′` and checks `ψμ′ = μ`, `μ′ = iμ` on `μ⁻¹(W^G)`, independence
/// of choices, the morphism property, continuity and uniqueness.
pub fn universal_morphism(
    hol: &HolonomyGroupoid,
    cm_a: &CrossedModule,
    mu: &GroupoidMorphism,
    opts: UniversalOptions,
) -> Result<UniversalMorphism> {
    let fa = Frame::new(cm_a)?;
    let fc = hol.frame();
    let (da, dc) = (fa.dg(), fc.dg());
    let (ga, gc) = (cm_a.g(), fc.xmod().g());
    let an = |u: usize| da.name(u).to_string();
    let mut hypotheses = Vec::new();

    let objects_ok = mu.objects.len() == ga.num_arrows()
        && (0..ga.num_arrows()).all(|a| gc.arrow_name(mu.objects[a]) == ga.arrow_name(a))
        && ga.objects() == gc.objects();
    hypotheses.push(if objects_ok {
        Verdict::pass("(i) identity on objects")
    } else {
        Verdict::fail("(i) identity on objects", "edge groupoids differ")
    });
    if !objects_ok {
        return Err(Error::HypothesisFailed("(i) identity on objects".into()));
    }
    hypotheses.push(Verdict::from_violations("mu morphism", mu.check(da.vertical(), dc.vertical())));

    let wg = hol.wg();
    let pre: PointSet = point_set(da.len(), (0..da.len()).filter(|&u| wg.contains(mu.arrows[u])));
    let mut open = Vec::new();
    if let Some(p) = pre.ones().find(|&p| !fa.square_space().min_open(p).is_subset(&pre)) {
        open.push(Violation::new("not open at", [an(p)]));
    }
    hypotheses.push(Verdict::from_violations("(ii) mu^-1(W^G) open", open));
    let restricted =
        PartialMap::new((0..da.len()).map(|u| pre.contains(u).then(|| wg.position(mu.arrows[u]).unwrap())).collect());
    hypotheses.push(Verdict::from_violations(
        "(ii) mu continuous on mu^-1(W^G)",
        fintop::continuity_witness(&restricted, fa.square_space(), wg.topology())
            .map(|(p, q)| Violation::new("continuity", [an(p), an(q)]))
            .into_iter()
            .collect(),
    ));
    let generated = da.vertical().generated_subgroupoid(&pre);
    hypotheses.push(Verdict::from_violations(
        "(ii) mu^-1(W^G) generates",
        (0..da.len()).filter(|&u| !generated.contains(u)).map(|u| Violation::new("not generated", [an(u)])).collect(),
    ));

    let sections: Vec<LocalSection> = enumerate_minimal(&fa, Some(&pre));
    let mut gens: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    let mut lifted_bad = Vec::new();
    for theta in &sections {
        let pushed = push_forward(mu, theta);
        if !pushed.is_valid(fc) || !wg.admits(fc, &pushed) {
            lifted_bad.push(Violation::new("mu theta not a W^G section", [theta.describe(&fa)]));
            continue;
        }
        for a in theta.u1().ones() {
            let w = theta.value(a).unwrap();
            let class =
                hol.class_of(&pushed.germ_at(fc, a)?).ok_or_else(|| Error::Structure("germ outside J^r".into()))?;
            gens.entry(w).or_default().insert(class);
        }
    }
    let no_section: Vec<Violation> =
        pre.ones().filter(|u| !gens.contains_key(u)).map(|u| Violation::new("no section through", [an(u)])).collect();
    let found = pre.count_ones(..) - no_section.len();
    let mut enough = no_section;
    enough.extend(lifted_bad);
    hypotheses.push(
        Verdict::from_violations("(iii) enough sections", enough)
            .with_detail(format!("{found} of {} squares have a section", pre.count_ones(..))),
    );

    if opts.require_hypotheses {
        if let Some(bad) = hypotheses.iter().find(|v| !v.passed) {
            return Err(Error::HypothesisFailed(bad.id.clone()));
        }
    }

    let hg = hol.groupoid();
    let mut reach: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); da.len()];
    for a in 0..ga.num_arrows() {
        reach[da.eps1(a)].insert(hg.unit(mu.objects[a]));
    }
    let mut gen_list: Vec<(usize, usize)> = gens.iter().flat_map(|(&w, cs)| cs.iter().map(move |&c| (w, c))).collect();
    gen_list.sort();
    for _ in 0..opts.word_bound {
        let mut next = reach.clone();
        for (w_prev, classes) in reach.iter().enumerate() {
            for &h_prev in classes {
                for &(p, hp) in &gen_list {
                    let (Some(w), Some(h)) = (da.compose1(p, w_prev), hg.add(hp, h_prev)) else { continue };
                    next[w].insert(h);
                }
            }
        }
        if next == reach {
            break;
        }
        reach = next;
    }
    let mu_prime: Vec<Option<usize>> = reach.iter().map(|s| (s.len() == 1).then(|| *s.first().unwrap())).collect();
    let unreached: Vec<Violation> =
        (0..da.len()).filter(|&u| reach[u].is_empty()).map(|u| Violation::new("no factorisation", [an(u)])).collect();
    if opts.require_hypotheses && !unreached.is_empty() {
        return Err(Error::FactorisationBound(opts.word_bound));
    }
    let defined = da.len() - unreached.len();

    let psi = hol.psi();
    let mut verdicts = vec![
        Verdict::from_violations("mu' defined", unreached).with_detail(format!("{defined} of {} squares", da.len())),
        Verdict::from_violations(
            "mu' independent of choices",
            (0..da.len()).filter(|&u| reach[u].len() > 1).map(|u| Violation::new("several classes", [an(u)])).collect(),
        ),
        Verdict::from_violations(
            "psi mu' = mu",
            (0..da.len())
                .filter(|&u| mu_prime[u].is_some_and(|h| psi.arrows[h] != mu.arrows[u]))
                .map(|u| Violation::new("differs", [an(u)]))
                .collect(),
        ),
        Verdict::from_violations(
            "mu' = i mu on mu^-1(W^G)",
            pre.ones()
                .filter(|&u| mu_prime[u].is_some() && mu_prime[u] != hol.embed(mu.arrows[u]))
                .map(|u| Violation::new("differs", [an(u)]))
                .collect(),
        ),
    ];
    let sums: Vec<Violation> = da
        .vertical()
        .composition_entries()
        .filter_map(|(u, v, uv)| {
            let (hu, hv, huv) = (mu_prime[u]?, mu_prime[v]?, mu_prime[uv]?);
            (hg.add(hu, hv) != Some(huv)).then(|| Violation::new("sum not preserved", [an(u), an(v)]))
        })
        .collect();
    verdicts.push(Verdict::from_violations("mu' morphism", sums));
    verdicts.push(Verdict::from_violations(
        "mu' continuous",
        fintop::continuity_witness(&PartialMap::new(mu_prime.clone()), fa.square_space(), hol.topology())
            .map(|(p, q)| Violation::new("continuity", [an(p), an(q)]))
            .into_iter()
            .collect(),
    ));

    let allowed =
        |u: usize, h: usize| psi.arrows[h] == mu.arrows[u] && (!pre.contains(u) || hol.embed(mu.arrows[u]) == Some(h));
    let spec = MorphismSearch { objects: Some(&mu.objects), allowed: &allowed, injective: false };
    let mut qualifying = 0usize;
    let mut matches_mu_prime = false;
    search_morphisms(da.vertical(), hg, &spec, &mut |m| {
        qualifying += 1;
        matches_mu_prime |= m.arrows.iter().zip(&mu_prime).all(|(&h, p)| Some(h) == *p);
        qualifying >= 2
    });
    let detail = format!("{qualifying} qualifying morphism(s) found");
    verdicts.push(if qualifying == 1 && matches_mu_prime {
        Verdict::pass("uniqueness").with_detail(detail)
    } else {
        Verdict::fail("uniqueness", detail)
    });
    Ok(UniversalMorphism { mu_prime, hypotheses, verdicts, qualifying })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{self, Topo};
    use crate::holonomy::hol::{holonomy_groupoid, HolonomyOptions};
    use crate::holonomy::wg::WStructure;

    #[test]
    fn identity_instance_reports_every_gap() {
        let cm = corpus::z2z2(Topo::Discrete);
        let w = WStructure::whole(&cm).unwrap();
        let hol = holonomy_groupoid(&cm, &w, HolonomyOptions { require_axioms: false, ..Default::default() }).unwrap();
        let mu = GroupoidMorphism::identity(hol.frame().dg().vertical());
        assert!(matches!(
            universal_morphism(&hol, &cm, &mu, UniversalOptions::default()),
            Err(Error::HypothesisFailed(h)) if h == "(iii) enough sections"
        ));
        let um =
            universal_morphism(&hol, &cm, &mu, UniversalOptions { require_hypotheses: false, ..Default::default() })
                .unwrap();
        let v = |id: &str| um.verdicts.iter().find(|v| v.id == id).unwrap().clone();
        assert!(v("psi mu' = mu").passed);
        assert!(v("mu' = i mu on mu^-1(W^G)").passed);
        assert!(v("mu' morphism").passed);
        assert!(!v("mu' defined").passed);
        assert_eq!(um.mu_prime.iter().flatten().count(), 4);
        assert_eq!(um.qualifying, 0);
    }

    #[test]
    fn induced_map_of_identity_is_identity() {
        let cm = corpus::pairz2(Topo::Discrete);
        let fr = Frame::new(&cm).unwrap();
        let m = induced_square_map(&fr, &fr, &XModMorphism::identity(&cm)).unwrap();
        assert_eq!(m, GroupoidMorphism::identity(fr.dg().vertical()));
    }
}
