//! Axiom suites for a chosen `W`: S1 to S5 on `W^G` with their three
//! deductions, C1 to C5 on `(C, W)`, enough sections, and the comparison
//! of the two generation conditions.

use rand::{seq::SliceRandom, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::fintop::{self, FiniteTopSpace, PartialMap};
use crate::report::{Verdict, Violation};

use super::section::{enumerate_minimal, Frame, LocalSection};
use super::wg::{WGSquares, WStructure};

/// Triples beyond this count are sampled in the triple-restriction check.
const TRIPLE_BUDGET: usize = 100_000;

/// The bounded section sets every construction draws from: all sections
/// on minimal domains, and those among them valued in `W^G`.
#[derive(Clone, Debug)]
pub struct SectionCatalogue {
    pub all: Vec<LocalSection>,
    pub wg: Vec<LocalSection>,
}

impl SectionCatalogue {
    pub fn new(fr: &Frame, wg: &WGSquares) -> Self {
        let all = enumerate_minimal(fr, None);
        let wg_sections = all.iter().filter(|s| wg.admits(fr, s)).cloned().collect();
        Self { all, wg: wg_sections }
    }

    /// Indices into `wg` of the sections through the square `w`.
    pub fn through(&self, fr: &Frame, w: usize) -> Vec<usize> {
        let a = fr.sq(w).bottom;
        (0..self.wg.len()).filter(|&i| self.wg[i].value(a) == Some(w)).collect()
    }
}

/// For each square of `W^G`, a section of the catalogue through it.
#[derive(Clone, Debug, Serialize)]
pub struct EnoughSections {
    pub verdict: Verdict,
    #[serde(skip)]
    pub through: Vec<Option<usize>>,
}

/// Searches the `W^G`-valued sections on the minimal domain of `β₁ w` for
/// one through each `w`; squares with none are the witnesses.
pub fn has_enough_sections(fr: &Frame, wg: &WGSquares, cat: &SectionCatalogue, id: &str) -> EnoughSections {
    let through: Vec<Option<usize>> = wg.squares().iter().map(|&w| cat.through(fr, w).first().copied()).collect();
    let missing: Vec<Violation> = wg
        .squares()
        .iter()
        .zip(&through)
        .filter(|(_, t)| t.is_none())
        .map(|(&w, _)| Violation::new("no section through", [fr.dg().name(w)]))
        .collect();
    let total = wg.len();
    let found = total - missing.len();
    let verdict =
        Verdict::from_violations(id, missing).with_detail(format!("{found} of {total} squares have a section"));
    EnoughSections { verdict, through }
}

/// Pairs of `W^G` with a common bottom edge, with their subspace topology.
fn same_bottom_pairs(fr: &Frame, wg: &WGSquares) -> (Vec<(usize, usize)>, FiniteTopSpace) {
    pairs_where(fr, wg, |u, v| fr.sq(u).bottom == fr.sq(v).bottom)
}

/// Pairs of `W^G` composable under `+₁`.
fn composable_pairs(fr: &Frame, wg: &WGSquares) -> (Vec<(usize, usize)>, FiniteTopSpace) {
    pairs_where(fr, wg, |u, v| fr.sq(u).bottom == fr.sq(v).top)
}

fn pairs_where(
    fr: &Frame,
    wg: &WGSquares,
    keep: impl Fn(usize, usize) -> bool,
) -> (Vec<(usize, usize)>, FiniteTopSpace) {
    let sq = wg.squares();
    let pairs: Vec<(usize, usize)> =
        sq.iter().flat_map(|&u| sq.iter().map(move |&v| (u, v))).filter(|&(u, v)| keep(u, v)).collect();
    let t = wg.topology();
    let space = FiniteTopSpace::product_subspace(
        pairs.iter().map(|&(u, v)| format!("({},{})", fr.dg().name(u), fr.dg().name(v))).collect(),
        &pairs.iter().map(|&(u, v)| vec![wg.position(u).unwrap(), wg.position(v).unwrap()]).collect::<Vec<_>>(),
        &[t, t],
    );
    (pairs, space)
}

/// Openness of the pairs sent into `W^G` by `op`, and continuity of `op`
/// there.
fn open_and_continuous(
    wg: &WGSquares,
    pairs: &[(usize, usize)],
    space: &FiniteTopSpace,
    op: impl Fn(usize, usize) -> Option<usize>,
    rule: &str,
) -> Vec<Violation> {
    let map = PartialMap::new(pairs.iter().map(|&(u, v)| op(u, v).and_then(|r| wg.position(r))).collect());
    open_and_continuous_map(&map, space, wg.topology(), rule)
}

/// Verdicts for S1 to S5 and the three deductions.
pub fn check_v_locally_lie(fr: &Frame, wg: &WGSquares, cat: &SectionCatalogue, seed: u64) -> Vec<Verdict> {
    let dg = fr.dg();
    let g = fr.xmod().g();
    let n = |u: usize| dg.name(u).to_string();
    let mut out = Vec::new();

    let s1: Vec<Violation> = wg
        .squares()
        .iter()
        .filter(|&&w| !wg.contains(dg.neg1(w)))
        .map(|&w| Violation::new("-1 w outside W^G", [n(w)]))
        .collect();
    out.push(Verdict::from_violations("S1", s1));

    let s2: Vec<Violation> = (0..g.num_arrows())
        .filter(|&a| !wg.contains(dg.eps1(a)))
        .map(|a| Violation::new("identity square outside W^G", [g.arrow_name(a), g.object_name(g.tgt(a))]))
        .collect();
    out.push(Verdict::from_violations("S2", s2));

    let (pairs, space) = same_bottom_pairs(fr, wg);
    let s3 = open_and_continuous(wg, &pairs, &space, |u, v| dg.compose1(u, dg.neg1(v)), "difference");
    out.push(Verdict::from_violations("S3", s3));

    let mut s4 = Vec::new();
    for (rule, edge) in [("alpha1 continuous", true), ("beta1 continuous", false)] {
        let map = PartialMap::new(
            wg.squares().iter().map(|&w| Some(if edge { fr.sq(w).top } else { fr.sq(w).bottom })).collect(),
        );
        if let Some((p, q)) = fintop::continuity_witness(&map, wg.topology(), fr.edge_space()) {
            s4.push(Violation::new(rule, [wg.topology().name(p), wg.topology().name(q)]));
        }
    }
    let enough = has_enough_sections(fr, wg, cat, "S4");
    s4.extend(enough.verdict.witnesses.iter().cloned());
    out.push(Verdict::from_violations("S4", s4).with_detail(enough.verdict.detail));

    let generated = dg.vertical().generated_subgroupoid(wg.members());
    let s5: Vec<Violation> = (0..dg.len())
        .filter(|&u| !generated.contains(u))
        .map(|u| Violation::new("not generated under +1", [n(u)]))
        .collect();
    out.push(Verdict::from_violations("S5", s5));

    let inv = PartialMap::new(wg.squares().iter().map(|&w| wg.position(dg.neg1(w))).collect());
    let mut d1 = Vec::new();
    if let Some((p, q)) = fintop::continuity_witness(&inv, wg.topology(), wg.topology()) {
        d1.push(Violation::new("-1 continuous on W^G", [wg.topology().name(p), wg.topology().name(q)]));
    }
    out.push(Verdict::from_violations("deduction 1", d1));

    let (pairs, space) = composable_pairs(fr, wg);
    let d2 = open_and_continuous(wg, &pairs, &space, |u, v| dg.compose1(u, v), "product");
    out.push(Verdict::from_violations("deduction 2", d2));

    out.push(triple_restriction(fr, wg, cat, seed));
    out
}

/// For `k, s, t` valued in `W^G` and `a` in the domain of `k*s*t` with
/// `(k*s)(f1t a)` and `(k*s*t)(a)` in `W^G`: the product restricted near
/// `a` is again a `W^G`-valued section.
fn triple_restriction(fr: &Frame, wg: &WGSquares, cat: &SectionCatalogue, seed: u64) -> Verdict {
    let n = cat.wg.len();
    let mut triples: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k)))).collect();
    let sampled = triples.len() > TRIPLE_BUDGET;
    if sampled {
        triples.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        triples.truncate(TRIPLE_BUDGET);
    }
    let mut out = Vec::new();
    let count = triples.len();
    for (i, j, l) in triples {
        let (k, s, t) = (&cat.wg[i], &cat.wg[j], &cat.wg[l]);
        let ks = k.mul(fr, s);
        let kst = ks.mul(fr, t);
        for a in kst.u1().ones() {
            let b = t.square(fr, a).unwrap().top;
            let hyp = ks.value(b).is_some_and(|u| wg.contains(u)) && kst.value(a).is_some_and(|u| wg.contains(u));
            if hyp && !wg.admits(fr, &kst.restrict_near(fr, a)) {
                out.push(Violation::new("restriction not W^G-valued", [i.to_string(), j.to_string(), l.to_string()]));
            }
        }
        if out.len() >= 8 {
            break;
        }
    }
    let how = if sampled { "sampled" } else { "all" };
    Verdict::from_violations("deduction 3", out).with_detail(format!("{how} {count} triples"))
}

/// Verdicts for C1 to C5, equivariance of `W`, and the cross-check that
/// C3 and C4 together agree with the difference map verdict of S3.
pub fn check_locally_lie_xmod(fr: &Frame, w: &WStructure, wg: &WGSquares, cat: &SectionCatalogue) -> Vec<Verdict> {
    let cm = fr.xmod();
    let (c, g) = (cm.c(), cm.g());
    let wt = w.topology();
    let cn = |k: usize| c.arrow_name(k).to_string();
    let mut out = Vec::new();

    let mut c1 = Vec::new();
    let generated = c.generated_subgroupoid(w.members());
    for k in (0..c.num_arrows()).filter(|&k| !generated.contains(k)) {
        c1.push(Violation::new("W does not generate", [cn(k)]));
    }
    for k in w.members().ones().filter(|&k| !w.contains(c.neg(k))) {
        c1.push(Violation::new("-W differs from W", [cn(k)]));
    }
    let members: Vec<usize> = w.members().ones().collect();
    let pairs: Vec<(usize, usize)> = members
        .iter()
        .flat_map(|&u| members.iter().map(move |&v| (u, v)))
        .filter(|&(u, v)| c.tgt(u) == c.tgt(v))
        .collect();
    let space = FiniteTopSpace::product_subspace(
        pairs.iter().map(|&(u, v)| format!("({},{})", cn(u), cn(v))).collect(),
        &pairs.iter().map(|&(u, v)| vec![w.position(u).unwrap(), w.position(v).unwrap()]).collect::<Vec<_>>(),
        &[wt, wt],
    );
    let diff = PartialMap::new(pairs.iter().map(|&(u, v)| c.sub(u, v).and_then(|r| w.position(r))).collect());
    c1.extend(open_and_continuous_map(&diff, &space, wt, "difference"));
    out.push(Verdict::from_violations("C1", c1));

    let c2: Vec<Violation> = (0..c.num_objects())
        .filter(|&x| !w.contains(c.unit(x)))
        .map(|x| Violation::new("identity outside W", [c.object_name(x)]))
        .collect();
    out.push(Verdict::from_violations("C2", c2));

    let delta = PartialMap::new(members.iter().map(|&k| Some(cm.delta(k))).collect());
    let c3: Vec<Violation> = fintop::continuity_witness(&delta, wt, fr.edge_space())
        .map(|(p, q)| Violation::new("delta continuous on W", [wt.name(p), wt.name(q)]))
        .into_iter()
        .collect();
    let c3_ok = c3.is_empty();
    out.push(Verdict::from_violations("C3", c3));

    let acts: Vec<(usize, usize)> =
        members.iter().flat_map(|&k| g.outgoing(c.tgt(k)).iter().map(move |&a| (k, a))).collect();
    let space = FiniteTopSpace::product_subspace(
        acts.iter().map(|&(k, a)| format!("({},{})", cn(k), g.arrow_name(a))).collect(),
        &acts.iter().map(|&(k, a)| vec![w.position(k).unwrap(), a]).collect::<Vec<_>>(),
        &[wt, fr.edge_space()],
    );
    let action = PartialMap::new(acts.iter().map(|&(k, a)| cm.act(k, a).and_then(|r| w.position(r))).collect());
    let c4 = open_and_continuous_map(&action, &space, wt, "action");
    let c4_ok = c4.is_empty();
    out.push(Verdict::from_violations("C4", c4));

    let mut c5 = has_enough_sections(fr, wg, cat, "C5").verdict;
    c5.witnesses.iter_mut().for_each(|v| v.rule = "no homotopy through".into());
    out.push(c5);

    let eq: Vec<Violation> = cm
        .equivariance_witness(w.members())
        .map(|(k, a)| Violation::new("c^a outside W", [cn(k), g.arrow_name(a).to_string()]))
        .into_iter()
        .collect();
    out.push(Verdict::from_violations("W equivariant", eq));

    let (pairs, space) = same_bottom_pairs(fr, wg);
    let d_ok =
        open_and_continuous(wg, &pairs, &space, |u, v| fr.dg().compose1(u, fr.dg().neg1(v)), "difference").is_empty();
    let agree = (c3_ok && c4_ok) == d_ok;
    let detail = format!("C3 and C4: {}, difference map: {}", c3_ok && c4_ok, d_ok);
    out.push(if agree {
        Verdict::pass("C3 and C4 iff d continuous").with_detail(detail)
    } else {
        Verdict::fail("C3 and C4 iff d continuous", detail)
    });
    out
}

fn open_and_continuous_map(
    map: &PartialMap,
    space: &FiniteTopSpace,
    tgt: &FiniteTopSpace,
    rule: &str,
) -> Vec<Violation> {
    let dom = map.domain();
    let mut out = Vec::new();
    if let Some(p) = dom.ones().find(|&p| !space.min_open(p).is_subset(&dom)) {
        out.push(Violation::new(format!("{rule} set open"), [space.name(p)]));
    }
    if let Some((p, q)) = fintop::continuity_witness(map, space, tgt) {
        out.push(Violation::new(format!("{rule} continuous"), [space.name(p), space.name(q)]));
    }
    out
}

/// Both sides of the generation comparison for one `(C, W)` pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Generation {
    pub w_generates_c: bool,
    pub w_equivariant: bool,
    pub wg_generates_d: bool,
    /// Whether the closure of `W` under the action generates `C`.
    pub orbit_generates_c: bool,
}

impl Generation {
    pub fn verdict(&self) -> Verdict {
        let left = self.w_generates_c && self.w_equivariant;
        let detail = format!(
            "W generates C: {}, W equivariant: {}, W^G generates D(C): {}",
            self.w_generates_c, self.w_equivariant, self.wg_generates_d
        );
        if left == self.wg_generates_d {
            Verdict::pass("generation equivalence").with_detail(detail)
        } else {
            Verdict::fail("generation equivalence", detail)
        }
    }
}

pub fn generation(fr: &Frame, w: &WStructure, wg: &WGSquares) -> Generation {
    let cm = fr.xmod();
    let c = cm.c();
    let full = |set: &fixedbitset::FixedBitSet| set.count_ones(..) == set.len();
    let mut orbit = w.members().clone();
    for k in w.members().ones() {
        for &a in cm.g().outgoing(c.tgt(k)) {
            orbit.insert(cm.act(k, a).expect("action defined"));
        }
    }
    Generation {
        w_generates_c: full(&c.generated_subgroupoid(w.members())),
        w_equivariant: cm.is_equivariant(w.members()),
        wg_generates_d: full(&fr.dg().vertical().generated_subgroupoid(wg.members())),
        orbit_generates_c: full(&c.generated_subgroupoid(&orbit)),
    }
}
