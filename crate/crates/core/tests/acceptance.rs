//! Acceptance suite: one PASS/FAIL line per criterion, followed by indented
//! detail lines. Exits non-zero only when a criterion outside `KNOWN_RED`
//! fails; the known red criteria are unattainable on the corpus and are
//! reported as failures without being hidden.

use std::collections::{BTreeSet, HashSet};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use xmodhol_core::corpus::{self, CorpusItem, Topo};
use xmodhol_core::dgpd::DoubleGroupoid;
use xmodhol_core::groupoid::{Groupoid, GroupoidMorphism};
use xmodhol_core::holonomy::{
    build_wg, enumerate_minimal, generation, holonomy_groupoid, universal_morphism, Frame, HolonomyOptions,
    LocalSection, UniversalOptions, WStructure,
};
use xmodhol_core::homotopy::{
    delta_of, derivation_to_section, enumerate_derivations, enumerate_linear_sections, linsec_mul,
    section_to_derivation, unit_section, whitehead_mul, FreeDerivation,
};
use xmodhol_core::xmod::{find_isomorphism, CrossedModule};
use xmodhol_core::{Error, Verdict};

const KNOWN_RED: [usize; 2] = [7, 9];

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { passed: true, notes: Vec::new() }
    }

    fn require(&mut self, ok: bool, note: impl Into<String>) {
        if !ok {
            self.passed = false;
            self.notes.push(format!("violated: {}", note.into()));
        }
    }

    fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    fn timed(&mut self, label: &str, elapsed: Duration, bound: Duration) {
        self.require(elapsed < bound, format!("{label} took {elapsed:?}, bound {bound:?}"));
    }
}

fn whole_w_items() -> Vec<CorpusItem> {
    corpus::with_whole_w()
}

fn w_structure(item: &CorpusItem) -> WStructure {
    WStructure::new(&item.xmod, &item.w, Some(item.w_topology.clone())).expect("corpus W")
}

fn failed_ids(verdicts: &[Verdict]) -> Vec<String> {
    verdicts.iter().filter(|v| !v.passed).map(|v| v.id.clone()).collect()
}

fn distinct(map: &[usize]) -> bool {
    map.iter().collect::<HashSet<_>>().len() == map.len()
}

/// Subgroupoid closure by saturation under `+` and `-`.
fn closure_size(g: &Groupoid, seed: impl IntoIterator<Item = usize>) -> usize {
    let mut set: BTreeSet<usize> = seed.into_iter().collect();
    set.extend((0..g.num_objects()).map(|x| g.unit(x)));
    loop {
        let before = set.len();
        let now: Vec<usize> = set.iter().copied().collect();
        for &a in &now {
            set.insert(g.neg(a));
            for &b in &now {
                if let Some(r) = g.add(a, b) {
                    set.insert(r);
                }
            }
        }
        if set.len() == before {
            return set.len();
        }
    }
}

/// Squares `(w; d, b, c, a)` by brute force over `C × G⁴`, optionally with
/// the interior restricted.
fn brute_force_squares(cm: &CrossedModule, interior_ok: impl Fn(usize) -> bool) -> usize {
    let (c, g) = (cm.c(), cm.g());
    let mut n = 0;
    for w in (0..c.num_arrows()).filter(|&w| interior_ok(w)) {
        for d in 0..g.num_arrows() {
            for b in 0..g.num_arrows() {
                for cr in 0..g.num_arrows() {
                    for a in 0..g.num_arrows() {
                        let feet = g.src(b) == g.src(d)
                            && g.tgt(b) == g.src(a)
                            && g.tgt(a) == g.tgt(cr)
                            && g.src(cr) == g.tgt(d)
                            && c.src(w) == g.tgt(a);
                        if !feet {
                            continue;
                        }
                        let lhs = g.add(d, cr);
                        let rhs = g.add(b, a).and_then(|ba| g.add(ba, cm.delta(w)));
                        if lhs.is_some() && lhs == rhs {
                            n += 1;
                        }
                    }
                }
            }
        }
    }
    n
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let bound = Duration::from_secs(1);
    for item in whole_w_items() {
        let t = Instant::now();
        let v = item.xmod.check();
        o.timed(&item.name, t.elapsed(), bound);
        o.require(v.is_empty(), format!("{}: {:?}", item.name, v.first()));
    }
    let broken: [(&str, CrossedModule, &str, Option<[&str; 2]>); 3] = [
        ("broken CM2", corpus::broken_cm2(), "CM2", Some(["0", "1"])),
        ("broken CM1", corpus::broken_cm1(), "CM1", Some(["1", "1"])),
        ("broken action", corpus::broken_action(), "action composition", None),
    ];
    for (label, cm, rule, witness) in broken {
        let t = Instant::now();
        let v = cm.check();
        o.timed(label, t.elapsed(), bound);
        let hit = v.iter().find(|x| x.rule == rule && witness.is_none_or(|w| x.witness == w));
        o.require(hit.is_some(), format!("{label} lacks the {rule} witness: {v:?}"));
        if let Some(h) = hit {
            o.note(format!("{label}: {h}"));
        }
    }
    o.note(format!("{} corpus crossed modules pass every axiom", whole_w_items().len()));
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    for item in whole_w_items() {
        let t = Instant::now();
        let dg = DoubleGroupoid::build(&item.xmod).expect("double groupoid");
        let laws = dg.check();
        o.require(laws.is_empty(), format!("{}: {:?}", item.name, laws.first()));
        let gamma = dg.gamma().expect("gamma");
        match find_isomorphism(&gamma, &item.xmod) {
            Some(iso) => {
                let r = iso.check(&gamma, &item.xmod);
                o.require(
                    r.violations.is_empty() && r.is_isomorphism,
                    format!("{}: isomorphism fails re-check", item.name),
                );
            }
            None => o.require(false, format!("{}: no isomorphism gamma(D(C)) -> C", item.name)),
        }
        o.timed(&item.name, t.elapsed(), Duration::from_secs(5));
    }
    o.note("interchange, transport law and the round trip hold on every item");
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    let z = corpus::z2z2(Topo::Discrete);
    let dg = DoubleGroupoid::build(&z).expect("double groupoid");
    let brute = brute_force_squares(&z, |_| true);
    o.require(dg.len() == 16 && brute == 16, format!("|D(Z2Z2)| = {}, brute force {brute}", dg.len()));
    o.note(format!("|D(Z2Z2)| = {} (brute force {brute})", dg.len()));

    let item = corpus::z4int_w013(Topo::Discrete);
    let fr = Frame::new(&item.xmod).expect("frame");
    let w = w_structure(&item);
    let wg = build_wg(&fr, &w).expect("W^G");
    let brute = brute_force_squares(&item.xmod, |k| item.w.iter().any(|n| n == item.xmod.c().arrow_name(k)));
    o.require(wg.len() == 24 && brute == 24, format!("|W^G| = {}, brute force {brute}", wg.len()));
    o.note(format!("|W^G| for Z4INT, W = {{0, 1, 3}}: {} (brute force {brute})", wg.len()));

    for item in whole_w_items() {
        let dg = DoubleGroupoid::build(&item.xmod).expect("double groupoid");
        let brute = brute_force_squares(&item.xmod, |_| true);
        o.require(dg.len() == brute, format!("{}: {} squares, brute force {brute}", item.name, dg.len()));
    }
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    for item in whole_w_items() {
        let cm = &item.xmod;
        let all = enumerate_derivations(cm);
        let unit = FreeDerivation::constant(cm);
        let mut qualifying = 0;
        for s in &all {
            let invertible = all.iter().any(|t| {
                whitehead_mul(cm, s, t).ok().as_ref() == Some(&unit)
                    && whitehead_mul(cm, t, s).ok().as_ref() == Some(&unit)
            });
            let d = delta_of(cm, s).expect("delta of a derivation");
            let f1 = distinct(&d.f1) && d.f1.len() == cm.g().num_arrows();
            let f2 = distinct(&d.f2) && d.f2.len() == cm.c().num_arrows();
            o.require(
                invertible == f1 && f1 == f2,
                format!("{}: {} invertible {invertible}, f1 {f1}, f2 {f2}", item.name, s.describe(cm)),
            );
            qualifying += usize::from(invertible);
        }
        if item.name.starts_with("Z2Z2") {
            o.require(all.len() == 4 && qualifying == 2, format!("{}: {qualifying} of {}", item.name, all.len()));
        }
        o.note(format!("{}: {qualifying} of {} derivations invertible", item.name, all.len()));
    }
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    for item in whole_w_items() {
        let cm = &item.xmod;
        let dg = DoubleGroupoid::build(cm).expect("double groupoid");
        let unit = FreeDerivation::constant(cm);
        let invertible: Vec<FreeDerivation> = enumerate_derivations(cm)
            .into_iter()
            .filter(|s| delta_of(cm, s).map(|d| distinct(&d.f1)).unwrap_or(false))
            .collect();
        let image: Vec<_> = invertible.iter().map(|s| derivation_to_section(&dg, s).expect("section")).collect();
        let target: HashSet<_> = enumerate_linear_sections(&dg).into_iter().collect();
        let image_set: HashSet<_> = image.iter().cloned().collect();
        o.require(image_set.len() == image.len(), format!("{}: map not injective", item.name));
        o.require(
            image_set == target,
            format!("{}: image {} vs {} linear sections", item.name, image_set.len(), target.len()),
        );
        o.require(
            derivation_to_section(&dg, &unit).ok() == Some(unit_section(&dg)),
            format!("{}: unit not preserved", item.name),
        );
        for (s, sigma) in invertible.iter().zip(&image) {
            o.require(sigma.check(&dg).is_empty(), format!("{}: image fails the section laws", item.name));
            o.require(&section_to_derivation(&dg, sigma) == s, format!("{}: round trip", item.name));
        }
        for (i, s) in invertible.iter().enumerate() {
            for (j, t) in invertible.iter().enumerate() {
                let st = whitehead_mul(cm, s, t).expect("product");
                let lhs = derivation_to_section(&dg, &st).ok();
                let rhs = linsec_mul(&dg, &image[i], &image[j]).ok();
                o.require(lhs.is_some() && lhs == rhs, format!("{}: product of #{i} and #{j}", item.name));
            }
        }
        o.note(format!("{}: group of order {}", item.name, image.len()));
    }
    o
}

/// Germ equivalence by definition: some open `V ∋ a` inside both domains
/// on which the sections agree, searching every subset of the arrows.
fn agree_on_some_open(fr: &Frame, s: &LocalSection, t: &LocalSection, a: usize) -> bool {
    let space = fr.edge_space();
    let n = space.len();
    (0u64..1 << n).any(|mask| {
        let members: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let set = xmodhol_core::fintop::point_set(n, members.iter().copied());
        set.contains(a)
            && space.is_open(&set)
            && members.iter().all(|&z| s.value(z).is_some() && t.value(z).is_some() && s.value(z) == t.value(z))
    })
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for item in whole_w_items() {
        let fr = Frame::new(&item.xmod).expect("frame");
        let all = enumerate_minimal(&fr, None);
        let inv: Vec<LocalSection> = all.iter().map(|x| x.inverse(&fr)).collect();
        for (x, xi) in all.iter().zip(&inv) {
            o.require(&x.mul(&fr, xi).mul(&fr, x) == x, format!("{}: x x^-1 x = x", item.name));
            o.require(&xi.mul(&fr, x).mul(&fr, xi) == xi, format!("{}: x^-1 x x^-1 = x^-1", item.name));
            o.require(&xi.inverse(&fr) == x, format!("{}: (x^-1)^-1 = x", item.name));
        }
        let mut idem: Vec<LocalSection> = all.iter().zip(&inv).map(|(x, xi)| x.mul(&fr, xi)).collect();
        idem.sort();
        idem.dedup();
        for e in &idem {
            o.require(&e.mul(&fr, e) == e, format!("{}: x x^-1 idempotent", item.name));
            for f in &idem {
                o.require(e.mul(&fr, f) == f.mul(&fr, e), format!("{}: idempotents commute", item.name));
            }
        }

        let mut triples: Vec<(usize, usize, usize)> = Vec::new();
        for (i, s) in all.iter().enumerate() {
            for (j, t) in all.iter().enumerate() {
                for a in s.u1().ones().filter(|&a| t.value(a).is_some()) {
                    triples.push((i, j, a));
                }
            }
        }
        let total = triples.len();
        triples.shuffle(&mut rng);
        triples.truncate(2000);
        let mut agree = 0;
        for &(i, j, a) in &triples {
            let via_min = all[i].germ_at(&fr, a).ok() == all[j].germ_at(&fr, a).ok();
            agree += usize::from(via_min == agree_on_some_open(&fr, &all[i], &all[j], a));
        }
        o.require(
            agree == triples.len(),
            format!("{}: {agree} of {} germ comparisons agree", item.name, triples.len()),
        );
        o.note(format!(
            "{}: {} sections, {} idempotents, germ oracle {agree}/{} sampled of {total}",
            item.name,
            all.len(),
            idem.len(),
            triples.len()
        ));
    }
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let mut qualifying = 0;
    for item in whole_w_items() {
        let w = w_structure(&item);
        let t = Instant::now();
        let checked = holonomy_groupoid(&item.xmod, &w, HolonomyOptions::default());
        match checked {
            Ok(hol) => {
                qualifying += 1;
                let props = hol.properties();
                o.require(failed_ids(&props).is_empty(), format!("{}: {:?}", item.name, failed_ids(&props)));
            }
            Err(Error::AxiomFailed(msg)) => {
                let diag =
                    holonomy_groupoid(&item.xmod, &w, HolonomyOptions { require_axioms: false, ..Default::default() })
                        .expect("diagnostic run");
                let props = diag.properties();
                o.note(format!(
                    "{}: refused ({msg}); diagnostic Hol has {} arrows for {} squares, failing: {:?}",
                    item.name,
                    diag.groupoid().num_arrows(),
                    diag.frame().dg().len(),
                    failed_ids(&props)
                ));
            }
            Err(e) => o.require(false, format!("{}: {e}", item.name)),
        }
        o.timed(&item.name, t.elapsed(), Duration::from_secs(30));
    }
    o.require(
        qualifying > 0,
        "no corpus item with W = C satisfies S1 to S5, so psi cannot be shown an isomorphism on any of them",
    );
    o.note(format!("{qualifying} items qualify"));
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    let mut checked = 0;
    for item in whole_w_items().into_iter().filter(|i| !i.xmod.g().arrow_space().is_discrete()) {
        let w = w_structure(&item);
        let hol = holonomy_groupoid(&item.xmod, &w, HolonomyOptions { require_axioms: false, ..Default::default() })
            .expect("diagnostic run");
        let v = hol.chart_coherence();
        for id in ["chart injective", "chart transition"] {
            let verdict = v.iter().find(|x| x.id == id).expect("coherence verdict");
            o.require(verdict.passed, format!("{}: {verdict}", item.name));
        }
        let open = v.iter().find(|x| x.id == "chart transition open").is_some_and(|x| x.passed);
        o.note(format!(
            "{}: {} chart sections; transitions are partial homeomorphisms of W^G: {open}",
            item.name,
            hol.charts().len()
        ));
        checked += 1;
    }
    o.require(checked > 0, "no non-discrete item");
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new();
    let t = Instant::now();
    let item = &corpus::standard(Topo::Discrete)[0];
    let w = w_structure(item);
    let hol = holonomy_groupoid(&item.xmod, &w, HolonomyOptions { require_axioms: false, ..Default::default() })
        .expect("diagnostic run");
    let dg = hol.frame().dg();
    let mu = GroupoidMorphism { objects: (0..dg.edges().num_arrows()).collect(), arrows: (0..dg.len()).collect() };
    match universal_morphism(&hol, &item.xmod, &mu, UniversalOptions::default()) {
        Ok(u) => {
            o.require(failed_ids(&u.verdicts).is_empty(), format!("{:?}", failed_ids(&u.verdicts)));
        }
        Err(e) => {
            o.require(false, format!("{}: {e}", item.name));
            let u = universal_morphism(
                &hol,
                &item.xmod,
                &mu,
                UniversalOptions { require_hypotheses: false, ..Default::default() },
            )
            .expect("diagnostic universal run");
            let defined = u.mu_prime.iter().filter(|m| m.is_some()).count();
            o.note(format!(
                "diagnostic: mu' defined on {defined} of {} squares, {} qualifying morphisms, failing: {:?}",
                mu.arrows.len(),
                u.qualifying,
                failed_ids(&u.verdicts)
            ));
        }
    }
    o.timed(&item.name, t.elapsed(), Duration::from_secs(60));
    o
}

fn criterion_10() -> Outcome {
    let mut o = Outcome::new();
    let mut non_generating = 0;
    for item in corpus::all_items() {
        let fr = Frame::new(&item.xmod).expect("frame");
        let w = w_structure(&item);
        let wg = build_wg(&fr, &w).expect("W^G");
        let gen = generation(&fr, &w, &wg);
        let c = item.xmod.c();
        let w_gen = closure_size(c, w.members().ones()) == c.num_arrows();
        let wg_gen = closure_size(fr.dg().vertical(), wg.members().ones()) == fr.dg().len();
        o.require(
            w_gen == gen.w_generates_c && wg_gen == gen.wg_generates_d,
            format!("{}: generation disagrees with the closure oracle", item.name),
        );
        o.require((w_gen && gen.w_equivariant) == wg_gen, format!("{}: {}", item.name, gen.verdict().detail));
        non_generating += usize::from(!w_gen);
    }
    o.require(non_generating > 0, "no non-generating W in the corpus");
    o.note(format!(
        "{} (C, W) pairs, {non_generating} with non-generating W; all W are equivariant",
        corpus::all_items().len()
    ));
    o
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("axiom suites and seeded failures", criterion_1),
        ("double groupoid laws and gamma round trip", criterion_2),
        ("counting oracle", criterion_3),
        ("invertible derivations", criterion_4),
        ("invertible derivations and linear sections", criterion_5),
        ("inverse semigroup laws and germ oracle", criterion_6),
        ("holonomy pipeline", criterion_7),
        ("chart coherence", criterion_8),
        ("universal property", criterion_9),
        ("generation equivalence", criterion_10),
    ];
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        let t = Instant::now();
        let out = run();
        let tag = if out.passed { "PASS" } else { "FAIL" };
        println!("{tag} [{n:>2}] {title} ({:.2?})", t.elapsed());
        for note in &out.notes {
            println!("         {note}");
        }
        if out.passed {
            passed += 1;
        } else if !KNOWN_RED.contains(&n) {
            unexpected.push(n);
        }
    }
    println!("{passed} of {} criteria pass; known red: {KNOWN_RED:?}", criteria.len());
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
