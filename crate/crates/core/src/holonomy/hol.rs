//! The holonomy groupoid `Hol = J^r / J₀` with the map `ψ`, the embedding
//! `i` of `W^G`, the charts `χ_s` and the topology they generate.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fintop::{self, point_set, FiniteTopSpace, PartialMap};
use crate::groupoid::{quotient, Groupoid, GroupoidMorphism, NormalSubgroupoid, Quotient};
use crate::report::{Verdict, Violation};
use crate::xmod::CrossedModule;

use super::axioms::{check_v_locally_lie, SectionCatalogue};
use super::germ::{build_j0, Germ, GermGroupoid};
use super::section::{closure, Frame, LocalSection};
use super::wg::{build_wg, WGSquares, WStructure};

#[derive(Clone, Copy, Debug)]
pub struct HolonomyOptions {
    /// Refuse to build when one of S1 to S5 fails. When off, the pipeline
    /// runs on whatever sections exist and reports every failure.
    pub require_axioms: bool,
    pub seed: u64,
    /// Upper bound on the number of chart sections.
    pub chart_cap: usize,
}

impl Default for HolonomyOptions {
    fn default() -> Self {
        Self { require_axioms: true, seed: 0, chart_cap: 20_000 }
    }
}

/// A chart section `s` and its map `χ_s` on positions of `W^G`.
#[derive(Clone, Debug)]
pub struct Chart {
    pub section: LocalSection,
    pub map: Vec<Option<usize>>,
}

#[derive(Clone, Debug)]
pub struct HolonomyGroupoid {
    frame: Frame,
    wg: WGSquares,
    catalogue: SectionCatalogue,
    axioms: Vec<Verdict>,
    j: GermGroupoid,
    jr: GermGroupoid,
    j0: NormalSubgroupoid,
    quotient: Quotient,
    psi: GroupoidMorphism,
    embed: Vec<Option<usize>>,
    embed_conflicts: Vec<Violation>,
    charts: Vec<Chart>,
    topology: FiniteTopSpace,
}

fn germs_of(fr: &Frame, sections: &[LocalSection]) -> Result<Vec<Germ>> {
    let mut out = BTreeSet::new();
    for s in sections {
        for a in s.u1().ones() {
            out.insert(s.germ_at(fr, a)?);
        }
    }
    Ok(out.into_iter().collect())
}

/// Runs the whole construction for `(cm, w)`.
pub fn holonomy_groupoid(cm: &CrossedModule, w: &WStructure, opts: HolonomyOptions) -> Result<HolonomyGroupoid> {
    let frame = Frame::new(cm)?;
    let wg = build_wg(&frame, w)?;
    let catalogue = SectionCatalogue::new(&frame, &wg);
    let axioms = check_v_locally_lie(&frame, &wg, &catalogue, opts.seed);
    if opts.require_axioms {
        if let Some(bad) = axioms.iter().find(|v| v.id.starts_with('S') && !v.passed) {
            let first = bad.witnesses.first().map(|v| format!(" ({v})")).unwrap_or_default();
            return Err(Error::AxiomFailed(format!("{}{first}", bad.id)));
        }
    }
    let fr = &frame;
    let j = GermGroupoid::generate(fr, germs_of(fr, &catalogue.all)?)?;
    let wg_germs = germs_of(fr, &catalogue.wg)?;
    let jr = j.generated_by(fr, wg_germs.iter().cloned())?;
    let j0 = build_j0(fr, &jr, &wg_germs)?;
    let quotient = quotient(jr.groupoid(), &j0)?;

    let psi_j = jr.psi();
    let mut psi_arrows = Vec::with_capacity(quotient.classes.len());
    for class in &quotient.classes {
        let v = psi_j.arrows[class[0]];
        if let Some(&bad) = class.iter().find(|&&m| psi_j.arrows[m] != v) {
            return Err(Error::Structure(format!(
                "psi is not constant on the class of `{}`",
                jr.groupoid().arrow_name(bad)
            )));
        }
        psi_arrows.push(v);
    }
    let psi = GroupoidMorphism { objects: psi_j.objects.clone(), arrows: psi_arrows };

    let class_of = |germ: &Germ| jr.index_of(germ).map(|i| quotient.projection.arrows[i]);
    let mut embed = Vec::with_capacity(wg.len());
    let mut embed_conflicts = Vec::new();
    for &sq in wg.squares() {
        let a = fr.sq(sq).bottom;
        let classes: BTreeSet<usize> = catalogue
            .through(fr, sq)
            .into_iter()
            .map(|i| class_of(&catalogue.wg[i].germ_at(fr, a).expect("through w")).expect("germ in J^r"))
            .collect();
        if classes.len() > 1 {
            embed_conflicts.push(Violation::new("sections through w give different classes", [fr.dg().name(sq)]));
        }
        embed.push(classes.first().copied());
    }

    let sections = closure(fr, &catalogue.wg, opts.chart_cap)?;
    let mut charts = Vec::with_capacity(sections.len());
    for s in sections {
        let mut map = vec![None; wg.len()];
        for (p, &sq) in wg.squares().iter().enumerate() {
            let (Some(theta), Some(_)) = (catalogue.through(fr, sq).first().copied(), s.value(fr.sq(sq).top)) else {
                continue;
            };
            let outer = s.germ_at(fr, fr.sq(sq).top)?;
            let inner = catalogue.wg[theta].germ_at(fr, fr.sq(sq).bottom)?;
            let (x, y) = (jr.index_of(&outer), jr.index_of(&inner));
            let (Some(x), Some(y)) = (x, y) else {
                return Err(Error::Structure("chart germ outside J^r".into()));
            };
            let prod = jr.groupoid().add(x, y).expect("chart germs compose");
            map[p] = Some(quotient.projection.arrows[prod]);
        }
        charts.push(Chart { section: s, map });
    }

    let hol = &quotient.groupoid;
    let mut subbasis: BTreeSet<Vec<usize>> = BTreeSet::new();
    for chart in &charts {
        for p in 0..wg.len() {
            if chart.map[p].is_none() {
                continue;
            }
            let image: BTreeSet<usize> = wg.topology().min_open(p).ones().filter_map(|q| chart.map[q]).collect();
            subbasis.insert(image.into_iter().collect());
        }
    }
    let subbasis: Vec<Vec<usize>> = subbasis.into_iter().collect();
    let topology = FiniteTopSpace::from_subbasis(hol.arrows().to_vec(), &subbasis, usize::MAX)?;

    Ok(HolonomyGroupoid {
        frame,
        wg,
        catalogue,
        axioms,
        j,
        jr,
        j0,
        quotient,
        psi,
        embed,
        embed_conflicts,
        charts,
        topology,
    })
}

impl HolonomyGroupoid {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn wg(&self) -> &WGSquares {
        &self.wg
    }

    pub fn catalogue(&self) -> &SectionCatalogue {
        &self.catalogue
    }

    /// S1 to S5 and the deductions, as computed before the build.
    pub fn axioms(&self) -> &[Verdict] {
        &self.axioms
    }

    pub fn j(&self) -> &GermGroupoid {
        &self.j
    }

    pub fn jr(&self) -> &GermGroupoid {
        &self.jr
    }

    pub fn j0(&self) -> &NormalSubgroupoid {
        &self.j0
    }

    pub fn groupoid(&self) -> &Groupoid {
        &self.quotient.groupoid
    }

    pub fn quotient(&self) -> &Quotient {
        &self.quotient
    }

    /// `ψ` on classes, into the vertical groupoid of squares.
    pub fn psi(&self) -> &GroupoidMorphism {
        &self.psi
    }

    /// `i(w)` for a square index `w`; `None` outside `W^G` or when no
    /// section passes through `w`.
    pub fn embed(&self, w: usize) -> Option<usize> {
        self.wg.position(w).and_then(|p| self.embed[p])
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn topology(&self) -> &FiniteTopSpace {
        &self.topology
    }

    /// Class in `Hol` of a germ of `J^r`.
    pub fn class_of(&self, germ: &Germ) -> Option<usize> {
        self.jr.index_of(germ).map(|i| self.quotient.projection.arrows[i])
    }

    /// `χ_s(w)` for a chart and a square index.
    pub fn chart(&self, chart: usize, w: usize) -> Result<usize> {
        self.wg
            .position(w)
            .and_then(|p| self.charts[chart].map[p])
            .ok_or_else(|| Error::OutsideDomain(self.frame.dg().name(w).to_string()))
    }

    /// Verdicts for the properties of `ψ` and `i`.
    pub fn properties(&self) -> Vec<Verdict> {
        let fr = &self.frame;
        let dg = fr.dg();
        let hol = self.groupoid();
        let mut out = vec![
            Verdict::pass("J0 wide and normal").with_detail(format!(
                "{} of {} germs",
                self.j0.arrows().count_ones(..),
                self.jr.len()
            )),
            Verdict::pass("quotient well defined").with_detail(format!("{} classes", hol.num_arrows())),
        ];
        let unit_issues: Vec<Violation> = (0..hol.num_objects())
            .filter(|&a| self.psi.objects[a] != a || self.psi.arrows[hol.unit(a)] != dg.eps1(a))
            .map(|a| Violation::new("psi on identity", [hol.object_name(a)]))
            .collect();
        out.push(Verdict::from_violations("psi identity on G", unit_issues));
        out.push(Verdict::from_violations("psi morphism", self.psi.check(hol, dg.vertical())));

        let missing: Vec<Violation> = self
            .wg
            .squares()
            .iter()
            .zip(&self.embed)
            .filter(|(_, e)| e.is_none())
            .map(|(&w, _)| Violation::new("no section through", [dg.name(w)]))
            .collect();
        let defined = self.wg.len() - missing.len();
        out.push(
            Verdict::from_violations("i defined on W^G", missing)
                .with_detail(format!("{defined} of {} squares", self.wg.len())),
        );
        out.push(Verdict::from_violations("i well defined", self.embed_conflicts.clone()));
        let psi_i: Vec<Violation> = self
            .wg
            .squares()
            .iter()
            .zip(&self.embed)
            .filter(|(&w, e)| e.is_some_and(|h| self.psi.arrows[h] != w))
            .map(|(&w, _)| Violation::new("psi i w differs from w", [dg.name(w)]))
            .collect();
        out.push(Verdict::from_violations("psi i = id", psi_i));
        let images: Vec<usize> = self.embed.iter().flatten().copied().collect();
        let image_set = point_set(hol.num_arrows(), images.iter().copied());
        let injective = image_set.count_ones(..) == images.len();
        out.push(if injective {
            Verdict::pass("i injective")
        } else {
            Verdict::fail("i injective", "two squares share a class")
        });
        out.push(open_verdict("i(W^G) open", &self.topology, &image_set));

        let pre = point_set(hol.num_arrows(), (0..hol.num_arrows()).filter(|&h| self.wg.contains(self.psi.arrows[h])));
        out.push(open_verdict("psi^-1(W^G) open", &self.topology, &pre));
        let map = PartialMap::new(
            (0..hol.num_arrows())
                .map(|h| pre.contains(h).then(|| self.wg.position(self.psi.arrows[h]).unwrap()))
                .collect(),
        );
        out.push(Verdict::from_violations(
            "psi continuous on psi^-1(W^G)",
            fintop::continuity_witness(&map, &self.topology, self.wg.topology())
                .map(|(p, q)| Violation::new("continuity", [hol.arrow_name(p), hol.arrow_name(q)]))
                .into_iter()
                .collect(),
        ));
        if self.wg.is_everything(fr) {
            let hit = point_set(dg.len(), self.psi.arrows.iter().copied());
            let missed: Vec<Violation> = (0..dg.len())
                .filter(|&u| !hit.contains(u))
                .map(|u| Violation::new("square outside the image of psi", [dg.name(u)]))
                .collect();
            let detail = format!("|Hol| = {}, squares = {}", hol.num_arrows(), dg.len());
            let mut v = Verdict::from_violations("psi isomorphism", missed).with_detail(detail);
            if v.passed && !self.psi.is_bijective(dg.vertical()) {
                v = Verdict::fail("psi isomorphism", "psi is not injective");
            }
            out.push(v);
        }
        out
    }

    /// Injectivity of every chart, and `χ_t⁻¹ χ_s = L_{t⁻¹ * s}` on every
    /// overlap point, and whether each transition is a partial
    /// homeomorphism of `W^G`.
    pub fn chart_coherence(&self) -> Vec<Verdict> {
        let fr = &self.frame;
        let dg = fr.dg();
        let n = self.wg.len();
        let mut injective = Vec::new();
        let mut inverse: Vec<Vec<Option<usize>>> = Vec::with_capacity(self.charts.len());
        for (k, chart) in self.charts.iter().enumerate() {
            let mut inv = vec![None; self.groupoid().num_arrows()];
            for (p, v) in chart.map.iter().enumerate() {
                if let Some(h) = v {
                    if let Some(q) = inv[*h].replace(p) {
                        injective.push(Violation::new(
                            "chart not injective",
                            [
                                k.to_string(),
                                dg.name(self.wg.squares()[q]).to_string(),
                                dg.name(self.wg.squares()[p]).to_string(),
                            ],
                        ));
                    }
                }
            }
            inverse.push(inv);
        }
        let mut transition = Vec::new();
        let mut open_maps = Vec::new();
        let mut overlaps = 0usize;
        for (ks, s) in self.charts.iter().enumerate() {
            for (kt, t) in self.charts.iter().enumerate() {
                let eta = t.section.inverse(fr).mul(fr, &s.section);
                let mut table = vec![None; n];
                for p in 0..n {
                    let Some(q) = s.map[p].and_then(|h| inverse[kt][h]) else { continue };
                    overlaps += 1;
                    table[p] = Some(q);
                    let v = self.wg.squares()[p];
                    let expected = eta.left_translate(fr, v).ok();
                    if expected != Some(self.wg.squares()[q]) && transition.len() < 16 {
                        transition.push(Violation::new(
                            "transition differs from left translation",
                            [ks.to_string(), kt.to_string(), dg.name(v).to_string()],
                        ));
                    }
                }
                let map = PartialMap::new(table);
                if fintop::is_partial_homeomorphism(&map, self.wg.topology(), self.wg.topology()).is_err()
                    && open_maps.len() < 16
                {
                    open_maps.push(Violation::new(
                        "transition not a partial homeomorphism",
                        [ks.to_string(), kt.to_string()],
                    ));
                }
            }
        }
        let count = self.charts.len();
        vec![
            Verdict::from_violations("chart injective", injective).with_detail(format!("{count} charts")),
            Verdict::from_violations("chart transition", transition)
                .with_detail(format!("{} pairs, {overlaps} overlap points", count * count)),
            Verdict::from_violations("chart transition open", open_maps),
        ]
    }

    /// Plain text tables of `J^r`, `J₀` and the classes of `Hol`.
    pub fn dump(&self) -> String {
        let fr = &self.frame;
        let mut s = String::new();
        let _ = writeln!(s, "J^r: {} germs", self.jr.len());
        for i in 0..self.jr.len() {
            let mark = if self.j0.contains(i) { " (J0)" } else { "" };
            let _ = writeln!(s, "  {}{mark}", self.jr.describe(fr, i));
        }
        let hol = self.groupoid();
        let _ = writeln!(s, "Hol: {} arrows", hol.num_arrows());
        for (k, class) in self.quotient.classes.iter().enumerate() {
            let members: Vec<&str> = class.iter().map(|&m| self.jr.groupoid().arrow_name(m)).collect();
            let _ = writeln!(
                s,
                "  {}: {} -> {}, psi = {}, members {{{}}}",
                hol.arrow_name(k),
                hol.object_name(hol.src(k)),
                hol.object_name(hol.tgt(k)),
                fr.dg().name(self.psi.arrows[k]),
                members.join(", ")
            );
        }
        s
    }
}

fn open_verdict(id: &str, space: &FiniteTopSpace, set: &fixedbitset::FixedBitSet) -> Verdict {
    match set.ones().find(|&p| !space.min_open(p).is_subset(set)) {
        None => Verdict::pass(id),
        Some(p) => Verdict::from_violations(id, vec![Violation::new("not open at", [space.name(p)])]),
    }
}
