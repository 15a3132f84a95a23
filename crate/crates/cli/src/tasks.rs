//! Execution of scenario tasks.

use std::collections::HashSet;
use std::path::Path;

use anyhow::Context;
use xmodhol_core::holonomy::{
    check_locally_lie_xmod, generation, holonomy_groupoid, induced_square_map, universal_morphism, Frame,
    HolonomyOptions, UniversalOptions,
};
use xmodhol_core::homotopy::{
    derivation_to_section, enumerate_derivations, enumerate_linear_sections, is_coadmissible, linsec_mul, whitehead_mul,
};
use xmodhol_core::scenario::{Scenario, TaskSpec};
use xmodhol_core::xmod::find_isomorphism;
use xmodhol_core::{DoubleGroupoid, Result, TaskKind, Verdict};

use crate::report::TaskReport;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub seed: u64,
    pub word_bound: usize,
    pub dump: Option<std::path::PathBuf>,
}

/// Runs one task. Library errors become a failing `task error` verdict.
pub fn run_task(sc: &Scenario, task: &TaskSpec, opts: &RunOptions) -> anyhow::Result<TaskReport> {
    let target = match task.kind {
        TaskKind::Universal => {
            format!("{} -> {}", task.morphism.as_deref().unwrap_or("?"), task.w.as_deref().unwrap_or("?"))
        }
        TaskKind::Holonomy => task.w.clone().unwrap_or_default(),
        _ => task.xmod.clone().unwrap_or_default(),
    };
    let mut report = TaskReport::new(&task.name, task.kind.name(), target);
    let mut dumps = Vec::new();
    let outcome = match task.kind {
        TaskKind::Validate => validate(sc, task, &mut report),
        TaskKind::Double => double(sc, task, &mut report, &mut dumps),
        TaskKind::Gamma => gamma(sc, task, &mut report),
        TaskKind::Derivations => derivations(sc, task, &mut report),
        TaskKind::Holonomy => holonomy(sc, task, opts, &mut report, &mut dumps),
        TaskKind::Universal => universal(sc, task, opts, &mut report, &mut dumps),
    };
    if let Err(e) = outcome {
        report.verdict(Verdict::fail("task error", e.to_string()));
    }
    if let Some(dir) = &opts.dump {
        for (suffix, text) in dumps {
            let path = dir.join(format!("{}.{suffix}.txt", task.name));
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(report)
}

fn xmod<'a>(sc: &'a Scenario, task: &TaskSpec) -> Result<&'a xmodhol_core::CrossedModule> {
    sc.xmod(task.xmod.as_deref().unwrap_or_default())
}

fn validate(sc: &Scenario, task: &TaskSpec, r: &mut TaskReport) -> Result<()> {
    let cm = xmod(sc, task)?;
    r.size("arrows of C", cm.c().num_arrows());
    r.size("arrows of G", cm.g().num_arrows());
    r.verdict(Verdict::from_violations("crossed module axioms", cm.check()));
    Ok(())
}

fn axioms_hold(cm: &xmodhol_core::CrossedModule, r: &mut TaskReport) -> bool {
    axioms_hold_as("crossed module axioms", cm, r)
}

fn axioms_hold_as(id: &str, cm: &xmodhol_core::CrossedModule, r: &mut TaskReport) -> bool {
    let v = Verdict::from_violations(id, cm.check());
    let ok = v.passed;
    r.verdict(v);
    ok
}

fn double(sc: &Scenario, task: &TaskSpec, r: &mut TaskReport, dumps: &mut Vec<(&'static str, String)>) -> Result<()> {
    let cm = xmod(sc, task)?;
    if !axioms_hold(cm, r) {
        return Ok(());
    }
    let dg = DoubleGroupoid::build(cm)?;
    r.size("squares", dg.len());
    r.verdict(
        Verdict::from_violations("double groupoid laws", dg.check()).with_detail(format!("{} squares", dg.len())),
    );
    dumps.push(("double", dg.dump()));
    Ok(())
}

fn gamma(sc: &Scenario, task: &TaskSpec, r: &mut TaskReport) -> Result<()> {
    let cm = xmod(sc, task)?;
    if !axioms_hold(cm, r) {
        return Ok(());
    }
    let dg = DoubleGroupoid::build(cm)?;
    let gamma = dg.gamma()?;
    r.size("squares", dg.len());
    r.size("arrows of gamma", gamma.c().num_arrows());
    r.verdict(Verdict::from_violations("gamma crossed module axioms", gamma.check()));
    match find_isomorphism(&gamma, cm) {
        Some(iso) => {
            let check = iso.check(&gamma, cm);
            let v = Verdict::from_violations("gamma(D(C)) isomorphic to C", check.violations);
            r.verdict(if check.is_isomorphism { v } else { Verdict::fail(v.id, "map is not bijective") });
            for k in 0..gamma.c().num_arrows() {
                r.listing.push(format!("{} -> {}", gamma.c().arrow_name(k), cm.c().arrow_name(iso.f2[k])));
            }
        }
        None => r.verdict(Verdict::fail("gamma(D(C)) isomorphic to C", "no isomorphism found")),
    }
    Ok(())
}

fn derivations(sc: &Scenario, task: &TaskSpec, r: &mut TaskReport) -> Result<()> {
    let cm = xmod(sc, task)?;
    if !axioms_hold(cm, r) {
        return Ok(());
    }
    let dg = DoubleGroupoid::build(cm)?;
    let all = enumerate_derivations(cm);
    let mut laws = Vec::new();
    let mut equivalence = Vec::new();
    let mut invertible = Vec::new();
    for (i, s) in all.iter().enumerate() {
        laws.extend(s.check(cm));
        let cert = is_coadmissible(cm, s)?;
        let inv = cert.inverse.is_some();
        if inv != cert.f1_bijective || cert.f1_bijective != cert.f2_bijective {
            equivalence.push(xmodhol_core::Violation::new("invertibility", [format!("#{i}")]));
        }
        r.listing.push(format!(
            "FDer #{i}: {} | f0 bijective {}, f1 bijective {}, f2 bijective {}, invertible {inv}",
            s.describe(cm),
            cert.f0_bijective,
            cert.f1_bijective,
            cert.f2_bijective
        ));
        if inv {
            invertible.push(s.clone());
        }
    }
    r.verdict(Verdict::from_violations("derivation laws", laws));
    r.verdict(Verdict::from_violations("invertible iff f1 bijective iff f2 bijective", equivalence));

    let sections = enumerate_linear_sections(&dg);
    let image = invertible.iter().map(|s| derivation_to_section(&dg, s)).collect::<Result<Vec<_>>>()?;
    let image_set: HashSet<_> = image.iter().collect();
    let target: HashSet<_> = sections.iter().collect();
    let bijective = image_set.len() == image.len() && image_set == target;
    r.verdict(if bijective {
        Verdict::pass("FDer* to LinSec bijective")
    } else {
        Verdict::fail("FDer* to LinSec bijective", format!("{} images, {} sections", image_set.len(), target.len()))
    });
    let mut mult = Vec::new();
    for (i, s) in invertible.iter().enumerate() {
        for (j, t) in invertible.iter().enumerate() {
            let lhs = derivation_to_section(&dg, &whitehead_mul(cm, s, t)?)?;
            if linsec_mul(&dg, &image[i], &image[j])? != lhs {
                mult.push(xmodhol_core::Violation::new("product", [format!("#{i}"), format!("#{j}")]));
            }
        }
    }
    r.verdict(Verdict::from_violations("FDer* to LinSec multiplicative", mult));
    for (k, sigma) in sections.iter().enumerate() {
        r.listing.push(format!("LinSec #{k}: {}", sigma.describe(&dg)));
    }
    r.size("derivations", all.len());
    r.size("invertible derivations", invertible.len());
    r.size("linear sections", sections.len());
    Ok(())
}

fn holonomy_options(opts: &RunOptions) -> HolonomyOptions {
    HolonomyOptions { require_axioms: false, seed: opts.seed, ..HolonomyOptions::default() }
}

fn holonomy(
    sc: &Scenario,
    task: &TaskSpec,
    opts: &RunOptions,
    r: &mut TaskReport,
    dumps: &mut Vec<(&'static str, String)>,
) -> Result<()> {
    let named = &sc.w[task.w.as_deref().unwrap_or_default()];
    let cm = sc.xmod(&named.xmod)?;
    if !axioms_hold(cm, r) {
        return Ok(());
    }
    r.verdict(Verdict::from_violations("W structure", named.w.check(cm)));
    let hol = holonomy_groupoid(cm, &named.w, holonomy_options(opts))?;
    let fr = hol.frame();
    for v in hol.axioms() {
        r.verdict(v.clone());
    }
    for v in check_locally_lie_xmod(fr, &named.w, hol.wg(), hol.catalogue()) {
        r.verdict(v);
    }
    r.verdict(generation(fr, &named.w, hol.wg()).verdict());
    for v in hol.properties() {
        r.verdict(v);
    }
    for v in hol.chart_coherence() {
        r.verdict(v);
    }
    r.size("squares", fr.dg().len());
    r.size("W^G squares", hol.wg().len());
    r.size("minimal sections", hol.catalogue().all.len());
    r.size("W^G sections", hol.catalogue().wg.len());
    r.size("germs in J", hol.j().len());
    r.size("germs in J^r", hol.jr().len());
    r.size("germs in J0", hol.j0().arrows().count_ones(..));
    r.size("arrows of Hol", hol.groupoid().num_arrows());
    r.size("charts", hol.charts().len());
    dumps.push(("hol", hol.dump()));
    Ok(())
}

fn universal(
    sc: &Scenario,
    task: &TaskSpec,
    opts: &RunOptions,
    r: &mut TaskReport,
    dumps: &mut Vec<(&'static str, String)>,
) -> Result<()> {
    let named = &sc.w[task.w.as_deref().unwrap_or_default()];
    let m = &sc.morphisms[task.morphism.as_deref().unwrap_or_default()];
    let (cm_a, cm_c) = (sc.xmod(&m.source)?, sc.xmod(&named.xmod)?);
    let ok = if m.source == named.xmod {
        axioms_hold(cm_c, r)
    } else {
        let ok_a = axioms_hold_as("crossed module axioms (source)", cm_a, r);
        axioms_hold_as("crossed module axioms (target)", cm_c, r) && ok_a
    };
    if !ok {
        return Ok(());
    }
    let check = m.map.check(cm_a, cm_c);
    r.verdict(Verdict::from_violations("crossed module morphism", check.violations));
    let hol = holonomy_groupoid(cm_c, &named.w, holonomy_options(opts))?;
    let fa = Frame::new(cm_a)?;
    let mu = induced_square_map(&fa, hol.frame(), &m.map)?;
    let u = universal_morphism(
        &hol,
        cm_a,
        &mu,
        UniversalOptions { word_bound: opts.word_bound, require_hypotheses: false },
    )?;
    for v in u.hypotheses.iter().chain(&u.verdicts) {
        r.verdict(v.clone());
    }
    let hol_g = hol.groupoid();
    let table: Vec<String> = u
        .mu_prime
        .iter()
        .enumerate()
        .map(|(p, v)| {
            let image = v.map_or("undefined", |k| hol_g.arrow_name(k));
            format!("mu' {} -> {image}", fa.dg().name(p))
        })
        .collect();
    r.size("squares of A", fa.dg().len());
    r.size("squares with mu' defined", u.mu_prime.iter().filter(|v| v.is_some()).count());
    r.size("qualifying morphisms", u.qualifying);
    dumps.push(("universal", table.join("\n") + "\n"));
    r.listing.extend(table);
    Ok(())
}

/// Tasks of `kind` from the scenario; when it lists none, one task per
/// crossed module (or per `W` for `holonomy`).
pub fn select(sc: &Scenario, kind: Option<TaskKind>, names: &[String]) -> anyhow::Result<Vec<TaskSpec>> {
    let mut chosen: Vec<TaskSpec> = sc.tasks.iter().filter(|t| kind.is_none_or(|k| t.kind == k)).cloned().collect();
    if chosen.is_empty() {
        match kind {
            Some(k @ (TaskKind::Validate | TaskKind::Double | TaskKind::Gamma | TaskKind::Derivations)) => {
                chosen = sc
                    .xmods
                    .keys()
                    .map(|x| TaskSpec {
                        name: format!("{}-{x}", k.name()),
                        kind: k,
                        xmod: Some(x.clone()),
                        w: None,
                        morphism: None,
                    })
                    .collect();
            }
            Some(TaskKind::Holonomy) => {
                chosen =
                    sc.w.keys()
                        .map(|w| TaskSpec {
                            name: format!("holonomy-{w}"),
                            kind: TaskKind::Holonomy,
                            xmod: None,
                            w: Some(w.clone()),
                            morphism: None,
                        })
                        .collect();
            }
            _ => {}
        }
    }
    if !names.is_empty() {
        for n in names {
            if !chosen.iter().any(|t| &t.name == n) {
                anyhow::bail!("no task named `{n}`");
            }
        }
        chosen.retain(|t| names.contains(&t.name));
    }
    if chosen.is_empty() {
        anyhow::bail!("the scenario has no task to run");
    }
    Ok(chosen)
}

pub fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
