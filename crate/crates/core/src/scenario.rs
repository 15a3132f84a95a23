//! JSON scenario files: named spaces, groupoids, crossed modules, `W`
//! structures and morphisms, plus a task list referring to them by name.
//!
//! Loading resolves every reference and builds every structure, so a loaded
//! [`Scenario`] is internally consistent. Axiom checks on crossed modules are
//! left to the tasks, which report violations as verdicts.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusItem;
use crate::error::{Error, Result};
use crate::fintop::{FiniteTopSpace, SpaceSpec};
use crate::groupoid::Groupoid;
use crate::holonomy::WStructure;
use crate::xmod::{CrossedModule, XModMorphism};

/// A space given inline or by the name of an entry in `spaces`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceRef {
    Named(String),
    Inline(SpaceSpec),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowSpec {
    pub name: String,
    pub src: String,
    pub tgt: String,
}

/// One transitive component: its objects and permutations generating the
/// vertex group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub objects: Vec<String>,
    pub generators: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub arrows: SpaceRef,
    pub objects: SpaceRef,
}

/// A groupoid either as a full table (`objects`, `arrows`, `compose` as
/// `[a, b, a + b]` triples) or as `components` of permutation groups.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupoidSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objects: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arrows: Vec<ArrowSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compose: Vec<[String; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<ComponentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologySpec>,
}

/// `delta` maps arrow names of `c` to arrow names of `g`; `action` lists
/// `[c, a, c^a]` triples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XModSpec {
    pub c: String,
    pub g: String,
    pub delta: BTreeMap<String, String>,
    pub action: Vec<[String; 3]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WSpec {
    pub xmod: String,
    pub arrows: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<SpaceRef>,
}

/// A crossed module morphism by name tables on objects, `G` and `C`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismSpec {
    pub source: String,
    pub target: String,
    pub objects: BTreeMap<String, String>,
    pub g: BTreeMap<String, String>,
    pub c: BTreeMap<String, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Validate,
    Double,
    Gamma,
    Derivations,
    Holonomy,
    Universal,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Validate => "validate",
            TaskKind::Double => "double",
            TaskKind::Gamma => "gamma",
            TaskKind::Derivations => "derivations",
            TaskKind::Holonomy => "holonomy",
            TaskKind::Universal => "universal",
        }
    }
}

/// A task names a crossed module, or a `W` structure for `holonomy`, and
/// additionally a morphism for `universal`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub name: String,
    pub kind: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xmod: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morphism: Option<String>,
}

/// The file as written on disk.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub spaces: BTreeMap<String, SpaceSpec>,
    #[serde(default)]
    pub groupoids: BTreeMap<String, GroupoidSpec>,
    #[serde(default)]
    pub xmods: BTreeMap<String, XModSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub w: BTreeMap<String, WSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub morphisms: BTreeMap<String, MorphismSpec>,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
}

#[derive(Clone, Debug)]
pub struct NamedW {
    pub xmod: String,
    pub w: WStructure,
}

#[derive(Clone, Debug)]
pub struct NamedMorphism {
    pub source: String,
    pub target: String,
    pub map: XModMorphism,
}

/// A loaded scenario with every reference resolved.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub spaces: BTreeMap<String, FiniteTopSpace>,
    pub groupoids: BTreeMap<String, Groupoid>,
    pub xmods: BTreeMap<String, CrossedModule>,
    pub w: BTreeMap<String, NamedW>,
    pub morphisms: BTreeMap<String, NamedMorphism>,
    pub tasks: Vec<TaskSpec>,
}

fn at(location: impl Into<String>) -> impl FnOnce(Error) -> Error {
    let location = location.into();
    move |e| match e {
        Error::Scenario { .. } => e,
        other => Error::Scenario { location, message: other.to_string() },
    }
}

fn fail<T>(location: impl Into<String>, message: impl Into<String>) -> Result<T> {
    Err(Error::Scenario { location: location.into(), message: message.into() })
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &str, name: &str, location: &str) -> Result<&'a T> {
    map.get(name).map_or_else(|| fail(location, format!("unknown {kind} `{name}`")), Ok)
}

impl Scenario {
    /// Parses and resolves a scenario. Spaces above `max_points` points are
    /// rejected.
    pub fn from_json(text: &str, max_points: usize) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Scenario {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        Self::from_file(&file, max_points)
    }

    pub fn from_file(file: &ScenarioFile, max_points: usize) -> Result<Self> {
        let mut spaces = BTreeMap::new();
        for (name, spec) in &file.spaces {
            spaces.insert(name.clone(), spec.build(max_points).map_err(at(format!("spaces.{name}")))?);
        }
        let resolve = |r: &SpaceRef, loc: &str| -> Result<FiniteTopSpace> {
            match r {
                SpaceRef::Named(n) => lookup(&spaces, "space", n, loc).cloned(),
                SpaceRef::Inline(spec) => spec.build(max_points).map_err(at(loc)),
            }
        };

        let mut groupoids = BTreeMap::new();
        for (name, spec) in &file.groupoids {
            let loc = format!("groupoids.{name}");
            let mut g = build_groupoid(spec, &loc)?;
            let violations = g.check();
            if let Some(v) = violations.first() {
                return fail(&loc, format!("not a groupoid: {v}"));
            }
            if let Some(t) = &spec.topology {
                let arrows = resolve(&t.arrows, &format!("{loc}.topology.arrows"))?;
                let objects = resolve(&t.objects, &format!("{loc}.topology.objects"))?;
                g = g.with_topology(&arrows, &objects).map_err(at(format!("{loc}.topology")))?;
            }
            groupoids.insert(name.clone(), g);
        }

        let mut xmods = BTreeMap::new();
        for (name, spec) in &file.xmods {
            let loc = format!("xmods.{name}");
            let c = lookup(&groupoids, "groupoid", &spec.c, &format!("{loc}.c"))?.clone();
            let g = lookup(&groupoids, "groupoid", &spec.g, &format!("{loc}.g"))?.clone();
            let mut delta = vec![usize::MAX; c.num_arrows()];
            for (k, a) in &spec.delta {
                let kl = format!("{loc}.delta.{k}");
                delta[c.arrow(k).map_err(at(&kl))?] = g.arrow(a).map_err(at(&kl))?;
            }
            if let Some(k) = delta.iter().position(|&a| a == usize::MAX) {
                return fail(format!("{loc}.delta"), format!("no image for `{}`", c.arrow_name(k)));
            }
            let mut action = HashMap::new();
            for (i, [k, a, r]) in spec.action.iter().enumerate() {
                let al = format!("{loc}.action[{i}]");
                let key = (c.arrow(k).map_err(at(&al))?, g.arrow(a).map_err(at(&al))?);
                if action.insert(key, c.arrow(r).map_err(at(&al))?).is_some() {
                    return fail(al, format!("duplicate entry for `{k}`, `{a}`"));
                }
            }
            xmods.insert(name.clone(), CrossedModule::new(c, g, delta, action).map_err(at(&loc))?);
        }

        let mut w = BTreeMap::new();
        for (name, spec) in &file.w {
            let loc = format!("w.{name}");
            let cm = lookup(&xmods, "crossed module", &spec.xmod, &format!("{loc}.xmod"))?;
            let topology = spec.topology.as_ref().map(|t| resolve(t, &format!("{loc}.topology"))).transpose()?;
            let structure = WStructure::new(cm, &spec.arrows, topology).map_err(at(&loc))?;
            w.insert(name.clone(), NamedW { xmod: spec.xmod.clone(), w: structure });
        }

        let mut morphisms = BTreeMap::new();
        for (name, spec) in &file.morphisms {
            let loc = format!("morphisms.{name}");
            let src = lookup(&xmods, "crossed module", &spec.source, &format!("{loc}.source"))?;
            let tgt = lookup(&xmods, "crossed module", &spec.target, &format!("{loc}.target"))?;
            let f0 = name_map(&spec.objects, src.g().objects(), tgt.g().objects(), &format!("{loc}.objects"))?;
            let f1 = name_map(&spec.g, src.g().arrows(), tgt.g().arrows(), &format!("{loc}.g"))?;
            let f2 = name_map(&spec.c, src.c().arrows(), tgt.c().arrows(), &format!("{loc}.c"))?;
            morphisms.insert(
                name.clone(),
                NamedMorphism {
                    source: spec.source.clone(),
                    target: spec.target.clone(),
                    map: XModMorphism { f0, f1, f2 },
                },
            );
        }

        for (i, task) in file.tasks.iter().enumerate() {
            let loc = format!("tasks[{i}] ({})", task.name);
            match task.kind {
                TaskKind::Holonomy | TaskKind::Universal => {
                    let Some(wn) = &task.w else { return fail(loc, "a `w` reference is required") };
                    let named = lookup(&w, "W structure", wn, &loc)?;
                    if task.kind == TaskKind::Universal {
                        let Some(mn) = &task.morphism else { return fail(loc, "a `morphism` reference is required") };
                        let m = lookup(&morphisms, "morphism", mn, &loc)?;
                        if m.target != named.xmod {
                            return fail(loc, format!("morphism `{mn}` does not land in `{}`", named.xmod));
                        }
                    }
                }
                _ => {
                    let Some(xn) = &task.xmod else { return fail(loc, "an `xmod` reference is required") };
                    lookup(&xmods, "crossed module", xn, &loc)?;
                }
            }
        }
        if let Some((i, _)) =
            file.tasks.iter().enumerate().find(|(i, t)| file.tasks[..*i].iter().any(|u| u.name == t.name))
        {
            return fail(format!("tasks[{i}]"), format!("duplicate task name `{}`", file.tasks[i].name));
        }

        Ok(Self { spaces, groupoids, xmods, w, morphisms, tasks: file.tasks.clone() })
    }

    pub fn xmod(&self, name: &str) -> Result<&CrossedModule> {
        lookup(&self.xmods, "crossed module", name, "query")
    }
}

fn name_map(table: &BTreeMap<String, String>, src: &[String], tgt: &[String], loc: &str) -> Result<Vec<usize>> {
    let tgt_index: HashMap<&str, usize> = tgt.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    src.iter()
        .map(|n| {
            let image = table.get(n).map_or_else(|| fail(loc, format!("no image for `{n}`")), Ok)?;
            tgt_index.get(image.as_str()).copied().map_or_else(|| fail(loc, format!("unknown target `{image}`")), Ok)
        })
        .collect()
}

fn build_groupoid(spec: &GroupoidSpec, loc: &str) -> Result<Groupoid> {
    let table_form = !spec.objects.is_empty() || !spec.arrows.is_empty() || !spec.compose.is_empty();
    match (table_form, spec.components.is_empty()) {
        (true, true) => {
            let obj: HashMap<&str, usize> = spec.objects.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
            let arr: HashMap<&str, usize> = spec.arrows.iter().enumerate().map(|(i, a)| (a.name.as_str(), i)).collect();
            let object =
                |n: &str, l: String| obj.get(n).copied().map_or_else(|| fail(l, format!("unknown object `{n}`")), Ok);
            let arrow =
                |n: &str, l: String| arr.get(n).copied().map_or_else(|| fail(l, format!("unknown arrow `{n}`")), Ok);
            let mut src = Vec::with_capacity(spec.arrows.len());
            let mut tgt = Vec::with_capacity(spec.arrows.len());
            for (i, a) in spec.arrows.iter().enumerate() {
                src.push(object(&a.src, format!("{loc}.arrows[{i}]"))?);
                tgt.push(object(&a.tgt, format!("{loc}.arrows[{i}]"))?);
            }
            let mut comp = HashMap::new();
            for (i, [a, b, r]) in spec.compose.iter().enumerate() {
                let l = format!("{loc}.compose[{i}]");
                let key = (arrow(a, l.clone())?, arrow(b, l.clone())?);
                if comp.insert(key, arrow(r, l.clone())?).is_some() {
                    return fail(l, format!("duplicate entry for `{a}`, `{b}`"));
                }
            }
            let names = spec.arrows.iter().map(|a| a.name.clone()).collect();
            Groupoid::from_table(spec.objects.clone(), names, src, tgt, comp).map_err(at(loc))
        }
        (false, false) => {
            let comps: Vec<(Vec<String>, Vec<Vec<usize>>)> =
                spec.components.iter().map(|c| (c.objects.clone(), c.generators.clone())).collect();
            Groupoid::from_presentation(&comps).map_err(at(loc))
        }
        (true, false) => fail(loc, "give either a table or components, not both"),
        (false, true) => fail(loc, "a groupoid needs a table or components"),
    }
}

fn space_spec(space: &FiniteTopSpace) -> SpaceSpec {
    let n = space.len();
    let kind = if space.is_discrete() {
        Some("discrete")
    } else if (0..n).all(|p| space.min_open(p).count_ones(..) == n) {
        Some("indiscrete")
    } else {
        None
    };
    match kind {
        Some(k) => SpaceSpec { points: space.names().to_vec(), opens: None, basis: None, kind: Some(k.into()) },
        None => space.to_spec(),
    }
}

/// Full table form of a groupoid, with its topology inline when present.
pub fn groupoid_spec(g: &Groupoid) -> GroupoidSpec {
    let arrows = (0..g.num_arrows())
        .map(|a| ArrowSpec {
            name: g.arrow_name(a).into(),
            src: g.object_name(g.src(a)).into(),
            tgt: g.object_name(g.tgt(a)).into(),
        })
        .collect();
    let compose = g
        .composition_entries()
        .map(|(a, b, r)| [g.arrow_name(a).into(), g.arrow_name(b).into(), g.arrow_name(r).into()])
        .collect();
    let topology = g.topology().map(|t| TopologySpec {
        arrows: SpaceRef::Inline(space_spec(&t.arrows)),
        objects: SpaceRef::Inline(space_spec(&t.objects)),
    });
    GroupoidSpec { objects: g.objects().to_vec(), arrows, compose, components: Vec::new(), topology }
}

pub fn xmod_spec(cm: &CrossedModule, c: &str, g: &str) -> XModSpec {
    let (cg, gg) = (cm.c(), cm.g());
    XModSpec {
        c: c.into(),
        g: g.into(),
        delta: (0..cg.num_arrows()).map(|k| (cg.arrow_name(k).into(), gg.arrow_name(cm.delta(k)).into())).collect(),
        action: cm
            .action_entries()
            .into_iter()
            .map(|(k, a, r)| [cg.arrow_name(k).into(), gg.arrow_name(a).into(), cg.arrow_name(r).into()])
            .collect(),
    }
}

fn task(kind: TaskKind) -> TaskSpec {
    TaskSpec {
        name: kind.name().into(),
        kind,
        xmod: matches!(kind, TaskKind::Validate | TaskKind::Double | TaskKind::Gamma | TaskKind::Derivations)
            .then(|| "X".to_string()),
        w: matches!(kind, TaskKind::Holonomy | TaskKind::Universal).then(|| "W".to_string()),
        morphism: (kind == TaskKind::Universal).then(|| "identity".to_string()),
    }
}

/// A scenario holding one crossed module `X` with the tasks that need no
/// `W`.
pub fn xmod_scenario(cm: &CrossedModule) -> ScenarioFile {
    ScenarioFile {
        groupoids: [("C".to_string(), groupoid_spec(cm.c())), ("G".to_string(), groupoid_spec(cm.g()))].into(),
        xmods: [("X".to_string(), xmod_spec(cm, "C", "G"))].into(),
        tasks: [TaskKind::Validate, TaskKind::Double, TaskKind::Gamma, TaskKind::Derivations]
            .into_iter()
            .map(task)
            .collect(),
        ..Default::default()
    }
}

/// A self-contained scenario for one corpus item: its crossed module, its
/// `W`, the identity morphism and one task of every kind.
pub fn corpus_scenario(item: &CorpusItem) -> ScenarioFile {
    let cm = &item.xmod;
    let mut file = xmod_scenario(cm);
    let id = |names: &[String]| -> BTreeMap<String, String> { names.iter().map(|n| (n.clone(), n.clone())).collect() };
    file.w.insert(
        "W".into(),
        WSpec {
            xmod: "X".into(),
            arrows: item.w.clone(),
            topology: Some(SpaceRef::Inline(space_spec(&item.w_topology))),
        },
    );
    file.morphisms.insert(
        "identity".into(),
        MorphismSpec {
            source: "X".into(),
            target: "X".into(),
            objects: id(cm.g().objects()),
            g: id(cm.g().arrows()),
            c: id(cm.c().arrows()),
        },
    );
    file.tasks.extend([TaskKind::Holonomy, TaskKind::Universal].into_iter().map(task));
    file
}

impl ScenarioFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario files serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{self, Topo};

    #[test]
    fn corpus_scenarios_round_trip() {
        for item in corpus::all_items() {
            let file = corpus_scenario(&item);
            let text = file.to_json();
            let back: ScenarioFile = serde_json::from_str(&text).unwrap();
            assert_eq!(back, file);
            let sc = Scenario::from_json(&text, 64).unwrap();
            let cm = sc.xmod("X").unwrap();
            assert!(cm.check().is_empty(), "{}", item.name);
            assert_eq!(cm.c().arrows(), item.xmod.c().arrows());
            assert_eq!(sc.w["W"].w.len(), item.w.len());
        }
    }

    #[test]
    fn presentation_matches_cyclic_table() {
        let text = r#"{
            "groupoids": { "Z2": { "components": [ { "objects": ["*"], "generators": [[1, 0]] } ] } },
            "xmods": {}, "tasks": []
        }"#;
        let sc = Scenario::from_json(text, 64).unwrap();
        let g = &sc.groupoids["Z2"];
        assert_eq!(g.num_arrows(), 2);
        assert!(g.check().is_empty());
    }

    #[test]
    fn parse_errors_carry_a_line() {
        let err = Scenario::from_json("{\n  \"groupoids\": [\n", 64).unwrap_err();
        assert!(matches!(err, Error::Scenario { ref location, .. } if location.starts_with("line 2")), "{err}");
    }

    #[test]
    fn unknown_references_name_the_block() {
        let mut file = corpus_scenario(&corpus::standard(Topo::Discrete)[0]);
        file.xmods.get_mut("X").unwrap().g = "H".into();
        let err = Scenario::from_file(&file, 64).unwrap_err();
        assert!(matches!(err, Error::Scenario { ref location, .. } if location == "xmods.X.g"), "{err}");

        let mut file = corpus_scenario(&corpus::standard(Topo::Discrete)[0]);
        file.tasks[0].xmod = Some("Y".into());
        let err = Scenario::from_file(&file, 64).unwrap_err();
        assert!(matches!(err, Error::Scenario { ref location, .. } if location.starts_with("tasks[0]")), "{err}");
    }

    #[test]
    fn non_groupoid_tables_are_rejected() {
        let mut file = corpus_scenario(&corpus::standard(Topo::Discrete)[0]);
        file.groupoids.get_mut("G").unwrap().compose[0][2] = "1".into();
        let err = Scenario::from_file(&file, 64).unwrap_err();
        assert!(matches!(err, Error::Scenario { ref location, .. } if location == "groupoids.G"), "{err}");
    }

    #[test]
    fn point_bound_is_enforced() {
        let file = corpus_scenario(&corpus::standard(Topo::Discrete)[2]);
        assert!(Scenario::from_file(&file, 1).is_err());
    }
}
