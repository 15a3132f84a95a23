//! Finite groupoids in additive notation: `a + b` is defined when the target
//! of `a` is the source of `b`.

use std::collections::{HashMap, VecDeque};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::fintop::{self, point_set, FiniteTopSpace, PartialMap};
use crate::report::Violation;

/// Topologies on the arrows and on the objects, listed in groupoid order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupoidTopology {
    pub arrows: FiniteTopSpace,
    pub objects: FiniteTopSpace,
}

#[derive(Clone, Debug)]
pub struct Groupoid {
    objects: Vec<String>,
    arrows: Vec<String>,
    object_index: HashMap<String, usize>,
    arrow_index: HashMap<String, usize>,
    src: Vec<usize>,
    tgt: Vec<usize>,
    comp: HashMap<(usize, usize), usize>,
    unit: Vec<usize>,
    neg: Vec<usize>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
    topology: Option<GroupoidTopology>,
}

fn name_index(kind: &'static str, names: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if index.insert(n.clone(), i).is_some() {
            return Err(Error::Structure(format!("duplicate {kind} `{n}`")));
        }
    }
    Ok(index)
}

impl Groupoid {
    /// Builds a groupoid from index tables. Identities are the idempotent
    /// loops; negatives are looked up from the table. Axioms are not
    /// checked here, see [`Groupoid::check`].
    pub fn from_table(
        objects: Vec<String>,
        arrows: Vec<String>,
        src: Vec<usize>,
        tgt: Vec<usize>,
        comp: HashMap<(usize, usize), usize>,
    ) -> Result<Self> {
        let object_index = name_index("object", &objects)?;
        let arrow_index = name_index("arrow", &arrows)?;
        if src.len() != arrows.len() || tgt.len() != arrows.len() {
            return Err(Error::Structure("source/target tables do not cover the arrows".into()));
        }
        if let Some(&x) = src.iter().chain(&tgt).find(|&&x| x >= objects.len()) {
            return Err(Error::Structure(format!("arrow foot #{x} is not an object")));
        }
        if let Some((&(a, b), &c)) = comp.iter().find(|(&(a, b), &c)| a.max(b).max(c) >= arrows.len()) {
            return Err(Error::Structure(format!("composition entry ({a}, {b}) -> {c} is out of range")));
        }
        let mut outgoing = vec![Vec::new(); objects.len()];
        let mut incoming = vec![Vec::new(); objects.len()];
        for a in 0..arrows.len() {
            outgoing[src[a]].push(a);
            incoming[tgt[a]].push(a);
        }
        let mut unit = Vec::with_capacity(objects.len());
        for x in 0..objects.len() {
            let e = outgoing[x]
                .iter()
                .copied()
                .find(|&e| tgt[e] == x && comp.get(&(e, e)) == Some(&e))
                .ok_or_else(|| Error::Structure(format!("no identity at object `{}`", objects[x])))?;
            unit.push(e);
        }
        let neg = (0..arrows.len())
            .map(|a| {
                outgoing[tgt[a]]
                    .iter()
                    .copied()
                    .find(|&b| {
                        tgt[b] == src[a]
                            && comp.get(&(a, b)) == Some(&unit[src[a]])
                            && comp.get(&(b, a)) == Some(&unit[tgt[a]])
                    })
                    .unwrap_or(a)
            })
            .collect();
        Ok(Self {
            objects,
            arrows,
            object_index,
            arrow_index,
            src,
            tgt,
            comp,
            unit,
            neg,
            outgoing,
            incoming,
            topology: None,
        })
    }

    /// Builds a groupoid whose composition is given by `add` on every
    /// composable pair.
    pub fn from_fn(
        objects: Vec<String>,
        arrows: Vec<String>,
        src: Vec<usize>,
        tgt: Vec<usize>,
        mut add: impl FnMut(usize, usize) -> Option<usize>,
    ) -> Result<Self> {
        let mut comp = HashMap::new();
        for a in 0..arrows.len() {
            for b in 0..arrows.len() {
                if tgt.get(a) == src.get(b) {
                    let c = add(a, b).ok_or_else(|| {
                        Error::Structure(format!("composite of `{}` and `{}` is missing", arrows[a], arrows[b]))
                    })?;
                    comp.insert((a, b), c);
                }
            }
        }
        Self::from_table(objects, arrows, src, tgt, comp)
    }

    /// One-object cyclic group Z/n with arrows named `0..n`.
    pub fn cyclic(object: &str, n: usize) -> Self {
        Self::from_fn(
            vec![object.to_string()],
            (0..n).map(|k| k.to_string()).collect(),
            vec![0; n],
            vec![0; n],
            |a, b| Some((a + b) % n),
        )
        .expect("cyclic group tables are well formed")
    }

    /// Totally intransitive groupoid with a copy of Z/n at each object;
    /// arrows are named `x:k`.
    pub fn bundle(objects: &[&str], n: usize) -> Self {
        let m = objects.len();
        let arrows = (0..m).flat_map(|x| (0..n).map(move |k| (x, k))).collect::<Vec<_>>();
        Self::from_fn(
            objects.iter().map(|s| s.to_string()).collect(),
            arrows.iter().map(|&(x, k)| format!("{}:{k}", objects[x])).collect(),
            arrows.iter().map(|&(x, _)| x).collect(),
            arrows.iter().map(|&(x, _)| x).collect(),
            |a, b| Some(arrows[a].0 * n + (arrows[a].1 + arrows[b].1) % n),
        )
        .expect("bundle tables are well formed")
    }

    /// The pair groupoid: one arrow `x>y` for each ordered pair of objects.
    pub fn pair(objects: &[&str]) -> Self {
        let m = objects.len();
        Self::from_fn(
            objects.iter().map(|s| s.to_string()).collect(),
            (0..m * m).map(|i| format!("{}>{}", objects[i / m], objects[i % m])).collect(),
            (0..m * m).map(|i| i / m).collect(),
            (0..m * m).map(|i| i % m).collect(),
            |a, b| Some((a / m) * m + b % m),
        )
        .expect("pair groupoid tables are well formed")
    }

    /// Groupoid with one transitive component per entry. Each component
    /// lists its objects and permutations generating its vertex group.
    /// Group elements are numbered in breadth-first order from the identity
    /// and arrows are named `x.k` (one object) or `x.k.y`.
    pub fn from_presentation(components: &[(Vec<String>, Vec<Vec<usize>>)]) -> Result<Self> {
        let mut objects = Vec::new();
        let mut arrows = Vec::new();
        let mut src = Vec::new();
        let mut tgt = Vec::new();
        // per arrow: (component, group element)
        let mut data = Vec::new();
        let mut tables = Vec::new();
        for (ci, (objs, gens)) in components.iter().enumerate() {
            let degree = gens.first().map_or(0, Vec::len);
            for g in gens {
                let mut seen = vec![false; degree];
                if g.len() != degree || g.iter().any(|&i| i >= degree || std::mem::replace(&mut seen[i], true)) {
                    return Err(Error::Structure(format!("generator {g:?} is not a permutation of degree {degree}")));
                }
            }
            let (_, mult) = permutation_group(degree, gens);
            let order = mult.len();
            let base = objects.len();
            objects.extend(objs.iter().cloned());
            for (i, x) in objs.iter().enumerate() {
                for (j, y) in objs.iter().enumerate() {
                    for k in 0..order {
                        arrows.push(if objs.len() == 1 { format!("{x}.{k}") } else { format!("{x}.{k}.{y}") });
                        src.push(base + i);
                        tgt.push(base + j);
                        data.push((ci, k));
                    }
                }
            }
            tables.push(mult);
        }
        let index: HashMap<(usize, usize, usize), usize> =
            (0..arrows.len()).map(|a| ((src[a], data[a].1, tgt[a]), a)).collect();
        let s2 = src.clone();
        let t2 = tgt.clone();
        Self::from_fn(objects, arrows, src, tgt, |a, b| {
            let (ci, g) = data[a];
            let h = data[b].1;
            index.get(&(s2[a], tables[ci][g][h], t2[b])).copied()
        })
    }

    pub fn with_topology(mut self, arrows: &FiniteTopSpace, objects: &FiniteTopSpace) -> Result<Self> {
        self.topology = Some(GroupoidTopology {
            arrows: arrows.reindexed(&self.arrows)?,
            objects: objects.reindexed(&self.objects)?,
        });
        Ok(self)
    }

    pub fn with_discrete_topology(self) -> Self {
        self.with_uniform_topology(true)
    }

    pub fn with_indiscrete_topology(self) -> Self {
        self.with_uniform_topology(false)
    }

    fn with_uniform_topology(mut self, discrete: bool) -> Self {
        let arrows = FiniteTopSpace::uniform(self.arrows.clone(), discrete, usize::MAX);
        let objects = FiniteTopSpace::uniform(self.objects.clone(), discrete, usize::MAX);
        self.topology = Some(GroupoidTopology {
            arrows: arrows.expect("names are unique"),
            objects: objects.expect("names are unique"),
        });
        self
    }

    pub fn without_topology(mut self) -> Self {
        self.topology = None;
        self
    }

    pub fn topology(&self) -> Option<&GroupoidTopology> {
        self.topology.as_ref()
    }

    /// Arrow topology, or the discrete one when untopologized.
    pub fn arrow_space(&self) -> FiniteTopSpace {
        match &self.topology {
            Some(t) => t.arrows.clone(),
            None => FiniteTopSpace::uniform(self.arrows.clone(), true, usize::MAX).expect("names are unique"),
        }
    }

    /// Object topology, or the discrete one when untopologized.
    pub fn object_space(&self) -> FiniteTopSpace {
        match &self.topology {
            Some(t) => t.objects.clone(),
            None => FiniteTopSpace::uniform(self.objects.clone(), true, usize::MAX).expect("names are unique"),
        }
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn arrows(&self) -> &[String] {
        &self.arrows
    }

    pub fn object_name(&self, x: usize) -> &str {
        &self.objects[x]
    }

    pub fn arrow_name(&self, a: usize) -> &str {
        &self.arrows[a]
    }

    pub fn object(&self, name: &str) -> Result<usize> {
        self.object_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownName { kind: "object", name: name.to_string() })
    }

    pub fn arrow(&self, name: &str) -> Result<usize> {
        self.arrow_index.get(name).copied().ok_or_else(|| Error::UnknownName { kind: "arrow", name: name.to_string() })
    }

    /// Source α.
    pub fn src(&self, a: usize) -> usize {
        self.src[a]
    }

    /// Target β.
    pub fn tgt(&self, a: usize) -> usize {
        self.tgt[a]
    }

    pub fn unit(&self, x: usize) -> usize {
        self.unit[x]
    }

    pub fn neg(&self, a: usize) -> usize {
        self.neg[a]
    }

    pub fn is_unit(&self, a: usize) -> bool {
        self.unit[self.src[a]] == a
    }

    pub fn is_loop(&self, a: usize) -> bool {
        self.src[a] == self.tgt[a]
    }

    /// `a + b`, when defined.
    pub fn add(&self, a: usize, b: usize) -> Option<usize> {
        self.comp.get(&(a, b)).copied()
    }

    /// `a + b`, with an error naming the edges when they do not match.
    pub fn try_add(&self, a: usize, b: usize) -> Result<usize> {
        self.add(a, b).ok_or_else(|| {
            Error::EdgeMismatch(
                format!("target of `{}` is `{}`", self.arrows[a], self.objects[self.tgt[a]]),
                format!("source of `{}` is `{}`", self.arrows[b], self.objects[self.src[b]]),
            )
        })
    }

    /// `a - b = a + (-b)`, defined when both have the same target.
    pub fn sub(&self, a: usize, b: usize) -> Option<usize> {
        self.add(a, self.neg[b])
    }

    /// Left-to-right sum of a non-empty composable word.
    pub fn sum(&self, word: &[usize]) -> Option<usize> {
        let (&first, rest) = word.split_first()?;
        rest.iter().try_fold(first, |acc, &b| self.add(acc, b))
    }

    pub fn outgoing(&self, x: usize) -> &[usize] {
        &self.outgoing[x]
    }

    pub fn incoming(&self, x: usize) -> &[usize] {
        &self.incoming[x]
    }

    pub fn hom(&self, x: usize, y: usize) -> impl Iterator<Item = usize> + '_ {
        self.outgoing[x].iter().copied().filter(move |&a| self.tgt[a] == y)
    }

    pub fn is_totally_intransitive(&self) -> bool {
        (0..self.arrows.len()).all(|a| self.is_loop(a))
    }

    pub fn is_discrete(&self) -> bool {
        (0..self.arrows.len()).all(|a| self.is_unit(a))
    }

    pub fn arrow_set(&self, members: impl IntoIterator<Item = usize>) -> FixedBitSet {
        point_set(self.arrows.len(), members)
    }

    pub fn units(&self) -> FixedBitSet {
        self.arrow_set(self.unit.iter().copied())
    }

    pub fn composition_entries(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let mut v: Vec<_> = self.comp.iter().map(|(&(a, b), &c)| (a, b, c)).collect();
        v.sort_unstable();
        v.into_iter()
    }

    /// Every violated axiom instance; empty means valid.
    pub fn check(&self) -> Vec<Violation> {
        let n = self.arrows.len();
        let name = |a: usize| self.arrows[a].as_str();
        let mut out = Vec::new();
        for (a, b, c) in self.composition_entries() {
            if self.tgt[a] != self.src[b] {
                out.push(Violation::new("composition domain", [name(a), name(b)]));
            } else if self.src[c] != self.src[a] || self.tgt[c] != self.tgt[b] {
                out.push(Violation::new("composition feet", [name(a), name(b), name(c)]));
            }
        }
        for a in 0..n {
            for &b in &self.outgoing[self.tgt[a]] {
                if self.add(a, b).is_none() {
                    out.push(Violation::new("composition total", [name(a), name(b)]));
                }
            }
        }
        for a in 0..n {
            for &b in &self.outgoing[self.tgt[a]] {
                let Some(ab) = self.add(a, b) else { continue };
                for &c in &self.outgoing[self.tgt[b]] {
                    let left = self.add(ab, c);
                    let right = self.add(b, c).and_then(|bc| self.add(a, bc));
                    if left != right {
                        out.push(Violation::new("associativity", [name(a), name(b), name(c)]));
                    }
                }
            }
        }
        for a in 0..n {
            if self.add(self.unit[self.src[a]], a) != Some(a) || self.add(a, self.unit[self.tgt[a]]) != Some(a) {
                out.push(Violation::new("units", [name(a)]));
            }
            let m = self.neg[a];
            if self.add(a, m) != Some(self.unit[self.src[a]]) || self.add(m, a) != Some(self.unit[self.tgt[a]]) {
                out.push(Violation::new("negatives", [name(a)]));
            }
        }
        if let Some(t) = &self.topology {
            out.extend(self.check_continuity(t));
        }
        out
    }

    fn check_continuity(&self, t: &GroupoidTopology) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut report = |rule: &str, w: Option<(String, String)>| {
            if let Some((p, q)) = w {
                out.push(Violation::new(rule, [p, q]));
            }
        };
        let arrow_names = |w: Option<(usize, usize)>| w.map(|(p, q)| (self.arrows[p].clone(), self.arrows[q].clone()));
        let alpha = PartialMap::new(self.src.iter().map(|&x| Some(x)).collect());
        let beta = PartialMap::new(self.tgt.iter().map(|&x| Some(x)).collect());
        report("alpha continuous", arrow_names(fintop::continuity_witness(&alpha, &t.arrows, &t.objects)));
        report("beta continuous", arrow_names(fintop::continuity_witness(&beta, &t.arrows, &t.objects)));
        let eps = PartialMap::new(self.unit.iter().map(|&e| Some(e)).collect());
        report(
            "unit continuous",
            fintop::continuity_witness(&eps, &t.objects, &t.arrows)
                .map(|(p, q)| (self.objects[p].clone(), self.objects[q].clone())),
        );
        let (pairs, space) = self.same_target_pairs();
        let diff = PartialMap::new(pairs.iter().map(|&(a, b)| self.sub(a, b)).collect());
        report(
            "difference continuous",
            fintop::continuity_witness(&diff, &space, &t.arrows)
                .map(|(p, q)| (space.name(p).into(), space.name(q).into())),
        );
        out
    }

    /// The pullback of β along β, as pairs with their subspace topology.
    pub fn same_target_pairs(&self) -> (Vec<(usize, usize)>, FiniteTopSpace) {
        let pairs: Vec<(usize, usize)> =
            (0..self.arrows.len()).flat_map(|a| self.incoming[self.tgt[a]].iter().map(move |&b| (a, b))).collect();
        let space = self.arrow_space();
        let topo = FiniteTopSpace::product_subspace(
            pairs.iter().map(|&(a, b)| format!("({},{})", self.arrows[a], self.arrows[b])).collect(),
            &pairs.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>(),
            &[&space, &space],
        );
        (pairs, topo)
    }

    /// Least subgroupoid containing `seed` and every identity.
    pub fn generated_subgroupoid(&self, seed: &FixedBitSet) -> FixedBitSet {
        let mut set = self.units();
        let mut queue: VecDeque<usize> = VecDeque::new();
        let push = |set: &mut FixedBitSet, queue: &mut VecDeque<usize>, a: usize| {
            if !set.put(a) {
                queue.push_back(a);
            }
        };
        for a in seed.ones() {
            push(&mut set, &mut queue, a);
        }
        while let Some(a) = queue.pop_front() {
            push(&mut set, &mut queue, self.neg[a]);
            let after: Vec<usize> = self.outgoing[self.tgt[a]].iter().copied().filter(|&b| set.contains(b)).collect();
            for b in after {
                push(&mut set, &mut queue, self.comp[&(a, b)]);
            }
            let before: Vec<usize> = self.incoming[self.src[a]].iter().copied().filter(|&b| set.contains(b)).collect();
            for b in before {
                push(&mut set, &mut queue, self.comp[&(b, a)]);
            }
        }
        set
    }

    /// The subgroupoid on a closed arrow subset, over the same objects,
    /// with the map from new arrow indices to old ones.
    pub fn subgroupoid(&self, arrows: &FixedBitSet) -> Result<(Groupoid, Vec<usize>)> {
        let keep: Vec<usize> = arrows.ones().collect();
        let mut new_index = vec![usize::MAX; self.arrows.len()];
        for (i, &a) in keep.iter().enumerate() {
            new_index[a] = i;
        }
        let closed = |a: usize| arrows.contains(a);
        if let Some(x) = (0..self.objects.len()).find(|&x| !closed(self.unit[x])) {
            return Err(Error::Structure(format!("identity at `{}` missing from subgroupoid", self.objects[x])));
        }
        let g = Groupoid::from_fn(
            self.objects.clone(),
            keep.iter().map(|&a| self.arrows[a].clone()).collect(),
            keep.iter().map(|&a| self.src[a]).collect(),
            keep.iter().map(|&a| self.tgt[a]).collect(),
            |i, j| self.add(keep[i], keep[j]).filter(|&c| closed(c)).map(|c| new_index[c]),
        )?;
        Ok((g, keep))
    }
}

/// Closure of a set of permutations under composition, with the element
/// list and multiplication table (`mult[g][h]` = apply `g` then `h`).
fn permutation_group(degree: usize, gens: &[Vec<usize>]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let identity: Vec<usize> = (0..degree).collect();
    let mut elements = vec![identity.clone()];
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(identity, 0)]);
    let mut i = 0;
    while i < elements.len() {
        for g in gens {
            let next: Vec<usize> = elements[i].iter().map(|&p| g[p]).collect();
            if !index.contains_key(&next) {
                index.insert(next.clone(), elements.len());
                elements.push(next);
            }
        }
        i += 1;
    }
    let mult = elements
        .iter()
        .map(|g| elements.iter().map(|h| index[&g.iter().map(|&p| h[p]).collect::<Vec<_>>()]).collect())
        .collect();
    (elements, mult)
}

/// Object and arrow maps between two groupoids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupoidMorphism {
    pub objects: Vec<usize>,
    pub arrows: Vec<usize>,
}

impl GroupoidMorphism {
    pub fn identity(g: &Groupoid) -> Self {
        Self { objects: (0..g.num_objects()).collect(), arrows: (0..g.num_arrows()).collect() }
    }

    /// Violations of source, target, identity and sum preservation.
    pub fn check(&self, from: &Groupoid, to: &Groupoid) -> Vec<Violation> {
        let mut out = Vec::new();
        let an = |a: usize| from.arrow_name(a).to_string();
        for a in 0..from.num_arrows() {
            let fa = self.arrows[a];
            if to.src(fa) != self.objects[from.src(a)] || to.tgt(fa) != self.objects[from.tgt(a)] {
                out.push(Violation::new("morphism feet", [an(a)]));
            }
        }
        for x in 0..from.num_objects() {
            if self.arrows[from.unit(x)] != to.unit(self.objects[x]) {
                out.push(Violation::new("morphism identities", [from.object_name(x)]));
            }
        }
        for (a, b, c) in from.composition_entries() {
            if to.add(self.arrows[a], self.arrows[b]) != Some(self.arrows[c]) {
                out.push(Violation::new("morphism sums", [an(a), an(b)]));
            }
        }
        out
    }

    pub fn is_bijective(&self, to: &Groupoid) -> bool {
        is_bijection(&self.objects, to.num_objects()) && is_bijection(&self.arrows, to.num_arrows())
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &GroupoidMorphism) -> GroupoidMorphism {
        GroupoidMorphism {
            objects: self.objects.iter().map(|&x| other.objects[x]).collect(),
            arrows: self.arrows.iter().map(|&a| other.arrows[a]).collect(),
        }
    }
}

pub fn is_bijection(map: &[usize], codomain: usize) -> bool {
    map.len() == codomain && {
        let mut seen = vec![false; codomain];
        map.iter().all(|&v| v < codomain && !std::mem::replace(&mut seen[v], true))
    }
}

/// Constraints for [`search_morphisms`].
pub struct MorphismSearch<'a> {
    /// Fixed object map; all maps (bijections if `injective`) are tried otherwise.
    pub objects: Option<&'a [usize]>,
    /// `allowed(a, b)` must hold for every assignment `a ↦ b`.
    pub allowed: &'a dyn Fn(usize, usize) -> bool,
    pub injective: bool,
}

/// Enumerates groupoid morphisms `from → to` satisfying `spec`, calling
/// `visit` on each; stops early when `visit` returns `true`. Returns whether
/// it stopped early.
pub fn search_morphisms(
    from: &Groupoid,
    to: &Groupoid,
    spec: &MorphismSearch<'_>,
    visit: &mut dyn FnMut(&GroupoidMorphism) -> bool,
) -> bool {
    if spec.injective && (from.num_objects() != to.num_objects() || from.num_arrows() != to.num_arrows()) {
        return false;
    }
    match spec.objects {
        Some(f0) => search_arrows(from, to, spec, f0, visit),
        None => {
            let mut f0 = Vec::with_capacity(from.num_objects());
            let mut used = vec![false; to.num_objects()];
            search_objects(from, to, spec, &mut f0, &mut used, visit)
        }
    }
}

fn search_objects(
    from: &Groupoid,
    to: &Groupoid,
    spec: &MorphismSearch<'_>,
    f0: &mut Vec<usize>,
    used: &mut [bool],
    visit: &mut dyn FnMut(&GroupoidMorphism) -> bool,
) -> bool {
    let x = f0.len();
    if x == from.num_objects() {
        return search_arrows(from, to, spec, f0, visit);
    }
    for y in 0..to.num_objects() {
        if spec.injective && used[y] {
            continue;
        }
        // hom-set sizes must match for bijections
        let consistent = (0..x).chain([x]).all(|z| {
            let fz = if z == x { y } else { f0[z] };
            !spec.injective
                || (from.hom(x, z).count() == to.hom(y, fz).count() && from.hom(z, x).count() == to.hom(fz, y).count())
        });
        if !consistent {
            continue;
        }
        used[y] = true;
        f0.push(y);
        if search_objects(from, to, spec, f0, used, visit) {
            return true;
        }
        f0.pop();
        used[y] = false;
    }
    false
}

struct Assignment {
    map: Vec<Option<usize>>,
    used: Vec<bool>,
}

impl Assignment {
    /// Assigns `a ↦ b` and closes under sums and negatives with the
    /// arrows already assigned. Returns false on a conflict.
    fn assign(&mut self, from: &Groupoid, to: &Groupoid, spec: &MorphismSearch<'_>, a: usize, b: usize) -> bool {
        let mut queue = VecDeque::from([(a, b)]);
        while let Some((a, b)) = queue.pop_front() {
            match self.map[a] {
                Some(old) if old == b => continue,
                Some(_) => return false,
                None => {}
            }
            if !(spec.allowed)(a, b) || (spec.injective && self.used[b]) {
                return false;
            }
            self.map[a] = Some(b);
            self.used[b] = true;
            queue.push_back((from.neg(a), to.neg(b)));
            for &c in from.outgoing(from.tgt(a)) {
                if let Some(fc) = self.map[c] {
                    match to.add(b, fc) {
                        Some(s) => queue.push_back((from.add(a, c).expect("composable"), s)),
                        None => return false,
                    }
                }
            }
            for &c in from.incoming(from.src(a)) {
                if let Some(fc) = self.map[c] {
                    match to.add(fc, b) {
                        Some(s) => queue.push_back((from.add(c, a).expect("composable"), s)),
                        None => return false,
                    }
                }
            }
        }
        true
    }
}

fn search_arrows(
    from: &Groupoid,
    to: &Groupoid,
    spec: &MorphismSearch<'_>,
    f0: &[usize],
    visit: &mut dyn FnMut(&GroupoidMorphism) -> bool,
) -> bool {
    let mut start = Assignment { map: vec![None; from.num_arrows()], used: vec![false; to.num_arrows()] };
    for x in 0..from.num_objects() {
        if !start.assign(from, to, spec, from.unit(x), to.unit(f0[x])) {
            return false;
        }
    }
    fn go(
        from: &Groupoid,
        to: &Groupoid,
        spec: &MorphismSearch<'_>,
        f0: &[usize],
        state: Assignment,
        visit: &mut dyn FnMut(&GroupoidMorphism) -> bool,
    ) -> bool {
        let Some(a) = state.map.iter().position(Option::is_none) else {
            let m = GroupoidMorphism { objects: f0.to_vec(), arrows: state.map.iter().map(|v| v.unwrap()).collect() };
            return m.check(from, to).is_empty() && visit(&m);
        };
        let candidates: Vec<usize> = to.hom(f0[from.src(a)], f0[from.tgt(a)]).collect();
        for b in candidates {
            let mut next = Assignment { map: state.map.clone(), used: state.used.clone() };
            if next.assign(from, to, spec, a, b) && go(from, to, spec, f0, next, visit) {
                return true;
            }
        }
        false
    }
    go(from, to, spec, f0, start, visit)
}

/// Some isomorphism `g → h`, if one exists.
pub fn find_isomorphism(g: &Groupoid, h: &Groupoid) -> Option<GroupoidMorphism> {
    let mut found = None;
    let spec = MorphismSearch { objects: None, allowed: &|_, _| true, injective: true };
    search_morphisms(g, h, &spec, &mut |m| {
        found = Some(m.clone());
        true
    });
    found
}

/// A wide subgroupoid of loops that is stable under conjugation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalSubgroupoid {
    arrows: FixedBitSet,
}

impl NormalSubgroupoid {
    /// Verifies every defining property and reports the first failure.
    pub fn new(parent: &Groupoid, arrows: FixedBitSet) -> Result<Self> {
        let name = |a: usize| parent.arrow_name(a);
        for x in 0..parent.num_objects() {
            if !arrows.contains(parent.unit(x)) {
                return Err(Error::NotNormal(format!("not wide: identity at `{}` missing", parent.object_name(x))));
            }
        }
        for n in arrows.ones() {
            if !parent.is_loop(n) {
                return Err(Error::NotNormal(format!("`{}` is not a loop", name(n))));
            }
            if !arrows.contains(parent.neg(n)) {
                return Err(Error::NotNormal(format!("not closed under negatives at `{}`", name(n))));
            }
            for &m in parent.outgoing(parent.tgt(n)) {
                if arrows.contains(m) && !arrows.contains(parent.add(n, m).expect("composable")) {
                    return Err(Error::NotNormal(format!("`{}` + `{}` is missing", name(n), name(m))));
                }
            }
            for &g in parent.outgoing(parent.src(n)) {
                let conj = parent.sum(&[parent.neg(g), n, g]).expect("composable");
                if !arrows.contains(conj) {
                    return Err(Error::NotNormal(format!(
                        "conjugate -{g} + {n} + {g} = {c} is missing",
                        g = name(g),
                        n = name(n),
                        c = name(conj)
                    )));
                }
            }
        }
        Ok(Self { arrows })
    }

    pub fn arrows(&self) -> &FixedBitSet {
        &self.arrows
    }

    pub fn contains(&self, a: usize) -> bool {
        self.arrows.contains(a)
    }
}

/// A quotient groupoid with its projection and the classes of arrows.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub groupoid: Groupoid,
    pub projection: GroupoidMorphism,
    pub classes: Vec<Vec<usize>>,
}

/// Quotient by the relation `a ~ n₁ + a + n₂` with `n₁, n₂` in `n`. The
/// composition of classes is checked to be independent of representatives
/// and the kernel of the projection is checked to be `n`.
pub fn quotient(g: &Groupoid, n: &NormalSubgroupoid) -> Result<Quotient> {
    let count = g.num_arrows();
    let mut parent: Vec<usize> = (0..count).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for a in 0..count {
        for &m in g.outgoing(g.tgt(a)) {
            if n.contains(m) {
                let b = g.add(a, m).expect("composable");
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        for &m in g.incoming(g.src(a)) {
            if n.contains(m) {
                let b = g.add(m, a).expect("composable");
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut class_of = vec![usize::MAX; count];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut rep_class: HashMap<usize, usize> = HashMap::new();
    for a in 0..count {
        let r = find(&mut parent, a);
        let k = *rep_class.entry(r).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[k].push(a);
        class_of[a] = k;
    }
    let reps: Vec<usize> = classes.iter().map(|c| c[0]).collect();
    let mut comp = HashMap::new();
    for (a, b, c) in g.composition_entries() {
        let key = (class_of[a], class_of[b]);
        match comp.insert(key, class_of[c]) {
            Some(prev) if prev != class_of[c] => {
                return Err(Error::NotNormal(format!(
                    "class sum depends on representatives at `{}` + `{}`",
                    g.arrow_name(a),
                    g.arrow_name(b)
                )))
            }
            _ => {}
        }
    }
    let groupoid = Groupoid::from_table(
        g.objects().to_vec(),
        reps.iter().map(|&r| format!("[{}]", g.arrow_name(r))).collect(),
        reps.iter().map(|&r| g.src(r)).collect(),
        reps.iter().map(|&r| g.tgt(r)).collect(),
        comp,
    )?;
    let projection = GroupoidMorphism { objects: (0..g.num_objects()).collect(), arrows: class_of };
    for a in 0..count {
        if groupoid.is_unit(projection.arrows[a]) != n.contains(a) {
            return Err(Error::NotNormal(format!("kernel differs from the subgroupoid at `{}`", g.arrow_name(a))));
        }
    }
    Ok(Quotient { groupoid, projection, classes })
}
