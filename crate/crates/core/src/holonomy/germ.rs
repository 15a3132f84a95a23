//! Germs of local sections at arrows of `G`, the germ groupoid `J`, its
//! subgroupoid `J^r`, the final map `ψ` and the kernel part `J₀`.

use std::collections::{BTreeSet, HashMap};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::fintop::point_set;
use crate::groupoid::{Groupoid, GroupoidMorphism, NormalSubgroupoid};

use super::section::{Frame, LocalSection};

/// A germ `[s]_a`, stored as the restriction of `s` to the minimal open of
/// `a`: pairs `(z, square)` in increasing `z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Germ {
    pub base: usize,
    pub values: Vec<(usize, usize)>,
}

impl Germ {
    /// The square at the base arrow, `ψ([s]_a) = s(a)`.
    pub fn value(&self) -> usize {
        self.lookup(self.base).expect("germ contains its base")
    }

    pub fn lookup(&self, z: usize) -> Option<usize> {
        self.values.binary_search_by_key(&z, |p| p.0).ok().map(|i| self.values[i].1)
    }

    /// `f1(a)`, the source of the germ in `J`.
    pub fn source(&self, fr: &Frame) -> usize {
        fr.sq(self.value()).top
    }
}

impl LocalSection {
    /// `[s]_a`; `a` must lie in the arrow domain.
    pub fn germ_at(&self, fr: &Frame, a: usize) -> Result<Germ> {
        if self.value(a).is_none() {
            return Err(Error::OutsideDomain(fr.xmod().g().arrow_name(a).to_string()));
        }
        let values = fr
            .edge_space()
            .min_open(a)
            .ones()
            .map(|z| self.value(z).map(|u| (z, u)).ok_or(Error::DomainNotOpen))
            .collect::<Result<_>>()?;
        Ok(Germ { base: a, values })
    }
}

/// `[s]_{f1 a} [t]_a = [s * t]_a`, computed from the two germs alone.
pub fn germ_mul(fr: &Frame, x: &Germ, y: &Germ) -> Option<Germ> {
    if x.base != y.source(fr) {
        return None;
    }
    let values = y
        .values
        .iter()
        .map(|&(z, v)| {
            let u = x.lookup(fr.sq(v).top)?;
            fr.dg().compose1(u, v).map(|r| (z, r))
        })
        .collect::<Option<_>>()?;
    Some(Germ { base: y.base, values })
}

/// `[s]_a⁻¹ = [s⁻¹]_{f1 a}`.
pub fn germ_inv(fr: &Frame, y: &Germ) -> Option<Germ> {
    let base = y.source(fr);
    let values = fr
        .edge_space()
        .min_open(base)
        .ones()
        .map(|z| y.values.iter().find(|&&(_, v)| fr.sq(v).top == z).map(|&(_, v)| (z, fr.dg().neg1(v))))
        .collect::<Option<_>>()?;
    Some(Germ { base, values })
}

/// Germ equivalence by its definition: some open `V` with `a ∈ V` inside
/// both domains on which the sections agree.
pub fn agree_near(fr: &Frame, s: &LocalSection, t: &LocalSection, a: usize) -> Option<bool> {
    let opens = fr.edge_space().opens()?;
    let (us, ut) = (s.u1(), t.u1());
    Some(
        opens.iter().any(|v| {
            v.contains(a) && v.is_subset(&us) && v.is_subset(&ut) && v.ones().all(|z| s.value(z) == t.value(z))
        }),
    )
}

/// A groupoid of germs over the arrows of `G`, with `α[s]_a = f1(a)` and
/// `β[s]_a = a`.
#[derive(Clone, Debug)]
pub struct GermGroupoid {
    germs: Vec<Germ>,
    index: HashMap<Germ, usize>,
    groupoid: Groupoid,
}

impl GermGroupoid {
    /// Closure of `seeds` and the germs of the constant section under
    /// products and inverses.
    pub fn generate(fr: &Frame, seeds: impl IntoIterator<Item = Germ>) -> Result<Self> {
        let unit = LocalSection::constant(fr);
        let mut set: BTreeSet<Germ> = (0..fr.edge_space().len()).map(|a| unit.germ_at(fr, a)).collect::<Result<_>>()?;
        set.extend(seeds);
        let mut by_base: HashMap<usize, Vec<Germ>> = HashMap::new();
        for g in &set {
            by_base.entry(g.base).or_default().push(g.clone());
        }
        let mut frontier: Vec<Germ> = set.iter().cloned().collect();
        while let Some(y) = frontier.pop() {
            let mut fresh = Vec::new();
            fresh.extend(germ_inv(fr, &y));
            for x in by_base.get(&y.source(fr)).cloned().unwrap_or_default() {
                fresh.extend(germ_mul(fr, &x, &y));
            }
            let targets: Vec<Germ> = set.iter().filter(|z| z.source(fr) == y.base).cloned().collect();
            for z in targets {
                fresh.extend(germ_mul(fr, &y, &z));
            }
            for f in fresh {
                if set.insert(f.clone()) {
                    by_base.entry(f.base).or_default().push(f.clone());
                    frontier.push(f);
                }
            }
        }
        Self::from_germs(fr, set.into_iter().collect())
    }

    /// The groupoid on an already closed germ set, sorted by base and value.
    fn from_germs(fr: &Frame, mut germs: Vec<Germ>) -> Result<Self> {
        germs.sort();
        let g = fr.xmod().g();
        let mut names = Vec::with_capacity(germs.len());
        let mut rank = HashMap::new();
        for germ in &germs {
            let k = rank.entry(germ.base).or_insert(0usize);
            names.push(format!("{}#{}", g.arrow_name(germ.base), k));
            *k += 1;
        }
        let index: HashMap<Germ, usize> = germs.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
        let groupoid = Groupoid::from_fn(
            g.arrows().to_vec(),
            names,
            germs.iter().map(|x| x.source(fr)).collect(),
            germs.iter().map(|x| x.base).collect(),
            |i, j| germ_mul(fr, &germs[i], &germs[j]).and_then(|r| index.get(&r).copied()),
        )?;
        Ok(Self { germs, index, groupoid })
    }

    /// The subgroupoid generated by `seeds`, which must be germs of `self`.
    pub fn generated_by(&self, fr: &Frame, seeds: impl IntoIterator<Item = Germ>) -> Result<Self> {
        let mut seed = FixedBitSet::with_capacity(self.germs.len());
        for s in seeds {
            let i = self.index_of(&s).ok_or_else(|| Error::Structure("seed germ outside the germ groupoid".into()))?;
            seed.insert(i);
        }
        let closed = self.groupoid.generated_subgroupoid(&seed);
        Self::from_germs(fr, closed.ones().map(|i| self.germs[i].clone()).collect())
    }

    pub fn groupoid(&self) -> &Groupoid {
        &self.groupoid
    }

    pub fn germs(&self) -> &[Germ] {
        &self.germs
    }

    pub fn germ(&self, i: usize) -> &Germ {
        &self.germs[i]
    }

    pub fn index_of(&self, germ: &Germ) -> Option<usize> {
        self.index.get(germ).copied()
    }

    pub fn len(&self) -> usize {
        self.germs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.germs.is_empty()
    }

    /// `ψ` into the vertical groupoid of squares.
    pub fn psi(&self) -> GroupoidMorphism {
        GroupoidMorphism {
            objects: (0..self.groupoid.num_objects()).collect(),
            arrows: self.germs.iter().map(Germ::value).collect(),
        }
    }

    pub fn describe(&self, fr: &Frame, i: usize) -> String {
        let g = fr.xmod().g();
        let parts: Vec<String> =
            self.germs[i].values.iter().map(|&(z, u)| format!("{}->{}", g.arrow_name(z), fr.dg().name(u))).collect();
        format!("{} = [{}]", self.groupoid.arrow_name(i), parts.join(", "))
    }
}

/// `J₀`: germs of `W^G`-valued sections whose value at the base is the
/// vertical identity, verified wide and normal in `jr`.
pub fn build_j0(fr: &Frame, jr: &GermGroupoid, wg_germs: &[Germ]) -> Result<NormalSubgroupoid> {
    let mut set = point_set(jr.len(), []);
    for x in wg_germs {
        if x.value() == fr.dg().eps1(x.base) {
            let i = jr.index_of(x).ok_or_else(|| Error::Structure("germ of a W^G section outside J^r".into()))?;
            set.insert(i);
        }
    }
    NormalSubgroupoid::new(jr.groupoid(), set)
}
