//! The standing corpus of small crossed modules used by tests, the
//! acceptance suite and the shipped scenario files.

use crate::fintop::{point_set, FiniteTopSpace};
use crate::groupoid::Groupoid;
use crate::xmod::CrossedModule;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topo {
    Discrete,
    Indiscrete,
}

impl Topo {
    pub fn label(self) -> &'static str {
        match self {
            Topo::Discrete => "discrete",
            Topo::Indiscrete => "indiscrete",
        }
    }

    fn apply(self, g: Groupoid) -> Groupoid {
        match self {
            Topo::Discrete => g.with_discrete_topology(),
            Topo::Indiscrete => g.with_indiscrete_topology(),
        }
    }
}

/// A crossed module together with a chosen subset `W` of `C` and its
/// topology.
#[derive(Clone, Debug)]
pub struct CorpusItem {
    pub name: String,
    pub xmod: CrossedModule,
    pub w: Vec<String>,
    pub w_topology: FiniteTopSpace,
}

impl CorpusItem {
    fn new(name: String, xmod: CrossedModule, w: &[&str]) -> Self {
        let c = xmod.c();
        let members = point_set(c.num_arrows(), w.iter().map(|n| c.arrow(n).expect("corpus names")));
        let w_topology = c.topology().expect("corpus items are topologized").arrows.subspace(&members);
        let w = w_topology.names().to_vec();
        Self { name, xmod, w, w_topology }
    }

    fn whole(name: String, xmod: CrossedModule) -> Self {
        let all: Vec<String> = xmod.c().arrows().to_vec();
        let refs: Vec<&str> = all.iter().map(String::as_str).collect();
        Self::new(name, xmod, &refs)
    }

    pub fn w_is_c(&self) -> bool {
        self.w.len() == self.xmod.c().num_arrows()
    }
}

fn identity_delta(c: &Groupoid, g: &Groupoid) -> Vec<usize> {
    (0..c.num_arrows()).map(|k| g.arrow(c.arrow_name(k)).expect("same names")).collect()
}

/// `G = C = Z/2` on one object, `δ` the identity, trivial action.
pub fn z2z2(topo: Topo) -> CrossedModule {
    let c = topo.apply(Groupoid::cyclic("x", 2));
    let g = topo.apply(Groupoid::cyclic("x", 2));
    let delta = identity_delta(&c, &g);
    CrossedModule::from_fn(c, g, delta, |k, _| k).expect("well formed")
}

/// Pair groupoid on `{x, y}` with trivial `C`.
pub fn pair2(topo: Topo) -> CrossedModule {
    pair_with(topo, 1, None)
}

/// Pair groupoid on `{x, y}` with `C(x) = C(y) = Z/2`, trivial boundary and
/// the transport action `(u:k)^(u>v) = v:k`.
pub fn pairz2(topo: Topo) -> CrossedModule {
    pair_with(topo, 2, None)
}

fn pair_with(topo: Topo, n: usize, sierpinski: Option<()>) -> CrossedModule {
    let mut g = Groupoid::pair(&["x", "y"]);
    let mut c = Groupoid::bundle(&["x", "y"], n);
    match sierpinski {
        Some(()) => {
            let (gt, ct, xt) = sierpinski_spaces(&g, &c);
            g = g.with_topology(&gt, &xt).expect("names match");
            c = c.with_topology(&ct, &xt).expect("names match");
        }
        None => {
            g = topo.apply(g);
            c = topo.apply(c);
        }
    }
    let delta = (0..c.num_arrows()).map(|k| g.unit(c.src(k))).collect();
    let c2 = c.clone();
    CrossedModule::from_fn(c, g.clone(), delta, |k, a| {
        let level = c2.arrow_name(k).split(':').nth(1).expect("bundle name").to_string();
        c2.arrow(&format!("{}:{level}", g.object_name(g.tgt(a)))).expect("bundle name")
    })
    .expect("well formed")
}

/// Topologies from the Sierpiński space on `{x, y}` (only `{x}` is a proper
/// open): `G` gets the product topology of `X × X`, and `C` that of
/// `X × discrete`.
fn sierpinski_spaces(g: &Groupoid, c: &Groupoid) -> (FiniteTopSpace, FiniteTopSpace, FiniteTopSpace) {
    let x = FiniteTopSpace::from_opens(vec!["x".into(), "y".into()], &[vec![], vec![0], vec![0, 1]], 2)
        .expect("Sierpiński space");
    let xs = &x;
    let gt = FiniteTopSpace::product_subspace(
        g.arrows().to_vec(),
        &(0..g.num_arrows()).map(|a| vec![g.src(a), g.tgt(a)]).collect::<Vec<_>>(),
        &[xs, xs],
    );
    let level: Vec<usize> = c.arrows().iter().map(|n| n.split(':').nth(1).unwrap().parse().unwrap()).collect();
    let levels =
        FiniteTopSpace::uniform((0..=*level.iter().max().unwrap()).map(|k| k.to_string()).collect(), true, usize::MAX)
            .expect("distinct levels");
    let ct = FiniteTopSpace::product_subspace(
        c.arrows().to_vec(),
        &(0..c.num_arrows()).map(|k| vec![c.src(k), level[k]]).collect::<Vec<_>>(),
        &[xs, &levels],
    );
    (gt, ct, x)
}

/// PAIRZ2 with the Sierpiński-derived topologies.
pub fn pairz2_sierpinski() -> CrossedModule {
    pair_with(Topo::Discrete, 2, Some(()))
}

/// `C = Z/4`, `G = Z/2` on one object, `δ` reduction mod 2, trivial action.
pub fn z4int(topo: Topo) -> CrossedModule {
    let c = topo.apply(Groupoid::cyclic("x", 4));
    let g = topo.apply(Groupoid::cyclic("x", 2));
    CrossedModule::from_fn(c, g, vec![0, 1, 0, 1], |k, _| k).expect("well formed")
}

/// Z2Z2 with the action `c^1 = c + 1`; CM2 fails at `c = 0, c₁ = 1`.
pub fn broken_cm2() -> CrossedModule {
    let c = Groupoid::cyclic("x", 2);
    let g = Groupoid::cyclic("x", 2);
    CrossedModule::from_fn(c, g, vec![0, 1], |k, a| (k + a) % 2).expect("well formed")
}

/// `C = G = Z/4`, `δ` the identity, action by sign `(-1)^a`; CM1 fails at
/// `c = 1, a = 1`.
pub fn broken_cm1() -> CrossedModule {
    let c = Groupoid::cyclic("x", 4);
    let g = Groupoid::cyclic("x", 4);
    CrossedModule::from_fn(c, g, vec![0, 1, 2, 3], |k, a| if a % 2 == 0 { k } else { (4 - k) % 4 })
        .expect("well formed")
}

/// PAIRZ2 whose action sends `x:k` along `x>y` to `y:0`, breaking
/// `c^(a+b) = (c^a)^b`.
pub fn broken_action() -> CrossedModule {
    let good = pairz2(Topo::Discrete);
    let (c, g) = (good.c().clone(), good.g().clone());
    let xy = g.arrow("x>y").unwrap();
    let y0 = c.arrow("y:0").unwrap();
    let delta = good.delta_table().to_vec();
    CrossedModule::from_fn(c, g, delta, |k, a| if a == xy { y0 } else { good.act(k, a).unwrap() }).expect("well formed")
}

/// The four crossed modules under one topology, each with `W = C`.
pub fn standard(topo: Topo) -> Vec<CorpusItem> {
    let l = topo.label();
    vec![
        CorpusItem::whole(format!("Z2Z2/{l}"), z2z2(topo)),
        CorpusItem::whole(format!("PAIR2/{l}"), pair2(topo)),
        CorpusItem::whole(format!("PAIRZ2/{l}"), pairz2(topo)),
        CorpusItem::whole(format!("Z4INT/{l}"), z4int(topo)),
    ]
}

/// Every item with `W = C`: both uniform topologies and the Sierpiński
/// variant.
pub fn with_whole_w() -> Vec<CorpusItem> {
    let mut v = standard(Topo::Discrete);
    v.extend(standard(Topo::Indiscrete));
    v.push(CorpusItem::whole("PAIRZ2/sierpinski".into(), pairz2_sierpinski()));
    v
}

/// The Z/4-interior item with `W = {0, 1, 3}`.
pub fn z4int_w013(topo: Topo) -> CorpusItem {
    CorpusItem::new(format!("Z4INT/{}/W013", topo.label()), z4int(topo), &["0", "1", "3"])
}

/// PAIRZ2 with `W` the identities only; `W` does not generate `C`.
pub fn pairz2_units_w(topo: Topo) -> CorpusItem {
    CorpusItem::new(format!("PAIRZ2/{}/Wunits", topo.label()), pairz2(topo), &["x:0", "y:0"])
}

/// Every `(C, W)` pair of the corpus.
pub fn all_items() -> Vec<CorpusItem> {
    let mut v = with_whole_w();
    for topo in [Topo::Discrete, Topo::Indiscrete] {
        v.push(z4int_w013(topo));
        v.push(pairz2_units_w(topo));
    }
    v
}
