//! The chosen neighbourhood `W ⊆ C` and the squares `W^G` with interior in
//! `W`, topologized as a subspace of `W × G × G × G`.

use crate::error::{Error, Result};
use crate::fintop::{self, point_set, FiniteTopSpace, PartialMap, PointSet};
use crate::report::Violation;
use crate::xmod::CrossedModule;

use super::section::{square_space, Frame, LocalSection};

/// A subset of the arrows of `C` with its own topology.
#[derive(Clone, Debug)]
pub struct WStructure {
    members: PointSet,
    position: Vec<Option<usize>>,
    topology: FiniteTopSpace,
}

impl WStructure {
    /// `topology` defaults to the subspace topology from `C`. Its points
    /// must be exactly the named arrows. `β` must reach every object.
    pub fn new(cm: &CrossedModule, names: &[String], topology: Option<FiniteTopSpace>) -> Result<Self> {
        let c = cm.c();
        let mut members = point_set(c.num_arrows(), []);
        for n in names {
            members.insert(c.arrow(n)?);
        }
        let order: Vec<String> = members.ones().map(|k| c.arrow_name(k).to_string()).collect();
        let topology = match topology {
            Some(t) => t.reindexed(&order)?,
            None => c.arrow_space().subspace(&members),
        };
        if let Some(x) = (0..c.num_objects()).find(|&x| !members.ones().any(|k| c.tgt(k) == x)) {
            return Err(Error::HypothesisFailed(format!("beta on W misses object `{}`", c.object_name(x))));
        }
        let mut position = vec![None; c.num_arrows()];
        for (i, k) in members.ones().enumerate() {
            position[k] = Some(i);
        }
        Ok(Self { members, position, topology })
    }

    /// `W = C` with the topology of `C`.
    pub fn whole(cm: &CrossedModule) -> Result<Self> {
        Self::new(cm, cm.c().arrows(), None)
    }

    pub fn members(&self) -> &PointSet {
        &self.members
    }

    pub fn contains(&self, k: usize) -> bool {
        self.members.contains(k)
    }

    /// Position of a `C` arrow among the points of [`Self::topology`].
    pub fn position(&self, k: usize) -> Option<usize> {
        self.position[k]
    }

    /// Arrow of `C` at a position of [`Self::topology`].
    pub fn arrow_at(&self, i: usize) -> usize {
        self.members.ones().nth(i).expect("position in range")
    }

    pub fn topology(&self) -> &FiniteTopSpace {
        &self.topology
    }

    pub fn len(&self) -> usize {
        self.topology.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topology.is_empty()
    }

    /// `β|W` continuous and open, and the identities inside `W`.
    pub fn check(&self, cm: &CrossedModule) -> Vec<Violation> {
        let c = cm.c();
        let xs = c.object_space();
        let beta = PartialMap::new(self.members.ones().map(|k| Some(c.tgt(k))).collect());
        let mut out = Vec::new();
        if let Some((p, q)) = fintop::continuity_witness(&beta, &self.topology, &xs) {
            out.push(Violation::new("beta continuous on W", [self.topology.name(p), self.topology.name(q)]));
        }
        for p in 0..self.len() {
            let image = point_set(xs.len(), self.topology.min_open(p).ones().map(|q| beta.get(q).unwrap()));
            if !xs.is_open(&image) {
                out.push(Violation::new("beta open on W", [self.topology.name(p)]));
            }
        }
        for x in 0..c.num_objects() {
            if !self.contains(c.unit(x)) {
                out.push(Violation::new("identities in W", [c.object_name(x)]));
            }
        }
        out
    }
}

/// The squares `(w1; d, b, c, a)` of `D(C)` with `w1 ∈ W`.
#[derive(Clone, Debug)]
pub struct WGSquares {
    members: PointSet,
    squares: Vec<usize>,
    position: Vec<Option<usize>>,
    topology: FiniteTopSpace,
}

/// Every compatible square with interior in `W`, with the pullback
/// topology from `W` and three copies of `G`.
pub fn build_wg(fr: &Frame, w: &WStructure) -> Result<WGSquares> {
    let g = fr.xmod().g();
    if let Some(x) = (0..g.num_objects()).find(|&x| !w.members().ones().any(|k| fr.xmod().c().tgt(k) == x)) {
        return Err(Error::HypothesisFailed(format!("beta on W misses object `{}`", g.object_name(x))));
    }
    let dg = fr.dg();
    let squares: Vec<usize> = (0..dg.len()).filter(|&u| w.contains(dg.square(u).interior)).collect();
    let members = point_set(dg.len(), squares.iter().copied());
    let mut position = vec![None; dg.len()];
    for (i, &u) in squares.iter().enumerate() {
        position[u] = Some(i);
    }
    let topology = square_space(dg, w.topology(), fr.edge_space(), |k| w.position(k));
    Ok(WGSquares { members, squares, position, topology })
}

impl WGSquares {
    pub fn members(&self) -> &PointSet {
        &self.members
    }

    pub fn contains(&self, u: usize) -> bool {
        self.members.contains(u)
    }

    /// Squares in increasing index order; position `i` of the topology is
    /// `squares()[i]`.
    pub fn squares(&self) -> &[usize] {
        &self.squares
    }

    pub fn position(&self, u: usize) -> Option<usize> {
        self.position[u]
    }

    pub fn topology(&self) -> &FiniteTopSpace {
        &self.topology
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn is_everything(&self, fr: &Frame) -> bool {
        self.len() == fr.dg().len()
    }

    /// Whether a section takes values in `W^G` and is continuous into it.
    pub fn admits(&self, fr: &Frame, s: &LocalSection) -> bool {
        let mut table = Vec::with_capacity(s.values.len());
        for v in &s.values {
            match v {
                Some(u) => match self.position(*u) {
                    Some(p) => table.push(Some(p)),
                    None => return false,
                },
                None => table.push(None),
            }
        }
        fintop::continuity_witness(&PartialMap::new(table), fr.edge_space(), &self.topology).is_none()
    }
}
