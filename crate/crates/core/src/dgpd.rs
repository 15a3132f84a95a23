//! The edge symmetric double groupoid `D(C)` of a crossed module, with its
//! connection, and the crossed module `γ(D)` recovered from it.
//!
//! A square is written `(w1; d, b, c, a)`: interior `w1 ∈ C`, top `d`, left
//! `b`, right `c` and bottom `a`, subject to `d = b + a + δ(w1) - c`.
//! Direction 1 composes vertically (top to bottom), direction 2
//! horizontally (left to right).

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::groupoid::Groupoid;
use crate::report::Violation;
use crate::xmod::CrossedModule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square {
    pub interior: usize,
    pub top: usize,
    pub left: usize,
    pub right: usize,
    pub bottom: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Vertical,
    Horizontal,
}

impl Direction {
    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            1 => Some(Direction::Vertical),
            2 => Some(Direction::Horizontal),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DoubleGroupoid {
    cm: CrossedModule,
    squares: Vec<Square>,
    index: HashMap<Square, usize>,
    vertical: Groupoid,
    horizontal: Groupoid,
    connection: Vec<usize>,
}

/// Top edge forced by the other four entries, when defined.
pub fn top_edge(cm: &CrossedModule, interior: usize, left: usize, right: usize, bottom: usize) -> Option<usize> {
    let g = cm.g();
    g.sum(&[left, bottom, cm.delta(interior), g.neg(right)])
}

impl DoubleGroupoid {
    /// All squares of `D(C)` with both compositions and the connection
    /// `Υ(a) = (1; a, a, 1, 1)`.
    pub fn build(cm: &CrossedModule) -> Result<Self> {
        let (c, g) = (cm.c(), cm.g());
        let mut squares = Vec::new();
        for left in 0..g.num_arrows() {
            for &bottom in g.outgoing(g.tgt(left)) {
                for &right in g.incoming(g.tgt(bottom)) {
                    for &interior in c.outgoing(g.tgt(bottom)) {
                        let top = top_edge(cm, interior, left, right, bottom).ok_or_else(|| {
                            Error::Structure("boundary of a square is not composable; is δ object preserving?".into())
                        })?;
                        squares.push(Square { interior, top, left, right, bottom });
                    }
                }
            }
        }
        let index: HashMap<Square, usize> = squares.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let names: Vec<String> = squares.iter().map(|s| square_name(cm, s)).collect();
        let vertical = Groupoid::from_fn(
            g.arrows().to_vec(),
            names.clone(),
            squares.iter().map(|s| s.top).collect(),
            squares.iter().map(|s| s.bottom).collect(),
            |u, v| {
                compose_squares(cm, Direction::Vertical, &squares[u], &squares[v]).and_then(|s| index.get(&s).copied())
            },
        )?;
        let horizontal = Groupoid::from_fn(
            g.arrows().to_vec(),
            names,
            squares.iter().map(|s| s.left).collect(),
            squares.iter().map(|s| s.right).collect(),
            |u, v| {
                compose_squares(cm, Direction::Horizontal, &squares[u], &squares[v])
                    .and_then(|s| index.get(&s).copied())
            },
        )?;
        let connection = (0..g.num_arrows())
            .map(|a| {
                let one = g.unit(g.tgt(a));
                index[&Square { interior: c.unit(g.tgt(a)), top: a, left: a, right: one, bottom: one }]
            })
            .collect();
        Ok(Self { cm: cm.clone(), squares, index, vertical, horizontal, connection })
    }

    /// The same double groupoid with a different connection table.
    pub fn with_connection(mut self, connection: Vec<usize>) -> Self {
        self.connection = connection;
        self
    }

    pub fn xmod(&self) -> &CrossedModule {
        &self.cm
    }

    pub fn edges(&self) -> &Groupoid {
        self.cm.g()
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn squares(&self) -> &[Square] {
        &self.squares
    }

    pub fn square(&self, u: usize) -> Square {
        self.squares[u]
    }

    pub fn index_of(&self, s: &Square) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn name(&self, u: usize) -> &str {
        self.vertical.arrow_name(u)
    }

    /// Squares under `+₁`, a groupoid over the edges with source the top
    /// and target the bottom.
    pub fn vertical(&self) -> &Groupoid {
        &self.vertical
    }

    /// Squares under `+₂`, with source the left and target the right edge.
    pub fn horizontal(&self) -> &Groupoid {
        &self.horizontal
    }

    pub fn compose1(&self, u: usize, v: usize) -> Option<usize> {
        self.vertical.add(u, v)
    }

    pub fn compose2(&self, u: usize, v: usize) -> Option<usize> {
        self.horizontal.add(u, v)
    }

    /// `u +₁ v` or `u +₂ v`, with an error naming the unmatched edges.
    pub fn compose(&self, dir: Direction, u: usize, v: usize) -> Result<usize> {
        let g = self.edges();
        let (su, sv) = (self.squares[u], self.squares[v]);
        let (out, inn, res) = match dir {
            Direction::Vertical => (("bottom", su.bottom), ("top", sv.top), self.compose1(u, v)),
            Direction::Horizontal => (("right", su.right), ("left", sv.left), self.compose2(u, v)),
        };
        res.ok_or_else(|| {
            Error::EdgeMismatch(
                format!("{} edge `{}`", out.0, g.arrow_name(out.1)),
                format!("{} edge `{}`", inn.0, g.arrow_name(inn.1)),
            )
        })
    }

    /// `ε₁(a) = (0; a, 1, 1, a)`.
    pub fn eps1(&self, a: usize) -> usize {
        self.vertical.unit(a)
    }

    /// `ε₂(b) = (0; 1, b, b, 1)`.
    pub fn eps2(&self, b: usize) -> usize {
        self.horizontal.unit(b)
    }

    pub fn neg1(&self, u: usize) -> usize {
        self.vertical.neg(u)
    }

    pub fn neg2(&self, u: usize) -> usize {
        self.horizontal.neg(u)
    }

    /// `Υ(a)`.
    pub fn connection(&self, a: usize) -> usize {
        self.connection[a]
    }

    /// Every violated double groupoid or connection axiom instance.
    pub fn check(&self) -> Vec<Violation> {
        let g = self.edges();
        let n = |u: usize| self.name(u).to_string();
        let en = |a: usize| g.arrow_name(a).to_string();
        let tag = |prefix: &str, v: Vec<Violation>| {
            v.into_iter().map(|v| Violation { rule: format!("{prefix} {}", v.rule), ..v }).collect::<Vec<_>>()
        };
        let mut out = tag("vertical", self.vertical.check());
        out.extend(tag("horizontal", self.horizontal.check()));
        for (u, s) in self.squares.iter().enumerate() {
            if top_edge(&self.cm, s.interior, s.left, s.right, s.bottom) != Some(s.top) {
                out.push(Violation::new("boundary", [n(u)]));
            }
        }
        for (u, v, w) in self.vertical.composition_entries() {
            let (su, sv, sw) = (self.squares[u], self.squares[v], self.squares[w]);
            if g.add(su.left, sv.left) != Some(sw.left) || g.add(su.right, sv.right) != Some(sw.right) {
                out.push(Violation::new("horizontal edges respect +1", [n(u), n(v)]));
            }
        }
        for (u, v, w) in self.horizontal.composition_entries() {
            let (su, sv, sw) = (self.squares[u], self.squares[v], self.squares[w]);
            if g.add(su.top, sv.top) != Some(sw.top) || g.add(su.bottom, sv.bottom) != Some(sw.bottom) {
                out.push(Violation::new("vertical edges respect +2", [n(u), n(v)]));
            }
        }
        for (a, b, c) in g.composition_entries() {
            if self.compose2(self.eps1(a), self.eps1(b)) != Some(self.eps1(c)) {
                out.push(Violation::new("eps1 respects +", [en(a), en(b)]));
            }
            if self.compose1(self.eps2(a), self.eps2(b)) != Some(self.eps2(c)) {
                out.push(Violation::new("eps2 respects +", [en(a), en(b)]));
            }
        }
        for (u, v, uv) in self.horizontal.composition_entries() {
            for &u2 in self.vertical.outgoing(self.squares[u].bottom) {
                for &v2 in self.vertical.outgoing(self.squares[v].bottom) {
                    let Some(u2v2) = self.compose2(u2, v2) else { continue };
                    let lhs = self.compose1(uv, u2v2);
                    let rhs = match (self.compose1(u, u2), self.compose1(v, v2)) {
                        (Some(x), Some(y)) => self.compose2(x, y),
                        _ => None,
                    };
                    if lhs.is_none() || lhs != rhs {
                        out.push(Violation::new("interchange", [n(u), n(v), n(u2), n(v2)]));
                    }
                }
            }
        }
        out.extend(self.check_connection());
        out
    }

    fn check_connection(&self) -> Vec<Violation> {
        let g = self.edges();
        let en = |a: usize| g.arrow_name(a).to_string();
        let mut out = Vec::new();
        for a in 0..g.num_arrows() {
            let s = self.squares[self.connection[a]];
            let one = g.unit(g.tgt(a));
            if (s.top, s.left, s.right, s.bottom) != (a, a, one, one) {
                out.push(Violation::new("connection boundary", [en(a)]));
            }
        }
        for (a, b, ab) in g.composition_entries() {
            let rhs =
                self.compose1(self.connection[a], self.eps2(b)).and_then(|x| self.compose2(x, self.connection[b]));
            if rhs != Some(self.connection[ab]) {
                out.push(Violation::new("transport law", [en(a), en(b)]));
            }
        }
        for x in 0..g.num_objects() {
            let e = g.unit(x);
            if self.connection[e] != self.eps1(e) || self.eps1(e) != self.eps2(e) {
                out.push(Violation::new("connection at identities", [g.object_name(x)]));
            }
        }
        out
    }

    /// `γ(D)`: the squares with left, right and bottom edges identities,
    /// under `+₂`, with boundary the top edge and the action
    /// `w^a = -₂Υ(a) +₂ (w +₁ ε₂(a)) +₂ Υ(a)`.
    pub fn gamma(&self) -> Result<CrossedModule> {
        let g = self.edges();
        let pi: Vec<usize> = (0..self.len())
            .filter(|&u| {
                let s = self.squares[u];
                g.is_unit(s.left) && g.is_unit(s.right) && g.is_unit(s.bottom)
            })
            .collect();
        let pos: HashMap<usize, usize> = pi.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let foot = |u: usize| g.tgt(self.squares[u].bottom);
        let c = Groupoid::from_fn(
            g.objects().to_vec(),
            pi.iter().map(|&u| self.name(u).to_string()).collect(),
            pi.iter().map(|&u| foot(u)).collect(),
            pi.iter().map(|&u| foot(u)).collect(),
            |i, j| self.compose2(pi[i], pi[j]).and_then(|w| pos.get(&w).copied()),
        )?;
        let delta = pi.iter().map(|&u| self.squares[u].top).collect();
        let mut missing = None;
        let cm = CrossedModule::from_fn(c, g.clone(), delta, |i, a| {
            let ups = self.connection[a];
            let moved = self
                .compose1(pi[i], self.eps2(a))
                .and_then(|m| self.compose2(self.neg2(ups), m))
                .and_then(|m| self.compose2(m, ups))
                .and_then(|m| pos.get(&m).copied());
            moved.unwrap_or_else(|| {
                missing = Some((i, a));
                i
            })
        })?;
        if let Some((i, a)) = missing {
            return Err(Error::Structure(format!(
                "conjugate of `{}` by `{}` is not a square of the kernel",
                self.name(pi[i]),
                g.arrow_name(a)
            )));
        }
        Ok(cm)
    }

    /// A listing of the squares and both composition tables.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "squares {}", self.len());
        for u in 0..self.len() {
            let _ = writeln!(s, "  {}", self.name(u));
        }
        for (title, gp) in [("+1", &self.vertical), ("+2", &self.horizontal)] {
            let _ = writeln!(s, "table {title}");
            for (u, v, w) in gp.composition_entries() {
                let _ = writeln!(s, "  {} {title} {} = {}", self.name(u), self.name(v), self.name(w));
            }
        }
        s
    }
}

/// Name of a square from its entries.
pub fn square_name(cm: &CrossedModule, s: &Square) -> String {
    let g = cm.g();
    format!(
        "<{}|{},{},{},{}>",
        cm.c().arrow_name(s.interior),
        g.arrow_name(s.top),
        g.arrow_name(s.left),
        g.arrow_name(s.right),
        g.arrow_name(s.bottom)
    )
}

/// The composite square by the defining formulas, when the edges match.
pub fn compose_squares(cm: &CrossedModule, dir: Direction, u: &Square, v: &Square) -> Option<Square> {
    let (c, g) = (cm.c(), cm.g());
    match dir {
        Direction::Vertical => {
            if u.bottom != v.top {
                return None;
            }
            Some(Square {
                interior: c.add(v.interior, cm.act(u.interior, v.right)?)?,
                top: u.top,
                left: g.add(u.left, v.left)?,
                right: g.add(u.right, v.right)?,
                bottom: v.bottom,
            })
        }
        Direction::Horizontal => {
            if u.right != v.left {
                return None;
            }
            Some(Square {
                interior: c.add(cm.act(u.interior, v.bottom)?, v.interior)?,
                top: g.add(u.top, v.top)?,
                left: u.left,
                right: v.right,
                bottom: g.add(u.bottom, v.bottom)?,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{self, Topo};
    use crate::xmod::find_isomorphism;

    #[test]
    fn z2z2_has_sixteen_squares() {
        let dg = DoubleGroupoid::build(&corpus::z2z2(Topo::Discrete)).unwrap();
        assert_eq!(dg.len(), 16);
        assert!(dg.check().is_empty());
    }

    #[test]
    fn trivial_c_gives_commuting_squares() {
        let cm = corpus::pair2(Topo::Discrete);
        let dg = DoubleGroupoid::build(&cm).unwrap();
        let g = cm.g();
        for s in dg.squares() {
            assert_eq!(g.add(s.top, s.right), g.add(s.left, s.bottom));
        }
        assert_eq!(dg.len(), 16);
    }

    #[test]
    fn single_square_double_groupoid() {
        let cm = CrossedModule::from_fn(Groupoid::cyclic("x", 1), Groupoid::cyclic("x", 1), vec![0], |k, _| k).unwrap();
        let dg = DoubleGroupoid::build(&cm).unwrap();
        assert_eq!(dg.len(), 1);
        assert!(dg.check().is_empty());
    }

    #[test]
    fn unit_squares() {
        let dg = DoubleGroupoid::build(&corpus::pairz2(Topo::Discrete)).unwrap();
        for u in 0..dg.len() {
            let s = dg.square(u);
            assert_eq!(dg.compose1(u, dg.eps1(s.bottom)), Some(u));
            assert_eq!(dg.compose2(u, dg.eps2(s.right)), Some(u));
        }
        let g = dg.edges();
        for a in 0..g.num_arrows() {
            let e1 = dg.square(dg.eps1(a));
            assert_eq!((e1.top, e1.bottom, e1.left, e1.right), (a, a, g.unit(g.src(a)), g.unit(g.tgt(a))));
        }
    }

    #[test]
    fn compose_reports_edges() {
        let dg = DoubleGroupoid::build(&corpus::pairz2(Topo::Discrete)).unwrap();
        let g = dg.edges();
        let xy = g.arrow("x>y").unwrap();
        let u = dg.eps2(xy);
        let err = dg.compose(Direction::Vertical, u, u).unwrap_err();
        assert_eq!(err, Error::EdgeMismatch("bottom edge `y>y`".into(), "top edge `x>x`".into()));
        let v = dg.eps1(xy);
        assert!(dg.compose(Direction::Horizontal, v, v).is_err());
        assert!(dg.compose(Direction::Vertical, v, v).is_ok());
    }

    #[test]
    fn broken_connection_is_reported() {
        let dg = DoubleGroupoid::build(&corpus::z2z2(Topo::Discrete)).unwrap();
        let g = dg.edges().clone();
        let fake = (0..g.num_arrows()).map(|a| dg.eps1(g.unit(g.src(a)))).collect();
        let bad = dg.with_connection(fake);
        let v = bad.check();
        assert!(v.iter().any(|v| v.rule == "transport law"), "{v:?}");
    }

    #[test]
    fn gamma_round_trip() {
        for item in corpus::standard(Topo::Discrete) {
            let dg = DoubleGroupoid::build(&item.xmod).unwrap();
            let back = dg.gamma().unwrap();
            assert!(back.check().is_empty(), "{}", item.name);
            let iso = find_isomorphism(&item.xmod, &back).unwrap_or_else(|| panic!("{}", item.name));
            assert!(iso.check(&item.xmod, &back).is_isomorphism);
        }
    }

    #[test]
    fn gamma_of_trivial_c_is_trivial() {
        let dg = DoubleGroupoid::build(&corpus::pair2(Topo::Discrete)).unwrap();
        let back = dg.gamma().unwrap();
        assert!(back.c().is_discrete());
    }

    /// Σ over composable boundary triples of |C(β a)|, by direct loops.
    fn count_oracle(cm: &CrossedModule) -> usize {
        let (c, g) = (cm.c(), cm.g());
        let mut total = 0;
        for b in 0..g.num_arrows() {
            for a in 0..g.num_arrows() {
                for cc in 0..g.num_arrows() {
                    if g.tgt(b) == g.src(a) && g.tgt(a) == g.tgt(cc) {
                        total += (0..c.num_arrows()).filter(|&k| c.src(k) == g.tgt(a)).count();
                    }
                }
            }
        }
        total
    }

    #[test]
    fn counting_matches_oracle() {
        for item in corpus::standard(Topo::Discrete) {
            let dg = DoubleGroupoid::build(&item.xmod).unwrap();
            assert_eq!(dg.len(), count_oracle(&item.xmod), "{}", item.name);
            assert!(dg.check().is_empty(), "{}", item.name);
        }
    }
}
