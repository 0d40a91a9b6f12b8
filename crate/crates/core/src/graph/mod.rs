//! Graphs of free groups amalgamated over cyclic subgroups: parsing,
//! presentations, second homology through Mayer–Vietoris, and the
//! Gromov–Thurston norm `‖A‖ = 4·Σᵥ scl(∂ᵥA)`.
//!
//! A class is given in edge-end coordinates `n_{e,v}`: the multiplicity with
//! which the part of a surface over vertex `v` wraps the attaching word
//! `w_{e,v}`. Both attaching circles of an edge map to the core of the edge
//! annulus with degree +1, so classes satisfy `n_{e,from} + n_{e,to} = 0`.

mod ball;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::exact::{kernel_lattice_basis, IntMatrix};
use crate::scl::{scl, SclValue};
use crate::words::{cyclic_reduce, parse_rational, parse_word, Alphabet, Chain, CyclicWord, Word, WordError};
use crate::Rational;

pub use ball::{fan_of_norm, unit_ball_2d, BallCone, ConeExport, FanExport, NormBallFan, Ray, RayExport, DEFAULT_DEPTH};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph is not connected")]
    DisconnectedGraph,
    #[error("edge {0} has an attaching word that is trivial in its vertex group")]
    TrivialAttachingWord(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("class is not in the Mayer–Vietoris kernel")]
    NotInKernel,
    #[error("classes are not linearly independent")]
    IndependenceViolation,
    #[error("subdivision depth {0} exceeded")]
    DepthExceeded(usize),
    #[error("malformed class: {0}")]
    BadClass(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub name: String,
    pub alphabet: Alphabet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub from: usize,
    pub to: usize,
    /// Attaching words as written (freely reduced).
    pub word_from: Word,
    pub word_to: Word,
    /// Their conjugacy classes.
    pub cyclic_from: CyclicWord,
    pub cyclic_to: CyclicWord,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum End {
    From,
    To,
}

/// An edge end: coordinate `2·edge + (0 for from, 1 for to)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeEnd {
    pub edge: usize,
    pub end: End,
}

impl EdgeEnd {
    pub fn coordinate(self) -> usize {
        2 * self.edge + usize::from(self.end == End::To)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphOfGroups {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

/// A rational class in edge-end coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct H2Class {
    pub coords: Vec<Rational>,
}

impl H2Class {
    pub fn zero(dim: usize) -> Self {
        H2Class { coords: vec![Rational::zero(); dim] }
    }

    pub fn from_integers(v: &[BigInt]) -> Self {
        H2Class { coords: v.iter().map(|x| Rational::from_integer(x.clone())).collect() }
    }

    pub fn from_i64(v: &[i64]) -> Self {
        H2Class { coords: v.iter().map(|&x| Rational::from_integer(x.into())).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        H2Class { coords: self.coords.iter().map(|c| c * k).collect() }
    }

    pub fn add(&self, other: &H2Class) -> Self {
        H2Class { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect() }
    }

    /// Least common multiple of the coordinate denominators.
    pub fn denominator(&self) -> BigInt {
        self.coords.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// Integer coordinates of `denominator() · self`.
    pub fn integral(&self) -> Vec<BigInt> {
        let d = Rational::from_integer(self.denominator());
        self.coords.iter().map(|c| (c * &d).to_integer()).collect()
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse { line, message: message.into() }
}

impl GraphOfGroups {
    /// Parses the line format
    ///
    /// ```text
    /// vertex <name> gens=<letters>
    /// edge <name> from=<vertex> to=<vertex> wfrom=<word> wto=<word>
    /// ```
    ///
    /// with `#` comments. Generator letters must be distinct across vertices.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut vertices: Vec<Vertex> = Vec::new();
        let mut raw_edges = Vec::new();
        let mut used_letters = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut tokens = content.split_whitespace();
            let kind = tokens.next().unwrap();
            let name = tokens.next().ok_or_else(|| parse_error(line, "missing name"))?.to_string();
            let mut fields = BTreeMap::new();
            for tok in tokens {
                let (k, v) = tok.split_once('=').ok_or_else(|| parse_error(line, format!("expected key=value, got {tok:?}")))?;
                if fields.insert(k.to_string(), v.to_string()).is_some() {
                    return Err(parse_error(line, format!("repeated field {k}")));
                }
            }
            let mut take = |k: &str| fields.remove(k).ok_or_else(|| parse_error(line, format!("missing field {k}")));
            match kind {
                "vertex" => {
                    let gens = take("gens")?;
                    let alphabet = Alphabet::parse(&gens).map_err(|e| parse_error(line, e.to_string()))?;
                    for &c in alphabet.names() {
                        if !used_letters.insert(c) {
                            return Err(parse_error(line, format!("generator {c} already used by another vertex")));
                        }
                    }
                    if vertices.iter().any(|v| v.name == name) {
                        return Err(parse_error(line, format!("duplicate vertex {name}")));
                    }
                    vertices.push(Vertex { name, alphabet });
                }
                "edge" => {
                    let e = (name, take("from")?, take("to")?, take("wfrom")?, take("wto")?, line);
                    raw_edges.push(e);
                }
                other => return Err(parse_error(line, format!("unknown record {other:?}"))),
            }
            if let Some(k) = fields.keys().next() {
                return Err(parse_error(line, format!("unexpected field {k}")));
            }
        }
        if vertices.is_empty() {
            return Err(parse_error(0, "no vertices"));
        }
        let index = |name: &str| {
            vertices.iter().position(|v| v.name == name).ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
        };
        let mut edges = Vec::new();
        let mut names = BTreeSet::new();
        for (name, from, to, wfrom, wto, line) in raw_edges {
            if !names.insert(name.clone()) {
                return Err(parse_error(line, format!("duplicate edge {name}")));
            }
            let (from, to) = (index(&from)?, index(&to)?);
            let word = |text: &str, v: usize| -> Result<(Word, CyclicWord), GraphError> {
                let w = parse_word(text, &vertices[v].alphabet).map_err(|e| parse_error(line, e.to_string()))?;
                match cyclic_reduce(&w) {
                    Ok((c, _)) => Ok((w, c)),
                    Err(WordError::EmptyWord) => Err(GraphError::TrivialAttachingWord(name.clone())),
                    Err(e) => Err(parse_error(line, e.to_string())),
                }
            };
            let (word_from, cyclic_from) = word(&wfrom, from)?;
            let (word_to, cyclic_to) = word(&wto, to)?;
            edges.push(Edge { name, from, to, word_from, word_to, cyclic_from, cyclic_to });
        }
        edges.sort_by(|a, b| a.name.cmp(&b.name));
        let g = GraphOfGroups { vertices, edges };
        if !g.is_connected() {
            return Err(GraphError::DisconnectedGraph);
        }
        Ok(g)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// Edges sorted by name.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn dimension(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.name == name)
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    pub fn end_vertex(&self, end: EdgeEnd) -> usize {
        let e = &self.edges[end.edge];
        match end.end {
            End::From => e.from,
            End::To => e.to,
        }
    }

    pub fn end_word(&self, end: EdgeEnd) -> &CyclicWord {
        let e = &self.edges[end.edge];
        match end.end {
            End::From => &e.cyclic_from,
            End::To => &e.cyclic_to,
        }
    }

    /// All edge ends, in coordinate order.
    pub fn ends(&self) -> impl Iterator<Item = EdgeEnd> + '_ {
        (0..self.edges.len()).flat_map(|edge| [EdgeEnd { edge, end: End::From }, EdgeEnd { edge, end: End::To }])
    }

    pub fn end_name(&self, end: EdgeEnd) -> String {
        let suffix = match end.end {
            End::From => "from",
            End::To => "to",
        };
        format!("{}.{}", self.edges[end.edge].name, suffix)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices.len()];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for e in &self.edges {
                for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        queue.push_back(b);
                    }
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// Tree edges of the breadth-first spanning tree grown from the
    /// lexicographically first vertex, scanning edges by name.
    pub fn spanning_tree(&self) -> Vec<bool> {
        let root = (0..self.vertices.len()).min_by(|&a, &b| self.vertices[a].name.cmp(&self.vertices[b].name)).unwrap();
        let mut seen = vec![false; self.vertices.len()];
        let mut tree = vec![false; self.edges.len()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for (i, e) in self.edges.iter().enumerate() {
                let other = if e.from == v {
                    e.to
                } else if e.to == v {
                    e.from
                } else {
                    continue;
                };
                if !seen[other] {
                    seen[other] = true;
                    tree[i] = true;
                    queue.push_back(other);
                }
            }
        }
        tree
    }

    /// Group presentation: all vertex generators plus a stable letter (the
    /// edge name) for every edge outside the spanning tree, with relations
    /// `e·w_from·e⁻¹ = w_to` (`w_from = w_to` on tree edges).
    pub fn presentation(&self) -> String {
        let tree = self.spanning_tree();
        let mut gens: Vec<String> =
            self.vertices.iter().flat_map(|v| v.alphabet.names().iter().map(|c| c.to_string())).collect();
        let mut relations = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            let wf = e.word_from.render(&self.vertices[e.from].alphabet);
            let wt = e.word_to.render(&self.vertices[e.to].alphabet);
            if tree[i] {
                relations.push(format!("{wf} = {wt}"));
            } else {
                gens.push(e.name.clone());
                relations.push(format!("{n} {wf} {n}^-1 = {wt}", n = e.name));
            }
        }
        format!("<{} | {}>", gens.join(", "), relations.join(", "))
    }

    /// Mayer–Vietoris matrix: rows are vertex generators (exponent sums of
    /// the attaching words) followed by one core row per edge.
    pub fn mv_matrix(&self) -> IntMatrix<BigInt> {
        let cols = self.dimension();
        let mut m = IntMatrix::zeros(0, cols);
        for (v, vertex) in self.vertices.iter().enumerate() {
            let rank = vertex.alphabet.rank();
            for g in 0..rank {
                let mut row = vec![BigInt::zero(); cols];
                for end in self.ends() {
                    if self.end_vertex(end) == v {
                        row[end.coordinate()] += BigInt::from(self.end_word(end).exponent_sums(rank)[g]);
                    }
                }
                m.push_row(row);
            }
        }
        for e in 0..self.edges.len() {
            let mut row = vec![BigInt::zero(); cols];
            row[2 * e] = BigInt::one();
            row[2 * e + 1] = BigInt::one();
            m.push_row(row);
        }
        m
    }

    /// Primitive basis of `H₂` in edge-end coordinates.
    pub fn h2_lattice(&self) -> Vec<H2Class> {
        kernel_lattice_basis(&self.mv_matrix()).into_rows().iter().map(|r| H2Class::from_integers(r)).collect()
    }

    pub fn in_kernel(&self, a: &H2Class) -> bool {
        if a.coords.len() != self.dimension() {
            return false;
        }
        let m = self.mv_matrix();
        let x = a.integral();
        m.mul_vec(&x).iter().all(Zero::is_zero)
    }

    /// Parses `e1.from=1,e1.to=-1`; unspecified coordinates are zero.
    pub fn parse_class(&self, text: &str) -> Result<H2Class, GraphError> {
        let mut a = H2Class::zero(self.dimension());
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| GraphError::BadClass(item.to_string()))?;
            let (edge, end) = key.trim().rsplit_once('.').ok_or_else(|| GraphError::BadClass(key.to_string()))?;
            let edge = self.edge_index(edge).ok_or_else(|| GraphError::BadClass(format!("unknown edge {edge}")))?;
            let end = match end {
                "from" => End::From,
                "to" => End::To,
                other => return Err(GraphError::BadClass(format!("unknown end {other}"))),
            };
            let v = parse_rational(value.trim()).map_err(|e| GraphError::BadClass(e.to_string()))?;
            a.coords[EdgeEnd { edge, end }.coordinate()] = v;
        }
        Ok(a)
    }

    pub fn render_class(&self, a: &H2Class) -> String {
        self.ends().map(|end| format!("{}={}", self.end_name(end), a.coords[end.coordinate()])).collect::<Vec<_>>().join(",")
    }

    /// `∂ᵥA = Σ_e n_{e,v}·w_{e,v}`, inverse-normalized.
    pub fn boundary_chain(&self, a: &H2Class, v: usize) -> Result<Chain, GraphError> {
        if !self.in_kernel(a) {
            return Err(GraphError::NotInKernel);
        }
        Ok(self.raw_boundary_chain(a, v))
    }

    fn raw_boundary_chain(&self, a: &H2Class, v: usize) -> Chain {
        let mut c = Chain::empty(self.vertices[v].alphabet.clone());
        for end in self.ends() {
            if self.end_vertex(end) == v {
                c.add_term(self.end_word(end), &a.coords[end.coordinate()]);
            }
        }
        c.inverse_normalized()
    }

    /// Formal boundary of the integral class `a` at `v`: each edge end with
    /// `n ≠ 0` contributes its word (inverted when `n < 0`) with weight `|n|`.
    /// Terms are not merged, so every term keeps its edge end.
    pub fn formal_boundary(&self, a: &[BigInt], v: usize) -> Vec<(EdgeEnd, CyclicWord, BigInt)> {
        self.ends()
            .filter(|&end| self.end_vertex(end) == v && !a[end.coordinate()].is_zero())
            .map(|end| {
                let n = &a[end.coordinate()];
                let w = if n.is_negative() { self.end_word(end).inverse() } else { self.end_word(end).clone() };
                (end, w, n.abs())
            })
            .collect()
    }

    /// `4·Σᵥ scl(∂ᵥA)`.
    pub fn gt_norm(&self, a: &H2Class) -> Result<Rational, GraphError> {
        if !self.in_kernel(a) {
            return Err(GraphError::NotInKernel);
        }
        let values: Vec<SclValue> =
            (0..self.vertices.len()).into_par_iter().map(|v| scl(&self.raw_boundary_chain(a, v))).collect();
        let mut total = Rational::zero();
        for v in values {
            match v {
                SclValue::Finite(x) => total += x,
                // kernel classes have null-homologous vertex boundaries
                SclValue::Infinite => return Err(GraphError::NotInKernel),
            }
        }
        Ok(total * Rational::from_integer(BigInt::from(4)))
    }
}

impl fmt::Display for GraphOfGroups {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.vertices {
            let gens: Vec<String> = v.alphabet.names().iter().map(|c| c.to_string()).collect();
            writeln!(f, "vertex {} gens={}", v.name, gens.join(","))?;
        }
        for e in &self.edges {
            writeln!(
                f,
                "edge {} from={} to={} wfrom={} wto={}",
                e.name,
                self.vertices[e.from].name,
                self.vertices[e.to].name,
                e.word_from.render(&self.vertices[e.from].alphabet),
                e.word_to.render(&self.vertices[e.to].alphabet)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const DOUBLE: &str = "\
# double of F(a,b) along the commutator
vertex u gens=a,b
vertex v gens=c,d
edge e from=u to=v wfrom=abAB wto=cdCD
";

    pub(crate) const CHAIN3: &str = "\
vertex u gens=a,b
vertex v gens=c,d
vertex w gens=e,f
edge e1 from=u to=v wfrom=abAB wto=cdCD
edge e2 from=w to=v wfrom=efEF wto=cdCD
";

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn parse_and_validate() {
        let g = GraphOfGroups::parse(DOUBLE).unwrap();
        assert_eq!(g.vertices().len(), 2);
        assert_eq!(g.edges().len(), 1);
        let trivial = "vertex u gens=a,b\nvertex v gens=c,d\nedge e from=u to=v wfrom=aA wto=cdCD\n";
        assert_eq!(GraphOfGroups::parse(trivial).unwrap_err(), GraphError::TrivialAttachingWord("e".into()));
        let split = "vertex u gens=a,b\nvertex v gens=c,d\n";
        assert_eq!(GraphOfGroups::parse(split).unwrap_err(), GraphError::DisconnectedGraph);
        let unknown = "vertex u gens=a\nedge e from=u to=x wfrom=a wto=a\n";
        assert_eq!(GraphOfGroups::parse(unknown).unwrap_err(), GraphError::UnknownVertex("x".into()));
        assert!(matches!(GraphOfGroups::parse("vertex u gens=a\nvertex v gens=a\n"), Err(GraphError::Parse { .. })));
    }

    #[test]
    fn presentations() {
        let g = GraphOfGroups::parse(DOUBLE).unwrap();
        assert_eq!(g.presentation(), "<a, b, c, d | abAB = cdCD>");
        let loop_graph = GraphOfGroups::parse("vertex u gens=a\nedge e from=u to=u wfrom=a wto=a\n").unwrap();
        assert_eq!(loop_graph.presentation(), "<a, e | e a e^-1 = a>");
        let bare = GraphOfGroups::parse("vertex u gens=a,b\n").unwrap();
        assert_eq!(bare.presentation(), "<a, b | >");
    }

    #[test]
    fn h2_examples() {
        let g = GraphOfGroups::parse(DOUBLE).unwrap();
        assert_eq!(g.h2_lattice(), vec![H2Class::from_i64(&[1, -1])]);
        let self_edge = GraphOfGroups::parse("vertex u gens=a,b\nedge e from=u to=u wfrom=abAB wto=abAB\n").unwrap();
        assert_eq!(self_edge.h2_lattice(), vec![H2Class::from_i64(&[1, -1])]);
        let bare = GraphOfGroups::parse("vertex u gens=a,b\n").unwrap();
        assert!(bare.h2_lattice().is_empty());
    }

    #[test]
    fn boundary_chains() {
        let g = GraphOfGroups::parse(DOUBLE).unwrap();
        let a = H2Class::from_i64(&[1, -1]);
        assert_eq!(g.boundary_chain(&a, 0).unwrap().render(), "abAB");
        let second = g.boundary_chain(&a, 1).unwrap();
        let al = &g.vertices()[1].alphabet;
        let inv = crate::words::parse_chain("dcDC", al).unwrap().inverse_normalized();
        assert_eq!(second, inv);
        assert!(g.boundary_chain(&H2Class::zero(2), 0).unwrap().is_empty());
        assert_eq!(g.boundary_chain(&H2Class::from_i64(&[1, 0]), 0).unwrap_err(), GraphError::NotInKernel);
    }

    #[test]
    fn norms() {
        let g = GraphOfGroups::parse(DOUBLE).unwrap();
        assert_eq!(g.gt_norm(&H2Class::from_i64(&[1, -1])).unwrap(), q(4));
        assert_eq!(g.gt_norm(&H2Class::zero(2)).unwrap(), q(0));
        assert_eq!(g.gt_norm(&H2Class::from_i64(&[2, -2])).unwrap(), q(8));
        let c = g.parse_class("e.from=1/2, e.to=-1/2").unwrap();
        assert_eq!(g.gt_norm(&c).unwrap(), q(2));
    }

    #[test]
    fn chain_of_three_norm() {
        let g = GraphOfGroups::parse(CHAIN3).unwrap();
        let basis = g.h2_lattice();
        assert_eq!(basis, vec![H2Class::from_i64(&[1, -1, 0, 0]), H2Class::from_i64(&[0, 0, 1, -1])]);
        let n = |x: i64, y: i64| g.gt_norm(&basis[0].scale(&q(x)).add(&basis[1].scale(&q(y)))).unwrap();
        assert_eq!(n(1, 0), q(4));
        assert_eq!(n(1, -1), q(4));
        assert_eq!(n(1, 1), q(8));
    }
}
