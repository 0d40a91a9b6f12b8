//! scl of chains in free groups by linear programming over normal-form
//! surfaces built from rectangles and polygons.
//!
//! Rectangles pair a letter with an inverse letter somewhere in the chain.
//! Each rectangle has two vertical sides ("turn nodes"); a polygon is a
//! directed cycle in the turn graph, where `u → v` whenever the boundary can
//! leave the rectangle of `u` after its letter and enter the rectangle of `v`
//! at the next letter of the same word. Polygon columns are priced in on
//! demand.

mod pricing;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{
    solve_lp_generated, Bound, Column, ColumnGenerator, LinearProgram, LpStatus, Phase, PricingContext, Relation,
    Sense,
};
use crate::words::{Alphabet, Chain, CyclicWord, Letter, WordError};
use crate::Rational;

pub use pricing::improving_cycles;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SclError {
    #[error("chain is not null-homologous")]
    NotNullHomologous,
    #[error("coefficients must be positive integers")]
    NonPositiveCoefficient,
    #[error("linear program ended with status {0:?}")]
    Solver(LpStatus),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A letter occurrence: letter `index` of term `word`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Position {
    pub word: usize,
    pub index: usize,
}

/// Encoding of all normal-form admissible surfaces of a positive integral chain.
#[derive(Clone, Debug)]
pub struct SclProblem {
    alphabet: Alphabet,
    terms: Vec<(CyclicWord, BigInt)>,
    offsets: Vec<usize>,
    positions: Vec<Position>,
    rectangles: Vec<(usize, usize)>,
    arcs: Vec<(usize, usize)>,
    successors: Vec<Vec<usize>>,
}

impl SclProblem {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn terms(&self) -> &[(CyclicWord, BigInt)] {
        &self.terms
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn position_id(&self, p: Position) -> usize {
        self.offsets[p.word] + p.index
    }

    pub fn letter(&self, id: usize) -> Letter {
        let p = self.positions[id];
        self.terms[p.word].0.letter(p.index)
    }

    /// Position following `id` in its cyclic word.
    pub fn next(&self, id: usize) -> usize {
        let p = self.positions[id];
        let len = self.terms[p.word].0.len();
        self.offsets[p.word] + (p.index + 1) % len
    }

    /// Rectangles as pairs of position ids `(p, q)` with `p < q`.
    pub fn rectangles(&self) -> &[(usize, usize)] {
        &self.rectangles
    }

    pub fn num_nodes(&self) -> usize {
        2 * self.rectangles.len()
    }

    pub fn rectangle_of(&self, node: usize) -> usize {
        node / 2
    }

    /// Position whose letter ends just before this vertical side.
    pub fn after(&self, node: usize) -> usize {
        let (p, q) = self.rectangles[node / 2];
        if node.is_multiple_of(2) {
            p
        } else {
            q
        }
    }

    /// Position whose letter starts just after this vertical side.
    pub fn before(&self, node: usize) -> usize {
        let (p, q) = self.rectangles[node / 2];
        if node.is_multiple_of(2) {
            q
        } else {
            p
        }
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn successors(&self, node: usize) -> &[usize] {
        &self.successors[node]
    }

    fn coverage_row(&self, id: usize) -> usize {
        id
    }

    fn node_row(&self, node: usize) -> usize {
        self.positions.len() + node
    }

    fn cycle_column(&self, cycle: &[usize]) -> Column<Rational> {
        let mut entries: Vec<(usize, Rational)> = Vec::new();
        for &v in cycle {
            let row = self.node_row(v);
            match entries.iter_mut().find(|(r, _)| *r == row) {
                Some((_, c)) => *c += Rational::one(),
                None => entries.push((row, Rational::one())),
            }
        }
        Column { cost: -half(), entries }
    }
}

fn half() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2))
}

/// Enumerates positions, rectangles, turn nodes and corner arcs for a chain
/// with positive integral coefficients. Repeated or mutually inverse terms
/// are allowed.
pub fn build_encoding(alphabet: &Alphabet, terms: &[(CyclicWord, BigInt)]) -> Result<SclProblem, SclError> {
    if terms.iter().any(|(_, c)| !c.is_positive()) {
        return Err(SclError::NonPositiveCoefficient);
    }
    let rank = alphabet.rank();
    let mut sums = vec![BigInt::zero(); rank];
    for (w, c) in terms {
        for (g, e) in w.exponent_sums(rank).into_iter().enumerate() {
            sums[g] += c * BigInt::from(e);
        }
    }
    if sums.iter().any(|s| !s.is_zero()) {
        return Err(SclError::NotNullHomologous);
    }
    let mut offsets = Vec::with_capacity(terms.len());
    let mut positions = Vec::new();
    for (i, (w, _)) in terms.iter().enumerate() {
        offsets.push(positions.len());
        positions.extend((0..w.len()).map(|j| Position { word: i, index: j }));
    }
    let letter = |id: usize| {
        let p: Position = positions[id];
        terms[p.word].0.letter(p.index)
    };
    let mut rectangles = Vec::new();
    for p in 0..positions.len() {
        for q in p + 1..positions.len() {
            if letter(q) == letter(p).inv() {
                rectangles.push((p, q));
            }
        }
    }
    let mut problem = SclProblem {
        alphabet: alphabet.clone(),
        terms: terms.to_vec(),
        offsets,
        positions,
        rectangles,
        arcs: Vec::new(),
        successors: Vec::new(),
    };
    let nodes = problem.num_nodes();
    let mut entering = vec![Vec::new(); problem.positions.len()];
    for v in 0..nodes {
        entering[problem.before(v)].push(v);
    }
    let mut successors = vec![Vec::new(); nodes];
    let mut arcs = Vec::new();
    for (u, succ) in successors.iter_mut().enumerate() {
        for &v in &entering[problem.next(problem.after(u))] {
            assert_ne!(u, v, "self-loop in the turn graph: input is not cyclically reduced");
            succ.push(v);
            arcs.push((u, v));
        }
    }
    problem.successors = successors;
    problem.arcs = arcs;
    Ok(problem)
}

/// Integral extremal solution at degree `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extremal {
    pub degree: BigInt,
    pub rectangles: Vec<BigInt>,
    pub polygons: Vec<(Vec<usize>, BigInt)>,
}

impl Extremal {
    /// `#polygons − #rectangles`.
    pub fn euler_characteristic(&self) -> BigInt {
        let p: BigInt = self.polygons.iter().map(|(_, t)| t.clone()).sum();
        let r: BigInt = self.rectangles.iter().cloned().sum();
        p - r
    }
}

#[derive(Clone, Debug)]
pub struct SclResult {
    pub value: Rational,
    /// Rectangle weights at degree one.
    pub rectangles: Vec<Rational>,
    /// Polygon cycles (turn-node sequences) with positive weight.
    pub polygons: Vec<(Vec<usize>, Rational)>,
    /// Duals of the coverage rows followed by the turn-node rows.
    pub dual: Vec<Rational>,
    /// `Σ dual · rhs`; equals `value` at optimality.
    pub dual_value: Rational,
    pub extremal: Extremal,
    pub pivots: usize,
    pub columns_generated: usize,
}

struct CyclePricer<'a> {
    problem: &'a SclProblem,
    /// Node sequence of every polygon column, in column order.
    cycles: Vec<Vec<usize>>,
    generated: usize,
}

impl ColumnGenerator<Rational> for CyclePricer<'_> {
    fn generate(&mut self, ctx: &PricingContext<'_, Rational>) -> Vec<Column<Rational>> {
        let offset = self.problem.positions.len();
        let weights = &ctx.duals[offset..];
        let threshold = match ctx.phase {
            Phase::One => Rational::zero(),
            Phase::Two => -half(),
        };
        let cycles = improving_cycles(&self.problem.successors, weights, &threshold);
        self.generated += cycles.len();
        let columns = cycles.iter().map(|c| self.problem.cycle_column(c)).collect();
        self.cycles.extend(cycles);
        columns
    }
}

/// Solves the encoding exactly at degree one and scales the optimal vertex
/// to an integral extremal solution.
pub fn solve_scl(problem: &SclProblem) -> Result<SclResult, SclError> {
    let mut lp = LinearProgram::new(Sense::Minimize);
    let nrect = problem.rectangles.len();
    for _ in 0..nrect {
        lp.add_variable(half(), Bound::NonNegative);
    }
    let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); problem.positions.len() + problem.num_nodes()];
    for (r, &(p, q)) in problem.rectangles.iter().enumerate() {
        rows[problem.coverage_row(p)].push((r, Rational::one()));
        rows[problem.coverage_row(q)].push((r, Rational::one()));
        rows[problem.node_row(2 * r)].push((r, -Rational::one()));
        rows[problem.node_row(2 * r + 1)].push((r, -Rational::one()));
    }
    for (i, row) in rows.into_iter().enumerate() {
        let rhs = if i < problem.positions.len() {
            Rational::from_integer(problem.terms[problem.positions[i].word].1.clone())
        } else {
            Rational::zero()
        };
        lp.add_constraint(row, Relation::Eq, rhs);
    }
    let mut pricer = CyclePricer { problem, cycles: Vec::new(), generated: 0 };
    // bigons seed the polygon columns
    for &(u, v) in &problem.arcs {
        if u < v && problem.successors[v].contains(&u) {
            lp.add_column(&problem.cycle_column(&[u, v]));
            pricer.cycles.push(vec![u, v]);
        }
    }
    let sol = solve_lp_generated(&mut lp, &mut pricer);
    if sol.status != LpStatus::Optimal {
        return Err(SclError::Solver(sol.status));
    }
    let rectangles: Vec<Rational> = sol.primal[..nrect].to_vec();
    let mut polygons = Vec::new();
    for j in nrect..lp.num_variables() {
        if sol.primal[j].is_zero() {
            continue;
        }
        polygons.push((pricer.cycles[j - nrect].clone(), sol.primal[j].clone()));
    }
    let dual_value = lp
        .constraints()
        .iter()
        .zip(&sol.dual)
        .fold(Rational::zero(), |acc, (c, y)| acc + &c.rhs * y);
    let degree = rectangles
        .iter()
        .chain(polygons.iter().map(|(_, t)| t))
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let scale = Rational::from_integer(degree.clone());
    let extremal = Extremal {
        degree: degree.clone(),
        rectangles: rectangles.iter().map(|x| (x * &scale).to_integer()).collect(),
        polygons: polygons.iter().map(|(c, t)| (c.clone(), (t * &scale).to_integer())).collect(),
    };
    Ok(SclResult {
        value: sol.value,
        rectangles,
        polygons,
        dual: sol.dual,
        dual_value,
        extremal,
        pivots: sol.iterations,
        columns_generated: pricer.generated,
    })
}

impl SclResult {
    /// Checks the dual certificate: strong duality, dual feasibility on
    /// rectangle columns, and that no polygon column prices in.
    pub fn verify_dual(&self, problem: &SclProblem) -> bool {
        if self.dual_value != self.value {
            return false;
        }
        let offset = problem.positions.len();
        for (r, &(p, q)) in problem.rectangles.iter().enumerate() {
            let ya = &self.dual[p] + &self.dual[q] - &self.dual[offset + 2 * r] - &self.dual[offset + 2 * r + 1];
            if half() - ya < Rational::zero() {
                return false;
            }
        }
        improving_cycles(&problem.successors, &self.dual[offset..], &-half()).is_empty()
    }
}

/// scl of a chain, or infinity when the chain is not null-homologous.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SclValue {
    Finite(Rational),
    Infinite,
}

impl SclValue {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            SclValue::Finite(v) => Some(v),
            SclValue::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, SclValue::Infinite)
    }
}

impl fmt::Display for SclValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SclValue::Finite(v) => write!(f, "{v}"),
            SclValue::Infinite => f.write_str("infinity"),
        }
    }
}

/// Full computation for a chain: the encoding of `D·c⁺` (inverse-normalized
/// and cleared of denominators), its solution, and `D`.
#[derive(Clone, Debug)]
pub struct SclComputation {
    pub problem: SclProblem,
    pub result: SclResult,
    pub denominator: BigInt,
}

impl SclComputation {
    pub fn value(&self) -> Rational {
        &self.result.value / Rational::from_integer(self.denominator.clone())
    }
}

pub fn compute(c: &Chain) -> Result<SclComputation, SclError> {
    if !c.is_null_homologous() {
        return Err(SclError::NotNullHomologous);
    }
    let (terms, denominator) = c.integral_terms();
    let problem = build_encoding(c.alphabet(), &terms)?;
    let result = solve_scl(&problem)?;
    Ok(SclComputation { problem, result, denominator })
}

pub fn scl(c: &Chain) -> SclValue {
    if c.is_empty() {
        return SclValue::Finite(Rational::zero());
    }
    match compute(c) {
        Ok(comp) => SclValue::Finite(comp.value()),
        Err(SclError::NotNullHomologous) => SclValue::Infinite,
        Err(e) => panic!("scl solver failure on {c}: {e}"),
    }
}

/// scl of a chain expression such as `abAB + 1/2*bb - aB`.
pub fn scl_expr(text: &str, alphabet: &Alphabet) -> Result<SclValue, WordError> {
    Ok(scl(&crate::words::parse_chain(text, alphabet)?))
}

/// Gersten's filling norm, `4·scl`.
pub fn fill_norm(c: &Chain) -> SclValue {
    match scl(c) {
        SclValue::Finite(v) => SclValue::Finite(v * Rational::from_integer(BigInt::from(4))),
        SclValue::Infinite => SclValue::Infinite,
    }
}

/// scl of `Σ coeffsᵢ · chainsᵢ`.
pub fn scl_on_subspace(chains: &[Chain], coeffs: &[Rational]) -> SclValue {
    assert_eq!(chains.len(), coeffs.len(), "one coefficient per chain");
    let Some(first) = chains.first() else {
        return SclValue::Finite(Rational::zero());
    };
    let mut total = Chain::empty(first.alphabet().clone());
    for (c, k) in chains.iter().zip(coeffs) {
        assert_eq!(c.alphabet(), first.alphabet(), "chains over different alphabets");
        total = total.add(&c.scale(k));
    }
    scl(&total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::parse_chain;

    fn ab() -> Alphabet {
        Alphabet::parse("a,b").unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn encode(words: &[&str]) -> SclProblem {
        let al = ab();
        let terms: Vec<(CyclicWord, BigInt)> = words
            .iter()
            .map(|w| (crate::words::cyclic_reduce(&crate::words::parse_word(w, &al).unwrap()).unwrap().0, BigInt::one()))
            .collect();
        build_encoding(&al, &terms).unwrap()
    }

    #[test]
    fn commutator_encoding_counts() {
        let p = encode(&["abAB"]);
        assert_eq!(p.positions().len(), 4);
        assert_eq!(p.rectangles(), &[(0, 2), (1, 3)]);
        assert_eq!(p.num_nodes(), 4);
        assert_eq!(p.arcs().len(), 4);
    }

    #[test]
    fn annulus_encoding_counts() {
        let p = encode(&["a", "A"]);
        assert_eq!(p.positions().len(), 2);
        assert_eq!(p.rectangles().len(), 1);
        assert_eq!(p.num_nodes(), 2);
        assert_eq!(p.arcs().len(), 2);
    }

    #[test]
    fn not_null_homologous() {
        let al = ab();
        let a = crate::words::cyclic_reduce(&crate::words::parse_word("a", &al).unwrap()).unwrap().0;
        assert_eq!(build_encoding(&al, &[(a, BigInt::one())]).unwrap_err(), SclError::NotNullHomologous);
        assert_eq!(scl_expr("a", &al).unwrap(), SclValue::Infinite);
    }

    #[test]
    fn commutator_solution() {
        let p = encode(&["abAB"]);
        let r = solve_scl(&p).unwrap();
        assert_eq!(r.value, q(1, 2));
        assert_eq!(r.rectangles, vec![q(1, 1), q(1, 1)]);
        assert_eq!(r.polygons.len(), 1);
        assert_eq!(r.polygons[0].0.len(), 4);
        assert_eq!(r.extremal.degree, BigInt::one());
        assert_eq!(r.extremal.euler_characteristic(), BigInt::from(-1));
        assert!(r.verify_dual(&p));
    }

    #[test]
    fn small_values() {
        let al = ab();
        assert_eq!(scl_expr("abAB", &al).unwrap(), SclValue::Finite(q(1, 2)));
        assert_eq!(scl_expr("a + A", &al).unwrap(), SclValue::Finite(q(0, 1)));
        assert_eq!(scl_expr("ab + B + A", &al).unwrap(), SclValue::Finite(q(1, 2)));
        assert_eq!(fill_norm(&parse_chain("abAB", &al).unwrap()), SclValue::Finite(q(2, 1)));
    }

    #[test]
    fn subspace_combinations() {
        let al = ab();
        let c = parse_chain("abAB", &al).unwrap();
        let t = parse_chain("a + A", &al).unwrap();
        assert_eq!(scl_on_subspace(&[c.clone(), c.clone()], &[q(1, 1), q(1, 1)]), SclValue::Finite(q(1, 1)));
        assert_eq!(scl_on_subspace(&[c.clone(), t.clone()], &[q(0, 1), q(0, 1)]), SclValue::Finite(q(0, 1)));
        assert_eq!(scl_on_subspace(&[c, t], &[q(1, 1), q(5, 1)]), SclValue::Finite(q(1, 2)));
    }

    #[test]
    fn aabb_is_not_null_homologous() {
        // a²b⁻² has abelianization (2, −2), so no admissible surface exists
        let al = ab();
        assert_eq!(scl_expr("aaBB", &al).unwrap(), SclValue::Infinite);
        assert_eq!(scl_expr("2*aaBB", &al).unwrap(), SclValue::Infinite);
        let s = scl_expr("aaBAAb", &al).unwrap().finite().cloned().unwrap();
        assert!(s >= q(0, 1) && s <= q(1, 2));
        assert_eq!(scl_expr("2*aaBAAb", &al).unwrap(), SclValue::Finite(s * q(2, 1)));
    }
}
