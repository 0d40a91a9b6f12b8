//! Two-phase revised simplex over an exact field, with Bland's rule and an
//! optional column generator consulted whenever the current columns price out.

use std::fmt;

use thiserror::Error;

use super::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    NonNegative,
    Free,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T> {
    pub coeffs: Vec<(usize, T)>,
    pub relation: Relation,
    pub rhs: T,
}

/// A nonnegative column offered by a [`ColumnGenerator`].
#[derive(Clone, Debug, PartialEq)]
pub struct Column<T> {
    pub cost: T,
    pub entries: Vec<(usize, T)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram<T> {
    sense: Sense,
    objective: Vec<T>,
    bounds: Vec<Bound>,
    constraints: Vec<Constraint<T>>,
}

impl<T: Field> LinearProgram<T> {
    pub fn new(sense: Sense) -> Self {
        LinearProgram { sense, objective: Vec::new(), bounds: Vec::new(), constraints: Vec::new() }
    }

    pub fn add_variable(&mut self, cost: T, bound: Bound) -> usize {
        self.objective.push(cost);
        self.bounds.push(bound);
        self.objective.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, T)>, relation: Relation, rhs: T) -> usize {
        assert!(
            coeffs.iter().all(|(j, _)| *j < self.objective.len()),
            "constraint refers to an unknown variable"
        );
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self.constraints.len() - 1
    }

    /// Appends a nonnegative variable whose coefficients are given column-wise.
    pub fn add_column(&mut self, column: &Column<T>) -> usize {
        let j = self.add_variable(column.cost.clone(), Bound::NonNegative);
        for (i, a) in &column.entries {
            self.constraints[*i].coeffs.push((j, a.clone()));
        }
        j
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn num_variables(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    pub fn evaluate(&self, x: &[T]) -> T {
        dot_dense(&self.objective, x)
    }

    fn columns(&self) -> Vec<Vec<(usize, T)>> {
        let mut cols = vec![Vec::new(); self.objective.len()];
        for (i, c) in self.constraints.iter().enumerate() {
            for (j, a) in &c.coeffs {
                cols[*j].push((i, a.clone()));
            }
        }
        cols
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    One,
    Two,
}

/// Dual information handed to a column generator.
///
/// Duals are expressed for the original constraints, so the reduced cost of a
/// column `a` with cost `c` is `c − y·a` in phase two and `−y·a` in phase one.
pub struct PricingContext<'a, T> {
    pub phase: Phase,
    pub sense: Sense,
    pub duals: &'a [T],
}

impl<T: Field> PricingContext<'_, T> {
    pub fn reduced_cost(&self, column: &Column<T>) -> T {
        let ya = column
            .entries
            .iter()
            .fold(T::zero(), |acc, (i, a)| acc.add_ref(&self.duals[*i].mul_ref(a)));
        match self.phase {
            Phase::One => -ya,
            Phase::Two => column.cost.sub_ref(&ya),
        }
    }

    pub fn is_improving(&self, column: &Column<T>) -> bool {
        let rc = self.reduced_cost(column);
        match (self.phase, self.sense) {
            (Phase::One, _) | (Phase::Two, Sense::Minimize) => rc.is_negative(),
            (Phase::Two, Sense::Maximize) => rc.is_positive(),
        }
    }
}

pub trait ColumnGenerator<T> {
    /// Returns columns with improving reduced cost, or nothing to certify optimality.
    fn generate(&mut self, ctx: &PricingContext<'_, T>) -> Vec<Column<T>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub value: T,
    pub primal: Vec<T>,
    pub dual: Vec<T>,
    /// Original variables that are basic at the returned vertex.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("solution is not optimal")]
    NotOptimal,
    #[error("constraint {0} violated by the primal vector")]
    PrimalInfeasible(usize),
    #[error("variable {0} violates its bound")]
    BoundViolated(usize),
    #[error("reduced cost of variable {0} has the wrong sign")]
    DualInfeasible(usize),
    #[error("dual of constraint {0} has the wrong sign")]
    DualSign(usize),
    #[error("primal and dual objective values differ")]
    DualityGap,
    #[error("complementary slackness fails at {0}")]
    Complementarity(String),
}

impl<T: Field> LpSolution<T> {
    fn without_point(status: LpStatus, iterations: usize) -> Self {
        LpSolution { status, value: T::zero(), primal: Vec::new(), dual: Vec::new(), basis: Vec::new(), iterations }
    }

    /// Checks primal feasibility, dual feasibility, equal objective values and
    /// complementary slackness, all exactly.
    pub fn check_certificate(&self, p: &LinearProgram<T>) -> Result<(), CertificateError> {
        if self.status != LpStatus::Optimal {
            return Err(CertificateError::NotOptimal);
        }
        let x = &self.primal;
        let y = &self.dual;
        let flip = p.sense == Sense::Maximize;
        for (j, b) in p.bounds.iter().enumerate() {
            if *b == Bound::NonNegative && x[j].is_negative() {
                return Err(CertificateError::BoundViolated(j));
            }
        }
        let mut dual_obj = T::zero();
        for (i, c) in p.constraints.iter().enumerate() {
            let lhs = c.coeffs.iter().fold(T::zero(), |acc, (j, a)| acc.add_ref(&a.mul_ref(&x[*j])));
            let slack = lhs.sub_ref(&c.rhs);
            let ok = match c.relation {
                Relation::Eq => slack.is_zero(),
                Relation::Le => !slack.is_positive(),
                Relation::Ge => !slack.is_negative(),
            };
            if !ok {
                return Err(CertificateError::PrimalInfeasible(i));
            }
            // minimize: y ≤ 0 on ≤ rows, y ≥ 0 on ≥ rows; maximize: reversed
            let sign_ok = match (c.relation, flip) {
                (Relation::Eq, _) => true,
                (Relation::Le, false) | (Relation::Ge, true) => !y[i].is_positive(),
                (Relation::Ge, false) | (Relation::Le, true) => !y[i].is_negative(),
            };
            if !sign_ok {
                return Err(CertificateError::DualSign(i));
            }
            if !slack.is_zero() && !y[i].is_zero() {
                return Err(CertificateError::Complementarity(format!("row {i}")));
            }
            dual_obj = dual_obj.add_ref(&y[i].mul_ref(&c.rhs));
        }
        let cols = p.columns();
        for (j, col) in cols.iter().enumerate() {
            let ya = col.iter().fold(T::zero(), |acc, (i, a)| acc.add_ref(&y[*i].mul_ref(a)));
            let rc = p.objective[j].sub_ref(&ya);
            let ok = match (p.bounds[j], flip) {
                (Bound::Free, _) => rc.is_zero(),
                (Bound::NonNegative, false) => !rc.is_negative(),
                (Bound::NonNegative, true) => !rc.is_positive(),
            };
            if !ok {
                return Err(CertificateError::DualInfeasible(j));
            }
            if !x[j].is_zero() && !rc.is_zero() {
                return Err(CertificateError::Complementarity(format!("variable {j}")));
            }
        }
        if p.evaluate(x) != self.value || dual_obj != self.value {
            return Err(CertificateError::DualityGap);
        }
        Ok(())
    }
}

impl<T: fmt::Display> fmt::Display for LpSolution<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} value={} after {} pivots", self.status, self.value, self.iterations)
    }
}

/// Solves a fixed linear program.
pub fn solve_lp<T: Field>(p: &LinearProgram<T>) -> LpSolution<T> {
    let mut owned = p.clone();
    Simplex::new(&owned).run(&mut owned, &mut NoColumns, false)
}

/// Solves `p`, asking `generator` for new columns whenever the current ones
/// price out. Generated columns are appended to `p`.
pub fn solve_lp_generated<T: Field, G: ColumnGenerator<T> + ?Sized>(p: &mut LinearProgram<T>, generator: &mut G) -> LpSolution<T> {
    let mut simplex = Simplex::new(p);
    simplex.run(p, generator, true)
}

struct NoColumns;

impl<T> ColumnGenerator<T> for NoColumns {
    fn generate(&mut self, _: &PricingContext<'_, T>) -> Vec<Column<T>> {
        Vec::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Var { var: usize, negated: bool },
    Slack,
    Artificial,
}

struct Simplex<T> {
    m: usize,
    cols: Vec<Vec<(usize, T)>>,
    kinds: Vec<Kind>,
    cost: Vec<T>,
    negated_row: Vec<bool>,
    rhs: Vec<T>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    binv: Vec<Vec<T>>,
    xb: Vec<T>,
    iterations: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl<T: Field> Simplex<T> {
    fn new(p: &LinearProgram<T>) -> Self {
        let m = p.constraints.len();
        let negated_row: Vec<bool> = p.constraints.iter().map(|c| c.rhs.is_negative()).collect();
        let rhs: Vec<T> = p.constraints.iter().map(|c| c.rhs.abs()).collect();
        let mut s = Simplex {
            m,
            cols: Vec::new(),
            kinds: Vec::new(),
            cost: Vec::new(),
            negated_row,
            rhs,
            basis: vec![usize::MAX; m],
            is_basic: Vec::new(),
            binv: Vec::new(),
            xb: Vec::new(),
            iterations: 0,
        };
        for (j, col) in p.columns().into_iter().enumerate() {
            let c = s.internal_cost(p.sense, &p.objective[j]);
            match p.bounds[j] {
                Bound::NonNegative => s.push_var(j, false, c, col),
                Bound::Free => {
                    s.push_var(j, false, c.clone(), col.clone());
                    let neg = col.into_iter().map(|(i, a)| (i, -a)).collect();
                    s.push_var(j, true, -c, neg);
                }
            }
        }
        for (i, c) in p.constraints.iter().enumerate() {
            let coef = match c.relation {
                Relation::Eq => continue,
                Relation::Le => T::one(),
                Relation::Ge => -T::one(),
            };
            let coef = if s.negated_row[i] { -coef } else { coef };
            let positive = coef.is_positive();
            s.push(Kind::Slack, T::zero(), vec![(i, coef)]);
            if positive {
                s.basis[i] = s.cols.len() - 1;
            }
        }
        for i in 0..m {
            if s.basis[i] == usize::MAX {
                s.push(Kind::Artificial, T::zero(), vec![(i, T::one())]);
                s.basis[i] = s.cols.len() - 1;
            }
        }
        s.is_basic = vec![false; s.cols.len()];
        for &b in &s.basis {
            s.is_basic[b] = true;
        }
        s.binv = (0..m).map(|i| (0..m).map(|k| if i == k { T::one() } else { T::zero() }).collect()).collect();
        s.xb = s.rhs.clone();
        s
    }

    fn internal_cost(&self, sense: Sense, c: &T) -> T {
        match sense {
            Sense::Minimize => c.clone(),
            Sense::Maximize => -c.clone(),
        }
    }

    fn push_var(&mut self, var: usize, negated: bool, cost: T, col: Vec<(usize, T)>) {
        let col = col
            .into_iter()
            .map(|(i, a)| if self.negated_row[i] { (i, -a) } else { (i, a) })
            .collect();
        self.push(Kind::Var { var, negated }, cost, col);
    }

    fn push(&mut self, kind: Kind, cost: T, col: Vec<(usize, T)>) {
        self.kinds.push(kind);
        self.cost.push(cost);
        self.cols.push(col);
        self.is_basic.push(false);
    }

    fn phase_cost(&self, phase: Phase, j: usize) -> T {
        match (phase, self.kinds[j]) {
            (Phase::One, Kind::Artificial) => T::one(),
            (Phase::One, _) => T::zero(),
            (Phase::Two, _) => self.cost[j].clone(),
        }
    }

    fn internal_duals(&self, phase: Phase) -> Vec<T> {
        let mut y = vec![T::zero(); self.m];
        for (i, &b) in self.basis.iter().enumerate() {
            let c = self.phase_cost(phase, b);
            if c.is_zero() {
                continue;
            }
            for (k, yk) in y.iter_mut().enumerate() {
                if !self.binv[i][k].is_zero() {
                    *yk = yk.add_ref(&c.mul_ref(&self.binv[i][k]));
                }
            }
        }
        y
    }

    fn reduced_cost(&self, phase: Phase, y: &[T], j: usize) -> T {
        let ya = self.cols[j].iter().fold(T::zero(), |acc, (i, a)| acc.add_ref(&y[*i].mul_ref(a)));
        self.phase_cost(phase, j).sub_ref(&ya)
    }

    fn external_duals(&self, phase: Phase, sense: Sense, y: &[T]) -> Vec<T> {
        let flip = phase == Phase::Two && sense == Sense::Maximize;
        y.iter()
            .zip(&self.negated_row)
            .map(|(v, &neg)| if neg != flip { -v.clone() } else { v.clone() })
            .collect()
    }

    fn run<G: ColumnGenerator<T> + ?Sized>(&mut self, p: &mut LinearProgram<T>, generator: &mut G, generating: bool) -> LpSolution<T> {
        let has_artificial = self.kinds.contains(&Kind::Artificial);
        if has_artificial || generating {
            match self.iterate(Phase::One, p, generator) {
                Outcome::Unbounded => unreachable!("phase one objective is bounded below"),
                Outcome::Optimal => {}
            }
            let infeasibility = self
                .basis
                .iter()
                .zip(&self.xb)
                .filter(|(b, _)| self.kinds[**b] == Kind::Artificial)
                .fold(T::zero(), |acc, (_, v)| acc.add_ref(v));
            if infeasibility.is_positive() {
                return LpSolution::without_point(LpStatus::Infeasible, self.iterations);
            }
        }
        match self.iterate(Phase::Two, p, generator) {
            Outcome::Unbounded => LpSolution::without_point(LpStatus::Unbounded, self.iterations),
            Outcome::Optimal => self.extract(p),
        }
    }

    fn eligible(&self, phase: Phase, j: usize) -> bool {
        !self.is_basic[j] && !(phase == Phase::Two && self.kinds[j] == Kind::Artificial)
    }

    fn iterate<G: ColumnGenerator<T> + ?Sized>(&mut self, phase: Phase, p: &mut LinearProgram<T>, generator: &mut G) -> Outcome {
        loop {
            let y = self.internal_duals(phase);
            // Bland: lowest-index column with negative reduced cost
            let mut entering = (0..self.cols.len())
                .find(|&j| self.eligible(phase, j) && self.reduced_cost(phase, &y, j).is_negative());
            if entering.is_none() {
                let duals = self.external_duals(phase, p.sense, &y);
                let ctx = PricingContext { phase, sense: p.sense, duals: &duals };
                for column in generator.generate(&ctx) {
                    let var = p.add_column(&column);
                    let c = self.internal_cost(p.sense, &column.cost);
                    self.push_var(var, false, c, column.entries);
                    let j = self.cols.len() - 1;
                    if entering.is_none() && self.reduced_cost(phase, &y, j).is_negative() {
                        entering = Some(j);
                    }
                }
            }
            let Some(q) = entering else {
                return Outcome::Optimal;
            };
            let u = self.direction(q);
            let Some(r) = self.ratio_test(phase, &u) else {
                return Outcome::Unbounded;
            };
            self.pivot(q, r, &u);
            self.iterations += 1;
        }
    }

    fn direction(&self, q: usize) -> Vec<T> {
        (0..self.m)
            .map(|i| {
                self.cols[q]
                    .iter()
                    .fold(T::zero(), |acc, (r, a)| {
                        if self.binv[i][*r].is_zero() {
                            acc
                        } else {
                            acc.add_ref(&self.binv[i][*r].mul_ref(a))
                        }
                    })
            })
            .collect()
    }

    fn ratio_test(&self, phase: Phase, u: &[T]) -> Option<usize> {
        let mut best: Option<(T, usize, usize)> = None;
        for i in 0..self.m {
            let forced = phase == Phase::Two && self.kinds[self.basis[i]] == Kind::Artificial && !u[i].is_zero();
            let ratio = if forced {
                T::zero()
            } else if u[i].is_positive() {
                self.xb[i].div_ref(&u[i])
            } else {
                continue;
            };
            let better = match &best {
                None => true,
                Some((b, _, col)) => ratio < *b || (ratio == *b && self.basis[i] < *col),
            };
            if better {
                best = Some((ratio, i, self.basis[i]));
            }
        }
        best.map(|(_, i, _)| i)
    }

    fn pivot(&mut self, q: usize, r: usize, u: &[T]) {
        let pivot = u[r].clone();
        for k in 0..self.m {
            if !self.binv[r][k].is_zero() {
                self.binv[r][k] = self.binv[r][k].div_ref(&pivot);
            }
        }
        self.xb[r] = self.xb[r].div_ref(&pivot);
        let pivot_row = self.binv[r].clone();
        let theta = self.xb[r].clone();
        for i in 0..self.m {
            if i == r || u[i].is_zero() {
                continue;
            }
            for (k, pk) in pivot_row.iter().enumerate() {
                if !pk.is_zero() {
                    self.binv[i][k] = self.binv[i][k].sub_ref(&u[i].mul_ref(pk));
                }
            }
            self.xb[i] = self.xb[i].sub_ref(&u[i].mul_ref(&theta));
        }
        self.is_basic[self.basis[r]] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
    }

    fn extract(&self, p: &LinearProgram<T>) -> LpSolution<T> {
        let mut primal = vec![T::zero(); p.num_variables()];
        let mut basis = Vec::new();
        for (i, &b) in self.basis.iter().enumerate() {
            if let Kind::Var { var, negated } = self.kinds[b] {
                primal[var] = if negated { primal[var].sub_ref(&self.xb[i]) } else { primal[var].add_ref(&self.xb[i]) };
                basis.push(var);
            }
        }
        basis.sort_unstable();
        basis.dedup();
        let y = self.internal_duals(Phase::Two);
        let dual = self.external_duals(Phase::Two, p.sense, &y);
        LpSolution { status: LpStatus::Optimal, value: p.evaluate(&primal), primal, dual, basis, iterations: self.iterations }
    }
}

fn dot_dense<T: Field>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc.add_ref(&x.mul_ref(y)))
}
