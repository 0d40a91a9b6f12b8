//! Integer matrices: Hermite normal form, kernel lattices, and solving linear
//! systems over ℤ and ℤ/N.

use std::fmt;

use super::Ring;

/// Dense integer matrix stored by rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix<I> {
    rows: usize,
    cols: usize,
    data: Vec<Vec<I>>,
}

impl<I: Ring> IntMatrix<I> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![vec![I::zero(); cols]; rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = I::one();
        }
        m
    }

    /// Builds a matrix from rows of equal length; `cols` fixes the width when
    /// there are no rows.
    pub fn from_rows(data: Vec<Vec<I>>, cols: usize) -> Self {
        assert!(data.iter().all(|r| r.len() == cols), "ragged matrix");
        IntMatrix { rows: data.len(), cols, data }
    }

    pub fn from_i64(data: &[&[i64]]) -> Self {
        let cols = data.first().map_or(0, |r| r.len());
        Self::from_rows(data.iter().map(|r| r.iter().map(|&v| I::from(v)).collect()).collect(), cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[I] {
        &self.data[i]
    }

    pub fn get(&self, i: usize, j: usize) -> &I {
        &self.data[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: I) {
        self.data[i][j] = v;
    }

    pub fn push_row(&mut self, row: Vec<I>) {
        assert_eq!(row.len(), self.cols, "row length mismatch");
        self.data.push(row);
        self.rows += 1;
    }

    pub fn into_rows(self) -> Vec<Vec<I>> {
        self.data
    }

    pub fn transpose(&self) -> Self {
        let data = (0..self.cols).map(|j| (0..self.rows).map(|i| self.data[i][j].clone()).collect()).collect();
        IntMatrix { rows: self.cols, cols: self.rows, data }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.data[i][k].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i][j] = out.data[i][j].clone() + self.data[i][k].clone() * other.data[k][j].clone();
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[I]) -> Vec<I> {
        assert_eq!(self.cols, x.len(), "dimension mismatch");
        self.data
            .iter()
            .map(|r| r.iter().zip(x).fold(I::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
            .collect()
    }

    fn row_axpy(&mut self, target: usize, q: &I, source: usize) {
        // row[target] -= q * row[source]
        for j in 0..self.cols {
            if !self.data[source][j].is_zero() {
                let v = self.data[target][j].clone() - q.clone() * self.data[source][j].clone();
                self.data[target][j] = v;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for v in &mut self.data[i] {
            *v = -v.clone();
        }
    }
}

impl<I: Ring> fmt::Display for IntMatrix<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.data {
            let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// Row Hermite normal form: returns `(H, U)` with `U` unimodular and
/// `H = U·A` in echelon form, pivots positive, and entries above each pivot
/// reduced into `[0, pivot)`.
pub fn hermite_normal_form<I: Ring>(a: &IntMatrix<I>) -> (IntMatrix<I>, IntMatrix<I>) {
    let mut h = a.clone();
    let mut u = IntMatrix::identity(a.rows);
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        loop {
            let pivot = (r..a.rows)
                .filter(|&i| !h.data[i][c].is_zero())
                .min_by(|&i, &j| h.data[i][c].abs().cmp(&h.data[j][c].abs()).then(i.cmp(&j)));
            let Some(p) = pivot else { break };
            h.data.swap(r, p);
            u.data.swap(r, p);
            let mut done = true;
            for i in r + 1..a.rows {
                if h.data[i][c].is_zero() {
                    continue;
                }
                let q = h.data[i][c].div_floor(&h.data[r][c]);
                h.row_axpy(i, &q, r);
                u.row_axpy(i, &q, r);
                if !h.data[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h.data[r][c].is_zero() {
            continue;
        }
        if h.data[r][c].is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        for i in 0..r {
            let q = h.data[i][c].div_floor(&h.data[r][c]);
            if !q.is_zero() {
                h.row_axpy(i, &q, r);
                u.row_axpy(i, &q, r);
            }
        }
        r += 1;
    }
    (h, u)
}

fn nonzero_rows<I: Ring>(h: &IntMatrix<I>) -> usize {
    h.data.iter().take_while(|r| r.iter().any(|v| !v.is_zero())).count()
}

pub fn integer_rank<I: Ring>(a: &IntMatrix<I>) -> usize {
    nonzero_rows(&hermite_normal_form(a).0)
}

/// Basis (as rows, in Hermite normal form) of the lattice `{x ∈ ℤⁿ : A·x = 0}`.
pub fn kernel_lattice_basis<I: Ring>(a: &IntMatrix<I>) -> IntMatrix<I> {
    let (h, u) = hermite_normal_form(&a.transpose());
    let rank = nonzero_rows(&h);
    let rows: Vec<Vec<I>> = u.data[rank..].to_vec();
    let kernel = IntMatrix::from_rows(rows, a.cols);
    let (hk, _) = hermite_normal_form(&kernel);
    hk
}

/// Some integer solution of `A·x = b`, if one exists.
pub fn solve_integer_system<I: Ring>(a: &IntMatrix<I>, b: &[I]) -> Option<Vec<I>> {
    assert_eq!(a.rows, b.len(), "dimension mismatch");
    let (h, u) = hermite_normal_form(&a.transpose());
    // x = Uᵀz, so zᵀH = bᵀ
    let mut residual = b.to_vec();
    let mut z = vec![I::zero(); a.cols];
    for (k, row) in h.data.iter().enumerate() {
        let Some(c) = row.iter().position(|v| !v.is_zero()) else { break };
        let (q, rem) = residual[c].div_rem(&row[c]);
        if !rem.is_zero() {
            return None;
        }
        for (res, v) in residual.iter_mut().zip(row) {
            *res = res.clone() - q.clone() * v.clone();
        }
        z[k] = q;
    }
    if residual.iter().any(|v| !v.is_zero()) {
        return None;
    }
    Some(u.transpose().mul_vec(&z))
}

/// Some solution of `M·x ≡ b (mod N)` with entries in `[0, N)`.
pub fn solve_mod_n<I: Ring>(m: &IntMatrix<I>, b: &[I], n: &I) -> Option<Vec<I>> {
    assert!(n.is_positive(), "modulus must be positive");
    let rows = m.rows;
    let mut ext = IntMatrix::zeros(rows, m.cols + rows);
    for i in 0..rows {
        for j in 0..m.cols {
            ext.data[i][j] = m.data[i][j].clone();
        }
        ext.data[i][m.cols + i] = n.clone();
    }
    let x = solve_integer_system(&ext, b)?;
    Some(x[..m.cols].iter().map(|v| v.mod_floor(n)).collect())
}

/// Determinant by fraction-free (Bareiss) elimination.
pub fn determinant<I: Ring>(a: &IntMatrix<I>) -> I {
    assert_eq!(a.rows, a.cols, "determinant of a non-square matrix");
    let n = a.rows;
    let mut m = a.data.clone();
    let mut sign = I::one();
    let mut prev = I::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return I::zero();
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j].clone() * m[k][k].clone() - m[i][k].clone() * m[k][j].clone();
                m[i][j] = v / prev.clone();
            }
        }
        prev = m[k][k].clone();
    }
    if n == 0 {
        I::one()
    } else {
        sign * m[n - 1][n - 1].clone()
    }
}

fn inverse_mod<I: Ring>(a: &I, p: &I) -> I {
    let e = a.extended_gcd(p);
    assert!(e.gcd.is_one(), "element not invertible mod p");
    e.x.mod_floor(p)
}

/// Rank over `GF(p)` and a basis of the right nullspace `{x : A·x ≡ 0}`,
/// entries in `[0, p)`. `p` must be prime.
pub fn kernel_mod_prime<I: Ring>(a: &IntMatrix<I>, p: &I) -> (usize, Vec<Vec<I>>) {
    let mut m: Vec<Vec<I>> = a.data.iter().map(|r| r.iter().map(|v| v.mod_floor(p)).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        let Some(pr) = (r..a.rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, pr);
        let inv = inverse_mod(&m[r][c], p);
        for v in &mut m[r] {
            *v = (v.clone() * inv.clone()).mod_floor(p);
        }
        for i in 0..a.rows {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in 0..a.cols {
                let v = (m[i][j].clone() - f.clone() * m[r][j].clone()).mod_floor(p);
                m[i][j] = v;
            }
        }
        pivots.push(c);
        r += 1;
        if r == a.rows {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in (0..a.cols).filter(|c| !pivots.contains(c)) {
        let mut x = vec![I::zero(); a.cols];
        x[free] = I::one();
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = (-m[row][free].clone()).mod_floor(p);
        }
        basis.push(x);
    }
    (pivots.len(), basis)
}
