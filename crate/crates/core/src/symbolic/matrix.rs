//! Exact linear algebra over the field of rational functions.
//!
//! Echelon forms use fraction-free (Bareiss) elimination with the leftmost
//! pivot rule: at each step the pivot is the first row, in row order, with a
//! nonzero entry in the leftmost remaining column. Every routine here is
//! deterministic given the input matrix.

use std::sync::Arc;

use num_traits::Zero;

use super::expr::Expr;
use super::poly::Rational;
use super::registry::VariableRegistry;

#[derive(Clone, Debug)]
pub struct ExprMatrix {
    reg: Arc<VariableRegistry>,
    rows: usize,
    cols: usize,
    data: Vec<Expr>,
}

/// Outcome of solving `A x = b` exactly.
#[derive(Clone, Debug)]
pub enum Solution {
    Unique(Vec<Expr>),
    /// Consistent with free parameters; the particular solution sets them to zero.
    Underdetermined { particular: Vec<Expr>, free_columns: Vec<usize> },
    Inconsistent { row: usize, residual: Expr },
}

impl PartialEq for ExprMatrix {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.reg, &other.reg)
            && self.rows == other.rows
            && self.cols == other.cols
            && self.data == other.data
    }
}

impl ExprMatrix {
    pub fn zeros(reg: &Arc<VariableRegistry>, rows: usize, cols: usize) -> Self {
        ExprMatrix { reg: reg.clone(), rows, cols, data: vec![Expr::zero(reg); rows * cols] }
    }

    pub fn identity(reg: &Arc<VariableRegistry>, n: usize) -> Self {
        let mut m = Self::zeros(reg, n, n);
        for i in 0..n {
            m.set(i, i, Expr::one(reg));
        }
        m
    }

    pub fn from_rows(reg: &Arc<VariableRegistry>, rows: Vec<Vec<Expr>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        ExprMatrix { reg: reg.clone(), rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(
        reg: &Arc<VariableRegistry>,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Expr,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ExprMatrix { reg: reg.clone(), rows, cols, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(reg: &Arc<VariableRegistry>, nrows: usize, cols: &[Vec<Expr>]) -> Self {
        Self::from_fn(reg, nrows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn registry(&self) -> &Arc<VariableRegistry> {
        &self.reg
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Expr) {
        self.data[i * self.cols + j] = e;
    }

    pub fn row(&self, i: usize) -> Vec<Expr> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<Expr> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.reg, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Expr::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).is_zero()))
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..=i).all(|j| (self.get(i, j) + self.get(j, i)).is_zero()))
    }

    pub fn mul(&self, other: &ExprMatrix) -> ExprMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        Self::from_fn(&self.reg, self.rows, other.cols, |i, j| {
            (0..self.cols).fold(Expr::zero(&self.reg), |acc, k| {
                let a = self.get(i, k);
                let b = other.get(k, j);
                if a.is_zero() || b.is_zero() {
                    acc
                } else {
                    &acc + &(a * b)
                }
            })
        })
    }

    pub fn mul_vec(&self, v: &[Expr]) -> Vec<Expr> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(Expr::zero(&self.reg), |acc, k| {
                    let a = self.get(i, k);
                    if a.is_zero() || v[k].is_zero() {
                        acc
                    } else {
                        &acc + &(a * &v[k])
                    }
                })
            })
            .collect()
    }

    pub fn add(&self, other: &ExprMatrix) -> ExprMatrix {
        Self::from_fn(&self.reg, self.rows, self.cols, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &ExprMatrix) -> ExprMatrix {
        Self::from_fn(&self.reg, self.rows, self.cols, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn scale(&self, e: &Expr) -> ExprMatrix {
        Self::from_fn(&self.reg, self.rows, self.cols, |i, j| self.get(i, j) * e)
    }

    /// Bilinear form `aᵀ M b`.
    pub fn bilinear(&self, a: &[Expr], b: &[Expr]) -> Expr {
        let mb = self.mul_vec(b);
        a.iter().zip(&mb).fold(Expr::zero(&self.reg), |acc, (x, y)| &acc + &(x * y))
    }

    /// Fraction-free echelon form and the pivot columns.
    pub fn echelon(&self) -> (ExprMatrix, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut prev = Expr::one(&self.reg);
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !a.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    a.data.swap(p * self.cols + j, r * self.cols + j);
                }
            }
            let piv = a.get(r, c).clone();
            for i in r + 1..self.rows {
                let f = a.get(i, c).clone();
                for j in c + 1..self.cols {
                    let v = &(&piv * a.get(i, j)) - &(&f * a.get(r, j));
                    a.set(i, j, &v / &prev);
                }
                a.set(i, c, Expr::zero(&self.reg));
            }
            // Rows above keep their scale; entries left of the pivot in lower rows are zero.
            for i in r + 1..self.rows {
                for j in 0..c {
                    debug_assert!(a.get(i, j).is_zero());
                }
            }
            prev = piv;
            pivots.push(c);
            r += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.echelon().1.len()
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (ExprMatrix, Vec<usize>) {
        let (mut a, pivots) = self.echelon();
        for (r, &c) in pivots.iter().enumerate().rev() {
            let piv = a.get(r, c).clone();
            if !(&piv - &Expr::one(&self.reg)).is_zero() {
                for j in c..self.cols {
                    let v = a.get(r, j) / &piv;
                    a.set(r, j, v);
                }
            }
            for i in 0..r {
                let f = a.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in c..self.cols {
                    let v = a.get(i, j) - &(&f * a.get(r, j));
                    a.set(i, j, v);
                }
            }
        }
        (a, pivots)
    }

    /// Basis of the right nullspace: one vector per free column, in column
    /// order, with a one in its free slot.
    pub fn nullspace(&self) -> Vec<Vec<Expr>> {
        let (rref, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Expr::zero(&self.reg); self.cols];
                v[f] = Expr::one(&self.reg);
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = -rref.get(r, f);
                }
                v
            })
            .collect()
    }

    pub fn solve(&self, b: &[Expr]) -> Solution {
        assert_eq!(b.len(), self.rows, "dimension mismatch");
        let aug = Self::from_fn(&self.reg, self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                b[i].clone()
            }
        });
        let (rref, pivots) = aug.rref();
        if let Some(&last) = pivots.last() {
            if last == self.cols {
                let row = pivots.len() - 1;
                return Solution::Inconsistent { row, residual: rref.get(row, self.cols).clone() };
            }
        }
        let mut x = vec![Expr::zero(&self.reg); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = rref.get(r, self.cols).clone();
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        if free.is_empty() {
            Solution::Unique(x)
        } else {
            Solution::Underdetermined { particular: x, free_columns: free }
        }
    }

    pub fn inverse(&self) -> Option<ExprMatrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let aug = Self::from_fn(&self.reg, n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else if j - n == i {
                Expr::one(&self.reg)
            } else {
                Expr::zero(&self.reg)
            }
        });
        let (rref, pivots) = aug.rref();
        if pivots.len() < n || (n > 0 && pivots[n - 1] != n - 1) {
            return None;
        }
        Some(Self::from_fn(&self.reg, n, n, |i, j| rref.get(i, n + j).clone()))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> ExprMatrix {
        Self::from_fn(&self.reg, rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    /// Exact evaluation at a rational point; `None` on a pole.
    pub fn eval_rational(&self, point: &[Rational]) -> Option<Vec<Vec<Rational>>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).eval_rational(point).ok()).collect())
            .collect()
    }
}

/// Rank of a dense rational matrix.
pub fn rational_rank(mut m: Vec<Vec<Rational>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(p, r);
        let inv = m[r][c].clone().recip();
        for i in r + 1..rows {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] * &inv;
            for j in c..cols {
                let v = &m[r][j] * &f;
                m[i][j] -= v;
            }
        }
        r += 1;
    }
    r
}

/// Basis of the right nullspace of a dense rational matrix with `cols`
/// columns, one vector per free column.
pub fn rational_nullspace(mut m: Vec<Vec<Rational>>, cols: usize) -> Vec<Vec<Rational>> {
    let rows = m.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(p, r);
        let inv = m[r][c].clone().recip();
        for j in c..cols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..rows {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in c..cols {
                let v = &m[r][j] * &f;
                m[i][j] -= v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rational::from_integer(0.into()); cols];
            v[free] = Rational::from_integer(1.into());
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[row][free].clone();
            }
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse;

    fn reg() -> Arc<VariableRegistry> {
        VariableRegistry::with_names(&["a", "b"]).unwrap()
    }

    fn m(r: &Arc<VariableRegistry>, rows: &[&[&str]]) -> ExprMatrix {
        ExprMatrix::from_rows(
            r,
            rows.iter().map(|row| row.iter().map(|s| parse(s, r).unwrap()).collect()).collect(),
        )
    }

    #[test]
    fn nullspace_of_difference_hessian() {
        let r = reg();
        let w = m(&r, &[&["1", "-1"], &["-1", "1"]]);
        let ns = w.nullspace();
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0], vec![Expr::one(&r), Expr::one(&r)]);
    }

    #[test]
    fn symbolic_rank_and_inverse() {
        let r = reg();
        let w = m(&r, &[&["1 + a^2", "b"], &["b", "1"]]);
        assert_eq!(w.rank(), 2);
        let inv = w.inverse().unwrap();
        assert_eq!(w.mul(&inv), ExprMatrix::identity(&r, 2));
        let sing = m(&r, &[&["a", "a*b"], &["1", "b"]]);
        assert_eq!(sing.rank(), 1);
        assert!(sing.inverse().is_none());
    }

    #[test]
    fn solve_reports_inconsistency() {
        let r = reg();
        let a = m(&r, &[&["1", "0"], &["0", "0"]]);
        let one = Expr::one(&r);
        match a.solve(&[one.clone(), one.clone()]) {
            Solution::Inconsistent { .. } => {}
            other => panic!("expected inconsistency, got {other:?}"),
        }
        match a.solve(&[one.clone(), Expr::zero(&r)]) {
            Solution::Underdetermined { free_columns, .. } => assert_eq!(free_columns, vec![1]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
