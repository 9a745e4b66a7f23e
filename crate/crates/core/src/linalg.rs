//! Dense matrices over the rationals.
//!
//! Rank, kernel and determinant go through fraction-free (Bareiss)
//! elimination on integerised rows; only the final back substitution for
//! kernel vectors touches rationals.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};

use crate::rational::{self, Rational};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        QMatrix { rows, cols, data }
    }

    /// Builds a matrix from row vectors. Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        QMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_cols(cols: Vec<Vec<Rational>>) -> Self {
        Self::from_rows(cols).transpose()
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| rational::int(v)).collect()).collect())
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn to_cols(&self) -> Vec<Vec<Rational>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &Rational> {
        self.data.iter()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn trace(&self) -> Rational {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)].clone()).sum()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul_mat(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "incompatible shapes");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.rows, v.len());
        (0..self.cols)
            .map(|j| (0..self.rows).filter(|&i| !v[i].is_zero()).map(|i| &v[i] * &self[(i, j)]).sum())
            .collect()
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul_mat(other).sub(&other.mul_mat(self))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            let a = &self[(i / other.rows, j / other.cols)];
            if a.is_zero() {
                return Rational::zero();
            }
            a * &other[(i % other.rows, j % other.cols)]
        })
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_rows(idx.iter().map(|&i| self.row(i).to_vec()).collect())
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    /// Stacks blocks vertically; all blocks must share the column count.
    pub fn vstack(blocks: &[QMatrix]) -> Self {
        let cols = blocks.first().map_or(0, |b| b.cols);
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            assert_eq!(b.cols, cols);
            rows += b.rows;
            data.extend(b.data.iter().cloned());
        }
        QMatrix { rows, cols, data }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::identity(self.rows);
        for _ in 0..e {
            acc = acc.mul_mat(self);
        }
        acc
    }

    /// Exponential of a nilpotent matrix as a finite sum; `None` if the
    /// matrix is not nilpotent.
    pub fn exp_nilpotent(&self) -> Option<Self> {
        assert!(self.is_square());
        let mut acc = Self::identity(self.rows);
        let mut term = Self::identity(self.rows);
        for k in 1..=self.rows {
            term = term.mul_mat(self).scale(&Rational::new(BigInt::one(), BigInt::from(k)));
            if term.is_zero() {
                return Some(acc);
            }
            acc = acc.add(&term);
        }
        if term.mul_mat(self).is_zero() {
            Some(acc)
        } else {
            None
        }
    }

    pub fn max_abs(&self) -> Rational {
        self.data.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)
    }

    pub fn det(&self) -> Rational {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Rational::one();
        }
        let (mut rows, scale) = integerize_rows(self);
        let mut sign = false;
        let mut prev = BigInt::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !rows[r][c].is_zero()) else {
                return Rational::zero();
            };
            if p != c {
                rows.swap(p, c);
                sign = !sign;
            }
            bareiss_step(&mut rows, c, c, &prev);
            prev = rows[c][c].clone();
        }
        let det = if sign { -prev } else { prev };
        Rational::new(det, scale)
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.to_rows();
        let mut inv = Self::identity(n).to_rows();
        for c in 0..n {
            let p = (c..n).find(|&r| !a[r][c].is_zero())?;
            a.swap(p, c);
            inv.swap(p, c);
            let piv = a[c][c].recip();
            for j in 0..n {
                a[c][j] *= &piv;
                inv[c][j] *= &piv;
            }
            for r in 0..n {
                if r == c || a[r][c].is_zero() {
                    continue;
                }
                let f = a[r][c].clone();
                for j in 0..n {
                    let t = &f * &a[c][j];
                    a[r][j] -= t;
                    let t = &f * &inv[c][j];
                    inv[r][j] -= t;
                }
            }
        }
        Some(Self::from_rows(inv))
    }

    pub fn rank(&self) -> usize {
        echelon(self).pivots.len()
    }

    /// Basis of the right kernel `{x : A x = 0}`, each vector scaled to a
    /// primitive integer vector.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let ech = echelon(self);
        let free: Vec<usize> = (0..self.cols).filter(|c| !ech.pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut x = vec![Rational::zero(); self.cols];
            x[f] = Rational::one();
            for (i, &p) in ech.pivots.iter().enumerate().rev() {
                let row = &ech.rows[i];
                let mut acc = Rational::zero();
                for j in p + 1..self.cols {
                    if !row[j].is_zero() && !x[j].is_zero() {
                        acc += Rational::from_integer(row[j].clone()) * &x[j];
                    }
                }
                x[p] = -acc / Rational::from_integer(row[p].clone());
            }
            basis.push(primitive(x));
        }
        basis
    }
}

struct Echelon {
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

/// Fraction-free row echelon form of the integerised matrix.
fn echelon(m: &QMatrix) -> Echelon {
    let (mut rows, _) = integerize_rows(m);
    let nrows = m.rows;
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..m.cols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(p, r);
        bareiss_step(&mut rows, r, c, &prev);
        prev = rows[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    Echelon { rows, pivots }
}

/// One Bareiss elimination step below pivot `(r, c)`; the division by the
/// previous pivot is exact.
fn bareiss_step(rows: &mut [Vec<BigInt>], r: usize, c: usize, prev: &BigInt) {
    let (top, bottom) = rows.split_at_mut(r + 1);
    let pivot_row = &top[r];
    let piv = &pivot_row[c];
    for row in bottom.iter_mut() {
        let factor = row[c].clone();
        for j in c + 1..row.len() {
            let v = piv * &row[j] - &factor * &pivot_row[j];
            row[j] = if prev.is_one() {
                v
            } else {
                debug_assert!((&v % prev).is_zero(), "inexact Bareiss division");
                v / prev
            };
        }
        row[c] = BigInt::zero();
    }
}

/// Clears denominators row by row. Returns the integer rows and the product
/// of the per-row scale factors.
fn integerize_rows(m: &QMatrix) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut total = BigInt::one();
    let rows = (0..m.rows)
        .map(|i| {
            let row = m.row(i);
            let l = rational::lcm_of_denominators(row);
            total *= &l;
            row.iter().map(|q| q.numer() * (&l / q.denom())).collect()
        })
        .collect();
    (rows, total)
}

/// Scales a nonzero rational vector to a primitive integer vector whose first
/// nonzero entry is positive.
pub fn primitive(v: Vec<Rational>) -> Vec<Rational> {
    let l = rational::lcm_of_denominators(&v);
    let ints: Vec<BigInt> = v.iter().map(|q| q.numer() * (&l / q.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return v;
    }
    let sign = ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    ints.into_iter()
        .map(|x| {
            let y = x / &g;
            Rational::from_integer(if sign { -y } else { y })
        })
        .collect()
}

/// Rank of a list of row vectors.
pub fn rank_of_rows(rows: &[Vec<Rational>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    QMatrix::from_rows(rows.to_vec()).rank()
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &QMatrix {
    type Output = QMatrix;
    fn mul(self, rhs: &QMatrix) -> QMatrix {
        self.mul_mat(rhs)
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str("; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(|q| q.to_string()).collect();
            f.write_str(&row.join(", "))?;
        }
        f.write_str("]")
    }
}
