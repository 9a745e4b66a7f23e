//! Exact elements of `SL(n, Q)` and the one-parameter families acting on
//! the space of unimodular lattices.
//!
//! Time is multiplicative: a [`FlowScale`] `r` stands for `e^t`, so that
//! `a_{log N}` has rational entries for every integer `N`.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::linalg::QMatrix;
use crate::rational::{self, Rational};
use crate::{Error, Result};

/// `e^t` as a positive rational.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlowScale(#[serde(with = "rational::serde_q")] Rational);

impl FlowScale {
    pub fn new(r: Rational) -> Result<Self> {
        if r.is_positive() {
            Ok(FlowScale(r))
        } else {
            Err(Error::InvalidScale(rational::format(&r)))
        }
    }

    pub fn from_integer(n: u64) -> Result<Self> {
        Self::new(Rational::from_integer(n.into()))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    /// `t = log r`, for reporting only.
    pub fn log(&self) -> f64 {
        rational::to_f64(&self.0).ln()
    }
}

/// An `n x n` rational matrix of determinant exactly one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    m: QMatrix,
}

impl GroupElement {
    pub fn new(m: QMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() < 1 {
            return Err(Error::Dimension(format!("{}x{} is not square", m.nrows(), m.ncols())));
        }
        let d = m.det();
        if !d.is_one() {
            return Err(Error::NotUnimodular(rational::format(&d)));
        }
        Ok(GroupElement { m })
    }

    /// Callers guarantee `det m = 1`.
    pub(crate) fn new_unchecked(m: QMatrix) -> Self {
        debug_assert!(m.det().is_one());
        GroupElement { m }
    }

    pub fn identity(n: usize) -> Self {
        GroupElement { m: QMatrix::identity(n) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &QMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> QMatrix {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.m[(i, j)]
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        GroupElement { m: self.m.mul_mat(&other.m) }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement { m: self.m.inverse().expect("determinant one") }
    }

    pub fn conjugate(&self, by: &GroupElement) -> GroupElement {
        by.mul(self).mul(&by.inverse())
    }

    pub fn apply(&self, v: &[Rational]) -> Vec<Rational> {
        self.m.mul_vec(v)
    }

    /// Block form `diag(alpha, M)`: the centralizer of the diagonal flow.
    pub fn is_in_centralizer(&self) -> bool {
        let n = self.dim();
        (1..n).all(|j| self.m[(0, j)].is_zero() && self.m[(j, 0)].is_zero())
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement{:?}", self.m)
    }
}

impl std::ops::Mul for &GroupElement {
    type Output = GroupElement;
    fn mul(self, rhs: &GroupElement) -> GroupElement {
        GroupElement::mul(self, rhs)
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Dimension(format!("n = {n}, expected n >= 2")));
    }
    Ok(())
}

/// `a_t = diag(r^{n-1}, r^{-1}, ..., r^{-1})`.
pub fn make_a(r: &FlowScale, n: usize) -> Result<GroupElement> {
    check_dim(n)?;
    let r = r.value();
    let mut d = vec![r.recip(); n];
    d[0] = rational::pow(r, n as i64 - 1);
    Ok(GroupElement::new_unchecked(QMatrix::diagonal(&d)))
}

/// `a'_t = diag(r, ..., r, r^{-(n-1)})`.
pub fn make_a_prime(r: &FlowScale, n: usize) -> Result<GroupElement> {
    check_dim(n)?;
    let r = r.value();
    let mut d = vec![r.clone(); n];
    d[n - 1] = rational::pow(r, 1 - n as i64);
    Ok(GroupElement::new_unchecked(QMatrix::diagonal(&d)))
}

/// Identity with top row `(1, xi_1, ..., xi_{n-1})`.
pub fn make_u(xi: &[Rational]) -> GroupElement {
    let n = xi.len() + 1;
    let mut m = QMatrix::identity(n);
    for (j, x) in xi.iter().enumerate() {
        m[(0, j + 1)] = x.clone();
    }
    GroupElement::new_unchecked(m)
}

/// Identity with last column `(xi_{n-1}, ..., xi_1, 1)` read from the top.
pub fn make_u_prime(xi: &[Rational]) -> GroupElement {
    let n = xi.len() + 1;
    let mut m = QMatrix::identity(n);
    for (i, x) in xi.iter().rev().enumerate() {
        m[(i, n - 1)] = x.clone();
    }
    GroupElement::new_unchecked(m)
}

/// `sigma(g) = s (g^T)^{-1} s^{-1}` with `s` the coordinate reversal.
///
/// With this `s`, `sigma(a_t) = a'_t` and `sigma(u(xi)) = u'(-xi)`.
pub fn sigma(g: &GroupElement) -> GroupElement {
    let n = g.dim();
    let inv_t = g.m.inverse().expect("determinant one").transpose();
    GroupElement::new_unchecked(QMatrix::from_fn(n, n, |i, j| inv_t[(n - 1 - i, n - 1 - j)].clone()))
}

/// The action of `z = diag(alpha, M)` on row vectors fixed by
/// `u(z . e) = z u(e) z^{-1}`, i.e. `z . e = alpha e M^{-1}`.
pub fn act_on_row(z: &GroupElement, e: &[Rational]) -> Result<Vec<Rational>> {
    let n = z.dim();
    if e.len() + 1 != n {
        return Err(Error::Dimension(format!("row of length {} for n = {n}", e.len())));
    }
    if !z.is_in_centralizer() {
        return Err(Error::NotInCentralizer(format!("{:?}", z)));
    }
    let alpha = &z.m[(0, 0)];
    let idx: Vec<usize> = (1..n).collect();
    let block_inv = z.m.submatrix(&idx, &idx).inverse().expect("invertible block");
    Ok(block_inv.vec_mul(e).into_iter().map(|x| x * alpha).collect())
}

/// `diag(alpha, M)` with `alpha det M = 1`.
pub fn centralizer_element(alpha: &Rational, block: &QMatrix) -> Result<GroupElement> {
    let k = block.nrows();
    let mut m = QMatrix::zeros(k + 1, k + 1);
    m[(0, 0)] = alpha.clone();
    for i in 0..k {
        for j in 0..k {
            m[(i + 1, j + 1)] = block[(i, j)].clone();
        }
    }
    GroupElement::new(m)
}
