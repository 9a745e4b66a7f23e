//! Unimodular lattices `g Z^n` and their sup-norm geometry.

mod enumerate;
mod hnf;
mod lll;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::groups::GroupElement;
use crate::linalg::QMatrix;
use crate::rational::{self, Rational};
use crate::{Error, Result};

pub use enumerate::{points_in_box_direct, BoxEnumerator, DEFAULT_BUDGET};
pub use hnf::hermite_normal_form;
pub use lll::DELTA as LLL_DELTA;

/// A lattice generated by the columns of a rational basis with `|det| = 1`.
/// Equality is equality of lattices, not of bases.
#[derive(Clone, Debug)]
pub struct UnimodularLattice {
    basis: QMatrix,
}

impl UnimodularLattice {
    pub fn new(basis: QMatrix) -> Result<Self> {
        if !basis.is_square() || basis.nrows() < 1 {
            return Err(Error::Dimension("lattice basis must be square".into()));
        }
        let d = basis.det();
        if !d.abs().is_one() {
            return Err(Error::NotUnimodular(rational::format(&d)));
        }
        Ok(UnimodularLattice { basis })
    }

    pub fn standard(n: usize) -> Self {
        UnimodularLattice { basis: QMatrix::identity(n) }
    }

    /// The lattice `g Z^n`.
    pub fn from_group_element(g: &GroupElement) -> Self {
        UnimodularLattice { basis: g.matrix().clone() }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &QMatrix {
        &self.basis
    }

    /// `(D, columns of D * basis)` with `D` the least common denominator.
    pub(crate) fn integer_columns(&self) -> (BigInt, Vec<Vec<BigInt>>) {
        let d = rational::lcm_of_denominators(self.basis.entries());
        let cols = (0..self.dim())
            .map(|j| {
                (0..self.dim())
                    .map(|i| {
                        let q = &self.basis[(i, j)];
                        q.numer() * (&d / q.denom())
                    })
                    .collect()
            })
            .collect();
        (d, cols)
    }

    /// Canonical basis: the column Hermite normal form, scaled back to the
    /// rationals. Two lattices are equal iff these agree.
    pub fn hermite_basis(&self) -> QMatrix {
        let (d, cols) = self.integer_columns();
        let n = self.dim();
        let rows: Vec<Vec<BigInt>> = (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect();
        let h = hermite_normal_form(rows);
        QMatrix::from_fn(n, n, |i, j| BigRational::new(h[i][j].clone(), d.clone()))
    }

    /// Applies `g`, giving the lattice `g L`.
    pub fn transform(&self, g: &GroupElement) -> Self {
        UnimodularLattice { basis: g.matrix().mul_mat(&self.basis) }
    }
}

impl PartialEq for UnimodularLattice {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.hermite_basis() == other.hermite_basis()
    }
}

impl Eq for UnimodularLattice {}

#[derive(Serialize, Deserialize)]
struct LatticeJson {
    n: usize,
    #[serde(with = "rational::serde_q::vec2")]
    basis: Vec<Vec<Rational>>,
}

impl Serialize for UnimodularLattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LatticeJson { n: self.dim(), basis: self.basis.to_cols() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnimodularLattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = LatticeJson::deserialize(d)?;
        if j.basis.len() != j.n || j.basis.iter().any(|c| c.len() != j.n) {
            return Err(D::Error::custom("basis must be n columns of length n"));
        }
        UnimodularLattice::new(QMatrix::from_cols(j.basis)).map_err(D::Error::custom)
    }
}

/// The closed box `max_i |v_i| <= mu`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupBox {
    mu: Rational,
}

impl SupBox {
    pub fn new(mu: Rational) -> Result<Self> {
        if !mu.is_positive() {
            return Err(Error::Domain(format!("box radius {} must be positive", rational::format(&mu))));
        }
        Ok(SupBox { mu })
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    pub fn volume(&self, n: usize) -> Rational {
        rational::pow(&(&self.mu * Rational::from_integer(2.into())), n as i64)
    }
}

/// A lattice vector with its integer coordinates in the lattice basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePoint {
    #[serde(with = "rational::serde_z::vec")]
    pub coords: Vec<BigInt>,
    #[serde(with = "rational::serde_q::vec")]
    pub ambient: Vec<Rational>,
}

impl LatticePoint {
    pub fn sup_norm(&self) -> Rational {
        self.ambient.iter().map(|x| x.abs()).max().unwrap_or_default()
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.ambient.iter().map(|x| rational::to_f64(x).powi(2)).sum::<f64>().sqrt()
    }
}

pub fn points_in_box(lattice: &UnimodularLattice, b: &SupBox) -> Result<Vec<LatticePoint>> {
    BoxEnumerator::new(lattice).points(b)
}

/// Membership in `K_mu = { L : L meets the closed box B_mu only at 0 }`.
pub fn is_in_k(lattice: &UnimodularLattice, mu: &Rational) -> Result<bool> {
    BoxEnumerator::new(lattice).avoids(&SupBox::new(mu.clone())?)
}

pub fn shortest_vector(lattice: &UnimodularLattice) -> Result<(LatticePoint, Rational)> {
    BoxEnumerator::new(lattice).shortest()
}

/// Same lattice with an LLL-reduced basis (`delta = 99/100`).
pub fn lll_reduce(lattice: &UnimodularLattice) -> UnimodularLattice {
    let (d, cols) = lattice.integer_columns();
    let red = lll::reduce(cols);
    let cols: Vec<Vec<Rational>> = red
        .cols
        .into_iter()
        .map(|c| c.into_iter().map(|x| BigRational::new(x, d.clone())).collect())
        .collect();
    UnimodularLattice { basis: QMatrix::from_cols(cols) }
}

#[cfg(test)]
mod tests;
