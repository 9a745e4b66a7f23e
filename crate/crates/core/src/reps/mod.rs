//! Finite-dimensional representations of `SL(n)` over the rationals, their
//! weight decompositions for `A = diag(n-1, -1, ..., -1)`, and exact checks
//! of the Basic Lemma and its corollaries.
//!
//! Bases: the standard one for `std`, the dual basis for `dual`, the matrices
//! `E_ij` (`i != j`, row-major) followed by `H_k = E_kk - E_{k+1,k+1}` for
//! `adjoint`, sorted index subsets for `wedge`, sorted index multisets for
//! `sym` and the Kronecker basis for `tensor`. Every basis vector is a weight
//! vector, so `group_action(a_r)` is diagonal.

mod spec;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curves::PolyCurve;
use crate::error::{Error, Result};
use crate::groups::{make_a, make_u, FlowScale, GroupElement};
use crate::linalg::{rank_of_rows, QMatrix};
use crate::rational::{self, Rational};

pub use spec::RepSpec;

/// Default cap on the representation dimension.
pub const DEFAULT_DIM_CAP: usize = 500;

/// A representation of `SL(n)` together with its weights.
#[derive(Clone, Debug)]
pub struct Representation {
    n: usize,
    spec: RepSpec,
    dim: usize,
    weights: WeightDecomposition,
}

pub fn build_rep(spec: &RepSpec, n: usize) -> Result<Representation> {
    build_rep_with_cap(spec, n, DEFAULT_DIM_CAP)
}

pub fn build_rep_with_cap(spec: &RepSpec, n: usize, cap: usize) -> Result<Representation> {
    if n < 2 {
        return Err(Error::Dimension(format!("n = {n}, expected n >= 2")));
    }
    let dim = spec.dim(n).unwrap_or(usize::MAX);
    if dim > cap {
        return Err(Error::RepresentationTooLarge { dim, cap });
    }
    let mut rep = Representation { n, spec: spec.clone(), dim, weights: WeightDecomposition { weights: Vec::new() } };
    rep.weights = weight_decomposition(&rep)?;
    Ok(rep)
}

/// Basis of `wedge^d` or `sym^d`: sorted index tuples in lexicographic order.
fn tuples(base: usize, d: usize, strict: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d);
    fn rec(base: usize, d: usize, strict: bool, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..base {
            cur.push(i);
            rec(base, d, strict, if strict { i + 1 } else { i }, cur, out);
            cur.pop();
        }
    }
    rec(base, d, strict, 0, &mut cur, &mut out);
    out
}

fn index_of(basis: &[Vec<usize>]) -> HashMap<Vec<usize>, usize> {
    basis.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect()
}

/// Sorts in place and returns the permutation sign, or `None` on a repeat.
fn sort_signed(t: &mut [usize]) -> Option<bool> {
    let mut neg = false;
    for i in 1..t.len() {
        let mut j = i;
        while j > 0 && t[j - 1] > t[j] {
            t.swap(j - 1, j);
            neg = !neg;
            j -= 1;
        }
    }
    (1..t.len()).all(|i| t[i - 1] != t[i]).then_some(neg)
}

fn adjoint_basis(n: usize) -> Vec<QMatrix> {
    let mut basis = Vec::with_capacity(n * n - 1);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let mut m = QMatrix::zeros(n, n);
                m[(i, j)] = Rational::one();
                basis.push(m);
            }
        }
    }
    for k in 0..n - 1 {
        let mut m = QMatrix::zeros(n, n);
        m[(k, k)] = Rational::one();
        m[(k + 1, k + 1)] = -Rational::one();
        basis.push(m);
    }
    basis
}

/// Coordinates of a traceless matrix in the adjoint basis.
fn adjoint_coords(m: &QMatrix) -> Vec<Rational> {
    let n = m.nrows();
    let mut v = Vec::with_capacity(n * n - 1);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                v.push(m[(i, j)].clone());
            }
        }
    }
    let mut acc = Rational::zero();
    for k in 0..n - 1 {
        acc += &m[(k, k)];
        v.push(acc.clone());
    }
    v
}

fn adjoint_matrix(n: usize, f: impl Fn(&QMatrix) -> QMatrix) -> QMatrix {
    QMatrix::from_cols(adjoint_basis(n).iter().map(|b| adjoint_coords(&f(b))).collect())
}

/// `wedge^d` of a linear map.
fn wedge_group(a: &QMatrix, d: usize) -> QMatrix {
    let basis = tuples(a.nrows(), d, true);
    QMatrix::from_fn(basis.len(), basis.len(), |r, c| a.submatrix(&basis[r], &basis[c]).det())
}

/// `wedge^d` of a derivation.
fn wedge_algebra(x: &QMatrix, d: usize) -> QMatrix {
    let basis = tuples(x.nrows(), d, true);
    let idx = index_of(&basis);
    let mut out = QMatrix::zeros(basis.len(), basis.len());
    for (c, t) in basis.iter().enumerate() {
        for k in 0..d {
            for j in 0..x.nrows() {
                let coef = &x[(j, t[k])];
                if coef.is_zero() {
                    continue;
                }
                let mut s = t.clone();
                s[k] = j;
                if let Some(neg) = sort_signed(&mut s) {
                    let r = idx[&s];
                    if neg {
                        out[(r, c)] -= coef;
                    } else {
                        out[(r, c)] += coef;
                    }
                }
            }
        }
    }
    out
}

/// `sym^d` of a linear map, by expanding products of images.
fn sym_group(a: &QMatrix, d: usize) -> QMatrix {
    let basis = tuples(a.nrows(), d, false);
    let idx = index_of(&basis);
    let mut out = QMatrix::zeros(basis.len(), basis.len());
    for (c, t) in basis.iter().enumerate() {
        let mut poly: HashMap<Vec<usize>, Rational> = HashMap::from([(Vec::new(), Rational::one())]);
        for &i in t {
            let mut next: HashMap<Vec<usize>, Rational> = HashMap::new();
            for (mono, coef) in &poly {
                for j in 0..a.nrows() {
                    if a[(j, i)].is_zero() {
                        continue;
                    }
                    let mut m = mono.clone();
                    let pos = m.partition_point(|&x| x <= j);
                    m.insert(pos, j);
                    *next.entry(m).or_insert_with(Rational::zero) += coef * &a[(j, i)];
                }
            }
            poly = next;
        }
        for (mono, coef) in poly {
            out[(idx[&mono], c)] += coef;
        }
    }
    out
}

/// `sym^d` of a derivation.
fn sym_algebra(x: &QMatrix, d: usize) -> QMatrix {
    let basis = tuples(x.nrows(), d, false);
    let idx = index_of(&basis);
    let mut out = QMatrix::zeros(basis.len(), basis.len());
    for (c, t) in basis.iter().enumerate() {
        for k in 0..d {
            for j in 0..x.nrows() {
                let coef = &x[(j, t[k])];
                if coef.is_zero() {
                    continue;
                }
                let mut s = t.clone();
                s[k] = j;
                s.sort_unstable();
                out[(idx[&s], c)] += coef;
            }
        }
    }
    out
}

fn group_matrix(spec: &RepSpec, g: &GroupElement) -> QMatrix {
    let n = g.dim();
    match spec {
        RepSpec::Trivial => QMatrix::identity(1),
        RepSpec::Standard => g.matrix().clone(),
        RepSpec::Dual(r) => group_matrix(r, &g.inverse()).transpose(),
        RepSpec::Adjoint => {
            let inv = g.inverse();
            adjoint_matrix(n, |b| g.matrix().mul_mat(b).mul_mat(inv.matrix()))
        }
        RepSpec::Wedge(d, r) => wedge_group(&group_matrix(r, g), *d),
        RepSpec::Sym(d, r) => sym_group(&group_matrix(r, g), *d),
        RepSpec::Tensor(a, b) => group_matrix(a, g).kron(&group_matrix(b, g)),
    }
}

fn algebra_matrix(spec: &RepSpec, x: &QMatrix) -> QMatrix {
    let n = x.nrows();
    match spec {
        RepSpec::Trivial => QMatrix::zeros(1, 1),
        RepSpec::Standard => x.clone(),
        RepSpec::Dual(r) => algebra_matrix(r, x).transpose().scale(&-Rational::one()),
        RepSpec::Adjoint => adjoint_matrix(n, |b| x.commutator(b)),
        RepSpec::Wedge(d, r) => wedge_algebra(&algebra_matrix(r, x), *d),
        RepSpec::Sym(d, r) => sym_algebra(&algebra_matrix(r, x), *d),
        RepSpec::Tensor(a, b) => {
            let (p, q) = (algebra_matrix(a, x), algebra_matrix(b, x));
            p.kron(&QMatrix::identity(q.nrows())).add(&QMatrix::identity(p.nrows()).kron(&q))
        }
    }
}

impl Representation {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spec(&self) -> &RepSpec {
        &self.spec
    }

    pub fn weights(&self) -> &WeightDecomposition {
        &self.weights
    }

    pub fn group_action(&self, g: &GroupElement) -> Result<QMatrix> {
        if g.dim() != self.n {
            return Err(Error::Dimension(format!("element of SL({}) acting on a rep of SL({})", g.dim(), self.n)));
        }
        Ok(group_matrix(&self.spec, g))
    }

    /// Action of a traceless `n x n` matrix.
    pub fn algebra_action(&self, x: &QMatrix) -> Result<QMatrix> {
        if x.nrows() != self.n || x.ncols() != self.n {
            return Err(Error::Dimension(format!("{}x{} matrix for a rep of SL({})", x.nrows(), x.ncols(), self.n)));
        }
        if !x.trace().is_zero() {
            return Err(Error::Domain("Lie algebra elements must be traceless".into()));
        }
        Ok(algebra_matrix(&self.spec, x))
    }
}

/// `A`-weights of the basis vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightDecomposition {
    weights: Vec<i64>,
}

impl WeightDecomposition {
    pub fn weight(&self, b: usize) -> i64 {
        self.weights[b]
    }

    pub fn all(&self) -> &[i64] {
        &self.weights
    }

    /// `(weight, basis indices)`, weights decreasing.
    pub fn spaces(&self) -> Vec<(i64, Vec<usize>)> {
        let mut ws: Vec<i64> = self.weights.clone();
        ws.sort_unstable_by(|a, b| b.cmp(a));
        ws.dedup();
        ws.into_iter().map(|w| (w, (0..self.weights.len()).filter(|&b| self.weights[b] == w).collect())).collect()
    }

    fn select(&self, keep: impl Fn(i64) -> bool) -> Vec<usize> {
        (0..self.weights.len()).filter(|&b| keep(self.weights[b])).collect()
    }

    pub fn positive(&self) -> Vec<usize> {
        self.select(|w| w > 0)
    }

    pub fn zero(&self) -> Vec<usize> {
        self.select(|w| w == 0)
    }

    pub fn negative(&self) -> Vec<usize> {
        self.select(|w| w < 0)
    }

    /// Coordinate projection onto the given indices, as a matrix.
    pub fn projector(&self, idx: &[usize]) -> QMatrix {
        let mut m = QMatrix::zeros(idx.len(), self.weights.len());
        for (r, &b) in idx.iter().enumerate() {
            m[(r, b)] = Rational::one();
        }
        m
    }
}

/// Exponent `e` with `x = 2^e`.
fn log2_exact(x: &Rational) -> Option<i64> {
    let pow_of_two = |z: &BigInt| -> Option<i64> {
        let bits = z.bits();
        (bits > 0 && *z == BigInt::one() << (bits - 1)).then(|| (bits - 1) as i64)
    };
    if !x.is_positive() {
        return None;
    }
    Some(pow_of_two(x.numer())? - pow_of_two(x.denom())?)
}

/// Reads weights off `group_action(a_2)`, which must be diagonal.
pub fn weight_decomposition(rep: &Representation) -> Result<WeightDecomposition> {
    let a = make_a(&FlowScale::from_integer(2)?, rep.n)?;
    let m = group_matrix(&rep.spec, &a);
    if !m.is_diagonal() {
        return Err(Error::Internal(format!("a_2 does not act diagonally on {}", rep.spec)));
    }
    let weights = (0..rep.dim)
        .map(|b| log2_exact(&m[(b, b)]).ok_or_else(|| Error::Internal("diagonal entry is not a power of 2".into())))
        .collect::<Result<_>>()?;
    Ok(WeightDecomposition { weights })
}

/// `X = [[0, e], [0, 0]]`, `Y = [[0, 0], [f, 0]]`, `H = [X, Y]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sl2Triple {
    pub x: QMatrix,
    pub h: QMatrix,
    pub y: QMatrix,
}

impl Sl2Triple {
    /// `[X, Y] = H`, `[H, X] = 2X`, `[H, Y] = -2Y`.
    pub fn relations_hold(&self) -> bool {
        let two = Rational::from_integer(2.into());
        self.x.commutator(&self.y) == self.h
            && self.h.commutator(&self.x) == self.x.scale(&two)
            && self.h.commutator(&self.y) == self.y.scale(&-two)
    }
}

/// Nilpotent `X(e)` with top row `(0, e)`.
pub fn x_of(e: &[Rational]) -> QMatrix {
    let n = e.len() + 1;
    let mut m = QMatrix::zeros(n, n);
    for (j, v) in e.iter().enumerate() {
        m[(0, j + 1)] = v.clone();
    }
    m
}

/// Nilpotent `Y(f)` with first column `(0, f)`.
pub fn y_of(f: &[Rational]) -> QMatrix {
    let n = f.len() + 1;
    let mut m = QMatrix::zeros(n, n);
    for (i, v) in f.iter().enumerate() {
        m[(i + 1, 0)] = v.clone();
    }
    m
}

pub fn sl2_triple(e: &[Rational], f: &[Rational]) -> Result<Sl2Triple> {
    if e.len() != f.len() || e.is_empty() {
        return Err(Error::Dimension("e and f must have the same positive length".into()));
    }
    let dot: Rational = e.iter().zip(f).map(|(a, b)| a * b).sum();
    if !dot.is_one() {
        return Err(Error::NotNormalized(rational::format(&dot)));
    }
    let (x, y) = (x_of(e), y_of(f));
    let h = x.commutator(&y);
    Ok(Sl2Triple { x, h, y })
}

/// `n` points of `Q^{n-1}` whose differences from any one of them span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineBasis {
    points: Vec<Vec<Rational>>,
}

impl AffineBasis {
    pub fn new(points: Vec<Vec<Rational>>) -> Result<Self> {
        let k = points.first().map_or(0, Vec::len);
        if k == 0 || points.len() != k + 1 || points.iter().any(|p| p.len() != k) {
            return Err(Error::NotAffineBasis(k));
        }
        let b = AffineBasis { points };
        if rank_of_rows(&b.differences(0)) != k {
            return Err(Error::NotAffineBasis(k));
        }
        Ok(b)
    }

    /// `0, e_1, ..., e_{n-1}`.
    pub fn standard(n: usize) -> Self {
        let k = n - 1;
        let mut points = vec![vec![Rational::zero(); k]];
        for i in 0..k {
            let mut e = vec![Rational::zero(); k];
            e[i] = Rational::one();
            points.push(e);
        }
        AffineBasis { points }
    }

    pub fn points(&self) -> &[Vec<Rational>] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn translate(&self, c: &[Rational]) -> Self {
        AffineBasis { points: self.points.iter().map(|p| p.iter().zip(c).map(|(a, b)| a + b).collect()).collect() }
    }

    /// `e' - e` for the other points `e'`, in order.
    pub fn differences(&self, base: usize) -> Vec<Vec<Rational>> {
        let e = &self.points[base];
        self.points
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != base)
            .map(|(_, p)| p.iter().zip(e).map(|(a, b)| a - b).collect())
            .collect()
    }

    /// The dual family `f_j` with `(e_i' - e) . f_j = delta_ij`.
    pub fn dual_family(&self, base: usize) -> Vec<Vec<Rational>> {
        let c = QMatrix::from_rows(self.differences(base));
        c.inverse().expect("affine basis").to_cols()
    }
}

fn check_basis(rep: &Representation, b: &AffineBasis) -> Result<()> {
    if b.n() != rep.n {
        return Err(Error::Dimension(format!("affine basis of Q^{} for a rep of SL({})", b.n() - 1, rep.n)));
    }
    Ok(())
}

fn columns(vs: &[Vec<Rational>], dim: usize) -> QMatrix {
    if vs.is_empty() {
        return QMatrix::zeros(dim, 0);
    }
    QMatrix::from_cols(vs.to_vec())
}

/// `{v : pi_+(u(e) v) = 0 for all e in points}`.
pub fn hypothesis_subspace(rep: &Representation, points: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let plus = rep.weights.projector(&rep.weights.positive());
    if plus.nrows() == 0 {
        return Ok((0..rep.dim).map(|b| unit(rep.dim, b)).collect());
    }
    let blocks: Vec<QMatrix> =
        points.iter().map(|e| Ok(plus.mul_mat(&rep.group_action(&make_u(e))?))).collect::<Result<_>>()?;
    Ok(QMatrix::vstack(&blocks).kernel())
}

fn unit(dim: usize, b: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); dim];
    v[b] = Rational::one();
    v
}

/// Basis of `S = {v : u(e) v in V^0 + V^- for every e in B}`.
pub fn basic_lemma_subspace(rep: &Representation, b: &AffineBasis) -> Result<Vec<Vec<Rational>>> {
    check_basis(rep, b)?;
    hypothesis_subspace(rep, b.points())
}

/// True iff `v -> pi_0(u(e) v)` is injective on `S` for every `e` in `B`.
pub fn basic_lemma_check(rep: &Representation, b: &AffineBasis) -> Result<bool> {
    let s = basic_lemma_subspace(rep, b)?;
    if s.is_empty() {
        return Ok(true);
    }
    let zero = rep.weights.projector(&rep.weights.zero());
    let s = columns(&s, rep.dim);
    for e in b.points() {
        let img = zero.mul_mat(&rep.group_action(&make_u(e))?).mul_mat(&s);
        if img.rank() != s.ncols() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff every `H_i` built from `e_i = e_i' - e` and its dual family
/// annihilates `pi_0(u(e) v)` for all `v` in `S`.
pub fn torus_fix_check(rep: &Representation, b: &AffineBasis, base: usize) -> Result<bool> {
    let s = basic_lemma_subspace(rep, b)?;
    if base >= b.n() {
        return Err(Error::Dimension(format!("point index {base} out of range")));
    }
    if s.is_empty() {
        return Ok(true);
    }
    let zero = rep.weights.projector(&rep.weights.zero());
    let lift = zero.transpose();
    let e = &b.points()[base];
    let images = lift.mul_mat(&zero).mul_mat(&rep.group_action(&make_u(e))?).mul_mat(&columns(&s, rep.dim));
    let es = b.differences(base);
    let fs = b.dual_family(base);
    for (ei, fi) in es.iter().zip(&fs) {
        let t = sl2_triple(ei, fi)?;
        if !rep.algebra_action(&t.h)?.mul_mat(&images).is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `E_{i,i+1}`, `E_{i+1,i}` and `H_i`.
pub fn chevalley_generators(n: usize) -> Vec<QMatrix> {
    let mut out = Vec::new();
    for i in 0..n - 1 {
        let mut e = QMatrix::zeros(n, n);
        e[(i, i + 1)] = Rational::one();
        let f = e.transpose();
        out.push(e.commutator(&f));
        out.push(e);
        out.push(f);
    }
    out
}

/// Vectors killed by the whole Lie algebra.
pub fn g_fixed_subspace(rep: &Representation) -> Result<Vec<Vec<Rational>>> {
    let blocks: Vec<QMatrix> = chevalley_generators(rep.n).iter().map(|x| rep.algebra_action(x)).collect::<Result<_>>()?;
    Ok(QMatrix::vstack(&blocks).kernel())
}

/// `(r, sup_s |rho(a_r u(phi(s))) v|_inf)` for each `r`.
pub fn expansion_profile(
    rep: &Representation,
    curve: &PolyCurve,
    v: &[Rational],
    r_list: &[FlowScale],
    grid: &[Rational],
) -> Result<Vec<(FlowScale, f64)>> {
    if v.len() != rep.dim {
        return Err(Error::Dimension(format!("vector of length {} in a rep of dimension {}", v.len(), rep.dim)));
    }
    if curve.k() + 1 != rep.n {
        return Err(Error::Dimension("curve dimension must be n - 1".into()));
    }
    let images: Vec<Vec<Rational>> = grid
        .iter()
        .map(|s| Ok(rep.group_action(&make_u(&curve.evaluate(s)?))?.mul_vec(v)))
        .collect::<Result<_>>()?;
    let out = r_list
        .iter()
        .map(|r| {
            let sup = images
                .iter()
                .flat_map(|w| w.iter().enumerate().map(|(b, x)| x.abs() * rational::pow(r.value(), rep.weights.weight(b))))
                .max()
                .unwrap_or_else(Rational::zero);
            (r.clone(), rational::to_f64(&sup))
        })
        .collect();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepFailure {
    pub trial: usize,
    #[serde(with = "rational::serde_q::vec2")]
    pub points: Vec<Vec<Rational>>,
    /// `basic_lemma` or `torus_fix`.
    pub check: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub n: usize,
    pub rep: String,
    pub trials: usize,
    pub seed: u64,
    pub failures: Vec<SweepFailure>,
    /// `dim S` for each trial.
    pub dims: Vec<usize>,
}

/// Random affine bases with coordinates `a/b`, `|a| <= 6`, `1 <= b <= 4`.
pub fn random_affine_basis(rng: &mut impl Rng, n: usize) -> AffineBasis {
    loop {
        let pts = (0..n)
            .map(|_| (0..n - 1).map(|_| rational::frac(rng.gen_range(-6..=6), rng.gen_range(1..=4))).collect())
            .collect();
        if let Ok(b) = AffineBasis::new(pts) {
            return b;
        }
    }
}

/// Runs [`basic_lemma_check`] and [`torus_fix_check`] (every base point) on
/// `trials` seeded random affine bases.
pub fn basic_lemma_sweep(rep: &Representation, trials: usize, seed: u64) -> Result<SweepSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut dims = Vec::with_capacity(trials);
    for trial in 0..trials {
        let b = random_affine_basis(&mut rng, rep.n);
        dims.push(basic_lemma_subspace(rep, &b)?.len());
        let mut fail = |check: &str| failures.push(SweepFailure { trial, points: b.points().to_vec(), check: check.into() });
        if !basic_lemma_check(rep, &b)? {
            fail("basic_lemma");
        }
        for e in 0..rep.n {
            if !torus_fix_check(rep, &b, e)? {
                fail("torus_fix");
                break;
            }
        }
    }
    Ok(SweepSummary { n: rep.n, rep: rep.spec.to_string(), trials, seed, failures, dims })
}
