//! The two Dirichlet systems and their lattice counterpart.
//!
//! For `xi` in `Q^k`, integer `N >= 1` and `0 < mu <= 1`:
//!
//! * system A asks for `q` in `Z^k`, `p` in `Z` with
//!   `|q . xi - p| <= mu N^{-k}` and `0 < max |q_i| <= mu N`;
//! * system B asks for `q` in `Z`, `p` in `Z^k` with
//!   `max |q xi_i - p_i| <= mu N^{-1}` and `0 < |q| <= mu N^k`.
//!
//! Both searches run on integers after clearing the common denominator of
//! `xi`, so only `q . a mod d` is ever needed. For `mu < 1` the pair of
//! verdicts is determined by box avoidance of `a_N u(xi) Z^n` and
//! `a'_N u'(xi) Z^n`, which [`lattice_criterion`] evaluates.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{make_a, make_a_prime, make_u, make_u_prime, FlowScale};
use crate::lattices::{BoxEnumerator, SupBox, UnimodularLattice, DEFAULT_BUDGET};
use crate::rational::{self, Rational};

/// Default cap on the number of candidates a brute-force search may visit.
pub const DEFAULT_SEARCH_CAP: u64 = 100_000_000;

/// A rational point `xi` in `Q^k`, `k >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxTarget {
    #[serde(with = "rational::serde_q::vec")]
    xi: Vec<Rational>,
}

impl ApproxTarget {
    pub fn new(xi: Vec<Rational>) -> Result<Self> {
        if xi.is_empty() {
            return Err(Error::Dimension("target needs at least one coordinate".into()));
        }
        Ok(ApproxTarget { xi })
    }

    /// Parses a comma-separated list of exact rationals such as `"2/7,3/5"`.
    /// Decimal and exponent notation are refused.
    pub fn parse(s: &str) -> Result<Self> {
        ApproxTarget::new(rational::parse_list(s)?)
    }

    pub fn k(&self) -> usize {
        self.xi.len()
    }

    pub fn xi(&self) -> &[Rational] {
        &self.xi
    }

    /// Common denominator `d` and numerators `a_i = d xi_i`.
    fn integerize(&self) -> (BigInt, Vec<BigInt>) {
        let d = rational::lcm_of_denominators(&self.xi);
        let a = self.xi.iter().map(|x| (x * Rational::from_integer(d.clone())).to_integer()).collect();
        (d, a)
    }
}

/// A solution of one of the two systems, in the `q . xi - p` convention.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    A {
        #[serde(with = "rational::serde_z::vec")]
        q: Vec<BigInt>,
        #[serde(with = "rational::serde_z")]
        p: BigInt,
    },
    B {
        #[serde(with = "rational::serde_z")]
        q: BigInt,
        #[serde(with = "rational::serde_z::vec")]
        p: Vec<BigInt>,
    },
}

impl Witness {
    /// Re-checks both inequalities in exact rational arithmetic.
    pub fn verify(&self, xi: &ApproxTarget, n: u64, mu: &Rational) -> bool {
        let k = xi.k() as i64;
        let nq = Rational::from_integer(BigInt::from(n));
        let z = |x: &BigInt| Rational::from_integer(x.clone());
        match self {
            Witness::A { q, p } => {
                if q.len() != xi.k() || q.iter().all(|x| x.is_zero()) {
                    return false;
                }
                let qmax = q.iter().map(|x| x.abs()).max().unwrap();
                let form: Rational = q.iter().zip(xi.xi()).map(|(qi, x)| z(qi) * x).sum::<Rational>() - z(p);
                z(&qmax) <= mu * &nq && form.abs() <= mu * rational::pow(&nq, -k)
            }
            Witness::B { q, p } => {
                if p.len() != xi.k() || q.is_zero() {
                    return false;
                }
                let worst = xi.xi().iter().zip(p).map(|(x, pi)| (z(q) * x - z(pi)).abs()).max().unwrap();
                z(&q.abs()) <= mu * rational::pow(&nq, k) && worst <= mu / nq
            }
        }
    }
}

/// Outcome of an exhaustive search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub soluble: bool,
    pub witness: Option<Witness>,
}

impl Verdict {
    fn from_witness(witness: Option<Witness>) -> Self {
        Verdict { soluble: witness.is_some(), witness }
    }
}

fn check_inputs(n: u64, mu: &Rational) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("N must be a positive integer".into()));
    }
    if !mu.is_positive() || *mu > Rational::one() {
        return Err(Error::Domain(format!("mu = {} must lie in (0, 1]", rational::format(mu))));
    }
    Ok(())
}

/// `floor(num / den)` for nonnegative rationals.
fn floor(x: &Rational) -> BigInt {
    x.floor().to_integer()
}

/// Distance from `s` to the nearest multiple of `d`, and that multiple's index.
fn nearest(s: &BigInt, d: &BigInt) -> (BigInt, BigInt) {
    let (quo, rem) = s.div_mod_floor(d);
    let up = d - &rem;
    if rem <= up {
        (rem, quo)
    } else {
        (up, quo + 1)
    }
}

/// Integer types the inner search loops run on.
trait Word: Clone + Debug + PartialOrd + num_integer::Integer + std::ops::Sub<Output = Self> + std::ops::Add<Output = Self> {
    fn from_big(x: &BigInt) -> Self;
}

impl Word for i128 {
    fn from_big(x: &BigInt) -> Self {
        x.to_i128().expect("word fits by construction")
    }
}

impl Word for BigInt {
    fn from_big(x: &BigInt) -> Self {
        x.clone()
    }
}

fn add_mod<T: Word>(x: &T, y: &T, d: &T) -> T {
    let s = x.clone() + y.clone();
    if s >= *d {
        s - d.clone()
    } else {
        s
    }
}

fn dist_ok<T: Word>(r: &T, d: &T, t: &T) -> bool {
    *r <= *t || d.clone() - r.clone() <= *t
}

/// Searches `q` with `max|q_i| <= qmax`, first nonzero entry positive, in
/// lexicographic order, for `q . a mod d` within `t` of `0 mod d`.
fn search_a<T: Word>(a: &[BigInt], d: &BigInt, qmax: i64, t: &BigInt) -> Option<Vec<i64>> {
    let k = a.len();
    let dw = T::from_big(d);
    let tw = T::from_big(t);
    // residue of m a_i mod d for m in [-qmax, qmax]
    let table: Vec<Vec<T>> = a
        .iter()
        .map(|x| (-qmax..=qmax).map(|m| T::from_big(&(x * m).mod_floor(d))).collect())
        .collect();
    let at = |i: usize, m: i64| &table[i][(m + qmax) as usize];
    // lexicographic order visits the latest leading position first
    for lead in (0..k).rev() {
        let mut q = vec![0i64; k];
        q[lead] = 1;
        for x in &mut q[lead + 1..] {
            *x = -qmax;
        }
        // partial[i] = sum_{j < i} q_j a_j mod d
        let mut partial = vec![T::zero(); k + 1];
        let mut from = lead;
        loop {
            for i in from..k {
                partial[i + 1] = add_mod(&partial[i], at(i, q[i]), &dw);
            }
            if dist_ok(&partial[k], &dw, &tw) {
                return Some(q);
            }
            let Some(i) = (lead..k).rev().find(|&i| q[i] < qmax) else { break };
            q[i] += 1;
            for x in &mut q[i + 1..] {
                *x = -qmax;
            }
            from = i;
        }
    }
    None
}

/// Searches `q = 1..=qmax` for all `q a_i mod d` within `t` of `0 mod d`.
fn search_b<T: Word>(a: &[BigInt], d: &BigInt, qmax: u64, t: &BigInt) -> Option<u64> {
    let dw = T::from_big(d);
    let tw = T::from_big(t);
    let step: Vec<T> = a.iter().map(|x| T::from_big(&x.mod_floor(d))).collect();
    let mut cur = step.clone();
    for q in 1..=qmax {
        if cur.iter().all(|r| dist_ok(r, &dw, &tw)) {
            return Some(q);
        }
        for (c, s) in cur.iter_mut().zip(&step) {
            *c = add_mod(c, s, &dw);
        }
    }
    None
}

fn fits_word(d: &BigInt) -> bool {
    d.bits() < 120
}

/// Brute-force check of system A with the default search cap.
pub fn check_a(xi: &ApproxTarget, n: u64, mu: &Rational) -> Result<Verdict> {
    check_a_with_cap(xi, n, mu, DEFAULT_SEARCH_CAP)
}

/// Brute-force check of system A; refuses when `(2 floor(mu N) + 1)^k > cap`.
pub fn check_a_with_cap(xi: &ApproxTarget, n: u64, mu: &Rational, cap: u64) -> Result<Verdict> {
    check_inputs(n, mu)?;
    let k = xi.k();
    let nq = Rational::from_integer(BigInt::from(n));
    let qmax = floor(&(mu * &nq));
    let size: BigInt = num_traits::pow(BigInt::from(2) * &qmax + 1, k);
    if size > BigInt::from(cap) {
        return Err(Error::SearchCapExceeded { size: size.to_string(), cap });
    }
    let qmax = qmax.to_i64().expect("bounded by cap");
    if qmax == 0 {
        return Ok(Verdict::from_witness(None));
    }
    let (d, a) = xi.integerize();
    // |q.a - p d| <= mu d N^{-k}
    let t = floor(&(mu * Rational::from_integer(d.clone()) * rational::pow(&nq, -(k as i64))));
    let found = if fits_word(&d) {
        search_a::<i128>(&a, &d, qmax, &t)
    } else {
        search_a::<BigInt>(&a, &d, qmax, &t)
    };
    Ok(Verdict::from_witness(found.map(|q| {
        let q: Vec<BigInt> = q.into_iter().map(BigInt::from).collect();
        let s: BigInt = q.iter().zip(&a).map(|(x, y)| x * y).sum();
        Witness::A { p: nearest(&s, &d).1, q }
    })))
}

/// Brute-force check of system B with the default search cap.
pub fn check_b(xi: &ApproxTarget, n: u64, mu: &Rational) -> Result<Verdict> {
    check_b_with_cap(xi, n, mu, DEFAULT_SEARCH_CAP)
}

/// Brute-force check of system B; refuses when `floor(mu N^k) > cap`.
pub fn check_b_with_cap(xi: &ApproxTarget, n: u64, mu: &Rational, cap: u64) -> Result<Verdict> {
    check_inputs(n, mu)?;
    let k = xi.k();
    let nq = Rational::from_integer(BigInt::from(n));
    let qmax = floor(&(mu * rational::pow(&nq, k as i64)));
    if qmax > BigInt::from(cap) {
        return Err(Error::SearchCapExceeded { size: qmax.to_string(), cap });
    }
    let qmax = qmax.to_u64().expect("bounded by cap");
    let (d, a) = xi.integerize();
    // |q a_i - p_i d| <= mu d / N
    let t = floor(&(mu * Rational::from_integer(d.clone()) / nq));
    let found = if fits_word(&d) {
        search_b::<i128>(&a, &d, qmax, &t)
    } else {
        search_b::<BigInt>(&a, &d, qmax, &t)
    };
    Ok(Verdict::from_witness(found.map(|q| {
        let q = BigInt::from(q);
        let p = a.iter().map(|ai| nearest(&(&q * ai), &d).1).collect();
        Witness::B { q, p }
    })))
}

/// The pair `(zeta, eta)` of lattice vectors attached to integer data.
///
/// `zeta = (N^k (p + q.phi), q_1/N, .., q_k/N)` and
/// `eta = (N (q phi_1 + p_k), .., N (q phi_k + p_1), q / N^k)`, keeping the
/// reversed pairing of `eta` literally. Up to reordering its first `k`
/// entries, `eta` is `a'_N u'(phi) (p_1, .., p_k, q)`.
pub fn zeta_eta(
    phi: &[Rational],
    n: u64,
    q_vec: &[BigInt],
    p: &BigInt,
    q: &BigInt,
    p_vec: &[BigInt],
) -> Result<(Vec<Rational>, Vec<Rational>)> {
    let k = phi.len();
    if q_vec.len() != k || p_vec.len() != k {
        return Err(Error::Dimension(format!("expected integer vectors of length {k}")));
    }
    if n == 0 {
        return Err(Error::Domain("N must be a positive integer".into()));
    }
    let nq = Rational::from_integer(BigInt::from(n));
    let z = |x: &BigInt| Rational::from_integer(x.clone());
    let form: Rational = z(p) + q_vec.iter().zip(phi).map(|(a, b)| z(a) * b).sum::<Rational>();
    let mut zeta = vec![rational::pow(&nq, k as i64) * form];
    zeta.extend(q_vec.iter().map(|x| z(x) / &nq));
    let mut eta: Vec<Rational> = (0..k).map(|i| &nq * (z(q) * &phi[i] + z(&p_vec[k - 1 - i]))).collect();
    eta.push(z(q) * rational::pow(&nq, -(k as i64)));
    Ok((zeta, eta))
}

/// The two lattices `a_N u(xi) Z^n` and `a'_N u'(xi) Z^n`.
pub fn criterion_lattices(xi: &ApproxTarget, n: u64) -> Result<(UnimodularLattice, UnimodularLattice)> {
    let r = FlowScale::from_integer(n)?;
    let dim = xi.k() + 1;
    let first = make_a(&r, dim)?.mul(&make_u(xi.xi()));
    let second = make_a_prime(&r, dim)?.mul(&make_u_prime(xi.xi()));
    Ok((UnimodularLattice::from_group_element(&first), UnimodularLattice::from_group_element(&second)))
}

fn check_open_mu(mu: &Rational) -> Result<()> {
    if !mu.is_positive() || *mu >= Rational::one() {
        return Err(Error::Domain(format!(
            "mu = {} must lie in the open interval (0, 1) for the lattice criterion",
            rational::format(mu)
        )));
    }
    Ok(())
}

/// Memberships `(a_N u(xi) Z^n in K_mu, a'_N u'(xi) Z^n in K_mu)`.
pub fn lattice_memberships(xi: &ApproxTarget, n: u64, mu: &Rational) -> Result<(bool, bool)> {
    lattice_memberships_with_budget(xi, n, mu, DEFAULT_BUDGET)
}

pub fn lattice_memberships_with_budget(xi: &ApproxTarget, n: u64, mu: &Rational, budget: u64) -> Result<(bool, bool)> {
    check_open_mu(mu)?;
    let (first, second) = criterion_lattices(xi, n)?;
    let b = SupBox::new(mu.clone())?;
    Ok((
        BoxEnumerator::with_budget(&first, budget).avoids(&b)?,
        BoxEnumerator::with_budget(&second, budget).avoids(&b)?,
    ))
}

/// True iff both criterion lattices avoid the closed box `B_mu`, i.e. both
/// systems are insoluble. Requires `0 < mu < 1`.
pub fn lattice_criterion(xi: &ApproxTarget, n: u64, mu: &Rational) -> Result<bool> {
    lattice_criterion_with_budget(xi, n, mu, DEFAULT_BUDGET)
}

pub fn lattice_criterion_with_budget(xi: &ApproxTarget, n: u64, mu: &Rational, budget: u64) -> Result<bool> {
    check_open_mu(mu)?;
    let (first, second) = criterion_lattices(xi, n)?;
    let b = SupBox::new(mu.clone())?;
    Ok(BoxEnumerator::with_budget(&first, budget).avoids(&b)? && BoxEnumerator::with_budget(&second, budget).avoids(&b)?)
}

/// The members of `ns` at which both systems are insoluble, in input order.
pub fn dirichlet_scan(xi: &ApproxTarget, ns: &[u64], mu: &Rational) -> Result<Vec<u64>> {
    dirichlet_scan_with_budget(xi, ns, mu, DEFAULT_BUDGET)
}

pub fn dirichlet_scan_with_budget(xi: &ApproxTarget, ns: &[u64], mu: &Rational, budget: u64) -> Result<Vec<u64>> {
    check_open_mu(mu)?;
    let keep: Vec<bool> =
        ns.par_iter().map(|&n| lattice_criterion_with_budget(xi, n, mu, budget)).collect::<Result<_>>()?;
    Ok(ns.iter().zip(keep).filter(|(_, k)| *k).map(|(n, _)| *n).collect())
}

/// A box of real targets `lo_i <= xi_i <= hi_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalTarget {
    #[serde(with = "rational::serde_q::vec")]
    lo: Vec<Rational>,
    #[serde(with = "rational::serde_q::vec")]
    hi: Vec<Rational>,
}

impl IntervalTarget {
    pub fn new(lo: Vec<Rational>, hi: Vec<Rational>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Dimension("interval bounds must be nonempty and of equal length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::Domain("interval with lo > hi".into()));
        }
        Ok(IntervalTarget { lo, hi })
    }

    /// Encloses floating-point targets: each `x` becomes `[prev(x), next(x)]`.
    pub fn from_f64(xs: &[f64]) -> Result<Self> {
        let conv = |x: f64| {
            rational::from_f64_exact(x).ok_or_else(|| Error::Domain(format!("target {x} is not finite")))
        };
        let mut lo = Vec::with_capacity(xs.len());
        let mut hi = Vec::with_capacity(xs.len());
        for &x in xs {
            conv(x)?;
            lo.push(conv(x.next_down())?);
            hi.push(conv(x.next_up())?);
        }
        IntervalTarget::new(lo, hi)
    }

    pub fn k(&self) -> usize {
        self.lo.len()
    }

    /// Range of `q . xi` over the box.
    fn form_range(&self, q: &[i64]) -> (Rational, Rational) {
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        for ((&qi, a), b) in q.iter().zip(&self.lo).zip(&self.hi) {
            let qi = Rational::from_integer(BigInt::from(qi));
            let (x, y) = (&qi * a, &qi * b);
            if x <= y {
                lo += x;
                hi += y;
            } else {
                lo += y;
                hi += x;
            }
        }
        (lo, hi)
    }
}

/// Three-valued verdict of an interval search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum IntervalVerdict {
    /// Some witness works for every target in the box.
    Soluble { witness: Witness },
    /// No target in the box admits a solution.
    Insoluble,
    Undecided,
}

/// Whether `[lo, hi]` meets, or is contained in, some `[p - t, p + t]`.
fn classify(lo: &Rational, hi: &Rational, t: &Rational) -> (bool, Option<BigInt>) {
    let first = (lo - t).ceil().to_integer();
    let meets = Rational::from_integer(first.clone()) <= hi + t;
    let p = ((lo + hi) / Rational::from_integer(BigInt::from(2))).round().to_integer();
    let pq = Rational::from_integer(p.clone());
    let inside = &pq - t <= *lo && *hi <= &pq + t;
    (meets, inside.then_some(p))
}

/// System A for every target in an interval box.
pub fn check_a_interval(xi: &IntervalTarget, n: u64, mu: &Rational, cap: u64) -> Result<IntervalVerdict> {
    check_inputs(n, mu)?;
    let k = xi.k();
    let nq = Rational::from_integer(BigInt::from(n));
    let qmax = floor(&(mu * &nq));
    let size: BigInt = num_traits::pow(BigInt::from(2) * &qmax + 1, k);
    if size > BigInt::from(cap) {
        return Err(Error::SearchCapExceeded { size: size.to_string(), cap });
    }
    let qmax = qmax.to_i64().expect("bounded by cap");
    let t = mu * rational::pow(&nq, -(k as i64));
    let mut undecided = false;
    let mut q = vec![-qmax; k];
    loop {
        let leading_positive = q.iter().find(|x| **x != 0).is_some_and(|x| *x > 0);
        if leading_positive {
            let (lo, hi) = xi.form_range(&q);
            let (meets, inside) = classify(&lo, &hi, &t);
            if let Some(p) = inside {
                let q = q.into_iter().map(BigInt::from).collect();
                return Ok(IntervalVerdict::Soluble { witness: Witness::A { q, p } });
            }
            undecided |= meets;
        }
        let Some(i) = (0..k).rev().find(|&i| q[i] < qmax) else { break };
        q[i] += 1;
        for x in q.iter_mut().skip(i + 1) {
            *x = -qmax;
        }
    }
    Ok(if undecided { IntervalVerdict::Undecided } else { IntervalVerdict::Insoluble })
}

/// System B for every target in an interval box.
pub fn check_b_interval(xi: &IntervalTarget, n: u64, mu: &Rational, cap: u64) -> Result<IntervalVerdict> {
    check_inputs(n, mu)?;
    let k = xi.k();
    let nq = Rational::from_integer(BigInt::from(n));
    let qmax = floor(&(mu * rational::pow(&nq, k as i64)));
    if qmax > BigInt::from(cap) {
        return Err(Error::SearchCapExceeded { size: qmax.to_string(), cap });
    }
    let qmax = qmax.to_i64().expect("bounded by cap");
    let t = mu / &nq;
    let mut undecided = false;
    for q in 1..=qmax {
        let mut all_meet = true;
        let mut ps = Vec::with_capacity(k);
        for i in 0..k {
            let mut e = vec![0; k];
            e[i] = q;
            let (lo, hi) = xi.form_range(&e);
            let (meets, inside) = classify(&lo, &hi, &t);
            all_meet &= meets;
            ps.push(inside);
        }
        if ps.iter().all(Option::is_some) {
            let p = ps.into_iter().map(Option::unwrap).collect();
            return Ok(IntervalVerdict::Soluble { witness: Witness::B { q: BigInt::from(q), p } });
        }
        undecided |= all_meet;
    }
    Ok(if undecided { IntervalVerdict::Undecided } else { IntervalVerdict::Insoluble })
}

#[cfg(test)]
mod tests;
