//! Univariate rational polynomials with exact real-root isolation.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

/// `c_0 + c_1 s + ... + c_d s^d`, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    #[serde(with = "rational::serde_q::vec")]
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: Rational) -> Self {
        Poly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, s: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * s + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c * Rational::from_integer(j.into()))
                .collect(),
        )
    }

    pub fn add_constant(&self, c: &Rational) -> Poly {
        let mut v = self.coeffs.clone();
        if v.is_empty() {
            v.push(Rational::zero());
        }
        v[0] += c;
        Poly::new(v)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    fn lead(&self) -> &Rational {
        self.coeffs.last().expect("nonzero polynomial")
    }

    /// Euclidean remainder of `self` by a nonzero `d`.
    pub fn rem(&self, d: &Poly) -> Poly {
        self.div_rem(d).1
    }

    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let dd = d.coeffs.len() - 1;
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Poly::new(vec![]), self.clone());
        }
        let mut q = vec![Rational::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = &r[i + dd] / d.lead();
            if !c.is_zero() {
                for (j, dj) in d.coeffs.iter().enumerate() {
                    r[i + j] -= &c * dj;
                }
            }
            q[i] = c;
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let l = a.lead().clone();
        a.scale(&l.recip())
    }

    /// The product of the distinct irreducible factors; same real roots.
    pub fn square_free(&self) -> Poly {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0
    }

    /// Enclosure of `{ self(s) : lo <= s <= hi }` by interval Horner.
    pub fn eval_interval(&self, lo: &Rational, hi: &Rational) -> (Rational, Rational) {
        let mut acc = (Rational::zero(), Rational::zero());
        for c in self.coeffs.iter().rev() {
            let p = [&acc.0 * lo, &acc.0 * hi, &acc.1 * lo, &acc.1 * hi];
            let mn = p.iter().min().unwrap().clone();
            let mx = p.iter().max().unwrap().clone();
            acc = (mn + c, mx + c);
        }
        acc
    }

    /// Sign of `self` just to the right of `x`.
    fn sign_right(&self, x: &Rational) -> i32 {
        let mut p = self.clone();
        while !p.is_zero() {
            let v = p.eval(x);
            if !v.is_zero() {
                return if v.is_positive() { 1 } else { -1 };
            }
            p = p.derivative();
        }
        0
    }
}

/// Sturm chain of a square-free polynomial.
#[derive(Clone, Debug)]
pub struct Sturm {
    chain: Vec<Poly>,
}

impl Sturm {
    pub fn new(p: &Poly) -> Self {
        let mut chain = vec![p.clone()];
        if p.degree().unwrap_or(0) > 0 {
            chain.push(p.derivative());
            loop {
                let n = chain.len();
                let r = chain[n - 2].rem(&chain[n - 1]);
                if r.is_zero() {
                    break;
                }
                chain.push(r.scale(&-Rational::one()));
            }
        }
        Sturm { chain }
    }

    pub fn poly(&self) -> &Poly {
        &self.chain[0]
    }

    fn variations_right(&self, x: &Rational) -> usize {
        let signs: Vec<i32> = self.chain.iter().map(|p| p.sign_right(x)).filter(|s| *s != 0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Number of distinct roots in the half-open interval `(x, y]`.
    pub fn count(&self, x: &Rational, y: &Rational) -> usize {
        self.variations_right(x) - self.variations_right(y)
    }

    /// Isolating enclosures of every root in `[a, b]`, sorted.
    pub fn roots(&self, a: &Rational, b: &Rational) -> Vec<RootEnclosure> {
        let p = self.poly();
        if p.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        if p.eval(a).is_zero() {
            out.push(RootEnclosure::exact(a.clone()));
        }
        let mut stack = vec![(a.clone(), b.clone(), self.count(a, b))];
        let mut found = Vec::new();
        while let Some((x, y, c)) = stack.pop() {
            match c {
                0 => {}
                1 => found.push(RootEnclosure::isolate(self, x, y)),
                _ => {
                    let m = (&x + &y) / Rational::from_integer(2.into());
                    let left = self.count(&x, &m);
                    stack.push((m.clone(), y, c - left));
                    stack.push((x, m, left));
                }
            }
        }
        found.sort_by(|u, v| u.lo.cmp(&v.lo));
        out.extend(found);
        out
    }
}

/// A root known to lie in `(lo, hi]`, or exactly at `lo == hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootEnclosure {
    pub lo: Rational,
    pub hi: Rational,
}

impl RootEnclosure {
    fn exact(x: Rational) -> Self {
        RootEnclosure { lo: x.clone(), hi: x }
    }

    fn isolate(sturm: &Sturm, lo: Rational, hi: Rational) -> Self {
        let mut r = RootEnclosure { lo, hi };
        r.snap(sturm.poly());
        r
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// Collapses onto the root if it is the simplest rational in range.
    fn snap(&mut self, p: &Poly) {
        if self.is_exact() {
            return;
        }
        if p.eval(&self.hi).is_zero() {
            self.lo = self.hi.clone();
            return;
        }
        let x = simplest_between(&self.lo, &self.hi);
        if x > self.lo && p.eval(&x).is_zero() {
            *self = RootEnclosure::exact(x);
        }
    }

    /// One bisection step.
    pub fn refine(&mut self, sturm: &Sturm) {
        if self.is_exact() {
            return;
        }
        let m = (&self.lo + &self.hi) / Rational::from_integer(2.into());
        if sturm.count(&self.lo, &m) == 1 {
            self.hi = m;
        } else {
            self.lo = m;
        }
        self.snap(sturm.poly());
    }
}

/// The rational of least denominator in `[lo, hi]`.
pub fn simplest_between(lo: &Rational, hi: &Rational) -> Rational {
    debug_assert!(lo <= hi);
    if !lo.is_positive() && !hi.is_negative() {
        return Rational::zero();
    }
    if hi.is_negative() {
        return -simplest_between(&-hi, &-lo);
    }
    let fl = lo.floor();
    if fl == *lo {
        return fl;
    }
    let next = &fl + Rational::one();
    if next <= *hi {
        return next;
    }
    fl.clone() + simplest_between(&(hi - &fl).recip(), &(lo - &fl).recip()).recip()
}
