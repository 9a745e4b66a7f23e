//! Sup-norm box enumeration.
//!
//! The rational basis is scaled to an integer basis `D * B`, so the closed
//! box `|v_i| <= mu` becomes `|w_i| <= floor(D mu)` for integer vectors `w`.
//! Candidates come from a Fincke-Pohst walk over the LLL-reduced basis inside
//! the Euclidean ball circumscribing the box; each leaf is accepted or
//! rejected by exact integer comparison.

use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::lll;
use super::{LatticePoint, SupBox, UnimodularLattice};
use crate::rational::{self, Rational};
use crate::{Error, Result};

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Relative slack on float bounds; membership never depends on it.
const SLACK: f64 = 1e-7;

/// Called with lattice coordinates and scaled integer ambient coordinates.
type Visitor<'a> = dyn FnMut(&[i64], &[BigInt]) -> ControlFlow<()> + 'a;

/// A lattice prepared for repeated box queries.
pub struct BoxEnumerator {
    n: usize,
    scale: BigInt,
    reduced: Vec<Vec<BigInt>>,
    reduced_small: Option<Vec<Vec<i64>>>,
    transform: Vec<Vec<BigInt>>,
    mu: Vec<Vec<f64>>,
    norms: Vec<f64>,
    budget: u64,
}

impl BoxEnumerator {
    pub fn new(lattice: &UnimodularLattice) -> Self {
        Self::with_budget(lattice, DEFAULT_BUDGET)
    }

    pub fn with_budget(lattice: &UnimodularLattice, budget: u64) -> Self {
        let (scale, cols) = lattice.integer_columns();
        let red = lll::reduce(cols);
        let (mu, norms) = exact_gram_schmidt(&red.cols);
        let reduced_small = red
            .cols
            .iter()
            .map(|c| c.iter().map(|x| x.to_i64().filter(|v| v.unsigned_abs() < 1 << 62)).collect())
            .collect::<Option<Vec<Vec<i64>>>>();
        BoxEnumerator {
            n: lattice.dim(),
            scale,
            reduced: red.cols,
            reduced_small,
            transform: red.transform,
            mu,
            norms,
            budget,
        }
    }

    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    /// Reduced basis as rational columns.
    pub fn reduced_basis(&self) -> Vec<Vec<Rational>> {
        self.reduced
            .iter()
            .map(|c| c.iter().map(|x| BigRational::new(x.clone(), self.scale.clone())).collect())
            .collect()
    }

    fn int_radius(&self, radius: &Rational) -> BigInt {
        (radius * Rational::from_integer(self.scale.clone())).floor().to_integer()
    }

    /// Walks all nonzero integer vectors `w = reduced * c` with `|w|_inf <= r`.
    fn walk(
        &self,
        r: &BigInt,
        visit: &mut Visitor<'_>,
    ) -> Result<()> {
        if r.is_negative() || r.is_zero() {
            return Ok(());
        }
        let n = self.n;
        let rf = lll::to_f64_shifted(r, 0);
        let r2 = (n as f64) * rf * rf * (1.0 + SLACK);
        let r_small = r.to_i128();
        let mut c = vec![0i64; n];
        let mut hi = vec![0i64; n];
        let mut center = vec![0f64; n];
        let mut partial = vec![0f64; n + 1];
        let mut count: u64 = 0;

        let bounds = |k: usize, center: f64, rem: f64| -> Result<(i64, i64)> {
            let w = (rem.max(0.0) / self.norms[k]).sqrt();
            let w = w + SLACK * (1.0 + w + center.abs());
            let lo = (center - w).ceil();
            let hi = (center + w).floor();
            if !(lo.is_finite() && hi.is_finite()) || hi - lo > self.budget as f64 || lo.abs() > 1e15 || hi.abs() > 1e15 {
                return Err(Error::BudgetExceeded { budget: self.budget });
            }
            Ok((lo as i64, hi as i64))
        };

        let mut k = n - 1;
        let (lo, h) = bounds(k, 0.0, r2)?;
        c[k] = lo;
        hi[k] = h;
        let mut w_big = vec![BigInt::zero(); n];
        loop {
            if c[k] > hi[k] {
                k += 1;
                if k == n {
                    return Ok(());
                }
                c[k] += 1;
                continue;
            }
            count += 1;
            if count > self.budget {
                return Err(Error::BudgetExceeded { budget: self.budget });
            }
            let d = c[k] as f64 - center[k];
            let p = partial[k + 1] + self.norms[k] * d * d;
            if p > r2 * (1.0 + SLACK) {
                c[k] += 1;
                continue;
            }
            partial[k] = p;
            if k > 0 {
                k -= 1;
                center[k] = -(k + 1..n).map(|j| self.mu[j][k] * c[j] as f64).sum::<f64>();
                let (lo, h) = bounds(k, center[k], r2 - partial[k + 1])?;
                c[k] = lo;
                hi[k] = h;
                continue;
            }
            if c.iter().any(|&x| x != 0) && self.leaf_in_box(&c, r, r_small, &mut w_big) && visit(&c, &w_big).is_break() {
                return Ok(());
            }
            c[0] += 1;
        }
    }

    /// Exact box test for `w = reduced * c`; fills `w` on success.
    fn leaf_in_box(&self, c: &[i64], r: &BigInt, r_small: Option<i128>, w: &mut [BigInt]) -> bool {
        if let (Some(cols), Some(rs)) = (&self.reduced_small, r_small) {
            if c.iter().all(|x| x.unsigned_abs() < 1 << 31) {
                let mut acc = vec![0i128; self.n];
                for (j, &cj) in c.iter().enumerate() {
                    if cj == 0 {
                        continue;
                    }
                    for (a, &b) in acc.iter_mut().zip(&cols[j]) {
                        *a += cj as i128 * b as i128;
                    }
                }
                if acc.iter().any(|a| a.abs() > rs) {
                    return false;
                }
                for (wi, a) in w.iter_mut().zip(acc) {
                    *wi = BigInt::from(a);
                }
                return true;
            }
        }
        for wi in w.iter_mut() {
            *wi = BigInt::zero();
        }
        for (j, &cj) in c.iter().enumerate() {
            if cj == 0 {
                continue;
            }
            let cj = BigInt::from(cj);
            for (wi, b) in w.iter_mut().zip(&self.reduced[j]) {
                *wi += &cj * b;
            }
        }
        w.iter().all(|x| x.abs() <= *r)
    }

    fn original_coords(&self, c: &[i64]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.n];
        for (j, &cj) in c.iter().enumerate() {
            if cj == 0 {
                continue;
            }
            let cj = BigInt::from(cj);
            for (o, t) in out.iter_mut().zip(&self.transform[j]) {
                *o += &cj * t;
            }
        }
        out
    }

    fn make_point(&self, c: &[i64], w: &[BigInt]) -> LatticePoint {
        LatticePoint {
            coords: self.original_coords(c),
            ambient: w.iter().map(|x| BigRational::new(x.clone(), self.scale.clone())).collect(),
        }
    }

    /// All nonzero lattice points in the closed box, sorted by coordinates
    /// in the lattice's own basis.
    pub fn points(&self, b: &SupBox) -> Result<Vec<LatticePoint>> {
        let r = self.int_radius(b.mu());
        let mut out = Vec::new();
        self.walk(&r, &mut |c, w| {
            out.push(self.make_point(c, w));
            ControlFlow::Continue(())
        })?;
        out.sort_by(|a, b| a.coords.cmp(&b.coords));
        Ok(out)
    }

    pub fn count(&self, b: &SupBox) -> Result<u64> {
        let r = self.int_radius(b.mu());
        let mut count = 0;
        self.walk(&r, &mut |_, _| {
            count += 1;
            ControlFlow::Continue(())
        })?;
        Ok(count)
    }

    /// True iff the box holds no nonzero lattice point.
    pub fn avoids(&self, b: &SupBox) -> Result<bool> {
        let r = self.int_radius(b.mu());
        let mut found = false;
        self.walk(&r, &mut |_, _| {
            found = true;
            ControlFlow::Break(())
        })?;
        Ok(!found)
    }

    /// A nonzero point of minimal sup-norm, ties broken by coordinates.
    pub fn shortest(&self) -> Result<(LatticePoint, Rational)> {
        let bound = self
            .reduced
            .iter()
            .map(|col| col.iter().map(|x| x.abs()).max().unwrap_or_default())
            .min()
            .expect("nonempty basis");
        let mut best: Option<(BigInt, LatticePoint)> = None;
        self.walk(&bound, &mut |c, w| {
            let norm = w.iter().map(|x| x.abs()).max().unwrap_or_default();
            let better = match &best {
                None => true,
                Some((bn, bp)) => norm < *bn || (norm == *bn && self.original_coords(c) < bp.coords),
            };
            if better {
                best = Some((norm, self.make_point(c, w)));
            }
            ControlFlow::Continue(())
        })?;
        let (norm, point) = best.ok_or_else(|| Error::Internal("basis vector missed by enumeration".into()))?;
        Ok((point, BigRational::new(norm, self.scale.clone())))
    }
}

/// Integral Gram-Schmidt (all divisions exact), converted to floats once.
fn exact_gram_schmidt(cols: &[Vec<BigInt>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = cols.len();
    let gram: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum()).collect())
        .collect();
    let mut d = vec![BigInt::from(1); n + 1];
    let mut lambda = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut u = gram[i][j].clone();
            for k in 0..j {
                u = (&d[k + 1] * &u - &lambda[i][k] * &lambda[j][k]) / &d[k];
            }
            if j < i {
                lambda[i][j] = u;
            } else {
                d[i + 1] = u;
            }
        }
    }
    let ratio = |a: &BigInt, b: &BigInt| rational::to_f64(&BigRational::new(a.clone(), b.clone()));
    let norms = (0..n).map(|i| ratio(&d[i + 1], &d[i])).collect();
    let mu = (0..n)
        .map(|i| (0..n).map(|j| if j < i { ratio(&lambda[i][j], &d[j + 1]) } else { 0.0 }).collect())
        .collect();
    (mu, norms)
}

/// Direct bounded search in the lattice's own coordinates, without LLL or
/// integer scaling: `|c_j| <= mu * sum_i |B^{-1}_{ji}|`. Used to cross-check
/// the main enumerator in small dimension.
pub fn points_in_box_direct(lattice: &UnimodularLattice, b: &SupBox, budget: u64) -> Result<Vec<LatticePoint>> {
    let n = lattice.dim();
    let inv = lattice.basis().inverse().expect("unimodular basis");
    let bounds: Vec<i64> = (0..n)
        .map(|j| {
            let s: Rational = (0..n).map(|i| inv[(j, i)].abs()).sum();
            (s * b.mu()).floor().to_integer().to_i64().unwrap_or(i64::MAX)
        })
        .collect();
    let size = bounds.iter().try_fold(1u64, |acc, &h| acc.checked_mul(2 * h.max(0) as u64 + 1));
    match size {
        Some(s) if s <= budget => {}
        _ => return Err(Error::BudgetExceeded { budget }),
    }
    let mut out = Vec::new();
    let mut c: Vec<i64> = bounds.iter().map(|h| -h).collect();
    'outer: loop {
        if c.iter().any(|&x| x != 0) {
            let coords: Vec<BigInt> = c.iter().map(|&x| BigInt::from(x)).collect();
            let v: Vec<Rational> = lattice.basis().mul_vec(&coords.iter().map(|x| Rational::from_integer(x.clone())).collect::<Vec<_>>());
            if v.iter().all(|x| x.abs() <= *b.mu()) {
                out.push(LatticePoint { coords, ambient: v });
            }
        }
        for j in (0..n).rev() {
            if c[j] < bounds[j] {
                c[j] += 1;
                continue 'outer;
            }
            c[j] = -bounds[j];
        }
        break;
    }
    out.sort_by(|a, b| a.coords.cmp(&b.coords));
    Ok(out)
}
