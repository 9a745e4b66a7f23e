//! LLL preconditioning of an integer basis.
//!
//! Gram-Schmidt data is recomputed in floating point from the exact integer
//! basis before every decision, while every basis change is applied exactly
//! and recorded in an integer unimodular transform.

use num_bigint::BigInt;
use num_traits::{FromPrimitive, ToPrimitive, Zero};

pub const DELTA: f64 = 0.99;

pub(crate) struct Reduction {
    /// Reduced basis vectors (columns).
    pub cols: Vec<Vec<BigInt>>,
    /// `cols[j] = sum_i original[i] * transform[j][i]`.
    pub transform: Vec<Vec<BigInt>>,
}

pub(crate) fn to_f64_shifted(x: &BigInt, shift: u64) -> f64 {
    if shift == 0 {
        x.to_f64().unwrap_or(f64::NAN)
    } else {
        (x >> shift).to_f64().unwrap_or(f64::NAN)
    }
}

fn float_basis(cols: &[Vec<BigInt>]) -> Vec<Vec<f64>> {
    let bits = cols.iter().flatten().map(|x| x.bits()).max().unwrap_or(0);
    let shift = bits.saturating_sub(960);
    cols.iter().map(|c| c.iter().map(|x| to_f64_shifted(x, shift)).collect()).collect()
}

/// Returns `(mu, |b*_i|^2)` with `mu[i][j]` for `j < i`.
pub(crate) fn gram_schmidt(basis: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = basis.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut norms = vec![0.0; n];
    for i in 0..n {
        let mut v = basis[i].clone();
        for j in 0..i {
            let m = if norms[j] > 0.0 { dot(&basis[i], &star[j]) / norms[j] } else { 0.0 };
            mu[i][j] = m;
            for (x, s) in v.iter_mut().zip(&star[j]) {
                *x -= m * s;
            }
        }
        norms[i] = dot(&v, &v);
        star.push(v);
    }
    (mu, norms)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(target: &mut [BigInt], q: &BigInt, source: &[BigInt]) {
    for (t, s) in target.iter_mut().zip(source) {
        *t -= q * s;
    }
}

pub(crate) fn reduce(cols: Vec<Vec<BigInt>>) -> Reduction {
    let n = cols.len();
    let mut cols = cols;
    let mut transform: Vec<Vec<BigInt>> = (0..n)
        .map(|j| (0..n).map(|i| BigInt::from((i == j) as i64)).collect())
        .collect();
    if n < 2 {
        return Reduction { cols, transform };
    }
    let max_steps = 2000 * n * n;
    let mut k = 1;
    let mut steps = 0;
    while k < n && steps < max_steps {
        steps += 1;
        // Size reduction, repeated because float rounding can leave |mu| a little above 1/2.
        let mut gs = gram_schmidt(&float_basis(&cols));
        for _ in 0..64 {
            let mut changed = false;
            for j in (0..k).rev() {
                let m = gs.0[k][j];
                if !m.is_finite() || m.abs() <= 0.5 {
                    continue;
                }
                let q = m.round();
                let qz = BigInt::from_f64(q).unwrap_or_else(BigInt::zero);
                if qz.is_zero() {
                    continue;
                }
                let (head, tail) = cols.split_at_mut(k);
                axpy(&mut tail[0], &qz, &head[j]);
                let (head, tail) = transform.split_at_mut(k);
                axpy(&mut tail[0], &qz, &head[j]);
                for l in 0..j {
                    gs.0[k][l] -= q * gs.0[j][l];
                }
                gs.0[k][j] -= q;
                changed = true;
            }
            if !changed {
                break;
            }
            gs = gram_schmidt(&float_basis(&cols));
        }
        let (mu, norms) = &gs;
        let m = mu[k][k - 1];
        if norms[k] >= (DELTA - m * m) * norms[k - 1] {
            k += 1;
        } else {
            cols.swap(k, k - 1);
            transform.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    Reduction { cols, transform }
}
