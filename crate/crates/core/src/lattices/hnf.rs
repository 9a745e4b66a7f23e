//! Column-style Hermite normal form over the integers.

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{Signed, Zero};

/// Lower-triangular HNF of a nonsingular square integer matrix (given by
/// rows) under integer unimodular column operations: positive diagonal and
/// `0 <= h[i][j] < h[i][i]` for `j < i`.
pub fn hermite_normal_form(mut a: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let n = a.len();
    for i in 0..n {
        for j in i + 1..n {
            if a[i][j].is_zero() {
                continue;
            }
            let ext = a[i][i].extended_gcd(&a[i][j]);
            let (g, x, y) = (ext.gcd, ext.x, ext.y);
            let p = &a[i][i] / &g;
            let q = &a[i][j] / &g;
            for row in a.iter_mut() {
                let ci = row[i].clone();
                let cj = row[j].clone();
                row[i] = &x * &ci + &y * &cj;
                row[j] = &p * &cj - &q * &ci;
            }
        }
        assert!(!a[i][i].is_zero(), "singular matrix has no square HNF");
        if a[i][i].is_negative() {
            for row in a.iter_mut() {
                row[i] = -row[i].clone();
            }
        }
        for j in 0..i {
            let q = a[i][j].div_floor(&a[i][i]);
            if q.is_zero() {
                continue;
            }
            for row in a.iter_mut() {
                let t = &q * &row[i];
                row[j] -= t;
            }
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect()
    }

    #[test]
    fn identity_is_fixed() {
        let id = z(&[&[1, 0], &[0, 1]]);
        assert_eq!(hermite_normal_form(id.clone()), id);
    }

    #[test]
    fn column_operations_do_not_change_the_form() {
        let a = z(&[&[2, 3], &[1, 5]]);
        // a times [[1, 4], [1, 5]] (det 1)
        let b = z(&[&[5, 23], &[6, 29]]);
        assert_eq!(hermite_normal_form(a), hermite_normal_form(b));
    }

    #[test]
    fn known_form() {
        let h = hermite_normal_form(z(&[&[2, 3], &[1, 5]]));
        assert_eq!(h, z(&[&[1, 0], &[4, 7]]));
    }
}
