use super::*;
use crate::groups::{make_a, make_u, FlowScale};
use crate::rational::{frac, int};
use proptest::prelude::*;

fn diag(entries: &[Rational]) -> UnimodularLattice {
    UnimodularLattice::new(QMatrix::diagonal(entries)).unwrap()
}

fn boxed(mu: Rational) -> SupBox {
    SupBox::new(mu).unwrap()
}

fn zv(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Integer unimodular matrix built from elementary column operations.
fn unimodular(ops: &[(usize, usize, i64)], n: usize) -> QMatrix {
    let mut m = QMatrix::identity(n);
    for &(i, j, c) in ops {
        let (i, j) = (i % n, j % n);
        if i == j {
            continue;
        }
        let mut e = QMatrix::identity(n);
        e[(i, j)] = int(c);
        m = m.mul_mat(&e);
    }
    m
}

fn rebase(l: &UnimodularLattice, gamma: &QMatrix) -> UnimodularLattice {
    UnimodularLattice::new(l.basis().mul_mat(gamma)).unwrap()
}

#[test]
fn from_group_element_examples() {
    let id = GroupElement::identity(3);
    assert_eq!(UnimodularLattice::from_group_element(&id), UnimodularLattice::standard(3));
    let g = GroupElement::new(QMatrix::diagonal(&[int(2), frac(1, 2)])).unwrap();
    let l = UnimodularLattice::from_group_element(&g);
    assert_eq!(l.basis().col(0), vec![int(2), int(0)]);
    assert_eq!(l.basis().col(1), vec![int(0), frac(1, 2)]);
}

#[test]
fn rejects_non_unimodular_basis() {
    assert!(UnimodularLattice::new(QMatrix::diagonal(&[int(2), int(1)])).is_err());
    // det -1 is fine
    assert!(UnimodularLattice::new(QMatrix::from_i64_rows(&[&[0, 1], &[1, 0]])).is_ok());
}

#[test]
fn box_examples() {
    let z2 = UnimodularLattice::standard(2);
    assert!(points_in_box(&z2, &boxed(frac(1, 2))).unwrap().is_empty());

    let l = diag(&[int(2), frac(1, 2)]);
    let pts = points_in_box(&l, &boxed(int(1))).unwrap();
    let coords: Vec<Vec<BigInt>> = pts.iter().map(|p| p.coords.clone()).collect();
    assert_eq!(coords, vec![zv(&[0, -2]), zv(&[0, -1]), zv(&[0, 1]), zv(&[0, 2])]);
    let ambient: Vec<Vec<Rational>> = pts.iter().map(|p| p.ambient.clone()).collect();
    assert_eq!(ambient[1], vec![int(0), frac(-1, 2)]);
}

#[test]
fn k_membership_examples() {
    for n in 2..=4 {
        let z = UnimodularLattice::standard(n);
        assert!(is_in_k(&z, &frac(9, 10)).unwrap());
        assert!(!is_in_k(&z, &int(1)).unwrap(), "closed box contains the unit vectors");
    }
    assert!(!is_in_k(&diag(&[int(2), frac(1, 2)]), &frac(3, 4)).unwrap());
    assert!(is_in_k(&UnimodularLattice::standard(2), &int(0)).is_err());
}

#[test]
fn shortest_examples() {
    let (_, len) = shortest_vector(&UnimodularLattice::standard(3)).unwrap();
    assert_eq!(len, int(1));
    let (p, len) = shortest_vector(&diag(&[int(4), frac(1, 2), frac(1, 2)])).unwrap();
    assert_eq!(len, frac(1, 2));
    // (0,-1,-1) has sup norm 1/2 as well and sorts first
    assert_eq!(p.coords, zv(&[0, -1, -1]));
}

#[test]
fn lll_keeps_standard_lattice() {
    let z = UnimodularLattice::standard(4);
    let r = lll_reduce(&z);
    assert_eq!(r, z);
    assert_eq!(r.basis().max_abs(), int(1));
}

#[test]
fn equality_is_up_to_integer_basis_change() {
    let l = diag(&[int(3), frac(1, 3)]);
    let gamma = QMatrix::from_i64_rows(&[&[2, 1], &[1, 1]]);
    assert_eq!(l, rebase(&l, &gamma));
    assert_ne!(l, diag(&[frac(1, 3), int(3)]));
}

#[test]
fn budget_is_an_error_not_truncation() {
    let z = UnimodularLattice::standard(3);
    let e = BoxEnumerator::with_budget(&z, 50);
    assert!(matches!(e.points(&boxed(int(5))), Err(Error::BudgetExceeded { budget: 50 })));
}

#[test]
fn serde_round_trip_is_column_major() {
    let g = make_u(&[frac(1, 2)]).mul(&make_a(&FlowScale::from_integer(2).unwrap(), 2).unwrap());
    let l = UnimodularLattice::from_group_element(&g);
    let j = serde_json::to_value(&l).unwrap();
    assert_eq!(j["n"], 2);
    assert_eq!(j["basis"][1], serde_json::json!(["1/4", "1/2"]));
    let back: UnimodularLattice = serde_json::from_value(j).unwrap();
    assert_eq!(back.basis(), l.basis());
    let bad = serde_json::json!({"n": 2, "basis": [["2/1", "0/1"], ["0/1", "1/1"]]});
    assert!(serde_json::from_value::<UnimodularLattice>(bad).is_err());
}

#[test]
fn huge_entries_stay_exact() {
    // N = 10^6 flow over a point with a large denominator.
    let xi = [Rational::new(BigInt::from(123456789i64), BigInt::from(987654321987i64)), frac(-5, 7)];
    let g = make_a(&FlowScale::from_integer(1_000_000).unwrap(), 3).unwrap().mul(&make_u(&xi));
    let l = UnimodularLattice::from_group_element(&g);
    let r = lll_reduce(&l);
    assert_eq!(r, l);
    let pts = points_in_box(&l, &boxed(frac(1, 100))).unwrap();
    assert!(pts.len() > 1000);
    for p in &pts {
        let c: Vec<Rational> = p.coords.iter().map(|x| Rational::from_integer(x.clone())).collect();
        assert_eq!(l.basis().mul_vec(&c), p.ambient);
        assert!(p.sup_norm() <= frac(1, 100));
    }
}

fn rat() -> impl Strategy<Value = Rational> {
    (-12i64..13, 1i64..9).prop_map(|(a, b)| frac(a, b))
}

/// Random rational unimodular lattice: a flowed unipotent tilted by a
/// random SL(3, Q) element.
fn lattice3() -> impl Strategy<Value = UnimodularLattice> {
    (crate::groups::tests::sl3(), proptest::collection::vec(rat(), 2), 1u64..5).prop_map(|(g, xi, r)| {
        let a = make_a(&FlowScale::from_integer(r).unwrap(), 3).unwrap();
        UnimodularLattice::from_group_element(&g.mul(&a).mul(&make_u(&xi)))
    })
}

fn ops() -> impl Strategy<Value = Vec<(usize, usize, i64)>> {
    proptest::collection::vec((0usize..3, 0usize..3, -3i64..4), 0..6)
}

fn radius() -> impl Strategy<Value = Rational> {
    (1i64..12, 1i64..5).prop_map(|(a, b)| frac(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_matches_direct_search(l in lattice3(), mu in radius()) {
        let b = boxed(mu);
        let fast = points_in_box(&l, &b);
        let slow = points_in_box_direct(&l, &b, 20_000);
        if let (Ok(fast), Ok(slow)) = (fast, slow) {
            prop_assert_eq!(fast, slow);
        }
    }

    #[test]
    fn box_points_are_symmetric(l in lattice3(), mu in radius()) {
        let pts = points_in_box(&l, &boxed(mu)).unwrap();
        prop_assert_eq!(pts.len() % 2, 0);
        let amb: std::collections::HashSet<Vec<Rational>> = pts.iter().map(|p| p.ambient.clone()).collect();
        for p in &pts {
            let neg: Vec<Rational> = p.ambient.iter().map(|x| -x).collect();
            prop_assert!(amb.contains(&neg));
        }
    }

    #[test]
    fn box_count_independent_of_basis(l in lattice3(), o in ops(), mu in radius()) {
        let other = rebase(&l, &unimodular(&o, 3));
        let b = boxed(mu);
        let mut a: Vec<Vec<Rational>> = points_in_box(&l, &b).unwrap().into_iter().map(|p| p.ambient).collect();
        let mut c: Vec<Vec<Rational>> = points_in_box(&other, &b).unwrap().into_iter().map(|p| p.ambient).collect();
        a.sort();
        c.sort();
        prop_assert_eq!(a, c);
    }

    #[test]
    fn k_is_monotone(l in lattice3(), mu in radius(), shrink in 1i64..5) {
        let smaller = &mu * frac(1, shrink + 1);
        if is_in_k(&l, &mu).unwrap() {
            prop_assert!(is_in_k(&l, &smaller).unwrap());
        }
    }

    #[test]
    fn lll_preserves_lattice(l in lattice3()) {
        let r = lll_reduce(&l);
        prop_assert_eq!(&r, &l);
        prop_assert!(r.basis().det().abs().is_one());
    }

    #[test]
    fn lll_first_vector_is_near_shortest(l in lattice3()) {
        let r = lll_reduce(&l);
        let first: Rational = r.basis().col(0).iter().map(|x| x.abs()).max().unwrap();
        let brute = brute_shortest(&l, 6);
        // sup <= euclid <= 2^{(n-1)/2} lambda_euclid <= 2^{(n-1)/2} sqrt(n) lambda_sup
        let bound = rational::to_f64(&brute) * 2f64.powf(1.0) * 3f64.sqrt();
        prop_assert!(rational::to_f64(&first) <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn shortest_is_basis_independent(l in lattice3(), o in ops()) {
        let other = rebase(&l, &unimodular(&o, 3));
        let (_, a) = shortest_vector(&l).unwrap();
        let (_, b) = shortest_vector(&other).unwrap();
        prop_assert_eq!(&a, &b);
        let reduced = lll_reduce(&l);
        prop_assert!(a <= brute_shortest(&reduced, 3));
    }
}

/// Minimum sup norm over coefficients in `[-h, h]^n`, an upper bound for the
/// true minimum that is exact once `h` is large enough.
fn brute_shortest(l: &UnimodularLattice, h: i64) -> Rational {
    let n = l.dim();
    let mut best: Option<Rational> = None;
    let mut c = vec![-h; n];
    loop {
        if c.iter().any(|&x| x != 0) {
            let v = l.basis().mul_vec(&c.iter().map(|&x| int(x)).collect::<Vec<_>>());
            let s = v.iter().map(|x| x.abs()).max().unwrap();
            if best.as_ref().is_none_or(|b| s < *b) {
                best = Some(s);
            }
        }
        let mut j = n;
        loop {
            if j == 0 {
                return best.unwrap();
            }
            j -= 1;
            if c[j] < h {
                c[j] += 1;
                break;
            }
            c[j] = -h;
        }
    }
}

#[test]
fn shortest_agrees_with_brute_force_on_reduced_bases() {
    let xs = [frac(1, 3), frac(7, 11), frac(-2, 5), frac(13, 17)];
    for (i, x) in xs.iter().enumerate() {
        let g = make_a(&FlowScale::from_integer(3 + i as u64).unwrap(), 3).unwrap().mul(&make_u(&[x.clone(), x * x]));
        let l = UnimodularLattice::from_group_element(&g);
        let (p, len) = shortest_vector(&l).unwrap();
        assert_eq!(p.sup_norm(), len);
        assert_eq!(len, brute_shortest(&lll_reduce(&l), 4));
    }
}
