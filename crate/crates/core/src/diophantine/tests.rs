use super::*;
use crate::groups::make_a;
use crate::rational::{frac, int};
use proptest::prelude::*;

fn t(xs: &[(i64, i64)]) -> ApproxTarget {
    ApproxTarget::new(xs.iter().map(|&(a, b)| frac(a, b)).collect()).unwrap()
}

fn zs(xs: &[i64]) -> Vec<BigInt> {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

/// Rational brute force over every q and every p in a generous window.
fn naive_a(xi: &ApproxTarget, n: u64, mu: &Rational) -> bool {
    let k = xi.k();
    let nq = int(n as i64);
    let qmax = (mu * &nq).floor().to_integer().to_i64().unwrap();
    let eps = mu * rational::pow(&nq, -(k as i64));
    let mut q = vec![-qmax; k];
    loop {
        if q.iter().any(|&x| x != 0) {
            let form: Rational = q.iter().zip(xi.xi()).map(|(&a, x)| int(a) * x).sum();
            let c = form.floor().to_integer().to_i64().unwrap();
            if (c - 2..=c + 2).any(|p| (&form - int(p)).abs() <= eps) {
                return true;
            }
        }
        let Some(i) = (0..k).rev().find(|&i| q[i] < qmax) else { return false };
        q[i] += 1;
        for x in &mut q[i + 1..] {
            *x = -qmax;
        }
    }
}

fn naive_b(xi: &ApproxTarget, n: u64, mu: &Rational) -> bool {
    let k = xi.k() as i64;
    let nq = int(n as i64);
    let qmax = (mu * rational::pow(&nq, k)).floor().to_integer().to_i64().unwrap();
    let eps = mu / &nq;
    (1..=qmax).any(|q| {
        xi.xi().iter().all(|x| {
            let v = int(q) * x;
            let c = v.floor().to_integer().to_i64().unwrap();
            (c - 1..=c + 2).any(|p| (&v - int(p)).abs() <= eps)
        })
    })
}

#[test]
fn system_a_examples() {
    let v = check_a(&t(&[(2, 7)]), 3, &int(1)).unwrap();
    assert_eq!(v.witness, Some(Witness::A { q: zs(&[1]), p: BigInt::from(0) }));

    let xi = t(&[(1, 2), (1, 3)]);
    for n in 1..12 {
        let v = check_a(&xi, n, &int(1)).unwrap();
        assert!(v.soluble);
        assert!(v.witness.unwrap().verify(&xi, n, &int(1)));
    }
    let exact = Witness::A { q: zs(&[2, 3]), p: BigInt::from(2) };
    assert!(exact.verify(&xi, 3, &int(1)));

    let golden = t(&[(987, 610)]);
    assert!(!check_a(&golden, 5, &frac(2, 5)).unwrap().soluble);
}

#[test]
fn system_b_examples() {
    let golden = t(&[(987, 610)]);
    let v = check_b(&golden, 5, &frac(2, 5)).unwrap();
    assert_eq!(v.soluble, naive_b(&golden, 5, &frac(2, 5)));
    assert!(!v.soluble);

    let zero = t(&[(0, 1), (0, 1)]);
    let v = check_b(&zero, 4, &frac(1, 10)).unwrap();
    assert_eq!(v.witness, Some(Witness::B { q: BigInt::from(1), p: zs(&[0, 0]) }));
}

#[test]
fn rejects_bad_parameters() {
    let xi = t(&[(1, 3)]);
    assert!(matches!(check_a(&xi, 0, &int(1)), Err(Error::Domain(_))));
    assert!(matches!(check_a(&xi, 3, &frac(3, 2)), Err(Error::Domain(_))));
    assert!(matches!(check_b(&xi, 3, &int(0)), Err(Error::Domain(_))));
    assert!(matches!(lattice_criterion(&xi, 3, &int(1)), Err(Error::Domain(_))));
    assert!(ApproxTarget::parse("0.5").is_err());
    assert!(ApproxTarget::parse("").is_err());
    assert_eq!(ApproxTarget::parse("2/7,3/5").unwrap(), t(&[(2, 7), (3, 5)]));
}

#[test]
fn search_cap_is_enforced() {
    let xi = t(&[(1, 3), (1, 5)]);
    assert!(matches!(check_a_with_cap(&xi, 10, &int(1), 100), Err(Error::SearchCapExceeded { .. })));
    assert!(check_a_with_cap(&xi, 10, &int(1), 441).is_ok());
    assert!(matches!(check_b_with_cap(&xi, 10, &int(1), 99), Err(Error::SearchCapExceeded { .. })));
}

#[test]
fn zeta_eta_examples() {
    let phi = [frac(1, 2), frac(1, 4)];
    let (zeta, eta) = zeta_eta(&phi, 2, &zs(&[1, 0]), &BigInt::from(0), &BigInt::from(0), &zs(&[0, 0])).unwrap();
    assert_eq!(zeta, vec![int(2), frac(1, 2), int(0)]);
    assert_eq!(eta, vec![int(0); 3]);
    let (zeta, eta) = zeta_eta(&phi, 5, &zs(&[0, 0]), &BigInt::from(0), &BigInt::from(0), &zs(&[0, 0])).unwrap();
    assert!(zeta.iter().chain(&eta).all(|x| x.is_zero()));
}

#[test]
fn lattice_criterion_examples() {
    let zero = t(&[(0, 1), (0, 1)]);
    assert!(!lattice_criterion(&zero, 2, &frac(1, 2)).unwrap());
    // huge denominators stay exact
    let big = ApproxTarget::new(vec![
        Rational::new(BigInt::from(10).pow(30) + 7, BigInt::from(10).pow(31) + 3),
        Rational::new(BigInt::from(3).pow(50), BigInt::from(7).pow(40)),
    ])
    .unwrap();
    let direct = lattice_criterion(&big, 20, &frac(4, 5)).unwrap();
    let brute = !check_a(&big, 20, &frac(4, 5)).unwrap().soluble && !check_b(&big, 20, &frac(4, 5)).unwrap().soluble;
    assert_eq!(direct, brute);
}

#[test]
fn wide_denominators_use_the_bigint_path() {
    let big = ApproxTarget::new(vec![Rational::new(BigInt::from(2).pow(130) / 3, BigInt::from(2).pow(130) + 1)]).unwrap();
    for n in 1..15 {
        for mu in [frac(1, 2), frac(9, 10), int(1)] {
            assert_eq!(check_a(&big, n, &mu).unwrap().soluble, naive_a(&big, n, &mu));
            assert_eq!(check_b(&big, n, &mu).unwrap().soluble, naive_b(&big, n, &mu));
        }
    }
}

#[test]
fn scan_filters_in_order() {
    let xi = t(&[(3, 7), (2, 5)]);
    assert!(dirichlet_scan(&xi, &[], &frac(1, 2)).unwrap().is_empty());
    let ns: Vec<u64> = (1..25).rev().collect();
    let kept = dirichlet_scan(&xi, &ns, &frac(1, 2)).unwrap();
    let expect: Vec<u64> = ns.iter().copied().filter(|&n| lattice_criterion(&xi, n, &frac(1, 2)).unwrap()).collect();
    assert_eq!(kept, expect);
    // q = 35 solves system B exactly once N^2 / 2 >= 35
    assert!(kept.iter().all(|&n| n < 9));
}

#[test]
fn interval_mode_agrees_on_exact_floats() {
    let iv = IntervalTarget::from_f64(&[0.25]).unwrap();
    let exact = t(&[(1, 4)]);
    // q = 4 hits 1/4 exactly for every nearby real, so the verdict is certain
    assert!(check_a(&exact, 4, &int(1)).unwrap().soluble);
    assert!(matches!(check_a_interval(&iv, 4, &int(1), DEFAULT_SEARCH_CAP).unwrap(), IntervalVerdict::Soluble { .. }));
    let golden = IntervalTarget::from_f64(&[1.618_033_988_749_895]).unwrap();
    assert_eq!(check_a_interval(&golden, 5, &frac(2, 5), DEFAULT_SEARCH_CAP).unwrap(), IntervalVerdict::Insoluble);
    assert_eq!(check_b_interval(&golden, 5, &frac(2, 5), DEFAULT_SEARCH_CAP).unwrap(), IntervalVerdict::Insoluble);
    assert!(IntervalTarget::from_f64(&[f64::NAN]).is_err());
}

#[test]
fn interval_mode_reports_boundary_cases() {
    // q = 1 straddles the tolerance edge, q = 4 is certain for the whole box
    let iv = IntervalTarget::new(vec![frac(1, 4) - frac(1, 100)], vec![frac(1, 4) + frac(1, 100)]).unwrap();
    let w = Witness::A { q: zs(&[4]), p: BigInt::from(1) };
    assert_eq!(check_a_interval(&iv, 4, &int(1), DEFAULT_SEARCH_CAP).unwrap(), IntervalVerdict::Soluble { witness: w });
    // only q = 1 is allowed and it straddles the edge
    let iv = IntervalTarget::new(vec![frac(1, 4) - frac(1, 1000)], vec![frac(1, 4) + frac(1, 1000)]).unwrap();
    assert_eq!(check_a_interval(&iv, 2, &frac(1, 2), DEFAULT_SEARCH_CAP).unwrap(), IntervalVerdict::Undecided);
    let iv = IntervalTarget::new(vec![frac(3, 8) - frac(1, 1000)], vec![frac(3, 8) + frac(1, 1000)]).unwrap();
    assert_eq!(check_a_interval(&iv, 2, &frac(1, 2), DEFAULT_SEARCH_CAP).unwrap(), IntervalVerdict::Insoluble);
}

#[test]
fn serde_shapes() {
    let v = check_a(&t(&[(2, 7)]), 3, &int(1)).unwrap();
    let js = serde_json::to_value(&v).unwrap();
    assert_eq!(js, serde_json::json!({"soluble": true, "witness": {"q": ["1"], "p": "0"}}));
    let back: Verdict = serde_json::from_value(js).unwrap();
    assert_eq!(back, v);
    let w = Witness::B { q: BigInt::from(3), p: zs(&[1, 2]) };
    let back: Witness = serde_json::from_str(&serde_json::to_string(&w).unwrap()).unwrap();
    assert_eq!(back, w);
}

fn target(k: usize) -> impl Strategy<Value = ApproxTarget> {
    proptest::collection::vec((-40i64..41, 1i64..60), k).prop_map(|v| t(&v))
}

fn open_mu() -> impl Strategy<Value = Rational> {
    (1i64..20).prop_map(|a| frac(a, 20))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn brute_force_matches_naive((xi, n, mu) in (1usize..3).prop_flat_map(|k| (target(k), 1u64..12, (1i64..11).prop_map(|a| frac(a, 10))))) {
        let a = check_a(&xi, n, &mu).unwrap();
        let b = check_b(&xi, n, &mu).unwrap();
        prop_assert_eq!(a.soluble, naive_a(&xi, n, &mu));
        prop_assert_eq!(b.soluble, naive_b(&xi, n, &mu));
        for w in a.witness.iter().chain(&b.witness) {
            prop_assert!(w.verify(&xi, n, &mu));
        }
    }

    #[test]
    fn dirichlet_guarantee(xi in (1usize..4).prop_flat_map(target), n in 1u64..9) {
        prop_assert!(check_a(&xi, n, &int(1)).unwrap().soluble);
        prop_assert!(check_b(&xi, n, &int(1)).unwrap().soluble);
    }

    #[test]
    fn insolubility_is_monotone(xi in target(2), n in 1u64..15, a in 1i64..20, b in 1i64..20) {
        let (lo, hi) = (frac(a.min(b), 20), frac(a.max(b), 20));
        if !check_a(&xi, n, &hi).unwrap().soluble {
            prop_assert!(!check_a(&xi, n, &lo).unwrap().soluble);
        }
        if !check_b(&xi, n, &hi).unwrap().soluble {
            prop_assert!(!check_b(&xi, n, &lo).unwrap().soluble);
        }
    }

    #[test]
    fn lattice_criterion_is_joint_insolubility(xi in (1usize..3).prop_flat_map(target), n in 1u64..20, mu in open_mu()) {
        let brute = !check_a(&xi, n, &mu).unwrap().soluble && !check_b(&xi, n, &mu).unwrap().soluble;
        prop_assert_eq!(lattice_criterion(&xi, n, &mu).unwrap(), brute);
    }

    #[test]
    fn each_lattice_matches_one_system(xi in target(2), n in 1u64..20, mu in open_mu()) {
        let (first, second) = lattice_memberships(&xi, n, &mu).unwrap();
        prop_assert_eq!(first, !check_a(&xi, n, &mu).unwrap().soluble);
        prop_assert_eq!(second, !check_b(&xi, n, &mu).unwrap().soluble);
    }

    #[test]
    fn zeta_is_a_flowed_lattice_vector(phi in proptest::collection::vec((-30i64..31, 1i64..20), 1..4), n in 1u64..9, ints in proptest::collection::vec(-9i64..10, 8)) {
        let k = phi.len();
        let phi: Vec<Rational> = phi.iter().map(|&(a, b)| frac(a, b)).collect();
        let q_vec = zs(&ints[..k]);
        let p = BigInt::from(ints[k]);
        let q = BigInt::from(ints[k + 1]);
        let p_vec = zs(&ints[4..4 + k]);
        let (zeta, eta) = zeta_eta(&phi, n, &q_vec, &p, &q, &p_vec).unwrap();
        let r = FlowScale::from_integer(n).unwrap();
        let g = make_a(&r, k + 1).unwrap().mul(&make_u(&phi));
        let col: Vec<Rational> = std::iter::once(&p).chain(&q_vec).map(|x| Rational::from_integer(x.clone())).collect();
        prop_assert_eq!(zeta, g.apply(&col));
        // eta is a'_N u'(phi) (p_1, .., p_k, q) with the first k entries reversed
        let h = make_a_prime(&r, k + 1).unwrap().mul(&make_u_prime(&phi));
        let col: Vec<Rational> = p_vec.iter().chain(std::iter::once(&q)).map(|x| Rational::from_integer(x.clone())).collect();
        let mut v = h.apply(&col);
        v[..k].reverse();
        prop_assert_eq!(eta, v);
    }

    #[test]
    fn degenerate_intervals_match_exact_mode(xi in target(2), n in 1u64..8, mu in (1i64..11).prop_map(|a| frac(a, 10))) {
        let iv = IntervalTarget::new(xi.xi().to_vec(), xi.xi().to_vec()).unwrap();
        let fold = |v: IntervalVerdict| match v {
            IntervalVerdict::Soluble { witness } => Some(witness.verify(&xi, n, &mu)),
            IntervalVerdict::Insoluble => Some(false),
            IntervalVerdict::Undecided => None,
        };
        let a = fold(check_a_interval(&iv, n, &mu, DEFAULT_SEARCH_CAP).unwrap());
        let b = fold(check_b_interval(&iv, n, &mu, DEFAULT_SEARCH_CAP).unwrap());
        prop_assert_eq!(a, Some(check_a(&xi, n, &mu).unwrap().soluble));
        prop_assert_eq!(b, Some(check_b(&xi, n, &mu).unwrap().soluble));
    }
}
