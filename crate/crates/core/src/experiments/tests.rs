use super::*;
use crate::diophantine::{check_a, check_b, lattice_criterion};
use crate::groups::make_u as u;
use crate::lattices::{points_in_box_direct, UnimodularLattice};
use crate::rational::{frac, int};
use proptest::prelude::*;

fn moment(k: usize) -> PolyCurve {
    PolyCurve::moment(k, int(1), int(2)).unwrap()
}

fn config(samples: usize, n_list: Vec<u64>, sampler: Sampler) -> ExperimentConfig {
    ExperimentConfig::new(moment(2), n_list, frac(1, 2), samples, 0, frac(3, 2), sampler).unwrap()
}

#[test]
fn samplers() {
    let g = config(4, vec![1], Sampler::Grid).sample_points();
    assert_eq!(g, vec![frac(9, 8), frac(11, 8), frac(13, 8), frac(15, 8)]);
    let v = config(4, vec![1], Sampler::LowDiscrepancy).sample_points();
    let p: BigInt = (BigInt::one() << 61u32) - 1;
    let theta = Rational::new(BigInt::from(ROTATION_NUMERATOR), p.clone());
    let rotated: Vec<Rational> = [frac(1, 2), frac(1, 4), frac(3, 4), frac(1, 8)]
        .iter()
        .map(|x| {
            let y = x + &theta;
            int(1) + if y >= int(1) { y - int(1) } else { y }
        })
        .collect();
    assert_eq!(v, rotated);
    assert!(v.iter().all(|s| s.denom() % &p == BigInt::zero()));
    let mut c = config(50, vec![1], Sampler::SeededUniform);
    let a = c.sample_points();
    assert_eq!(a, c.sample_points());
    assert!(a.iter().all(|s| *s >= int(1) && *s < int(2)));
    assert!(a.iter().all(|s| (s * Rational::from_integer(BigInt::one() << 20)).is_integer()));
    c.seed = 1;
    assert_ne!(a, c.sample_points());
    assert_eq!("vdc".parse::<Sampler>().unwrap(), Sampler::LowDiscrepancy);
    assert!("sobol".parse::<Sampler>().is_err());
}

#[test]
fn config_validation() {
    let c = |n_list: Vec<u64>, mu: Rational, samples| ExperimentConfig::new(moment(2), n_list, mu, samples, 0, int(1), Sampler::Grid);
    assert!(c(vec![4, 2], frac(1, 2), 1).is_err());
    assert!(c(vec![2, 2], frac(1, 2), 1).is_err());
    assert!(c(vec![], frac(1, 2), 1).is_err());
    assert!(c(vec![2], frac(1, 2), 0).is_err());
    assert!(c(vec![2], int(1), 1).is_err());
    assert!(c(vec![2], frac(1, 2), 1).is_ok());
    let json = serde_json::to_value(c(vec![2, 4], frac(1, 2), 3).unwrap()).unwrap();
    assert_eq!(json["N_list"], serde_json::json!([2, 4]));
    assert_eq!(json["mu"], "1/2");
    assert_eq!(json["sampler"], "grid");
    let back: ExperimentConfig = serde_json::from_value(json).unwrap();
    assert_eq!(back, c(vec![2, 4], frac(1, 2), 3).unwrap());
}

#[test]
fn degenerate_curve_is_rejected() {
    let line = PolyCurve::new(vec![vec![int(0), int(1)], vec![int(1), int(2)]], int(0), int(1)).unwrap();
    let c = ExperimentConfig::new(line, vec![4], frac(1, 2), 3, 0, int(1), Sampler::Grid).unwrap();
    let e = equidistribution_run(&c).unwrap_err();
    assert_eq!(e, Error::DegenerateCurve);
    assert!(e.to_string().contains("not contained in a proper affine subspace"));
}

#[test]
fn single_sample_matches_the_criterion() {
    let c = config(1, vec![2, 3, 5, 8, 13, 21], Sampler::Grid);
    let rep = equidistribution_run(&c).unwrap();
    let xi = ApproxTarget::new(c.curve.evaluate(&frac(3, 2)).unwrap()).unwrap();
    for rec in &rep.records {
        let SampleOutcome::Ok(r) = rec else { panic!("aborted") };
        assert_eq!(r.s, frac(3, 2));
        assert_eq!(r.in_k_both, lattice_criterion(&xi, r.n, &c.mu).unwrap());
    }
}

#[test]
fn run_invariants() {
    let c = config(12, vec![4, 16, 64], Sampler::LowDiscrepancy);
    let rep = equidistribution_run(&c).unwrap();
    assert_eq!(rep.records.len(), 36);
    let ns: Vec<u64> = rep.records.iter().map(SampleOutcome::n).collect();
    assert_eq!(&ns[..6], &[4, 16, 64, 4, 16, 64]);
    for rec in &rep.records {
        let SampleOutcome::Ok(r) = rec else { panic!("aborted") };
        assert_eq!(r.box_count % 2, 0);
        assert!(!r.in_k_both || r.in_k_first);
        assert!(r.shortest_len > 0.0);
        let xi = ApproxTarget::new(c.curve.evaluate(&r.s).unwrap()).unwrap();
        assert_eq!(r.in_k_both, lattice_criterion(&xi, r.n, &c.mu).unwrap());
    }
    for row in &rep.rows {
        assert!(0.0 <= row.k_fraction_both && row.k_fraction_both <= row.k_fraction_first && row.k_fraction_first <= 1.0);
        assert_eq!(row.samples_ok, 12);
    }
    assert_eq!(Report::aggregate(&c.n_list, &rep.records), rep.rows);
}

#[test]
fn csv_shape_and_determinism() {
    let c = config(6, vec![8, 32], Sampler::SeededUniform);
    let one = with_workers(1, || equidistribution_run(&c)).unwrap().unwrap().to_csv();
    let three = with_workers(3, || equidistribution_run(&c)).unwrap().unwrap().to_csv();
    assert_eq!(one, three);
    let lines: Vec<&str> = one.lines().collect();
    assert!(lines[0].starts_with("# config: {"));
    let echoed: ExperimentConfig = serde_json::from_str(lines[0].trim_start_matches("# config: ")).unwrap();
    assert_eq!(echoed, c);
    assert!(lines[1].starts_with("# version: "));
    assert_eq!(lines[2], REPORT_COLUMNS);
    assert_eq!(lines.len(), 5);
    let fields: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(fields[0], "8");
    assert!(fields[1].contains('e'));
    assert_eq!(fields[5], "6");
}

#[test]
fn budget_hits_become_aborted_records() {
    let c = config(3, vec![1, 64], Sampler::Grid).with_budget(3);
    let rep = equidistribution_run(&c).unwrap();
    assert!(rep.records.iter().any(|r| matches!(r, SampleOutcome::Aborted { reason, .. } if reason.contains("budget"))));
    let total: usize = rep.rows.iter().map(|r| r.samples_ok + r.samples_aborted).sum();
    assert_eq!(total, 6);
}

#[test]
fn siegel_baseline_at_time_zero() {
    let c = config(5, vec![1], Sampler::Grid);
    let rep = siegel_calibration(&c).unwrap();
    let b = SupBox::new(c.box_radius.clone()).unwrap();
    let counts: Vec<f64> = c
        .sample_points()
        .iter()
        .map(|s| {
            let l = UnimodularLattice::from_group_element(&u(&c.curve.evaluate(s).unwrap()));
            points_in_box_direct(&l, &b, 1_000_000).unwrap().len() as f64
        })
        .collect();
    assert_eq!(rep.rows[0].mean_box_count, counts.iter().sum::<f64>() / 5.0);
    assert_eq!(rep.volume, int(27));
    assert!(rep.to_csv().contains("# volume: 27/1"));
}

#[test]
fn integral_curve_misses_a_small_box() {
    let curve = PolyCurve::new(vec![vec![int(0), int(4)], vec![int(0), int(0), int(8)]], int(1), int(2)).unwrap();
    let c = ExperimentConfig::new(curve, vec![1], frac(1, 2), 1, 0, frac(2, 5), Sampler::Grid).unwrap();
    assert_eq!(siegel_calibration(&c).unwrap().rows[0].mean_box_count, 0.0);
}

#[test]
fn siegel_volume_precondition() {
    let c = ExperimentConfig::new(moment(2), vec![1], frac(1, 2), 1, 0, int(100), Sampler::Grid).unwrap();
    assert!(matches!(siegel_calibration(&c), Err(Error::Domain(_))));
}

#[test]
fn scan_examples() {
    let curve = moment(2);
    let grid: Vec<Rational> = (0..6).map(|i| int(1) + frac(i, 5)).collect();
    let empty = dirichlet_scan_run(&curve, &frac(9, 10), &[], &grid).unwrap();
    assert!(empty.rows.iter().all(|r| r.insoluble.is_empty()));
    assert_eq!(empty.fraction_with_insoluble, 0.0);
    let ns: Vec<u64> = (2..=12).collect();
    let hi = dirichlet_scan_run(&curve, &frac(9, 10), &ns, &grid).unwrap();
    let lo = dirichlet_scan_run(&curve, &frac(1, 10), &ns, &grid).unwrap();
    for (h, l) in hi.rows.iter().zip(&lo.rows) {
        assert!(h.insoluble.iter().all(|n| l.insoluble.contains(n)));
        let xi = ApproxTarget::new(curve.evaluate(&h.s).unwrap()).unwrap();
        let oracle: Vec<u64> = ns
            .iter()
            .copied()
            .filter(|&n| {
                !check_a(&xi, n, &frac(9, 10)).unwrap().soluble && !check_b(&xi, n, &frac(9, 10)).unwrap().soluble
            })
            .collect();
        assert_eq!(h.insoluble, oracle);
    }
    assert_eq!(hi.histogram.iter().map(|b| b.points).sum::<usize>(), 6);
    assert!(dirichlet_scan_run(&curve, &int(1), &ns, &grid).is_err());
}

#[test]
fn shadowing_of_the_moment_curve() {
    let curve = moment(2);
    for n in [10u64, 100, 1000] {
        let r = shadowing_check(&curve, &int(1), n, &frac(3, 4), SHADOW_GRID).unwrap();
        let ratio = r.deviation / (n as f64).powf(-1.5);
        assert!((ratio - 1.0).abs() < 1e-9, "{n}: {ratio}");
        assert!((r.predicted_order / (n as f64).powf(-1.5) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn shadowing_edge_cases() {
    let line = PolyCurve::new(vec![vec![int(0), int(1)], vec![int(0)]], int(0), int(2)).unwrap();
    for n in [3u64, 30] {
        assert_eq!(shadowing_check(&line, &int(1), n, &frac(2, 3), 8).unwrap().deviation, 0.0);
    }
    let flat = PolyCurve::new(vec![vec![int(0), int(0), int(1)]], int(-1), int(1)).unwrap();
    assert!(matches!(shadowing_check(&flat, &int(0), 10, &frac(3, 4), 8), Err(Error::ZeroDerivative(_))));
    assert!(shadowing_check(&moment(2), &int(1), 10, &frac(1, 2), 8).is_err());
    assert!(shadowing_check(&moment(2), &int(1), 10, &int(1), 8).is_err());
    let cubic = moment(3);
    let devs: Vec<f64> =
        [4u64, 8, 16, 32].iter().map(|&n| shadowing_check(&cubic, &frac(3, 2), n, &frac(3, 5), 16).unwrap().deviation).collect();
    assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
}

#[test]
fn n_lists() {
    assert_eq!(parse_n_list("16,32,...,2048").unwrap(), vec![16, 32, 64, 128, 256, 512, 1024, 2048]);
    assert_eq!(parse_n_list("10, 20, ..., 50").unwrap(), vec![10, 20, 30, 40, 50]);
    assert_eq!(parse_n_list("2..6").unwrap(), vec![2, 3, 4, 5, 6]);
    assert_eq!(parse_n_list("1,5,7").unwrap(), vec![1, 5, 7]);
    assert_eq!(parse_n_list("3,4,9,...,19").unwrap(), vec![3, 4, 9, 14, 19]);
    assert_eq!(parse_n_list(" ").unwrap(), Vec::<u64>::new());
    for bad in ["5,3", "1,2,...,", "...,4", "2,x", "10,20,...,55", "6..2", "1,...,4"] {
        assert!(parse_n_list(bad).is_err(), "{bad}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn records_agree_with_brute_force(num in 0i64..64, n in 2u64..16, mu in prop::sample::select(vec![frac(1, 4), frac(1, 2), frac(9, 10)])) {
        let s = int(1) + frac(num, 64);
        let c = ExperimentConfig::new(moment(2), vec![n], mu.clone(), 1, 0, int(1), Sampler::Grid).unwrap();
        let rec = sample_one(&c, &s, n).unwrap();
        let xi = ApproxTarget::new(c.curve.evaluate(&s).unwrap()).unwrap();
        let insoluble = !check_a(&xi, n, &mu).unwrap().soluble && !check_b(&xi, n, &mu).unwrap().soluble;
        prop_assert_eq!(rec.in_k_both, insoluble);
        prop_assert_eq!(rec.in_k_first, !check_a(&xi, n, &mu).unwrap().soluble);
    }
}
