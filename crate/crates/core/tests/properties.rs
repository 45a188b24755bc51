//! Property tests for the structural invariants of each module.

use nctest::curve::Continuity;
use nctest::fdr::{bh_equivalence_check, counting_processes, stepup_threshold};
use nctest::local_fdr::{cdf_threshold, cdf_threshold_orderstat, localfdr_curve};
use nctest::par::Execution;
use nctest::procedures::{
    bh, bonferroni, bonferroni_global, hochberg, holm, lehmann_romano, simes_global,
    RejectionResult,
};
use nctest::simulation::{run_table1_cell, SimConfig};
use nctest::{
    empirical_null_cdf, load_csv, modified_ranc_pvalues, ranc_pvalues, write_csv, CsvSchema,
    Orientation, PValueVector, Statistic, StatisticSet,
};
use proptest::prelude::*;

/// Distinct values on a fine integer grid, so strictly increasing maps
/// cannot merge neighbours through rounding.
fn distinct_values(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(-5000i32..5000, 1..=max)
        .prop_map(|s| s.into_iter().map(|k| k as f64 / 1000.0).collect::<Vec<_>>())
        .prop_shuffle()
}

fn instance(max_n: usize, max_m: usize) -> impl Strategy<Value = StatisticSet> {
    prop::collection::btree_set(-5000i32..5000, 2..=max_n + max_m)
        .prop_flat_map(move |s| {
            let total = s.len();
            let vals: Vec<f64> = s.into_iter().map(|k| k as f64 / 1000.0).collect();
            (Just(vals).prop_shuffle(), 1..total.min(max_n + 1).max(2))
        })
        .prop_map(|(vals, n)| {
            let n = n.min(vals.len() - 1);
            StatisticSet::from_values(&vals[..n], &vals[n..]).expect("both roles nonempty")
        })
}

/// Instances that may contain ties within and across roles.
fn tied_instance(max_n: usize, max_m: usize) -> impl Strategy<Value = StatisticSet> {
    (
        prop::collection::vec(-8i32..8, 1..=max_n),
        prop::collection::vec(-8i32..8, 1..=max_m),
    )
        .prop_map(|(t, c)| {
            let t: Vec<f64> = t.into_iter().map(f64::from).collect();
            let c: Vec<f64> = c.into_iter().map(f64::from).collect();
            StatisticSet::from_values(&t, &c).expect("nonempty")
        })
}

fn pvalues(max: usize) -> impl Strategy<Value = PValueVector> {
    prop::collection::vec(1u32..=1000, 1..=max)
        .prop_map(|v| PValueVector::external(v.into_iter().map(|k| k as f64 / 1000.0).collect()))
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

fn is_downward_closed(p: &PValueVector, r: &RejectionResult) -> bool {
    let max_rejected = r
        .rejected
        .iter()
        .map(|&i| p.values[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let below = (0..p.len()).filter(|&i| p.values[i] < max_rejected).count();
    let rejected_below = r
        .rejected
        .iter()
        .filter(|&&i| p.values[i] < max_rejected)
        .count();
    below == rejected_below
}

fn map_set(set: &StatisticSet, g: impl Fn(f64) -> f64) -> StatisticSet {
    let t: Vec<f64> = set.test_values().into_iter().map(&g).collect();
    let c: Vec<f64> = set.nc_values().into_iter().map(&g).collect();
    StatisticSet::from_values(&t, &c).expect("nonempty")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn csv_round_trip(test in distinct_values(20), nc in distinct_values(20), large in any::<bool>()) {
        let orientation = if large { Orientation::LargeIsSignificant } else { Orientation::SmallIsSignificant };
        let inv: Vec<Statistic> = test.iter().enumerate().map(|(i, &v)| Statistic::new(format!("t{i}"), v)).collect();
        let ctl: Vec<Statistic> = nc.iter().enumerate().map(|(j, &v)| Statistic::new(format!("c{j}"), v)).collect();
        let set = StatisticSet::new(inv, ctl, orientation).unwrap();
        let mut buf = Vec::new();
        write_csv(&set, &mut buf).unwrap();
        let back = load_csv(buf.as_slice(), &CsvSchema::with_orientation(orientation)).unwrap();
        prop_assert_eq!(back.test_ids(), set.test_ids());
        prop_assert_eq!(back.test_values(), set.test_values());
        prop_assert_eq!(back.nc_values(), set.nc_values());
        let json = set.to_json().unwrap();
        prop_assert_eq!(StatisticSet::from_json(&json).unwrap(), set);
    }

    #[test]
    fn ranc_grid_and_monotone_invariance(set in tied_instance(30, 30)) {
        let p = ranc_pvalues(&set);
        let m = set.m() as f64;
        for &v in &p.values {
            let k = v * (m + 1.0);
            prop_assert!((k - k.round()).abs() < 1e-9 && k >= 1.0 - 1e-9 && k <= m + 1.0 + 1e-9);
        }
        for g in [|x: f64| 2.0 * x, |x: f64| x.exp(), |x: f64| x * x * x + x] {
            prop_assert_eq!(&ranc_pvalues(&map_set(&set, g)).values, &p.values);
        }
    }

    #[test]
    fn modified_ranc_offset(set in tied_instance(30, 30)) {
        let p = ranc_pvalues(&set);
        let pm = modified_ranc_pvalues(&set);
        let (num, den) = p.grid().unwrap();
        let (num_m, den_m) = pm.grid().unwrap();
        prop_assert_eq!(den, den_m);
        for (&a, &b) in num.iter().zip(num_m) {
            if b < den {
                prop_assert_eq!(b, a + 1);
            } else {
                prop_assert_eq!(b, den);
                prop_assert!(a + 1 >= den);
            }
        }
    }

    #[test]
    fn empirical_cdf_is_monotone(nc in distinct_values(30), a in -6.0f64..6.0, b in -6.0f64..6.0) {
        let mut s = nc.clone();
        s.sort_by(f64::total_cmp);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (fl, fh) = (empirical_null_cdf(&s, lo), empirical_null_cdf(&s, hi));
        prop_assert!(fl <= fh && fl > 0.0 && fh <= 1.0);
    }

    #[test]
    fn procedures_reject_prefixes(p in pvalues(40), a in 1u32..500, b in 1u32..500, gamma in 1u32..10) {
        let (a1, a2) = (a.min(b) as f64 / 1000.0, a.max(b) as f64 / 1000.0);
        let g = gamma as f64 / 10.0;
        let runs: [fn(&PValueVector, f64, f64) -> RejectionResult; 5] = [
            |p, a, _| bonferroni(p, a).unwrap(),
            |p, a, _| holm(p, a).unwrap(),
            |p, a, _| hochberg(p, a).unwrap(),
            |p, a, g| lehmann_romano(p, a, g).unwrap(),
            |p, a, _| bh(p, a).unwrap(),
        ];
        for run in runs {
            let (r1, r2) = (run(&p, a1, g), run(&p, a2, g));
            prop_assert!(is_downward_closed(&p, &r1) && is_downward_closed(&p, &r2));
            let s2 = sorted(r2.rejected.clone());
            prop_assert!(r1.rejected.iter().all(|i| s2.binary_search(i).is_ok()));
        }
        let counts = |a| [bonferroni(&p, a).unwrap().count(), holm(&p, a).unwrap().count(), hochberg(&p, a).unwrap().count()];
        let c = counts(a2);
        prop_assert!(c[0] <= c[1] && c[1] <= c[2]);
        prop_assert!(hochberg(&p, a2).unwrap().count() <= bh(&p, a2).unwrap().count());
        if bonferroni_global(&p, a2).unwrap() {
            prop_assert!(simes_global(&p, a2).unwrap());
        }
    }

    #[test]
    fn stepup_equals_bh_on_modified_ranc(set in instance(40, 40), q in prop::sample::select(vec![0.05, 0.1, 0.2, 0.3, 0.5])) {
        prop_assert!(bh_equivalence_check(&set, q).unwrap());
    }

    #[test]
    fn stepup_invariants(set in tied_instance(30, 30), lam in 1u32..=10, q in 1u32..=9) {
        let (lambda, q) = (lam as f64 / 10.0, q as f64 / 10.0);
        let r = stepup_threshold(&set, lambda, q).unwrap();
        let test = set.test_values();
        match r.tau {
            Some(tau) => {
                let expect: Vec<usize> = (0..set.n()).filter(|&i| test[i] <= tau).collect();
                prop_assert_eq!(&r.rejected, &expect);
                let f = empirical_null_cdf(&set.sorted_nc(), tau);
                prop_assert!(f <= lambda + 1e-12);
            }
            None => prop_assert!(r.rejected.is_empty()),
        }
        if let Some(curve) = &r.fdr_curve {
            prop_assert!(curve.breakpoints.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(curve.values.iter().all(|v| v.is_finite()));
            let observed: Vec<f64> = test.iter().chain(&set.nc_values()).copied().collect();
            prop_assert!(curve.jumps().iter().all(|j| observed.contains(j)));
        }
        let (rc, vc) = counting_processes(&set);
        prop_assert!(rc.is_nondecreasing() && vc.is_nondecreasing());
        prop_assert_eq!(rc.eval(f64::INFINITY), set.n() as f64);
    }

    #[test]
    fn threshold_routines_agree_and_are_rank_invariant(set in tied_instance(30, 30), lam in 0u32..=30) {
        let lambda = lam as f64 / 10.0;
        let a = cdf_threshold(&set, lambda).unwrap();
        let b = cdf_threshold_orderstat(&set, lambda).unwrap();
        prop_assert_eq!(a.tau_hat, b.tau_hat);
        prop_assert_eq!(&a.rejected, &b.rejected);
        if let Some(t) = b.tau_hat {
            prop_assert!(set.test_values().contains(&t));
        }
        let mapped = map_set(&set, |x| x.exp());
        prop_assert_eq!(&cdf_threshold(&mapped, lambda).unwrap().rejected, &a.rejected);
        prop_assert_eq!(&cdf_threshold_orderstat(&mapped, lambda).unwrap().rejected, &a.rejected);
    }

    /// The curve inverts `q -> tau(q)`: away from its switch points, a
    /// hypothesis is rejected at level `q` exactly when its curve value is
    /// below `q`.
    #[test]
    fn localfdr_curve_matches_level_grid(set in instance(30, 30), pi in 1u32..=10) {
        let pi = pi as f64 / 10.0;
        let c = localfdr_curve(&set, pi).unwrap().curve;
        prop_assert!(c.is_nondecreasing());
        prop_assert_eq!(c.continuity, Continuity::Left);
        let test = set.test_values();
        prop_assert!(c.jumps().iter().all(|j| test.contains(j)));
        for k in 1..200 {
            let q = pi * k as f64 / 200.0;
            if c.values.iter().any(|&v| (v - q).abs() < 1e-9) {
                continue;
            }
            let rejected = sorted(cdf_threshold(&set, q / pi).unwrap().rejected);
            let by_curve: Vec<usize> = (0..set.n()).filter(|&i| c.eval(test[i]) < q).collect();
            prop_assert_eq!(rejected, by_curve, "q = {}", q);
        }
    }
}

#[test]
fn simulation_is_thread_count_invariant() {
    let cfg = SimConfig {
        reps: 200,
        seed: 11,
        ..SimConfig::default()
    };
    let a = run_table1_cell("x", &cfg, Execution::Sequential).unwrap();
    let b = run_table1_cell("x", &cfg, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    for s in &a.methods {
        assert!((0.0..=1.0).contains(&s.fdp_mean) && (0.0..=1.0).contains(&s.tpr_mean));
        assert!(s.fdp_sd >= 0.0 && s.tpr_sd >= 0.0);
    }
}
