//! FDR estimation from negative controls and the step-up threshold.
//!
//! For a threshold `t` let `R(t)` count investigation statistics and
//! `V_nc(t)` negative controls at or below `t`. The estimate is
//!
//! ```text
//! FDR(t) = pi(lambda) * n (V_nc(t) + 2) / (m + 1) / max(R(t), 1)
//! ```
//!
//! with the null-proportion estimate
//! `pi(lambda) = (n + 1 - R(lambda)) / n * (m + 1) / (m - V_nc(lambda))`
//! for `lambda < 1` and `pi(1) = 1`. The tuning parameter `lambda` is read on
//! the negative-control rank scale: `t <= lambda` means `F(t) <= lambda`
//! where `F` is the empirical null CDF, so every result is invariant under
//! increasing transformations of the statistics.

use std::cmp::Ordering;

use serde::Serialize;

use crate::curve::{Continuity, StepCurve};
use crate::data::StatisticSet;
use crate::error::{Error, Result};
use crate::exact::Level;
use crate::procedures::bh;
use crate::ranc::{modified_ranc_pvalues, EmpiricalNull};

/// Right-continuous counting processes `R(t)` and `V_nc(t)`.
pub fn counting_processes(set: &StatisticSet) -> (StepCurve, StepCurve) {
    let count_curve = |vals: Vec<f64>| {
        let mut v = vals;
        v.sort_by(f64::total_cmp);
        let mut breaks = Vec::new();
        let mut values = vec![0.0];
        for (i, &x) in v.iter().enumerate() {
            if breaks.last() == Some(&x) {
                *values.last_mut().unwrap() = (i + 1) as f64;
            } else {
                breaks.push(x);
                values.push((i + 1) as f64);
            }
        }
        StepCurve::new(breaks, values, Continuity::Right)
    };
    (count_curve(set.test_values()), count_curve(set.nc_values()))
}

/// Null-proportion estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiHat {
    pub lambda: f64,
    /// `+inf` when every negative control lies at or below `lambda`. On the
    /// rank scale this cannot happen for `lambda < 1`, because the largest
    /// control has empirical CDF value 1.
    pub value: f64,
    pub infinite: bool,
    pub r_lambda: usize,
    pub v_nc_lambda: usize,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda must lie in (0, 1], got {lambda}"
        )))
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "q must lie in (0, 1), got {q}"
        )))
    }
}

/// Whether `(1 + count) / (m + 1) <= lambda`.
fn rank_le(count: usize, m: usize, lambda: &Level) -> bool {
    lambda.le_scaled(1.0, 1 + count as i128, m as i128 + 1)
}

pub fn pi_hat(set: &StatisticSet, lambda: f64) -> Result<PiHat> {
    check_lambda(lambda)?;
    let null = EmpiricalNull::from_sorted(set.sorted_nc());
    Ok(pi_hat_with(&set.test_values(), &null, lambda))
}

fn pi_hat_with(test: &[f64], null: &EmpiricalNull, lambda: f64) -> PiHat {
    let (n, m) = (test.len(), null.m());
    if lambda == 1.0 {
        return PiHat {
            lambda,
            value: 1.0,
            infinite: false,
            r_lambda: n,
            v_nc_lambda: m,
        };
    }
    let lvl = Level::new(lambda);
    let r = test
        .iter()
        .filter(|&&t| rank_le(null.count_le(t), m, &lvl))
        .count();
    let v = null
        .sorted()
        .iter()
        .filter(|&&t| rank_le(null.count_le(t), m, &lvl))
        .count();
    let infinite = v == m;
    let value = if infinite {
        f64::INFINITY
    } else {
        (n + 1 - r) as f64 / n as f64 * (m + 1) as f64 / (m - v) as f64
    };
    PiHat {
        lambda,
        value,
        infinite,
        r_lambda: r,
        v_nc_lambda: v,
    }
}

/// FDR estimate as an exact ratio `num / den` of integers.
fn fdr_ratio(pi: &PiHat, n: usize, m: usize, r: usize, v: usize) -> (u128, u128) {
    let r1 = r.max(1) as u128;
    if pi.lambda == 1.0 {
        ((n * (v + 2)) as u128, (m as u128 + 1) * r1)
    } else {
        // n and (m + 1) cancel between pi(lambda) and the estimate itself.
        (
            (n + 1 - pi.r_lambda) as u128 * (v + 2) as u128,
            (m - pi.v_nc_lambda) as u128 * r1,
        )
    }
}

/// `FDR(t)` on the internal scale; `+inf` if the null-proportion estimate is.
pub fn fdr_hat(set: &StatisticSet, lambda: f64, t: f64) -> Result<f64> {
    let pi = pi_hat(set, lambda)?;
    if pi.infinite {
        return Ok(f64::INFINITY);
    }
    let (n, m) = (set.n(), set.m());
    let r = set.test_values().iter().filter(|&&x| x <= t).count();
    let v = set.nc_values().iter().filter(|&&x| x <= t).count();
    let (num, den) = fdr_ratio(&pi, n, m, r, v);
    Ok(num as f64 / den as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdrStepupResult {
    /// Largest candidate threshold with `FDR(t) <= q`; `None` when only the
    /// empty rejection set qualifies.
    pub tau: Option<f64>,
    /// Rejected investigation positions, in input order.
    pub rejected: Vec<usize>,
    pub rejected_ids: Vec<String>,
    pub pi_hat: PiHat,
    pub lambda: f64,
    pub q: f64,
    /// `FDR(tau)`, which may exceed `q` only through discreteness of `tau`.
    pub fdr_at_tau: Option<f64>,
    /// The estimated FDR curve over every observed statistic, absent when
    /// the null-proportion estimate is infinite.
    pub fdr_curve: Option<StepCurve>,
    pub diagnostics: Vec<String>,
}

/// `tau_q = sup{t : F(t) <= lambda, FDR(t) <= q}` over the observed
/// statistics, rejecting every investigation statistic at or below it.
pub fn stepup_threshold(set: &StatisticSet, lambda: f64, q: f64) -> Result<FdrStepupResult> {
    check_lambda(lambda)?;
    check_q(q)?;
    let test = set.test_values();
    let null = EmpiricalNull::from_sorted(set.sorted_nc());
    let (n, m) = (test.len(), null.m());
    let pi = pi_hat_with(&test, &null, lambda);
    let mut result = FdrStepupResult {
        tau: None,
        rejected: Vec::new(),
        rejected_ids: Vec::new(),
        pi_hat: pi,
        lambda,
        q,
        fdr_at_tau: None,
        fdr_curve: None,
        diagnostics: Vec::new(),
    };
    if pi.infinite {
        result.diagnostics.push(
            "null-proportion estimate is infinite (every negative control lies below lambda); \
             nothing is rejected"
                .into(),
        );
        return Ok(result);
    }

    let mut sorted_test = test.clone();
    sorted_test.sort_by(f64::total_cmp);
    let mut candidates: Vec<f64> = sorted_test.iter().chain(null.sorted()).copied().collect();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let lq = Level::new(q);
    let lam = Level::new(lambda);
    let passes = |r: usize, v: usize| {
        let (num, den) = fdr_ratio(&pi, n, m, r, v);
        lq.cmp_scaled(1.0, num as i128, den as i128) != Ordering::Greater
    };

    let (num0, den0) = fdr_ratio(&pi, n, m, 0, 0);
    let mut curve_values = vec![num0 as f64 / den0 as f64];
    let mut best: Option<(f64, f64)> = None;
    let (mut r, mut v) = (0usize, 0usize);
    for &t in &candidates {
        r += sorted_test[r..].partition_point(|&x| x <= t);
        v += null.sorted()[v..].partition_point(|&x| x <= t);
        let (num, den) = fdr_ratio(&pi, n, m, r, v);
        let value = num as f64 / den as f64;
        curve_values.push(value);
        if rank_le(v, m, &lam) && passes(r, v) {
            best = Some((t, value));
        }
    }
    result.fdr_curve = Some(StepCurve::new(candidates, curve_values, Continuity::Right));
    if let Some((tau, value)) = best {
        result.tau = Some(tau);
        result.fdr_at_tau = Some(value);
        result.rejected = (0..n).filter(|&i| test[i] <= tau).collect();
        result.rejected_ids = result
            .rejected
            .iter()
            .map(|&i| set.investigation()[i].id.clone())
            .collect();
    } else if !passes(0, 0) {
        result
            .diagnostics
            .push("no threshold attains the target level".into());
    }
    Ok(result)
}

/// Whether the step-up rule with `lambda = 1` and BH applied to modified
/// RANC p-values reject the same hypotheses.
pub fn bh_equivalence_check(set: &StatisticSet, q: f64) -> Result<bool> {
    let step = stepup_threshold(set, 1.0, q)?;
    let mut via_bh = bh(&modified_ranc_pvalues(set), q)?.rejected;
    via_bh.sort_unstable();
    Ok(step.rejected == via_bh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counting_examples() {
        let set = StatisticSet::from_values(&[0.1, 0.9], &[0.5]).unwrap();
        let (r, v) = counting_processes(&set);
        assert_eq!((r.eval(0.5), v.eval(0.5)), (1.0, 1.0));
        assert_eq!((r.eval(-1.0), v.eval(-1.0)), (0.0, 0.0));
        assert_eq!((r.eval(5.0), v.eval(5.0)), (2.0, 1.0));
    }

    #[test]
    fn pi_hat_examples() {
        let set =
            StatisticSet::from_values(&[0.1, 0.2, 0.8, 0.9], &[0.15, 0.6, 0.7, 0.95]).unwrap();
        assert_eq!(pi_hat(&set, 1.0).unwrap().value, 1.0);
        // F(0.2) = 2/5 <= 0.4: R = 2, V_nc = 1.
        let p = pi_hat(&set, 0.4).unwrap();
        assert_eq!((p.r_lambda, p.v_nc_lambda), (2, 1));
        assert!((p.value - 1.25).abs() < 1e-15);

        // The largest control has rank 1, so V_nc(lambda) < m whenever lambda < 1.
        let all_low = StatisticSet::from_values(&[0.1, 0.2], &[0.5, 0.6]).unwrap();
        let p = pi_hat(&all_low, 0.999).unwrap();
        assert!(!p.infinite);
        assert_eq!((p.r_lambda, p.v_nc_lambda), (2, 1));
        assert!((p.value - 1.5).abs() < 1e-15);
        assert!(pi_hat(&all_low, 0.0).is_err());
    }

    #[test]
    fn fdr_hat_examples() {
        let set =
            StatisticSet::from_values(&[0.1, 0.2, 0.8, 0.9], &[0.15, 0.6, 0.7, 0.95]).unwrap();
        assert!((fdr_hat(&set, 1.0, 0.2).unwrap() - 1.2).abs() < 1e-15);
        assert!((fdr_hat(&set, 1.0, 0.0).unwrap() - 1.6).abs() < 1e-15);
        assert!((fdr_hat(&set, 1.0, 1.0).unwrap() - 1.2).abs() < 1e-15);
    }

    #[test]
    fn stepup_example() {
        let set = StatisticSet::from_values(&[0.1, 0.9], &[0.5, 0.6, 0.7, 0.8]).unwrap();
        let r = stepup_threshold(&set, 1.0, 0.9).unwrap();
        assert_eq!(r.tau, Some(0.1));
        assert_eq!(r.rejected, vec![0]);
        assert_eq!(r.fdr_curve.as_ref().unwrap().eval(0.3), 0.8);
        assert!((r.fdr_curve.unwrap().eval(0.5) - 1.2).abs() < 1e-15);
        assert!(bh_equivalence_check(&set, 0.9).unwrap());
    }

    #[test]
    fn saturation() {
        let set = StatisticSet::from_values(
            &[-3.0, -2.0, -1.0],
            (0..50).map(|i| i as f64).collect::<Vec<_>>().as_slice(),
        )
        .unwrap();
        assert_eq!(
            stepup_threshold(&set, 1.0, 0.2).unwrap().rejected,
            vec![0, 1, 2]
        );
        let none = StatisticSet::from_values(&[10.0], &[0.0, 1.0]).unwrap();
        let r = stepup_threshold(&none, 1.0, 0.05).unwrap();
        assert!(r.rejected.is_empty() && r.tau.is_none());
        assert!(bh_equivalence_check(&none, 0.05).unwrap());
    }
}
