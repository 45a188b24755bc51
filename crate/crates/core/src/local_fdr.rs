//! CDF-based local-FDR thresholding.
//!
//! With `F0` the negative-control ECDF and `Fn` the ECDF of the
//! investigation statistics, the threshold for local-FDR level `q` under a
//! known null proportion `pi` minimises `F0(t) - lambda Fn(t)` with
//! `lambda = q / pi`. Because only ranks enter, the threshold is invariant
//! under increasing transformations of the statistics, unlike plug-in
//! density ratios.

use std::cmp::Ordering;

use serde::Serialize;

use crate::curve::{Continuity, StepCurve};
use crate::data::StatisticSet;
use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::exact::Level;
use crate::par::mean_sd;
use crate::ranc::ranc_pvalues;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectivePoint {
    /// Candidate threshold; `-inf` marks the empty-rejection boundary.
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalFdrResult {
    /// Minimising threshold; `None` when the empty-rejection boundary wins.
    pub tau_hat: Option<f64>,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
    pub objective: Vec<ObjectivePoint>,
    pub argmin_index: usize,
    /// Rejected investigation positions, in input order.
    pub rejected: Vec<usize>,
    pub rejected_ids: Vec<String>,
}

impl LocalFdrResult {
    pub fn with_level(mut self, q: f64, pi: f64) -> Self {
        self.q = Some(q);
        self.pi = Some(pi);
        self
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda must be nonnegative, got {lambda}"
        )))
    }
}

/// Compare `a1/m - lambda i1/n` with `a2/m - lambda i2/n` exactly.
fn cmp_objective(
    lambda: &Level,
    (a1, i1): (usize, usize),
    (a2, i2): (usize, usize),
    n: usize,
    m: usize,
) -> Ordering {
    // (a1 - a2) n  vs  lambda (i1 - i2) m
    let lhs = (a1 as i128 - a2 as i128) * n as i128;
    let rhs = (i1 as i128 - i2 as i128) * m as i128;
    lambda.cmp_scaled(1.0, lhs, rhs)
}

fn finish(
    set: &StatisticSet,
    lambda: f64,
    objective: Vec<ObjectivePoint>,
    argmin_index: usize,
    tau: Option<f64>,
) -> LocalFdrResult {
    let rejected: Vec<usize> = match tau {
        Some(t) => (0..set.n())
            .filter(|&i| set.investigation()[i].value <= t)
            .collect(),
        None => Vec::new(),
    };
    LocalFdrResult {
        tau_hat: tau,
        lambda,
        q: None,
        pi: None,
        objective,
        argmin_index,
        rejected_ids: rejected
            .iter()
            .map(|&i| set.investigation()[i].id.clone())
            .collect(),
        rejected,
    }
}

/// `argmin_t F0(t) - lambda Fn(t)` over every observed statistic and the
/// empty-rejection boundary; ties go to the smallest `t`.
pub fn cdf_threshold(set: &StatisticSet, lambda: f64) -> Result<LocalFdrResult> {
    check_lambda(lambda)?;
    let lvl = Level::new(lambda);
    let (n, m) = (set.n(), set.m());
    let mut test = set.test_values();
    test.sort_by(f64::total_cmp);
    let nc = set.sorted_nc();
    let mut cands: Vec<f64> = test.iter().chain(&nc).copied().collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();

    let mut objective = Vec::with_capacity(cands.len() + 1);
    objective.push(ObjectivePoint {
        t: f64::NEG_INFINITY,
        value: 0.0,
    });
    let mut best = (0usize, 0usize);
    let mut best_index = 0;
    let (mut i, mut a) = (0usize, 0usize);
    for (k, &t) in cands.iter().enumerate() {
        i += test[i..].partition_point(|&x| x <= t);
        a += nc[a..].partition_point(|&x| x <= t);
        objective.push(ObjectivePoint {
            t,
            value: a as f64 / m as f64 - lambda * i as f64 / n as f64,
        });
        if cmp_objective(&lvl, (a, i), best, n, m) == Ordering::Less {
            best = (a, i);
            best_index = k + 1;
        }
    }
    let tau = (best_index > 0).then(|| cands[best_index - 1]);
    Ok(finish(set, lambda, objective, best_index, tau))
}

/// Order-statistic form: `i* = argmin_i (m+1)/m p_(i) - lambda i / n` over
/// `i = 0..n` with `p_(0) = 1/(m+1)`, and `tau = T_(i*)`.
pub fn cdf_threshold_orderstat(set: &StatisticSet, lambda: f64) -> Result<LocalFdrResult> {
    check_lambda(lambda)?;
    let lvl = Level::new(lambda);
    let (n, m) = (set.n(), set.m());
    let p = ranc_pvalues(set);
    let (numerators, _) = p.grid().expect("rank p-values carry their grid");
    let values = set.test_values();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]));

    // (m+1)/m * p_(i) = k_(i) / m, so k_(i) - 1 plays the role of the
    // control count in the comparison.
    let mut objective = Vec::with_capacity(n + 1);
    objective.push(ObjectivePoint {
        t: f64::NEG_INFINITY,
        value: 1.0 / m as f64,
    });
    let mut best = (0usize, 0usize);
    let mut best_index = 0;
    for (r, &idx) in order.iter().enumerate() {
        let k = numerators[idx] as usize;
        objective.push(ObjectivePoint {
            t: values[idx],
            value: k as f64 / m as f64 - lambda * (r + 1) as f64 / n as f64,
        });
        if cmp_objective(&lvl, (k - 1, r + 1), best, n, m) == Ordering::Less {
            best = (k - 1, r + 1);
            best_index = r + 1;
        }
    }
    let tau = (best_index > 0).then(|| values[order[best_index - 1]]);
    Ok(finish(set, lambda, objective, best_index, tau))
}

/// The estimated local-FDR curve `q(t) = inf{q : tau(q) >= t}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalFdrCurve {
    pub pi: f64,
    /// Left-continuous, nondecreasing, values in `[0, pi]`.
    pub curve: StepCurve,
}

/// Invert `q -> tau(q)` exactly.
///
/// The minimiser over `i` of `a_i / m - lambda i / n`, with `a_i` the number
/// of controls at or below the `i`-th smallest investigation statistic, is a
/// vertex of the lower convex hull of the points `(i, a_i)`. The argmin
/// moves past vertex `v_j` exactly when `lambda` exceeds the `n/m`-scaled
/// slope of the hull edge leaving it, so the curve's values are `pi` times
/// those slopes. Levels are restricted to `(0, pi]`; positions never reached
/// at `q = pi` get the value `pi`.
pub fn localfdr_curve(set: &StatisticSet, pi: f64) -> Result<LocalFdrCurve> {
    if !(pi > 0.0 && pi <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "pi must lie in (0, 1], got {pi}"
        )));
    }
    let (n, m) = (set.n(), set.m());
    let mut test = set.test_values();
    test.sort_by(f64::total_cmp);
    let nc = set.sorted_nc();
    let mut points: Vec<(i128, i128)> = Vec::with_capacity(n + 1);
    points.push((0, 0));
    let mut a = 0;
    for (r, &t) in test.iter().enumerate() {
        a += nc[a..].partition_point(|&x| x <= t);
        points.push((r as i128 + 1, a as i128));
    }

    let mut hull: Vec<usize> = Vec::new();
    for k in 0..points.len() {
        while hull.len() >= 2 {
            let (o, b) = (points[hull[hull.len() - 2]], points[hull[hull.len() - 1]]);
            let c = points[k];
            let cross = (b.0 - o.0) * (c.1 - o.1) - (b.1 - o.1) * (c.0 - o.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }

    let mut breakpoints = Vec::with_capacity(hull.len());
    let mut values = Vec::with_capacity(hull.len() + 1);
    for w in hull.windows(2) {
        let (p0, p1) = (points[w[0]], points[w[1]]);
        let slope = n as f64 * (p1.1 - p0.1) as f64 / (m as f64 * (p1.0 - p0.0) as f64);
        values.push((pi * slope).min(pi));
        breakpoints.push(test[w[1] - 1]);
    }
    values.push(pi);
    Ok(LocalFdrCurve {
        pi,
        curve: StepCurve::new(breakpoints, values, Continuity::Left),
    })
}

/// Population quantities of a two-group model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Population {
    pub null: Dist,
    pub alternative: Dist,
    /// Null proportion.
    pub pi: f64,
}

impl Population {
    pub fn mixture_cdf(&self, t: f64) -> f64 {
        self.pi * self.null.cdf(t) + (1.0 - self.pi) * self.alternative.cdf(t)
    }

    pub fn mixture_pdf(&self, t: f64) -> f64 {
        self.pi * self.null.pdf(t) + (1.0 - self.pi) * self.alternative.pdf(t)
    }

    /// `F0(t) - lambda F(t)`.
    pub fn objective(&self, t: f64, lambda: f64) -> f64 {
        self.null.cdf(t) - lambda * self.mixture_cdf(t)
    }

    /// Population minimiser of [`Population::objective`] over `[lo, hi]`:
    /// a grid search refined by golden-section search. Returns `None` when
    /// the objective stays nonnegative, i.e. the empty rejection set wins.
    pub fn threshold(&self, lambda: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
        const GRID: usize = 20_000;
        let step = (hi - lo) / GRID as f64;
        let (mut best_k, mut best_v) = (0, f64::INFINITY);
        for k in 0..=GRID {
            let v = self.objective(lo + k as f64 * step, lambda);
            if v < best_v {
                best_v = v;
                best_k = k;
            }
        }
        let (mut a, mut b) = (
            lo + best_k.saturating_sub(1) as f64 * step,
            lo + (best_k + 1).min(GRID) as f64 * step,
        );
        let g = (5f64.sqrt() - 1.0) / 2.0;
        while b - a > 1e-12 * (1.0 + a.abs()) {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if self.objective(c, lambda) <= self.objective(d, lambda) {
                b = d;
            } else {
                a = c;
            }
        }
        let t = 0.5 * (a + b);
        let v = self.objective(t, lambda);
        (v < 0.0).then_some((t, v))
    }
}

/// Weighted misclassification curves with loss `1 - q` for a false
/// positive and `q` for a false negative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskCurves {
    pub t: Vec<f64>,
    /// `(1 - q) F0(t)`.
    pub weighted_type1: Vec<f64>,
    /// `q (1 - pi) / pi (1 - F1(t))`.
    pub weighted_type2: Vec<f64>,
    pub risk: Vec<f64>,
    /// Grid point of minimal risk, smallest on ties.
    pub argmin_t: f64,
}

fn check_q_pi(q: f64, pi: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "q must lie in (0, 1), got {q}"
        )));
    }
    if !(pi > 0.0 && pi <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "pi must lie in (0, 1], got {pi}"
        )));
    }
    Ok(())
}

fn assemble(t: Vec<f64>, w1: Vec<f64>, w2: Vec<f64>) -> RiskCurves {
    let risk: Vec<f64> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
    let k = risk
        .iter()
        .enumerate()
        .fold(0, |best, (k, &r)| if r < risk[best] { k } else { best });
    RiskCurves {
        argmin_t: t[k],
        t,
        weighted_type1: w1,
        weighted_type2: w2,
        risk,
    }
}

/// Risk curves from the data, evaluated at every observed statistic. The
/// alternative CDF is eliminated through `(1 - pi) F1 = Fn - pi F0`, so the
/// risk equals `F0 - (q/pi) Fn` plus the constant `q (1 - pi) / pi`.
pub fn bayes_risk_curves(set: &StatisticSet, q: f64, pi: f64) -> Result<RiskCurves> {
    check_q_pi(q, pi)?;
    let (n, m) = (set.n() as f64, set.m() as f64);
    let mut test = set.test_values();
    test.sort_by(f64::total_cmp);
    let nc = set.sorted_nc();
    let mut t: Vec<f64> = test.iter().chain(&nc).copied().collect();
    t.sort_by(f64::total_cmp);
    t.dedup();
    let (mut w1, mut w2) = (Vec::with_capacity(t.len()), Vec::with_capacity(t.len()));
    for &x in &t {
        let f0 = nc.partition_point(|&v| v <= x) as f64 / m;
        let fn_ = test.partition_point(|&v| v <= x) as f64 / n;
        w1.push((1.0 - q) * f0);
        w2.push(q / pi * (1.0 - pi - fn_ + pi * f0));
    }
    Ok(assemble(t, w1, w2))
}

/// Risk curves from known population CDFs on the grid `t`.
pub fn bayes_risk_curves_population(pop: &Population, q: f64, t: &[f64]) -> Result<RiskCurves> {
    check_q_pi(q, pop.pi)?;
    if t.is_empty() {
        return Err(Error::TooFewPoints {
            needed: 1,
            found: 0,
        });
    }
    let w1 = t.iter().map(|&x| (1.0 - q) * pop.null.cdf(x)).collect();
    let w2 = t
        .iter()
        .map(|&x| q * (1.0 - pop.pi) / pop.pi * (1.0 - pop.alternative.cdf(x)))
        .collect();
    Ok(assemble(t.to_vec(), w1, w2))
}

/// KDE bandwidth rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// `0.9 min(sd, IQR / 1.34) n^(-1/5)`.
    Silverman,
    Fixed(f64),
}

fn quantile_sorted(x: &[f64], p: f64) -> f64 {
    let h = (x.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    x[lo] + (h - lo as f64) * (x[hi] - x[lo])
}

fn bandwidth_for(x: &[f64], rule: Bandwidth) -> f64 {
    match rule {
        Bandwidth::Fixed(h) => h,
        Bandwidth::Silverman => {
            let mut s = x.to_vec();
            s.sort_by(f64::total_cmp);
            let (_, sd) = mean_sd(x);
            let iqr = quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25);
            let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
            0.9 * spread * (x.len() as f64).powf(-0.2)
        }
    }
}

fn gaussian_kde(x: &[f64], h: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (x.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    grid.iter()
        .map(|&g| {
            norm * x
                .iter()
                .map(|&xi| (-0.5 * ((g - xi) / h).powi(2)).exp())
                .sum::<f64>()
        })
        .collect()
}

/// Value substituted where the investigation density estimate vanishes.
pub const KDE_SENTINEL: f64 = 1e12;
pub const KDE_GRID_POINTS: usize = 512;

/// Plug-in local FDR `pi f0(t) / f(t)` from Gaussian kernel density
/// estimates on a uniform grid spanning all statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KdeBaseline {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub bandwidth_null: f64,
    pub bandwidth_test: f64,
    /// Grid points where the investigation density was zero.
    pub clipped: usize,
}

impl KdeBaseline {
    /// Walk the grid from the left while the estimate stays at or below `q`
    /// and return the last grid point reached.
    pub fn threshold(&self, q: f64) -> Option<f64> {
        let k = self.values.iter().take_while(|&&v| v <= q).count();
        k.checked_sub(1).map(|j| self.grid[j])
    }

    pub fn as_curve(&self) -> StepCurve {
        let mut values = vec![self.values[0]];
        values.extend_from_slice(&self.values);
        StepCurve::new(self.grid.clone(), values, Continuity::Right)
    }
}

pub fn pdf_localfdr_baseline(
    set: &StatisticSet,
    pi: f64,
    bandwidth: Bandwidth,
) -> Result<KdeBaseline> {
    if !(0.0..=1.0).contains(&pi) {
        return Err(Error::InvalidParameter(format!(
            "pi must lie in [0, 1], got {pi}"
        )));
    }
    if set.m() < 2 || set.n() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: set.m().min(set.n()),
        });
    }
    let test = set.test_values();
    let nc = set.nc_values();
    let h0 = bandwidth_for(&nc, bandwidth);
    let h = bandwidth_for(&test, bandwidth);
    if !(h0 > 0.0 && h > 0.0) {
        return Err(Error::DegenerateScale);
    }
    let lo = test
        .iter()
        .chain(&nc)
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = test
        .iter()
        .chain(&nc)
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let grid: Vec<f64> = (0..KDE_GRID_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (KDE_GRID_POINTS - 1) as f64)
        .collect();
    let f0 = gaussian_kde(&nc, h0, &grid);
    let f = gaussian_kde(&test, h, &grid);
    let mut clipped = 0;
    let values = f0
        .iter()
        .zip(&f)
        .map(|(&a, &b)| {
            if b > 0.0 {
                pi * a / b
            } else if pi * a == 0.0 {
                0.0
            } else {
                clipped += 1;
                KDE_SENTINEL
            }
        })
        .collect();
    Ok(KdeBaseline {
        grid,
        values,
        bandwidth_null: h0,
        bandwidth_test: h,
        clipped,
    })
}

/// Every candidate that minimises the objective within distance `h`.
///
/// Non-monotone likelihood ratios can produce several crossings; each local
/// minimiser is returned as its own result, in increasing `t`. The
/// empty-rejection boundary is placed at the smallest statistic for the
/// purpose of neighbourhoods. Ties within a neighbourhood go to the
/// smallest `t`.
pub fn neighborhood_threshold(
    set: &StatisticSet,
    lambda: f64,
    h: f64,
) -> Result<Vec<LocalFdrResult>> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "neighbourhood radius must be positive, got {h}"
        )));
    }
    let global = cdf_threshold(set, lambda)?;
    let obj = &global.objective;
    let pos = |k: usize| {
        if k == 0 {
            obj.get(1).map_or(0.0, |p| p.t)
        } else {
            obj[k].t
        }
    };
    let lvl = Level::new(lambda);
    let (n, m) = (set.n(), set.m());

    // Recover integer coordinates for exact comparisons.
    let mut test = set.test_values();
    test.sort_by(f64::total_cmp);
    let nc = set.sorted_nc();
    let coords: Vec<(usize, usize)> = obj
        .iter()
        .map(|p| {
            if p.t == f64::NEG_INFINITY {
                (0, 0)
            } else {
                (
                    nc.partition_point(|&x| x <= p.t),
                    test.partition_point(|&x| x <= p.t),
                )
            }
        })
        .collect();

    let mut out = Vec::new();
    let mut lo = 0;
    for k in 0..obj.len() {
        let c = pos(k);
        while pos(lo) < c - h {
            lo += 1;
        }
        let mut is_min = true;
        let mut j = lo;
        while j < obj.len() && pos(j) <= c + h {
            if j != k {
                let ord = cmp_objective(&lvl, coords[j], coords[k], n, m);
                if ord == Ordering::Less || (ord == Ordering::Equal && j < k) {
                    is_min = false;
                    break;
                }
            }
            j += 1;
        }
        if is_min {
            let tau = (k > 0).then(|| obj[k].t);
            out.push(finish(set, lambda, obj.clone(), k, tau));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> StatisticSet {
        StatisticSet::from_values(&[0.5, 1.5, 5.0], &[1.0, 2.0, 3.0, 4.0]).unwrap()
    }

    #[test]
    fn worked_instance() {
        let r = cdf_threshold(&worked(), 1.0).unwrap();
        assert_eq!(r.tau_hat, Some(1.5));
        assert_eq!(r.rejected, vec![0, 1]);
        let expect = [
            0.0,
            -1.0 / 3.0,
            -1.0 / 12.0,
            -5.0 / 12.0,
            -1.0 / 6.0,
            1.0 / 12.0,
            1.0 / 3.0,
            0.0,
        ];
        for (p, e) in r.objective.iter().zip(expect) {
            assert!((p.value - e).abs() < 1e-15, "{p:?} vs {e}");
        }
        let o = cdf_threshold_orderstat(&worked(), 1.0).unwrap();
        assert_eq!(o.tau_hat, Some(1.5));
        assert_eq!(o.argmin_index, 2);
        let vals: Vec<f64> = o.objective.iter().map(|p| p.value).collect();
        assert!((vals[1] + 1.0 / 12.0).abs() < 1e-15);
        assert!((vals[2] + 1.0 / 6.0).abs() < 1e-15);
        assert!((vals[3] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_lambda_rejects_nothing() {
        let r = cdf_threshold(&worked(), 0.0).unwrap();
        assert_eq!(r.tau_hat, None);
        assert!(r.rejected.is_empty());
    }

    #[test]
    fn single_test_statistic() {
        // n = 1: reject iff (m+1)/m p - lambda < 1/m.
        let set = StatisticSet::from_values(&[0.5], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            cdf_threshold_orderstat(&set, 0.5).unwrap().tau_hat,
            Some(0.5)
        );
        let set = StatisticSet::from_values(&[2.5], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(cdf_threshold_orderstat(&set, 0.5).unwrap().tau_hat, None);
        assert_eq!(
            cdf_threshold_orderstat(&set, 0.7).unwrap().tau_hat,
            Some(2.5)
        );
    }

    #[test]
    fn curve_on_worked_instance() {
        let c = localfdr_curve(&worked(), 1.0).unwrap();
        // Hull of (0,0), (1,0), (2,1), (3,4): vertices 0, 1, 2, 3.
        assert_eq!(c.curve.breakpoints, vec![0.5, 1.5, 5.0]);
        let want = [0.0, 0.75, 1.0, 1.0];
        for (v, w) in c.curve.values.iter().zip(want) {
            assert!((v - w).abs() < 1e-15);
        }
        assert!(c.curve.is_nondecreasing());
    }

    #[test]
    fn risk_symmetric_population() {
        let pop = Population {
            null: Dist::normal(0.0, 1.0),
            alternative: Dist::normal(-2.0, 1.0),
            pi: 0.5,
        };
        let grid: Vec<f64> = (0..=4000).map(|k| -4.0 + k as f64 * 0.001).collect();
        let r = bayes_risk_curves_population(&pop, 0.5, &grid).unwrap();
        assert!((r.argmin_t + 1.0).abs() < 2e-3);

        let same = Population {
            null: Dist::normal(0.0, 1.0),
            alternative: Dist::normal(0.0, 1.0),
            pi: 0.5,
        };
        let r = bayes_risk_curves_population(&same, 0.3, &grid).unwrap();
        assert!(r.risk.windows(2).all(|w| w[0] <= w[1] + 1e-15));
        assert_eq!(r.argmin_t, grid[0]);
    }

    #[test]
    fn empirical_risk_is_shifted_objective() {
        let set = worked();
        let (q, pi) = (0.3, 0.6);
        let r = bayes_risk_curves(&set, q, pi).unwrap();
        let obj = cdf_threshold(&set, q / pi).unwrap().objective;
        for (k, risk) in r.risk.iter().enumerate() {
            assert!((risk - obj[k + 1].value - q * (1.0 - pi) / pi).abs() < 1e-12);
        }
    }

    #[test]
    fn kde_baseline_scaling() {
        let x: Vec<f64> = (0..200)
            .map(|i| ((i as f64 + 0.5) / 200.0 * 6.0 - 3.0).sin() * 2.0)
            .collect();
        let set = StatisticSet::from_values(&x, &x).unwrap();
        let one = pdf_localfdr_baseline(&set, 1.0, Bandwidth::Silverman).unwrap();
        assert!(one.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let zero = pdf_localfdr_baseline(&set, 0.0, Bandwidth::Silverman).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn neighborhood_with_wide_radius_is_global() {
        let set = worked();
        let all = neighborhood_threshold(&set, 1.0, 100.0).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].tau_hat, Some(1.5));
    }
}
