//! Empirical null distributions and their diagnostics.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{nc_subgroups, Statistic, StatisticSet};
use crate::dist::phi;
use crate::error::{Error, Result};
use crate::gof::{anderson_darling_uniform, ks_two_sample, ks_uniform};
use crate::procedures::bh;
use crate::ranc::{PValueKind, PValueVector};

/// Consistency factor making the MAD estimate the normal standard deviation.
pub const MAD_FACTOR: f64 = 1.4826;

/// P-values inside this open window are checked for uniformity.
pub const DEFAULT_WINDOW: (f64, f64) = (0.5, 0.99);

/// Which statistics a null fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Investigation,
    All,
    NegativeControls,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Investigation => "test",
            Source::All => "all",
            Source::NegativeControls => "nc",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mad1,
    Mad2,
    Efron,
    Ecdf,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Mad1 => "mad1",
            Method::Mad2 => "mad2",
            Method::Efron => "efron",
            Method::Ecdf => "ecdf",
        })
    }
}

/// Diagnostics of a Lindsey-method fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfronFit {
    pub bins: usize,
    pub degree: usize,
    pub iterations: usize,
    pub deviance: f64,
    /// Polynomial coefficients in the standardised variable
    /// `(x - center) / scale`, constant term first.
    pub coefficients: Vec<f64>,
    pub center: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NullKind {
    Gaussian {
        mu: f64,
        sigma: f64,
    },
    /// Empirical CDF of the source statistics, augmented with a point at
    /// minus infinity.
    Ecdf {
        #[serde(skip)]
        sorted: Vec<f64>,
        size: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullModel {
    #[serde(flatten)]
    pub kind: NullKind,
    pub source: Source,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub efron: Option<EfronFit>,
}

impl NullModel {
    pub fn gaussian(mu: f64, sigma: f64, source: Source, method: Method) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(Error::DegenerateScale);
        }
        Ok(NullModel {
            kind: NullKind::Gaussian { mu, sigma },
            source,
            method,
            efron: None,
        })
    }

    pub fn mu_sigma(&self) -> Option<(f64, f64)> {
        match self.kind {
            NullKind::Gaussian { mu, sigma } => Some((mu, sigma)),
            NullKind::Ecdf { .. } => None,
        }
    }
}

fn median_of_sorted(s: &[f64]) -> f64 {
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

pub fn median(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    median_of_sorted(&s)
}

/// `1.4826 * median(|x - median(x)|)`. A constant sample gives 0, which the
/// fits below reject as a degenerate scale.
pub fn mad_scale(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            found: x.len(),
        });
    }
    let med = median(x);
    let dev: Vec<f64> = x.iter().map(|v| (v - med).abs()).collect();
    Ok(MAD_FACTOR * median(&dev))
}

fn source_stats(set: &StatisticSet, source: Source) -> Vec<&Statistic> {
    match source {
        Source::Investigation => set.investigation().iter().collect(),
        Source::NegativeControls => set.negative_controls().iter().collect(),
        Source::All => set
            .investigation()
            .iter()
            .chain(set.negative_controls())
            .collect(),
    }
}

fn source_values(set: &StatisticSet, source: Source) -> Vec<f64> {
    source_stats(set, source).iter().map(|s| s.value).collect()
}

fn paired(set: &StatisticSet, source: Source) -> Result<Vec<(f64, f64)>> {
    source_stats(set, source)
        .iter()
        .map(|s| {
            s.paired
                .ok_or_else(|| Error::MissingPairedRaw(s.id.clone()))
        })
        .collect()
}

/// `mu = 0`, `sigma = sqrt(MAD(Y^T)^2 + MAD(Y^C)^2)` from the raw paired
/// measurements.
pub fn fit_mad1(set: &StatisticSet, source: Source) -> Result<NullModel> {
    let pairs = paired(set, source)?;
    let t: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let c: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let sigma = mad_scale(&t)?.hypot(mad_scale(&c)?);
    NullModel::gaussian(0.0, sigma, source, Method::Mad1)
}

/// `mu = 0`, `sigma = MAD(Y^T - Y^C)`. The differences come from the paired
/// measurements when every source statistic has them, and are the
/// statistics themselves otherwise.
pub fn fit_mad2(set: &StatisticSet, source: Source) -> Result<NullModel> {
    let diffs: Vec<f64> = match paired(set, source) {
        Ok(pairs) => pairs.iter().map(|p| p.0 - p.1).collect(),
        Err(_) => source_values(set, source),
    };
    NullModel::gaussian(0.0, mad_scale(&diffs)?, source, Method::Mad2)
}

pub const EFRON_DEFAULT_BINS: usize = 60;
pub const EFRON_DEFAULT_DEGREE: usize = 4;
const IRLS_MAX_ITER: usize = 100;
const IRLS_TOL: f64 = 1e-8;

/// Poisson regression of `counts` on a polynomial of `z` with log link,
/// fitted by iteratively reweighted least squares. Returns the coefficients,
/// the iteration count and the final deviance.
pub fn poisson_polynomial_fit(
    z: &[f64],
    counts: &[f64],
    degree: usize,
) -> Result<(Vec<f64>, usize, f64)> {
    let k = z.len();
    let p = degree + 1;
    let x = DMatrix::from_fn(k, p, |r, c| z[r].powi(c as i32));
    let deviance = |mu: &[f64]| -> f64 {
        2.0 * counts
            .iter()
            .zip(mu)
            .map(|(&y, &m)| {
                if y > 0.0 {
                    y * (y / m).ln() - (y - m)
                } else {
                    m
                }
            })
            .sum::<f64>()
    };
    let mut mu: Vec<f64> = counts.iter().map(|&y| y + 0.1).collect();
    let mut eta: Vec<f64> = mu.iter().map(|m| m.ln()).collect();
    let mut dev_old = deviance(&mu);
    for iter in 1..=IRLS_MAX_ITER {
        let w = DVector::from_iterator(k, mu.iter().copied());
        let work = DVector::from_iterator(k, (0..k).map(|i| eta[i] + (counts[i] - mu[i]) / mu[i]));
        let xtw = DMatrix::from_fn(p, k, |r, c| x[(c, r)] * w[c]);
        let lhs = &xtw * &x;
        let rhs = &xtw * work;
        let beta = lhs
            .cholesky()
            .map(|ch| ch.solve(&rhs))
            .ok_or(Error::NoConvergence(iter))?;
        let eta_new = &x * &beta;
        eta = eta_new.iter().copied().collect();
        mu = eta.iter().map(|e| e.exp()).collect();
        if mu.iter().any(|m| !m.is_finite()) {
            return Err(Error::NoConvergence(iter));
        }
        let dev = deviance(&mu);
        if (dev - dev_old).abs() / (dev.abs() + 0.1) < IRLS_TOL {
            return Ok((beta.iter().copied().collect(), iter, dev));
        }
        dev_old = dev;
    }
    Err(Error::NoConvergence(IRLS_MAX_ITER))
}

fn poly(c: &[f64], z: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &b| acc * z + b)
}

fn poly_d1(c: &[f64], z: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (j, &b)| acc * z + j as f64 * b)
}

fn poly_d2(c: &[f64], z: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(2)
        .rev()
        .fold(0.0, |acc, (j, &b)| acc * z + (j * (j - 1)) as f64 * b)
}

/// Lindsey's method: histogram the source statistics, fit a log-polynomial
/// density by Poisson regression, and read off `mu` as the mode and `sigma`
/// from the curvature at the mode, `(-d^2/dt^2 log f(mu))^(-1/2)`.
pub fn fit_efron(
    set: &StatisticSet,
    source: Source,
    bins: usize,
    degree: usize,
) -> Result<NullModel> {
    fit_efron_values(&source_values(set, source), source, bins, degree)
}

pub fn fit_efron_values(
    values: &[f64],
    source: Source,
    bins: usize,
    degree: usize,
) -> Result<NullModel> {
    if values.len() < 50 {
        return Err(Error::TooFewPoints {
            needed: 50,
            found: values.len(),
        });
    }
    if bins < 20 || degree < 2 {
        return Err(Error::InvalidParameter(format!(
            "Lindsey fit needs bins >= 20 and degree >= 2, got bins={bins}, degree={degree}"
        )));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::DegenerateScale);
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0.0; bins];
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1.0;
    }
    let center = 0.5 * (lo + hi);
    let scale = 0.5 * (hi - lo);
    let z: Vec<f64> = (0..bins)
        .map(|k| (lo + (k as f64 + 0.5) * width - center) / scale)
        .collect();
    let (coef, iterations, deviance) = poisson_polynomial_fit(&z, &counts, degree)?;

    // Mode of the fitted log-density over the histogram range.
    let grid = 2000;
    let mut zm = -1.0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..=grid {
        let zz = -1.0 + 2.0 * k as f64 / grid as f64;
        let v = poly(&coef, zz);
        if v > best {
            best = v;
            zm = zz;
        }
    }
    for _ in 0..50 {
        let d2 = poly_d2(&coef, zm);
        if d2 >= 0.0 {
            break;
        }
        let step = poly_d1(&coef, zm) / d2;
        zm = (zm - step).clamp(-1.0, 1.0);
        if step.abs() < 1e-14 {
            break;
        }
    }
    let curvature = poly_d2(&coef, zm) / (scale * scale);
    if !(curvature < 0.0) {
        return Err(Error::NonConcave);
    }
    let mu = center + zm * scale;
    let sigma = (-curvature).sqrt().recip();
    let mut model = NullModel::gaussian(mu, sigma, source, Method::Efron)?;
    model.efron = Some(EfronFit {
        bins,
        degree,
        iterations,
        deviance,
        coefficients: coef,
        center,
        scale,
    });
    Ok(model)
}

/// ECDF null from the source statistics. With negative controls as the
/// source this reproduces the RANC p-values.
pub fn fit_ecdf(set: &StatisticSet, source: Source) -> NullModel {
    let mut sorted = source_values(set, source);
    sorted.sort_by(f64::total_cmp);
    NullModel {
        kind: NullKind::Ecdf {
            size: sorted.len(),
            sorted,
        },
        source,
        method: Method::Ecdf,
        efron: None,
    }
}

pub fn fit(
    set: &StatisticSet,
    source: Source,
    method: Method,
    bins: usize,
    degree: usize,
) -> Result<NullModel> {
    match method {
        Method::Mad1 => fit_mad1(set, source),
        Method::Mad2 => fit_mad2(set, source),
        Method::Efron => fit_efron(set, source, bins, degree),
        Method::Ecdf => Ok(fit_ecdf(set, source)),
    }
}

/// One-sided p-values of the investigation statistics under `model`, on the
/// internal small-is-significant scale.
pub fn pvalues_from_null(set: &StatisticSet, model: &NullModel) -> Result<PValueVector> {
    let test = set.test_values();
    let p = match &model.kind {
        NullKind::Gaussian { mu, sigma } => {
            if !(*sigma > 0.0) {
                return Err(Error::DegenerateScale);
            }
            PValueVector::external(test.iter().map(|t| phi((t - mu) / sigma)).collect())
        }
        NullKind::Ecdf { sorted, .. } => {
            let d = sorted.len() as u64 + 1;
            let k = test
                .iter()
                .map(|&t| 1 + sorted.partition_point(|&x| x <= t) as u64)
                .collect();
            PValueVector::from_grid(k, d, PValueKind::Ranc)
        }
    };
    Ok(p.with_ids(set.test_ids()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityReport {
    pub ks_pvalue: f64,
    pub ad_pvalue: f64,
    pub ks_statistic: f64,
    pub ad_statistic: f64,
    pub window: (f64, f64),
    pub n_in_window: usize,
}

/// KS and AD tests of uniformity for the p-values inside the open `window`,
/// after rescaling the window to (0, 1).
pub fn uniformity_tests(p: &PValueVector, window: (f64, f64)) -> Result<UniformityReport> {
    let (lo, hi) = window;
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "invalid window ({lo}, {hi})"
        )));
    }
    let u: Vec<f64> = p
        .values
        .iter()
        .filter(|&&v| v > lo && v < hi)
        .map(|&v| (v - lo) / (hi - lo))
        .collect();
    if u.len() < 10 {
        return Err(Error::TooFewPoints {
            needed: 10,
            found: u.len(),
        });
    }
    let ks = ks_uniform(&u);
    let ad = anderson_darling_uniform(&u);
    Ok(UniformityReport {
        ks_pvalue: ks.p_value,
        ad_pvalue: ad.p_value,
        ks_statistic: ks.statistic,
        ad_statistic: ad.statistic,
        window,
        n_in_window: u.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTest {
    pub a: String,
    pub b: String,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QqPoint {
    pub a: String,
    pub b: String,
    pub prob: f64,
    pub qa: f64,
    pub qb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Falsification {
    pub labels: Vec<String>,
    /// Symmetric matrix of pairwise two-sample KS p-values, ones on the
    /// diagonal, indexed like `labels`.
    pub matrix: Vec<Vec<f64>>,
    pub pairs: Vec<PairTest>,
    pub qq: Vec<QqPoint>,
}

const QQ_POINTS: usize = 99;

fn empirical_quantile(sorted: &[f64], prob: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Compare the negative-control distributions of every pair of subgroups.
pub fn falsify_subgroups(set: &StatisticSet) -> Result<Falsification> {
    let groups = nc_subgroups(set);
    if groups.len() < 2 {
        return Err(Error::Subgroups(format!(
            "need at least two labelled negative-control subgroups, found {}",
            groups.len()
        )));
    }
    if let Some((label, v)) = groups.iter().find(|(_, v)| v.len() < 5) {
        return Err(Error::Subgroups(format!(
            "subgroup `{label}` has {} negative controls, need at least 5",
            v.len()
        )));
    }
    let labels: Vec<String> = groups.keys().cloned().collect();
    let sorted: Vec<Vec<f64>> = groups
        .values()
        .map(|v| {
            let mut s = v.clone();
            s.sort_by(f64::total_cmp);
            s
        })
        .collect();
    let g = labels.len();
    let mut matrix = vec![vec![1.0; g]; g];
    let mut pairs = Vec::new();
    let mut qq = Vec::new();
    for i in 0..g {
        for j in i + 1..g {
            let r = ks_two_sample(&sorted[i], &sorted[j]);
            matrix[i][j] = r.p_value;
            matrix[j][i] = r.p_value;
            pairs.push(PairTest {
                a: labels[i].clone(),
                b: labels[j].clone(),
                statistic: r.statistic,
                p_value: r.p_value,
            });
            for k in 1..=QQ_POINTS {
                let prob = k as f64 / (QQ_POINTS + 1) as f64;
                qq.push(QqPoint {
                    a: labels[i].clone(),
                    b: labels[j].clone(),
                    prob,
                    qa: empirical_quantile(&sorted[i], prob),
                    qb: empirical_quantile(&sorted[j], prob),
                });
            }
        }
    }
    Ok(Falsification {
        labels,
        matrix,
        pairs,
        qq,
    })
}

/// One cell of the source-by-method comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullTableRow {
    pub source: Source,
    pub method: Method,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub ks_pvalue: Option<f64>,
    pub ad_pvalue: Option<f64>,
    pub n_in_window: Option<usize>,
    pub bh_rejections: Option<usize>,
    /// Why the cell could not be computed, if it could not.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullTableConfig {
    pub q: f64,
    pub window: (f64, f64),
    pub bins: usize,
    pub degree: usize,
}

impl Default for NullTableConfig {
    fn default() -> Self {
        NullTableConfig {
            q: 0.2,
            window: DEFAULT_WINDOW,
            bins: EFRON_DEFAULT_BINS,
            degree: EFRON_DEFAULT_DEGREE,
        }
    }
}

/// Fit every requested (source, method) null, then report its parameters,
/// window uniformity and BH rejection count. A cell that cannot be computed
/// carries the reason instead of numbers.
pub fn null_table(
    set: &StatisticSet,
    sources: &[Source],
    methods: &[Method],
    config: &NullTableConfig,
) -> Vec<NullTableRow> {
    let mut rows = Vec::new();
    for &source in sources {
        for &method in methods {
            let cell = (|| -> Result<NullTableRow> {
                let model = fit(set, source, method, config.bins, config.degree)?;
                let p = pvalues_from_null(set, &model)?;
                let uni = uniformity_tests(&p, config.window)?;
                let rejections = bh(&p, config.q)?.count();
                let ms = model.mu_sigma();
                Ok(NullTableRow {
                    source,
                    method,
                    mu: ms.map(|m| m.0),
                    sigma: ms.map(|m| m.1),
                    ks_pvalue: Some(uni.ks_pvalue),
                    ad_pvalue: Some(uni.ad_pvalue),
                    n_in_window: Some(uni.n_in_window),
                    bh_rejections: Some(rejections),
                    error: None,
                })
            })();
            rows.push(cell.unwrap_or_else(|e| NullTableRow {
                source,
                method,
                mu: None,
                sigma: None,
                ks_pvalue: None,
                ad_pvalue: None,
                n_in_window: None,
                bh_rejections: None,
                error: Some(e.to_string()),
            }));
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Orientation;
    use crate::ranc::ranc_pvalues;

    #[test]
    fn mad_examples() {
        assert!((mad_scale(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap() - 1.4826).abs() < 1e-15);
        assert!((mad_scale(&[-1.0, 0.0, 1.0]).unwrap() - 1.4826).abs() < 1e-15);
        assert_eq!(mad_scale(&[2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert!(mad_scale(&[1.0]).is_err());
    }

    fn paired_set(t: &[f64], c: &[f64]) -> StatisticSet {
        let stats: Vec<Statistic> = t
            .iter()
            .zip(c)
            .enumerate()
            .map(|(i, (&a, &b))| Statistic::new(format!("s{i}"), a - b).with_paired(a, b))
            .collect();
        StatisticSet::new(
            stats.clone(),
            vec![Statistic::new("z", 0.0).with_paired(0.0, 0.0)],
            Orientation::SmallIsSignificant,
        )
        .unwrap()
    }

    #[test]
    fn mad1_three_four_five() {
        // Raw MADs of 0.3 and 0.4 after the consistency factor.
        let u = 1.0 / MAD_FACTOR;
        let t = [-0.3 * u, 0.0, 0.3 * u];
        let c = [-0.4 * u, 0.0, 0.4 * u];
        let m = fit_mad1(&paired_set(&t, &c), Source::Investigation).unwrap();
        assert!((m.mu_sigma().unwrap().1 - 0.5).abs() < 1e-12);
        assert_eq!(m.mu_sigma().unwrap().0, 0.0);

        let flat = paired_set(&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0]);
        assert!(matches!(
            fit_mad1(&flat, Source::Investigation),
            Err(Error::DegenerateScale)
        ));
        let no_pairs = StatisticSet::from_values(&[1.0], &[2.0]).unwrap();
        assert!(matches!(
            fit_mad1(&no_pairs, Source::All),
            Err(Error::MissingPairedRaw(_))
        ));
    }

    #[test]
    fn mad2_uses_differences() {
        let set = StatisticSet::from_values(&[1.0, 2.0, 3.0, 4.0, 100.0], &[0.0]).unwrap();
        let m = fit_mad2(&set, Source::Investigation).unwrap();
        assert_eq!(m.mu_sigma(), Some((0.0, 1.4826)));
    }

    #[test]
    fn lindsey_recovers_exact_log_quadratic() {
        let z: Vec<f64> = (0..40).map(|k| -1.0 + (k as f64 + 0.5) / 20.0).collect();
        let truth = [5.0, 0.3, -2.0];
        let counts: Vec<f64> = z.iter().map(|&x| poly(&truth, x).exp()).collect();
        let (coef, _, dev) = poisson_polynomial_fit(&z, &counts, 2).unwrap();
        for (a, b) in coef.iter().zip(truth) {
            assert!((a - b).abs() < 1e-6, "{coef:?}");
        }
        assert!(dev < 1e-8);
    }

    #[test]
    fn gaussian_pvalues() {
        let set = StatisticSet::from_values(&[0.0, -1.6448536269514729], &[1.0]).unwrap();
        let m = NullModel::gaussian(0.0, 1.0, Source::NegativeControls, Method::Mad2).unwrap();
        let p = pvalues_from_null(&set, &m).unwrap();
        assert_eq!(p.values[0], 0.5);
        assert!((p.values[1] - 0.05).abs() < 1e-10);
        assert!(NullModel::gaussian(0.0, 0.0, Source::All, Method::Mad1).is_err());
    }

    #[test]
    fn ecdf_null_is_ranc() {
        let set =
            StatisticSet::from_values(&[0.3, -1.0, 2.0, 0.5], &[0.1, 0.5, 0.9, -0.2]).unwrap();
        let model = fit_ecdf(&set, Source::NegativeControls);
        let p = pvalues_from_null(&set, &model).unwrap();
        let r = ranc_pvalues(&set);
        assert_eq!(p.values, r.values);
        assert_eq!(p.grid(), r.grid());
    }

    #[test]
    fn uniformity_extremes() {
        let grid: Vec<f64> = (0..100)
            .map(|i| 0.5 + 0.49 * (i as f64 + 0.5) / 100.0)
            .collect();
        let r = uniformity_tests(&PValueVector::external(grid), DEFAULT_WINDOW).unwrap();
        assert!(r.ks_pvalue >= 0.99);
        assert_eq!(r.n_in_window, 100);
        let point =
            uniformity_tests(&PValueVector::external(vec![0.6; 50]), DEFAULT_WINDOW).unwrap();
        assert!(point.ks_pvalue < 1e-6);
        assert!(uniformity_tests(&PValueVector::external(vec![0.1; 50]), DEFAULT_WINDOW).is_err());
    }

    #[test]
    fn falsify_needs_two_groups() {
        let set = StatisticSet::new(
            vec![Statistic::new("t", 0.0)],
            (0..6)
                .map(|i| Statistic::new(format!("n{i}"), i as f64).with_subgroup("a"))
                .collect(),
            Orientation::SmallIsSignificant,
        )
        .unwrap();
        assert!(matches!(falsify_subgroups(&set), Err(Error::Subgroups(_))));
    }

    #[test]
    fn table_reports_failures_in_cells() {
        let set = StatisticSet::from_values(
            &(0..100).map(|i| (i as f64 * 0.7).sin()).collect::<Vec<_>>(),
            &(0..100).map(|i| (i as f64 * 1.3).cos()).collect::<Vec<_>>(),
        )
        .unwrap();
        let rows = null_table(
            &set,
            &[Source::NegativeControls],
            &[Method::Mad1, Method::Mad2, Method::Ecdf],
            &NullTableConfig::default(),
        );
        assert_eq!(rows.len(), 3);
        assert!(rows[0].error.as_deref().unwrap().contains("paired"));
        assert!(rows[1].error.is_none() && rows[2].error.is_none());
    }
}
