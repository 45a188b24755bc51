//! Data generators and Monte Carlo studies.
//!
//! Every replication draws from its own `ChaCha8` stream selected by
//! `(seed, rep)`, and summaries are reduced in replication order, so results
//! are bit-identical whatever the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::data::{Orientation, Statistic, StatisticSet, Truth};
use crate::dist::{phi, phi_inv, Dist};
use crate::error::{Error, Result};
use crate::local_fdr::{cdf_threshold_orderstat, pdf_localfdr_baseline, Bandwidth, Population};
use crate::par::{mean_sd, Execution};
use crate::procedures::{
    bh, fisher_global_statistic, permutation_global_values, simes_min_ratio, GlobalStatistic,
    Outcome,
};
use crate::ranc::{ranc_from_values, EmpiricalNull, PValueKind, PValueVector};

/// Independent stream for replication `rep`.
pub fn rep_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

fn std_normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dependence {
    Independent,
    Exchangeable,
}

/// Shift of the null and negative-control statistics on the z-scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullShift {
    /// `+0.5`: raw p-values are conservative.
    Conservative,
    /// `0`: raw p-values are exact.
    Exact,
    /// `-0.5`: raw p-values are anti-conservative.
    AntiConservative,
}

impl NullShift {
    pub fn mu(self) -> f64 {
        match self {
            NullShift::Conservative => 0.5,
            NullShift::Exact => 0.0,
            NullShift::AntiConservative => -0.5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            NullShift::Conservative => "csvr",
            NullShift::Exact => "exact",
            NullShift::AntiConservative => "anti-csvr",
        }
    }
}

/// Equicorrelated multivariate normal simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n0: usize,
    pub n1: usize,
    pub m: usize,
    /// Correlation used when `dependence` is exchangeable.
    pub rho: f64,
    pub mu_null: f64,
    pub mu_alt: f64,
    pub q: f64,
    pub reps: usize,
    pub seed: u64,
    pub dependence: Dependence,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n0: 100,
            n1: 10,
            m: 200,
            rho: 0.5,
            mu_null: 0.0,
            mu_alt: -3.0,
            q: 0.2,
            reps: 10_000,
            seed: 2024,
            dependence: Dependence::Independent,
        }
    }
}

impl SimConfig {
    pub fn cell(dependence: Dependence, shift: NullShift) -> Self {
        SimConfig {
            dependence,
            mu_null: shift.mu(),
            ..Self::default()
        }
    }

    pub fn effective_rho(&self) -> f64 {
        match self.dependence {
            Dependence::Independent => 0.0,
            Dependence::Exchangeable => self.rho,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0 + self.n1 == 0 || self.m == 0 || self.reps == 0 {
            return Err(Error::InvalidParameter(
                "need n0 + n1 >= 1, m >= 1 and reps >= 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidParameter(format!(
                "rho must lie in [0, 1), got {}",
                self.rho
            )));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "q must lie in (0, 1), got {}",
                self.q
            )));
        }
        Ok(())
    }
}

/// Statistics of one replication: `test[..n0]` are nulls, the rest
/// non-nulls.
#[derive(Debug, Clone, PartialEq)]
pub struct EmnDraw {
    pub test: Vec<f64>,
    pub nc: Vec<f64>,
    pub n0: usize,
}

impl EmnDraw {
    pub fn truth(&self) -> Vec<Truth> {
        (0..self.test.len())
            .map(|i| {
                if i < self.n0 {
                    Truth::Null
                } else {
                    Truth::NonNull
                }
            })
            .collect()
    }
}

/// `T_i = Phi(mu_i + sqrt(rho) Z + sqrt(1 - rho) X_i)` with one shared `Z`
/// per replication. Nulls and controls use `mu_null`, non-nulls `mu_alt`.
pub fn generate_emn_values(config: &SimConfig, rep: u64) -> EmnDraw {
    let mut rng = rep_rng(config.seed, rep);
    let rho = config.effective_rho();
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    let z = std_normal(&mut rng);
    let mut draw = |mu: f64| phi(mu + a * z + b * std_normal(&mut rng));
    let mut test = Vec::with_capacity(config.n0 + config.n1);
    for _ in 0..config.n0 {
        test.push(draw(config.mu_null));
    }
    for _ in 0..config.n1 {
        test.push(draw(config.mu_alt));
    }
    let nc = (0..config.m).map(|_| draw(config.mu_null)).collect();
    EmnDraw {
        test,
        nc,
        n0: config.n0,
    }
}

/// [`generate_emn_values`] as a labelled [`StatisticSet`].
pub fn generate_emn(config: &SimConfig, rep: u64) -> StatisticSet {
    let d = generate_emn_values(config, rep);
    let truth = d.truth();
    let inv = d
        .test
        .iter()
        .zip(truth)
        .enumerate()
        .map(|(i, (&v, t))| Statistic::new(format!("h{}", i + 1), v).with_truth(t))
        .collect();
    let nc =
        d.nc.iter()
            .enumerate()
            .map(|(j, &v)| Statistic::new(format!("nc{}", j + 1), v))
            .collect();
    StatisticSet::from_internal(inv, nc, Orientation::SmallIsSignificant)
        .expect("valid simulated set")
}

/// `Phi(Phi^-1(T) - mu_null)`, the statistic corrected by the true marginal
/// null CDF. With `mu_null = 0` the statistic is returned unchanged.
pub fn oracle_transform(t: f64, mu_null: f64) -> f64 {
    if mu_null == 0.0 {
        t
    } else {
        phi(phi_inv(t) - mu_null)
    }
}

pub fn oracle_pvalues(set: &StatisticSet, config: &SimConfig) -> Result<PValueVector> {
    if set.truth().is_none() {
        return Err(Error::MissingTruth);
    }
    Ok(PValueVector::external(
        set.test_values()
            .iter()
            .map(|&t| oracle_transform(t, config.mu_null))
            .collect(),
    )
    .with_ids(set.test_ids()))
}

/// Summary of one method over replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub fdp_mean: f64,
    pub fdp_sd: f64,
    pub tpr_mean: f64,
    pub tpr_sd: f64,
}

impl MethodSummary {
    fn from_outcomes(method: &str, out: &[Outcome]) -> Self {
        let fdp: Vec<f64> = out.iter().map(Outcome::fdp).collect();
        let tpr: Vec<f64> = out.iter().map(Outcome::tpr).collect();
        let (fdp_mean, fdp_sd) = mean_sd(&fdp);
        let (tpr_mean, tpr_sd) = mean_sd(&tpr);
        MethodSummary {
            method: method.to_string(),
            fdp_mean,
            fdp_sd,
            tpr_mean,
            tpr_sd,
        }
    }

    /// Monte Carlo standard error of the mean FDP.
    pub fn fdp_se(&self, reps: usize) -> f64 {
        self.fdp_sd / (reps as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub label: String,
    pub config: SimConfig,
    pub reps: usize,
    pub methods: Vec<MethodSummary>,
}

impl SimReport {
    pub fn method(&self, name: &str) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == name)
    }
}

pub const BH_RAW: &str = "bh_raw";
pub const BH_RANC: &str = "bh_ranc";
pub const BH_ORACLE: &str = "bh_oracle";

/// Rejections of BH applied to the raw statistics, the RANC p-values and the
/// oracle-corrected statistics, in that order.
pub fn table1_trial(config: &SimConfig, rep: u64) -> [Vec<usize>; 3] {
    let d = generate_emn_values(config, rep);
    let raw = PValueVector::external(d.test.clone());
    let ranc = ranc_from_values(&d.test, &EmpiricalNull::new(&d.nc));
    let oracle = PValueVector::external(
        d.test
            .iter()
            .map(|&t| oracle_transform(t, config.mu_null))
            .collect(),
    );
    [raw, ranc, oracle].map(|p| bh(&p, config.q).expect("valid level").rejected)
}

/// Mean and SD of FDP and TPR for BH on raw, RANC and oracle p-values.
pub fn run_table1_cell(label: &str, config: &SimConfig, exec: Execution) -> Result<SimReport> {
    config.validate()?;
    let truth: Vec<Truth> = (0..config.n0 + config.n1)
        .map(|i| {
            if i < config.n0 {
                Truth::Null
            } else {
                Truth::NonNull
            }
        })
        .collect();
    let outcomes = exec.map(config.reps, |rep| {
        table1_trial(config, rep as u64).map(|rej| Outcome::from_mask(&rej, &truth))
    });
    let methods = [BH_RAW, BH_RANC, BH_ORACLE]
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let col: Vec<Outcome> = outcomes.iter().map(|o| o[k]).collect();
            MethodSummary::from_outcomes(name, &col)
        })
        .collect();
    Ok(SimReport {
        label: label.to_string(),
        config: *config,
        reps: config.reps,
        methods,
    })
}

/// The six cells {independent, exchangeable} x {conservative, exact,
/// anti-conservative} with the given base settings.
pub fn table1_grid(base: &SimConfig) -> Vec<(String, SimConfig)> {
    let mut out = Vec::new();
    for dep in [Dependence::Independent, Dependence::Exchangeable] {
        for shift in [
            NullShift::Conservative,
            NullShift::Exact,
            NullShift::AntiConservative,
        ] {
            let label = format!(
                "{}/{}",
                match dep {
                    Dependence::Independent => "ind",
                    Dependence::Exchangeable => "exch",
                },
                shift.label()
            );
            out.push((
                label,
                SimConfig {
                    dependence: dep,
                    mu_null: shift.mu(),
                    ..*base
                },
            ));
        }
    }
    out
}

pub fn run_table1(base: &SimConfig, exec: Execution) -> Result<Vec<SimReport>> {
    table1_grid(base)
        .iter()
        .map(|(label, cfg)| run_table1_cell(label, cfg, exec))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerPoint {
    pub m: usize,
    pub ranc: MethodSummary,
    pub oracle: MethodSummary,
}

/// Mean TPR of BH-RANC and BH-oracle for each number of controls.
pub fn power_vs_m(
    config: &SimConfig,
    m_grid: &[usize],
    exec: Execution,
) -> Result<Vec<PowerPoint>> {
    m_grid
        .iter()
        .map(|&m| {
            let cfg = SimConfig { m, ..*config };
            let r = run_table1_cell("power", &cfg, exec)?;
            Ok(PowerPoint {
                m,
                ranc: r.method(BH_RANC).expect("present").clone(),
                oracle: r.method(BH_ORACLE).expect("present").clone(),
            })
        })
        .collect()
}

/// Number of controls suggested by the rule of thumb `m >= 2 n / (q n1)`.
pub fn rule_of_thumb_m(n: usize, n1: usize, q: f64) -> usize {
    (2.0 * n as f64 / (q * n1 as f64)).ceil() as usize
}

/// Conditional probabilities `P(p2 = 1 | p1 = 1/3)` and `P(p2 = 1 | p1 = 2/3)`
/// for two uniform nulls and two Beta(1, 2) controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrdsCounterexample {
    pub p_given_one_third: f64,
    pub p_given_two_thirds: f64,
}

/// Gauss–Legendre nodes and weights on [0, 1].
fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// Exact values by integrating over the ordered controls `a < b`.
///
/// Given the controls, `p1 = 1/3` iff `T1 < a`, `p1 = 2/3` iff
/// `a <= T1 < b`, and `p2 = 1` iff `T2 >= b`. The integrands are
/// polynomials, so Gauss–Legendre quadrature of modest order is exact up to
/// rounding.
pub fn prds_counterexample() -> PrdsCounterexample {
    let nodes = gauss_legendre_unit(12);
    let dens = |x: f64| 2.0 * (1.0 - x);
    let (mut num_a, mut den_a, mut num_b, mut den_b) = (0.0, 0.0, 0.0, 0.0);
    for &(u, wu) in &nodes {
        // b ranges over (0, 1); a over (0, b).
        let b = u;
        for &(v, wv) in &nodes {
            let a = v * b;
            let w = wu * wv * b * 2.0 * dens(a) * dens(b);
            num_a += w * a * (1.0 - b);
            den_a += w * a;
            num_b += w * (b - a) * (1.0 - b);
            den_b += w * (b - a);
        }
    }
    PrdsCounterexample {
        p_given_one_third: num_a / den_a,
        p_given_two_thirds: num_b / den_b,
    }
}

/// Monte Carlo version of [`prds_counterexample`].
pub fn prds_counterexample_mc(draws: usize, seed: u64) -> PrdsCounterexample {
    let beta = Dist::Beta { a: 1.0, b: 2.0 };
    let mut rng = rep_rng(seed, 0);
    let (mut n13, mut h13, mut n23, mut h23) = (0u64, 0u64, 0u64, 0u64);
    for _ in 0..draws {
        let t1: f64 = rng.random();
        let t2: f64 = rng.random();
        let nc = [beta.sample(&mut rng), beta.sample(&mut rng)];
        let below = |t: f64| nc.iter().filter(|&&c| c <= t).count();
        let p2_is_one = below(t2) == 2;
        match below(t1) {
            0 => {
                n13 += 1;
                h13 += u64::from(p2_is_one);
            }
            1 => {
                n23 += 1;
                h23 += u64::from(p2_is_one);
            }
            _ => {}
        }
    }
    PrdsCounterexample {
        p_given_one_third: h13 as f64 / n13 as f64,
        p_given_two_thirds: h23 as f64 / n23 as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherDemo {
    pub n: usize,
    pub m: usize,
    pub reps: usize,
    pub permutations: usize,
    pub chi2_reject_rate: f64,
    pub perm_reject_rate: f64,
}

/// Under the global null with i.i.d. N(0, 1) statistics, how often Fisher's
/// statistic on RANC p-values exceeds the chi-square(2n) 0.95 quantile, and
/// how often its permutation p-value is at most 0.05.
pub fn fisher_miscalibration_demo(
    n: usize,
    m: usize,
    reps: usize,
    permutations: usize,
    seed: u64,
    exec: Execution,
) -> Result<FisherDemo> {
    if n == 0 || m == 0 || reps == 0 || permutations == 0 {
        return Err(Error::InvalidParameter(
            "n, m, reps and permutations must be positive".into(),
        ));
    }
    let crit = ChiSquared::new(2.0 * n as f64)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?
        .inverse_cdf(0.95);
    let rows = exec.map(reps, |rep| -> Result<(bool, bool)> {
        let mut rng = rep_rng(seed, rep as u64);
        let test: Vec<f64> = (0..n).map(|_| std_normal(&mut rng)).collect();
        let nc: Vec<f64> = (0..m).map(|_| std_normal(&mut rng)).collect();
        let p = ranc_from_values(&test, &EmpiricalNull::new(&nc));
        let chi2 = fisher_global_statistic(&p)? > crit;
        let perm_seed: u64 = rng.random();
        let perm = permutation_global_values(
            &test,
            &nc,
            &GlobalStatistic::Fisher,
            permutations,
            perm_seed,
            Execution::Sequential,
        )?;
        Ok((chi2, perm.p_value <= 0.05))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let rate =
        |f: fn(&(bool, bool)) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / reps as f64;
    Ok(FisherDemo {
        n,
        m,
        reps,
        permutations,
        chi2_reject_rate: rate(|r| r.0),
        perm_reject_rate: rate(|r| r.1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimesDiagnostic {
    pub n: usize,
    pub m: usize,
    pub permutations: usize,
    /// 0.05 quantile of the permutation distribution of `n min p_(i) / i`.
    pub quantile_05: f64,
    /// Value the uniform approximation assigns to that quantile.
    pub uniform_value: f64,
    pub discrepancy: f64,
    /// Permutation CDF of the statistic at 0.05.
    pub cdf_at_05: f64,
    pub observed: f64,
    pub p_value: f64,
    /// Sorted permutation samples of the statistic.
    #[serde(skip)]
    pub samples: Vec<f64>,
}

/// Permutation distribution of the Simes statistic for one null data set of
/// i.i.d. N(0, 1) statistics, compared with its uniform approximation.
pub fn simes_permutation_diagnostic(
    n: usize,
    m: usize,
    permutations: usize,
    seed: u64,
    exec: Execution,
) -> Result<SimesDiagnostic> {
    let mut rng = rep_rng(seed, 0);
    let test: Vec<f64> = (0..n).map(|_| std_normal(&mut rng)).collect();
    let nc: Vec<f64> = (0..m).map(|_| std_normal(&mut rng)).collect();
    let perm = permutation_global_values(
        &test,
        &nc,
        &GlobalStatistic::SimesMinRatio,
        permutations,
        seed,
        exec,
    )?;
    let mut s = perm.null_samples.clone();
    s.sort_by(f64::total_cmp);
    let k = ((0.05 * s.len() as f64).ceil() as usize).clamp(1, s.len());
    let quantile_05 = s[k - 1];
    let cdf_at_05 = s.iter().filter(|&&x| x <= 0.05).count() as f64 / s.len() as f64;
    Ok(SimesDiagnostic {
        n,
        m,
        permutations,
        quantile_05,
        uniform_value: 0.05,
        discrepancy: (quantile_05 - 0.05).abs(),
        cdf_at_05,
        observed: perm.observed,
        p_value: perm.p_value,
        samples: s,
    })
}

/// Rejection rates `P(p <= alpha)` of a single RANC p-value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityPoint {
    pub alpha: f64,
    pub rate: f64,
    pub se: f64,
}

/// One null statistic drawn from `null` against `m` controls drawn from
/// `nc`, repeated `reps` times.
pub fn single_pvalue_validity(
    null: &Dist,
    nc: &Dist,
    m: usize,
    reps: usize,
    alphas: &[f64],
    seed: u64,
    exec: Execution,
) -> Vec<ValidityPoint> {
    let ps = exec.map(reps, |rep| {
        let mut rng = rep_rng(seed, rep as u64);
        let t = null.sample(&mut rng);
        let below = (0..m).filter(|_| nc.sample(&mut rng) <= t).count();
        (1 + below) as f64 / (m + 1) as f64
    });
    alphas
        .iter()
        .map(|&alpha| {
            let rate = ps.iter().filter(|&&p| p <= alpha).count() as f64 / reps as f64;
            ValidityPoint {
                alpha,
                rate,
                se: (alpha * (1.0 - alpha) / reps as f64).sqrt(),
            }
        })
        .collect()
}

/// BH-RANC with uniform nulls, `Phi(Z + mu_alt)` non-nulls and Beta(1, 2)
/// controls, which are stochastically smaller than the nulls.
pub fn dominated_controls_fdr(config: &SimConfig, exec: Execution) -> Result<MethodSummary> {
    config.validate()?;
    let beta = Dist::Beta { a: 1.0, b: 2.0 };
    let n = config.n0 + config.n1;
    let truth: Vec<Truth> = (0..n)
        .map(|i| {
            if i < config.n0 {
                Truth::Null
            } else {
                Truth::NonNull
            }
        })
        .collect();
    let outcomes = exec.map(config.reps, |rep| {
        let mut rng = rep_rng(config.seed, rep as u64);
        let mut test: Vec<f64> = (0..config.n0).map(|_| rng.random()).collect();
        test.extend((0..config.n1).map(|_| phi(config.mu_alt + std_normal(&mut rng))));
        let nc: Vec<f64> = (0..config.m).map(|_| beta.sample(&mut rng)).collect();
        let p = ranc_from_values(&test, &EmpiricalNull::new(&nc));
        Outcome::from_mask(&bh(&p, config.q).expect("valid level").rejected, &truth)
    });
    Ok(MethodSummary::from_outcomes(BH_RANC, &outcomes))
}

/// The local-FDR scenario: nulls and controls follow t(10); non-nulls are
/// exponential with large values significant, i.e. `-Exp(1)` on the
/// internal scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalFdrScenario {
    pub population: Population,
    pub q: f64,
}

impl Default for LocalFdrScenario {
    fn default() -> Self {
        LocalFdrScenario {
            population: Population {
                null: Dist::StudentT { df: 10.0 },
                alternative: Dist::Exponential { rate: 1.0 }.negated(),
                pi: 0.5,
            },
            q: 0.3,
        }
    }
}

impl LocalFdrScenario {
    pub fn lambda(&self) -> f64 {
        self.q / self.population.pi
    }

    pub fn generate(&self, n: usize, m: usize, seed: u64, rep: u64) -> StatisticSet {
        let mut rng = rep_rng(seed, rep);
        let pop = &self.population;
        let inv = (0..n)
            .map(|i| {
                let is_null = rng.random::<f64>() < pop.pi;
                let (v, t) = if is_null {
                    (pop.null.sample(&mut rng), Truth::Null)
                } else {
                    (pop.alternative.sample(&mut rng), Truth::NonNull)
                };
                Statistic::new(format!("h{}", i + 1), v).with_truth(t)
            })
            .collect();
        let nc = (0..m)
            .map(|j| Statistic::new(format!("nc{}", j + 1), pop.null.sample(&mut rng)))
            .collect();
        StatisticSet::from_internal(inv, nc, Orientation::SmallIsSignificant)
            .expect("valid simulated set")
    }

    /// Population threshold `tau*` and the objective value there.
    pub fn population_threshold(&self) -> Option<(f64, f64)> {
        self.population.threshold(self.lambda(), -12.0, 6.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub median_abs_error: f64,
}

/// Median `|tau_hat - tau*|` over replications for each `n = m`. An empty
/// threshold counts as an infinite error.
pub fn convergence_study(
    scenario: &LocalFdrScenario,
    sizes: &[usize],
    reps: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<ConvergencePoint>> {
    let (tau_star, _) = scenario
        .population_threshold()
        .ok_or_else(|| Error::InvalidParameter("population threshold is empty".into()))?;
    sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let mut err = exec.map(reps, |rep| {
                let set = scenario.generate(n, n, seed.wrapping_add(k as u64), rep as u64);
                match cdf_threshold_orderstat(&set, scenario.lambda())
                    .expect("valid lambda")
                    .tau_hat
                {
                    Some(t) => (t - tau_star).abs(),
                    None => f64::INFINITY,
                }
            });
            err.sort_by(f64::total_cmp);
            Ok(ConvergencePoint {
                n,
                median_abs_error: crate::empirical_null::median(&err),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineComparison {
    pub reps: usize,
    /// Replications where the KDE threshold is strictly below `tau_hat`.
    pub baseline_smaller: usize,
}

/// How often the plug-in KDE threshold is more conservative than the
/// CDF-based threshold.
pub fn kde_baseline_comparison(
    scenario: &LocalFdrScenario,
    n: usize,
    m: usize,
    reps: usize,
    seed: u64,
    exec: Execution,
) -> BaselineComparison {
    let pi = scenario.population.pi;
    let smaller = exec.map(reps, |rep| {
        let set = scenario.generate(n, m, seed, rep as u64);
        let tau = cdf_threshold_orderstat(&set, scenario.lambda())
            .expect("valid lambda")
            .tau_hat
            .unwrap_or(f64::NEG_INFINITY);
        let base = pdf_localfdr_baseline(&set, pi, Bandwidth::Silverman)
            .ok()
            .and_then(|b| b.threshold(scenario.q))
            .unwrap_or(f64::NEG_INFINITY);
        base < tau
    });
    BaselineComparison {
        reps,
        baseline_smaller: smaller.iter().filter(|&&b| b).count(),
    }
}

/// Synthetic stand-in for a paired proteomics experiment.
///
/// Each protein has a baseline abundance `b ~ N(0, 0.245^2)` shared by its
/// treatment and control measurements, plus independent noise with SD
/// 0.1414. Null and control differences are therefore N(0, 0.2^2) while
/// each raw arm has SD about 0.283, so the raw-measurement MAD estimate is
/// inflated to about 0.4. Non-null proteins are shifted upwards by 1, and
/// large differences are significant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProteomicsAnalogue {
    pub n0: usize,
    pub n1: usize,
    pub m: usize,
    pub baseline_sd: f64,
    pub noise_sd: f64,
    pub shift: f64,
}

impl Default for ProteomicsAnalogue {
    fn default() -> Self {
        ProteomicsAnalogue {
            n0: 600,
            n1: 140,
            m: 2067,
            baseline_sd: 0.06f64.sqrt(),
            noise_sd: 0.02f64.sqrt(),
            shift: 1.0,
        }
    }
}

impl ProteomicsAnalogue {
    pub fn generate(&self, seed: u64) -> StatisticSet {
        let mut rng = rep_rng(seed, 0);
        let mut protein = |id: String, delta: f64, truth: Option<Truth>| {
            let b = self.baseline_sd * std_normal(&mut rng);
            let yt = b + self.noise_sd * std_normal(&mut rng) + delta;
            let yc = b + self.noise_sd * std_normal(&mut rng);
            let s = Statistic::new(id, yt - yc).with_paired(yt, yc);
            match truth {
                Some(t) => s.with_truth(t),
                None => s,
            }
        };
        let mut inv = Vec::with_capacity(self.n0 + self.n1);
        for i in 0..self.n0 + self.n1 {
            let non_null = i >= self.n0;
            inv.push(protein(
                format!("p{}", i + 1),
                if non_null { self.shift } else { 0.0 },
                Some(if non_null {
                    Truth::NonNull
                } else {
                    Truth::Null
                }),
            ));
        }
        let nc = (0..self.m)
            .map(|j| protein(format!("nc{}", j + 1), 0.0, None))
            .collect();
        StatisticSet::new(inv, nc, Orientation::LargeIsSignificant).expect("valid simulated set")
    }
}

/// Simes statistic of a p-value vector, re-exported for diagnostics.
pub fn simes_statistic(p: &PValueVector) -> Result<f64> {
    simes_min_ratio(p)
}

/// RANC p-values of a simulated draw.
pub fn ranc_of(draw: &EmnDraw) -> PValueVector {
    let p = ranc_from_values(&draw.test, &EmpiricalNull::new(&draw.nc));
    debug_assert_eq!(p.kind, PValueKind::Ranc);
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let nodes = gauss_legendre_unit(12);
        let integral: f64 = nodes.iter().map(|&(x, w)| w * x.powi(9)).sum();
        assert!((integral - 0.1).abs() < 1e-14);
        let total: f64 = nodes.iter().map(|&(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn oracle_shift_direction() {
        let t = phi(0.3);
        assert!(oracle_transform(t, 0.5) < t);
        assert_eq!(oracle_transform(t, 0.0), t);
        assert!((oracle_transform(t, 0.5) - phi(-0.2)).abs() < 1e-12);
    }

    #[test]
    fn emn_is_reproducible() {
        let cfg = SimConfig::default();
        assert_eq!(generate_emn_values(&cfg, 3), generate_emn_values(&cfg, 3));
        assert_ne!(generate_emn_values(&cfg, 3), generate_emn_values(&cfg, 4));
        let set = generate_emn(&cfg, 0);
        assert_eq!((set.n(), set.m()), (110, 200));
        assert_eq!(
            set.truth()
                .unwrap()
                .iter()
                .filter(|&&t| t == Truth::NonNull)
                .count(),
            10
        );
        assert!(oracle_pvalues(&StatisticSet::from_values(&[0.5], &[0.1]).unwrap(), &cfg).is_err());
    }

    #[test]
    fn rule_of_thumb() {
        assert_eq!(rule_of_thumb_m(110, 10, 0.2), 110);
        assert_eq!(rule_of_thumb_m(100, 10, 0.2), 100);
    }

    #[test]
    fn fisher_demo_degenerate_sizes() {
        let d = fisher_miscalibration_demo(1, 1, 20, 10, 5, Execution::Sequential).unwrap();
        assert!(d.perm_reject_rate <= 1.0);
        let r = permutation_global_values(
            &[0.3],
            &[0.7],
            &GlobalStatistic::Fisher,
            10,
            1,
            Execution::Sequential,
        )
        .unwrap();
        assert!(r.p_value == 0.5 || r.p_value == 1.0);
    }
}
