//! Global tests and familywise / false-discovery procedures on p-values.
//!
//! Every threshold comparison `p_(i) <= level * b_i / a_i` is decided
//! exactly through [`PValueVector::scaled_le`].

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{StatisticSet, Truth};
use crate::error::{Error, Result};
use crate::exact::Level;
use crate::par::Execution;
use crate::ranc::{PValueKind, PValueVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Procedure {
    Bonferroni,
    Holm,
    Hochberg,
    LehmannRomano,
    BenjaminiHochberg,
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Procedure::Bonferroni => "bonferroni",
            Procedure::Holm => "holm",
            Procedure::Hochberg => "hochberg",
            Procedure::LehmannRomano => "lr",
            Procedure::BenjaminiHochberg => "bh",
        })
    }
}

/// One line of the audit trail: the `rank`-th smallest p-value and the
/// boundary it was compared against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub rank: usize,
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub p: f64,
    pub boundary: f64,
    pub below_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectionResult {
    pub procedure: Procedure,
    pub level: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Rejected positions in ascending p-value order.
    pub rejected: Vec<usize>,
    /// Ids of the rejected hypotheses; empty when the p-values carry no ids.
    pub rejected_ids: Vec<String>,
    /// Largest rejected p-value, if any.
    pub threshold: Option<f64>,
    pub audit: Vec<AuditRow>,
}

/// Outcome counts against known truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outcome {
    pub rejections: usize,
    pub false_rejections: usize,
    pub true_rejections: usize,
    pub non_nulls: usize,
}

impl Outcome {
    pub fn from_mask(rejected: &[usize], truth: &[Truth]) -> Self {
        let false_rejections = rejected
            .iter()
            .filter(|&&i| truth[i] == Truth::Null)
            .count();
        Outcome {
            rejections: rejected.len(),
            false_rejections,
            true_rejections: rejected.len() - false_rejections,
            non_nulls: truth.iter().filter(|&&t| t == Truth::NonNull).count(),
        }
    }

    /// False discovery proportion `V / (R v 1)`.
    pub fn fdp(&self) -> f64 {
        self.false_rejections as f64 / self.rejections.max(1) as f64
    }

    /// True positive rate `S / n1`, zero when there are no non-nulls.
    pub fn tpr(&self) -> f64 {
        if self.non_nulls == 0 {
            0.0
        } else {
            self.true_rejections as f64 / self.non_nulls as f64
        }
    }
}

impl RejectionResult {
    pub fn count(&self) -> usize {
        self.rejected.len()
    }

    pub fn outcome(&self, truth: &[Truth]) -> Outcome {
        Outcome::from_mask(&self.rejected, truth)
    }
}

fn check_level(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must lie in (0, 1), got {x}"
        )))
    }
}

fn check(p: &PValueVector, level: f64) -> Result<()> {
    if p.is_empty() {
        return Err(Error::EmptyPValues);
    }
    check_level("level", level)
}

/// Rejects the global null when `min p <= alpha / n`.
pub fn bonferroni_global(p: &PValueVector, alpha: f64) -> Result<bool> {
    check(p, alpha)?;
    let level = Level::new(alpha);
    let n = p.len() as u64;
    Ok((0..p.len()).any(|i| p.scaled_le(i, n, &level, 1)))
}

/// Rejects the global null when `p_(i) <= i alpha / n` for some `i`.
pub fn simes_global(p: &PValueVector, alpha: f64) -> Result<bool> {
    check(p, alpha)?;
    let level = Level::new(alpha);
    let n = p.len() as u64;
    Ok(p.order()
        .iter()
        .enumerate()
        .any(|(r, &i)| p.scaled_le(i, n, &level, r as u64 + 1)))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    StepDown,
    StepUp,
}

/// Shared driver: `boundary(rank)` returns `(a, b)` meaning
/// `p_(rank) <= level * b / a`.
fn stepwise(
    p: &PValueVector,
    level: f64,
    procedure: Procedure,
    gamma: Option<f64>,
    direction: Direction,
    boundary: impl Fn(usize) -> (u64, u64),
) -> RejectionResult {
    let lvl = Level::new(level);
    let order = p.order();
    let mut audit = Vec::with_capacity(order.len());
    for (r, &i) in order.iter().enumerate() {
        let (a, b) = boundary(r + 1);
        audit.push(AuditRow {
            rank: r + 1,
            index: i,
            id: p.id(i),
            p: p.values[i],
            boundary: level * b as f64 / a as f64,
            below_boundary: p.scaled_le(i, a, &lvl, b),
        });
    }
    let k = match direction {
        Direction::StepDown => audit.iter().take_while(|row| row.below_boundary).count(),
        Direction::StepUp => audit
            .iter()
            .rposition(|row| row.below_boundary)
            .map_or(0, |r| r + 1),
    };
    let rejected: Vec<usize> = order[..k].to_vec();
    RejectionResult {
        procedure,
        level,
        gamma,
        rejected_ids: rejected.iter().filter_map(|&i| p.id(i)).collect(),
        threshold: k.checked_sub(1).map(|r| p.values[order[r]]),
        rejected,
        audit,
    }
}

/// Rejects every hypothesis with `p <= alpha / n`.
pub fn bonferroni(p: &PValueVector, alpha: f64) -> Result<RejectionResult> {
    check(p, alpha)?;
    let n = p.len() as u64;
    Ok(stepwise(
        p,
        alpha,
        Procedure::Bonferroni,
        None,
        Direction::StepDown,
        |_| (n, 1),
    ))
}

/// Holm's step-down procedure with boundaries `alpha / (n - i + 1)`.
pub fn holm(p: &PValueVector, alpha: f64) -> Result<RejectionResult> {
    check(p, alpha)?;
    let n = p.len() as u64;
    Ok(stepwise(
        p,
        alpha,
        Procedure::Holm,
        None,
        Direction::StepDown,
        |i| (n - i as u64 + 1, 1),
    ))
}

/// Hochberg's step-up procedure on Holm's boundaries.
pub fn hochberg(p: &PValueVector, alpha: f64) -> Result<RejectionResult> {
    check(p, alpha)?;
    let n = p.len() as u64;
    Ok(stepwise(
        p,
        alpha,
        Procedure::Hochberg,
        None,
        Direction::StepUp,
        |i| (n - i as u64 + 1, 1),
    ))
}

/// `floor(gamma * i)`, exactly.
fn floor_product(gamma: &Level, i: u64) -> u64 {
    let mut k = (gamma.value() * i as f64).floor().max(0.0) as u64;
    while k > 0 && !gamma.le_scaled(1.0, k as i128, i as i128) {
        k -= 1;
    }
    while gamma.le_scaled(1.0, k as i128 + 1, i as i128) {
        k += 1;
    }
    k
}

/// Lehmann–Romano step-down procedure controlling `P(FDP > gamma) <= alpha`,
/// with boundaries `(floor(gamma i) + 1) alpha / (n + floor(gamma i) + 1 - i)`.
pub fn lehmann_romano(p: &PValueVector, alpha: f64, gamma: f64) -> Result<RejectionResult> {
    check(p, alpha)?;
    check_level("gamma", gamma)?;
    let n = p.len() as u64;
    let g = Level::new(gamma);
    Ok(stepwise(
        p,
        alpha,
        Procedure::LehmannRomano,
        Some(gamma),
        Direction::StepDown,
        |i| {
            let f = floor_product(&g, i as u64);
            (n + f + 1 - i as u64, f + 1)
        },
    ))
}

/// Benjamini–Hochberg step-up procedure with boundaries `i q / n`.
pub fn bh(p: &PValueVector, q: f64) -> Result<RejectionResult> {
    check(p, q)?;
    let n = p.len() as u64;
    Ok(stepwise(
        p,
        q,
        Procedure::BenjaminiHochberg,
        None,
        Direction::StepUp,
        |i| (n, i as u64),
    ))
}

/// Dispatch by procedure name. `gamma` is used only by Lehmann–Romano.
pub fn run_procedure(
    procedure: Procedure,
    p: &PValueVector,
    level: f64,
    gamma: f64,
) -> Result<RejectionResult> {
    match procedure {
        Procedure::Bonferroni => bonferroni(p, level),
        Procedure::Holm => holm(p, level),
        Procedure::Hochberg => hochberg(p, level),
        Procedure::LehmannRomano => lehmann_romano(p, level, gamma),
        Procedure::BenjaminiHochberg => bh(p, level),
    }
}

/// Fisher's combination statistic `-2 sum log p`.
///
/// Its chi-square calibration is invalid for RANC p-values, which share the
/// same negative controls; use [`permutation_global`] to calibrate it.
pub fn fisher_global_statistic(p: &PValueVector) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::EmptyPValues);
    }
    if let Some(i) = p.values.iter().position(|&x| x <= 0.0) {
        return Err(Error::ZeroPValue(i));
    }
    Ok(-2.0 * p.values.iter().map(|x| x.ln()).sum::<f64>())
}

/// Which tail of a global statistic counts as extreme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    SmallIsExtreme,
    LargeIsExtreme,
}

/// A function of the set of investigation p-values. Custom statistics
/// receive the RANC p-values sorted ascending.
pub enum GlobalStatistic {
    /// `n min_i p_(i) / i`, small is extreme.
    SimesMinRatio,
    /// `-2 sum log p_i`, large is extreme.
    Fisher,
    Custom {
        name: String,
        tail: Tail,
        f: Box<dyn Fn(&PValueVector) -> Option<f64> + Send + Sync>,
    },
}

impl GlobalStatistic {
    pub fn tail(&self) -> Tail {
        match self {
            GlobalStatistic::SimesMinRatio => Tail::SmallIsExtreme,
            GlobalStatistic::Fisher => Tail::LargeIsExtreme,
            GlobalStatistic::Custom { tail, .. } => *tail,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            GlobalStatistic::SimesMinRatio => "simes_min_ratio",
            GlobalStatistic::Fisher => "fisher",
            GlobalStatistic::Custom { name, .. } => name,
        }
    }

    /// Evaluate on ascending RANC numerators over denominator `m + 1`.
    /// `ln_p[k]` holds `ln(k / (m + 1))`.
    fn eval_sorted(&self, k: &[u64], m: usize, ln_p: &[f64]) -> Option<f64> {
        let d = (m + 1) as f64;
        match self {
            GlobalStatistic::SimesMinRatio => {
                // argmin of k_(i) / i, compared as rationals.
                let mut best = (k[0], 1u64);
                for (r, &kr) in k.iter().enumerate().skip(1) {
                    let i = r as u64 + 1;
                    if (kr as u128) * (best.1 as u128) < (best.0 as u128) * (i as u128) {
                        best = (kr, i);
                    }
                }
                Some(k.len() as f64 * best.0 as f64 / (best.1 as f64 * d))
            }
            GlobalStatistic::Fisher => {
                Some(-2.0 * k.iter().map(|&x| ln_p[x as usize]).sum::<f64>())
            }
            GlobalStatistic::Custom { f, .. } => f(&PValueVector::from_grid(
                k.to_vec(),
                m as u64 + 1,
                PValueKind::Ranc,
            )),
        }
    }
}

/// `n min_i p_(i) / i` for an arbitrary p-value vector.
pub fn simes_min_ratio(p: &PValueVector) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::EmptyPValues);
    }
    let n = p.len() as f64;
    Ok(p.order()
        .iter()
        .enumerate()
        .map(|(r, &i)| n * p.values[i] / (r + 1) as f64)
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PermutationResult {
    pub statistic: String,
    pub observed: f64,
    pub p_value: f64,
    /// Statistic values under the sampled (or enumerated) label permutations.
    pub null_samples: Vec<f64>,
    /// True when every relabelling was enumerated instead of sampled.
    pub enumerated: bool,
}

/// Permutation layout shared across relabellings: all `n + m` values in
/// ascending order with tie-group boundaries.
struct Pool {
    n: usize,
    m: usize,
    /// `group[r]` is the tie group of the `r`-th smallest value.
    group: Vec<usize>,
    /// Rank position of each original statistic (test first, then nc).
    rank_of: Vec<usize>,
}

impl Pool {
    fn new(test: &[f64], nc: &[f64]) -> Self {
        let all: Vec<f64> = test.iter().chain(nc).copied().collect();
        let mut idx: Vec<usize> = (0..all.len()).collect();
        idx.sort_by(|&a, &b| all[a].total_cmp(&all[b]));
        let mut rank_of = vec![0; all.len()];
        let mut group = Vec::with_capacity(all.len());
        let mut g = 0;
        for (r, &i) in idx.iter().enumerate() {
            if r > 0 && all[idx[r - 1]] != all[i] {
                g += 1;
            }
            group.push(g);
            rank_of[i] = r;
        }
        Pool {
            n: test.len(),
            m: nc.len(),
            group,
            rank_of,
        }
    }

    /// Sorted RANC numerators when the ranks flagged in `is_test` are the
    /// investigation statistics.
    fn numerators(&self, is_test: &[bool], out: &mut Vec<u64>) {
        out.clear();
        let total = self.group.len();
        let mut nc_le = 0u64;
        let mut r = 0;
        while r < total {
            let g = self.group[r];
            let mut end = r;
            while end < total && self.group[end] == g {
                nc_le += u64::from(!is_test[end]);
                end += 1;
            }
            for flag in &is_test[r..end] {
                if *flag {
                    out.push(1 + nc_le);
                }
            }
            r = end;
        }
    }
}

fn binomial_capped(n: usize, k: usize, cap: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > cap {
            return None;
        }
    }
    Some(c)
}

const ENUMERATION_LIMIT: u128 = 1_000_000;

/// Permutation calibration of a global statistic computed from RANC
/// p-values, under exchangeability of all `n + m` statistics.
///
/// When the number of distinct relabellings is at most both `10^6` and
/// `B + 1`, all of them are enumerated and the p-value is exact. Otherwise
/// `B` relabellings are sampled, each from its own stream seeded by
/// `(seed, b)`, and the p-value is `(1 + #{extreme}) / (1 + B)`.
pub fn permutation_global(
    set: &StatisticSet,
    statistic: &GlobalStatistic,
    b: usize,
    seed: u64,
    exec: Execution,
) -> Result<PermutationResult> {
    permutation_global_values(
        &set.test_values(),
        &set.nc_values(),
        statistic,
        b,
        seed,
        exec,
    )
}

/// [`permutation_global`] on raw internal-scale values.
pub fn permutation_global_values(
    test: &[f64],
    nc: &[f64],
    statistic: &GlobalStatistic,
    b: usize,
    seed: u64,
    exec: Execution,
) -> Result<PermutationResult> {
    if b == 0 {
        return Err(Error::InvalidParameter(
            "number of permutations must be at least 1".into(),
        ));
    }
    if test.is_empty() {
        return Err(Error::NoTestStatistics);
    }
    if nc.is_empty() {
        return Err(Error::NoNegativeControls);
    }
    let pool = Pool::new(test, nc);
    let (n, m) = (pool.n, pool.m);
    let total = n + m;

    let ln_p: Vec<f64> = (0..=m + 1)
        .map(|k| (k as f64 / (m + 1) as f64).ln())
        .collect();
    let eval = |is_test: &[bool], buf: &mut Vec<u64>| -> Result<f64> {
        pool.numerators(is_test, buf);
        statistic
            .eval_sorted(buf, m, &ln_p)
            .ok_or(Error::UndefinedStatistic)
    };

    let mut observed_flags = vec![false; total];
    for i in 0..n {
        observed_flags[pool.rank_of[i]] = true;
    }
    let observed = eval(&observed_flags, &mut Vec::with_capacity(n))?;

    let cap = ENUMERATION_LIMIT.min(b as u128 + 1);
    let enumerated = binomial_capped(total, n, cap).is_some();
    let null_samples: Vec<f64> = if enumerated {
        let mut out = Vec::new();
        let mut comb: Vec<usize> = (0..n).collect();
        let mut flags = vec![false; total];
        let mut buf = Vec::with_capacity(n);
        loop {
            flags.iter_mut().for_each(|f| *f = false);
            for &c in &comb {
                flags[c] = true;
            }
            out.push(eval(&flags, &mut buf)?);
            // Next combination in lexicographic order.
            let mut i = n;
            while i > 0 && comb[i - 1] == total - n + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            comb[i - 1] += 1;
            for j in i..n {
                comb[j] = comb[j - 1] + 1;
            }
        }
        out
    } else {
        let draws = exec.map(b, |rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64);
            let mut perm: Vec<usize> = (0..total).collect();
            for i in 0..n {
                let j = rng.random_range(i..total);
                perm.swap(i, j);
            }
            let mut flags = vec![false; total];
            for &r in &perm[..n] {
                flags[r] = true;
            }
            eval(&flags, &mut Vec::with_capacity(n))
        });
        draws.into_iter().collect::<Result<Vec<f64>>>()?
    };

    let extreme = |s: f64| match statistic.tail() {
        Tail::SmallIsExtreme => s <= observed,
        Tail::LargeIsExtreme => s >= observed,
    };
    let hits = null_samples.iter().filter(|&&s| extreme(s)).count();
    let p_value = if enumerated {
        hits as f64 / null_samples.len() as f64
    } else {
        (1 + hits) as f64 / (1 + b) as f64
    };
    Ok(PermutationResult {
        statistic: statistic.name().to_string(),
        observed,
        p_value,
        null_samples,
        enumerated,
    })
}
