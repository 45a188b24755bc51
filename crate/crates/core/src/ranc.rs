//! Rank-among-negative-control (RANC) p-values.

use serde::{Deserialize, Serialize};

use crate::data::{tie_report, StatisticSet};
use crate::exact::Level;

/// Kind of p-value stored in a [`PValueVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueKind {
    Ranc,
    ModifiedRanc,
    External,
}

/// P-values aligned with the investigation statistics. Small values are
/// evidence against the null.
///
/// Rank-based p-values additionally keep their exact representation
/// `numerators[i] / denominator`, which threshold comparisons use instead
/// of the rounded floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueVector {
    pub values: Vec<f64>,
    pub kind: PValueKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ids: Option<Vec<String>>,
    #[serde(skip)]
    grid: Option<(Vec<u64>, u64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PValueVector {
    /// Wrap arbitrary p-values.
    pub fn external(values: Vec<f64>) -> Self {
        PValueVector {
            values,
            kind: PValueKind::External,
            ids: None,
            grid: None,
            warnings: Vec::new(),
        }
    }

    /// P-values `numerators[i] / denominator`.
    pub fn from_grid(numerators: Vec<u64>, denominator: u64, kind: PValueKind) -> Self {
        let d = denominator as f64;
        PValueVector {
            values: numerators.iter().map(|&k| k as f64 / d).collect(),
            kind,
            ids: None,
            grid: Some((numerators, denominator)),
            warnings: Vec::new(),
        }
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Self {
        debug_assert_eq!(ids.len(), self.values.len());
        self.ids = Some(ids);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Exact `(numerators, denominator)` for rank-based p-values.
    pub fn grid(&self) -> Option<(&[u64], u64)> {
        self.grid.as_ref().map(|(k, d)| (k.as_slice(), *d))
    }

    /// Exactly decide `p[i] * a <= level * b`. External p-values are read
    /// as typed decimals, like levels.
    pub fn scaled_le(&self, i: usize, a: u64, level: &Level, b: u64) -> bool {
        match &self.grid {
            Some((k, d)) => level.le_scaled(1.0, k[i] as i128 * a as i128, b as i128 * *d as i128),
            None => {
                Level::new(self.values[i]).cmp_with(a as i128, level, b as i128)
                    != std::cmp::Ordering::Greater
            }
        }
    }

    /// Indices sorted by ascending p-value; ties are ordered by id when ids
    /// are present and by position otherwise.
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        let key_cmp = |a: &usize, b: &usize| match &self.grid {
            Some((k, _)) => k[*a].cmp(&k[*b]),
            None => self.values[*a].total_cmp(&self.values[*b]),
        };
        match &self.ids {
            Some(ids) => idx.sort_by(|a, b| key_cmp(a, b).then_with(|| ids[*a].cmp(&ids[*b]))),
            None => idx.sort_by(key_cmp),
        }
        idx
    }

    pub fn id(&self, i: usize) -> Option<String> {
        self.ids.as_ref().map(|ids| ids[i].clone())
    }
}

/// Negative-control empirical null: the ECDF of the controls augmented with
/// a point at minus infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalNull {
    sorted: Vec<f64>,
}

impl EmpiricalNull {
    pub fn new(nc: &[f64]) -> Self {
        let mut sorted = nc.to_vec();
        sorted.sort_by(f64::total_cmp);
        EmpiricalNull { sorted }
    }

    /// Build from values already sorted ascending.
    pub fn from_sorted(sorted: Vec<f64>) -> Self {
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        EmpiricalNull { sorted }
    }

    pub fn m(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// `#{j : T_j <= t}`.
    pub fn count_le(&self, t: f64) -> usize {
        self.sorted.partition_point(|&x| x <= t)
    }

    /// `(1 + #{j : T_j <= t}) / (1 + m)`.
    pub fn cdf(&self, t: f64) -> f64 {
        (1 + self.count_le(t)) as f64 / (1 + self.m()) as f64
    }
}

/// `(1 + #{j : nc_j <= t}) / (1 + m)` for ascending `nc_sorted`.
pub fn empirical_null_cdf(nc_sorted: &[f64], t: f64) -> f64 {
    let count = nc_sorted.partition_point(|&x| x <= t);
    (1 + count) as f64 / (1 + nc_sorted.len()) as f64
}

/// RANC p-values for raw values against an empirical null.
pub fn ranc_from_values(test: &[f64], null: &EmpiricalNull) -> PValueVector {
    let m = null.m() as u64;
    let k = test.iter().map(|&t| 1 + null.count_le(t) as u64).collect();
    PValueVector::from_grid(k, m + 1, PValueKind::Ranc)
}

/// Modified RANC p-values `min((2 + #{nc <= t}) / (1 + m), 1)`.
pub fn modified_ranc_from_values(test: &[f64], null: &EmpiricalNull) -> PValueVector {
    let m = null.m() as u64;
    let k = test
        .iter()
        .map(|&t| (2 + null.count_le(t) as u64).min(m + 1))
        .collect();
    PValueVector::from_grid(k, m + 1, PValueKind::ModifiedRanc)
}

fn attach(set: &StatisticSet, mut p: PValueVector) -> PValueVector {
    let ties = tie_report(set);
    if ties.count_cross > 0 {
        p.warnings.push(format!(
            "{} tie group(s) span investigation and negative-control statistics; \
             ties are counted as below-or-equal",
            ties.count_cross
        ));
    }
    p.with_ids(set.test_ids())
}

pub fn ranc_pvalues(set: &StatisticSet) -> PValueVector {
    let null = EmpiricalNull::from_sorted(set.sorted_nc());
    attach(set, ranc_from_values(&set.test_values(), &null))
}

pub fn modified_ranc_pvalues(set: &StatisticSet) -> PValueVector {
    let null = EmpiricalNull::from_sorted(set.sorted_nc());
    attach(set, modified_ranc_from_values(&set.test_values(), &null))
}
