//! Test statistics and negative controls.
//!
//! Values are stored on an internal scale where a small statistic is
//! evidence against its null hypothesis. Statistics declared as
//! [`Orientation::LargeIsSignificant`] are negated once at construction and
//! negated back on export.

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    SmallIsSignificant,
    LargeIsSignificant,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::SmallIsSignificant => 1.0,
            Orientation::LargeIsSignificant => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Test,
    NegativeControl,
}

/// Simulation ground truth for an investigation hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    Null,
    NonNull,
}

/// A single statistic with its optional annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub id: String,
    /// Value on the internal small-is-significant scale.
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<String>,
    /// Raw `(treatment, control)` measurements.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paired: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Truth>,
}

impl Statistic {
    pub fn new(id: impl Into<String>, value: f64) -> Self {
        Statistic {
            id: id.into(),
            value,
            subgroup: None,
            paired: None,
            truth: None,
        }
    }

    pub fn with_subgroup(mut self, label: impl Into<String>) -> Self {
        self.subgroup = Some(label.into());
        self
    }

    pub fn with_paired(mut self, treatment: f64, control: f64) -> Self {
        self.paired = Some((treatment, control));
        self
    }

    pub fn with_truth(mut self, truth: Truth) -> Self {
        self.truth = Some(truth);
        self
    }
}

/// Investigation statistics together with negative-control statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatisticSet {
    investigation: Vec<Statistic>,
    negative_controls: Vec<Statistic>,
    orientation: Orientation,
}

#[derive(Deserialize)]
struct RawSet {
    investigation: Vec<Statistic>,
    negative_controls: Vec<Statistic>,
    orientation: Orientation,
}

impl StatisticSet {
    /// Build a set from statistics given on the user's scale. Values are
    /// negated when `orientation` is large-is-significant.
    pub fn new(
        investigation: Vec<Statistic>,
        negative_controls: Vec<Statistic>,
        orientation: Orientation,
    ) -> Result<Self> {
        let sign = orientation.sign();
        let flip = |mut s: Statistic| {
            s.value *= sign;
            s
        };
        Self::from_internal(
            investigation.into_iter().map(flip).collect(),
            negative_controls.into_iter().map(flip).collect(),
            orientation,
        )
    }

    /// Build a set whose values are already on the internal scale.
    pub fn from_internal(
        investigation: Vec<Statistic>,
        negative_controls: Vec<Statistic>,
        orientation: Orientation,
    ) -> Result<Self> {
        if investigation.is_empty() {
            return Err(Error::NoTestStatistics);
        }
        if negative_controls.is_empty() {
            return Err(Error::NoNegativeControls);
        }
        let mut seen = HashSet::with_capacity(investigation.len() + negative_controls.len());
        for s in investigation.iter().chain(&negative_controls) {
            if !s.value.is_finite() {
                return Err(Error::NonFinite { id: s.id.clone() });
            }
            if let Some((a, b)) = s.paired {
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::NonFinite { id: s.id.clone() });
                }
            }
            if !seen.insert(s.id.as_str()) {
                return Err(Error::DuplicateId(s.id.clone()));
            }
        }
        Ok(StatisticSet {
            investigation,
            negative_controls,
            orientation,
        })
    }

    /// Small-is-significant set with generated ids `t1..`, `nc1..`.
    pub fn from_values(test: &[f64], nc: &[f64]) -> Result<Self> {
        let inv = test
            .iter()
            .enumerate()
            .map(|(i, &v)| Statistic::new(format!("t{}", i + 1), v))
            .collect();
        let ncs = nc
            .iter()
            .enumerate()
            .map(|(i, &v)| Statistic::new(format!("nc{}", i + 1), v))
            .collect();
        Self::from_internal(inv, ncs, Orientation::SmallIsSignificant)
    }

    pub fn investigation(&self) -> &[Statistic] {
        &self.investigation
    }

    pub fn negative_controls(&self) -> &[Statistic] {
        &self.negative_controls
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Number of investigation hypotheses.
    pub fn n(&self) -> usize {
        self.investigation.len()
    }

    /// Number of negative controls.
    pub fn m(&self) -> usize {
        self.negative_controls.len()
    }

    pub fn test_values(&self) -> Vec<f64> {
        self.investigation.iter().map(|s| s.value).collect()
    }

    pub fn nc_values(&self) -> Vec<f64> {
        self.negative_controls.iter().map(|s| s.value).collect()
    }

    /// Negative-control values sorted ascending.
    pub fn sorted_nc(&self) -> Vec<f64> {
        let mut v = self.nc_values();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn test_ids(&self) -> Vec<String> {
        self.investigation.iter().map(|s| s.id.clone()).collect()
    }

    /// Ground truth aligned with the investigation statistics, if every
    /// investigation statistic carries a label.
    pub fn truth(&self) -> Option<Vec<Truth>> {
        self.investigation.iter().map(|s| s.truth).collect()
    }

    /// Convert an internal value back to the user's scale.
    pub fn to_user_scale(&self, value: f64) -> f64 {
        value * self.orientation.sign()
    }

    /// Apply `g` to every value on the internal scale.
    pub fn map_values(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        let apply = |s: &Statistic| Statistic {
            value: g(s.value),
            ..s.clone()
        };
        Self::from_internal(
            self.investigation.iter().map(apply).collect(),
            self.negative_controls.iter().map(apply).collect(),
            self.orientation,
        )
    }

    /// Break ties by adding seeded uniform noise smaller than a third of the
    /// smallest nonzero gap between distinct values. The relative order of
    /// distinct values is unchanged.
    pub fn jittered(&self, seed: u64) -> Self {
        let mut all: Vec<f64> = self
            .investigation
            .iter()
            .chain(&self.negative_controls)
            .map(|s| s.value)
            .collect();
        all.sort_by(f64::total_cmp);
        let gap = all
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|&d| d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let scale = all.iter().fold(1.0f64, |a, &v| a.max(v.abs()));
        let radius = if gap.is_finite() {
            gap / 3.0
        } else {
            scale * 1e-9
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut jitter = |s: &Statistic| Statistic {
            value: s.value + radius * (2.0 * rng.random::<f64>() - 1.0),
            ..s.clone()
        };
        let investigation = self.investigation.iter().map(&mut jitter).collect();
        let negative_controls = self.negative_controls.iter().map(&mut jitter).collect();
        StatisticSet {
            investigation,
            negative_controls,
            orientation: self.orientation,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parse a set previously written by [`StatisticSet::to_json`]. Values in
    /// JSON are on the internal scale.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawSet = serde_json::from_str(text)?;
        Self::from_internal(raw.investigation, raw.negative_controls, raw.orientation)
    }
}

/// A group of statistics sharing exactly the same value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TieGroup {
    pub value: f64,
    pub ids: Vec<String>,
    pub crosses_roles: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct TieReport {
    pub groups: Vec<TieGroup>,
    /// Number of tie groups containing both an investigation statistic and a
    /// negative control.
    pub count_cross: usize,
}

impl TieReport {
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

pub fn tie_report(set: &StatisticSet) -> TieReport {
    let mut all: Vec<(f64, &str, Role)> = set
        .investigation
        .iter()
        .map(|s| (s.value, s.id.as_str(), Role::Test))
        .chain(
            set.negative_controls
                .iter()
                .map(|s| (s.value, s.id.as_str(), Role::NegativeControl)),
        )
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut report = TieReport::default();
    for chunk in all.chunk_by(|a, b| a.0 == b.0) {
        if chunk.len() < 2 {
            continue;
        }
        let crosses = chunk.iter().any(|c| c.2 == Role::Test)
            && chunk.iter().any(|c| c.2 == Role::NegativeControl);
        report.count_cross += usize::from(crosses);
        report.groups.push(TieGroup {
            value: set.to_user_scale(chunk[0].0),
            ids: chunk.iter().map(|c| c.1.to_string()).collect(),
            crosses_roles: crosses,
        });
    }
    report
}

/// Column names used when reading a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub id: String,
    pub value: String,
    pub role: String,
    pub subgroup: String,
    pub treatment: String,
    pub control: String,
    pub truth: String,
    pub orientation: Orientation,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            id: "id".into(),
            value: "value".into(),
            role: "role".into(),
            subgroup: "subgroup".into(),
            treatment: "treatment".into(),
            control: "control".into(),
            truth: "truth".into(),
            orientation: Orientation::SmallIsSignificant,
        }
    }
}

impl CsvSchema {
    pub fn with_orientation(orientation: Orientation) -> Self {
        CsvSchema {
            orientation,
            ..Self::default()
        }
    }
}

fn parse_f64(field: &str, line: usize, column: &str) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Malformed {
        line,
        message: format!("column `{column}`: cannot parse `{field}` as a number"),
    })
}

/// Read a CSV with columns `id,value,role[,subgroup][,treatment][,control][,truth]`.
pub fn load_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<StatisticSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| find(name).ok_or_else(|| Error::MissingColumn(name.to_string()));
    let c_id = need(&schema.id)?;
    let c_value = need(&schema.value)?;
    let c_role = need(&schema.role)?;
    let c_sub = find(&schema.subgroup);
    let c_trt = find(&schema.treatment);
    let c_ctl = find(&schema.control);
    let c_truth = find(&schema.truth);

    let mut inv = Vec::new();
    let mut ncs = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let get = |c: usize| record.get(c).unwrap_or("");
        let opt = |c: Option<usize>| c.map(get).filter(|s| !s.is_empty());
        let id = get(c_id).to_string();
        if id.is_empty() {
            return Err(Error::Malformed {
                line,
                message: "empty id".into(),
            });
        }
        let mut stat = Statistic::new(id, parse_f64(get(c_value), line, &schema.value)?);
        stat.subgroup = opt(c_sub).map(str::to_string);
        match (opt(c_trt), opt(c_ctl)) {
            (Some(t), Some(c)) => {
                stat.paired = Some((
                    parse_f64(t, line, &schema.treatment)?,
                    parse_f64(c, line, &schema.control)?,
                ));
            }
            (None, None) => {}
            _ => {
                return Err(Error::Malformed {
                    line,
                    message: "treatment and control must be given together".into(),
                })
            }
        }
        if let Some(tok) = opt(c_truth) {
            stat.truth = Some(match tok {
                "null" => Truth::Null,
                "nonnull" => Truth::NonNull,
                _ => {
                    return Err(Error::UnknownTruth {
                        token: tok.to_string(),
                        line,
                    })
                }
            });
        }
        match get(c_role) {
            "test" => inv.push(stat),
            "nc" => ncs.push(stat),
            tok => {
                return Err(Error::UnknownRole {
                    token: tok.to_string(),
                    line,
                })
            }
        }
    }
    StatisticSet::new(inv, ncs, schema.orientation)
}

/// Write the set in the CSV layout read by [`load_csv`], on the user's scale.
/// Optional columns are emitted only when some statistic carries them.
pub fn write_csv<W: Write>(set: &StatisticSet, writer: W) -> Result<()> {
    let all = || set.investigation.iter().chain(&set.negative_controls);
    let has_sub = all().any(|s| s.subgroup.is_some());
    let has_pair = all().any(|s| s.paired.is_some());
    let has_truth = all().any(|s| s.truth.is_some());

    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["id", "value", "role"];
    if has_sub {
        header.push("subgroup");
    }
    if has_pair {
        header.extend(["treatment", "control"]);
    }
    if has_truth {
        header.push("truth");
    }
    wtr.write_record(&header)?;
    let roles = set
        .investigation
        .iter()
        .map(|s| (s, "test"))
        .chain(set.negative_controls.iter().map(|s| (s, "nc")));
    for (s, role) in roles {
        let mut row = vec![
            s.id.clone(),
            set.to_user_scale(s.value).to_string(),
            role.to_string(),
        ];
        if has_sub {
            row.push(s.subgroup.clone().unwrap_or_default());
        }
        if has_pair {
            match s.paired {
                Some((t, c)) => row.extend([t.to_string(), c.to_string()]),
                None => row.extend([String::new(), String::new()]),
            }
        }
        if has_truth {
            row.push(
                match s.truth {
                    Some(Truth::Null) => "null",
                    Some(Truth::NonNull) => "nonnull",
                    None => "",
                }
                .to_string(),
            );
        }
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Negative-control values grouped by subgroup label.
pub fn nc_subgroups(set: &StatisticSet) -> BTreeMap<String, Vec<f64>> {
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for s in &set.negative_controls {
        if let Some(label) = &s.subgroup {
            groups.entry(label.clone()).or_default().push(s.value);
        }
    }
    groups
}
