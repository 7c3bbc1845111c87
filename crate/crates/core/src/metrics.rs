//! 2×2 contingency tables and the diagnostic metric suite.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::consensus::ReferenceLabeling;
use crate::data::{Label, LabelScheme};
use crate::error::{Error, Result};
use crate::resample::{bootstrap_replicates, percentile_interval, BootstrapSpec, IntervalEstimate};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ContingencyTable {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Adds one `(predicted positive, reference positive)` observation.
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = &'a (bool, bool)>) -> Self {
        let mut t = Self::default();
        for &(p, a) in pairs {
            t.record(p, a);
        }
        t
    }

    /// The same table with the other class treated as positive.
    pub fn swap_classes(&self) -> Self {
        Self::new(self.tn, self.fn_, self.fp, self.tp)
    }

    /// One `(predicted, actual)` pair per counted visit, in tp, fp, fn, tn order.
    pub fn expand(&self) -> Vec<(bool, bool)> {
        let mut v = Vec::with_capacity(self.total() as usize);
        for (n, pair) in [
            (self.tp, (true, true)),
            (self.fp, (true, false)),
            (self.fn_, (false, true)),
            (self.tn, (false, false)),
        ] {
            v.extend(std::iter::repeat_n(pair, n as usize));
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Sensitivity,
    Specificity,
    Ppv,
    Npv,
    F1,
    BalancedAccuracy,
    Mcc,
    Jaccard,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::Sensitivity,
        Metric::Specificity,
        Metric::Ppv,
        Metric::Npv,
        Metric::F1,
        Metric::BalancedAccuracy,
        Metric::Mcc,
        Metric::Jaccard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Sensitivity => "sensitivity",
            Metric::Specificity => "specificity",
            Metric::Ppv => "ppv",
            Metric::Npv => "npv",
            Metric::F1 => "f1",
            Metric::BalancedAccuracy => "balanced_accuracy",
            Metric::Mcc => "mcc",
            Metric::Jaccard => "jaccard",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The eight metrics; `None` marks a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricSuite {
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
    pub f1: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub mcc: Option<f64>,
    pub jaccard: Option<f64>,
}

impl MetricSuite {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Sensitivity => self.sensitivity,
            Metric::Specificity => self.specificity,
            Metric::Ppv => self.ppv,
            Metric::Npv => self.npv,
            Metric::F1 => self.f1,
            Metric::BalancedAccuracy => self.balanced_accuracy,
            Metric::Mcc => self.mcc,
            Metric::Jaccard => self.jaccard,
        }
    }

    /// `{metric_name: {estimate: number|null}}` in the fixed metric order.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for metric in Metric::ALL {
            m.insert(metric.name().into(), json!({ "estimate": self.get(metric) }));
        }
        Value::Object(m)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Metric suite for a contingency table. Fails only on an empty table.
pub fn compute_metrics(c: &ContingencyTable) -> Result<MetricSuite> {
    if c.total() == 0 {
        return Err(Error::Empty("contingency table has no observations".into()));
    }
    Ok(metrics_unchecked(c))
}

pub(crate) fn metrics_unchecked(c: &ContingencyTable) -> MetricSuite {
    let ContingencyTable { tp, fp, fn_, tn } = *c;
    let sensitivity = ratio(tp, tp + fn_);
    let specificity = ratio(tn, tn + fp);
    let ppv = ratio(tp, tp + fp);
    let npv = ratio(tn, tn + fn_);
    let f1 = match (ppv, sensitivity) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        _ => None,
    };
    let balanced_accuracy = match (sensitivity, specificity) {
        (Some(a), Some(b)) => Some((a + b) / 2.0),
        _ => None,
    };
    let (tp_f, fp_f, fn_f, tn_f) = (tp as f64, fp as f64, fn_ as f64, tn as f64);
    let den = (tp_f + fp_f) * (tp_f + fn_f) * (tn_f + fp_f) * (tn_f + fn_f);
    let mcc = (den > 0.0).then(|| ((tp_f * tn_f - fp_f * fn_f) / den.sqrt()).clamp(-1.0, 1.0));
    MetricSuite {
        sensitivity,
        specificity,
        ppv,
        npv,
        f1,
        balanced_accuracy,
        mcc,
        jaccard: ratio(tp, tp + fp + fn_),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencyBuild {
    pub table: ContingencyTable,
    /// `(predicted positive, reference positive)` per counted visit, in reference order.
    pub pairs: Vec<(bool, bool)>,
    pub skipped_no_prediction: usize,
    pub skipped_no_consensus: usize,
    pub skipped_unknown_visit: usize,
}

/// Joins predictions to consensus references and tallies the 2×2 table.
///
/// Any label other than the scheme's positive class counts as negative.
pub fn build_contingency<'a>(
    predictions: impl IntoIterator<Item = (&'a str, Label)>,
    reference: &ReferenceLabeling,
    scheme: &LabelScheme,
) -> Result<ContingencyBuild> {
    if scheme != reference.scheme() {
        return Err(Error::invalid("predictions and reference use different label schemes"));
    }
    let predictions: HashMap<&str, Label> = predictions.into_iter().collect();
    let mut pairs = Vec::new();
    let (mut no_prediction, mut no_consensus) = (0, 0);
    let mut known = 0;
    for v in reference.visits() {
        let pred = predictions.get(v.visit_id.as_str());
        if pred.is_some() {
            known += 1;
        }
        match (pred, v.reference) {
            (Some(&p), Some(r)) => pairs.push((scheme.is_positive(p), scheme.is_positive(r))),
            (None, _) => no_prediction += 1,
            (Some(_), None) => no_consensus += 1,
        }
    }
    if pairs.is_empty() {
        return Err(Error::Empty(
            "no visit has both a prediction and a consensus reference".into(),
        ));
    }
    Ok(ContingencyBuild {
        table: ContingencyTable::from_pairs(&pairs),
        pairs,
        skipped_no_prediction: no_prediction,
        skipped_no_consensus: no_consensus,
        skipped_unknown_visit: predictions.len() - known,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricInterval {
    pub metric: Metric,
    pub estimate: Option<f64>,
    /// Absent when the full-data estimate is undefined or every replicate was.
    pub interval: Option<IntervalEstimate>,
}

/// Percentile bootstrap intervals for all eight metrics, resampling visits.
pub fn bootstrap_metrics(pairs: &[(bool, bool)], spec: &BootstrapSpec) -> Result<Vec<MetricInterval>> {
    spec.validate()?;
    let full = compute_metrics(&ContingencyTable::from_pairs(pairs))?;
    let replicates: Vec<MetricSuite> = bootstrap_replicates(pairs.len(), spec, |idx| {
        metrics_unchecked(&ContingencyTable::from_pairs(idx.iter().map(|&i| &pairs[i])))
    });
    Ok(Metric::ALL
        .into_iter()
        .map(|metric| {
            let estimate = full.get(metric);
            let interval = estimate.and_then(|est| {
                percentile_interval(est, replicates.iter().map(|r| r.get(metric)), spec.confidence).ok()
            });
            MetricInterval {
                metric,
                estimate,
                interval,
            }
        })
        .collect())
}
