use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::AnnotationTable;
use crate::error::{Error, Result};

/// Parameters are kept inside `[EPSILON, 1 − EPSILON]`.
pub const EPSILON: f64 = 1e-6;

pub(crate) fn clamp_unit(x: f64) -> f64 {
    x.clamp(EPSILON, 1.0 - EPSILON)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vote {
    Positive,
    Negative,
    Missing,
}

/// Distinct binary response vectors over a fixed rater set, with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VotePatternTable {
    raters: Vec<String>,
    patterns: Vec<(Vec<Vote>, usize)>,
}

impl VotePatternTable {
    pub fn new(raters: Vec<String>, patterns: Vec<(Vec<Vote>, usize)>) -> Result<Self> {
        if raters.is_empty() {
            return Err(Error::invalid("vote patterns need at least one rater"));
        }
        for (votes, count) in &patterns {
            if votes.len() != raters.len() {
                return Err(Error::invalid(format!(
                    "pattern of length {} for {} raters",
                    votes.len(),
                    raters.len()
                )));
            }
            if *count == 0 {
                return Err(Error::invalid("pattern counts must be at least 1"));
            }
        }
        Ok(Self { raters, patterns })
    }

    /// Binarizes a panel: the scheme's positive class against everything else.
    /// Identical response vectors are merged; patterns come out sorted.
    pub fn from_table(table: &AnnotationTable) -> Self {
        let scheme = table.scheme();
        let mut grouped: BTreeMap<Vec<Vote>, usize> = BTreeMap::new();
        for (_, row) in table.rows() {
            let votes = row
                .iter()
                .map(|l| match l {
                    Some(l) if scheme.is_positive(*l) => Vote::Positive,
                    Some(_) => Vote::Negative,
                    None => Vote::Missing,
                })
                .collect();
            *grouped.entry(votes).or_default() += 1;
        }
        Self {
            raters: table.raters().to_vec(),
            patterns: grouped.into_iter().collect(),
        }
    }

    pub fn raters(&self) -> &[String] {
        &self.raters
    }

    pub fn n_raters(&self) -> usize {
        self.raters.len()
    }

    pub fn patterns(&self) -> &[(Vec<Vote>, usize)] {
        &self.patterns
    }

    pub fn total(&self) -> usize {
        self.patterns.iter().map(|p| p.1).sum()
    }

    /// Pattern index of every unit, each pattern repeated `count` times.
    pub fn expand(&self) -> Vec<usize> {
        self.patterns
            .iter()
            .enumerate()
            .flat_map(|(i, (_, c))| std::iter::repeat_n(i, *c))
            .collect()
    }

    /// Table with the given multiplicity per pattern; zero counts are dropped.
    pub fn reweight(&self, counts: &[usize]) -> Self {
        let patterns = self
            .patterns
            .iter()
            .zip(counts)
            .filter(|(_, &c)| c > 0)
            .map(|((v, _), &c)| (v.clone(), c))
            .collect();
        Self {
            raters: self.raters.clone(),
            patterns,
        }
    }

    /// Same data with raters reordered by `order`.
    pub fn permute_raters(&self, order: &[usize]) -> Self {
        Self {
            raters: order.iter().map(|&i| self.raters[i].clone()).collect(),
            patterns: self
                .patterns
                .iter()
                .map(|(v, c)| (order.iter().map(|&i| v[i]).collect(), *c))
                .collect(),
        }
    }

    pub(crate) fn rater_has_votes(&self, r: usize) -> bool {
        self.patterns.iter().any(|(v, _)| v[r] != Vote::Missing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RaterAccuracy {
    pub sensitivity: f64,
    pub specificity: f64,
}

impl RaterAccuracy {
    pub fn new(sensitivity: f64, specificity: f64) -> Self {
        Self {
            sensitivity,
            specificity,
        }
    }
}

/// Prevalence plus per-rater sensitivity and specificity under conditional
/// independence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentClassModel {
    pub prevalence: f64,
    pub raters: Vec<RaterAccuracy>,
}

impl LatentClassModel {
    pub fn new(prevalence: f64, raters: Vec<RaterAccuracy>) -> Self {
        Self { prevalence, raters }
    }

    pub fn validate(&self) -> Result<()> {
        let inside = |x: f64| x > 0.0 && x < 1.0;
        if !inside(self.prevalence) {
            return Err(Error::invalid(format!("prevalence {} outside (0, 1)", self.prevalence)));
        }
        for (i, r) in self.raters.iter().enumerate() {
            if !inside(r.sensitivity) || !inside(r.specificity) {
                return Err(Error::invalid(format!("rater {i} has a rate outside (0, 1)")));
            }
        }
        Ok(())
    }

    pub fn clamped(mut self) -> Self {
        self.prevalence = clamp_unit(self.prevalence);
        for r in &mut self.raters {
            r.sensitivity = clamp_unit(r.sensitivity);
            r.specificity = clamp_unit(r.specificity);
        }
        self
    }

    /// The label-switched twin with identical likelihood:
    /// `π → 1−π`, `se → 1−sp`, `sp → 1−se`.
    pub fn swap_classes(&self) -> Self {
        Self {
            prevalence: 1.0 - self.prevalence,
            raters: self
                .raters
                .iter()
                .map(|r| RaterAccuracy::new(1.0 - r.specificity, 1.0 - r.sensitivity))
                .collect(),
        }
    }

    /// Mean of `se + sp` over raters; at least 1 in canonical orientation.
    pub fn mean_youden_sum(&self) -> f64 {
        self.raters.iter().map(|r| r.sensitivity + r.specificity).sum::<f64>() / self.raters.len().max(1) as f64
    }

    pub fn is_canonical(&self) -> bool {
        self.mean_youden_sum() >= 1.0
    }

    pub fn canonical(self) -> Self {
        if self.is_canonical() {
            self
        } else {
            self.swap_classes()
        }
    }

    pub fn permute_raters(&self, order: &[usize]) -> Self {
        Self {
            prevalence: self.prevalence,
            raters: order.iter().map(|&i| self.raters[i]).collect(),
        }
    }

    /// Largest absolute difference over all parameters.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.raters
            .iter()
            .zip(&other.raters)
            .flat_map(|(a, b)| {
                [
                    (a.sensitivity - b.sensitivity).abs(),
                    (a.specificity - b.specificity).abs(),
                ]
            })
            .fold((self.prevalence - other.prevalence).abs(), f64::max)
    }
}

/// Per-class log-likelihood of one response vector: `(log A, log B)` with
/// `A = Π se^x (1−se)^(1−x)` and `B = Π (1−sp)^x sp^(1−x)`; missing votes
/// contribute a factor of one.
pub(crate) fn class_log_likelihoods(model: &LatentClassModel, votes: &[Vote]) -> (f64, f64) {
    let (mut a, mut b) = (0.0, 0.0);
    for (r, v) in model.raters.iter().zip(votes) {
        match v {
            Vote::Positive => {
                a += r.sensitivity.ln();
                b += (1.0 - r.specificity).ln();
            }
            Vote::Negative => {
                a += (1.0 - r.sensitivity).ln();
                b += r.specificity.ln();
            }
            Vote::Missing => {}
        }
    }
    (a, b)
}

/// `(log-likelihood term, posterior probability of the positive class)` for one pattern.
pub(crate) fn pattern_terms(model: &LatentClassModel, votes: &[Vote]) -> (f64, f64) {
    let (la, lb) = class_log_likelihoods(model, votes);
    let x = model.prevalence.ln() + la;
    let y = (1.0 - model.prevalence).ln() + lb;
    let m = x.max(y);
    let lse = m + ((x - m).exp() + (y - m).exp()).ln();
    (lse, (x - lse).exp())
}

/// Observed-data log-likelihood of `data` under `model`.
pub fn log_likelihood(model: &LatentClassModel, data: &VotePatternTable) -> Result<f64> {
    if model.raters.len() != data.n_raters() {
        return Err(Error::invalid(format!(
            "model has {} raters, data has {}",
            model.raters.len(),
            data.n_raters()
        )));
    }
    model.validate()?;
    if data.patterns.is_empty() {
        return Err(Error::Empty("no vote patterns".into()));
    }
    Ok(data
        .patterns
        .iter()
        .map(|(v, c)| *c as f64 * pattern_terms(model, v).0)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::LabelScheme;

    #[test]
    fn uninformative_parameters() {
        let data = VotePatternTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                (vec![Vote::Positive, Vote::Negative, Vote::Positive], 4),
                (vec![Vote::Negative, Vote::Negative, Vote::Negative], 6),
            ],
        )
        .unwrap();
        let m = LatentClassModel::new(0.5, vec![RaterAccuracy::new(0.5, 0.5); 3]);
        let ll = log_likelihood(&m, &data).unwrap();
        assert!((ll - 10.0 * 3.0 * 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn single_rater_mixture_term() {
        let data = VotePatternTable::new(vec!["a".into()], vec![(vec![Vote::Positive], 1)]).unwrap();
        let m = LatentClassModel::new(0.3, vec![RaterAccuracy::new(0.9, 0.8)]);
        let ll = log_likelihood(&m, &data).unwrap();
        assert!((ll - 0.41f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn label_switching_preserves_likelihood() {
        let data = VotePatternTable::new(
            vec!["a".into(), "b".into()],
            vec![
                (vec![Vote::Positive, Vote::Missing], 3),
                (vec![Vote::Negative, Vote::Positive], 5),
                (vec![Vote::Negative, Vote::Negative], 2),
            ],
        )
        .unwrap();
        let m = LatentClassModel::new(0.2, vec![RaterAccuracy::new(0.9, 0.7), RaterAccuracy::new(0.6, 0.95)]);
        let a = log_likelihood(&m, &data).unwrap();
        let b = log_likelihood(&m.swap_classes(), &data).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(m.is_canonical());
        assert!(!m.swap_classes().is_canonical());
        assert_eq!(m.swap_classes().canonical(), m.swap_classes().swap_classes());
    }

    #[test]
    fn patterns_from_table() {
        let s = LabelScheme::binary();
        let (w, o) = (s.parse("wellness").unwrap(), s.parse("other").unwrap());
        let t = AnnotationTable::from_rows(
            s,
            vec!["a".into(), "b".into()],
            vec![
                ("v1", vec![Some(w), Some(o)]),
                ("v2", vec![Some(w), Some(o)]),
                ("v3", vec![None, Some(w)]),
            ],
        )
        .unwrap();
        let p = VotePatternTable::from_table(&t);
        assert_eq!(p.total(), 3);
        assert_eq!(p.patterns().len(), 2);
        assert!(p.patterns().contains(&(vec![Vote::Positive, Vote::Negative], 2)));
        assert_eq!(p.expand().len(), 3);
    }

    #[test]
    fn mismatched_model_rejected() {
        let data = VotePatternTable::new(vec!["a".into()], vec![(vec![Vote::Positive], 1)]).unwrap();
        let m = LatentClassModel::new(0.3, vec![RaterAccuracy::new(0.9, 0.8); 2]);
        assert!(log_likelihood(&m, &data).is_err());
        assert!(VotePatternTable::new(vec!["a".into()], vec![(vec![Vote::Positive], 0)]).is_err());
    }
}
