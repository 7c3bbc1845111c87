//! Majority-consensus reference labels and inter-rater agreement.

mod export;
mod kappa;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data::{AnnotationTable, Label, LabelScheme};
use crate::error::{Error, Result};

pub use export::{parse_reference, read_reference, reference_header, write_reference};
pub use kappa::{fleiss_kappa, fleiss_kappa_from_counts, fleiss_kappa_from_patterns, KappaEstimate};

pub const DEFAULT_QUALIFICATION_THRESHOLD: f64 = 0.85;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisitConsensus {
    pub visit_id: String,
    /// Present only when one label holds a strict majority of the votes cast.
    pub reference: Option<Label>,
    /// Votes per class, indexed by label.
    pub votes: Vec<usize>,
    pub unanimous: bool,
}

/// Per-visit consensus over an annotation panel.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceLabeling {
    scheme: LabelScheme,
    visits: Vec<VisitConsensus>,
    index: HashMap<String, usize>,
}

impl ReferenceLabeling {
    pub fn new(scheme: LabelScheme, visits: Vec<VisitConsensus>) -> Result<Self> {
        let mut index = HashMap::with_capacity(visits.len());
        for (i, v) in visits.iter().enumerate() {
            if v.votes.len() != scheme.len() {
                return Err(Error::invalid(format!(
                    "visit `{}` has {} vote counts for {} classes",
                    v.visit_id,
                    v.votes.len(),
                    scheme.len()
                )));
            }
            if index.insert(v.visit_id.clone(), i).is_some() {
                return Err(Error::DuplicateVisit(v.visit_id.clone()));
            }
        }
        Ok(Self { scheme, visits, index })
    }

    pub fn scheme(&self) -> &LabelScheme {
        &self.scheme
    }

    pub fn visits(&self) -> &[VisitConsensus] {
        &self.visits
    }

    pub fn len(&self) -> usize {
        self.visits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    pub fn get(&self, visit_id: &str) -> Option<&VisitConsensus> {
        self.index.get(visit_id).map(|&i| &self.visits[i])
    }

    pub fn reference(&self, visit_id: &str) -> Option<Label> {
        self.get(visit_id).and_then(|v| v.reference)
    }

    pub fn no_consensus(&self) -> usize {
        self.visits.iter().filter(|v| v.reference.is_none()).count()
    }

    /// Number of visits whose reference is each class.
    pub fn reference_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.scheme.len()];
        for r in self.visits.iter().filter_map(|v| v.reference) {
            counts[r.index()] += 1;
        }
        counts
    }
}

fn tally(scheme: &LabelScheme, row: &[Option<Label>]) -> Vec<usize> {
    let mut votes = vec![0; scheme.len()];
    for l in row.iter().flatten() {
        votes[l.index()] += 1;
    }
    votes
}

/// Strict-majority consensus per visit. Ties and pluralities short of a
/// majority leave the reference absent.
pub fn majority_reference(table: &AnnotationTable) -> ReferenceLabeling {
    let scheme = table.scheme();
    let visits = table
        .rows()
        .map(|(visit_id, row)| {
            let votes = tally(scheme, row);
            let cast: usize = votes.iter().sum();
            let reference = votes.iter().position(|&c| 2 * c > cast).and_then(|i| scheme.label(i));
            let unanimous = cast > 0 && votes.iter().filter(|&&c| c > 0).count() == 1;
            VisitConsensus {
                visit_id: visit_id.to_string(),
                reference,
                votes,
                unanimous,
            }
        })
        .collect();
    ReferenceLabeling::new(scheme.clone(), visits).expect("table visit ids are unique")
}

/// Fraction of fully annotated visits on which every rater chose the same label.
pub fn exact_match_rate(table: &AnnotationTable) -> Result<f64> {
    if table.n_raters() < 2 {
        return Err(Error::invalid("exact match needs at least two raters"));
    }
    let (mut complete, mut unanimous) = (0usize, 0usize);
    for (i, (_, row)) in table.rows().enumerate() {
        if !table.is_complete(i) {
            continue;
        }
        complete += 1;
        if row.windows(2).all(|w| w[0] == w[1]) {
            unanimous += 1;
        }
    }
    if complete == 0 {
        return Err(Error::Empty("no fully annotated visits".into()));
    }
    Ok(unanimous as f64 / complete as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaterMatch {
    pub rater: String,
    pub agreed: usize,
    pub counted: usize,
    pub rate: Option<f64>,
}

fn match_counts(table: &AnnotationTable, reference: &ReferenceLabeling) -> Vec<RaterMatch> {
    let mut agreed = vec![0usize; table.n_raters()];
    let mut counted = vec![0usize; table.n_raters()];
    for (visit, row) in table.rows() {
        let Some(truth) = reference.reference(visit) else {
            continue;
        };
        for (r, label) in row.iter().enumerate() {
            if let Some(l) = label {
                counted[r] += 1;
                agreed[r] += usize::from(*l == truth);
            }
        }
    }
    table
        .raters()
        .iter()
        .enumerate()
        .map(|(r, name)| RaterMatch {
            rater: name.clone(),
            agreed: agreed[r],
            counted: counted[r],
            rate: (counted[r] > 0).then(|| agreed[r] as f64 / counted[r] as f64),
        })
        .collect()
}

/// Per rater, the share of that rater's votes that equal the visit's
/// reference label. Visits without a reference are skipped.
pub fn rater_match_rates(table: &AnnotationTable, reference: &ReferenceLabeling) -> Result<Vec<RaterMatch>> {
    let rates = match_counts(table, reference);
    if let Some(r) = rates.iter().find(|r| r.counted == 0) {
        return Err(Error::Empty(format!(
            "rater `{}` has no votes on visits with a reference",
            r.rater
        )));
    }
    Ok(rates)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateOutcome {
    Pass,
    Fail,
}

/// Pass iff `rate >= threshold`.
pub fn qualification_gate(rate: f64, threshold: f64) -> Result<GateOutcome> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::invalid(format!("match rate {rate} outside [0, 1]")));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid(format!("threshold {threshold} outside [0, 1]")));
    }
    Ok(if rate >= threshold {
        GateOutcome::Pass
    } else {
        GateOutcome::Fail
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub n_visits: usize,
    pub n_complete: usize,
    pub exact_match_rate: f64,
    pub fleiss_kappa: KappaEstimate,
    pub per_rater_match: Vec<RaterMatch>,
    pub no_consensus: usize,
}

pub fn agreement_report(table: &AnnotationTable) -> Result<AgreementReport> {
    let reference = majority_reference(table);
    Ok(AgreementReport {
        n_visits: table.n_visits(),
        n_complete: (0..table.n_visits()).filter(|&i| table.is_complete(i)).count(),
        exact_match_rate: exact_match_rate(table)?,
        fleiss_kappa: fleiss_kappa(table)?,
        per_rater_match: match_counts(table, &reference),
        no_consensus: reference.no_consensus(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel(rows: &[&[&str]]) -> AnnotationTable {
        let s = LabelScheme::binary();
        let raters: Vec<String> = (0..rows[0].len()).map(|i| format!("r{i}")).collect();
        let rows = rows.iter().enumerate().map(|(i, row)| {
            (
                format!("v{i}"),
                row.iter()
                    .map(|x| if x.is_empty() { None } else { Some(s.parse(x).unwrap()) })
                    .collect(),
            )
        });
        AnnotationTable::from_rows(s.clone(), raters, rows).unwrap()
    }

    #[test]
    fn majority_examples() {
        let t = panel(&[&["Wellness", "Other", "Wellness"], &["Other", "Other", "Wellness"]]);
        let r = majority_reference(&t);
        let s = t.scheme();
        assert_eq!(r.reference("v0"), Some(s.parse("wellness").unwrap()));
        assert_eq!(r.reference("v1"), Some(s.parse("other").unwrap()));
        assert_eq!(r.visits()[0].votes, vec![2, 1]);
        assert!(!r.visits()[0].unanimous);
    }

    #[test]
    fn tie_has_no_consensus() {
        let t = panel(&[&["Wellness", "Other"], &["Other", "Other"]]);
        let r = majority_reference(&t);
        assert_eq!(r.reference("v0"), None);
        assert_eq!(r.no_consensus(), 1);
        assert!(r.visits()[1].unanimous);
    }

    #[test]
    fn exact_match_counts() {
        let t = panel(&[&["Wellness", "Wellness"], &["Wellness", "Other"]]);
        assert_eq!(exact_match_rate(&t).unwrap(), 0.5);
        let t = panel(&[&["Wellness", "Wellness"], &["Other", "Other"]]);
        assert_eq!(exact_match_rate(&t).unwrap(), 1.0);
        let t = panel(&[&["Wellness", ""]]);
        assert!(exact_match_rate(&t).is_err());
    }

    #[test]
    fn match_rates_identity_and_complement() {
        let t = panel(&[
            &["Wellness", "Wellness", "Other", "Wellness"],
            &["Other", "Other", "Wellness", "Other"],
            &["Wellness", "Wellness", "Other", "Wellness"],
        ]);
        let r = majority_reference(&t);
        let rates = rater_match_rates(&t, &r).unwrap();
        assert_eq!(rates[0].rate, Some(1.0));
        assert_eq!(rates[2].rate, Some(0.0));
    }

    #[test]
    fn rater_without_votes_is_an_error() {
        let t = panel(&[&["Wellness", "Other", ""], &["Wellness", "Other", ""]]);
        // no consensus anywhere, so nobody has countable votes
        assert!(rater_match_rates(&t, &majority_reference(&t)).is_err());
    }

    #[test]
    fn gate() {
        assert_eq!(qualification_gate(0.973, 0.85).unwrap(), GateOutcome::Pass);
        assert_eq!(qualification_gate(0.85, 0.85).unwrap(), GateOutcome::Pass);
        assert_eq!(qualification_gate(0.849, 0.85).unwrap(), GateOutcome::Fail);
        assert!(qualification_gate(1.2, 0.85).is_err());
    }
}
