//! Published summary counts from a wellness-visit classifier validation,
//! expanded into the crate's data types. Used by tests, benches and the
//! acceptance suite.
//!
//! The validator panel sums to 636 visits while the classifier's 2×2 table
//! covers 622; the two sources are not reconciled and are kept as published.

use crate::data::{AnnotationTable, LabelScheme};
use crate::metrics::ContingencyTable;

/// One row of the validator panel: votes of validators 1–3 (`true` =
/// Wellness), number of visits, and the published reference label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PanelPattern {
    pub votes: [bool; 3],
    pub count: usize,
    pub reference_wellness: bool,
}

const fn row(votes: [bool; 3], count: usize, reference_wellness: bool) -> PanelPattern {
    PanelPattern {
        votes,
        count,
        reference_wellness,
    }
}

const W: bool = true;
const O: bool = false;

pub const VALIDATOR_PATTERNS: [PanelPattern; 8] = [
    row([O, O, O], 457, O),
    row([O, O, W], 10, O),
    row([O, W, O], 1, O),
    row([O, W, W], 6, W),
    row([W, O, O], 5, O),
    row([W, O, W], 5, W),
    row([W, W, O], 6, W),
    row([W, W, W], 146, W),
];

pub const VALIDATORS: [&str; 3] = ["validator_1", "validator_2", "validator_3"];

/// The validator panel expanded to one row per visit (binary scheme).
pub fn validator_panel() -> AnnotationTable {
    let scheme = LabelScheme::binary();
    let wellness = scheme.positive();
    let other = scheme.parse("Other").expect("binary scheme");
    let mut rows = Vec::new();
    for pattern in VALIDATOR_PATTERNS {
        let labels: Vec<_> = pattern
            .votes
            .iter()
            .map(|&w| Some(if w { wellness } else { other }))
            .collect();
        for _ in 0..pattern.count {
            rows.push((format!("v{:04}", rows.len() + 1), labels.clone()));
        }
    }
    AnnotationTable::from_rows(scheme, VALIDATORS.iter().map(|s| s.to_string()).collect(), rows).expect("static panel")
}

/// `(per-category counts [wellness, other], multiplicity)` per panel row.
pub fn validator_category_counts() -> Vec<(Vec<usize>, usize)> {
    VALIDATOR_PATTERNS
        .iter()
        .map(|p| {
            let w = p.votes.iter().filter(|&&v| v).count();
            (vec![w, 3 - w], p.count)
        })
        .collect()
}

/// Classifier against the three-validator majority.
pub const ALGORITHM_CONTINGENCY: ContingencyTable = ContingencyTable {
    tp: 125,
    fp: 31,
    fn_: 20,
    tn: 446,
};
