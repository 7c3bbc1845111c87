use serde::{Deserialize, Serialize};

use crate::data::AnnotationTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    /// `None` when chance agreement is 1 (every assignment in one category).
    pub value: Option<f64>,
    pub raters_per_visit: usize,
    pub n_included: usize,
    /// Visits left out because at least one rater did not vote.
    pub n_excluded: usize,
    pub observed_agreement: f64,
    pub chance_agreement: f64,
}

/// Fleiss' kappa over weighted subjects: each entry is a per-category count
/// vector (summing to the same `k` for every subject) and its multiplicity.
pub fn fleiss_kappa_from_patterns(patterns: &[(Vec<usize>, usize)]) -> Result<KappaEstimate> {
    let Some((first, _)) = patterns.first() else {
        return Err(Error::Empty("kappa needs at least one subject".into()));
    };
    let k: usize = first.iter().sum();
    let categories = first.len();
    if k < 2 {
        return Err(Error::invalid("kappa needs at least two ratings per subject"));
    }
    let mut totals = vec![0f64; categories];
    let mut agreement_sum = 0f64;
    let mut subjects = 0usize;
    for (counts, mult) in patterns {
        if counts.len() != categories || counts.iter().sum::<usize>() != k {
            return Err(Error::invalid("every subject needs the same number of ratings"));
        }
        let m = *mult as f64;
        let sq: usize = counts.iter().map(|c| c * c).sum();
        agreement_sum += m * (sq - k) as f64 / (k * (k - 1)) as f64;
        for (t, &c) in totals.iter_mut().zip(counts) {
            *t += m * c as f64;
        }
        subjects += mult;
    }
    if subjects == 0 {
        return Err(Error::Empty("kappa needs at least one subject".into()));
    }
    let assignments = (subjects * k) as f64;
    let observed = agreement_sum / subjects as f64;
    let chance: f64 = totals.iter().map(|t| (t / assignments).powi(2)).sum();
    let value = ((1.0 - chance).abs() > 1e-12).then(|| (observed - chance) / (1.0 - chance));
    Ok(KappaEstimate {
        value,
        raters_per_visit: k,
        n_included: subjects,
        n_excluded: 0,
        observed_agreement: observed,
        chance_agreement: chance,
    })
}

/// Fleiss' kappa from one category-count vector per subject.
pub fn fleiss_kappa_from_counts(counts: &[Vec<usize>]) -> Result<KappaEstimate> {
    let patterns: Vec<(Vec<usize>, usize)> = counts.iter().map(|c| (c.clone(), 1)).collect();
    fleiss_kappa_from_patterns(&patterns)
}

/// Fleiss' kappa over the fully annotated visits of `table`.
pub fn fleiss_kappa(table: &AnnotationTable) -> Result<KappaEstimate> {
    if table.n_raters() < 2 {
        return Err(Error::invalid("kappa needs at least two raters"));
    }
    let classes = table.scheme().len();
    let mut counts = Vec::new();
    for (i, (_, row)) in table.rows().enumerate() {
        if !table.is_complete(i) {
            continue;
        }
        let mut c = vec![0usize; classes];
        for l in row.iter().flatten() {
            c[l.index()] += 1;
        }
        counts.push(c);
    }
    if counts.is_empty() {
        return Err(Error::Empty("no fully annotated visits for kappa".into()));
    }
    let mut est = fleiss_kappa_from_counts(&counts)?;
    est.n_excluded = table.n_visits() - est.n_included;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_agreement_is_one() {
        let k = fleiss_kappa_from_counts(&[vec![2, 0], vec![0, 2]]).unwrap();
        assert_eq!(k.value, Some(1.0));
    }

    #[test]
    fn chance_level_is_zero() {
        let k = fleiss_kappa_from_counts(&[vec![2, 0], vec![1, 1], vec![1, 1], vec![0, 2]]).unwrap();
        assert!(k.value.unwrap().abs() < 1e-15);
    }

    #[test]
    fn single_category_is_undefined() {
        let k = fleiss_kappa_from_counts(&[vec![3, 0], vec![3, 0]]).unwrap();
        assert_eq!(k.value, None);
        assert_eq!(k.chance_agreement, 1.0);
    }

    #[test]
    fn textbook_example() {
        // Fleiss (1971)-style worked example: 10 subjects, 14 raters, 5 categories.
        let rows = vec![
            vec![0, 0, 0, 0, 14],
            vec![0, 2, 6, 4, 2],
            vec![0, 0, 3, 5, 6],
            vec![0, 3, 9, 2, 0],
            vec![2, 2, 8, 1, 1],
            vec![7, 7, 0, 0, 0],
            vec![3, 2, 6, 3, 0],
            vec![2, 5, 3, 2, 2],
            vec![6, 5, 2, 1, 0],
            vec![0, 2, 2, 3, 7],
        ];
        let k = fleiss_kappa_from_counts(&rows).unwrap();
        assert!((k.value.unwrap() - 0.20993).abs() < 1e-4, "{:?}", k.value);
    }

    #[test]
    fn unequal_rating_counts_rejected() {
        assert!(fleiss_kappa_from_counts(&[vec![2, 0], vec![1, 2]]).is_err());
        assert!(fleiss_kappa_from_counts(&[vec![1, 0]]).is_err());
    }
}
