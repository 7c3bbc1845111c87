use approx::assert_abs_diff_eq;
use panelcheck::consensus::{
    agreement_report, exact_match_rate, fleiss_kappa, fleiss_kappa_from_counts, fleiss_kappa_from_patterns,
    majority_reference, rater_match_rates,
};
use panelcheck::data::{AnnotationTable, LabelScheme};
use panelcheck::datasets::{validator_category_counts, validator_panel, VALIDATOR_PATTERNS};
use proptest::prelude::*;

// Independent evaluation of the published panel (Python, fractions module).
const PANEL_KAPPA: f64 = 0.909_137_612_560_609_7;
const PANEL_EXACT_MATCH: f64 = 603.0 / 636.0;
const PANEL_RATER_AGREED: [usize; 3] = [625, 630, 620];

#[test]
fn majority_matches_every_published_reference_label() {
    let panel = validator_panel();
    let reference = majority_reference(&panel);
    let scheme = panel.scheme();
    let mut start = 0;
    for pattern in VALIDATOR_PATTERNS {
        for v in &reference.visits()[start..start + pattern.count] {
            let label = v.reference.expect("three raters always give a majority");
            assert_eq!(
                scheme.is_positive(label),
                pattern.reference_wellness,
                "{:?}",
                pattern.votes
            );
        }
        start += pattern.count;
    }
    assert_eq!(start, 636);
    assert_eq!(reference.no_consensus(), 0);
    assert_eq!(reference.reference_counts(), vec![163, 473]);
}

#[test]
fn published_panel_agreement() {
    let panel = validator_panel();
    assert_abs_diff_eq!(exact_match_rate(&panel).unwrap(), PANEL_EXACT_MATCH, epsilon = 1e-15);

    let kappa = fleiss_kappa(&panel).unwrap();
    assert_abs_diff_eq!(kappa.value.unwrap(), PANEL_KAPPA, epsilon = 1e-12);
    assert_eq!(kappa.n_included, 636);
    assert_eq!(kappa.raters_per_visit, 3);

    let reference = majority_reference(&panel);
    let rates = rater_match_rates(&panel, &reference).unwrap();
    for (m, agreed) in rates.iter().zip(PANEL_RATER_AGREED) {
        assert_eq!((m.agreed, m.counted), (agreed, 636), "{}", m.rater);
    }
    // every validator clears the 85% gate by a wide margin
    assert!(rates.iter().all(|m| m.rate.unwrap() > 0.97));

    let report = agreement_report(&panel).unwrap();
    assert_eq!(report.n_complete, 636);
    assert_eq!(report.per_rater_match, rates);
}

#[test]
fn kappa_from_patterns_equals_kappa_from_expanded_rows() {
    let from_patterns = fleiss_kappa_from_patterns(&validator_category_counts()).unwrap();
    let expanded: Vec<Vec<usize>> = validator_category_counts()
        .into_iter()
        .flat_map(|(counts, m)| std::iter::repeat_n(counts, m))
        .collect();
    let from_rows = fleiss_kappa_from_counts(&expanded).unwrap();
    assert_abs_diff_eq!(from_patterns.value.unwrap(), from_rows.value.unwrap(), epsilon = 1e-12);
    assert_abs_diff_eq!(from_patterns.value.unwrap(), PANEL_KAPPA, epsilon = 1e-12);
}

fn random_panel(votes: &[Vec<usize>], classes: usize) -> AnnotationTable {
    let scheme = if classes == 2 {
        LabelScheme::binary()
    } else {
        LabelScheme::extended()
    };
    let raters = (0..votes[0].len()).map(|r| format!("r{r}")).collect();
    let rows: Vec<_> = votes
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let labels: Vec<_> = row.iter().map(|&c| scheme.label(c % classes)).collect();
            (format!("v{i}"), labels)
        })
        .collect();
    AnnotationTable::from_rows(scheme, raters, rows).unwrap()
}

fn panel_strategy() -> impl Strategy<Value = (Vec<Vec<usize>>, usize)> {
    (2usize..6, prop_oneof![Just(2usize), Just(5usize)]).prop_flat_map(|(raters, classes)| {
        (
            prop::collection::vec(prop::collection::vec(0usize..classes, raters), 2..40),
            Just(classes),
        )
    })
}

proptest! {
    #[test]
    fn rater_order_does_not_matter((votes, classes) in panel_strategy(), seed in any::<u64>()) {
        let panel = random_panel(&votes, classes);
        let mut order: Vec<usize> = (0..panel.n_raters()).collect();
        let shift = (seed as usize) % order.len();
        order.rotate_left(shift);
        let permuted = panel.permute_raters(&order).unwrap();

        let a = majority_reference(&panel);
        let b = majority_reference(&permuted);
        prop_assert_eq!(a.visits(), b.visits());
        prop_assert_eq!(exact_match_rate(&panel).unwrap(), exact_match_rate(&permuted).unwrap());
        let (ka, kb) = (fleiss_kappa(&panel).unwrap(), fleiss_kappa(&permuted).unwrap());
        match (ka.value, kb.value) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
            (x, y) => prop_assert_eq!(x, y),
        }
    }

    #[test]
    fn kappa_ignores_category_names((votes, classes) in panel_strategy(), shift in 1usize..5) {
        // relabel every category by a fixed cyclic shift
        let relabeled: Vec<Vec<usize>> =
            votes.iter().map(|row| row.iter().map(|&c| (c + shift) % classes).collect()).collect();
        let a = fleiss_kappa(&random_panel(&votes, classes)).unwrap();
        let b = fleiss_kappa(&random_panel(&relabeled, classes)).unwrap();
        match (a.value, b.value) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
            (x, y) => prop_assert_eq!(x, y),
        }
        prop_assert!((a.observed_agreement - b.observed_agreement).abs() < 1e-12);
    }

    #[test]
    fn kappa_is_at_most_one((votes, classes) in panel_strategy()) {
        if let Some(k) = fleiss_kappa(&random_panel(&votes, classes)).unwrap().value {
            prop_assert!(k <= 1.0 + 1e-12);
        }
    }
}
