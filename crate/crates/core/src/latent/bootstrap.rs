use serde::{Deserialize, Serialize};

use super::em::{em_fit, EmFit, EmOptions};
use super::model::VotePatternTable;
use crate::error::{Error, Result};
use crate::resample::{bootstrap_replicates, percentile_interval, BootstrapSpec, IntervalEstimate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaterIntervals {
    pub rater: String,
    pub sensitivity: IntervalEstimate,
    pub specificity: IntervalEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmBootstrap {
    pub fit: EmFit,
    pub prevalence: IntervalEstimate,
    pub raters: Vec<RaterIntervals>,
    /// Replicates whose refit failed or hit the iteration cap.
    pub failed_replicates: usize,
}

/// Share of replicates allowed to fail before the whole run is rejected.
pub const FAILURE_BUDGET: f64 = 0.01;

/// Percentile intervals for every parameter. Each replicate resamples visits,
/// refits from the full-data estimate and is canonicalized before pooling.
pub fn em_bootstrap_ci(data: &VotePatternTable, spec: &BootstrapSpec, options: &EmOptions) -> Result<EmBootstrap> {
    spec.validate()?;
    let fit = em_fit(data, options)?;
    let units = data.expand();
    let replicate_options = EmOptions {
        init: Some(fit.model.clone()),
        restarts: 0,
        ..options.clone()
    };
    let n_patterns = data.patterns().len();

    let replicates = bootstrap_replicates(units.len(), spec, |idx| {
        let mut counts = vec![0usize; n_patterns];
        for &i in idx {
            counts[units[i]] += 1;
        }
        let sample = data.reweight(&counts);
        match em_fit(&sample, &replicate_options) {
            Ok(f) if f.trace.converged => Some(f.model),
            _ => None,
        }
    });

    let failed = replicates.iter().filter(|r| r.is_none()).count();
    let budget = (FAILURE_BUDGET * spec.replicates as f64).floor() as usize;
    if failed > budget {
        return Err(Error::ReplicateFailures {
            failed,
            replicates: spec.replicates,
            budget,
        });
    }

    let interval = |estimate: f64, pick: &dyn Fn(&super::LatentClassModel) -> f64| {
        percentile_interval(
            estimate,
            replicates.iter().map(|m| m.as_ref().map(pick)),
            spec.confidence,
        )
    };
    let prevalence = interval(fit.model.prevalence, &|m| m.prevalence)?;
    let raters = fit
        .model
        .raters
        .iter()
        .enumerate()
        .map(|(r, acc)| {
            Ok(RaterIntervals {
                rater: data.raters()[r].clone(),
                sensitivity: interval(acc.sensitivity, &|m| m.raters[r].sensitivity)?,
                specificity: interval(acc.specificity, &|m| m.raters[r].specificity)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EmBootstrap {
        fit,
        prevalence,
        raters,
        failed_replicates: failed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latent::Vote;

    fn noiseless() -> VotePatternTable {
        VotePatternTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![(vec![Vote::Positive; 3], 25), (vec![Vote::Negative; 3], 75)],
        )
        .unwrap()
    }

    #[test]
    fn noiseless_accuracies_have_degenerate_intervals() {
        let b = em_bootstrap_ci(&noiseless(), &BootstrapSpec::new(200, 3), &EmOptions::default()).unwrap();
        assert_eq!(b.failed_replicates, 0);
        for r in &b.raters {
            for ci in [r.sensitivity, r.specificity] {
                assert_eq!(ci.lower, ci.estimate);
                assert_eq!(ci.upper, ci.estimate);
            }
        }
        // prevalence still varies with the resampled class balance
        assert!(b.prevalence.contains(0.25));
    }

    #[test]
    fn same_seed_same_intervals() {
        let data = VotePatternTable::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                (vec![Vote::Positive; 3], 30),
                (vec![Vote::Negative; 3], 90),
                (vec![Vote::Positive, Vote::Negative, Vote::Negative], 6),
                (vec![Vote::Negative, Vote::Positive, Vote::Positive], 5),
                (vec![Vote::Negative, Vote::Negative, Vote::Positive], 7),
            ],
        )
        .unwrap();
        let spec = BootstrapSpec::new(100, 17);
        let a = em_bootstrap_ci(&data, &spec, &EmOptions::default()).unwrap();
        let b = em_bootstrap_ci(&data, &spec, &EmOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
