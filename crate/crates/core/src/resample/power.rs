//! Sample-size adequacy by simulating whole validation studies.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{bootstrap_replicates, percentile_interval, replicate_rng, BootstrapSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CiMethod {
    /// Normal-approximation interval `p ± z·√(p(1−p)/m)`.
    Wald,
    /// Percentile bootstrap over the simulated visits.
    Bootstrap { replicates: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerDesign {
    pub sensitivity: f64,
    pub specificity: f64,
    pub prevalence: f64,
    pub n: usize,
    pub sims: usize,
    pub target_halfwidth: f64,
    pub confidence: f64,
    pub method: CiMethod,
    pub seed: u64,
}

impl PowerDesign {
    pub fn wald(sensitivity: f64, specificity: f64, prevalence: f64, n: usize, sims: usize, seed: u64) -> Self {
        Self {
            sensitivity,
            specificity,
            prevalence,
            n,
            sims,
            target_halfwidth: 0.1,
            confidence: super::DEFAULT_CONFIDENCE,
            method: CiMethod::Wald,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return Err(Error::invalid(format!("prevalence {} outside (0, 1)", self.prevalence)));
        }
        for (name, v) in [("sensitivity", self.sensitivity), ("specificity", self.specificity)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} {v} outside [0, 1]")));
            }
        }
        if self.n == 0 || self.sims == 0 {
            return Err(Error::invalid("n and sims must be at least 1"));
        }
        if self.target_halfwidth.is_nan() || self.target_halfwidth <= 0.0 {
            return Err(Error::invalid("target half-width must be positive"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::invalid(format!("confidence {} outside (0, 1)", self.confidence)));
        }
        if let CiMethod::Bootstrap { replicates: 0 } = self.method {
            return Err(Error::invalid("bootstrap replicates must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    pub design: PowerDesign,
    /// Mean over studies with at least one positive.
    pub mean_sensitivity_halfwidth: Option<f64>,
    /// Mean over studies with at least one negative.
    pub mean_specificity_halfwidth: Option<f64>,
    pub fraction_sensitivity_adequate: f64,
    pub fraction_specificity_adequate: f64,
    /// Studies in which both half-widths meet the target.
    pub fraction_adequate: f64,
    pub mean_positives: f64,
    /// Studies with no positives or no negatives; they never count as adequate.
    pub degenerate_studies: usize,
}

struct Study {
    sens_hw: Option<f64>,
    spec_hw: Option<f64>,
    positives: usize,
}

/// Simulates `sims` studies of `n` visits each and summarizes the precision
/// of the sensitivity and specificity intervals they would report.
///
/// Study `s` draws from replicate stream `s` of `seed`.
pub fn power_simulation(design: &PowerDesign) -> Result<PowerReport> {
    design.validate()?;
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(1.0 - (1.0 - design.confidence) / 2.0);

    let studies: Vec<Study> = (0..design.sims)
        .into_par_iter()
        .map(|s| simulate_study(design, z, s as u64))
        .collect();

    let target = design.target_halfwidth;
    let sims = design.sims as f64;
    let mean = |f: fn(&Study) -> Option<f64>| {
        let vals: Vec<f64> = studies.iter().filter_map(f).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let meets = |hw: Option<f64>| hw.is_some_and(|h| h <= target);
    let frac = |pred: &dyn Fn(&Study) -> bool| studies.iter().filter(|s| pred(s)).count() as f64 / sims;

    Ok(PowerReport {
        design: *design,
        mean_sensitivity_halfwidth: mean(|s| s.sens_hw),
        mean_specificity_halfwidth: mean(|s| s.spec_hw),
        fraction_sensitivity_adequate: frac(&|s| meets(s.sens_hw)),
        fraction_specificity_adequate: frac(&|s| meets(s.spec_hw)),
        fraction_adequate: frac(&|s| meets(s.sens_hw) && meets(s.spec_hw)),
        mean_positives: studies.iter().map(|s| s.positives as f64).sum::<f64>() / sims,
        degenerate_studies: studies
            .iter()
            .filter(|s| s.sens_hw.is_none() || s.spec_hw.is_none())
            .count(),
    })
}

fn simulate_study(design: &PowerDesign, z: f64, index: u64) -> Study {
    let mut rng = replicate_rng(design.seed, index);
    // (truth, predicted positive)
    let visits: Vec<(bool, bool)> = (0..design.n)
        .map(|_| {
            let truth = rng.random_bool(design.prevalence);
            let pred = if truth {
                rng.random_bool(design.sensitivity)
            } else {
                !rng.random_bool(design.specificity)
            };
            (truth, pred)
        })
        .collect();
    let positives = visits.iter().filter(|v| v.0).count();

    let (sens_hw, spec_hw) = match design.method {
        CiMethod::Wald => {
            let (tp, tn) = (
                visits.iter().filter(|&&(t, p)| t && p).count(),
                visits.iter().filter(|&&(t, p)| !t && !p).count(),
            );
            let negatives = design.n - positives;
            (wald_halfwidth(tp, positives, z), wald_halfwidth(tn, negatives, z))
        }
        CiMethod::Bootstrap { replicates } => {
            let spec = BootstrapSpec {
                replicates,
                seed: rng.random(),
                confidence: design.confidence,
                ..BootstrapSpec::default()
            };
            bootstrap_halfwidths(&visits, &spec)
        }
    };
    Study {
        sens_hw,
        spec_hw,
        positives,
    }
}

fn wald_halfwidth(successes: usize, trials: usize, z: f64) -> Option<f64> {
    (trials > 0).then(|| {
        let p = successes as f64 / trials as f64;
        z * (p * (1.0 - p) / trials as f64).sqrt()
    })
}

fn rate(visits: &[(bool, bool)], idx: impl Iterator<Item = usize>, class: bool) -> Option<f64> {
    let (mut hit, mut total) = (0usize, 0usize);
    for i in idx {
        let (t, p) = visits[i];
        if t == class {
            total += 1;
            hit += usize::from(p == class);
        }
    }
    (total > 0).then(|| hit as f64 / total as f64)
}

/// Sensitivity and specificity of one resample; either is undefined when its class is absent.
type RatePair = (Option<f64>, Option<f64>);

fn bootstrap_halfwidths(visits: &[(bool, bool)], spec: &BootstrapSpec) -> (Option<f64>, Option<f64>) {
    let n = visits.len();
    let reps = bootstrap_replicates(n, spec, |idx| {
        (
            rate(visits, idx.iter().copied(), true),
            rate(visits, idx.iter().copied(), false),
        )
    });
    let interval = |class: bool, pick: fn(&RatePair) -> Option<f64>| {
        let est = rate(visits, 0..n, class)?;
        percentile_interval(est, reps.iter().map(pick), spec.confidence)
            .ok()
            .map(|ci| ci.half_width())
    };
    (interval(true, |r| r.0), interval(false, |r| r.1))
}
