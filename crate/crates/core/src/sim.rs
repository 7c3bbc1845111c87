//! Synthetic annotation panels and probability series with known truth.
//!
//! Votes are conditionally independent given the latent class, so these
//! generators serve as oracles for the estimators in [`crate::latent`] and
//! [`crate::calibration`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::calibration::{expit, logit, ProbabilitySeries};
use crate::data::{AnnotationTable, LabelScheme};
use crate::error::{Error, Result};
use crate::latent::RaterAccuracy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaShapes {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaShapes {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    fn distribution(&self) -> Result<Beta<f64>> {
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::invalid(format!(
                "beta shapes must be positive, got ({}, {})",
                self.alpha, self.beta
            )));
        }
        Beta::new(self.alpha, self.beta).map_err(|e| Error::invalid(e.to_string()))
    }
}

/// Beta distributions for the predicted probability given each true class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityModel {
    pub positive: BetaShapes,
    pub negative: BetaShapes,
}

impl Default for ProbabilityModel {
    fn default() -> Self {
        Self {
            positive: BetaShapes::new(4.0, 2.0),
            negative: BetaShapes::new(1.0, 5.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelDesign {
    pub prevalence: f64,
    pub raters: Vec<RaterAccuracy>,
    pub n: usize,
    pub probability_model: Option<ProbabilityModel>,
    pub seed: u64,
}

impl PanelDesign {
    pub fn new(prevalence: f64, raters: Vec<RaterAccuracy>, n: usize, seed: u64) -> Self {
        Self {
            prevalence,
            raters,
            n,
            probability_model: None,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("panel size must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.prevalence) {
            return Err(Error::invalid(format!("prevalence {} outside [0, 1]", self.prevalence)));
        }
        if self.raters.is_empty() {
            return Err(Error::invalid("a panel needs at least one rater"));
        }
        for (i, r) in self.raters.iter().enumerate() {
            if !(0.0..=1.0).contains(&r.sensitivity) || !(0.0..=1.0).contains(&r.specificity) {
                return Err(Error::invalid(format!("rater {} has rates outside [0, 1]", i + 1)));
            }
        }
        Ok(())
    }
}

pub fn visit_id(i: usize) -> String {
    format!("v{:06}", i + 1)
}

pub fn rater_id(r: usize) -> String {
    format!("r{}", r + 1)
}

/// Draws truth and votes: `truth_i ~ Bernoulli(π)`, then each rater votes
/// positive with probability `se` on positives and `1 − sp` on negatives.
///
/// Boundary rates (0 or 1) are accepted so noiseless panels can be built.
pub fn simulate_panel(design: &PanelDesign) -> Result<(Vec<bool>, AnnotationTable)> {
    design.validate()?;
    let scheme = LabelScheme::binary();
    let (pos, neg) = (scheme.positive(), scheme.parse("Other").expect("binary scheme"));
    let mut rng = ChaCha8Rng::seed_from_u64(design.seed);
    let mut truth = Vec::with_capacity(design.n);
    let mut rows = Vec::with_capacity(design.n);
    for i in 0..design.n {
        let t = rng.random_bool(design.prevalence);
        let votes = design
            .raters
            .iter()
            .map(|r| {
                let positive = if t {
                    rng.random_bool(r.sensitivity)
                } else {
                    !rng.random_bool(r.specificity)
                };
                Some(if positive { pos } else { neg })
            })
            .collect();
        truth.push(t);
        rows.push((visit_id(i), votes));
    }
    let raters = (0..design.raters.len()).map(rater_id).collect();
    Ok((truth, AnnotationTable::from_rows(scheme, raters, rows)?))
}

/// `p_i ~ Beta(positive)` where `truth_i` holds, `Beta(negative)` otherwise;
/// the truth becomes the outcome.
pub fn simulate_probabilities(truth: &[bool], model: &ProbabilityModel, seed: u64) -> Result<ProbabilitySeries> {
    let pos = model.positive.distribution()?;
    let neg = model.negative.distribution()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = truth
        .iter()
        .map(|&t| if t { pos.sample(&mut rng) } else { neg.sample(&mut rng) })
        .map(|p: f64| p.clamp(0.0, 1.0))
        .collect();
    ProbabilitySeries::new(p, truth.to_vec())
}

/// Outcomes drawn as `y_i ~ Bernoulli(expit(intercept + slope·logit(p_i)))`.
/// `(0, 1)` gives perfectly calibrated probabilities.
pub fn simulate_outcomes(probabilities: &[f64], intercept: f64, slope: f64, seed: u64) -> Result<ProbabilitySeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = probabilities
        .iter()
        .map(|&p| {
            let q = expit(intercept + slope * logit(p));
            rng.random_bool(q.clamp(0.0, 1.0))
        })
        .collect();
    ProbabilitySeries::new(probabilities.to_vec(), y)
}

/// `n` probabilities from `shape`, paired with outcomes drawn from those same
/// probabilities.
pub fn simulate_calibrated(n: usize, shape: BetaShapes, seed: u64) -> Result<ProbabilitySeries> {
    let dist = shape.distribution()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
    let y = p.iter().map(|&p| rng.random_bool(p.clamp(0.0, 1.0))).collect();
    ProbabilitySeries::new(p, y)
}
