use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{clamp_unit, pattern_terms, LatentClassModel, RaterAccuracy, Vote, VotePatternTable};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_PARAM_TOL: f64 = 1e-8;
pub const DEFAULT_LOGLIK_TOL: f64 = 1e-10;
/// Restarts used when random restarts are requested without a count.
pub const DEFAULT_RESTARTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmOptions {
    pub max_iter: usize,
    /// Stop when no parameter moves by more than this.
    pub param_tol: f64,
    /// Stop when the relative log-likelihood change falls below this.
    pub loglik_tol: f64,
    /// Skip the degrees-of-freedom check (`2R + 1 ≤ 2^R − 1`).
    pub waive_identifiability: bool,
    /// Starting point; majority vote when absent.
    pub init: Option<LatentClassModel>,
    /// Extra fits from random starting points; the best likelihood wins.
    pub restarts: usize,
    pub restart_seed: u64,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
            param_tol: DEFAULT_PARAM_TOL,
            loglik_tol: DEFAULT_LOGLIK_TOL,
            waive_identifiability: false,
            init: None,
            restarts: 0,
            restart_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ParamTol,
    LoglikTol,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmTrace {
    pub iterations: usize,
    /// Log-likelihood at the start of every iteration, then at the returned parameters.
    pub log_likelihoods: Vec<f64>,
    pub converged: bool,
    pub stop_reason: StopReason,
}

impl EmTrace {
    pub fn final_log_likelihood(&self) -> f64 {
        *self.log_likelihoods.last().expect("trace is never empty")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmFit {
    /// Canonically oriented estimate.
    pub model: LatentClassModel,
    pub trace: EmTrace,
    /// Posterior probability of the positive class for each pattern, under `model`.
    pub posteriors: Vec<f64>,
}

impl EmFit {
    pub fn log_likelihood(&self) -> f64 {
        self.trace.final_log_likelihood()
    }
}

/// Whether `raters` conditionally independent binary raters leave enough
/// degrees of freedom for the `2R + 1` parameters.
pub fn identifiable(raters: usize) -> bool {
    if raters >= 16 {
        return true;
    }
    2 * raters + 1 < (1usize << raters)
}

fn check_inputs(data: &VotePatternTable, options: &EmOptions) -> Result<()> {
    if data.patterns().is_empty() {
        return Err(Error::Empty("no vote patterns".into()));
    }
    let r = data.n_raters();
    if !options.waive_identifiability && !identifiable(r) {
        return Err(Error::NotIdentifiable(format!(
            "{r} raters give {} free cells for {} parameters",
            (1usize << r) - 1,
            2 * r + 1
        )));
    }
    if let Some(i) = (0..r).find(|&i| !data.rater_has_votes(i)) {
        return Err(Error::invalid(format!("rater `{}` has no votes", data.raters()[i])));
    }
    if let Some(init) = &options.init {
        if init.raters.len() != r {
            return Err(Error::invalid("initial model has the wrong number of raters"));
        }
        init.validate()?;
    }
    if options.max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    Ok(())
}

/// Fits the conditional-independence latent class model by EM.
pub fn em_fit(data: &VotePatternTable, options: &EmOptions) -> Result<EmFit> {
    check_inputs(data, options)?;
    let start = match &options.init {
        Some(m) => m.clone().clamped(),
        None => majority_start(data),
    };
    let mut best = run_em(data, start, options);
    if options.restarts > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(options.restart_seed);
        for _ in 0..options.restarts {
            let start = random_start(&mut rng, data.n_raters());
            let fit = run_em(data, start, options);
            if fit.log_likelihood() > best.log_likelihood() {
                best = fit;
            }
        }
    }
    Ok(best)
}

fn majority_start(data: &VotePatternTable) -> LatentClassModel {
    let weights: Vec<f64> = data
        .patterns()
        .iter()
        .map(|(votes, _)| {
            let pos = votes.iter().filter(|v| **v == Vote::Positive).count();
            let neg = votes.iter().filter(|v| **v == Vote::Negative).count();
            match pos.cmp(&neg) {
                std::cmp::Ordering::Greater => 1.0,
                std::cmp::Ordering::Less => 0.0,
                std::cmp::Ordering::Equal => 0.5,
            }
        })
        .collect();
    let neutral = LatentClassModel::new(0.5, vec![RaterAccuracy::new(0.5, 0.5); data.n_raters()]);
    m_step(data, &weights, &neutral)
}

fn random_start<R: Rng>(rng: &mut R, raters: usize) -> LatentClassModel {
    LatentClassModel::new(
        rng.random_range(0.05..0.95),
        (0..raters)
            .map(|_| RaterAccuracy::new(rng.random_range(0.5..0.99), rng.random_range(0.5..0.99)))
            .collect(),
    )
}

/// Log-likelihood and per-pattern posteriors.
fn e_step(data: &VotePatternTable, model: &LatentClassModel, posteriors: &mut Vec<f64>) -> f64 {
    posteriors.clear();
    let mut ll = 0.0;
    for (votes, count) in data.patterns() {
        let (term, w) = pattern_terms(model, votes);
        ll += *count as f64 * term;
        posteriors.push(w);
    }
    ll
}

/// Closed-form maximizer of the expected complete-data log-likelihood,
/// projected onto the clamped box. A rater with no weight in a class keeps
/// its previous value for that class.
pub(crate) fn m_step(data: &VotePatternTable, w: &[f64], previous: &LatentClassModel) -> LatentClassModel {
    let r = data.n_raters();
    let mut pos_mass = 0.0;
    let mut total = 0.0;
    // per rater: (Σ c·w·x, Σ c·w, Σ c·(1−w)·(1−x), Σ c·(1−w)) over votes cast
    let mut acc = vec![[0.0f64; 4]; r];
    for ((votes, count), &wi) in data.patterns().iter().zip(w) {
        let c = *count as f64;
        pos_mass += c * wi;
        total += c;
        for (a, v) in acc.iter_mut().zip(votes) {
            match v {
                Vote::Positive => {
                    a[0] += c * wi;
                    a[1] += c * wi;
                    a[3] += c * (1.0 - wi);
                }
                Vote::Negative => {
                    a[1] += c * wi;
                    a[2] += c * (1.0 - wi);
                    a[3] += c * (1.0 - wi);
                }
                Vote::Missing => {}
            }
        }
    }
    let raters = acc
        .iter()
        .zip(&previous.raters)
        .map(|(a, prev)| {
            let se = if a[1] > 0.0 { a[0] / a[1] } else { prev.sensitivity };
            let sp = if a[3] > 0.0 { a[2] / a[3] } else { prev.specificity };
            RaterAccuracy::new(clamp_unit(se), clamp_unit(sp))
        })
        .collect();
    LatentClassModel::new(clamp_unit(pos_mass / total), raters)
}

fn run_em(data: &VotePatternTable, start: LatentClassModel, options: &EmOptions) -> EmFit {
    let mut model = start;
    let mut posteriors = Vec::with_capacity(data.patterns().len());
    let mut lls = Vec::new();
    let mut stop_reason = StopReason::MaxIter;
    let mut iterations = 0;

    for iter in 0..options.max_iter {
        let ll = e_step(data, &model, &mut posteriors);
        let previous_ll = lls.last().copied();
        lls.push(ll);
        let next = m_step(data, &posteriors, &model);
        let change = next.max_abs_diff(&model);
        model = next;
        iterations = iter + 1;
        if change < options.param_tol {
            stop_reason = StopReason::ParamTol;
            break;
        }
        if let Some(prev) = previous_ll {
            if (ll - prev).abs() <= options.loglik_tol * prev.abs() {
                stop_reason = StopReason::LoglikTol;
                break;
            }
        }
    }

    let model = model.canonical();
    let final_ll = e_step(data, &model, &mut posteriors);
    lls.push(final_ll);
    EmFit {
        model,
        trace: EmTrace {
            iterations,
            log_likelihoods: lls,
            converged: stop_reason != StopReason::MaxIter,
            stop_reason,
        },
        posteriors,
    }
}
