//! Quality of predicted probabilities: Brier score, concordance, logistic
//! recalibration and bootstrap bias-corrected calibration curves.

mod plot;
mod recalibrate;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resample::{bootstrap_replicates, BootstrapSpec};

pub use plot::render_svg;
pub use recalibrate::{fit_recalibration, RecalibrationFit, MAX_NEWTON_ITER};

/// Probabilities are clamped to `[PROB_EPSILON, 1 − PROB_EPSILON]` before the logit.
pub const PROB_EPSILON: f64 = 1e-6;
pub const DEFAULT_GRID_SIZE: usize = 100;
/// Share of replicate refits allowed to fail.
pub const FAILURE_BUDGET: f64 = 0.01;

pub fn logit(p: f64) -> f64 {
    let p = p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON);
    (p / (1.0 - p)).ln()
}

pub fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Predicted probabilities of the positive class with binary outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilitySeries {
    p: Vec<f64>,
    y: Vec<bool>,
}

impl ProbabilitySeries {
    pub fn new(p: Vec<f64>, y: Vec<bool>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Empty("probability series is empty".into()));
        }
        if p.len() != y.len() {
            return Err(Error::invalid(format!(
                "{} probabilities for {} outcomes",
                p.len(),
                y.len()
            )));
        }
        if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::invalid(format!("probability {bad} outside [0, 1]")));
        }
        Ok(Self { p, y })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn outcomes(&self) -> &[bool] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.y.iter().filter(|&&y| y).count()
    }

    /// Rows `idx` (with repetition) as a new series.
    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            p: idx.iter().map(|&i| self.p[i]).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// Same outcomes with every probability passed through `f`.
    pub fn map_probabilities(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.p.iter().map(|&p| f(p)).collect(), self.y.clone())
    }
}

/// Mean squared difference between probability and outcome.
///
/// Summed with Neumaier compensation, so the result does not drift with `n`.
pub fn brier(series: &ProbabilitySeries) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for (&p, &y) in series.p.iter().zip(&series.y) {
        let d = p - f64::from(u8::from(y));
        let term = d * d;
        let t = sum + term;
        carry += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
    }
    (sum + carry) / series.len() as f64
}

/// Share of (positive, negative) pairs ranked correctly, ties counting one half.
/// Runs in `O(n log n)`.
pub fn c_index(series: &ProbabilitySeries) -> Result<f64> {
    let positives = series.positives() as u64;
    let negatives = series.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::invalid("concordance needs both outcome classes"));
    }
    let mut order: Vec<usize> = (0..series.len()).collect();
    order.sort_unstable_by(|&a, &b| series.p[a].total_cmp(&series.p[b]));

    // twice the concordant count, so ties stay integral
    let mut twice = 0u64;
    let mut negatives_below = 0u64;
    let mut i = 0;
    while i < order.len() {
        let value = series.p[order[i]];
        let (mut pos, mut neg) = (0u64, 0u64);
        while i < order.len() && series.p[order[i]] == value {
            if series.y[order[i]] {
                pos += 1;
            } else {
                neg += 1;
            }
            i += 1;
        }
        twice += 2 * pos * negatives_below + pos * neg;
        negatives_below += neg;
    }
    Ok(twice as f64 / (2 * positives * negatives) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub predicted: f64,
    pub apparent: f64,
    pub bias_corrected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub n: usize,
    pub brier: f64,
    pub c_index: f64,
    pub apparent: RecalibrationFit,
    pub corrected_intercept: f64,
    pub corrected_slope: f64,
    pub emax: f64,
    pub mean_abs_error: f64,
    pub curve: Vec<CurvePoint>,
    pub replicates: usize,
    pub failed_replicates: usize,
    pub seed: u64,
}

/// `size` equally spaced points from `lo` to `hi` inclusive.
fn grid(lo: f64, hi: f64, size: usize) -> Vec<f64> {
    let step = (hi - lo) / (size - 1) as f64;
    (0..size)
        .map(|i| if i == size - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Bootstrap bias-corrected calibration.
///
/// The apparent curve is the recalibration fitted on all data. Each replicate
/// refits on a resample; at any probability `t` the corrected curve is
/// `2·apparent(t) − mean_r replicate_r(t)`, and the corrected intercept and
/// slope are `2·(a, b) − mean_r (a_r, b_r)`. Emax is taken over a grid
/// spanning the observed probability range; the mean absolute error over
/// the observations themselves.
pub fn bias_corrected_calibration(
    series: &ProbabilitySeries,
    spec: &BootstrapSpec,
    grid_size: usize,
) -> Result<CalibrationReport> {
    spec.validate()?;
    if grid_size < 2 {
        return Err(Error::invalid("calibration grid needs at least two points"));
    }
    let apparent = fit_recalibration(series)?;
    let c = c_index(series)?;

    let fits: Vec<Option<RecalibrationFit>> =
        bootstrap_replicates(series.len(), spec, |idx| fit_recalibration(&series.select(idx)).ok());
    let valid: Vec<RecalibrationFit> = fits.iter().flatten().copied().collect();
    let failed = fits.len() - valid.len();
    let budget = (FAILURE_BUDGET * spec.replicates as f64).floor() as usize;
    if failed > budget || valid.is_empty() {
        return Err(Error::ReplicateFailures {
            failed,
            replicates: spec.replicates,
            budget,
        });
    }

    let m = valid.len() as f64;
    let mean_a = valid.iter().map(|f| f.intercept).sum::<f64>() / m;
    let mean_b = valid.iter().map(|f| f.slope).sum::<f64>() / m;
    let corrected = |t: f64| {
        let x = logit(t);
        let mean = valid.iter().map(|f| expit(f.intercept + f.slope * x)).sum::<f64>() / m;
        2.0 * apparent.predict(t) - mean
    };

    let (lo, hi) = series
        .probabilities()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
            (lo.min(p), hi.max(p))
        });
    let curve: Vec<CurvePoint> = grid(lo, hi, grid_size)
        .into_par_iter()
        .map(|g| CurvePoint {
            predicted: g,
            apparent: apparent.predict(g),
            bias_corrected: corrected(g),
        })
        .collect();
    let emax = curve
        .iter()
        .map(|pt| (pt.predicted - pt.bias_corrected).abs())
        .fold(0.0, f64::max);
    let deviations: Vec<f64> = series
        .probabilities()
        .par_iter()
        .map(|&p| (p - corrected(p)).abs())
        .collect();
    let mean_abs_error = deviations.iter().sum::<f64>() / deviations.len() as f64;

    Ok(CalibrationReport {
        n: series.len(),
        brier: brier(series),
        c_index: c,
        apparent,
        corrected_intercept: 2.0 * apparent.intercept - mean_a,
        corrected_slope: 2.0 * apparent.slope - mean_b,
        emax,
        mean_abs_error,
        curve,
        replicates: spec.replicates,
        failed_replicates: failed,
        seed: spec.seed,
    })
}

/// Curve as CSV: `predicted,apparent,bias_corrected`.
pub fn write_curve_csv<W: Write>(report: &CalibrationReport, out: W) -> Result<()> {
    let ser = |e: csv::Error| Error::Serialization(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["predicted", "apparent", "bias_corrected"])
        .map_err(ser)?;
    for pt in &report.curve {
        w.write_record([
            pt.predicted.to_string(),
            pt.apparent.to_string(),
            pt.bias_corrected.to_string(),
        ])
        .map_err(ser)?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))
}
