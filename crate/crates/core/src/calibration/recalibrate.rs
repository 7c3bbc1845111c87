use serde::{Deserialize, Serialize};

use super::{expit, logit, ProbabilitySeries};
use crate::error::{Error, Result};

pub const MAX_NEWTON_ITER: usize = 100;
const STEP_TOL: f64 = 1e-10;

/// Logistic recalibration `P(y = 1) = expit(a + b·logit(p))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecalibrationFit {
    pub intercept: f64,
    pub slope: f64,
    pub iterations: usize,
}

impl RecalibrationFit {
    pub fn predict(&self, p: f64) -> f64 {
        expit(self.intercept + self.slope * logit(p))
    }
}

// log(1 + e^x) without overflow
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn log_likelihood(x: &[f64], y: &[bool], a: f64, b: f64) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let eta = a + b * xi;
            if yi {
                -softplus(-eta)
            } else {
                -softplus(eta)
            }
        })
        .sum()
}

/// Maximum-likelihood fit of the outcome on the logit of the predicted
/// probability, by Newton's method with step halving.
pub fn fit_recalibration(series: &ProbabilitySeries) -> Result<RecalibrationFit> {
    let y = series.outcomes();
    let x: Vec<f64> = series.probabilities().iter().map(|&p| logit(p)).collect();
    let positives = series.positives();
    if positives == 0 || positives == series.len() {
        return Err(Error::invalid("recalibration needs both outcome classes"));
    }
    let (min_x, max_x) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if min_x == max_x {
        return Err(Error::NotIdentifiable(
            "predicted probabilities do not vary, so the slope is unidentifiable".into(),
        ));
    }
    let extreme = |class: bool| {
        x.iter()
            .zip(y)
            .filter(|(_, &yi)| yi == class)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&v, _)| {
                (lo.min(v), hi.max(v))
            })
    };
    let (pos_lo, pos_hi) = extreme(true);
    let (neg_lo, neg_hi) = extreme(false);
    if neg_hi <= pos_lo || pos_hi <= neg_lo {
        return Err(Error::Separation);
    }

    let (mut a, mut b) = (0.0, 1.0);
    let mut ll = log_likelihood(&x, y, a, b);
    for iter in 1..=MAX_NEWTON_ITER {
        // gradient and observed information
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&xi, &yi) in x.iter().zip(y) {
            let mu = expit(a + b * xi);
            let r = f64::from(u8::from(yi)) - mu;
            let w = mu * (1.0 - mu);
            ga += r;
            gb += r * xi;
            haa += w;
            hab += w * xi;
            hbb += w * xi * xi;
        }
        let det = haa * hbb - hab * hab;
        if !(det.is_finite() && det > 0.0) {
            return Err(Error::NoConvergence(iter));
        }
        let da = (hbb * ga - hab * gb) / det;
        let db = (haa * gb - hab * ga) / det;

        let mut scale = 1.0;
        let (mut na, mut nb, mut nll);
        loop {
            na = a + scale * da;
            nb = b + scale * db;
            nll = log_likelihood(&x, y, na, nb);
            if nll >= ll - 1e-12 * ll.abs() || scale < 1e-8 {
                break;
            }
            scale /= 2.0;
        }
        let step = (na - a).abs().max((nb - b).abs());
        a = na;
        b = nb;
        ll = nll;
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NoConvergence(iter));
        }
        if step < STEP_TOL {
            return Ok(RecalibrationFit {
                intercept: a,
                slope: b,
                iterations: iter,
            });
        }
    }
    Err(Error::NoConvergence(MAX_NEWTON_ITER))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separation_detected() {
        let s = ProbabilitySeries::new(vec![0.1, 0.2, 0.8, 0.9], vec![false, false, true, true]).unwrap();
        assert!(matches!(fit_recalibration(&s), Err(Error::Separation)));
        // quasi-complete: the classes only meet at one value
        let s = ProbabilitySeries::new(vec![0.1, 0.5, 0.5, 0.9], vec![false, false, true, true]).unwrap();
        assert!(matches!(fit_recalibration(&s), Err(Error::Separation)));
    }

    #[test]
    fn score_equations_hold_at_the_fit() {
        let p = vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.35, 0.65];
        let y = vec![false, false, true, false, true, false, true, true, true, false, false];
        let s = ProbabilitySeries::new(p.clone(), y.clone()).unwrap();
        let f = fit_recalibration(&s).unwrap();
        let (mut ga, mut gb) = (0.0, 0.0);
        for (&pi, &yi) in p.iter().zip(&y) {
            let r = f64::from(u8::from(yi)) - f.predict(pi);
            ga += r;
            gb += r * logit(pi);
        }
        assert!(ga.abs() < 1e-8 && gb.abs() < 1e-8, "{ga} {gb}");
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(1000.0), 1000.0);
        assert!(softplus(-1000.0) >= 0.0);
        assert!((softplus(0.0) - 2f64.ln()).abs() < 1e-15);
    }
}
