//! Seeded bootstrap engine.
//!
//! Replicate `r` of a run with seed `s` draws from its own ChaCha8 stream:
//! the key is expanded from `s` (`SeedableRng::seed_from_u64`) and the
//! stream id is `r`. Replicate values are stored by index before any
//! aggregation, so results do not depend on the number of worker threads
//! or the order in which replicates finish.

mod power;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use power::{power_simulation, CiMethod, PowerDesign, PowerReport};

pub const DEFAULT_REPLICATES: usize = 2000;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ResampleMode {
    /// Ordinary bootstrap: `n` draws with replacement.
    #[default]
    WithReplacement,
    /// Every replicate is the full dataset in original order. Used to check
    /// that bias corrections vanish when resampling is switched off.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSpec {
    pub replicates: usize,
    pub seed: u64,
    pub confidence: f64,
    #[serde(default)]
    pub mode: ResampleMode,
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            seed: 0,
            confidence: DEFAULT_CONFIDENCE,
            mode: ResampleMode::WithReplacement,
        }
    }
}

impl BootstrapSpec {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Self {
            replicates,
            seed,
            ..Self::default()
        }
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    pub fn with_mode(mut self, mode: ResampleMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::invalid(format!("confidence {} outside (0, 1)", self.confidence)));
        }
        Ok(())
    }

    /// Lower and upper quantile levels of the percentile interval.
    pub fn quantile_levels(&self) -> (f64, f64) {
        let alpha = 1.0 - self.confidence;
        (alpha / 2.0, 1.0 - alpha / 2.0)
    }
}

/// A statistic on the full data plus its percentile interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub n_valid_replicates: usize,
    pub n_undefined_replicates: usize,
}

impl IntervalEstimate {
    pub fn half_width(&self) -> f64 {
        (self.upper - self.lower) / 2.0
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Independent generator for replicate `index` of a run seeded with `seed`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Fills `out` with `n` indices drawn uniformly with replacement from `0..n`.
pub fn resample_indices<R: Rng>(rng: &mut R, n: usize, out: &mut Vec<usize>) {
    out.clear();
    out.extend((0..n).map(|_| rng.random_range(0..n)));
}

/// Evaluates `f` on every replicate's index vector and returns the results
/// in replicate order.
///
/// Replicates run on the current rayon pool.
pub fn bootstrap_replicates<T, F>(n: usize, spec: &BootstrapSpec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[usize]) -> T + Sync,
{
    (0..spec.replicates)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(n),
            |buf, r| {
                match spec.mode {
                    ResampleMode::WithReplacement => {
                        let mut rng = replicate_rng(spec.seed, r as u64);
                        resample_indices(&mut rng, n, buf);
                    }
                    ResampleMode::Identity => {
                        buf.clear();
                        buf.extend(0..n);
                    }
                }
                f(buf)
            },
        )
        .collect()
}

/// Percentile interval from replicate values; `None` entries are counted as
/// undefined and dropped.
pub fn percentile_interval(
    estimate: f64,
    replicate_values: impl IntoIterator<Item = Option<f64>>,
    confidence: f64,
) -> Result<IntervalEstimate> {
    let mut valid = Vec::new();
    let mut undefined = 0;
    for v in replicate_values {
        match v {
            Some(x) if x.is_finite() => valid.push(x),
            _ => undefined += 1,
        }
    }
    if valid.is_empty() {
        return Err(Error::AllReplicatesUndefined(undefined));
    }
    sort_f64(&mut valid);
    let alpha = 1.0 - confidence;
    Ok(IntervalEstimate {
        estimate,
        lower: quantile_sorted(&valid, alpha / 2.0),
        upper: quantile_sorted(&valid, 1.0 - alpha / 2.0),
        n_valid_replicates: valid.len(),
        n_undefined_replicates: undefined,
    })
}

/// Percentile bootstrap interval of `statistic` over `units`.
pub fn bootstrap_ci<T, F>(units: &[T], statistic: F, spec: &BootstrapSpec) -> Result<IntervalEstimate>
where
    T: Sync,
    F: Fn(&[&T]) -> Option<f64> + Sync,
{
    spec.validate()?;
    if units.is_empty() {
        return Err(Error::Empty("bootstrap needs at least one unit".into()));
    }
    let full: Vec<&T> = units.iter().collect();
    let estimate = statistic(&full).ok_or(Error::UndefinedStatistic)?;
    let values = bootstrap_replicates(units.len(), spec, |idx| {
        let sample: Vec<&T> = idx.iter().map(|&i| &units[i]).collect();
        statistic(&sample)
    });
    percentile_interval(estimate, values, spec.confidence)
}

fn sort_f64(v: &mut [f64]) {
    v.sort_unstable_by(f64::total_cmp);
}

/// Sample quantile by linear interpolation between order statistics:
/// with sorted values `x[0..n]` and `h = (n - 1)·q`, the result is
/// `x[⌊h⌋] + (h − ⌊h⌋)·(x[⌊h⌋+1] − x[⌊h⌋])`.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("quantile of an empty set".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::invalid(format!("quantile level {q} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sort_f64(&mut sorted);
    Ok(quantile_sorted(&sorted, q))
}

/// [`quantile`] on data that is already sorted ascending and nonempty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let mut h = (sorted.len() - 1) as f64 * q;
    // levels such as 1 - 0.95 carry representation error; snap to the order statistic
    if (h - h.round()).abs() < 1e-9 {
        h = h.round();
    }
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}
