//! Fixed inputs for the estimator benchmarks.

use panelcheck::calibration::ProbabilitySeries;
use panelcheck::latent::{RaterAccuracy, VotePatternTable};
use panelcheck::sim::{simulate_calibrated, simulate_panel, BetaShapes, PanelDesign};

/// Three raters of decreasing accuracy at 25% prevalence.
pub fn three_rater_panel(n: usize, seed: u64) -> VotePatternTable {
    let raters = vec![
        RaterAccuracy::new(0.95, 0.97),
        RaterAccuracy::new(0.90, 0.95),
        RaterAccuracy::new(0.85, 0.93),
    ];
    let (_, table) = simulate_panel(&PanelDesign::new(0.25, raters, n, seed)).expect("valid design");
    VotePatternTable::from_table(&table)
}

/// Uniform probabilities with outcomes drawn from them.
pub fn calibrated_series(n: usize, seed: u64) -> ProbabilitySeries {
    simulate_calibrated(n, BetaShapes::new(1.0, 1.0), seed).expect("valid shape")
}
