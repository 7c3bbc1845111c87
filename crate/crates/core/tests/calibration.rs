use panelcheck::calibration::{
    bias_corrected_calibration, brier, c_index, fit_recalibration, render_svg, write_curve_csv, ProbabilitySeries,
};
use panelcheck::resample::{BootstrapSpec, ResampleMode};
use panelcheck::sim::{simulate_calibrated, simulate_outcomes, BetaShapes};
use panelcheck::Error;
use proptest::prelude::*;

/// Concordance by enumerating every (positive, negative) pair.
fn brute_force_c(p: &[f64], y: &[bool]) -> Option<f64> {
    let (mut score, mut pairs) = (0.0, 0u64);
    for (i, (&pi, &yi)) in p.iter().zip(y).enumerate() {
        for (&pj, &yj) in p.iter().zip(y).skip(i + 1) {
            if yi == yj {
                continue;
            }
            let (pos, neg) = if yi { (pi, pj) } else { (pj, pi) };
            pairs += 1;
            score += if pos > neg {
                1.0
            } else if pos == neg {
                0.5
            } else {
                0.0
            };
        }
    }
    (pairs > 0).then(|| score / pairs as f64)
}

fn series_strategy() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (1usize..=200).prop_flat_map(|n| {
        (
            // coarse values so ties are common
            prop::collection::vec((0u32..=20).prop_map(|k| f64::from(k) / 20.0), n),
            prop::collection::vec(any::<bool>(), n),
        )
    })
}

proptest! {
    #[test]
    fn c_index_matches_pair_counting((p, y) in series_strategy()) {
        let series = ProbabilitySeries::new(p.clone(), y.clone()).unwrap();
        match brute_force_c(&p, &y) {
            Some(expected) => prop_assert_eq!(c_index(&series).unwrap(), expected),
            None => prop_assert!(c_index(&series).is_err()),
        }
    }

    #[test]
    fn c_index_ignores_monotone_transforms((p, y) in series_strategy()) {
        let series = ProbabilitySeries::new(p, y).unwrap();
        if let Ok(c) = c_index(&series) {
            let squashed = series.map_probabilities(|x| x * x * x).unwrap();
            prop_assert_eq!(c_index(&squashed).unwrap(), c);
        }
    }

    #[test]
    fn brier_of_the_base_rate(positives in 0usize..=50, negatives in 0usize..=50) {
        prop_assume!(positives + negatives > 0);
        let n = positives + negatives;
        let r = positives as f64 / n as f64;
        let mut y = vec![true; positives];
        y.resize(n, false);
        let series = ProbabilitySeries::new(vec![r; n], y).unwrap();
        prop_assert!((brier(&series) - r * (1.0 - r)).abs() < 1e-15);
    }
}

#[test]
fn recalibration_recovers_the_generating_line() {
    let grid: Vec<f64> = (0..20_000).map(|i| 0.02 + 0.96 * i as f64 / 19_999.0).collect();
    for (a, b, tol) in [(0.0, 1.0, 0.06), (0.5, 2.0, 0.1)] {
        let series = simulate_outcomes(&grid, a, b, 2024).unwrap();
        let fit = fit_recalibration(&series).unwrap();
        assert!((fit.intercept - a).abs() < tol, "intercept {} vs {a}", fit.intercept);
        assert!((fit.slope - b).abs() < tol, "slope {} vs {b}", fit.slope);
    }
}

#[test]
fn constant_predictions_cannot_be_recalibrated() {
    let series = ProbabilitySeries::new(vec![0.3; 10], (0..10).map(|i| i < 3).collect()).unwrap();
    assert!(matches!(fit_recalibration(&series), Err(Error::NotIdentifiable(_))));
    assert!(matches!(
        bias_corrected_calibration(&series, &BootstrapSpec::new(10, 1), 100),
        Err(Error::NotIdentifiable(_))
    ));
}

#[test]
fn identity_resampling_removes_the_correction() {
    let series = simulate_outcomes(
        &(0..500).map(|i| 0.05 + 0.9 * i as f64 / 499.0).collect::<Vec<_>>(),
        0.2,
        0.8,
        3,
    )
    .unwrap();
    let spec = BootstrapSpec::new(25, 1).with_mode(ResampleMode::Identity);
    let report = bias_corrected_calibration(&series, &spec, 50).unwrap();
    assert!((report.corrected_slope - report.apparent.slope).abs() < 1e-12);
    assert!((report.corrected_intercept - report.apparent.intercept).abs() < 1e-12);
    for pt in &report.curve {
        assert!((pt.bias_corrected - pt.apparent).abs() < 1e-12);
    }
}

#[test]
fn report_shape_and_determinism() {
    let series = simulate_calibrated(1_500, BetaShapes::new(1.0, 1.0), 9).unwrap();
    let spec = BootstrapSpec::new(100, 77);
    let report = bias_corrected_calibration(&series, &spec, 40).unwrap();
    assert_eq!(report, bias_corrected_calibration(&series, &spec, 40).unwrap());

    assert_eq!(report.curve.len(), 40);
    assert!(report.curve.windows(2).all(|w| w[0].predicted < w[1].predicted));
    let lo = series.probabilities().iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(report.curve[0].predicted, lo);
    let emax = report
        .curve
        .iter()
        .map(|pt| (pt.predicted - pt.bias_corrected).abs())
        .fold(0.0, f64::max);
    assert_eq!(report.emax, emax);
    assert!(report.mean_abs_error >= 0.0 && report.mean_abs_error <= report.emax + 1e-12);

    let mut csv = Vec::new();
    write_curve_csv(&report, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next(), Some("predicted,apparent,bias_corrected"));
    assert_eq!(text.lines().count(), 41);

    let svg = render_svg(&report);
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn miscalibration_is_detected() {
    // overconfident predictions: true slope 0.5 on the logit scale
    let p: Vec<f64> = (0..3_000).map(|i| 0.01 + 0.98 * i as f64 / 2_999.0).collect();
    let series = simulate_outcomes(&p, 0.0, 0.5, 12).unwrap();
    let report = bias_corrected_calibration(&series, &BootstrapSpec::new(200, 5), 100).unwrap();
    assert!(report.corrected_slope < 0.7, "{}", report.corrected_slope);
    assert!(report.emax > 0.1, "{}", report.emax);
}
