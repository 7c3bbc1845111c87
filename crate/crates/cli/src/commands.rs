use std::collections::HashMap;
use std::path::Path;

use anyhow::{bail, Result};
use panelcheck::calibration::{bias_corrected_calibration, render_svg, write_curve_csv, ProbabilitySeries};
use panelcheck::consensus::{
    agreement_report, majority_reference, parse_reference, qualification_gate, rater_match_rates, write_reference,
    GateOutcome,
};
use panelcheck::data::{
    cohort_summary, parse_annotations, parse_pets, parse_predictions, write_annotations, write_predictions,
    AnnotationTable, LabelScheme, PredictionRecord,
};
use panelcheck::latent::RaterAccuracy;
use panelcheck::latent::{em_bootstrap_ci, EmOptions, VotePatternTable};
use panelcheck::metrics::{bootstrap_metrics, build_contingency};
use panelcheck::report::{emit_report, metrics_section, Format, ReportDocument};
use panelcheck::resample::{power_simulation, BootstrapSpec, CiMethod, PowerDesign};
use panelcheck::sim::{simulate_panel, simulate_probabilities, visit_id, PanelDesign, ProbabilityModel};
use serde_json::json;

use crate::args::{Command, Common, OutputFormat, PowerMode, SchemeChoice};
use crate::output::{sha256_file, Artifacts};

/// Name under which the classifier joins the panel in `em`.
const ALGORITHM_RATER: &str = "algorithm";

pub struct Outcome {
    pub primary: Vec<u8>,
    pub artifacts: Artifacts,
    /// 0, or 1 when a qualification gate failed.
    pub code: u8,
}

struct Context<'a> {
    common: &'a Common,
    scheme: LabelScheme,
    seed: Option<u64>,
    doc: ReportDocument,
    artifacts: Artifacts,
}

impl Context<'_> {
    /// The run's seed, drawn and announced on first use when none was given.
    fn seed(&mut self) -> u64 {
        *self.seed.get_or_insert_with(|| {
            let s: u64 = rand::random();
            eprintln!("panelcheck: no --seed given, using --seed {s}");
            s
        })
    }

    fn spec(&mut self) -> Result<BootstrapSpec> {
        let spec = BootstrapSpec::new(self.common.replicates, self.seed()).with_confidence(self.common.confidence);
        spec.validate()?;
        Ok(spec)
    }

    fn input(&mut self, role: &str, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.doc.add_input(role, &path.display().to_string(), digest);
        Ok(())
    }

    fn annotations(&mut self, path: &Path) -> Result<AnnotationTable> {
        self.input("annotations", path)?;
        Ok(parse_annotations(path, &self.scheme)?)
    }

    fn predictions(&mut self, path: &Path) -> Result<Vec<PredictionRecord>> {
        self.input("predictions", path)?;
        Ok(parse_predictions(path, &self.scheme)?)
    }

    fn finish(self, code: u8) -> Result<Outcome> {
        let format = match self.common.format {
            OutputFormat::Json => Format::Json,
            OutputFormat::Csv => Format::Csv,
        };
        Ok(Outcome {
            primary: emit_report(&self.doc, format)?,
            artifacts: self.artifacts,
            code,
        })
    }
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> panelcheck::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

pub fn run(common: &Common, command: &Command, echo: Vec<String>) -> Result<Outcome> {
    let mut cx = Context {
        common,
        scheme: match common.scheme {
            SchemeChoice::Binary => LabelScheme::binary(),
            SchemeChoice::Extended => LabelScheme::extended(),
        },
        seed: common.seed,
        doc: ReportDocument::new(echo),
        artifacts: Artifacts::default(),
    };

    match command {
        Command::Consensus {
            annotations,
            reference_out,
        } => {
            let table = cx.annotations(annotations)?;
            let reference = majority_reference(&table);
            let counts: serde_json::Map<_, _> = cx
                .scheme
                .classes()
                .iter()
                .zip(reference.reference_counts())
                .map(|(c, n)| (c.clone(), json!(n)))
                .collect();
            let unanimous = reference.visits().iter().filter(|v| v.unanimous).count();
            cx.doc.section(
                "consensus",
                json!({
                    "n_visits": reference.len(),
                    "unanimous": unanimous,
                    "no_consensus": reference.no_consensus(),
                    "reference_counts": counts,
                }),
            )?;
            if let Some(path) = reference_out {
                cx.artifacts
                    .add(path.clone(), csv_bytes(|b| write_reference(&reference, b))?);
            }
            cx.finish(0)
        }

        Command::Agreement { annotations } => {
            let table = cx.annotations(annotations)?;
            cx.doc.section("agreement", agreement_report(&table)?)?;
            cx.finish(0)
        }

        Command::Qualify {
            rate,
            annotations,
            reference,
            threshold,
        } => {
            let mut all_pass = true;
            if let Some(rate) = rate {
                let outcome = qualification_gate(*rate, *threshold)?;
                all_pass = outcome == GateOutcome::Pass;
                cx.doc.section(
                    "qualification",
                    json!({ "threshold": threshold, "rate": rate, "outcome": outcome }),
                )?;
            } else if let Some(path) = annotations {
                let table = cx.annotations(path)?;
                let reference = match reference {
                    Some(r) => {
                        cx.input("reference", r)?;
                        parse_reference(r, &cx.scheme)?
                    }
                    None => majority_reference(&table),
                };
                let mut raters = Vec::new();
                for m in rater_match_rates(&table, &reference)? {
                    let rate = m.rate.expect("every rater has counted votes");
                    let outcome = qualification_gate(rate, *threshold)?;
                    all_pass &= outcome == GateOutcome::Pass;
                    raters.push(json!({
                        "rater": m.rater,
                        "agreed": m.agreed,
                        "counted": m.counted,
                        "rate": rate,
                        "outcome": outcome,
                    }));
                }
                cx.doc
                    .section("qualification", json!({ "threshold": threshold, "raters": raters }))?;
            }
            cx.finish(if all_pass { 0 } else { 1 })
        }

        Command::Validate { predictions, reference } => {
            let preds = cx.predictions(predictions)?;
            cx.input("reference", reference)?;
            let labels = parse_reference(reference, &cx.scheme)?;
            let build = build_contingency(
                preds.iter().map(|p| (p.visit_id.as_str(), p.predicted_label)),
                &labels,
                &cx.scheme,
            )?;
            let spec = cx.spec()?;
            let intervals = bootstrap_metrics(&build.pairs, &spec)?;
            let t = build.table;
            cx.doc.section(
                "contingency",
                json!({
                    "tp": t.tp, "fp": t.fp, "fn": t.fn_, "tn": t.tn,
                    "skipped_no_prediction": build.skipped_no_prediction,
                    "skipped_no_consensus": build.skipped_no_consensus,
                    "skipped_unknown_visit": build.skipped_unknown_visit,
                }),
            )?;
            cx.doc.stochastic_section(
                "metrics",
                metrics_section(&intervals, &spec),
                spec.seed,
                spec.replicates,
            )?;
            cx.finish(0)
        }

        Command::Em {
            annotations,
            predictions,
            max_iter,
            restarts,
            waive_identifiability,
        } => {
            let mut table = cx.annotations(annotations)?;
            if let Some(path) = predictions {
                let preds = cx.predictions(path)?;
                let records: Vec<(String, String, _)> = table
                    .records()
                    .map(|(v, r, l)| (v.to_string(), r.to_string(), l))
                    .chain(
                        preds
                            .iter()
                            .map(|p| (p.visit_id.clone(), ALGORITHM_RATER.to_string(), p.predicted_label)),
                    )
                    .collect();
                table = AnnotationTable::from_records(cx.scheme.clone(), records)?;
            }
            let data = VotePatternTable::from_table(&table);
            let spec = cx.spec()?;
            let options = EmOptions {
                max_iter: *max_iter,
                waive_identifiability: *waive_identifiability,
                restarts: *restarts,
                restart_seed: spec.seed,
                ..EmOptions::default()
            };
            let boot = em_bootstrap_ci(&data, &spec, &options)?;
            let model = &boot.fit.model;
            let raters: Vec<_> = boot
                .raters
                .iter()
                .zip(&model.raters)
                .map(|(ci, acc)| {
                    json!({
                        "id": ci.rater,
                        "sensitivity": acc.sensitivity,
                        "sensitivity_ci": [ci.sensitivity.lower, ci.sensitivity.upper],
                        "specificity": acc.specificity,
                        "specificity_ci": [ci.specificity.lower, ci.specificity.upper],
                    })
                })
                .collect();
            let trace = &boot.fit.trace;
            cx.doc.stochastic_section(
                "em",
                json!({
                    "prevalence": model.prevalence,
                    "prevalence_ci": [boot.prevalence.lower, boot.prevalence.upper],
                    "raters": raters,
                    "loglik": boot.fit.log_likelihood(),
                    "iterations": trace.iterations,
                    "converged": trace.converged,
                    "stop_reason": trace.stop_reason,
                    "n_visits": data.total(),
                    "failed_replicates": boot.failed_replicates,
                }),
                spec.seed,
                spec.replicates,
            )?;
            cx.finish(0)
        }

        Command::Calibrate {
            predictions,
            reference,
            grid,
            curve_out,
            svg,
        } => {
            let preds = cx.predictions(predictions)?;
            cx.input("reference", reference)?;
            let labels = parse_reference(reference, &cx.scheme)?;
            let by_visit: HashMap<&str, &PredictionRecord> = preds.iter().map(|r| (r.visit_id.as_str(), r)).collect();
            let (mut p, mut y) = (Vec::new(), Vec::new());
            for v in labels.visits() {
                let (Some(pred), Some(truth)) = (by_visit.get(v.visit_id.as_str()), v.reference) else {
                    continue;
                };
                let Some(prob) = pred.probability else {
                    bail!("prediction for visit `{}` has no probability", v.visit_id);
                };
                p.push(prob);
                y.push(cx.scheme.is_positive(truth));
            }
            if p.is_empty() {
                return Err(panelcheck::Error::Empty(
                    "no visit has both a predicted probability and a consensus reference".into(),
                )
                .into());
            }
            let series = ProbabilitySeries::new(p, y)?;
            let spec = cx.spec()?;
            let report = bias_corrected_calibration(&series, &spec, *grid)?;
            cx.doc.stochastic_section(
                "calibration",
                json!({
                    "n": report.n,
                    "brier": report.brier,
                    "c_index": report.c_index,
                    "apparent_intercept": report.apparent.intercept,
                    "apparent_slope": report.apparent.slope,
                    "corrected_intercept": report.corrected_intercept,
                    "corrected_slope": report.corrected_slope,
                    "emax": report.emax,
                    "mean_abs_error": report.mean_abs_error,
                    "grid_points": report.curve.len(),
                    "failed_replicates": report.failed_replicates,
                }),
                spec.seed,
                spec.replicates,
            )?;
            if let Some(path) = curve_out {
                cx.artifacts
                    .add(path.clone(), csv_bytes(|b| write_curve_csv(&report, b))?);
            }
            if let Some(path) = svg {
                cx.artifacts.add(path.clone(), render_svg(&report).into_bytes());
            }
            cx.finish(0)
        }

        Command::Simulate {
            prevalence,
            raters,
            n,
            truth,
            predictions_out,
        } => {
            if common.scheme != SchemeChoice::Binary {
                bail!("simulate writes binary panels only");
            }
            let seed = cx.seed();
            let raters = raters.iter().map(|&(se, sp)| RaterAccuracy::new(se, sp)).collect();
            let (truth_labels, table) = simulate_panel(&PanelDesign::new(*prevalence, raters, *n, seed))?;
            let scheme = table.scheme().clone();
            let (pos, neg) = (scheme.positive(), scheme.parse("Other")?);
            if let Some(path) = truth {
                let mut w = String::from("visit_id,truth_label\n");
                for (i, &t) in truth_labels.iter().enumerate() {
                    w.push_str(&format!("{},{}\n", visit_id(i), scheme.name(if t { pos } else { neg })));
                }
                cx.artifacts.add(path.clone(), w.into_bytes());
            }
            if let Some(path) = predictions_out {
                // a separate stream, so adding predictions leaves the panel unchanged
                let series = simulate_probabilities(&truth_labels, &ProbabilityModel::default(), seed ^ 0x5052_4544)?;
                let records: Vec<PredictionRecord> = series
                    .probabilities()
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| PredictionRecord {
                        visit_id: visit_id(i),
                        predicted_label: if p >= 0.5 { pos } else { neg },
                        probability: Some(p),
                    })
                    .collect();
                cx.artifacts
                    .add(path.clone(), csv_bytes(|b| write_predictions(&records, &scheme, b))?);
            }
            Ok(Outcome {
                primary: csv_bytes(|b| write_annotations(&table, b))?,
                artifacts: cx.artifacts,
                code: 0,
            })
        }

        Command::Power {
            sensitivity,
            specificity,
            prevalence,
            n,
            sims,
            target,
            mode,
        } => {
            let seed = cx.seed();
            let method = match mode {
                PowerMode::Wald => CiMethod::Wald,
                PowerMode::Bootstrap => CiMethod::Bootstrap {
                    replicates: common.replicates,
                },
            };
            let design = PowerDesign {
                target_halfwidth: *target,
                confidence: common.confidence,
                method,
                ..PowerDesign::wald(*sensitivity, *specificity, *prevalence, *n, *sims, seed)
            };
            let report = power_simulation(&design)?;
            cx.doc.stochastic_section("power", report, seed, *sims)?;
            cx.finish(0)
        }

        Command::Cohort { pets } => {
            cx.input("pets", pets)?;
            let records = parse_pets(pets)?;
            cx.doc.section("cohort", cohort_summary(&records)?)?;
            cx.finish(0)
        }
    }
}
