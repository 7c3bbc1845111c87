use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn panelcheck(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_panelcheck"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run panelcheck")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// The published 2×2 table as prediction and reference files.
fn table_two_inputs(dir: &Path) {
    let mut preds = String::from("visit_id,label,probability\n");
    let mut refs = String::from("visit_id,reference_label,unanimous,votes_wellness,votes_other\n");
    let cells = [
        (true, true, 125),
        (true, false, 31),
        (false, true, 20),
        (false, false, 446),
    ];
    let mut i = 0;
    for (pred, truth, n) in cells {
        for _ in 0..n {
            i += 1;
            let p = if pred { "Wellness" } else { "Other" };
            let (r, votes) = if truth { ("Wellness", "3,0") } else { ("Other", "0,3") };
            preds.push_str(&format!("t{i:03},{p},\n"));
            refs.push_str(&format!("t{i:03},{r},true,{votes}\n"));
        }
    }
    fs::write(dir.join("preds.csv"), preds).unwrap();
    fs::write(dir.join("ref.csv"), refs).unwrap();
}

#[test]
fn validate_reports_eight_metrics_with_intervals() {
    let dir = tempfile::tempdir().unwrap();
    table_two_inputs(dir.path());
    let out = panelcheck(
        dir.path(),
        &[
            "validate",
            "--predictions",
            "preds.csv",
            "--reference",
            "ref.csv",
            "--boot",
            "500",
            "--seed",
            "7",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();

    let keys: Vec<&str> = report.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["tool_version", "command", "seed", "inputs", "results"]);
    assert_eq!(report["seed"], 7);
    for input in report["inputs"].as_array().unwrap() {
        assert_eq!(input["sha256"].as_str().unwrap().len(), 64);
    }
    assert_eq!(report["results"]["contingency"]["tp"], 125);
    let metrics = &report["results"]["metrics"];
    assert_eq!(metrics["provenance"]["replicates"], 500);
    let sens = &metrics["sensitivity"];
    let (lo, est, hi) = (
        sens["lower"].as_f64().unwrap(),
        sens["estimate"].as_f64().unwrap(),
        sens["upper"].as_f64().unwrap(),
    );
    assert!(lo < est && est < hi);
    assert!((est - 125.0 / 145.0).abs() < 1e-15);
}

#[test]
fn csv_report_has_the_metric_table_header() {
    let dir = tempfile::tempdir().unwrap();
    table_two_inputs(dir.path());
    let out = panelcheck(
        dir.path(),
        &[
            "validate",
            "--predictions",
            "preds.csv",
            "--reference",
            "ref.csv",
            "--boot",
            "100",
            "--seed",
            "1",
            "--format",
            "csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("metric,estimate,lower,upper"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn qualification_gate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let pass = panelcheck(dir.path(), &["qualify", "--rate", "0.973", "--threshold", "0.85"]);
    assert_eq!(code(&pass), 0);
    let fail = panelcheck(dir.path(), &["qualify", "--rate", "0.84"]);
    assert_eq!(code(&fail), 1);
    let report: Value = serde_json::from_slice(&fail.stdout).unwrap();
    assert_eq!(report["results"]["qualification"]["outcome"], "fail");
    assert_eq!(code(&panelcheck(dir.path(), &["qualify", "--rate", "1.2"])), 2);
}

#[test]
fn unknown_visits_are_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    table_two_inputs(dir.path());
    fs::write(
        dir.path().join("stray.csv"),
        "visit_id,label,probability\nzz,Wellness,0.9\n",
    )
    .unwrap();
    let out = panelcheck(
        dir.path(),
        &[
            "validate",
            "--predictions",
            "stray.csv",
            "--reference",
            "ref.csv",
            "--seed",
            "1",
            "--out",
            "r.json",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn input_errors_exit_two_and_name_the_location() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("a.csv"),
        "visit_id,rater_id,label\nv1,r1,Wellness\nv1,r2,boarding\n",
    )
    .unwrap();
    let out = panelcheck(dir.path(), &["agreement", "--annotations", "a.csv"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("a.csv:3"));

    assert_eq!(
        code(&panelcheck(dir.path(), &["agreement", "--annotations", "missing.csv"])),
        2
    );
    assert_eq!(code(&panelcheck(dir.path(), &["agreement", "--no-such-flag"])), 2);
    assert_eq!(code(&panelcheck(dir.path(), &["frobnicate"])), 2);
}

#[test]
fn separation_is_a_numerical_failure_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("p.csv"),
        "visit_id,label,probability\na,Wellness,0.9\nb,Wellness,0.8\nc,Other,0.1\nd,Other,0.2\n",
    )
    .unwrap();
    fs::write(
        d.join("r.csv"),
        "visit_id,reference_label,unanimous,votes_wellness,votes_other\n\
         a,Wellness,true,3,0\nb,Wellness,true,3,0\nc,Other,true,0,3\nd,Other,true,0,3\n",
    )
    .unwrap();
    let out = panelcheck(
        d,
        &[
            "calibrate",
            "--predictions",
            "p.csv",
            "--reference",
            "r.csv",
            "--seed",
            "1",
            "--boot",
            "20",
            "--out",
            "cal.json",
            "--curve-out",
            "curve.csv",
        ],
    );
    assert_eq!(code(&out), 3);
    assert!(!d.join("cal.json").exists() && !d.join("curve.csv").exists());
}

#[test]
fn simulated_panel_flows_through_consensus_em_and_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sim = panelcheck(
        d,
        &[
            "simulate",
            "--prevalence",
            "0.25",
            "--rater",
            "0.95:0.97",
            "--rater",
            "0.90:0.95",
            "--rater",
            "0.85:0.93",
            "--n",
            "3000",
            "--seed",
            "5",
            "--out",
            "panel.csv",
            "--truth",
            "truth.csv",
            "--predictions-out",
            "preds.csv",
        ],
    );
    assert_eq!(code(&sim), 0);
    let header = fs::read_to_string(d.join("panel.csv")).unwrap();
    assert!(header.starts_with("visit_id,rater_id,label\n"));
    assert_eq!(fs::read_to_string(d.join("truth.csv")).unwrap().lines().count(), 3001);

    let cons = panelcheck(
        d,
        &["consensus", "--annotations", "panel.csv", "--reference-out", "ref.csv"],
    );
    assert_eq!(code(&cons), 0);
    let report: Value = serde_json::from_slice(&cons.stdout).unwrap();
    assert_eq!(report["seed"], Value::Null);
    assert_eq!(report["results"]["consensus"]["n_visits"], 3000);

    let em = panelcheck(d, &["em", "--annotations", "panel.csv", "--boot", "100", "--seed", "3"]);
    assert_eq!(code(&em), 0, "{}", String::from_utf8_lossy(&em.stderr));
    let report: Value = serde_json::from_slice(&em.stdout).unwrap();
    let fit = &report["results"]["em"];
    assert!((fit["prevalence"].as_f64().unwrap() - 0.25).abs() < 0.03);
    assert_eq!(fit["raters"].as_array().unwrap().len(), 3);
    assert_eq!(fit["converged"], true);

    let with_algorithm = panelcheck(
        d,
        &[
            "em",
            "--annotations",
            "panel.csv",
            "--predictions",
            "preds.csv",
            "--boot",
            "50",
            "--seed",
            "3",
        ],
    );
    let report: Value = serde_json::from_slice(&with_algorithm.stdout).unwrap();
    let raters = report["results"]["em"]["raters"].as_array().unwrap();
    assert_eq!(raters.last().unwrap()["id"], "algorithm");

    let cal = panelcheck(
        d,
        &[
            "calibrate",
            "--predictions",
            "preds.csv",
            "--reference",
            "ref.csv",
            "--boot",
            "100",
            "--seed",
            "3",
            "--curve-out",
            "curve.csv",
            "--svg",
            "curve.svg",
        ],
    );
    assert_eq!(code(&cal), 0, "{}", String::from_utf8_lossy(&cal.stderr));
    let curve = fs::read_to_string(d.join("curve.csv")).unwrap();
    assert!(curve.starts_with("predicted,apparent,bias_corrected\n"));
    assert!(fs::read_to_string(d.join("curve.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn two_raters_need_an_explicit_waiver() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sim = panelcheck(
        d,
        &[
            "simulate",
            "--prevalence",
            "0.3",
            "--rater",
            "0.9:0.9",
            "--rater",
            "0.8:0.9",
            "--n",
            "300",
            "--seed",
            "1",
        ],
    );
    fs::write(d.join("two.csv"), sim.stdout).unwrap();
    let refused = panelcheck(d, &["em", "--annotations", "two.csv", "--boot", "10", "--seed", "1"]);
    assert_eq!(code(&refused), 2);
    let waived = panelcheck(
        d,
        &[
            "em",
            "--annotations",
            "two.csv",
            "--boot",
            "10",
            "--seed",
            "1",
            "--waive-identifiability",
        ],
    );
    assert_ne!(code(&waived), 2);
}

#[test]
fn missing_seed_is_drawn_and_announced() {
    let dir = tempfile::tempdir().unwrap();
    let out = panelcheck(
        dir.path(),
        &[
            "power",
            "--sensitivity",
            "0.86",
            "--specificity",
            "0.94",
            "--prevalence",
            "0.23",
            "--n",
            "100",
            "--sims",
            "50",
        ],
    );
    assert_eq!(code(&out), 0);
    let stderr = String::from_utf8_lossy(&out.stderr);
    let announced: u64 = stderr.rsplit("--seed ").next().unwrap().trim().parse().unwrap();
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["seed"], announced);
}

#[test]
fn cohort_summary_by_species() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("pets.csv"),
        "visit_id,species,sex,age_years\nv1,canine,female,2\nv2,canine,male,6\nv3,canine,male_neutered,11\nv4,feline,female_spayed,\n",
    )
    .unwrap();
    let out = panelcheck(dir.path(), &["cohort", "--pets", "pets.csv"]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let cohort = &report["results"]["cohort"];
    assert_eq!(cohort["total"], 4);
    assert_eq!(cohort["species"][0]["age_median"], 6.0);
    assert_eq!(cohort["species"][1]["age_missing"], 1);
}
