use std::path::Path;
use std::process::{Command, Output};

use fearbd::commands::{self, Reproduction};
use fearbd::manifest::AGGREGATE_FILE;
use fearbd::{embedded, RunConfig, SweepManifest};
use fearbd_core::turing::Verdict;
use fearbd_core::Classification;

fn fearbd(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fearbd")).args(args).current_dir(cwd).env("FEARBD_OUT", cwd.join("out")).output().unwrap()
}

fn with_model(base: &str, replacements: &[(&str, &str)]) -> String {
    let mut text = embedded::text(base).unwrap().to_string();
    for (from, to) in replacements {
        assert!(text.contains(from), "{from} not in {base}");
        text = text.replacen(from, to, 1);
    }
    text
}

#[test]
fn analyze_fig1_predicts_a_single_unstable_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = fearbd(&["analyze", "--config", "fig1.cfg"], dir.path());
    // Embedded configs are not on disk; write one first.
    assert_eq!(out.status.code(), Some(1));
    std::fs::write(dir.path().join("fig1.cfg"), embedded::text("fig1.cfg").unwrap()).unwrap();
    let out = fearbd(&["analyze", "--config", "fig1.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/fig1").join(commands::ANALYSIS_FILE)).unwrap()).unwrap();
    assert_eq!(json["gamma"], 1);
    assert_eq!(json["pattern_predicted"], true);
    assert_eq!(json["unstable_modes"].as_array().unwrap().len(), 1);
    assert_eq!(json["config_hash"].as_str().unwrap().len(), 64);
    assert!(json["d_star"].as_f64().unwrap() > 1e11);
}

#[test]
fn analyze_fig2_predicts_three_unstable_modes() {
    let cfg = embedded::config("fig2.cfg").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = commands::analyze(&cfg, dir.path()).unwrap();
    let disp = report.dispersion.as_ref().unwrap();
    assert_eq!(disp.gamma, 3);
    assert!(disp.pattern_predicted);
    assert_eq!(report.verdict, Verdict::PatternPredicted);
}

#[test]
fn analyze_without_coexistence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("none.cfg"), with_model("fig1.cfg", &[("m = 1\n", "m = 5000\n")])).unwrap();
    let out = fearbd(&["analyze", "--config", "none.cfg", "--out", "a"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/analysis.json")).unwrap()).unwrap();
    assert!(json["mu_minus"].is_null());
    assert!(json["hypothesis_failure"].is_string());
}

#[test]
fn malformed_config_exits_1_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), with_model("fig1.cfg", &[("a = 0.1\n", "a = banana\n")])).unwrap();
    let out = fearbd(&["simulate", "--config", "bad.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 7") && err.contains("model.a"), "{err}");

    std::fs::write(dir.path().join("neg.cfg"), with_model("fig1.cfg", &[("\nd1 = ", "\nd1 = -")])).unwrap();
    let out = fearbd(&["analyze", "--config", "neg.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 13") && err.contains("model.d1"), "{err}");

    let out = fearbd(&["simulate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = fearbd(&["reproduce", "--figure", "9"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn positivity_rejection_exits_3_and_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let text = with_model(
        "decay.cfg",
        &[
            ("a = 0.1\n", "a = 1\n"),
            ("dt = 0.01\n", "dt = 0.5\n"),
            ("positivity_mode = halve-dt\n", "positivity_mode = reject\n"),
            ("u = 1\n", "u = 100\n"),
        ],
    );
    std::fs::write(dir.path().join("neg.cfg"), text).unwrap();
    let out = fearbd(&["simulate", "--config", "neg.cfg", "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("run").join(commands::CSV_FILE)).unwrap();
    assert!(csv.lines().count() > 1, "initial snapshot kept");
    let summary = std::fs::read_to_string(dir.path().join("run").join(commands::SUMMARY_FILE)).unwrap();
    assert!(summary.contains("\"status\": \"error\""), "{summary}");
}

#[test]
fn halving_recovers_where_rejection_fails() {
    let mut cfg = embedded::config("decay.cfg").unwrap();
    cfg.params.a = 1.0;
    cfg.solver.dt = 0.5;
    cfg.solver.t_end = 5.0;
    cfg.initial = fearbd::config::InitialCondition::Constant { u: 100.0, v: 1.0 };
    let dir = tempfile::tempdir().unwrap();
    let out = commands::simulate(&cfg, dir.path()).unwrap();
    assert!(out.summary.final_field.u.iter().all(|u| *u >= 0.0));
}

#[test]
fn config_round_trip_preserves_hash() {
    for name in ["fig1.cfg", "fig2.cfg", "decay.cfg"] {
        let cfg = embedded::config(name).unwrap();
        let again = RunConfig::parse(&cfg.to_ini()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        let mut renamed = cfg.clone();
        renamed.name = "elsewhere".into();
        assert_eq!(cfg.hash(), renamed.hash());
        let mut changed = cfg.clone();
        changed.params.d2 *= 1.5;
        assert_ne!(cfg.hash(), changed.hash());
    }
}

#[test]
fn sweep_writes_sorted_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("fig1.cfg"), embedded::text("fig1.cfg").unwrap()).unwrap();
    let manifest = "[sweep]\nname = quick\nbase = fig1.cfg\nparameter = d2\nvalues = 0.1, 0.02, 0.08, 0.05\nt_end = 1\n";
    std::fs::write(dir.path().join("quick.sweep"), manifest).unwrap();
    let out = fearbd(&["sweep", "--manifest", "quick.sweep", "--jobs", "2"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let agg = std::fs::read_to_string(dir.path().join("out/quick").join(AGGREGATE_FILE)).unwrap();
    let values: Vec<f64> = agg.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values, vec![0.02, 0.05, 0.08, 0.1]);
    assert!(agg.lines().skip(1).all(|l| l.split(',').nth(1) == Some("ok")));
    for v in &values {
        assert!(dir.path().join(format!("out/quick/d2={v}")).join(commands::CSV_FILE).exists());
    }
}

#[test]
fn empty_sweep_is_a_config_error() {
    let err = SweepManifest::parse("[sweep]\nname = e\nbase = fig1.cfg\nparameter = d2\nvalues = \n", embedded::config).unwrap_err();
    assert!(err.to_string().contains("values"));
    let err = SweepManifest::parse("[sweep]\nname = e\nbase = fig1.cfg\nparameter = zeta\nvalues = 1\n", embedded::config).unwrap_err();
    assert!(err.to_string().contains("zeta"));
}

#[test]
fn reproduce_sweep_figure_has_four_rows() {
    let dir = tempfile::tempdir().unwrap();
    let Reproduction::Sweep(rows) = commands::reproduce(3, dir.path(), 4).unwrap() else { panic!("figure 3 is a sweep") };
    assert_eq!(rows.len(), 4);
    assert!(rows.windows(2).all(|w| w[0].value < w[1].value));
    assert!(rows.iter().all(|r| r.status == "ok"));
    assert!(dir.path().join("fig3").join(AGGREGATE_FILE).exists());
}

/// The predicted instability settles into a stationary pattern on a longer horizon.
#[test]
fn predicted_patterns_emerge_on_long_horizon() {
    for (name, t_end) in [("fig1.cfg", 8000.0), ("fig2.cfg", 3000.0)] {
        let mut cfg = embedded::config(name).unwrap();
        cfg.solver.dt = 0.01;
        cfg.solver.t_end = t_end;
        let dir = tempfile::tempdir().unwrap();
        let report = commands::analyze(&cfg, dir.path()).unwrap();
        assert!(report.dispersion.as_ref().unwrap().pattern_predicted);
        let out = commands::simulate(&cfg, dir.path()).unwrap();
        assert_eq!(out.summary.classification, Classification::Patterned, "{name}: {:?}", out.summary.tail_variance_rate);
        assert!(out.summary.variance_u > 1e-4, "{name}: {}", out.summary.variance_u);
    }
}

#[test]
fn fig1_variance_is_grid_converged() {
    let dir = tempfile::tempdir().unwrap();
    let mut variances = Vec::new();
    for n in [256, 512] {
        let mut cfg = embedded::config("fig1.cfg").unwrap();
        cfg.n = n;
        variances.push(commands::simulate(&cfg, &dir.path().join(n.to_string())).unwrap().summary.variance_u);
    }
    let rel = (variances[0] - variances[1]).abs() / variances[1];
    assert!(rel < 0.1, "{variances:?}");
}
