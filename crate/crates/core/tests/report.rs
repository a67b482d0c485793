use std::fs;
use std::path::Path;

use shellhier::functionals::{kirchhoff_energy, Normalization};
use shellhier::geometry::{SurfaceDescriptor, SurfacePatch};
use shellhier::kinematics::MidsurfaceDeformation;
use shellhier::material::Material;
use shellhier::report::emit_report;
use shellhier::study::{run_config, Command, Overrides, Report, RunOutput, StudyConfig};
use shellhier::Error;

fn roll_config(h_list: Vec<f64>) -> StudyConfig {
    let mut cfg = StudyConfig::from_json(
        r#"{
            "surface": { "family": "plate", "grid": [8, 8] },
            "regime": { "kind": "kirchhoff", "map": { "kind": "roll", "radius": 2.0 } }
        }"#,
    )
    .unwrap();
    cfg.h_list = h_list;
    cfg.resolve(&Overrides::default())
}

fn emit(out: &RunOutput, dir: &Path) -> Vec<String> {
    emit_report(out, dir)
        .unwrap()
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect()
}

#[test]
fn empty_report_carries_metadata_only() {
    let cfg = StudyConfig::default().resolve(&Overrides::default());
    let out = RunOutput {
        report: Report::empty(Command::EnergyEval, cfg),
        rows: vec![],
        plots: vec![],
        summary: String::new(),
        failure: None,
    };
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(emit(&out, dir.path()), ["report.json", "config.json"]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "energy_eval");
    assert!(v.get("results").is_none() && v.get("error").is_none());
}

#[test]
fn scaling_rows_match_h_list() {
    let out = run_config(Command::ScalingRun, &roll_config(vec![0.1, 0.05, 0.025, 0.0125]));
    assert!(out.failure.is_none(), "{}", out.summary);
    let dir = tempfile::tempdir().unwrap();
    let files = emit(&out, dir.path());
    assert!(files.contains(&"data.csv".to_string()));
    let text = fs::read_to_string(dir.path().join("data.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("h,E_h,E_h_over_h_beta,stretching,bending"));
    assert_eq!(lines.count(), 4);
    for name in ["energy", "ratio"] {
        let dat = fs::read_to_string(dir.path().join(format!("{name}.dat"))).unwrap();
        assert!(dat.starts_with("# "));
        assert_eq!(dat.lines().count(), 5);
    }
}

#[test]
fn reruns_and_replays_are_byte_identical() {
    let cfg = roll_config(vec![0.1, 0.05, 0.025, 0.0125]);
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    emit(&run_config(Command::ScalingRun, &cfg), a.path());
    emit(&run_config(Command::ScalingRun, &cfg), b.path());
    let echoed = fs::read_to_string(a.path().join("config.json")).unwrap();
    let replay = StudyConfig::from_json(&echoed).unwrap().resolve(&Overrides::default());
    assert_eq!(replay, cfg);
    emit(&run_config(Command::ScalingRun, &replay), c.path());
    for file in ["report.json", "config.json", "data.csv", "energy.dat"] {
        let bytes = fs::read(a.path().join(file)).unwrap();
        assert_eq!(bytes, fs::read(b.path().join(file)).unwrap(), "{file}");
        assert_eq!(bytes, fs::read(c.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let err = StudyConfig::from_json(r#"{ "inputs": { "modez": 3 } }"#).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
}

#[test]
fn failures_land_in_the_report() {
    let mut cfg = roll_config(vec![0.1, 0.05]);
    cfg.h_list.truncate(2);
    let out = run_config(Command::ScalingRun, &cfg);
    assert!(matches!(out.failure.as_deref(), Some(Error::Config(_))));
    assert!(out.report.error.is_some() && out.report.results.is_none());
    assert!(out.rows.is_empty());
}

#[test]
fn single_precision_kirchhoff_energy() {
    let energy = |p: &SurfacePatch<f32>| {
        kirchhoff_energy(p, &Material::new(1.0f32, 1.0).unwrap(), &MidsurfaceDeformation::roll(2.0f32), Normalization::Raw)
    };
    let p32 = SurfacePatch::<f32>::new(SurfaceDescriptor::plate(8)).unwrap();
    let p64 = SurfacePatch::<f64>::new(SurfaceDescriptor::plate(8)).unwrap();
    let e32 = energy(&p32).unwrap().value;
    let e64 = kirchhoff_energy(&p64, &Material::new(1.0, 1.0).unwrap(), &MidsurfaceDeformation::roll(2.0), Normalization::Raw)
        .unwrap()
        .value;
    assert!((e32 - e64).abs() <= 1e-5 * e64, "{e32} vs {e64}");
}
