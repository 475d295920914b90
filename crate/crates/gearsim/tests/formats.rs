use std::path::{Path, PathBuf};

use gear_core::probe::PairOutcome;
use gear_core::sampler::{sample_coherent, sample_entangled, sample_single_photons};
use gear_core::{BellState, ProbeSpec};
use gearsim::dataset_io::{read_dataset, write_dataset};
use gearsim::table::Table;
use gearsim::{Error, ExperimentConfig};

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_configs_round_trip() {
    let mut n = 0;
    for entry in std::fs::read_dir(config_dir()).unwrap() {
        let path = entry.unwrap().path();
        let c = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{e}"));
        let again = ExperimentConfig::parse(&c.to_json(), "round-trip").unwrap();
        assert_eq!(c, again, "{}", path.display());
        assert_eq!(again.to_json(), c.to_json());
        n += 1;
    }
    assert!(n >= 8);
}

#[test]
fn unknown_key_reports_its_line() {
    let text = r#"{
  "experiment": {
    "kind": "fringe",
    "sweep": { "start": 0, "stop": 1, "points": 20 },
    "photons": 10,
    "photon": 10
  }
}"#;
    match ExperimentConfig::parse(text, "cfg.json") {
        Err(Error::Config { line, message, .. }) => {
            assert_eq!(line, 6, "{message}");
            assert!(message.contains("photon"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn semantic_errors_report_their_line() {
    let text = r#"{
  "seed": 1,
  "experiment": {
    "kind": "fringe",
    "sweep": {
      "start": 0,
      "stop": 1,
      "points": 1
    },
    "photons": 10
  }
}"#;
    let err = ExperimentConfig::parse(text, "cfg.json").unwrap_err();
    assert!(matches!(err, Error::Config { line: 5, .. }), "{err}");
    assert!(err.to_string().starts_with("cfg.json:5:"));
    assert!(err.to_json_line().contains("\"line\":5"));

    let wrong_probe = r#"{"experiment": {"kind": "coherent",
 "probe": {"strategy": "GearSinglePhoton"},
 "sweep": {"start": 0, "stop": 1, "points": 20}, "pulses": 3}}"#;
    let err = ExperimentConfig::parse(wrong_probe, "p.json").unwrap_err();
    assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");

    let syntax = "{\n  \"seed\": 1,\n  \"experiment\": {\n    \"kind\": \"bounds\",\n  }\n}";
    assert!(matches!(
        ExperimentConfig::parse(syntax, "s.json").unwrap_err(),
        Error::Config { line: 5, .. }
    ));
}

#[test]
fn csv_tables_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/t.csv");
    let mut t = Table::new("fringe", &["theta", "p_h"]);
    t.push(vec!["0.1".into(), "0.30000000000000004".into()]);
    t.push(vec!["1e-300".into(), "NaN".into()]);
    t.write(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# gearsim-csv v1 kind=fringe\ntheta,p_h\n"));
    let back = Table::read(&path).unwrap();
    assert_eq!(back, t);
    assert_eq!(back.floats("theta").unwrap()[1], 1e-300);

    std::fs::write(&path, "# gearsim-csv v9 kind=x\na\n1\n").unwrap();
    assert!(matches!(Table::read(&path), Err(Error::Format { line: 1, .. })));
}

#[test]
fn datasets_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let single = sample_single_photons(&ProbeSpec::gear(7).unwrap().with_transmissivity(0.7), 0.3, 500, 1).unwrap();
    let coherent = sample_coherent(&ProbeSpec::coherent(21, 3.0).unwrap(), 0.2, 200, 2).unwrap();
    let pairs = sample_entangled(
        &ProbeSpec::entangled(BellState::PhiMinus, 7, 11).unwrap().with_transmissivity(0.8),
        0.4,
        1.1,
        300,
        3,
    )
    .unwrap();
    for (name, d) in [("s", &single), ("c", &coherent), ("p", &pairs)] {
        let path = dir.path().join(name);
        write_dataset(&path, d).unwrap();
        assert_eq!(&read_dataset(&path).unwrap(), d);
    }
    assert!(pairs.counts_summary().pair(PairOutcome::LossA) > 0);
}

#[test]
fn corrupt_dataset_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d");
    let d = sample_single_photons(&ProbeSpec::gear(3).unwrap(), 0.3, 5, 1).unwrap();
    write_dataset(&path, &d).unwrap();
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("X\n");
    std::fs::write(&path, text).unwrap();
    match read_dataset(&path) {
        Err(Error::Format { line, .. }) => assert_eq!(line, 12),
        other => panic!("{other:?}"),
    }
}
