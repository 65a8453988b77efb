use std::fs;
use std::path::{Path, PathBuf};

use germlab::corpus::{default_dir, entry_ids, run_corpus, Provenance};
use germlab::pipeline::RunConfig;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("germlab-{}-{}", name, std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn copy_entry(from: &Path, to: &Path, id: &str) {
    for ext in ["germ", "json"] {
        fs::copy(from.join(format!("{}.{}", id, ext)), to.join(format!("{}.{}", id, ext))).unwrap();
    }
}

#[test]
fn shipped_corpus_passes() {
    let report = run_corpus(&default_dir(), None, &RunConfig::default()).unwrap();
    if !report.passed() {
        panic!("{}", report.table());
    }
    assert!(report.entries.len() >= 15);
    // every paper-sourced check names its anchor
    for e in &report.entries {
        for c in &e.checks {
            if c.source == Provenance::Paper {
                assert!(c.anchor.is_some(), "{} {}", e.id, c.check);
            }
        }
    }
}

#[test]
fn every_json_has_a_germ_file() {
    let dir = default_dir();
    for id in entry_ids(&dir).unwrap() {
        assert!(dir.join(format!("{}.germ", id)).exists(), "{}", id);
    }
}

#[test]
fn exact_id_filter() {
    let report = run_corpus(&default_dir(), Some("t"), &RunConfig::default()).unwrap();
    assert_eq!(report.entries.len(), 1);
    assert_eq!(report.entries[0].id, "t");
}

#[test]
fn malformed_dsl_is_reported_against_its_entry() {
    let dir = scratch("malformed");
    copy_entry(&default_dir(), &dir, "mfx1");
    copy_entry(&default_dir(), &dir, "zsq");
    fs::write(dir.join("mfx1.germ"), "map G : R^3 -> R^2\nvars x, y, z\nG1 = x*(y +\nG2 = x*z\n").unwrap();
    let report = run_corpus(&dir, None, &RunConfig::default()).unwrap();
    assert!(!report.passed());
    let bad = report.entries.iter().find(|e| e.id == "mfx1").unwrap();
    let err = bad.error.as_ref().expect("structured error");
    assert_eq!(err.id, "mfx1");
    assert!(err.message.contains("malformed DSL"), "{}", err.message);
    assert!(report.entries.iter().find(|e| e.id == "zsq").unwrap().passed());
    assert!(report.table().contains("FAIL mfx1"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bad_expectation_files_are_rejected() {
    let dir = scratch("badjson");
    copy_entry(&default_dir(), &dir, "zsq");
    fs::write(dir.join("zsq.json"), r#"{"id": "zsq", "description": "", "expectations": [{"check": "hwc", "germ": "f", "holds": true, "source": "paper"}]}"#).unwrap();
    let report = run_corpus(&dir, None, &RunConfig::default()).unwrap();
    let err = report.entries[0].error.as_ref().unwrap();
    assert!(err.message.contains("no anchor"), "{}", err.message);

    fs::write(dir.join("zsq.json"), r#"{"id": "other", "description": "", "expectations": []}"#).unwrap();
    let report = run_corpus(&dir, None, &RunConfig::default()).unwrap();
    assert!(report.entries[0].error.as_ref().unwrap().message.contains("declares id"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn wrong_expectation_fails_the_check() {
    let dir = scratch("wrong");
    copy_entry(&default_dir(), &dir, "mfx1");
    fs::write(
        dir.join("mfx1.json"),
        r#"{"id": "mfx1", "description": "", "expectations": [{"check": "square_det", "germ": "G", "expected": "x^3 - x*y^2", "source": "derived"}]}"#,
    )
    .unwrap();
    let report = run_corpus(&dir, None, &RunConfig::default()).unwrap();
    assert!(report.entries[0].error.is_none());
    assert!(!report.entries[0].checks[0].passed);
    fs::remove_dir_all(&dir).unwrap();
}
