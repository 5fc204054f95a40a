//! The `tpa` binary on the shipped fixture documents.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tpa_core::cli::action_json;
use tpa_core::fixtures;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn fixture(name: &str) -> PathBuf {
    fixture_dir().join(format!("{}.json", name.replace('/', "--")))
}

fn tpa(args: &[&str]) -> (i32, Vec<Value>) {
    let out = Command::new(env!("CARGO_BIN_EXE_tpa")).args(args).arg("--json").output().expect("binary runs");
    let lines = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("line-delimited JSON"))
        .collect();
    (out.status.code().unwrap(), lines)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn shipped() -> Vec<(String, String)> {
    let mut all: Vec<(String, String)> =
        fixtures::positives().into_iter().map(|(n, t)| (n.to_string(), action_json(&t))).collect();
    all.extend(fixtures::negatives().into_iter().map(|n| (n.name.to_string(), action_json(&n.action))));
    all
}

/// Set `TPA_WRITE_FIXTURES=1` to regenerate the fixture documents.
#[test]
fn shipped_fixtures_match_the_library() {
    let write = std::env::var("TPA_WRITE_FIXTURES").is_ok();
    for (name, doc) in shipped() {
        let file = fixture(&name);
        if write {
            std::fs::write(&file, &doc).unwrap();
        }
        let on_disk = std::fs::read_to_string(&file).unwrap_or_else(|_| panic!("{} missing", file.display()));
        assert_eq!(on_disk, doc, "{name} is stale");
    }
}

#[test]
fn validate_passes_on_fix_c() {
    let (code, lines) = tpa(&["validate", "--input", path(&fixture("fix-c"))]);
    assert_eq!(code, 0);
    let checks = lines[0]["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["status"] == "pass"));
}

#[test]
fn validate_fails_on_a_negative() {
    let (code, _) = tpa(&["validate", "--input", path(&fixture("fix-f/twist-dropped"))]);
    assert_eq!(code, 1);
}

#[test]
fn schema_errors_exit_two_with_a_path() {
    let dir = std::env::temp_dir().join(format!("tpa-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(fixture("fix-a")).unwrap()).unwrap();
    doc["ring"]["blocks"][0]["p"] = 6.into();
    std::fs::write(&bad, doc.to_string()).unwrap();
    let (code, lines) = tpa(&["validate", "--input", path(&bad)]);
    assert_eq!(code, 2);
    let witness = &lines[0]["checks"][0]["witness"];
    assert_eq!(witness["path"], "ring.blocks[0].p");
    assert_eq!(witness["reason"], "not prime");
    let (code, _) = tpa(&["validate", "--input", path(&dir.join("absent.json"))]);
    assert_eq!(code, 2);
}

#[test]
fn globalize_fix_a_reports_eight_elements_and_writes_a_model() {
    let out = std::env::temp_dir().join(format!("tpa-glob-{}.json", std::process::id()));
    let (code, lines) = tpa(&["globalize", "--input", path(&fixture("fix-a")), "--output", path(&out)]);
    assert_eq!(code, 0, "{}", lines[0]);
    assert_eq!(lines[0]["data"]["cardinality"], "8");
    let (code, lines) = tpa(&["compare", "--input", path(&out), "--input2", path(&fixture("fix-a"))]);
    assert_eq!(code, 0, "{}", lines[0]);
    assert_eq!(lines[0]["data"]["verdict"], "equivalent");
    assert_eq!(lines[0]["data"]["isomorphic"], true);
}

#[test]
fn compare_reports_different_actions() {
    let (code, lines) = tpa(&["compare", "--input", path(&fixture("fix-a")), "--input2", path(&fixture("fix-c"))]);
    assert_eq!(code, 1);
    assert_eq!(lines[0]["data"]["verdict"], "different-actions");
}

#[test]
fn every_command_passes_on_fix_b() {
    for cmd in ["validate", "crossed", "orbits", "corestrict", "globalize", "morita"] {
        let (code, lines) = tpa(&[cmd, "--input", path(&fixture("fix-b"))]);
        assert_eq!(code, 0, "{cmd}: {}", lines[0]);
    }
    let (code, _) = tpa(&["crossed", "--mode", "exhaustive", "--input", path(&fixture("fix-b"))]);
    assert_eq!(code, 0);
}

#[test]
fn compare_two_fix_c_globalizations() {
    use tpa_core::globalization::{build_extended_twist_with, globalize, globalize_with, TwistOptions};
    use tpa_core::group::RepChoice;
    use tpa_core::io::{to_json, ModelDocument};
    use tpa_core::ring::BlockEmbedding;

    let t = fixtures::fix_c().verified().unwrap();
    let m1 = globalize(&t).unwrap().model().unwrap();
    let opts = TwistOptions { choice: RepChoice::MaxIndex, base_offset: 1 };
    let m2 = globalize_with(&t, build_extended_twist_with(&t, opts).unwrap()).unwrap().model().unwrap();
    let b = m2.action().ring();
    let order: Vec<usize> = (0..b.num_blocks()).rev().collect();
    let m2 = m2.transport(&BlockEmbedding::from_targets(b, b, &order).unwrap()).unwrap();
    let dir = std::env::temp_dir();
    let g1 = dir.join(format!("tpa-g1-{}.json", std::process::id()));
    let g2 = dir.join(format!("tpa-g2-{}.json", std::process::id()));
    std::fs::write(&g1, to_json(&ModelDocument::from_model(&m1))).unwrap();
    std::fs::write(&g2, to_json(&ModelDocument::from_model(&m2))).unwrap();
    let (code, lines) = tpa(&["compare", "--input", path(&g1), "--input2", path(&g2)]);
    assert_eq!(code, 0, "{}", lines[0]);
    assert_eq!(lines[0]["data"]["verdict"], "equivalent");
}
