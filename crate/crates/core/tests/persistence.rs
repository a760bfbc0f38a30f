use std::fs;

use dirac_lens::error::Error;
use dirac_lens::lens::OrientationMode;
use dirac_lens::search::{export_csv, load_results, run_census_with, save_results, CensusResult, Execution};

fn censuses(exec: Execution) -> Vec<CensusResult> {
    [32, 49]
        .into_iter()
        .map(|q| run_census_with(7, q, OrientationMode::Unoriented, exec).unwrap())
        .collect()
}

#[test]
fn round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let results = censuses(Execution::default());
    save_results(&results, &path).unwrap();
    assert_eq!(load_results(&path).unwrap(), results);
}

#[test]
fn files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    save_results(&censuses(Execution::Parallel), &a).unwrap();
    save_results(&censuses(Execution::Sequential), &b).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\n  \"format_version\": 1,\n  \"censuses\": [\n}").unwrap();
    match load_results(&path) {
        Err(Error::Format { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a format error, got {other:?}"),
    }
}

#[test]
fn wrong_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.json");
    fs::write(&path, "{\"format_version\": 2, \"censuses\": []}").unwrap();
    assert!(matches!(load_results(&path), Err(Error::Format { .. })));
}

#[test]
fn mismatched_member_shape_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    save_results(&censuses(Execution::default()), &path).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let member = &mut doc["censuses"][1]["families"][0]["members"][0];
    member["s"] = serde_json::json!([1, 6, 8]);
    fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    assert!(matches!(load_results(&path), Err(Error::Format { .. })));
}

#[test]
fn truncated_table_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    save_results(&censuses(Execution::default()), &path).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let rows = &mut doc["censuses"][1]["families"][0]["reduced_table"]["rows"][0];
    rows.as_array_mut().unwrap().pop();
    fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    assert!(matches!(load_results(&path), Err(Error::Format { .. })));
}

#[test]
fn csv_lists_every_member() {
    let results = censuses(Execution::default());
    let mut buf = Vec::new();
    export_csv(&results, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let members: usize = results.iter().flat_map(|r| &r.families).map(|f| f.members.len()).sum();
    assert_eq!(text.lines().count(), members + 1);
    assert!(text.contains("7,49,unoriented,0,"));
}
