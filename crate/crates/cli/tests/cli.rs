use std::path::Path;
use std::process::{Command, Output};

use permres::catalog;
use permres::io::{self, CertificateDoc};
use permres::ring::RingSpec;
use serde_json::Value;

fn permres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permres")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_module(dir: &Path, group: &str, p: u32, n: usize) -> String {
    let g = catalog::group(group).unwrap();
    let m = catalog::jordan_block(g, RingSpec::gf(p).unwrap(), n).unwrap();
    let path = dir.join(format!("{group}_J{n}.json"));
    std::fs::write(&path, io::to_json(&io::module_file_doc(&m))).unwrap();
    path.to_str().unwrap().to_string()
}

fn term_ranks(doc: &Value, key: &str) -> Vec<u64> {
    doc[key]["terms"].as_array().unwrap().iter().map(|t| t["rank"].as_u64().unwrap()).collect()
}

#[test]
fn resolve_trivial_c2_gf2() {
    let o = permres(&["resolve-trivial", "--group", "C2", "--ring", "gf2"]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["schema"], "permres/1");
    // P = (kC2 ← k) over the target k: spliced ranks (1, 2, 1)
    let mut ranks = term_ranks(&doc, "target");
    ranks.extend(term_ranks(&doc, "complex"));
    assert_eq!(ranks, vec![1, 2, 1]);
}

#[test]
fn tampered_certificate_fails_with_clause() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let o = permres(&["resolve-trivial", "--group", "C4", "--ring", "int", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let mut doc: CertificateDoc = io::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    doc.complex.differentials[0].entries[0][0] += 1;
    std::fs::write(&path, io::to_json(&doc)).unwrap();
    let o = permres(&["verify", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], false);
    assert!(report["violation"]["clause"].is_string());
}

#[test]
fn depth_zero_is_exhausted() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_module(dir.path(), "C3", 3, 2);
    let o = permres(&["resolve-module", "--module", &m, "--depth", "0"]);
    assert_eq!(code(&o), 3);
    let o = permres(&["resolve-module", "--module", &m]);
    assert_eq!(code(&o), 0);
}

#[test]
fn input_errors_exit_four() {
    assert_eq!(code(&permres(&["catalog", "C11"])), 4);
    assert_eq!(code(&permres(&["resolve-trivial", "--group", "C2", "--ring", "gf4"])), 4);
    assert_eq!(code(&permres(&["resolve-trivial", "--group", "C2"])), 4);
    assert_eq!(code(&permres(&["verify", "/nonexistent/cert.json"])), 4);
}

#[test]
fn unknown_fields_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let o = permres(&["resolve-trivial", "--group", "C2", "--ring", "gf2"]);
    let mut doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    doc["extra"] = Value::Bool(true);
    std::fs::write(&path, doc.to_string()).unwrap();
    assert_eq!(code(&permres(&["verify", path.to_str().unwrap()])), 4);
}

#[test]
fn output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_module(dir.path(), "C4", 2, 3);
    for args in [
        vec!["resolve-trivial", "--group", "D8", "--ring", "gf3"],
        vec!["omega-pair", "--module", &m, "--seed", "7"],
        vec!["g0", "--group", "S3", "--ring", "gf3"],
    ] {
        let (a, b) = (permres(&args), permres(&args));
        assert_eq!(code(&a), 0, "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn emitted_certificates_verify_on_reparse() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_module(dir.path(), "C2", 2, 1);
    let cases = [
        vec!["resolve-trivial", "--group", "C3", "--ring", "gf2"],
        vec!["mfree", "--group", "C2", "--ring", "gf2", "--m", "2"],
        vec!["qn", "--module", &m, "--n", "1"],
    ];
    for args in cases {
        let path = dir.path().join("out.json");
        let mut full = args.clone();
        full.extend(["--out", path.to_str().unwrap()]);
        assert_eq!(code(&permres(&full)), 0, "{args:?}");
        let o = permres(&["verify", path.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{args:?}");
        let doc: CertificateDoc = io::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let cert = io::certificate_from_doc(&doc).unwrap();
        assert!(permres::verify::verify_certificate(&cert).passed);
    }
}

#[test]
fn catalog_entries() {
    let o = permres(&["catalog", "V4", "Q8"]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let groups = doc["groups"].as_array().unwrap();
    assert_eq!(groups[0]["degree"], 4);
    assert_eq!(groups[0]["generators"].as_array().unwrap().len(), 2);
    assert_eq!(groups[1]["degree"], 8);
    assert_eq!(groups[1]["order"], 8);
}

#[test]
fn g0_report_for_s3_over_gf2() {
    let o = permres(&["g0", "--group", "S3", "--ring", "gf2"]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["simples"], serde_json::json!([1, 2]));
    assert_eq!(doc["spans"], true);
    assert_eq!(doc["cartan_invariants"], serde_json::json!(["2"]));
}

#[test]
fn koszul_command() {
    let o = permres(&["koszul", "--group", "C3", "--ring", "gf3"]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(term_ranks(&doc, "complex"), vec![1, 3, 3, 1]);
}
