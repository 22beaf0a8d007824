use std::path::PathBuf;
use std::process::{Command, Output};

use fbl_core::{corpus, BundleSpecFile};
use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpus", "bundles", name]
        .iter()
        .collect();
    p.to_str().unwrap().to_string()
}

fn fbl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbl"))
        .args(args)
        .env_remove("FBL_TOL")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = fbl(&all);
    let v =
        serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (code(&out), v)
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn corpus_fixtures_validate() {
    for name in [
        "z2_trivial",
        "e3_trivial",
        "e3_trivial_contracted",
        "i2_trivial",
        "i2_action",
        "e3_partial",
        "z2_swap_action",
        "z2_partial",
    ] {
        let out = fbl(&["validate", &fixture(&format!("{name}.json"))]);
        assert_eq!(code(&out), 0, "{name}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn contracted_i2_fails_validation_with_a_witness() {
    let (c, v) = json(&["validate", &fixture("i2_trivial_contracted.json")]);
    assert_eq!(c, 1);
    assert_eq!(v["valid"], false);
    let failed: Vec<&Value> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["numeral"], "xii");
    assert!(failed[0]["witness"].is_array());
}

#[test]
fn mutated_mu_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = BundleSpecFile::explicit(&corpus::i2_action());
    let tensors = spec.explicit.as_mut().unwrap();
    let entry = tensors.mu.values_mut().find(|v| v.iter().any(|p| p[0] != 0.0)).unwrap();
    for p in entry.iter_mut() {
        p[0] *= 2.0;
    }
    let path = write_temp(&dir, "mutated.json", &serde_json::to_string(&spec).unwrap());
    let out = fbl(&["validate", &path]);
    assert_eq!(code(&out), 1);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("FAIL") && text.contains("witness"), "{text}");

    let untouched = BundleSpecFile::explicit(&corpus::i2_action());
    let path = write_temp(&dir, "explicit.json", &serde_json::to_string(&untouched).unwrap());
    assert_eq!(code(&fbl(&["validate", &path])), 0);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("malformed.json", "{\"format\": 1, \"kind\":"),
        (
            "version.json",
            r#"{"format": 7, "kind": "corpus", "name": "z2_trivial"}"#,
        ),
        (
            "unknown.json",
            r#"{"format": 1, "kind": "corpus", "name": "no_such_bundle"}"#,
        ),
        (
            "shape.json",
            r#"{"format": 1, "semigroup": {"table": [[0, 1], [1]]}, "kind": "trivial-line"}"#,
        ),
        (
            "key.json",
            r#"{"format": 1, "semigroup": {"corpus": "z2"}, "kind": "explicit",
                "explicit": {"dims": [1, 1], "mu": {"0-1": [[1, 0]]}}}"#,
        ),
    ];
    for (name, text) in cases {
        let path = write_temp(&dir, name, text);
        let out = fbl(&["validate", &path]);
        assert_eq!(code(&out), 2, "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
    assert_eq!(code(&fbl(&["info", "/no/such/file.json"])), 2);
    assert_eq!(code(&fbl(&["grading", &fixture("e3_partial.json")])), 2);
}

#[test]
fn non_inverse_semigroup_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    // left zero semigroup: every element is idempotent but they do not commute
    let path = write_temp(
        &dir,
        "left_zero.json",
        r#"{"format": 1, "semigroup": {"table": [[0, 0], [1, 1]]}, "kind": "trivial-line"}"#,
    );
    let (c, v) = json(&["validate", &path]);
    assert_eq!(c, 1);
    assert_eq!(v["valid"], false);
    assert!(v["error"].as_str().unwrap().contains("inverse"));
}

#[test]
fn analyze_i2_bundles() {
    let (c, v) = json(&["analyze", &fixture("i2_trivial.json")]);
    assert_eq!(c, 0);
    let r = &v["cross_sectional"];
    assert_eq!(r["injective"], true);
    assert_eq!(r["a0_zero"], false);
    assert!(r["ia_equals_ja"].is_null());
    assert!(r["notes"][0].as_str().unwrap().contains("zero element"));

    let (c, v) = json(&["analyze", &fixture("i2_action.json"), "--oracle"]);
    assert_eq!(c, 0);
    let r = &v["cross_sectional"];
    assert_eq!(r["injective"], true);
    assert_eq!(r["ia_equals_ja"], true);
    assert_eq!(r["ja_routes_agree"], true);
    assert_eq!(r["condition_iii"], true);
    let row = &r["norms"][0];
    assert!((row["oracle"].as_f64().unwrap() - row["ja_quotient"].as_f64().unwrap()).abs() < 1e-8);
    assert_eq!(v["grading"]["decomposition"]["dims"], serde_json::json!([4, 4]));
}

#[test]
fn analyze_e3_partial_reports_fiber_dimensions() {
    let (c, v) = json(&["analyze", &fixture("e3_partial.json")]);
    assert_eq!(c, 0);
    assert_eq!(v["dims"], serde_json::json!([2, 1, 0]));
    assert!(v["expectation"].is_object());
    assert_eq!(v["failures"], serde_json::json!([]));
}

#[test]
fn analyze_i3_skips_the_reduced_path() {
    let (c, v) = json(&["analyze", "i3_trivial"]);
    assert_eq!(c, 0);
    assert_eq!(v["semigroup"]["e_star_unitary"], false);
    assert!(v["cross_sectional"]["dims"]["ja"].is_null());
    let notes = v["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("E*-unitary")));
}

fn norm_row<'a>(v: &'a Value, label: &str) -> &'a Value {
    v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["label"] == label)
        .unwrap()
}

#[test]
fn norms_examples() {
    let (c, v) = json(&["norms", &fixture("z2_trivial.json")]);
    assert_eq!(c, 0);
    let sum = norm_row(&v, "sum");
    for key in ["ell1", "reduced", "ia_quotient", "ja_quotient", "oracle"] {
        assert!((sum[key].as_f64().unwrap() - 2.0).abs() < 1e-9, "{key}");
    }
    let zero = norm_row(&v, "zero");
    for key in ["ell1", "reduced", "ia_quotient", "ja_quotient", "oracle"] {
        assert_eq!(zero[key].as_f64().unwrap(), 0.0, "{key}");
    }

    let (_, v) = json(&["norms", &fixture("e3_trivial.json")]);
    let g = norm_row(&v, "zero_minus_e");
    assert!(g["reduced"].as_f64().unwrap() > 0.5);
    assert!(g["ia_quotient"].as_f64().unwrap() < 1e-9);
}

#[test]
fn extra_sections_are_appended() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(&dir, "s.json", r#"[{"label": "g", "coeffs": {"1": [[0, 1]]}}]"#);
    let (c, v) = json(&["norms", &fixture("z2_trivial.json"), "--sections", &path]);
    assert_eq!(c, 0);
    assert!((norm_row(&v, "g")["reduced"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let bad = write_temp(
        &dir,
        "bad.json",
        r#"[{"label": "g", "coeffs": {"1": [[0, 1], [1, 0]]}}]"#,
    );
    assert_eq!(
        code(&fbl(&["norms", &fixture("z2_trivial.json"), "--sections", &bad])),
        2
    );
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [
        vec![
            "analyze",
            "i2_action",
            "--oracle",
            "--grading-group",
            "z2",
            "--json",
            "--seed",
            "5",
        ],
        vec!["validate", "e3_partial", "--json"],
        vec!["regrep", "z2_swap_action", "--json"],
    ] {
        let a = fbl(&args);
        let b = fbl(&args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn tolerance_flag_and_environment() {
    let (_, v) = json(&["norms", "z2_trivial", "--tol", "1e-7"]);
    assert_eq!(v["tol"].as_f64().unwrap(), 1e-7);
    let out = Command::new(env!("CARGO_BIN_EXE_fbl"))
        .args(["norms", "z2_trivial", "--json"])
        .env("FBL_TOL", "1e-6")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["tol"].as_f64().unwrap(), 1e-6);
    assert_eq!(code(&fbl(&["info", "z2_trivial", "--tol", "3"])), 2);
}

#[test]
fn grading_search() {
    let (c, v) = json(&["grading", "i2_action", "--grading-group", "z2"]);
    assert_eq!(c, 0);
    assert_eq!(v["found"], true);
    let (c, v) = json(&["grading", "i2_action", "--grading-group", "z3"]);
    assert_eq!(c, 0);
    assert_eq!(v["found"], false);
    let group = [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpus", "groups", "z2.json"]
        .iter()
        .collect::<PathBuf>();
    let (c, v) = json(&["grading", "z2_trivial", "--grading-group", group.to_str().unwrap()]);
    assert_eq!(c, 0);
    assert_eq!(v["decomposition"]["dims"], serde_json::json!([1, 1]));
}

#[test]
fn filters_and_info() {
    let sg = [
        env!("CARGO_MANIFEST_DIR"),
        "..",
        "..",
        "corpus",
        "semigroups",
        "e3.json",
    ]
    .iter()
    .collect::<PathBuf>();
    let (c, v) = json(&["filters", sg.to_str().unwrap()]);
    assert_eq!(c, 0);
    assert_eq!(v["filters"].as_array().unwrap().len(), 3);

    let (c, v) = json(&["info", &fixture("z2_partial.json")]);
    assert_eq!(c, 0);
    assert_eq!(v["total_dim"], 3);
    assert_eq!(v["saturation_failures"], serde_json::json!([["g", "g"]]));
}

#[test]
fn regrep_emits_block_operators() {
    let (c, v) = json(&["regrep", &fixture("i2_action.json")]);
    assert_eq!(c, 0);
    assert_eq!(v["wordingham"]["injective"], true);
    let blocks = v["sections"][0]["operator"]["blocks"].as_object().unwrap();
    assert!(!blocks.is_empty());
    assert!((v["sections"][0]["reduced_norm"].as_f64().unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn analysis_refuses_invalid_bundles() {
    let out = fbl(&["analyze", &fixture("i2_trivial_contracted.json")]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a Fell bundle"));
}
