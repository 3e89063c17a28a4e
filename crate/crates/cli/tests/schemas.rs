//! Checks CLI artifacts against the schema files in `schemas/`.

use std::path::PathBuf;
use std::process::Command;

use jsonschema::{Resource, Validator};
use serde_json::Value;

fn schema(name: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(format!("{name}.json"));
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn validator(name: &str) -> Validator {
    jsonschema::options()
        .with_resource("urn:levy-entropy:schema:process_spec", Resource::from_contents(schema("process_spec")).unwrap())
        .build(&schema(name))
        .unwrap()
}

fn check(v: &Validator, doc: &Value) {
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{errors:#?}\n{doc:#}");
}

fn run(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_levy-entropy")).args(args).output().unwrap();
    assert!(matches!(out.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn specs_match_schema() {
    let v = validator("process_spec");
    for spec in levy_entropy::experiments::builtin_specs() {
        check(&v, &serde_json::to_value(&spec).unwrap());
    }
    let bad = serde_json::json!({"family": "SaS", "params": {"alpha": 3, "gamma": 1}});
    assert!(!v.is_valid(&bad));
    let extra = serde_json::json!({"family": "Laplace", "params": {"scale": 1, "loc": 0}});
    assert!(!v.is_valid(&extra));
}

#[test]
fn verify_reports_match_schema() {
    let stdout = run(&["verify", "slope", "--tolerance", "slope=1e-9", "--spec", "builtins"]);
    let doc: Value = serde_json::from_slice(&stdout).unwrap();
    let report = validator("experiment_report");
    let reports = doc["reports"].as_array().unwrap();
    assert!(reports.iter().any(|r| r["status"] == "skipped"));
    assert!(reports.iter().any(|r| r["status"] == "fail"));
    for r in reports {
        check(&report, r);
    }
    check(&validator("run_config"), &doc["run_config"]);
}

#[test]
fn table_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let csv = run(&["table", "--report", path.to_str().unwrap()]);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    check(&validator("experiment_report"), &doc["reports"][0]);

    let table_schema = schema("hierarchy_table");
    let columns: Vec<&str> = table_schema["properties"]["rows"]["items"]["required"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(columns, levy_entropy::experiments::TABLE_COLUMNS);

    let mut reader = csv_rows(&csv);
    let header = reader.remove(0);
    assert_eq!(header, columns);
    let rows: Vec<Value> = reader
        .into_iter()
        .map(|r| {
            let mut obj = serde_json::Map::new();
            for (k, v) in columns.iter().zip(r) {
                let value = match v.parse::<f64>() {
                    Ok(x) if *k != "family" && *k != "spec_id" => serde_json::json!(x),
                    _ => Value::String(v),
                };
                obj.insert(k.to_string(), value);
            }
            Value::Object(obj)
        })
        .collect();
    check(&validator("hierarchy_table"), &serde_json::json!({"schema_version": 1, "t_star": 0.01, "rows": rows}));
}

#[test]
fn saved_config_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    run(&[
        "entropy",
        "--spec",
        r#"{"family":"Wiener","params":{"sigma2":1,"mu":0}}"#,
        "--t-grid",
        "geom:1:0.5:3",
        "--m",
        "16",
        "--save-config",
        path.to_str().unwrap(),
    ]);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    check(&validator("run_config"), &doc);
}

fn csv_rows(bytes: &[u8]) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(bytes)
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}
