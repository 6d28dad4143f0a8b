use maasslift::plusform::eisenstein_star_full;
use maasslift::QuadField;
use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maasslift")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("maasslift-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn json_lines(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn verify_criterion_passes() {
    let out = run(&["verify", "--D", "3", "--N", "1", "--mode", "criterion"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let reports = json_lines(&out);
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["passed"], true);
    assert_eq!(reports[0]["report"]["failure_count"], 0);
}

#[test]
fn invalid_discriminant_or_level_exits_with_two() {
    let out = run(&["verify", "--D", "12", "--N", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not a fundamental discriminant"));
    assert_eq!(run(&["verify", "--D", "3", "--N", "6"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--D", "3", "--mode", "nonsense"]).status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_given_the_seed() {
    let strip = |out: &Output| {
        let mut v = json_lines(out);
        for r in &mut v {
            r["report"].as_object_mut().unwrap().remove("wall_time");
        }
        v
    };
    let args = ["verify", "--D", "7", "--N", "2", "--mode", "criterion,theta,hecke", "--seed", "17"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(json_lines(&a)[0]["seed"], 17);
}

#[test]
fn campaign_config_writes_one_report_per_task() {
    let dir = scratch("campaign");
    let reports = dir.join("reports");
    let config = dir.join("campaign.json");
    let body = serde_json::json!({
        "discriminants": [4, 15],
        "levels": [1, 7],
        "modes": ["gauss", "normsum", "ikeda"],
        "arithmetic": "float",
        "output_dir": reports,
    });
    std::fs::write(&config, body.to_string()).unwrap();
    let out = run(&["verify", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json_lines(&out).len(), 12);
    for name in ["gauss_D4_N1.json", "normsum_D15_N7.json", "ikeda_D15_N1.json"] {
        let text = std::fs::read_to_string(reports.join(name)).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["passed"], true, "{name}");
    }
    std::fs::write(&config, r#"{"discriminants": [4], "levels": [2], "modes": ["gauss"]}"#).unwrap();
    assert_eq!(run(&["verify", "--config", config.to_str().unwrap()]).status.code(), Some(2));
    std::fs::write(&config, "{not json").unwrap();
    assert_eq!(run(&["verify", "--config", config.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn lift_table_from_input_file() {
    let dir = scratch("lift");
    let k = QuadField::new(4).unwrap();
    let g = eisenstein_star_full(&k, 8, 40).unwrap();
    let input = dir.join("g.json");
    std::fs::write(&input, serde_json::to_string(&g).unwrap()).unwrap();
    let table = dir.join("table.json");
    let out = run(&[
        "lift", "--D", "4", "--N", "3", "--k", "8", "--input", input.to_str().unwrap(), "--upto", "3", "--out",
        table.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&table).unwrap()).unwrap();
    assert_eq!((v["D"].as_u64(), v["N"].as_u64(), v["k"].as_i64()), (Some(4), Some(3), Some(8)));
    let entries = v["entries"].as_array().unwrap();
    assert!(entries.len() > 20);
    // equal (ε, D det T) give equal values
    let mut seen = std::collections::HashMap::new();
    for e in entries {
        let key = (e["eps"].as_u64().unwrap(), e["ddet"].as_u64().unwrap());
        let value = e["value"].as_str().unwrap().to_string();
        assert_eq!(seen.entry(key).or_insert_with(|| value.clone()), &value);
    }
    // the default input is the same Eisenstein series
    let default = run(&["lift", "--D", "4", "--N", "3", "--k", "8", "--upto", "3"]);
    assert_eq!(stdout_json(&default), v);
    // too short an expansion, or a wrong weight, is rejected
    let short = dir.join("short.json");
    std::fs::write(&short, serde_json::to_string(&eisenstein_star_full(&k, 8, 5).unwrap()).unwrap()).unwrap();
    assert_eq!(run(&["lift", "--D", "4", "--N", "3", "--input", short.to_str().unwrap(), "--upto", "3"]).status.code(), Some(2));
    assert_eq!(run(&["lift", "--D", "4", "--k", "6", "--input", input.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn lift_rejects_non_plus_input() {
    let dir = scratch("nonplus");
    let k = QuadField::new(3).unwrap();
    let mut g = eisenstein_star_full(&k, 8, 40).unwrap();
    g.coeffs[1] = Some(maasslift::plusform::gauss_int(1));
    let input = dir.join("g.json");
    std::fs::write(&input, serde_json::to_string(&g).unwrap()).unwrap();
    let out = run(&["lift", "--D", "3", "--input", input.to_str().unwrap(), "--upto", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn theta_matrix_output() {
    let out = run(&["theta-matrix", "--D", "4", "--sigma", "0,-1,1,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["entries"].as_array().unwrap().len(), 4);
    let closed = run(&["theta-matrix", "--D", "4", "--sigma", "0,-1,1,0", "--closed"]);
    assert_eq!(stdout_json(&closed)["entries"], v["entries"]);
    assert_eq!(run(&["theta-matrix", "--D", "4", "--sigma", "1,1,1,1"]).status.code(), Some(2));
    assert_eq!(run(&["theta-matrix", "--D", "4", "--sigma", "1,0,0,1", "--closed"]).status.code(), Some(2));
}

#[test]
fn gauss_and_hecke_reps() {
    let out = run(&["gauss", "--D", "20"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let ms: Vec<u64> = v["moduli"].as_array().unwrap().iter().map(|r| r["m"].as_u64().unwrap()).collect();
    assert_eq!(ms, vec![4, 5, 20]);
    let out = run(&["hecke-reps", "--D", "3", "--N", "5", "--p", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["reps"].as_array().unwrap().len(), 27);
    assert_eq!(v["report"]["coinciding_pairs"], 0);
    assert_eq!(run(&["hecke-reps", "--D", "3", "--p", "7"]).status.code(), Some(2));
    assert_eq!(run(&["hecke-reps", "--D", "3", "--N", "2", "--p", "2"]).status.code(), Some(2));
}

#[test]
fn ikeda_subcommand() {
    let out = run(&["ikeda", "--D", "7", "--ell", "3", "--upto", "30", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["plus"], true);
    // a_{f*[3]}(1) = a_7(3) = 1 + χ_7(−3) = 2
    assert_eq!(v["coeffs"][0], "2");
    let dir = scratch("ikeda");
    let bad = dir.join("ed.json");
    std::fs::write(&bad, r#"{"weight":7,"level_m":1,"ap":[{"p":2,"re":1,"im":0},{"p":7,"re":5,"im":0}]}"#).unwrap();
    assert_eq!(run(&["ikeda", "--D", "7", "--input", bad.to_str().unwrap(), "--upto", "2"]).status.code(), Some(2));
    let short = dir.join("short.json");
    std::fs::write(&short, r#"{"weight":7,"level_m":1,"ap":[{"p":2,"re":1,"im":0},{"p":7,"re":343,"im":0}]}"#).unwrap();
    assert_eq!(run(&["ikeda", "--D", "7", "--input", short.to_str().unwrap(), "--upto", "3"]).status.code(), Some(2));
    assert_eq!(run(&["ikeda", "--D", "7", "--ell", "7"]).status.code(), Some(2));
}
