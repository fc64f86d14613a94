use std::path::PathBuf;
use std::process::{Command, Output};

fn scenario_file(tag: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("metastab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(format!("{tag}.json"));
    std::fs::write(&path, text).unwrap();
    path
}

fn metastab(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_metastab"));
    for var in [
        "METASTAB_FORMAT",
        "METASTAB_CAP",
        "METASTAB_JOBS",
        "METASTAB_SCENARIO",
        "METASTAB_OUT",
    ] {
        cmd.env_remove(var);
    }
    cmd.args(args).envs(env.iter().copied()).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const GAMMA: &str = r#"{"command":"gamma","L":"1","eps":"4","gap":{"kind":"constant","c":0}}"#;

#[test]
fn gamma_hand_instance_prints_two() {
    let path = scenario_file("gamma", GAMMA);
    let o = metastab(
        &[
            "run",
            "--scenario",
            path.to_str().unwrap(),
            "--format",
            "table",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert_eq!(row.split_whitespace().last(), Some("2"), "{row}");

    let o = metastab(&["--scenario", path.to_str().unwrap()], &[]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["reports"][0]["result"]["gamma"], "2");
    assert_eq!(doc["exit_code"], 0);
}

#[test]
fn abel_check_on_the_zero_sequence_passes() {
    let path = scenario_file(
        "zero",
        r#"{"command":"check-abel","sequence":{"kind":"zero"},"L":"1","eps":"1/4","gap":{"kind":"identity"},"n1":1,"n2":32,"p":64}"#,
    );
    let o = metastab(&["run", "--scenario", path.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn tiny_cap_on_an_oscillating_sequence_exhausts() {
    let path = scenario_file(
        "osc",
        r#"{"command":"search-n","sequence":{"kind":"geometric","r":"-1"},"predicate":{"kind":"partial_sums"},"eps":"1/2","gap":{"kind":"constant","c":1}}"#,
    );
    let o = metastab(
        &["run", "--scenario", path.to_str().unwrap(), "--cap", "10"],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    // the same cap through the environment
    let o = metastab(
        &["run", "--scenario", path.to_str().unwrap()],
        &[("METASTAB_CAP", "10")],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_descriptors_are_config_errors_with_a_location() {
    let path = scenario_file(
        "bad",
        r#"[{"command":"gamma","L":"1","eps":"4","gap":{"kind":"constant","c":0}},
            {"command":"gamma","L":"1","eps":"4","gap":{"kind":"cubic"}}]"#,
    );
    let o = metastab(&["run", "--scenario", path.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("scenario #1"), "{err}");

    let o = metastab(&["run", "--scenario", "/nonexistent/file.json"], &[]);
    assert_eq!(o.status.code(), Some(3));
    let o = metastab(&["run", "--format", "xml"], &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn worst_status_wins() {
    let path = scenario_file(
        "mixed",
        r#"[{"command":"search-n","sequence":{"kind":"geometric","r":"-1"},"predicate":{"kind":"partial_sums"},"eps":"1/2","gap":{"kind":"constant","c":1},"cap":3},
            {"command":"check-tauber","sequence":{"kind":"zero"},"L":"1","eps":"1","gap":{"kind":"identity"},"n1":0,"n2":0}]"#,
    );
    let o = metastab(&["run", "--scenario", path.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn csv_through_the_environment_and_out_file() {
    let path = scenario_file("csv", GAMMA);
    let out = path.with_extension("csv");
    let o = metastab(
        &[
            "run",
            "--scenario",
            path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        &[("METASTAB_FORMAT", "csv")],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        text,
        "predicate,eps,gap,N_found,bound,verdict\ngamma,4,0,,2,pass\n"
    );
}

#[test]
fn fuzz_is_seeded() {
    let a = metastab(
        &["fuzz", "--suite", "specker", "--count", "5", "--seed", "3"],
        &[],
    );
    let b = metastab(
        &["fuzz", "--suite", "specker", "--count", "5", "--seed", "3"],
        &[],
    );
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
