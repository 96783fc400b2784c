use std::process::{Command, Output};

use asyncap::channel_file::{bundled, ChannelFile};

fn asyncap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asyncap"))
        .args(args)
        .env_remove("ASYNC_CAP_THREADS")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn header_value(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in output"))
        .to_string()
}

/// Parses the bounds CSV, reading `inf` as infinity.
fn read_csv(text: &str) -> Vec<Vec<f64>> {
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "rate,alpha_lower,alpha_upper,train_lower,train_upper,eta");
    lines
        .map(|l| {
            l.split(',')
                .map(|c| if c == "inf" { f64::INFINITY } else { c.parse().unwrap() })
                .collect()
        })
        .collect()
}

#[test]
fn channels_list_names_bundled_channels() {
    let o = asyncap(&["channels", "list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["fig3", "fig4", "zchannel"] {
        assert!(text.contains(name));
    }
}

#[test]
fn channels_validate_reports_constants() {
    let o = asyncap(&["channels", "validate", "fig3.json"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let c: f64 = header_value(&text, "capacity").parse().unwrap();
    let a0: f64 = header_value(&text, "sync_threshold").parse().unwrap();
    assert!((c - 0.368).abs() < 1e-3);
    assert!((a0 - 1.758).abs() < 1e-3);
}

#[test]
fn invalid_row_exits_2_with_row_index() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"schema_version":1,"name":"bad","input_alphabet":["0","1"],"output_alphabet":["0","1"],
            "star":"0","rows":[[0.9,0.1],[0.5,0.4]]}"#,
    )
    .unwrap();
    let o = asyncap(&["channels", "validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 1"));
    assert_eq!(asyncap(&["bounds", "missing-file.json"]).status.code(), Some(2));
}

#[test]
fn bounds_rows_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig3.csv");
    let o = asyncap(&["bounds", "fig3.json", "--rates", "0.368", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let rows = read_csv(&std::fs::read_to_string(&csv).unwrap());
    assert_eq!(rows.len(), 1);
    assert!((rows[0][1] - 0.12).abs() < 0.01);

    let o = asyncap(&["bounds", "fig4", "--rates", "C", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    let rows = read_csv(&std::fs::read_to_string(&csv).unwrap());
    assert!(rows[0][1] < 1e-6);
}

#[test]
fn zchannel_table_has_infinite_threshold_and_flat_upper_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("z.csv");
    let o = asyncap(&["bounds", "zchannel", "--rate-grid", "6", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(header_value(&stdout(&o), "sync_threshold"), "inf");
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows = read_csv(&text);
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| (r[2] - 2f64.ln()).abs() < 1e-6));

    // round trip through the parser and back
    let rendered: String = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|v| if v.is_infinite() { "inf".to_string() } else { format!("{v}") })
                .collect::<Vec<_>>()
                .join(",")
        })
        .map(|l| l + "\n")
        .collect();
    assert_eq!(text.lines().skip(1).collect::<Vec<_>>(), rendered.lines().collect::<Vec<_>>());
}

#[test]
fn rate_above_capacity_exits_3() {
    let o = asyncap(&["bounds", "fig3", "--rates", "0.1,1.0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn simulate_is_byte_identical_across_runs_and_threads() {
    let args = [
        "simulate", "fig3.json", "--scheme", "genie", "--alpha", "0", "--n", "100", "--M", "2", "--trials", "100",
        "--seed", "7",
    ];
    let a = asyncap(&args);
    let b = asyncap(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let one = Command::new(env!("CARGO_BIN_EXE_asyncap"))
        .args(["simulate", "fig3", "--scheme", "joint", "--alpha", "0.1", "--n", "40", "--trials", "50"])
        .env("ASYNC_CAP_THREADS", "1")
        .output()
        .unwrap();
    let many = Command::new(env!("CARGO_BIN_EXE_asyncap"))
        .args(["simulate", "fig3", "--scheme", "joint", "--alpha", "0.1", "--n", "40", "--trials", "50"])
        .env("ASYNC_CAP_THREADS", "8")
        .output()
        .unwrap();
    assert_eq!(one.stdout, many.stdout);
    let json: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert_eq!(json["result"]["mean_reaction_delay"], 100.0);
}

#[test]
fn joint_pre_registered_run() {
    let o = asyncap(&[
        "simulate", "fig3.json", "--scheme", "joint", "--alpha", "0.05", "--n", "200", "--M", "2", "--trials", "2000",
        "--seed", "1",
    ]);
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(json["result"]["max_error_rate"].as_f64().unwrap() <= 0.05);
}

#[test]
fn scheme_flag_conflicts_exit_4() {
    let base = ["simulate", "fig3", "--n", "20", "--alpha", "0.1", "--trials", "2"];
    let mut training = base.to_vec();
    training.extend(["--scheme", "training"]);
    assert_eq!(asyncap(&training).status.code(), Some(4));
    let mut joint = base.to_vec();
    joint.extend(["--scheme", "joint", "--eta", "0.5"]);
    assert_eq!(asyncap(&joint).status.code(), Some(4));
    assert_eq!(asyncap(&["simulate", "fig3", "--bogus"]).status.code(), Some(4));
}

#[test]
fn simulate_appends_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    for seed in ["1", "2"] {
        let o = asyncap(&[
            "simulate", "fig3", "--scheme", "genie", "--n", "10", "--alpha", "0.2", "--trials", "5", "--seed", seed,
            "--csv", csv.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("channel,scheme,"));
}

#[test]
fn show_round_trips_bundled_channels() {
    for name in ["fig3", "fig4", "zchannel"] {
        let o = asyncap(&["channels", "show", name]);
        assert!(o.status.success());
        let shown = ChannelFile::parse(&stdout(&o)).unwrap();
        assert_eq!(shown.to_channel().unwrap(), bundled(name).unwrap().to_channel().unwrap());
    }
}
