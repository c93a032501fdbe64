use std::process::{Command, Output};

use combprob::doppelkopf::{census, DeckModel};
use rug::Integer;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_combprob"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn csv_rows(body: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn record_value(body: &str, key: &str) -> String {
    csv_rows(body)
        .into_iter()
        .find(|row| row[0] == key)
        .unwrap_or_else(|| panic!("no {key} in {body}"))[1]
        .clone()
}

#[test]
fn birthday_threshold_and_values() {
    let rows = csv_rows(&stdout(&["birthday", "--multiplicity", "3", "--alpha", "0.5", "--format", "csv"]));
    assert_eq!(rows, vec![vec!["3", "0.5", "88"]]);

    let rows = csv_rows(&stdout(&["birthday", "--multiplicity", "2", "--n", "23", "--days", "365", "--format", "csv"]));
    assert!(rows[0][1].starts_with("0.5072972"), "{rows:?}");

    let rows = csv_rows(&stdout(&["birthday", "--multiplicity", "2", "--n", "0", "--format", "csv"]));
    assert_eq!(rows[0][1], "0");
}

#[test]
fn birthday_gregorian_and_series() {
    let rows = csv_rows(&stdout(&["birthday", "-m", "5", "--n", "125", "--gregorian", "--format", "csv"]));
    assert!(rows[0][1].starts_with("0.009980994"), "{rows:?}");

    let body = stdout(&["birthday", "-m", "2", "--n-range", "20:30:5", "--format", "csv"]);
    assert!(body.starts_with("n,w_2\n"));
    let rows = csv_rows(&body);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][0], "25");
}

#[test]
fn birthday_flag_conflicts_are_usage_errors() {
    let out = run(&["birthday", "--n", "3", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["birthday", "--multiplicity", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["birthday", "--multiplicity", "1", "--n", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dice_commands() {
    let rows = csv_rows(&stdout(&["dice", "sums", "--n", "3", "--format", "csv"]));
    let counts: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(
        counts,
        ["1", "3", "6", "10", "15", "21", "25", "27", "27", "25", "21", "15", "10", "6", "3", "1"]
    );
    let conv = stdout(&["dice", "sums", "--n", "7", "--convolution", "--format", "csv"]);
    let closed = stdout(&["dice", "sums", "--n", "7", "--format", "csv"]);
    assert_eq!(conv, closed);

    let body = stdout(&["dice", "wait", "--run-length", "4", "--moments", "--format", "csv"]);
    assert_eq!(record_value(&body, "expectation"), "1554");
    let body = stdout(&["dice", "wait", "--run-length", "1", "--median", "--format", "csv"]);
    assert_eq!(record_value(&body, "median"), "4");

    let rows = csv_rows(&stdout(&["dice", "wait", "--run-length", "2", "--pmf-upto", "3", "--format", "csv"]));
    assert_eq!(rows[2][1], "1");
    assert_eq!(rows[3][1], "5");

    assert_eq!(run(&["dice", "sums", "--n", "0"]).status.code(), Some(1));
    assert_eq!(run(&["dice", "wait", "--run-length", "0", "--median"]).status.code(), Some(1));
}

#[test]
fn doppelkopf_hochzeit_and_stats() {
    let body = stdout(&["doppelkopf", "hochzeit", "--format", "csv"]);
    assert_eq!(record_value(&body, "probability"), "11/47");
    assert!(record_value(&body, "decimal").starts_with("0.234"));

    let body = stdout(&["doppelkopf", "stats", "--format", "csv"]);
    assert_eq!(record_value(&body, "mean"), "264/47");
    assert_eq!(record_value(&body, "variance"), "48576/11045");
    assert_eq!(record_value(&body, "median"), "11/2");
}

#[test]
fn census_csv_round_trips_exact_integers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("census.csv");
    let out = run(&["doppelkopf", "census", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("probe"));

    let body = std::fs::read_to_string(&path).unwrap();
    assert!(body.starts_with("p,N_p,H_p,H_p/N\n"));
    let rows = csv_rows(&body);
    assert_eq!(rows.len(), 25);
    let expected = census(&DeckModel::canonical()).unwrap();
    let mut total = Integer::new();
    for (p, row) in rows.iter().enumerate() {
        assert_eq!(row[0], p.to_string());
        let n_p: Integer = row[1].parse().unwrap();
        let h_p: Integer = row[2].parse().unwrap();
        assert_eq!(&n_p, expected.logical(p as u32));
        assert_eq!(&h_p, expected.weighted(p as u32));
        total += h_p;
        if n_p != 0 {
            let digits = row[3].trim_start_matches(['0', '.']).replace('.', "");
            let mantissa = digits.split('e').next().unwrap();
            assert_eq!(mantissa.len(), 30, "{}", row[3]);
        }
    }
    assert_eq!(total.to_string(), "235809301462142612780721600");
    assert_eq!(rows[0][1], "25780447171287900");
    assert_eq!(rows[24][1], "2308743493056");
    assert_eq!(rows[23][1], "0");
}

#[test]
fn census_json_keeps_large_integers_as_strings() {
    let body = stdout(&["doppelkopf", "census", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 25);
    assert_eq!(rows[0]["N_p"], "25780447171287900");
    assert_eq!(rows[24]["p"], 24);
}

#[test]
fn small_deck_census_matches_brute_force() {
    let formula = stdout(&["doppelkopf", "census", "--deck", "6,3", "--format", "csv"]);
    let brute = stdout(&["doppelkopf", "census", "--deck", "6,3", "--brute-force", "--format", "csv"]);
    assert_eq!(formula, brute);
    assert_eq!(run(&["doppelkopf", "census", "--deck", "5,3"]).status.code(), Some(1));
}

#[test]
fn products_medians() {
    let body = stdout(&["products", "median", "--n", "2", "--bound", "1", "--exact", "--format", "csv"]);
    assert!(record_value(&body, "median_exact").starts_with("0.18668230"));
    let body = stdout(&["products", "median", "--n", "3", "--bound", "1", "--asymptotic", "--format", "csv"]);
    assert!(record_value(&body, "median_leading").starts_with("0.06948345"));
    assert!(record_value(&body, "median_asymptotic").starts_with("0.0689"));
    assert_eq!(run(&["products", "median", "--n", "3"]).status.code(), Some(1));
    assert_eq!(run(&["products", "median", "--n", "3", "--bound", "-1"]).status.code(), Some(1));

    let body = stdout(&["products", "lambert", "--x", "-0.18393972058572116", "--format", "csv"]);
    assert!(record_value(&body, "w").starts_with("-2.67834699"));
}

#[test]
fn products_series_are_xy_csv() {
    let body = stdout(&["products", "cdf", "--n", "3", "--bound", "2", "--grid", "10", "--format", "csv"]);
    assert!(body.starts_with("x,F_3(x)\n"));
    let rows = csv_rows(&body);
    assert_eq!(rows.len(), 11);
    assert_eq!(rows[0][1], "0");
    assert_eq!(rows[10][1].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn mc_is_deterministic_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = ["mc", "--bound", "2.718281828", "--factors", "500", "--reps", "10000", "--seed", "1", "--format", "csv"];
    let mut first: Vec<&str> = args.to_vec();
    first.extend(["--threads", "1", "--out", a.to_str().unwrap()]);
    let mut second: Vec<&str> = args.to_vec();
    second.extend(["--threads", "3", "--out", b.to_str().unwrap()]);
    assert!(run(&first).status.success());
    assert!(run(&second).status.success());
    let body = std::fs::read(&a).unwrap();
    assert_eq!(body, std::fs::read(&b).unwrap());

    let body = String::from_utf8(body).unwrap();
    let median: f64 = record_value(&body, "median").parse().unwrap();
    assert!(median.abs() <= 0.5, "median {median}");
}

#[test]
fn bench_reports_json() {
    let body = stdout(&["bench", "dkp_census", "w4_400"]);
    let v: serde_json::Value = serde_json::from_str(&body).unwrap();
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[0]["id"], "dkp_census");
    assert!(results.iter().all(|r| r["pass"] == true));
    assert!(v["threads"].as_u64().unwrap() >= 1);
    assert_eq!(run(&["bench", "nope"]).status.code(), Some(1));
}

#[test]
fn digits_flag() {
    let rows = csv_rows(&stdout(&["birthday", "--n", "23", "--digits", "3", "--format", "csv"]));
    assert_eq!(rows[0][1], "0.507");
    assert_eq!(run(&["birthday", "--n", "23", "--digits", "0"]).status.code(), Some(1));
}
