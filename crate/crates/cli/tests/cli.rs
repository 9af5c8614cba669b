use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rainbow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rainbow"))
        .args(args)
        .env_remove("RAINBOW_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn count_examples() {
    assert_eq!(
        stdout(&rainbow(&[
            "count", "--r", "1", "--lambda", "2", "--n", "8"
        ])),
        "82\n"
    );
    assert_eq!(
        stdout(&rainbow(&[
            "count", "--r", "1", "--lambda", "1", "--n", "5"
        ])),
        "21\n"
    );
    assert_eq!(stdout(&rainbow(&["count", "--n", "0"])), "1\n");
    assert_eq!(
        stdout(&rainbow(&[
            "count", "--r", "1", "--lambda", "1", "--n-list", "3,4,5"
        ])),
        "n,count\n3,4\n4,9\n5,21\n"
    );
    assert_eq!(
        stdout(&rainbow(&["count", "--irreducible", "--n", "3"])),
        "1\n"
    );
}

#[test]
fn count_json() {
    let out = stdout(&rainbow(&["count", "--n", "6", "--format", "json"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["counts"][0]["count"], "51");
    assert_eq!(v["r"], 1);
}

#[test]
fn exact_longest_distribution() {
    let out = stdout(&rainbow(&[
        "dist", "longest", "--exact", "--r", "1", "--lambda", "2", "--n", "5", "--digits", "4",
    ]));
    assert_eq!(
        out,
        "outcome,probability,cumulative,numerator,denominator\n\
         0,0.1250,0.1250,1,8\n\
         2,0.3750,0.5000,3,8\n\
         3,0.2500,0.7500,1,4\n\
         4,0.2500,1.0000,1,4\n"
    );
}

#[test]
fn limit_distributions() {
    let out = stdout(&rainbow(&[
        "dist", "longest", "--limit", "--kmax", "2", "--digits", "7",
    ]));
    assert_eq!(
        out,
        "outcome,probability,cumulative\n1,0.1111111,0.1111111\n2,0.0740741,0.1851852\n"
    );
    let out = stdout(&rainbow(&[
        "dist", "krainbow", "--limit", "--k", "2", "--bmax", "1", "--digits", "3",
    ]));
    assert_eq!(
        out,
        "outcome,probability,cumulative\n0,0.810,0.810\n1,0.162,0.972\n"
    );
}

#[test]
fn limit_mode_warns_about_n() {
    let out = rainbow(&["dist", "longest", "--limit", "--n", "50", "--kmax", "1"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ignored"));
}

#[test]
fn usage_errors_exit_2() {
    let both = rainbow(&["dist", "longest", "--exact", "--limit", "--n", "4"]);
    assert_eq!(both.status.code(), Some(2));
    let neither = rainbow(&["dist", "longest", "--n", "4"]);
    assert_eq!(neither.status.code(), Some(2));
    let zero = rainbow(&["count", "--r", "0", "--n", "4"]);
    assert_eq!(zero.status.code(), Some(2));
    let unknown = rainbow(&["experiment", "fig99"]);
    assert_eq!(unknown.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&unknown.stderr);
    for name in ["fig4", "fig6", "fig9", "fig12", "table1-uniform"] {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn asym_constants() {
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&rainbow(&["asym", "--r", "1", "--lambda", "1"]))).unwrap();
    assert!(v["rho"].as_str().unwrap().starts_with("0.333333333333"));
    assert!(v["c"].as_str().unwrap().starts_with("0.111111111111"));
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&rainbow(&["asym", "--r", "2", "--lambda", "4"]))).unwrap();
    let num = |key: &str| v[key].as_str().unwrap().parse::<f64>().unwrap();
    assert!((num("rho") - 0.540857).abs() < 5e-7);
    assert!((num("c") - 0.107902).abs() < 5e-7);
    for key in [
        "r",
        "lambda",
        "digits",
        "rho",
        "tau",
        "delta_hat",
        "c_F",
        "c",
        "alpha",
        "beta",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&rainbow(&["asym", "--r", "1", "--lambda", "2"]))).unwrap();
    assert!(v["rho"].as_str().unwrap().starts_with("0.381966"));
}

#[test]
fn sample_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.db");
    let b = dir.path().join("b.db");
    let stats = dir.path().join("s.csv");
    for path in [&a, &b] {
        stdout(&rainbow(&[
            "sample",
            "--r",
            "1",
            "--lambda",
            "1",
            "--n",
            "100",
            "--count",
            "10",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
            "--stats",
            stats.to_str().unwrap(),
            "--k",
            "2,5",
        ]));
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    let lines: Vec<_> = std::str::from_utf8(&text).unwrap().lines().collect();
    assert_eq!(lines.len(), 10);
    assert!(lines.iter().all(|l| l.len() == 100));
    let spectrum = stdout(&rainbow(&["spectrum", "--in", a.to_str().unwrap()]));
    assert_eq!(spectrum.lines().count(), 11);
    let csv = fs::read_to_string(&stats).unwrap();
    let mut rows = csv.lines();
    assert_eq!(
        rows.next().unwrap(),
        "sample_id,longest,second_longest,third_longest,n_rainbows,five_three_distance,x_2,x_5"
    );
    assert_eq!(rows.count(), 10);
}

#[test]
fn spectrum_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.db");
    fs::write(&path, "((..))..(..)\n").unwrap();
    let out = stdout(&rainbow(&["spectrum", "--in", path.to_str().unwrap()]));
    let mut lines = out.lines();
    let header: Vec<_> = lines.next().unwrap().split(',').collect();
    let row: Vec<_> = lines.next().unwrap().split(',').collect();
    let get = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(get("longest"), "5");
    assert_eq!(get("second_longest"), "3");
    assert_eq!(get("five_three_distance"), "4");
}

#[test]
fn malformed_input_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.db");
    fs::write(&path, "> ok\n((..))\n((.)\n").unwrap();
    let out = rainbow(&["spectrum", "--in", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let missing = rainbow(&["spectrum", "--in", "/nonexistent/file.db"]);
    assert_eq!(missing.status.code(), Some(4));
}

#[test]
fn spectrum_corpus_comparison_table() {
    let out = stdout(&rainbow(&[
        "spectrum",
        "--in",
        &data("corpus.db"),
        "--tail-k",
        "5,13,17",
        "--r",
        "4",
        "--lambda",
        "4",
    ]));
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines[0], "k,empirical,uniform_limit,structures");
    assert_eq!(lines.len(), 4);
    // longest rainbows are 11, 15, 23 and none, at n = 28
    assert!(lines[1].starts_with("5,0.250000,"));
    assert!(lines[2].starts_with("13,0.500000,"));
    assert!(lines[3].starts_with("17,0.750000,"));
    assert!(lines[1].ends_with(",4"));
    let rows = stdout(&rainbow(&[
        "spectrum",
        "--in",
        &data("corpus.db"),
        "--k",
        "11",
    ]));
    assert_eq!(rows.lines().count(), 5);
    assert!(rows
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("2,28,11,11,0,2,4,6,11;11,2"));
}

#[test]
fn cache_directory_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(
        stdout(&rainbow(&[
            "--cache-dir",
            d,
            "count",
            "--n",
            "40",
            "--r",
            "2"
        ])),
        stdout(&rainbow(&["count", "--n", "40", "--r", "2"]))
    );
    assert!(dir.path().join("counts_r2_l1_n40.json").exists());
    let smaller = Command::new(env!("CARGO_BIN_EXE_rainbow"))
        .args(["count", "--n", "20", "--r", "2"])
        .env("RAINBOW_CACHE_DIR", d)
        .output()
        .unwrap();
    assert_eq!(
        stdout(&smaller),
        stdout(&rainbow(&["count", "--n", "20", "--r", "2"]))
    );
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn table1_uniform_experiment() {
    let out = stdout(&rainbow(&["experiment", "table1-uniform"]));
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines[0], "# schema: table1-uniform v1");
    assert_eq!(lines[1], "k,probability");
    let want = [0.7179, 0.7936, 0.8295, 0.8514, 0.8666];
    for (line, w) in lines[2..].iter().zip(want) {
        let p: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((p - w).abs() < 5e-5, "{line}");
    }
}

#[test]
fn small_experiments_are_reproducible() {
    let args = [
        "experiment",
        "fig6",
        "--n",
        "60",
        "--kmax",
        "5",
        "--count",
        "500",
        "--seed",
        "3",
    ];
    let a = stdout(&rainbow(&args));
    assert_eq!(a, stdout(&rainbow(&args)));
    assert!(a.lines().nth(1).unwrap() == "k,limit,exact,empirical,std_error,z_score");
    assert_eq!(a.lines().count(), 7);
    let json = stdout(&rainbow(&[
        "experiment",
        "fig9",
        "--n-list",
        "40,80",
        "--count",
        "200",
        "--format",
        "json",
    ]));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["schema"], "fig9");
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}
