use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cone-scoring"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const N01: &str = r#"{"family":"gaussian","mean":[0],"var":1}"#;
const N11: &str = r#"{"family":"gaussian","mean":[1],"var":1}"#;

fn uniform_json(points: usize) -> String {
    let v = vec!["1"; points].join(",");
    format!(r#"{{"family":"grid","domain":[0,1],"values":[{v}]}}"#)
}

fn scores(v: &Value) -> Vec<f64> {
    v["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["score"].as_f64().unwrap())
        .collect()
}

#[test]
fn log_score_at_the_peak() {
    let d = TempDir::new().unwrap();
    let f = write(d.path(), "f.json", N01);
    let o = write(d.path(), "obs.csv", "0\n");
    let out = run(&[
        "score",
        "--rule",
        "log",
        "--forecast",
        f.to_str().unwrap(),
        "--obs",
        o.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((scores(&v)[0] + 0.918_938_5).abs() < 1e-7);
    assert!((v["summary"]["mean"].as_f64().unwrap() + 0.918_938_5).abs() < 1e-7);
}

#[test]
fn quadratic_and_hyvarinen_scores() {
    let d = TempDir::new().unwrap();
    let u = write(d.path(), "u.json", &uniform_json(101));
    let o = write(d.path(), "obs.csv", "x\n0.2\n0.8\n");
    let out = run(&[
        "score",
        "--rule",
        "quadratic",
        "--forecast",
        u.to_str().unwrap(),
        "--obs",
        o.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    for s in scores(&json(&out)) {
        assert!((s - 1.0).abs() < 1e-12);
    }

    let f = write(d.path(), "f.json", N01);
    let o = write(d.path(), "obs2.csv", "0\n1\n2\n");
    let out = run(&[
        "score",
        "--rule",
        "hyvarinen",
        "--forecast",
        f.to_str().unwrap(),
        "--obs",
        o.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let s = scores(&json(&out));
    for (got, want) in s.iter().zip([2.0, 1.0, -2.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn csv_output_with_summary_line() {
    let d = TempDir::new().unwrap();
    let f = write(d.path(), "f.json", N01);
    let o = write(d.path(), "obs.csv", "0\n1\n");
    let dest = d.path().join("scores.csv");
    let out = run(&[
        "score",
        "--rule",
        "log",
        "--forecast",
        f.to_str().unwrap(),
        "--obs",
        o.to_str().unwrap(),
        "--out",
        dest.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dest).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("x,score,rule,forecast"));
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("# count=2 mean="));
}

#[test]
fn log_score_of_a_zero_is_flagged() {
    let d = TempDir::new().unwrap();
    let mut v = ["1"; 11];
    v[5] = "0";
    let g = write(
        d.path(),
        "g.json",
        &format!(r#"{{"family":"grid","domain":[0,1],"values":[{}]}}"#, v.join(",")),
    );
    let o = write(d.path(), "obs.csv", "0.5\n0.1\n");
    let out = run(&[
        "score",
        "--rule",
        "log",
        "--forecast",
        g.to_str().unwrap(),
        "--obs",
        o.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["records"][0]["score"], "-inf");
    assert_eq!(v["summary"]["clamped"], 1);
}

#[test]
fn score_errors() {
    let d = TempDir::new().unwrap();
    let u = write(d.path(), "u.json", &uniform_json(11));
    let f = write(d.path(), "f.json", N01);
    let outside = write(d.path(), "out.csv", "0.5\n1.5\n");
    let bad = write(d.path(), "bad.csv", "0.5\nabc\n");
    let broken = write(d.path(), "broken.json", "{");
    let args = |rule: &str, fc: &Path, obs: &Path| {
        run(&[
            "score",
            "--rule",
            rule,
            "--forecast",
            fc.to_str().unwrap(),
            "--obs",
            obs.to_str().unwrap(),
        ])
    };
    let o = args("log", &u, &outside);
    assert_eq!(code(&o), 3);
    assert!(o.stdout.is_empty());
    assert_eq!(code(&args("log", &u, &bad)), 2);
    assert_eq!(code(&args("log", &broken, &outside)), 2);
    assert_eq!(code(&args("hyvarinen", &u, &outside)), 3);
    let o = run(&[
        "score",
        "--rule",
        "log",
        "--forecast",
        f.to_str().unwrap(),
        "--obs",
        bad.to_str().unwrap(),
        "--strict-cone",
    ]);
    assert_eq!(code(&o), 2);
    let ok = write(d.path(), "ok.csv", "0\n");
    let o = run(&[
        "score",
        "--rule",
        "log",
        "--forecast",
        f.to_str().unwrap(),
        "--obs",
        ok.to_str().unwrap(),
        "--strict-cone",
    ]);
    assert_eq!(code(&o), 3, "Gaussian tails leave the Shannon envelope");
    assert_eq!(code(&run(&["score", "--rule", "nope"])), 2);
}

#[test]
fn verify_exit_codes_and_report_shape() {
    let out = run(&["verify", "--rule", "sup", "--suite", "propriety", "--samples", "10"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["strictness"], "not strict");
    assert_eq!(v["suite"], "propriety");
    assert_eq!(v["seed"], 42);
    let case = &v["cases"][0];
    for key in ["id", "residual", "tol", "pass"] {
        assert!(case.get(key).is_some(), "{key}");
    }
    assert!(v["summary"]["total"].as_u64().unwrap() > 0);

    let out = run(&[
        "verify",
        "--rule",
        "hyvarinen",
        "--suite",
        "euler",
        "--tol",
        "1e-8",
        "--samples",
        "20",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&run(&["verify", "--rule", "log", "--suite", "bogus"])), 2);
    assert_eq!(code(&run(&["verify", "--rule", "log", "--suite", "gateaux"])), 2);
    assert_eq!(code(&run(&["verify", "--rule", "log", "--tol", "-1"])), 2);
    // An unattainable tolerance makes the suite fail, with the report still written.
    let out = run(&[
        "verify",
        "--rule",
        "log",
        "--suite",
        "homogeneity",
        "--samples",
        "3",
        "--tol",
        "1e-300",
    ]);
    assert_eq!(code(&out), 1);
    assert!(json(&out)["cases"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["pass"] == false));
}

#[test]
fn verify_writes_the_report_file() {
    let d = TempDir::new().unwrap();
    let dest = d.path().join("r.json");
    let out = run(&[
        "verify",
        "--rule",
        "quadratic",
        "--suite",
        "euler",
        "--samples",
        "4",
        "--out",
        dest.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(dest).unwrap()).unwrap();
    assert_eq!(v["rule"], "quadratic");
}

#[test]
fn derivative_reports() {
    let d = TempDir::new().unwrap();
    let n0 = write(d.path(), "n0.json", N01);
    let n1 = write(d.path(), "n1.json", N11);
    let u = write(d.path(), "u.json", &uniform_json(101));
    let deriv = |rule: &str, q: &Path, p: &Path| {
        let o = run(&[
            "deriv",
            "--rule",
            rule,
            "--q",
            q.to_str().unwrap(),
            "--p",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        json(&o)
    };
    let v = deriv("log", &n0, &n1);
    assert!((v["analytic"].as_f64().unwrap() + 1.918_938_5).abs() < 1e-7);
    assert!(v["residual"].as_f64().unwrap() < 1e-4);
    assert!(!v["estimate"]["trace"].as_array().unwrap().is_empty());
    let v = deriv("quadratic", &u, &u);
    assert!((v["analytic"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["estimate"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let v = deriv("hyvarinen", &n1, &n0);
    assert!(v["analytic"].as_f64().unwrap().abs() < 1e-9);
    assert!(v["residual"].as_f64().unwrap() < 1e-4);

    let o = run(&[
        "deriv",
        "--rule",
        "log",
        "--q",
        n0.to_str().unwrap(),
        "--p",
        n1.to_str().unwrap(),
        "--strict-cone",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn demos() {
    let o = run(&["demo", "--name", "nowhere-dense", "--alpha", "1"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(
        text.lines().any(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            f.len() == 4 && f[0] == "1" && f[1] == "2"
        }),
        "{text}"
    );

    let d = TempDir::new().unwrap();
    let dest = d.path().join("b.json");
    let o = run(&["demo", "--name", "binary-boundary", "--out", dest.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&fs::read_to_string(&dest).unwrap()).unwrap();
    assert_eq!(v["strictly_decreasing"], true);
    let last = v["points"].as_array().unwrap().last().unwrap()[1].as_f64().unwrap();
    assert!(last < -27.0);

    let dest = d.path().join("s.json");
    let o = run(&[
        "demo",
        "--name",
        "sup-mode",
        "--grid-points",
        "401",
        "--out",
        dest.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("Dirac regime"));
    assert_eq!(
        code(&run(&[
            "demo",
            "--name",
            "nowhere-dense",
            "--alpha",
            "0.01",
            "--K",
            "5"
        ])),
        1
    );
    assert_eq!(code(&run(&["demo", "--name", "unknown"])), 2);
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&[])), 2);
}
