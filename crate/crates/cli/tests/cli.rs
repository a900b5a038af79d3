use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn netinf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netinf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// File contents without `#` lines, which record the invoking command.
fn body(p: &Path) -> String {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn metric(csv: &Path, name: &str) -> String {
    body(csv)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{name},")).map(String::from))
        .unwrap_or_else(|| panic!("no {name} in {}", csv.display()))
}

#[test]
fn scale_zero_is_a_usage_error() {
    let out = netinf(&["generate", "--scale", "0", "--model", "additive"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn unknown_shaping_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let net = dir.path().join("net.txt");
    fs::write(&net, "netinf-network v1 additive 2\n0 1 0.5\n").unwrap();
    let out = netinf(&[
        "simulate",
        "--network",
        path_str(&net),
        "--cascades",
        "3",
        "--shaping",
        "gauss",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_parameter_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let net = dir.path().join("net.txt");
    fs::write(&net, "netinf-network v1 additive 2\n0 1 0.5\n").unwrap();
    let out = netinf(&[
        "simulate",
        "--network",
        path_str(&net),
        "--cascades",
        "3",
        "--window",
        "-1",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn generate_is_deterministic_for_a_seed() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let c = dir.path().join("c.txt");
    for (seed, out) in [("11", &a), ("11", &b), ("12", &c)] {
        let run = netinf(&[
            "--seed",
            seed,
            "generate",
            "--scale",
            "7",
            "--model",
            "multiplicative",
            "-o",
            path_str(out),
        ]);
        assert!(run.status.success(), "{}", stderr(&run));
    }
    let text = body(&a);
    assert!(text.starts_with("netinf-network v1 multiplicative 128"));
    assert!(text.lines().count() > 100);
    assert_eq!(text, body(&b));
    assert_ne!(text, body(&c));
    assert!(fs::read_to_string(&a).unwrap().contains("seed=11"));
}

#[test]
fn missing_network_reports_the_path() {
    let out = netinf(&["simulate", "--network", "/no/such/net.txt", "--cascades", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("/no/such/net.txt"));
}

#[test]
fn zero_cascades_write_a_valid_file() {
    let dir = TempDir::new().unwrap();
    let net = dir.path().join("net.txt");
    let cs = dir.path().join("cs.txt");
    fs::write(&net, "netinf-network v1 additive 3\n0 1 0.5\n").unwrap();
    let out = netinf(&[
        "simulate",
        "--network",
        path_str(&net),
        "--cascades",
        "0",
        "-o",
        path_str(&cs),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let set = netinf::io::read_cascades(&cs).unwrap();
    assert!(set.is_empty());
    assert_eq!(set.num_nodes(), 3);
}

#[test]
fn evaluating_a_network_against_itself_is_perfect() {
    let dir = TempDir::new().unwrap();
    let net = dir.path().join("net.txt");
    let report = dir.path().join("eval.csv");
    let gen = netinf(&[
        "generate",
        "--scale",
        "5",
        "--model",
        "multiplicative",
        "-o",
        path_str(&net),
    ]);
    assert!(gen.status.success(), "{}", stderr(&gen));
    let out = netinf(&[
        "evaluate",
        "--truth",
        path_str(&net),
        "--inferred",
        path_str(&net),
        "-o",
        path_str(&report),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(metric(&report, "edge_accuracy"), "1");
    assert_eq!(metric(&report, "mse"), "0");
    assert_eq!(metric(&report, "sign_agreement"), "1");
}

#[test]
fn mismatched_network_sizes_are_rejected() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, "netinf-network v1 additive 3\n0 1 0.5\n").unwrap();
    fs::write(&b, "netinf-network v1 additive 4\n0 1 0.5\n").unwrap();
    let out = netinf(&["evaluate", "--truth", path_str(&a), "--inferred", path_str(&b)]);
    assert!(!out.status.success());
    assert!(!stderr(&out).is_empty());
}

#[test]
fn full_pipeline_runs_end_to_end() {
    let dir = TempDir::new().unwrap();
    let p = |name: &str| dir.path().join(name);
    let steps: [Vec<String>; 4] = [
        vec![
            "generate".into(),
            "--scale".into(),
            "5".into(),
            "--model".into(),
            "additive".into(),
            "-o".into(),
            path_str(&p("truth.txt")).into(),
        ],
        vec![
            "simulate".into(),
            "--network".into(),
            path_str(&p("truth.txt")).into(),
            "--cascades".into(),
            "300".into(),
            "-o".into(),
            path_str(&p("cs.txt")).into(),
        ],
        vec![
            "infer".into(),
            "--model".into(),
            "additive".into(),
            "--cascades".into(),
            path_str(&p("cs.txt")).into(),
            "-o".into(),
            path_str(&p("fit.txt")).into(),
            "--trace".into(),
            path_str(&p("trace.csv")).into(),
        ],
        vec![
            "evaluate".into(),
            "--truth".into(),
            path_str(&p("truth.txt")).into(),
            "--inferred".into(),
            path_str(&p("fit.txt")).into(),
            "-o".into(),
            path_str(&p("eval.csv")).into(),
        ],
    ];
    for step in &steps {
        let args: Vec<&str> = std::iter::once("--seed")
            .chain(["3"])
            .chain(step.iter().map(String::as_str))
            .collect();
        let out = netinf(&args);
        assert!(out.status.success(), "{step:?}: {}", stderr(&out));
    }
    let accuracy: f64 = metric(&p("eval.csv"), "edge_accuracy").parse().unwrap();
    assert!(accuracy > 0.5, "accuracy {accuracy}");
    let trace: Vec<f64> = body(&p("trace.csv"))
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-9 * w[0].abs()));

    let out = netinf(&[
        "--seed",
        "4",
        "predict",
        "--cascades",
        path_str(&p("cs.txt")),
        "--out-dir",
        path_str(&p("pred")),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    for f in [
        "trained.txt",
        "test.txt",
        "simulated.txt",
        "sizes.csv",
        "durations.csv",
        "summary.csv",
    ] {
        assert!(p("pred").join(f).exists(), "{f} missing");
    }
    assert_eq!(metric(&p("pred").join("summary.csv"), "test_cascades"), "60");
    let ks: f64 = metric(&p("pred").join("summary.csv"), "size_ks").parse().unwrap();
    assert!((0.0..=1.0).contains(&ks));
    assert_eq!(body(&p("pred").join("durations.csv")).lines().count(), 22);
}
