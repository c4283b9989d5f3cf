use std::path::Path;
use std::process::{Command, Output};

fn kcenter(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcenter"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn help_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&kcenter(&["--help"], dir.path())), 0);
    assert_eq!(code(&kcenter(&["--version"], dir.path())), 0);
    assert_eq!(code(&kcenter(&[], dir.path())), 1);
    assert_eq!(code(&kcenter(&["gen", "--kind", "spiral", "--n", "5", "--out", "x"], dir.path())), 1);
    let out = kcenter(&["run", "--algo", "two", "--k", "2", "--stream", "s.jsonl"], dir.path());
    assert_eq!(code(&out), 1, "bounds source is required");
    let out = kcenter(
        &["run", "--algo", "two", "--k", "2", "--prescan", "--stream", "s.jsonl", "--queries", "often"],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
}

#[test]
fn missing_stream_is_reported_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = kcenter(&["run", "--algo", "six", "--k", "1", "--prescan", "--stream", "nope.jsonl"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.jsonl"));
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.jsonl", "b.jsonl"] {
        let out = kcenter(&["gen", "--kind", "sliding", "--n", "30", "--window", "6", "--seed", "9", "--out", name], dir.path());
        assert_eq!(code(&out), 0);
    }
    let a = std::fs::read(dir.path().join("a.jsonl")).unwrap();
    let b = std::fs::read(dir.path().join("b.jsonl")).unwrap();
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 30);
}

#[test]
fn run_writes_one_row_per_query() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&kcenter(&["gen", "--kind", "random", "--n", "25", "--out", "s.jsonl"], d)), 0);
    let out = kcenter(
        &[
            "run", "--algo", "two", "--k", "3", "--epsilon", "0.5", "--prescan", "--stream", "s.jsonl",
            "--queries", "at:5,10,15", "--report", "r.csv",
        ],
        d,
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(d.join("r.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("t,active,radius"));
    let times: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(times, ["5", "10", "15"]);
}

#[test]
fn verify_passes_on_generated_streams() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&kcenter(&["gen", "--kind", "hbounded", "--n", "60", "--h", "3", "--out", "h.jsonl"], d)), 0);
    for algo in ["two", "six"] {
        let out = kcenter(&["verify", "--algo", algo, "--k", "2", "--prescan", "--stream", "h.jsonl", "--oracle-cap", "24"], d);
        assert_eq!(code(&out), 0, "{algo}: {}", String::from_utf8_lossy(&out.stdout));
        assert!(String::from_utf8_lossy(&out.stdout).contains("all checks passed"));
    }
}

#[test]
fn adversarial_stream_uses_matrix_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&kcenter(&["gen", "--kind", "adversarial", "--n", "8", "--gamma", "2", "--out", "adv.jsonl"], d)), 0);
    assert!(d.join("adv.jsonl.matrix.csv").exists());
    let out = kcenter(&["verify", "--algo", "two", "--k", "2", "--gamma", "2", "--stream", "adv.jsonl"], d);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let out = kcenter(&["run", "--algo", "two", "--k", "2", "--prescan", "--stream", "adv.jsonl", "--metric", "euclidean"], d);
    assert_eq!(code(&out), 1);
}

#[test]
fn undersized_guess_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let stream = "{\"id\":0,\"t_arr\":1,\"t_del\":9,\"coords\":[0.0]}\n\
                  {\"id\":1,\"t_arr\":2,\"t_del\":9,\"coords\":[10.0]}\n\
                  {\"id\":2,\"t_arr\":3,\"t_del\":9,\"coords\":[20.0]}\n";
    std::fs::write(d.join("s.jsonl"), stream).unwrap();
    for cmd in ["run", "verify"] {
        let out = kcenter(&[cmd, "--algo", "two", "--k", "1", "--gamma", "0.5", "--stream", "s.jsonl"], d);
        assert_eq!(code(&out), 1);
        assert!(String::from_utf8_lossy(&out.stderr).contains("feasible"));
    }
}

#[test]
fn bench_reports_growth() {
    let dir = tempfile::tempdir().unwrap();
    let out = kcenter(
        &["bench", "--kind", "adversarial", "--algo", "two", "--k", "2", "--no-reclustering", "--sizes", "20,40"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    let last = csv.lines().last().unwrap();
    let growth: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert!((growth - 4.0).abs() < 0.2, "{csv}");
}
