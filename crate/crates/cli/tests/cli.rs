use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mgbm"))
}

fn graph(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../graphs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_graph(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("g.g");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn validate_accepts_the_sample_graphs() {
    for name in ["interval.g", "two_vertex.g", "star.g", "tadpole.g"] {
        let o = run(&["validate", "--graph", graph(name).to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains("status: ok"));
    }
}

#[test]
fn validate_names_the_violating_vertex() {
    let o = run(&["validate", "--graph", graph("bad_sum.g").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("vertex v2") && err.contains("1.2"), "{err}");
}

#[test]
fn validate_rejects_malformed_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_graph(dir.path(), "graph g\nvertex v\niedge i v w 1\n");
    assert_eq!(code(&run(&["validate", "--graph", p.to_str().unwrap()])), 1);
}

#[test]
fn conservative_resolvent_of_one_is_one_over_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_graph(
        dir.path(),
        "graph cons\nvertex v1\nvertex v2\niedge i v1 v2 1.3\needge e v2\n\
         wentzell v1 a=0 c=0.4\nwb v1 i 0.6\n\
         wentzell v2 a=0 c=0.1\nwb v2 i 0.5\nwb v2 e 0.4\n",
    );
    let out = dir.path().join("out");
    let o = run(&[
        "resolvent",
        "--graph",
        g.to_str().unwrap(),
        "--lambda",
        "0.5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(out.join("resolvent.csv")).unwrap();
    let mut n = 0;
    for rec in r.records() {
        let u: f64 = rec.unwrap()[3].parse().unwrap();
        assert!((u - 2.0).abs() <= 1e-8, "{u}");
        n += 1;
    }
    assert_eq!(n, 2 * 101);
}

#[test]
fn usage_errors_exit_two() {
    let g = graph("interval.g");
    let g = g.to_str().unwrap();
    assert_eq!(code(&run(&["resolvent", "--graph", g, "--lambda", "0"])), 2);
    assert_eq!(code(&run(&["resolvent", "--graph", g, "--lambda", "0.5,x"])), 2);
    assert_eq!(code(&run(&["resolvent", "--graph", g, "--f", "sine:1"])), 2);
    assert_eq!(code(&run(&["hitting-lt", "--graph", g, "--start", "v1"])), 2);
    assert_eq!(code(&run(&["hitting-lt", "--graph", g, "--start", "i@0.5", "--paths", "1"])), 2);
    assert_eq!(code(&run(&["verify", "--only", "AC-99"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn io_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["validate", "--graph", "/nonexistent/g.g"])), 3);
    // the output directory sits below a regular file
    let file = dir.path().join("file");
    fs::write(&file, "").unwrap();
    let out = file.join("out");
    let o = run(&[
        "resolvent",
        "--graph",
        graph("interval.g").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap()
}

#[test]
fn simulate_dumps_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let g = graph("two_vertex.g");
    let mut dumps = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let o = run(&[
            "simulate",
            "--graph",
            g.to_str().unwrap(),
            "--start",
            "i@0.4",
            "--paths",
            "5",
            "--horizon",
            "2",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        dumps.push((read(&out, "paths.csv"), read(&out, "crossovers.csv"), read(&out, "summary.txt")));
    }
    assert_eq!(dumps[0], dumps[1]);
    let paths = String::from_utf8(dumps[0].0.clone()).unwrap();
    assert!(paths.starts_with("path_id,t,edge_id,x,alive\n0,0.0,i,0.4,1\n"));
    // 5 paths of 2001 grid samples
    assert_eq!(paths.lines().count(), 1 + 5 * 2001);
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let g = graph("two_vertex.g");
    let mut reports = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(workers);
        let o = run(&[
            "estimate-resolvent",
            "--graph",
            g.to_str().unwrap(),
            "--start",
            "i@0.3",
            "--f",
            "bump:i@0.3:0.6",
            "--lambda",
            "0.5,2",
            "--paths",
            "3000",
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        reports.push(read(&out, "report.csv"));
    }
    assert_eq!(reports[0], reports[1]);
    let text = String::from_utf8(reports[0].clone()).unwrap();
    assert!(text.starts_with("experiment_id,quantity,reference,mean,stderr,z,n_paths,h,seed,pass\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn hitting_lt_on_an_external_edge() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "hitting-lt",
        "--graph",
        graph("star.g").to_str().unwrap(),
        "--start",
        "r2@1",
        "--paths",
        "20000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    // reference e^{-1}
    assert!(report.contains(",0.36787944117144233,"), "{report}");
}

#[test]
fn chain_test_passes_on_the_two_vertex_graph() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "chain-test",
        "--graph",
        graph("two_vertex.g").to_str().unwrap(),
        "--paths",
        "5000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let rows = fs::read_to_string(dir.path().join("chain_test.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 4 * 2);
}

#[test]
fn verify_graph_reports_the_interval_total() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "verify",
        "--graph",
        graph("interval.g").to_str().unwrap(),
        "--lambda",
        "0.5",
        "--paths",
        "20000",
        "--resolvent-paths",
        "200",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let total = report
        .lines()
        .find(|l| l.starts_with("hitting,E[exp(-lambda H)] "))
        .expect("total row");
    let reference: f64 = total.split(',').nth(2).unwrap().parse().unwrap();
    assert!((reference - 0.886818).abs() < 1e-6);
    assert!(dir.path().join("summary.txt").exists());
    assert!(dir.path().join("run.log").exists());
}

#[test]
fn verify_runs_selected_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "verify",
        "--only",
        "AC-3,AC-8,AC-11",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    for id in ["AC-3 PASS", "AC-8 PASS", "AC-11 PASS", "status: pass"] {
        assert!(summary.contains(id), "{summary}");
    }
}
