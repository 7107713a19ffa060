use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lff")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_small_task(dir: &Path) {
    fs::write(dir.join("bias.pl"), "head_pred(f,1).\nbody_pred(q,1).\nmax_vars(2).\nmax_body(1).\nmax_clauses(1).\n").unwrap();
    fs::write(dir.join("bk.pl"), "q(1).\nq(2).\n").unwrap();
    fs::write(dir.join("exs.pl"), "pos(f(1)).\npos(f(2)).\nneg(f(3)).\nneg(f(4)).\n").unwrap();
}

#[test]
fn gen_then_learn_list() {
    let dir = tempfile::tempdir().unwrap();
    let task = dir.path().join("list");
    let o = lff(&["gen", "list(c=100,len=20,seed=3)", "--out", task.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let stats = dir.path().join("stats.json");
    let o = lff(&["learn", "--task", task.to_str().unwrap(), "--stats", stats.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert!(stdout(&o).contains("f(A):-head(A,7)."), "{}", stdout(&o));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(stats).unwrap()).unwrap();
    assert_eq!(doc["status"], "solved");
    assert_eq!(doc["size"], 5);
}

#[test]
fn missing_task_dir_is_an_error() {
    let o = lff(&["learn", "--task", "/nonexistent/lff-task"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(lff(&["learn"]).status.code(), Some(2));
    assert_eq!(lff(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    write_small_task(dir.path());
    assert_eq!(lff(&["learn", "--task", dir.path().to_str().unwrap(), "--timeout", "-1"]).status.code(), Some(2));
}

#[test]
fn timeout_reports_no_solution() {
    let dir = tempfile::tempdir().unwrap();
    let task = dir.path().join("pi");
    assert!(lff(&["gen", "pi(seed=1)", "--out", task.to_str().unwrap()]).status.success());
    let o = lff(&["learn", "--task", task.to_str().unwrap(), "--timeout", "0.001"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "no solution (timeout)");
}

#[test]
fn impossible_task_exhausts() {
    let dir = tempfile::tempdir().unwrap();
    write_small_task(dir.path());
    fs::write(dir.path().join("exs.pl"), "pos(f(1)).\npos(f(3)).\nneg(f(2)).\nneg(f(4)).\n").unwrap();
    let o = lff(&["learn", "--task", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "no solution");
}

#[test]
fn eval_prints_balanced_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    write_small_task(dir.path());
    let prog = dir.path().join("prog.pl");
    let task = dir.path().to_str().unwrap();
    for (text, want) in [("f(A):-q(A).\n", "1.0000"), ("f(5).\n", "0.5000"), ("f(1).\n", "0.7500")] {
        fs::write(&prog, text).unwrap();
        let o = lff(&["eval", "--task", task, "--program", prog.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{o:?}");
        assert_eq!(stdout(&o).trim(), want, "{text}");
    }
}

#[test]
fn space_prints_ratio() {
    let run = |body: &str, clauses: &str| {
        let args = ["space", "--Db", "1", "--Dh", "1", "--vars", "2", "--arity", "2", "--max-body", body, "--max-clauses", clauses, "--constants", "1"];
        stdout(&lff(&args))
    };
    assert!(run("2", "1").lines().any(|l| l.starts_with("ratio:") && l.ends_with(" 4")));
    assert!(run("4", "3").lines().any(|l| l.starts_with("ratio:") && l.ends_with(" 4096")));
    let o = lff(&["space", "--Db", "0", "--Dh", "1", "--vars", "2", "--arity", "2", "--max-body", "2", "--max-clauses", "1", "--constants", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.txt");
    fs::write(&suite, "# nothing to run\n").unwrap();
    assert_eq!(lff(&["bench", "--suite", suite.to_str().unwrap()]).status.code(), Some(0));

    fs::write(&suite, "fast; list(c=50,len=10); 1.0; 30\n").unwrap();
    let o = lff(&["bench", "--suite", suite.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("pass"));

    fs::write(&suite, "slow; list(c=50,len=10); 1.0; 0.000001\n").unwrap();
    let o = lff(&["bench", "--suite", suite.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));

    fs::write(&suite, "broken; list(c=50; 1.0\n").unwrap();
    assert_eq!(lff(&["bench", "--suite", suite.to_str().unwrap()]).status.code(), Some(2));
}
