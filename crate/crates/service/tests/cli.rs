use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn agent(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agent"))
        .arg("--data-dir")
        .arg(dir)
        .args(args)
        .env_remove("AGENT_DATA_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn bad_flags_print_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = agent(dir.path(), &["train", "--phase", "one"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--phase"));

    let o = agent(dir.path(), &["train"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));

    let o = agent(dir.path(), &["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_world_refuses_to_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&agent(dir.path(), &["gen-world", "--seed", "7"]));
    assert!(dir.path().join("world.json").exists());
    let o = agent(dir.path(), &["gen-world", "--seed", "8"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    stdout(&agent(dir.path(), &["gen-world", "--seed", "8", "--force"]));
}

#[test]
fn simulate_train_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&agent(dir.path(), &["simulate", "--phase", "1", "--tasks", "2"]));
    assert!(out.contains("conversations completed"), "{out}");

    let first = stdout(&agent(dir.path(), &["train", "--phase", "1"]));
    let again = stdout(&agent(dir.path(), &["train", "--phase", "1"]));
    assert!(first.starts_with("v2 "), "{first}");
    assert_eq!(first, again);
    assert!(dir.path().join("snapshots/v2.json").exists());

    let csv = stdout(&agent(dir.path(), &["eval", "--snapshots", "A1,A2*", "--tasks", "10"]));
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().contains("mean_questions"));
    assert!(lines.all(|l| l.starts_with("A1,") || l.starts_with("A2*,")));
    assert!(dir.path().join("metrics.json").exists());
}

#[test]
fn repl_confirms_a_walk() {
    let dir = tempfile::tempdir().unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_agent"))
        .arg("--data-dir")
        .arg(dir.path())
        .arg("repl")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"go to the lounge\nyes\n").unwrap();
    let out = child.wait_with_output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success());
    assert!(text.contains("agent> What should I do?"), "{text}");
    assert!(text.contains("You want me to go to 3.514? [yes/no]"), "{text}");
    assert!(text.contains("I will go to 3.514."), "{text}");
    assert_eq!(std::fs::read_dir(dir.path().join("logs/phase1")).unwrap().count(), 1);
}

#[test]
fn snapshot_export_import() {
    let src = tempfile::tempdir().unwrap();
    let dst = tempfile::tempdir().unwrap();
    stdout(&agent(src.path(), &["simulate", "--phase", "1", "--tasks", "2"]));
    let trained = stdout(&agent(src.path(), &["train", "--phase", "1"]));
    let file = src.path().join("v2.json");
    stdout(&agent(src.path(), &["export-snapshot", "--version", "2", "--out", file.to_str().unwrap()]));

    stdout(&agent(dst.path(), &["gen-world", "--seed", "7"]));
    let imported = stdout(&agent(dst.path(), &["import-snapshot", file.to_str().unwrap()]));
    assert_eq!(imported, trained);
    // publishing the same snapshot twice is fine
    assert_eq!(stdout(&agent(dst.path(), &["import-snapshot", file.to_str().unwrap()])), trained);
}
