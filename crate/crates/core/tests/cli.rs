mod common;

use std::process::{Command, Output};

use common::data;

fn altsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_altsum"))
        .args(args)
        .current_dir(data(""))
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn model_check_exit_codes() {
    let yes = altsum(&["mc", "fixture1.structure", "fixture1.formula"]);
    assert_eq!(yes.status.code(), Some(0));
    assert_eq!(stdout(&yes).trim(), "YES");

    let no = altsum(&["mc", "fixture1.structure", "fixture1_no.formula"]);
    assert_eq!(no.status.code(), Some(1));
    assert_eq!(stdout(&no).trim(), "NO");

    let bad = altsum(&["mc", "fixture1.structure", "malformed.formula"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("line 2"));
}

#[test]
fn missing_file_is_an_error() {
    let o = altsum(&["solve", "nowhere.altss"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_prints_witness() {
    let o = altsum(&["solve", "example1.altss", "--witness"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("YES"));
    assert!(text.contains("set 1 {3}"));
}

#[test]
fn reduce_writes_three_sets_and_a_report() {
    let dir = std::env::temp_dir().join(format!("altsum-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("fixture1.altss");
    let report = dir.join("fixture1.report");
    let o = altsum(&[
        "reduce",
        "fixture1.structure",
        "fixture1.formula",
        "-o",
        out.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let inst = std::fs::read_to_string(&out).unwrap();
    assert!(inst.starts_with("altss 3\n"));
    assert_eq!(inst.lines().filter(|l| l.starts_with("set ")).count(), 3);
    assert!(inst.contains("set 3 choose 8:"));
    assert!(!std::fs::read_to_string(&report).unwrap().is_empty());

    let solved = altsum(&["solve", out.to_str().unwrap()]);
    assert_eq!(solved.status.code(), Some(0));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn roundtrip_is_deterministic() {
    let args = ["roundtrip", "--seed", "7", "--count", "30"];
    let first = altsum(&args);
    assert_eq!(first.status.code(), Some(0));
    assert!(stdout(&first).trim_end().ends_with("passed 30/30"));
    assert_eq!(stdout(&first), stdout(&altsum(&args)));
}

#[test]
fn aram_runs_the_membership_program() {
    let o = altsum(&["aram", "run", "--instance", "example1.altss"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("YES"));
    assert!(text.contains("alternations 3"));
    assert!(text.contains("violations none"));
}

#[test]
fn aram_reports_tail_violations() {
    let o = altsum(&["aram", "audit", "--instance", "example1.altss", "--tail-window", "0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("outside the tail"));
}

#[test]
fn aram_runs_a_program_file() {
    let dir = std::env::temp_dir().join(format!("altsum-regs-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let regs = dir.join("regs");
    std::fs::write(&regs, "0\n").unwrap();
    let o = altsum(&["aram", "run", "--program", "guess_one.aram", "--input", regs.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("YES"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn aram_prints_its_program() {
    let o = altsum(&["aram", "program"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("EXISTS") && text.contains("FORALL") && text.contains("HALT"));
}
