use std::process::{Command, Output};

fn condprob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_condprob")).args(args).output().expect("run condprob")
}

#[test]
fn help_exits_zero() {
    let o = condprob(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("halting-demo"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(condprob(&[]).status.code(), Some(2));
    assert_eq!(condprob(&["frobnicate"]).status.code(), Some(2));
    let o = condprob(&["sample", "--var", "coin", "--n", "many"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_three_with_name() {
    let o = condprob(&["halting-demo", "--machine", "h2", "--reference", "loop"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("InvalidInput"));
    let o = condprob(&["halting-demo", "--machine", "h2", "--reference", "nobody"]);
    assert_eq!(o.status.code(), Some(3));
    let o = condprob(&["measure", "--measure", "lebesgue", "--set", "(1,0"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Parse"));
}

#[test]
fn selftest_passes() {
    let o = condprob(&["selftest"]);
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.lines().skip(1).take_while(|l| l.starts_with("ok ")).count() >= 9);
    assert!(out.contains(" 0 failed"));
}

#[test]
fn seed_changes_samples() {
    let a = condprob(&["--seed", "1", "sample", "--var", "geometric", "--n", "30"]);
    let b = condprob(&["--seed", "2", "sample", "--var", "geometric", "--n", "30"]);
    assert_eq!(a.status.code(), Some(0));
    assert_ne!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("# condprob sample var=geometric"));
}
