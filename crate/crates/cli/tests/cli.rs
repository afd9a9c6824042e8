use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solbugsmith"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SOLBUGSMITH_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

#[test]
fn full_campaign_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&run(
            &["inject", "--bug-types", "TxOrigin,TOD", "--dump-bip"],
            d
        )),
        0
    );
    assert!(d.join("out/game.TOD.bip.json").exists());
    assert!(d.join("out/game.TxOrigin.sol").exists());
    assert!(d.join("out/game.TOD.buglog.json").exists());
    assert!(!d.join("out/game.Reentrancy.sol").exists());

    let o = run(
        &[
            "oracle",
            "--bug-types",
            "TxOrigin,TOD",
            "--miss-rate",
            "0.5",
            "--extra-per-file",
            "2",
        ],
        d,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(d.join("out/reports/Slither.json").exists());
    assert!(d.join("out/reports/Slither.truth.json").exists());

    let o = run(&["evaluate", "--bug-types", "TxOrigin,TOD"], d);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("## False negatives"));
    for f in ["evaluation.md", "evaluation.json", "fn.csv", "fp.csv"] {
        assert!(d.join("out").join(f).exists(), "{f}");
    }
}

#[test]
fn locate_writes_profiles_and_trees() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "locate",
            "--bug-types",
            "Reentrancy",
            "--dump-ast",
            "--jobs",
            "2",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let bip = std::fs::read_to_string(dir.path().join("out/wallet.Reentrancy.bip.json")).unwrap();
    assert!(serde_json::from_str::<serde_json::Value>(&bip).is_ok());
    assert!(dir.path().join("out/wallet.ast.json").exists());
}

#[test]
fn tool_scope_limits_bug_types() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&run(&["inject", "--tool", "Manticore"], dir.path())),
        0
    );
    let names: Vec<String> = std::fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().any(|n| n.ends_with(".Reentrancy.sol")));
    assert!(names
        .iter()
        .all(|n| n.contains("Reentrancy") || n.contains("IntegerOverflow")));
}

#[test]
fn usage_problems_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(&["inject", "--bug-types", "Nope"], d)), 1);
    assert_eq!(code(&run(&["inject", "--tool", "Nope"], d)), 1);
    assert_eq!(code(&run(&["inject", "--corpus", "missing"], d)), 1);
    assert_eq!(code(&run(&["frobnicate"], d)), 1);
    assert_eq!(code(&run(&["oracle", "--out", "empty"], d)), 1);
    assert_eq!(code(&run(&["oracle", "--miss-rate", "2"], d)), 1);
    assert_eq!(code(&run(&["--help"], d)), 0);
}

#[test]
fn unparseable_contract_fails_only_itself() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    std::fs::write(corpus.join("bad.sol"), "contract Bad { function f( }").unwrap();
    std::fs::write(
        corpus.join("good.sol"),
        "pragma solidity ^0.5.0;\ncontract Good {\n    uint256 x;\n    function f() public {\n        x = 1;\n    }\n}\n",
    )
    .unwrap();
    let o = run(
        &[
            "inject",
            "--corpus",
            "corpus",
            "--bug-types",
            "TimestampDependency",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.sol"));
    assert!(dir.path().join("out/good.TimestampDependency.sol").exists());
}

#[test]
fn missing_report_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(&["inject", "--bug-types", "TxOrigin"], d)), 0);
    assert_eq!(code(&run(&["evaluate", "--bug-types", "TxOrigin"], d)), 1);
    assert_eq!(
        code(&run(
            &["oracle", "--bug-types", "TxOrigin", "--tool", "Slither"],
            d
        )),
        0
    );
    let o = run(&["evaluate", "--bug-types", "TxOrigin"], d);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("no report for Mythril"));
}

#[test]
fn bench_prints_one_row_per_contract() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["bench", "--repeats", "1", "--bug-types", "TOD"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("contract,lines,runs,min_ms,mean_ms,max_ms\n"));
    assert!(stdout.lines().any(|l| l.starts_with("registry,255,1,")));
    assert_eq!(code(&run(&["bench", "--repeats", "0"], dir.path())), 1);
}
