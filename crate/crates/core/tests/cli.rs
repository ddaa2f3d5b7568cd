use std::process::{Command, Output};

use shorsim::factorizer::FactoringHistory;
use shorsim::transcript::read_jsonl;

fn shorsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shorsim"))
        .args(args)
        .env_remove("SHORSIM_SEED")
        .output()
        .expect("spawn shorsim")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn prime_input_prints_warning() {
    let out = shorsim(&["factor", "1039"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        stdout(&out).trim(),
        "THE NUMBER YOU PICKED IS PRIME, PLEASE TRY AGAIN!!!"
    );
}

#[test]
fn rejected_inputs_exit_with_usage_code() {
    for args in [
        &["factor", "10000000000"][..],
        &["factor", "3"],
        &["factor", "187", "--qubits", "4"],
        &["factor", "187", "--order-ceiling", "0"],
        &["dist", "187", "-L", "16", "-y", "22"],
    ] {
        let out = shorsim(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn factors_fifteen() {
    let out = shorsim(&["factor", "15", "--qubits", "8", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("The number to be factored is 15.\n"));
    assert!(text.contains("The random seed for this run is 1."));
    let line = text
        .lines()
        .find(|l| l.starts_with("The factors of 15"))
        .unwrap();
    assert!(
        line.ends_with("3 and 5.") || line.ends_with("5 and 3."),
        "{line}"
    );
}

#[test]
fn seed_from_environment_reproduces_jsonl() {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_shorsim"))
            .args(["factor", "1328881", "--format", "jsonl"])
            .env("SHORSIM_SEED", "42")
            .output()
            .unwrap()
    };
    let a = run();
    assert_eq!(a.status.code(), Some(0));
    let events = read_jsonl(&a.stdout[..]).unwrap();
    let history = FactoringHistory::from_events(events).unwrap();
    assert_eq!(history.params.seed, 42);
    assert_eq!(history.params.qubits, 41);
    let (x, y) = history.result.factors().unwrap();
    assert_eq!((x.min(y), x.max(y)), (1039, 1279));
    // Timing differs between runs; everything else is identical.
    let strip = |o: &Output| {
        stdout(o)
            .lines()
            .filter(|l| !l.contains("\"summary\""))
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&run()));
}

#[test]
fn budget_exhaustion_exits_with_failure() {
    let out = shorsim(&[
        "factor",
        "25610987",
        "-L",
        "30",
        "--seed",
        "2",
        "--max-trials",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("was unable to factor 25610987 in the maximum of 3 trials"));
}

#[test]
fn dist_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spectrum.csv");
    let out = shorsim(&[
        "dist",
        "187",
        "-L",
        "16",
        "-y",
        "56",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# N=187,L=16,y=56,r=16,dominant_mass=1"));
    assert_eq!(lines[1], "c,prob");
    assert_eq!(lines.len(), 18);
    assert_eq!(lines[3], "4096,0.0625");
}

#[test]
fn bench_prints_table_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bench.csv");
    let out = shorsim(&[
        "bench",
        "1328881",
        "-L",
        "41,30",
        "--runs",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "FACTORIZATION OF N = 1328881");
    assert!(lines[1].starts_with("L = 41\t"));
    assert_eq!(lines[1].split('\t').count(), 5);
    assert!(lines[2].starts_with("L = 30\t"));
    let csv = std::fs::read_to_string(path).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("L,run,seed,elapsed_secs,trials,success,factor1,factor2\n"));
}
