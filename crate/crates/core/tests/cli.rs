// The binary: output shapes and exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perpetual"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("perpetual-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn suite(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("suites")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn perft_prints_counts() {
    let o = run(&["perft", "--depth", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("perft 3: 8902"));
    let bad = run(&["perft", "--fen", "not a fen"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn bench_tsv_has_fixed_columns_and_totals() {
    let out = scratch("queen.tsv", "");
    let o = run(&[
        "bench",
        "--fen",
        "q4r1k/5p2/8/8/8/8/8/2Q3K1 w - - 0 1",
        "--depth",
        "4",
        "--modes",
        "off,chain,matrix",
        "--tsv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text, std::fs::read_to_string(&out).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), perpetual::bench::TSV_HEADER);
    assert_eq!(text.lines().filter(|l| l.starts_with("fen\t")).count(), 12);
    assert_eq!(text.lines().filter(|l| l.starts_with("total\t")).count(), 3);
    assert_eq!(text.lines().filter(|l| l.starts_with("ratio\t")).count(), 2);
    assert!(text.lines().all(|l| l.split('\t').count() == 9));
}

#[test]
fn bench_text_uses_totals_sentence() {
    let o = run(&["bench", "--fen", "7k/8/8/8/8/8/8/K1R5 w - - 0 1", "--depth", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("terminal nodes evaluated and"));
    assert!(stdout(&o).contains("positions generated"));
}

#[test]
fn bench_input_errors() {
    let empty = scratch("empty.epd", "");
    let o = run(&["bench", "--epd", empty.to_str().unwrap(), "--depth", "3", "--tsv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("total")).count(), 2);

    let mixed = scratch("mixed.epd", "7k/8/8/8/8/8/8/K1R5 w - - id \"ok\";\nbroken line\n");
    let o = run(&["bench", "--epd", mixed.to_str().unwrap(), "--depth", "2", "--tsv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    // the good line still got searched
    assert!(stdout(&o).lines().any(|l| l.starts_with("ok\t")));

    let o = run(&["bench", "--epd", "/nonexistent/x.epd"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["bench", "--fen", "7k/8/8/8/8/8/8/K1R5 w - - 0 1", "--modes", "sideways"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn replay_reports_detection_and_draw() {
    let o = run(&["replay", "--pgn", &suite("diep_axon.pgn")]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("first chain detection: ply 94"));
    assert!(text.contains("threefold"));

    let bad = scratch("bad.pgn", "1. e4 e5 2. Ke3 Nc6");
    let o = run(&["replay", "--pgn", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("move 2. Ke3"));
}

#[test]
fn fuzz_output_is_reproducible() {
    let a = run(&["fuzz", "--seed", "9", "--segments", "200", "--max-plies", "30"]);
    let b = run(&["fuzz", "--seed", "9", "--segments", "200", "--max-plies", "30", "--workers", "3"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).contains("unclassified\t0"));
    assert!(stdout(&a).contains("witness\tpermutationCase"));
    let o = run(&["fuzz", "--segments", "0"]);
    assert_eq!(o.status.code(), Some(1));
}
