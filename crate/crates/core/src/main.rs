use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use perpetual::bench::{parse_epd, parse_epd_line, run_bench, to_text, to_tsv};
use perpetual::chainrep::DEFAULT_CHAIN_CAPACITY;
use perpetual::fuzz::{fuzz_differential, render, FuzzConfig};
use perpetual::replay::{replay_pgn, Adjudication};
use perpetual::search::{DetectorMode, EvalMode, SearchConfig};
use perpetual::{parse_fen, perft, Position};

const INPUT_ERROR: u8 = 1;
const CHECK_FAILED: u8 = 2;

#[derive(Parser)]
#[command(name = "perpetual", version, about = "Repetition detection by move chains vs. board matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterative-deepening search per position and detector mode
    Bench {
        /// EPD file (bm/id opcodes understood)
        #[arg(long, conflicts_with = "fen")]
        epd: Option<PathBuf>,
        #[arg(long)]
        fen: Option<String>,
        #[arg(long, default_value_t = 6)]
        depth: u32,
        /// Comma-separated: off,chain,chainRaw,matrix; the first is the ratio baseline
        #[arg(long, default_value = "off,chain", value_delimiter = ',')]
        modes: Vec<DetectorMode>,
        #[arg(long, default_value = "material")]
        eval: EvalMode,
        #[arg(long, default_value_t = DEFAULT_CHAIN_CAPACITY)]
        chain_capacity: usize,
        /// Also write the report here
        #[arg(long)]
        out: Option<PathBuf>,
        /// Tab-separated output instead of tables
        #[arg(long)]
        tsv: bool,
    },
    /// Replay a PGN game, tracking chain detections and threefold repetition
    Replay {
        #[arg(long)]
        pgn: PathBuf,
        /// Stop at the first draw/mate trigger
        #[arg(long)]
        adjudicate: bool,
    },
    /// Differential fuzzing of the chain detectors against matrix comparison
    Fuzz {
        #[arg(long, default_value_t = 20040601)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        segments: u64,
        #[arg(long, default_value_t = 60)]
        max_plies: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = DEFAULT_CHAIN_CAPACITY)]
        chain_capacity: usize,
    },
    /// Count leaf nodes of the legal move tree
    Perft {
        #[arg(long)]
        fen: Option<String>,
        #[arg(long, default_value_t = 5)]
        depth: u32,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // clap's own exit code 2 would read as a failed check
            return if e.use_stderr() { ExitCode::from(INPUT_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Bench {
            epd,
            fen,
            depth,
            modes,
            eval,
            chain_capacity,
            out,
            tsv,
        } => {
            let mut had_errors = false;
            let records = match (epd, fen) {
                (Some(path), _) => {
                    let text = match fs::read_to_string(&path) {
                        Ok(t) => t,
                        Err(e) => return fail(INPUT_ERROR, format!("{}: {e}", path.display())),
                    };
                    let (records, errors) = parse_epd(&text);
                    for e in &errors {
                        eprintln!("{}: {e}", path.display());
                    }
                    had_errors = !errors.is_empty();
                    records
                }
                (None, Some(fen)) => match parse_epd_line(&fen) {
                    Ok(mut r) => {
                        if r.id.is_empty() {
                            r.id = "fen".into();
                        }
                        vec![r]
                    }
                    Err(e) => return fail(INPUT_ERROR, e),
                },
                (None, None) => return fail(INPUT_ERROR, "one of --epd or --fen is required"),
            };
            let cfg = SearchConfig::new(depth, DetectorMode::Off)
                .with_eval(eval)
                .with_chain_capacity(chain_capacity);
            let report = match run_bench(&records, cfg, &modes) {
                Ok(r) => r,
                Err(e) => return fail(INPUT_ERROR, e),
            };
            let text = if tsv { to_tsv(&report, true) } else { to_text(&report, true) };
            print!("{text}");
            if let Some(path) = out {
                let body = if tsv { text } else { to_tsv(&report, true) };
                if let Err(e) = fs::write(&path, body) {
                    return fail(INPUT_ERROR, format!("{}: {e}", path.display()));
                }
            }
            if had_errors {
                ExitCode::from(INPUT_ERROR)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Replay { pgn, adjudicate } => {
            let text = match fs::read_to_string(&pgn) {
                Ok(t) => t,
                Err(e) => return fail(INPUT_ERROR, format!("{}: {e}", pgn.display())),
            };
            let outcome = match replay_pgn(&text, adjudicate) {
                Ok(o) => o,
                Err(e) => return fail(INPUT_ERROR, e),
            };
            for r in &outcome.plies {
                let mark = if r.chain.is_repetition() { "  <- chain repetition" } else { "" };
                println!(
                    "{:>4} {:<8} {:<6} occ={} {}{}",
                    r.ply,
                    r.san,
                    format!("{:?}", r.coded),
                    r.occurrences,
                    r.chain,
                    mark
                );
            }
            println!(
                "first chain detection: {}",
                outcome
                    .first_detection_ply
                    .map_or("none".to_string(), |p| format!("ply {p}"))
            );
            let at = outcome
                .adjudication_ply
                .map_or(String::new(), |p| format!(" at ply {p}"));
            println!("adjudication: {}{at}", outcome.adjudication);
            println!("final position: {}", outcome.final_position);
            if outcome.adjudication == Adjudication::Ongoing {
                println!("game not adjudicated");
            }
            ExitCode::SUCCESS
        }
        Command::Fuzz {
            seed,
            segments,
            max_plies,
            workers,
            chain_capacity,
        } => {
            if segments == 0 || max_plies == 0 {
                return fail(INPUT_ERROR, "--segments and --max-plies must be at least 1");
            }
            let cfg = FuzzConfig::new(seed, segments, max_plies)
                .with_workers(workers)
                .with_chain_capacity(chain_capacity);
            let t = Instant::now();
            let report = fuzz_differential(&cfg);
            print!("{}", render(&report));
            eprintln!("elapsed {:.2?}", t.elapsed());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(CHECK_FAILED)
            }
        }
        Command::Perft { fen, depth } => {
            let p = match fen.as_deref().map(parse_fen) {
                None => Position::startpos(),
                Some(Ok(p)) => p,
                Some(Err(e)) => return fail(INPUT_ERROR, e),
            };
            for d in 1..=depth {
                let t = Instant::now();
                println!("perft {d}: {} ({:.2?})", perft(&p, d), t.elapsed());
            }
            ExitCode::SUCCESS
        }
    }
}
