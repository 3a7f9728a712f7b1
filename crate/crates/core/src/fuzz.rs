//! Differential fuzzing: chain closure (guarded and raw) against matrix comparison.
//!
//! Random reversible-heavy segments are played from random legal start
//! positions. After every ply the three detectors run on the segment so far
//! and every disagreement must fall into a known class:
//!
//! * parity      - the raw detector closed all chains after an odd number of
//!   plies: same placement, other side to move.
//! * permutation - the matrices match but identical pieces swapped squares,
//!   which chain closure cannot see.
//! * overflow    - the chain list ran out of slots before the matrix match.
//!
//! Anything else is a failure and is reported with a minimized dump.

use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chainrep::{debug_dump, ChainDetector, NoRepetition, RepetitionVerdict, DEFAULT_CHAIN_CAPACITY};
use crate::matrix::PositionStack;
use crate::movecode::{code_from_genmove, CodedMove};
use crate::movegen::{find_uci, legal_moves_into, make_move, GenMove};
use crate::position::{emit_fen, parse_fen, CastlingRights, Matrix64, Position};
use crate::types::{Color, PieceCode, PieceKind, Square};

/// Generation knobs. Fixed per run, so they are part of what the seed reproduces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FuzzConfig {
    pub seed: u64,
    pub segments: u64,
    pub max_plies: usize,
    pub workers: usize,
    pub chain_capacity: usize,
    /// Chance of replacing a capture/pawn move by a reversible one.
    pub reject_irreversible: f64,
    /// Chance of undoing this side's previous move when legal.
    pub return_bias: f64,
}

impl FuzzConfig {
    pub fn new(seed: u64, segments: u64, max_plies: usize) -> Self {
        FuzzConfig {
            seed,
            segments,
            max_plies,
            workers: 1,
            chain_capacity: DEFAULT_CHAIN_CAPACITY,
            reject_irreversible: 0.9,
            return_bias: 0.4,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_chain_capacity(mut self, capacity: usize) -> Self {
        self.chain_capacity = capacity;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    Parity,
    Permutation,
    Overflow,
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Parity => "parityCase",
            Class::Permutation => "permutationCase",
            Class::Overflow => "overflowCase",
        })
    }
}

/// A disagreement nobody could explain, or a chain false positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzFailure {
    /// Segment index; `None` for the injected witness.
    pub segment: Option<u64>,
    pub false_positive: bool,
    pub reason: String,
    /// Start position of the minimized segment.
    pub start_fen: String,
    /// Minimized move list in the chain dump format.
    pub dump: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FuzzReport {
    pub seed: u64,
    pub segments: u64,
    pub plies: u64,
    pub chain_repetitions: u64,
    pub raw_repetitions: u64,
    pub matrix_repetitions: u64,
    pub parity_cases: u64,
    pub permutation_cases: u64,
    pub overflow_cases: u64,
    pub unclassified: u64,
    pub false_positives: u64,
    /// Classes seen on the crafted rook-swap segment.
    pub witness: Vec<Class>,
    /// First few failures, in segment order.
    pub failures: Vec<FuzzFailure>,
}

const KEPT_FAILURES: usize = 8;

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.unclassified == 0 && self.false_positives == 0
    }

    fn merge(&mut self, other: FuzzReport) {
        self.segments += other.segments;
        self.plies += other.plies;
        self.chain_repetitions += other.chain_repetitions;
        self.raw_repetitions += other.raw_repetitions;
        self.matrix_repetitions += other.matrix_repetitions;
        self.parity_cases += other.parity_cases;
        self.permutation_cases += other.permutation_cases;
        self.overflow_cases += other.overflow_cases;
        self.unclassified += other.unclassified;
        self.false_positives += other.false_positives;
        for f in other.failures {
            if self.failures.len() < KEPT_FAILURES {
                self.failures.push(f);
            }
        }
    }

    fn tally(&mut self, class: Class) {
        match class {
            Class::Parity => self.parity_cases += 1,
            Class::Permutation => self.permutation_cases += 1,
            Class::Overflow => self.overflow_cases += 1,
        }
    }
}

impl fmt::Display for FuzzReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed\t{}", self.seed)?;
        writeln!(f, "segments\t{}", self.segments)?;
        writeln!(f, "plies\t{}", self.plies)?;
        writeln!(f, "chain_repetitions\t{}", self.chain_repetitions)?;
        writeln!(f, "raw_repetitions\t{}", self.raw_repetitions)?;
        writeln!(f, "matrix_repetitions\t{}", self.matrix_repetitions)?;
        writeln!(f, "parityCase\t{}", self.parity_cases)?;
        writeln!(f, "permutationCase\t{}", self.permutation_cases)?;
        writeln!(f, "overflowCase\t{}", self.overflow_cases)?;
        writeln!(f, "unclassified\t{}", self.unclassified)?;
        writeln!(f, "false_positives\t{}", self.false_positives)?;
        let w: Vec<String> = self.witness.iter().map(Class::to_string).collect();
        writeln!(f, "witness\t{}", if w.is_empty() { "-".into() } else { w.join(",") })?;
        for fail in &self.failures {
            let seg = fail.segment.map_or("witness".to_string(), |s| s.to_string());
            writeln!(f, "\nFAILURE segment {seg}: {}", fail.reason)?;
            writeln!(f, "start {}", fail.start_fen)?;
            f.write_str(&fail.dump)?;
        }
        Ok(())
    }
}

/// Outcome of checking one prefix.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
struct PrefixCheck {
    classes: Vec<Class>,
    failure: Option<(bool, String)>,
    chain_rep: bool,
    raw_rep: bool,
    matrix_rep: bool,
}

/// Frames index `top - distance`; the matrices there must match.
fn frames_match(stack: &PositionStack, distance: usize, same_side: bool) -> bool {
    let frames = stack.frames();
    let top = frames.len() - 1;
    let Some(k) = top.checked_sub(distance) else {
        return false;
    };
    frames[k].matrix == frames[top].matrix
        && (frames[k].side_to_move == frames[top].side_to_move) == same_side
}

/// Do the open chains at `distance` plies describe identical pieces trading squares?
fn is_permutation(
    detector: &mut ChainDetector,
    moves: &[CodedMove],
    stack: &PositionStack,
    distance: usize,
) -> bool {
    let (_, trace) = detector.detect_traced(moves, false);
    let Some(step) = trace.iter().find(|s| s.scanned == distance) else {
        return false;
    };
    if step.open.is_empty() || !frames_match(stack, distance, true) {
        return false;
    }
    let frames = stack.frames();
    let now = &frames[frames.len() - 1].matrix;
    let then = &frames[frames.len() - 1 - distance].matrix;
    let mut froms: Vec<Square> = step.open.iter().map(|c| c.from).collect();
    let mut tos: Vec<Square> = step.open.iter().map(|c| c.to).collect();
    froms.sort();
    tos.sort();
    // each chain carries one piece from `from` (then) to `to` (now)
    froms == tos
        && step
            .open
            .iter()
            .all(|c| then[c.from] == now[c.to] && !now[c.to].is_empty() && c.from != c.to)
}

fn check_prefix(
    detector: &mut ChainDetector,
    moves: &[CodedMove],
    stack: &mut PositionStack,
) -> PrefixCheck {
    let guarded = detector.detect(moves);
    let raw = detector.detect_raw(moves);
    let matrix = stack.detect_repetition_matrix();
    let mut out = PrefixCheck {
        chain_rep: guarded.is_repetition(),
        raw_rep: raw.is_repetition(),
        matrix_rep: matrix.is_repetition(),
        ..Default::default()
    };
    let fail = |out: &mut PrefixCheck, fp: bool, why: String| {
        if out.failure.is_none() {
            out.failure = Some((fp, why));
        }
    };

    if moves.last().is_some_and(|m| m.is_irreversible())
        && (out.chain_rep || out.raw_rep || out.matrix_rep)
    {
        fail(&mut out, false, "repetition reported right after an irreversible move".into());
    }

    // guarded chain vs matrix
    match (guarded, matrix) {
        (RepetitionVerdict::Repetition { scanned_plies: k }, m) => {
            if !frames_match(stack, k, true) {
                fail(&mut out, true, format!("chain reports Repetition({k}) but the placements differ"));
            } else {
                match m {
                    RepetitionVerdict::Repetition { scanned_plies: j } if j == k => {}
                    RepetitionVerdict::Repetition { scanned_plies: j }
                        if j < k && is_permutation(detector, moves, stack, j) =>
                    {
                        out.classes.push(Class::Permutation)
                    }
                    other => fail(&mut out, false, format!("chain Repetition({k}) vs matrix {other}")),
                }
            }
        }
        (RepetitionVerdict::NoRepetition(reason), RepetitionVerdict::Repetition { scanned_plies: j }) => {
            if is_permutation(detector, moves, stack, j) {
                out.classes.push(Class::Permutation);
            } else if reason == NoRepetition::ChainOverflow {
                out.classes.push(Class::Overflow);
            } else {
                fail(&mut out, false, format!("chain {guarded} vs matrix Repetition({j})"));
            }
        }
        (RepetitionVerdict::NoRepetition(_), RepetitionVerdict::NoRepetition(_)) => {}
    }

    // raw vs guarded: only an odd closure may separate them
    if raw != guarded {
        match raw {
            RepetitionVerdict::Repetition { scanned_plies: j }
                if j % 2 == 1 && frames_match(stack, j, false) =>
            {
                out.classes.push(Class::Parity)
            }
            _ => fail(&mut out, raw.is_repetition(), format!("raw {raw} vs guarded {guarded}")),
        }
    }
    out
}

/// Runs one segment; returns per-segment tallies and the index of the first failing ply.
fn run_segment(
    start: &Position,
    plies: &[GenMove],
    capacity: usize,
    report: &mut FuzzReport,
    classes_seen: &mut Vec<Class>,
) -> Option<(usize, bool, String)> {
    let mut detector = ChainDetector::new(capacity);
    let mut stack = PositionStack::new();
    stack.push_position(start, false);
    let mut moves = Vec::with_capacity(plies.len());
    let mut pos = *start;
    for (i, &m) in plies.iter().enumerate() {
        let coded = code_from_genmove(&m);
        moves.push(coded);
        pos = make_move(&pos, m);
        stack.push_position(&pos, coded.is_irreversible());
        let check = check_prefix(&mut detector, &moves, &mut stack);
        report.plies += 1;
        report.chain_repetitions += check.chain_rep as u64;
        report.raw_repetitions += check.raw_rep as u64;
        report.matrix_repetitions += check.matrix_rep as u64;
        for &c in &check.classes {
            report.tally(c);
            if !classes_seen.contains(&c) {
                classes_seen.push(c);
            }
        }
        if let Some((fp, why)) = check.failure {
            return Some((i, fp, why));
        }
    }
    None
}

/// Drops leading plies while the final prefix still fails.
fn minimize(start: &Position, plies: &[GenMove], capacity: usize) -> (Position, Vec<GenMove>) {
    let fails = |s: &Position, p: &[GenMove]| {
        let mut detector = ChainDetector::new(capacity);
        let mut stack = PositionStack::new();
        stack.push_position(s, false);
        let mut moves = Vec::new();
        let mut pos = *s;
        for &m in p {
            let c = code_from_genmove(&m);
            moves.push(c);
            pos = make_move(&pos, m);
            stack.push_position(&pos, c.is_irreversible());
        }
        check_prefix(&mut detector, &moves, &mut stack).failure.is_some()
    };
    let mut s = *start;
    let mut p = plies.to_vec();
    while p.len() > 1 {
        let next = make_move(&s, p[0]);
        if !fails(&next, &p[1..]) {
            break;
        }
        s = next;
        p.remove(0);
    }
    (s, p)
}

const PIECE_POOL: [PieceKind; 6] = [
    PieceKind::Queen,
    PieceKind::Rook,
    PieceKind::Rook,
    PieceKind::Bishop,
    PieceKind::Knight,
    PieceKind::Knight,
];

/// A random legal position with kings, a few officers (duplicates welcome) and some pawns.
pub fn random_position(rng: &mut ChaCha8Rng) -> Position {
    loop {
        let mut m = Matrix64::empty();
        let mut free: Vec<Square> = Square::all().collect();
        free.shuffle(rng);
        let mut place = |m: &mut Matrix64, code: PieceCode, pawn: bool| {
            if let Some(i) = free
                .iter()
                .position(|s| !pawn || (2..=7).contains(&s.rank()))
            {
                m[free.swap_remove(i)] = code;
            }
        };
        for color in [Color::White, Color::Black] {
            place(&mut m, PieceCode::new(color, PieceKind::King), false);
            let officers = rng.gen_range(1..=PIECE_POOL.len());
            let mut pool = PIECE_POOL;
            pool.shuffle(rng);
            for &kind in &pool[..officers] {
                place(&mut m, PieceCode::new(color, kind), false);
            }
            for _ in 0..rng.gen_range(0..=3) {
                place(&mut m, PieceCode::new(color, PieceKind::Pawn), true);
            }
        }
        let side = if rng.gen_bool(0.5) { Color::White } else { Color::Black };
        if let Ok(p) = Position::from_parts(m, side, CastlingRights::none(), None, 0, 1) {
            let mut buf = Vec::new();
            legal_moves_into(&p, &mut buf);
            if !buf.is_empty() {
                return p;
            }
        }
    }
}

/// Plays a reversible-heavy random segment.
pub fn random_segment(rng: &mut ChaCha8Rng, cfg: &FuzzConfig) -> (Position, Vec<GenMove>) {
    let start = random_position(rng);
    let len = rng.gen_range(cfg.max_plies.div_ceil(2)..=cfg.max_plies.max(1));
    let mut pos = start;
    let mut plies: Vec<GenMove> = Vec::with_capacity(len);
    let mut legal = Vec::new();
    let mut reversible = Vec::new();
    for _ in 0..len {
        legal_moves_into(&pos, &mut legal);
        if legal.is_empty() {
            break;
        }
        let back = plies
            .len()
            .checked_sub(2)
            .map(|i| plies[i])
            .and_then(|prev| legal.iter().find(|m| m.from == prev.to && m.to == prev.from).copied());
        let mv = match back {
            Some(b) if rng.gen_bool(cfg.return_bias) => b,
            _ => {
                let mut mv = *legal.choose(rng).expect("non-empty");
                if mv.is_irreversible() && rng.gen_bool(cfg.reject_irreversible) {
                    reversible.clear();
                    reversible.extend(legal.iter().filter(|m| !m.is_irreversible()));
                    if let Some(r) = reversible.choose(rng) {
                        mv = *r;
                    }
                }
                mv
            }
        };
        plies.push(mv);
        pos = make_move(&pos, mv);
    }
    (start, plies)
}

/// Two rooks trade a1 and b1 while the black king shuffles; the final
/// placement repeats the start with the rooks' identities exchanged.
pub const ROOK_SWAP_FEN: &str = "7k/8/8/8/8/8/8/RR4K1 w - - 0 1";
pub const ROOK_SWAP_LINE: &str = "a1a2 h8g8 b1a1 g8h8 a2b2 h8g8 b2b1 g8h8";

pub fn rook_swap_witness() -> (Position, Vec<GenMove>) {
    let start = parse_fen(ROOK_SWAP_FEN).expect("witness FEN");
    let mut pos = start;
    let mut plies = Vec::new();
    for uci in ROOK_SWAP_LINE.split_whitespace() {
        let m = find_uci(&pos, uci).expect("witness line is legal");
        plies.push(m);
        pos = make_move(&pos, m);
    }
    (start, plies)
}

fn segment_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn failure(
    segment: Option<u64>,
    start: &Position,
    plies: &[GenMove],
    at: usize,
    fp: bool,
    reason: String,
    capacity: usize,
) -> FuzzFailure {
    let (s, p) = minimize(start, &plies[..=at], capacity);
    let coded: Vec<CodedMove> = p.iter().map(code_from_genmove).collect();
    FuzzFailure {
        segment,
        false_positive: fp,
        reason,
        start_fen: emit_fen(&s),
        dump: debug_dump(&coded),
    }
}

fn run_range(cfg: &FuzzConfig, range: std::ops::Range<u64>) -> FuzzReport {
    let mut report = FuzzReport::default();
    let mut scratch = Vec::new();
    for index in range {
        let mut rng = segment_rng(cfg.seed, index);
        let (start, plies) = random_segment(&mut rng, cfg);
        report.segments += 1;
        if let Some((at, fp, why)) = run_segment(&start, &plies, cfg.chain_capacity, &mut report, &mut scratch) {
            if fp {
                report.false_positives += 1;
            } else {
                report.unclassified += 1;
            }
            if report.failures.len() < KEPT_FAILURES {
                report
                    .failures
                    .push(failure(Some(index), &start, &plies, at, fp, why, cfg.chain_capacity));
            }
        }
    }
    report
}

/// Runs the whole differential campaign. Segment `i` always draws from the
/// same ChaCha stream, so the report does not depend on `workers`.
pub fn fuzz_differential(cfg: &FuzzConfig) -> FuzzReport {
    let mut report = FuzzReport {
        seed: cfg.seed,
        ..Default::default()
    };

    // the witness goes first and is tallied like any other segment
    let (ws, wp) = rook_swap_witness();
    let mut witness = Vec::new();
    let mut wr = FuzzReport::default();
    if let Some((at, fp, why)) = run_segment(&ws, &wp, cfg.chain_capacity, &mut wr, &mut witness) {
        if fp {
            wr.false_positives += 1;
        } else {
            wr.unclassified += 1;
        }
        wr.failures.push(failure(None, &ws, &wp, at, fp, why, cfg.chain_capacity));
    }
    wr.segments = 0;
    report.merge(wr);
    report.witness = witness;

    let workers = cfg.workers.max(1) as u64;
    let chunk = cfg.segments.div_ceil(workers).max(1);
    let parts: Vec<FuzzReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let lo = (w * chunk).min(cfg.segments);
                let hi = ((w + 1) * chunk).min(cfg.segments);
                scope.spawn(move || run_range(cfg, lo..hi))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fuzz worker panicked"))
            .collect()
    });
    for part in parts {
        report.merge(part);
    }
    report
}

/// Text form used by the CLI; identical for identical configurations.
pub fn render(report: &FuzzReport) -> String {
    let mut s = String::new();
    let _ = write!(s, "{report}");
    s
}
