//! Fixed-depth alpha-beta with iterative deepening and a pluggable repetition detector.
//!
//! Move ordering is static (captures by victim/attacker value, then quiet
//! moves in generation order) and never depends on the detector, so runs in
//! different modes explore comparable trees.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::chainrep::{ChainDetector, MoveList, MoveListError, DEFAULT_CHAIN_CAPACITY, MAX_CHAIN_CAPACITY};
use crate::matrix::{HistoryError, PositionStack};
use crate::movecode::{code_from_genmove, CodedMove};
use crate::movegen::{in_check, legal_moves_into, make_move, GenMove, MoveKind};
use crate::position::Position;
use crate::types::{Color, PieceKind};

pub const MATE: i32 = 30_000;
const INFINITY: i32 = 32_000;
pub const MAX_DEPTH: u32 = 16;
pub const FIFTY_MOVE_PLIES: u32 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DetectorMode {
    Off,
    Chain,
    ChainRaw,
    Matrix,
}

impl DetectorMode {
    pub const ALL: [DetectorMode; 4] = [
        DetectorMode::Off,
        DetectorMode::Chain,
        DetectorMode::ChainRaw,
        DetectorMode::Matrix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorMode::Off => "off",
            DetectorMode::Chain => "chain",
            DetectorMode::ChainRaw => "chainRaw",
            DetectorMode::Matrix => "matrix",
        }
    }
}

impl fmt::Display for DetectorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(DetectorMode::Off),
            "chain" => Ok(DetectorMode::Chain),
            "chainraw" | "chain-raw" | "raw" => Ok(DetectorMode::ChainRaw),
            "matrix" => Ok(DetectorMode::Matrix),
            _ => Err(format!("unknown detector mode {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum EvalMode {
    #[default]
    MaterialOnly,
    MaterialPlusMobility,
}

impl FromStr for EvalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "material" | "materialonly" => Ok(EvalMode::MaterialOnly),
            "mobility" | "materialplusmobility" => Ok(EvalMode::MaterialPlusMobility),
            _ => Err(format!("unknown eval mode {s:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_depth: u32,
    pub detector: DetectorMode,
    pub chain_capacity: usize,
    pub eval: EvalMode,
}

impl SearchConfig {
    pub fn new(max_depth: u32, detector: DetectorMode) -> Self {
        SearchConfig {
            max_depth,
            detector,
            chain_capacity: DEFAULT_CHAIN_CAPACITY,
            eval: EvalMode::MaterialOnly,
        }
    }

    pub fn with_eval(mut self, eval: EvalMode) -> Self {
        self.eval = eval;
        self
    }

    pub fn with_chain_capacity(mut self, capacity: usize) -> Self {
        self.chain_capacity = capacity;
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Statically evaluated leaves.
    pub terminal_nodes: u64,
    /// Child positions produced by make-move.
    pub generated_positions: u64,
    /// Nodes scored as a repetition.
    pub repetition_hits: u64,
    /// Longest move list seen (history plus variant).
    pub max_list_len: usize,
    pub elapsed: Duration,
}

impl SearchStats {
    pub fn accumulate(&mut self, other: &SearchStats) {
        self.terminal_nodes += other.terminal_nodes;
        self.generated_positions += other.generated_positions;
        self.repetition_hits += other.repetition_hits;
        self.max_list_len = self.max_list_len.max(other.max_list_len);
        self.elapsed += other.elapsed;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iteration {
    pub depth: u32,
    pub best_move: GenMove,
    pub score: i32,
    pub principal_variation: Vec<GenMove>,
    pub stats: SearchStats,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub best_move: GenMove,
    pub score: i32,
    pub depth: u32,
    /// Summed over all iterations.
    pub stats: SearchStats,
    pub principal_variation: Vec<GenMove>,
    pub iterations: Vec<Iteration>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Terminal {
    Checkmate,
    Stalemate,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("no legal moves at the root: {0:?}")]
    NoLegalMoves(Terminal),
    #[error("max depth must be in 1..={MAX_DEPTH}, got {0}")]
    Depth(u32),
    #[error("chain capacity must be in 1..={MAX_CHAIN_CAPACITY}, got {0}")]
    ChainCapacity(usize),
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error(transparent)]
    MoveList(#[from] MoveListError),
}

pub fn piece_value(kind: PieceKind) -> i32 {
    match kind {
        PieceKind::Pawn => 100,
        PieceKind::Knight => 300,
        PieceKind::Bishop => 310,
        PieceKind::Rook => 500,
        PieceKind::Queen => 900,
        PieceKind::King => 0,
    }
}

fn material(p: &Position) -> i32 {
    let us = p.side_to_move();
    p.matrix()
        .occupied()
        .map(|(_, code)| {
            let v = piece_value(code.kind().expect("occupied"));
            if code.is_color(us) {
                v
            } else {
                -v
            }
        })
        .sum()
}

fn mobility_count(p: &Position, side: Color, buf: &mut Vec<GenMove>) -> i32 {
    let mut view = *p;
    if view.side_to_move != side {
        view.side_to_move = side;
        view.ep_square = None;
    }
    legal_moves_into(&view, buf);
    buf.len() as i32
}

/// Centipawns from the side to move's point of view.
pub fn evaluate_static(p: &Position, mode: EvalMode) -> i32 {
    let mut score = material(p);
    if mode == EvalMode::MaterialPlusMobility {
        let mut buf = Vec::with_capacity(64);
        let us = p.side_to_move();
        score += 2 * (mobility_count(p, us, &mut buf) - mobility_count(p, us.flip(), &mut buf));
    }
    score
}

pub fn fifty_move_draw(p: &Position) -> bool {
    p.halfmove_clock() >= FIFTY_MOVE_PLIES
}

pub fn is_mate_score(score: i32) -> bool {
    score.abs() > MATE - 1000
}

/// Ordering key: captures and promotions first (most valuable victim, least
/// valuable attacker), then everything else in generation order.
fn order_moves(p: &Position, moves: &mut [GenMove]) {
    let key = |m: &GenMove| -> i32 {
        let attacker = p.piece_at(m.from).kind().map_or(0, piece_value);
        let victim = match m.kind {
            MoveKind::EnPassant => 100,
            _ => p.piece_at(m.to).kind().map_or(0, piece_value),
        };
        let promo = match m.kind {
            MoveKind::Promotion { piece, .. } => piece_value(piece),
            _ => 0,
        };
        if victim > 0 || promo > 0 {
            -(10_000 + promo + victim * 10 - attacker / 10)
        } else {
            0
        }
    };
    moves.sort_by_key(key);
}

struct Searcher {
    cfg: SearchConfig,
    list: MoveList,
    chains: ChainDetector,
    frames: PositionStack,
    stats: SearchStats,
    pv: Vec<Vec<GenMove>>,
    buffers: Vec<Vec<GenMove>>,
}

impl Searcher {
    fn new(root: &Position, cfg: SearchConfig, history: &[CodedMove]) -> Result<Self, SearchError> {
        let depth = cfg.max_depth as usize;
        let list = MoveList::seed_history_with_capacity(
            history,
            crate::chainrep::DEFAULT_LIST_CAPACITY.max(history.len() + depth + 1),
        )?;
        let frames = if cfg.detector == DetectorMode::Matrix {
            PositionStack::from_coded_history(root, history)?
        } else {
            PositionStack::new()
        };
        Ok(Searcher {
            cfg,
            list,
            chains: ChainDetector::new(cfg.chain_capacity),
            frames,
            stats: SearchStats::default(),
            pv: vec![Vec::with_capacity(depth + 1); depth + 2],
            buffers: vec![Vec::with_capacity(64); depth + 2],
        })
    }

    #[inline]
    fn repetition(&mut self) -> bool {
        match self.cfg.detector {
            DetectorMode::Off => false,
            DetectorMode::Chain => self.chains.detect(self.list.as_slice()).is_repetition(),
            DetectorMode::ChainRaw => self.chains.detect_raw(self.list.as_slice()).is_repetition(),
            DetectorMode::Matrix => self.frames.detect_repetition_matrix().is_repetition(),
        }
    }

    fn node(&mut self, pos: &Position, depth: u32, ply: usize, mut alpha: i32, beta: i32) -> i32 {
        self.pv[ply].clear();
        debug_assert_eq!(self.list.len(), self.list.history_len() + ply);
        self.stats.max_list_len = self.stats.max_list_len.max(self.list.len());

        if ply > 0 {
            if self.repetition() {
                self.stats.repetition_hits += 1;
                return 0;
            }
            if fifty_move_draw(pos) {
                return 0;
            }
        }
        if depth == 0 {
            self.stats.terminal_nodes += 1;
            return evaluate_static(pos, self.cfg.eval);
        }

        let mut moves = std::mem::take(&mut self.buffers[ply]);
        legal_moves_into(pos, &mut moves);
        if moves.is_empty() {
            self.buffers[ply] = moves;
            return if in_check(pos) {
                -(MATE - ply as i32)
            } else {
                0
            };
        }
        order_moves(pos, &mut moves);

        let mut best = -INFINITY;
        for &mv in moves.iter() {
            let child = make_move(pos, mv);
            self.stats.generated_positions += 1;
            self.list
                .push_move(code_from_genmove(&mv))
                .expect("list sized for history plus depth");
            let matrix = self.cfg.detector == DetectorMode::Matrix;
            if matrix {
                self.frames.push_position(&child, mv.is_irreversible());
            }

            let score = -self.node(&child, depth - 1, ply + 1, -beta, -alpha);

            if matrix {
                self.frames.pop();
            }
            self.list.pop_move().expect("variant move");

            if score > best {
                best = score;
                if score > alpha {
                    alpha = score;
                    let (head, tail) = self.pv.split_at_mut(ply + 1);
                    let line = &mut head[ply];
                    line.clear();
                    line.push(mv);
                    line.extend_from_slice(&tail[0]);
                    if alpha >= beta {
                        break;
                    }
                }
            }
        }
        self.buffers[ply] = moves;
        best
    }
}

/// Iterative deepening from depth 1 to `cfg.max_depth`.
///
/// `history` is the coded move sequence that led to `root`; it is scanned by
/// the chain detectors and rewound into frames for the matrix detector.
pub fn search(root: &Position, cfg: SearchConfig, history: &[CodedMove]) -> Result<SearchResult, SearchError> {
    if !(1..=MAX_DEPTH).contains(&cfg.max_depth) {
        return Err(SearchError::Depth(cfg.max_depth));
    }
    if !(1..=MAX_CHAIN_CAPACITY).contains(&cfg.chain_capacity) {
        return Err(SearchError::ChainCapacity(cfg.chain_capacity));
    }
    let root_moves = crate::movegen::generate_legal_moves(root);
    if root_moves.is_empty() {
        return Err(SearchError::NoLegalMoves(if in_check(root) {
            Terminal::Checkmate
        } else {
            Terminal::Stalemate
        }));
    }

    let mut searcher = Searcher::new(root, cfg, history)?;
    let mut iterations = Vec::with_capacity(cfg.max_depth as usize);
    let mut total = SearchStats::default();
    for depth in 1..=cfg.max_depth {
        searcher.stats = SearchStats::default();
        let start = Instant::now();
        let score = searcher.node(root, depth, 0, -INFINITY, INFINITY);
        searcher.stats.elapsed = start.elapsed();
        let pv = searcher.pv[0].clone();
        let best_move = *pv.first().expect("root has legal moves");
        total.accumulate(&searcher.stats);
        iterations.push(Iteration {
            depth,
            best_move,
            score,
            principal_variation: pv,
            stats: searcher.stats,
        });
    }
    let last = iterations.last().expect("at least one iteration").clone();
    Ok(SearchResult {
        best_move: last.best_move,
        score: last.score,
        depth: last.depth,
        stats: total,
        principal_variation: last.principal_variation,
        iterations,
    })
}
