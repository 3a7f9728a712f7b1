//! Legal move generation, make-move and perft over the 64-cell matrix.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::position::{Matrix64, Position};
use crate::types::{Color, PieceCode, PieceKind, Square};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CastleSide {
    King,
    Queen,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Quiet,
    Capture,
    /// Non-capturing pawn advance (single or double step).
    PawnPush,
    Promotion { piece: PieceKind, capture: bool },
    Castle(CastleSide),
    EnPassant,
}

/// A generated move. For castling `from`/`to` are the king's squares.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GenMove {
    pub from: Square,
    pub to: Square,
    pub kind: MoveKind,
}

impl GenMove {
    pub fn new(from: Square, to: Square, kind: MoveKind) -> Self {
        GenMove { from, to, kind }
    }

    /// Captures, pawn moves, promotions, castling and en passant can never be undone.
    #[inline]
    pub fn is_irreversible(&self) -> bool {
        !matches!(self.kind, MoveKind::Quiet)
    }

    #[inline]
    pub fn is_capture(&self) -> bool {
        matches!(
            self.kind,
            MoveKind::Capture | MoveKind::EnPassant | MoveKind::Promotion { capture: true, .. }
        )
    }

    /// Long algebraic form, e.g. `e7e8q`.
    pub fn uci(&self) -> String {
        let mut s = format!("{}{}", self.from, self.to);
        if let MoveKind::Promotion { piece, .. } = self.kind {
            s.push(piece.letter().to_ascii_lowercase());
        }
        s
    }
}

impl fmt::Display for GenMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.uci())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("move {mv} is not legal in {fen}")]
pub struct IllegalMove {
    pub mv: String,
    pub fen: String,
}

const KNIGHT_DELTAS: [(i8, i8); 8] = [
    (1, 2),
    (2, 1),
    (2, -1),
    (1, -2),
    (-1, -2),
    (-2, -1),
    (-2, 1),
    (-1, 2),
];
const KING_DELTAS: [(i8, i8); 8] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
];
// First four are orthogonal (rook), last four diagonal (bishop).
const RAY_DELTAS: [(i8, i8); 8] = [
    (0, 1),
    (1, 0),
    (0, -1),
    (-1, 0),
    (1, 1),
    (1, -1),
    (-1, -1),
    (-1, 1),
];

struct Tables {
    knight: [Vec<Square>; 64],
    king: [Vec<Square>; 64],
    rays: [[Vec<Square>; 8]; 64],
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let jumps = |deltas: &[(i8, i8)]| {
            std::array::from_fn(|i| {
                let sq = Square::from_index_unchecked(i as u8);
                deltas
                    .iter()
                    .filter_map(|&(df, dr)| sq.offset(df, dr))
                    .collect()
            })
        };
        Tables {
            knight: jumps(&KNIGHT_DELTAS),
            king: jumps(&KING_DELTAS),
            rays: std::array::from_fn(|i| {
                let sq = Square::from_index_unchecked(i as u8);
                std::array::from_fn(|d| {
                    let (df, dr) = RAY_DELTAS[d];
                    let mut out = Vec::with_capacity(7);
                    let mut cur = sq;
                    while let Some(next) = cur.offset(df, dr) {
                        out.push(next);
                        cur = next;
                    }
                    out
                })
            }),
        }
    })
}

fn pawn_forward(color: Color) -> i8 {
    match color {
        Color::White => 1,
        Color::Black => -1,
    }
}

/// Is `sq` attacked by any piece of color `by`?
pub fn is_square_attacked(p: &Position, sq: Square, by: Color) -> bool {
    attacked_in(p.matrix(), sq, by)
}

fn attacked_in(m: &Matrix64, sq: Square, by: Color) -> bool {
    let t = tables();
    // a pawn of `by` attacks sq from one rank behind (from by's point of view)
    let back = -pawn_forward(by);
    let pawn = PieceCode::new(by, PieceKind::Pawn);
    for df in [-1, 1] {
        if let Some(from) = sq.offset(df, back) {
            if m[from] == pawn {
                return true;
            }
        }
    }
    let knight = PieceCode::new(by, PieceKind::Knight);
    if t.knight[sq.index()].iter().any(|&s| m[s] == knight) {
        return true;
    }
    let king = PieceCode::new(by, PieceKind::King);
    if t.king[sq.index()].iter().any(|&s| m[s] == king) {
        return true;
    }
    let queen = PieceCode::new(by, PieceKind::Queen);
    let rook = PieceCode::new(by, PieceKind::Rook);
    let bishop = PieceCode::new(by, PieceKind::Bishop);
    for (d, ray) in t.rays[sq.index()].iter().enumerate() {
        let slider = if d < 4 { rook } else { bishop };
        for &s in ray {
            let c = m[s];
            if c.is_empty() {
                continue;
            }
            if c == slider || c == queen {
                return true;
            }
            break;
        }
    }
    false
}

pub fn in_check(p: &Position) -> bool {
    let us = p.side_to_move();
    is_square_attacked(p, p.king_square(us), us.flip())
}

const PROMOTION_PIECES: [PieceKind; 4] = [
    PieceKind::Queen,
    PieceKind::Rook,
    PieceKind::Bishop,
    PieceKind::Knight,
];

fn push_pawn_moves(out: &mut Vec<GenMove>, from: Square, to: Square, capture: bool, promo: bool) {
    if promo {
        for piece in PROMOTION_PIECES {
            out.push(GenMove::new(from, to, MoveKind::Promotion { piece, capture }));
        }
    } else if capture {
        out.push(GenMove::new(from, to, MoveKind::Capture));
    } else {
        out.push(GenMove::new(from, to, MoveKind::PawnPush));
    }
}

fn pseudo_legal(p: &Position, out: &mut Vec<GenMove>) {
    let t = tables();
    let m = p.matrix();
    let us = p.side_to_move();
    let fwd = pawn_forward(us);
    let (start_rank, last_rank) = match us {
        Color::White => (2, 8),
        Color::Black => (7, 1),
    };

    let target = |to: Square| -> Option<MoveKind> {
        let c = m[to];
        if c.is_empty() {
            Some(MoveKind::Quiet)
        } else if c.is_color(us) {
            None
        } else {
            Some(MoveKind::Capture)
        }
    };

    for from in Square::all() {
        let code = m[from];
        if !code.is_color(us) {
            continue;
        }
        match code.kind().expect("occupied") {
            PieceKind::Pawn => {
                if let Some(one) = from.offset(0, fwd) {
                    if m[one].is_empty() {
                        push_pawn_moves(out, from, one, false, one.rank() == last_rank);
                        if from.rank() == start_rank {
                            let two = one.offset(0, fwd).expect("on board");
                            if m[two].is_empty() {
                                out.push(GenMove::new(from, two, MoveKind::PawnPush));
                            }
                        }
                    }
                }
                for df in [-1, 1] {
                    if let Some(to) = from.offset(df, fwd) {
                        let c = m[to];
                        if !c.is_empty() && !c.is_color(us) {
                            push_pawn_moves(out, from, to, true, to.rank() == last_rank);
                        } else if c.is_empty() && p.ep_square() == Some(to) {
                            out.push(GenMove::new(from, to, MoveKind::EnPassant));
                        }
                    }
                }
            }
            PieceKind::Knight => {
                for &to in &t.knight[from.index()] {
                    if let Some(kind) = target(to) {
                        out.push(GenMove::new(from, to, kind));
                    }
                }
            }
            PieceKind::King => {
                for &to in &t.king[from.index()] {
                    if let Some(kind) = target(to) {
                        out.push(GenMove::new(from, to, kind));
                    }
                }
                castling_moves(p, from, out);
            }
            kind => {
                let dirs = match kind {
                    PieceKind::Rook => 0..4,
                    PieceKind::Bishop => 4..8,
                    _ => 0..8,
                };
                for d in dirs {
                    for &to in &t.rays[from.index()][d] {
                        match target(to) {
                            Some(MoveKind::Quiet) => {
                                out.push(GenMove::new(from, to, MoveKind::Quiet))
                            }
                            Some(kind) => {
                                out.push(GenMove::new(from, to, kind));
                                break;
                            }
                            None => break,
                        }
                    }
                }
            }
        }
    }
}

fn castling_moves(p: &Position, king_from: Square, out: &mut Vec<GenMove>) {
    let us = p.side_to_move();
    let rights = p.castling();
    let home = match us {
        Color::White => 60,
        Color::Black => 4,
    };
    if king_from.value() != home || !(rights.king_side(us) || rights.queen_side(us)) {
        return;
    }
    let m = p.matrix();
    let them = us.flip();
    let rook = PieceCode::new(us, PieceKind::Rook);
    let sq = |i: u8| Square::from_index_unchecked(i);
    if attacked_in(m, king_from, them) {
        return;
    }
    if rights.king_side(us)
        && m[sq(home + 3)] == rook
        && m[sq(home + 1)].is_empty()
        && m[sq(home + 2)].is_empty()
        && !attacked_in(m, sq(home + 1), them)
        && !attacked_in(m, sq(home + 2), them)
    {
        out.push(GenMove::new(
            king_from,
            sq(home + 2),
            MoveKind::Castle(CastleSide::King),
        ));
    }
    if rights.queen_side(us)
        && m[sq(home - 4)] == rook
        && m[sq(home - 1)].is_empty()
        && m[sq(home - 2)].is_empty()
        && m[sq(home - 3)].is_empty()
        && !attacked_in(m, sq(home - 1), them)
        && !attacked_in(m, sq(home - 2), them)
    {
        out.push(GenMove::new(
            king_from,
            sq(home - 2),
            MoveKind::Castle(CastleSide::Queen),
        ));
    }
}

/// Applies a move known to be legal (or at least pseudo-legal). No validation.
pub fn make_move(p: &Position, mv: GenMove) -> Position {
    let mut next = *p;
    let us = p.side_to_move();
    let m = &mut next.matrix;
    let moving = m[mv.from];

    m[mv.from] = PieceCode::EMPTY;
    match mv.kind {
        MoveKind::Promotion { piece, .. } => m[mv.to] = PieceCode::new(us, piece),
        MoveKind::EnPassant => {
            m[mv.to] = moving;
            let victim = mv.to.offset(0, -pawn_forward(us)).expect("on board");
            m[victim] = PieceCode::EMPTY;
        }
        MoveKind::Castle(side) => {
            m[mv.to] = moving;
            let home = mv.from.value();
            let (rook_from, rook_to) = match side {
                CastleSide::King => (home + 3, home + 1),
                CastleSide::Queen => (home - 4, home - 1),
            };
            let rook_from = Square::from_index_unchecked(rook_from);
            let rook_to = Square::from_index_unchecked(rook_to);
            m[rook_to] = m[rook_from];
            m[rook_from] = PieceCode::EMPTY;
        }
        _ => m[mv.to] = moving,
    }

    if moving.kind() == Some(PieceKind::King) {
        next.castling.clear_color(us);
    }
    next.castling.touch(mv.from);
    next.castling.touch(mv.to);

    next.ep_square = None;
    if moving.kind() == Some(PieceKind::Pawn)
        && (mv.from.value() as i16 - mv.to.value() as i16).abs() == 16
    {
        next.ep_square = mv.from.offset(0, pawn_forward(us));
    }

    next.halfmove_clock = if mv.is_irreversible() {
        0
    } else {
        p.halfmove_clock() + 1
    };
    if us == Color::Black {
        next.fullmove_number += 1;
    }
    next.side_to_move = us.flip();
    next
}

/// Appends the legal moves of `p` to `out` (cleared first).
pub fn legal_moves_into(p: &Position, out: &mut Vec<GenMove>) {
    out.clear();
    pseudo_legal(p, out);
    let us = p.side_to_move();
    let them = us.flip();
    let king = p.king_square(us);
    out.retain(|&mv| {
        let next = make_move(p, mv);
        let k = if mv.from == king { mv.to } else { king };
        !attacked_in(next.matrix(), k, them)
    });
}

pub fn generate_legal_moves(p: &Position) -> Vec<GenMove> {
    let mut out = Vec::with_capacity(48);
    legal_moves_into(p, &mut out);
    out
}

/// Checked make-move: rejects anything not in the legal move list.
pub fn apply_move(p: &Position, mv: GenMove) -> Result<Position, IllegalMove> {
    if generate_legal_moves(p).contains(&mv) {
        Ok(make_move(p, mv))
    } else {
        Err(IllegalMove {
            mv: mv.uci(),
            fen: crate::position::emit_fen(p),
        })
    }
}

/// Finds the legal move matching a long-algebraic string such as `g1f3` or `e7e8q`.
pub fn find_uci(p: &Position, uci: &str) -> Option<GenMove> {
    generate_legal_moves(p)
        .into_iter()
        .find(|m| m.uci().eq_ignore_ascii_case(uci))
}

pub fn perft(p: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = generate_legal_moves(p);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves
        .iter()
        .map(|&mv| perft(&make_move(p, mv), depth - 1))
        .sum()
}
