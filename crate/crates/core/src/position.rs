//! Positional matrix, game-state record and FEN I/O.

use std::fmt;
use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::types::{Color, PieceCode, PieceKind, Square};

pub const START_FEN: &str = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

/// 64 piece codes indexed by [`Square`]: the uncompressed 512-bit image of a board.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Matrix64([PieceCode; 64]);

impl Matrix64 {
    pub const fn empty() -> Self {
        Matrix64([PieceCode::EMPTY; 64])
    }

    pub fn cells(&self) -> &[PieceCode; 64] {
        &self.0
    }

    pub fn occupied(&self) -> impl Iterator<Item = (Square, PieceCode)> + '_ {
        Square::all()
            .map(move |sq| (sq, self.0[sq.index()]))
            .filter(|(_, code)| !code.is_empty())
    }

    pub fn count_occupied(&self) -> usize {
        self.0.iter().filter(|c| !c.is_empty()).count()
    }

    pub fn find(&self, code: PieceCode) -> Option<Square> {
        self.0
            .iter()
            .position(|&c| c == code)
            .map(|i| Square::from_index_unchecked(i as u8))
    }

    /// 16-bit positional checksum: wrapping sum of `(code + 1) * (index + 1)`
    /// over occupied cells.
    pub fn checksum16(&self) -> u16 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .fold(0u16, |acc, (i, c)| {
                acc.wrapping_add((c.value() as u16 + 1).wrapping_mul(i as u16 + 1))
            })
    }
}

impl Default for Matrix64 {
    fn default() -> Self {
        Matrix64::empty()
    }
}

impl Index<Square> for Matrix64 {
    type Output = PieceCode;

    #[inline]
    fn index(&self, sq: Square) -> &PieceCode {
        &self.0[sq.index()]
    }
}

impl IndexMut<Square> for Matrix64 {
    #[inline]
    fn index_mut(&mut self, sq: Square) -> &mut PieceCode {
        &mut self.0[sq.index()]
    }
}

impl fmt::Debug for Matrix64 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.0.chunks(8) {
            let line: Vec<String> = row.iter().map(|c| format!("{:2}", c.value())).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Free function form of [`Matrix64::checksum16`].
pub fn checksum16(matrix: &Matrix64) -> u16 {
    matrix.checksum16()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CastlingRights {
    pub white_king: bool,
    pub white_queen: bool,
    pub black_king: bool,
    pub black_queen: bool,
}

impl CastlingRights {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn all() -> Self {
        CastlingRights {
            white_king: true,
            white_queen: true,
            black_king: true,
            black_queen: true,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.white_king || self.white_queen || self.black_king || self.black_queen)
    }

    pub fn king_side(&self, color: Color) -> bool {
        match color {
            Color::White => self.white_king,
            Color::Black => self.black_king,
        }
    }

    pub fn queen_side(&self, color: Color) -> bool {
        match color {
            Color::White => self.white_queen,
            Color::Black => self.black_queen,
        }
    }

    pub(crate) fn clear_color(&mut self, color: Color) {
        match color {
            Color::White => {
                self.white_king = false;
                self.white_queen = false;
            }
            Color::Black => {
                self.black_king = false;
                self.black_queen = false;
            }
        }
    }

    /// Drops any right whose rook or king home square is `sq`.
    pub(crate) fn touch(&mut self, sq: Square) {
        match sq.value() {
            56 => self.white_queen = false,
            63 => self.white_king = false,
            60 => {
                self.white_king = false;
                self.white_queen = false;
            }
            0 => self.black_queen = false,
            7 => self.black_king = false,
            4 => {
                self.black_king = false;
                self.black_queen = false;
            }
            _ => {}
        }
    }
}

/// Full game state: matrix, side to move, castling and en-passant state, clocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Position {
    pub(crate) matrix: Matrix64,
    pub(crate) side_to_move: Color,
    pub(crate) castling: CastlingRights,
    pub(crate) ep_square: Option<Square>,
    pub(crate) halfmove_clock: u32,
    pub(crate) fullmove_number: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FenError {
    #[error("expected 6 space-separated fields, found {0}")]
    FieldCount(usize),
    #[error("field {field}: {reason}")]
    Field { field: usize, reason: String },
    #[error("field 1: illegal piece letter {0:?}")]
    PieceLetter(char),
    #[error("field 1: {0}")]
    Kings(String),
    #[error("illegal position: {0}")]
    Illegal(String),
}

fn field_err(field: usize, reason: impl Into<String>) -> FenError {
    FenError::Field {
        field,
        reason: reason.into(),
    }
}

impl Position {
    pub fn startpos() -> Position {
        parse_fen(START_FEN).expect("start FEN is valid")
    }

    pub fn matrix(&self) -> &Matrix64 {
        &self.matrix
    }

    pub fn side_to_move(&self) -> Color {
        self.side_to_move
    }

    pub fn castling(&self) -> CastlingRights {
        self.castling
    }

    pub fn ep_square(&self) -> Option<Square> {
        self.ep_square
    }

    pub fn halfmove_clock(&self) -> u32 {
        self.halfmove_clock
    }

    pub fn fullmove_number(&self) -> u32 {
        self.fullmove_number
    }

    pub fn piece_at(&self, sq: Square) -> PieceCode {
        self.matrix[sq]
    }

    pub fn with_halfmove_clock(mut self, clock: u32) -> Position {
        self.halfmove_clock = clock;
        self
    }

    pub fn king_square(&self, color: Color) -> Square {
        self.matrix
            .find(PieceCode::new(color, PieceKind::King))
            .expect("position always holds both kings")
    }

    /// Builds a position from parts, enforcing the same legality checks as FEN parsing.
    pub fn from_parts(
        matrix: Matrix64,
        side_to_move: Color,
        castling: CastlingRights,
        ep_square: Option<Square>,
        halfmove_clock: u32,
        fullmove_number: u32,
    ) -> Result<Position, FenError> {
        let pos = Position {
            matrix,
            side_to_move,
            castling,
            ep_square,
            halfmove_clock,
            fullmove_number: fullmove_number.max(1),
        };
        pos.validate()?;
        Ok(pos)
    }

    fn validate(&self) -> Result<(), FenError> {
        for color in [Color::White, Color::Black] {
            let king = PieceCode::new(color, PieceKind::King);
            let n = self.matrix.cells().iter().filter(|&&c| c == king).count();
            if n != 1 {
                return Err(FenError::Kings(format!(
                    "expected exactly one {color:?} king, found {n}"
                )));
            }
        }
        if self.matrix.count_occupied() > 32 {
            return Err(FenError::Illegal("more than 32 pieces".into()));
        }
        for (sq, code) in self.matrix.occupied() {
            if code.kind() == Some(PieceKind::Pawn) && (sq.rank() == 1 || sq.rank() == 8) {
                return Err(FenError::Illegal(format!("pawn on back rank at {sq}")));
            }
        }
        let them = self.side_to_move.flip();
        if crate::movegen::is_square_attacked(self, self.king_square(them), self.side_to_move) {
            return Err(FenError::Illegal("side not to move is in check".into()));
        }
        Ok(())
    }
}

impl Default for Position {
    fn default() -> Self {
        Position::startpos()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&emit_fen(self))
    }
}

impl std::str::FromStr for Position {
    type Err = FenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_fen(s)
    }
}

/// Parses a six-field FEN string.
pub fn parse_fen(text: &str) -> Result<Position, FenError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(FenError::FieldCount(fields.len()));
    }
    parse_fields(&fields)
}

/// Parses the first four FEN fields with clocks defaulting to `0 1`, as used by EPD.
pub fn parse_fen_fields(fields: &[&str]) -> Result<Position, FenError> {
    match fields.len() {
        4 => {
            let mut full = fields.to_vec();
            full.push("0");
            full.push("1");
            parse_fields(&full)
        }
        6 => parse_fields(fields),
        n => Err(FenError::FieldCount(n)),
    }
}

fn parse_fields(fields: &[&str]) -> Result<Position, FenError> {
    let matrix = parse_placement(fields[0])?;

    let side_to_move = match fields[1] {
        "w" => Color::White,
        "b" => Color::Black,
        other => return Err(field_err(2, format!("bad side to move {other:?}"))),
    };

    let mut castling = CastlingRights::none();
    if fields[2] != "-" {
        for c in fields[2].chars() {
            let slot = match c {
                'K' => &mut castling.white_king,
                'Q' => &mut castling.white_queen,
                'k' => &mut castling.black_king,
                'q' => &mut castling.black_queen,
                _ => return Err(field_err(3, format!("bad castling flag {c:?}"))),
            };
            if *slot {
                return Err(field_err(3, format!("duplicate castling flag {c:?}")));
            }
            *slot = true;
        }
    }

    let ep_square = match fields[3] {
        "-" => None,
        s => {
            let sq: Square = s
                .parse()
                .map_err(|_| field_err(4, format!("bad en-passant square {s:?}")))?;
            let expected_rank = if side_to_move == Color::White { 6 } else { 3 };
            if sq.rank() != expected_rank {
                return Err(field_err(4, format!("en-passant square {s} on wrong rank")));
            }
            Some(sq)
        }
    };

    let halfmove_clock: u32 = fields[4]
        .parse()
        .map_err(|_| field_err(5, format!("bad halfmove clock {:?}", fields[4])))?;
    let fullmove_number: u32 = fields[5]
        .parse()
        .map_err(|_| field_err(6, format!("bad fullmove number {:?}", fields[5])))?;
    if fullmove_number == 0 {
        return Err(field_err(6, "fullmove number must be at least 1"));
    }

    let pos = Position {
        matrix,
        side_to_move,
        castling,
        ep_square,
        halfmove_clock,
        fullmove_number,
    };
    pos.validate()?;
    Ok(pos)
}

fn parse_placement(text: &str) -> Result<Matrix64, FenError> {
    let ranks: Vec<&str> = text.split('/').collect();
    if ranks.len() != 8 {
        return Err(field_err(1, format!("expected 8 ranks, found {}", ranks.len())));
    }
    let mut matrix = Matrix64::empty();
    // FEN lists rank 8 first, which is exactly the A8=0 ordering.
    for (row, rank_text) in ranks.iter().enumerate() {
        let mut file = 0u8;
        for c in rank_text.chars() {
            if let Some(d) = c.to_digit(10) {
                if d == 0 || d > 8 {
                    return Err(field_err(1, format!("bad empty-square count {c:?}")));
                }
                file += d as u8;
            } else {
                let code = PieceCode::from_fen_char(c).ok_or(FenError::PieceLetter(c))?;
                if file >= 8 {
                    return Err(field_err(1, format!("rank {} too long", 8 - row)));
                }
                matrix[Square::from_index_unchecked(row as u8 * 8 + file)] = code;
                file += 1;
            }
            if file > 8 {
                return Err(field_err(1, format!("rank {} too long", 8 - row)));
            }
        }
        if file != 8 {
            return Err(field_err(1, format!("rank {} has {} files", 8 - row, file)));
        }
    }
    Ok(matrix)
}

fn emit_placement(matrix: &Matrix64) -> String {
    let mut out = String::with_capacity(72);
    for (row, cells) in matrix.cells().chunks(8).enumerate() {
        if row > 0 {
            out.push('/');
        }
        let mut empty = 0;
        for code in cells {
            match code.fen_char() {
                Some(c) => {
                    if empty > 0 {
                        out.push(char::from_digit(empty, 10).unwrap());
                        empty = 0;
                    }
                    out.push(c);
                }
                None => empty += 1,
            }
        }
        if empty > 0 {
            out.push(char::from_digit(empty, 10).unwrap());
        }
    }
    out
}

/// Canonical four-field prefix (placement, side, castling, en passant).
pub fn emit_fen_fields(p: &Position) -> String {
    let mut castling = String::new();
    if p.castling.white_king {
        castling.push('K');
    }
    if p.castling.white_queen {
        castling.push('Q');
    }
    if p.castling.black_king {
        castling.push('k');
    }
    if p.castling.black_queen {
        castling.push('q');
    }
    if castling.is_empty() {
        castling.push('-');
    }
    let side = match p.side_to_move {
        Color::White => 'w',
        Color::Black => 'b',
    };
    let ep = p.ep_square.map_or_else(|| "-".to_string(), |s| s.to_string());
    format!("{} {} {} {}", emit_placement(&p.matrix), side, castling, ep)
}

pub fn emit_fen(p: &Position) -> String {
    format!(
        "{} {} {}",
        emit_fen_fields(p),
        p.halfmove_clock,
        p.fullmove_number
    )
}
