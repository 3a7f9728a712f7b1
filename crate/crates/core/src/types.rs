//! Squares, colors and the 4-bit piece codes shared by every other module.

use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    White,
    Black,
}

impl Color {
    #[inline]
    pub fn flip(self) -> Color {
        match self {
            Color::White => Color::Black,
            Color::Black => Color::White,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

/// One-dimensional board address. A8 is 0, B8 is 1, H1 is 63.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square(u8);

impl Square {
    pub const A8: Square = Square(0);
    pub const H8: Square = Square(7);
    pub const A1: Square = Square(56);
    pub const H1: Square = Square(63);

    #[inline]
    pub fn new(index: u8) -> Option<Square> {
        (index < 64).then_some(Square(index))
    }

    /// `file` is 0 for the a-file, `rank` is the chess rank 1..=8.
    #[inline]
    pub fn from_file_rank(file: u8, rank: u8) -> Option<Square> {
        if file < 8 && (1..=8).contains(&rank) {
            Some(Square((8 - rank) * 8 + file))
        } else {
            None
        }
    }

    #[inline]
    pub(crate) const fn from_index_unchecked(index: u8) -> Square {
        Square(index)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn file(self) -> u8 {
        self.0 & 7
    }

    /// Chess rank, 1..=8.
    #[inline]
    pub fn rank(self) -> u8 {
        8 - (self.0 >> 3)
    }

    /// Signed offset in file/rank space; `None` when it leaves the board.
    #[inline]
    pub fn offset(self, dfile: i8, drank: i8) -> Option<Square> {
        let f = self.file() as i8 + dfile;
        let r = self.rank() as i8 + drank;
        if (0..8).contains(&f) && (1..=8).contains(&r) {
            Some(Square((8 - r as u8) * 8 + f as u8))
        } else {
            None
        }
    }

    pub fn all() -> impl Iterator<Item = Square> {
        (0u8..64).map(Square)
    }
}

impl fmt::Display for Square {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", (b'a' + self.file()) as char, self.rank())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("invalid square name {0:?}")]
pub struct SquareParseError(pub String);

impl FromStr for Square {
    type Err = SquareParseError;

    /// Accepts "e4" as well as "E4".
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let b = s.as_bytes();
        if b.len() != 2 {
            return Err(SquareParseError(s.to_string()));
        }
        let file = b[0].to_ascii_lowercase().wrapping_sub(b'a');
        let rank = b[1].wrapping_sub(b'0');
        Square::from_file_rank(file, rank).ok_or_else(|| SquareParseError(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PieceKind {
    Pawn = 1,
    Knight = 2,
    Bishop = 3,
    Rook = 4,
    Queen = 5,
    King = 6,
}

impl PieceKind {
    pub const ALL: [PieceKind; 6] = [
        PieceKind::Pawn,
        PieceKind::Knight,
        PieceKind::Bishop,
        PieceKind::Rook,
        PieceKind::Queen,
        PieceKind::King,
    ];

    pub fn from_char(c: char) -> Option<PieceKind> {
        match c.to_ascii_lowercase() {
            'p' => Some(PieceKind::Pawn),
            'n' => Some(PieceKind::Knight),
            'b' => Some(PieceKind::Bishop),
            'r' => Some(PieceKind::Rook),
            'q' => Some(PieceKind::Queen),
            'k' => Some(PieceKind::King),
            _ => None,
        }
    }

    /// Upper-case letter as used in SAN and white FEN pieces.
    pub fn letter(self) -> char {
        match self {
            PieceKind::Pawn => 'P',
            PieceKind::Knight => 'N',
            PieceKind::Bishop => 'B',
            PieceKind::Rook => 'R',
            PieceKind::Queen => 'Q',
            PieceKind::King => 'K',
        }
    }
}

/// 4-bit piece code: 0 empty, 1..=6 white pawn..king, 9..=14 black pawn..king.
/// Bit 3 is the color bit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct PieceCode(u8);

impl PieceCode {
    pub const EMPTY: PieceCode = PieceCode(0);
    const BLACK_BIT: u8 = 0b1000;

    #[inline]
    pub fn new(color: Color, kind: PieceKind) -> PieceCode {
        let base = kind as u8;
        match color {
            Color::White => PieceCode(base),
            Color::Black => PieceCode(base | Self::BLACK_BIT),
        }
    }

    /// Validating constructor from the raw 4-bit value.
    pub fn from_value(value: u8) -> Option<PieceCode> {
        match value {
            0..=6 | 9..=14 => Some(PieceCode(value)),
            _ => None,
        }
    }

    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn color(self) -> Option<Color> {
        match self.0 {
            0 => None,
            v if v & Self::BLACK_BIT != 0 => Some(Color::Black),
            _ => Some(Color::White),
        }
    }

    #[inline]
    pub fn kind(self) -> Option<PieceKind> {
        match self.0 & 0b0111 {
            1 => Some(PieceKind::Pawn),
            2 => Some(PieceKind::Knight),
            3 => Some(PieceKind::Bishop),
            4 => Some(PieceKind::Rook),
            5 => Some(PieceKind::Queen),
            6 => Some(PieceKind::King),
            _ => None,
        }
    }

    #[inline]
    pub fn is(self, color: Color, kind: PieceKind) -> bool {
        self == PieceCode::new(color, kind)
    }

    #[inline]
    pub fn is_color(self, color: Color) -> bool {
        self.color() == Some(color)
    }

    pub fn fen_char(self) -> Option<char> {
        let kind = self.kind()?;
        let c = kind.letter();
        match self.color()? {
            Color::White => Some(c),
            Color::Black => Some(c.to_ascii_lowercase()),
        }
    }

    pub fn from_fen_char(c: char) -> Option<PieceCode> {
        let kind = PieceKind::from_char(c)?;
        let color = if c.is_ascii_uppercase() {
            Color::White
        } else {
            Color::Black
        };
        Some(PieceCode::new(color, kind))
    }
}
