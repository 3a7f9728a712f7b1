//! 16-bit move coding.
//!
//! High byte: from-square in bits 0..=5, bit 6 reserved zero, bit 7 the
//! irreversibility flag. Low byte: to-square. A reversible move from C1 (58)
//! to H6 (23) is therefore `58 * 256 + 23 = 14871`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::movegen::GenMove;
use crate::types::Square;

const IRREVERSIBLE: u16 = 0x8000;
const RESERVED: u16 = 0x4000;
const VALID_MASK: u16 = 0xBF3F;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CodedMove(u16);

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CodingError {
    #[error("square index {0} out of range 0..63")]
    SquareOutOfRange(u8),
    #[error("invalid move coding {0:#06x}")]
    InvalidCoding(u16),
    #[error("cannot parse coded move {0:?}")]
    Parse(String),
}

impl CodedMove {
    #[inline]
    pub fn new(from: Square, to: Square, irreversible: bool) -> CodedMove {
        let mut bits = (from.value() as u16) << 8 | to.value() as u16;
        if irreversible {
            bits |= IRREVERSIBLE;
        }
        CodedMove(bits)
    }

    /// Validating constructor from raw bits.
    pub fn from_bits(bits: u16) -> Result<CodedMove, CodingError> {
        if bits & !VALID_MASK != 0 {
            Err(CodingError::InvalidCoding(bits))
        } else {
            Ok(CodedMove(bits))
        }
    }

    #[inline]
    pub fn bits(self) -> u16 {
        self.0
    }

    #[inline]
    pub fn from(self) -> Square {
        Square::from_index_unchecked(((self.0 >> 8) & 0x3F) as u8)
    }

    #[inline]
    pub fn to(self) -> Square {
        Square::from_index_unchecked((self.0 & 0x3F) as u8)
    }

    /// The `test dh,80h` check: high bit of the from byte.
    #[inline]
    pub fn is_irreversible(self) -> bool {
        self.0 & IRREVERSIBLE != 0
    }
}

/// Packs squares given as raw indices; rejects indices outside 0..=63.
pub fn encode_move(from: u8, to: u8, irreversible: bool) -> Result<CodedMove, CodingError> {
    let f = Square::new(from).ok_or(CodingError::SquareOutOfRange(from))?;
    let t = Square::new(to).ok_or(CodingError::SquareOutOfRange(to))?;
    Ok(CodedMove::new(f, t, irreversible))
}

pub fn decode_move(bits: u16) -> Result<(Square, Square, bool), CodingError> {
    let c = CodedMove::from_bits(bits)?;
    if c.0 & RESERVED != 0 {
        return Err(CodingError::InvalidCoding(bits));
    }
    Ok((c.from(), c.to(), c.is_irreversible()))
}

/// Castling is coded with the king's squares; promotion piece is dropped.
pub fn code_from_genmove(m: &GenMove) -> CodedMove {
    CodedMove::new(m.from, m.to, m.is_irreversible())
}

impl From<&GenMove> for CodedMove {
    fn from(m: &GenMove) -> Self {
        code_from_genmove(m)
    }
}

impl fmt::Display for CodedMove {
    /// Positional notation, e.g. `C1H6`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let from = self.from().to_string().to_ascii_uppercase();
        let to = self.to().to_string().to_ascii_uppercase();
        write!(f, "{from}{to}")
    }
}

impl fmt::Debug for CodedMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)?;
        if self.is_irreversible() {
            f.write_str("*")?;
        }
        Ok(())
    }
}

impl FromStr for CodedMove {
    type Err = CodingError;

    /// Parses `C1H6`, with an optional trailing `*` for the irreversible flag.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (body, irreversible) = match s.strip_suffix('*') {
            Some(b) => (b, true),
            None => (s, false),
        };
        if body.len() != 4 || !body.is_ascii() {
            return Err(CodingError::Parse(s.to_string()));
        }
        let from: Square = body[..2]
            .parse()
            .map_err(|_| CodingError::Parse(s.to_string()))?;
        let to: Square = body[2..]
            .parse()
            .map_err(|_| CodingError::Parse(s.to_string()))?;
        Ok(CodedMove::new(from, to, irreversible))
    }
}

/// Parses a whitespace-separated line such as `C1H6 H8G8 H6G5`.
pub fn parse_line(text: &str) -> Result<Vec<CodedMove>, CodingError> {
    text.split_whitespace().map(str::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::movegen::find_uci;
    use crate::position::{parse_fen, Position};
    use proptest::prelude::*;

    #[test]
    fn worked_example_value() {
        assert_eq!(encode_move(58, 23, false).unwrap().bits(), 14871);
        assert_eq!(encode_move(0, 0, false).unwrap().bits(), 0);
        assert_eq!(encode_move(58, 23, true).unwrap().bits(), 47639);
        assert_eq!(
            decode_move(14871).unwrap(),
            (Square::new(58).unwrap(), Square::new(23).unwrap(), false)
        );
        assert_eq!(decode_move(0).unwrap(), (Square::A8, Square::A8, false));
        assert_eq!(
            decode_move(47639).unwrap(),
            (Square::new(58).unwrap(), Square::new(23).unwrap(), true)
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            encode_move(64, 0, false),
            Err(CodingError::SquareOutOfRange(64))
        );
        assert!(matches!(decode_move(0x4000), Err(CodingError::InvalidCoding(_))));
        assert!(matches!(decode_move(0x0040), Err(CodingError::InvalidCoding(_))));
    }

    #[test]
    fn exhaustive_round_trip() {
        for from in 0..64u8 {
            for to in 0..64u8 {
                for flag in [false, true] {
                    let c = encode_move(from, to, flag).unwrap();
                    let expected = (from as u16 + if flag { 128 } else { 0 }) * 256 + to as u16;
                    assert_eq!(c.bits(), expected);
                    let (f, t, i) = decode_move(c.bits()).unwrap();
                    assert_eq!((f.value(), t.value(), i), (from, to, flag));
                }
            }
        }
    }

    #[test]
    fn codes_from_generated_moves() {
        let p = Position::startpos();
        let nf3 = code_from_genmove(&find_uci(&p, "g1f3").unwrap());
        assert_eq!(nf3, encode_move(62, 45, false).unwrap());
        let e4 = code_from_genmove(&find_uci(&p, "e2e4").unwrap());
        assert!(e4.is_irreversible());
        let castle = parse_fen("r3k2r/8/8/8/8/8/8/R3K2R w KQkq - 0 1").unwrap();
        let oo = code_from_genmove(&find_uci(&castle, "e1g1").unwrap());
        assert_eq!(oo, encode_move(60, 62, true).unwrap());
    }

    #[test]
    fn text_rendering() {
        let c = encode_move(58, 23, false).unwrap();
        assert_eq!(c.to_string(), "C1H6");
        assert_eq!("C1H6".parse::<CodedMove>().unwrap(), c);
        let star: CodedMove = "e2e4*".parse().unwrap();
        assert!(star.is_irreversible());
        assert_eq!(format!("{star:?}"), "E2E4*");
        assert!("C1H".parse::<CodedMove>().is_err());
    }

    proptest! {
        #[test]
        fn any_valid_bits_round_trip(from in 0u8..64, to in 0u8..64, flag: bool) {
            let c = CodedMove::new(Square::new(from).unwrap(), Square::new(to).unwrap(), flag);
            prop_assert_eq!(CodedMove::from_bits(c.bits()).unwrap(), c);
            prop_assert_eq!(c.to_string().len(), 4);
            let parsed: CodedMove = format!("{c:?}").parse().unwrap();
            prop_assert_eq!(parsed, c);
        }
    }
}
