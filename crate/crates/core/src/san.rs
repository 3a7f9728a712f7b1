//! Standard algebraic notation: resolving SAN tokens against the legal move list.

use thiserror::Error;

use crate::movegen::{generate_legal_moves, CastleSide, GenMove, MoveKind};
use crate::position::Position;
use crate::types::{PieceKind, Square};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SanError {
    #[error("malformed SAN {0:?}")]
    Syntax(String),
    #[error("no legal move matches {0:?}")]
    Illegal(String),
    #[error("{0:?} is ambiguous")]
    Ambiguous(String),
}

#[derive(Debug, PartialEq, Eq)]
enum Parsed {
    Castle(CastleSide),
    Normal {
        piece: PieceKind,
        from_file: Option<u8>,
        from_rank: Option<u8>,
        to: Square,
        promotion: Option<PieceKind>,
    },
}

fn parse(text: &str) -> Result<Parsed, SanError> {
    let err = || SanError::Syntax(text.to_string());
    let core = text.trim_end_matches(['+', '#', '!', '?']);
    match core {
        "O-O" | "0-0" => return Ok(Parsed::Castle(CastleSide::King)),
        "O-O-O" | "0-0-0" => return Ok(Parsed::Castle(CastleSide::Queen)),
        _ => {}
    }
    if !core.is_ascii() || core.len() < 2 {
        return Err(err());
    }

    let (body, promotion) = match core.find('=') {
        Some(i) => {
            let p = core[i + 1..].chars().next().ok_or_else(err)?;
            (&core[..i], Some(PieceKind::from_char(p).ok_or_else(err)?))
        }
        None => {
            // tolerate "e8Q"
            let last = core.chars().last().expect("len >= 2");
            if last.is_ascii_uppercase() && core.len() >= 3 {
                (&core[..core.len() - 1], Some(PieceKind::from_char(last).ok_or_else(err)?))
            } else {
                (core, None)
            }
        }
    };
    if body.len() < 2 {
        return Err(err());
    }

    let (piece, rest) = match body.chars().next() {
        Some(c @ ('K' | 'Q' | 'R' | 'B' | 'N')) => (PieceKind::from_char(c).expect("letter"), &body[1..]),
        _ => (PieceKind::Pawn, body),
    };
    if rest.len() < 2 {
        return Err(err());
    }
    let to: Square = rest[rest.len() - 2..].parse().map_err(|_| err())?;
    let mut from_file = None;
    let mut from_rank = None;
    for c in rest[..rest.len() - 2].chars() {
        match c {
            'a'..='h' => from_file = Some(c as u8 - b'a'),
            '1'..='8' => from_rank = Some(c as u8 - b'0'),
            'x' | '-' | ':' => {}
            _ => return Err(err()),
        }
    }
    if matches!(promotion, Some(PieceKind::Pawn | PieceKind::King)) {
        return Err(err());
    }
    Ok(Parsed::Normal {
        piece,
        from_file,
        from_rank,
        to,
        promotion,
    })
}

/// Finds the unique legal move denoted by `text`.
pub fn parse_san(p: &Position, text: &str) -> Result<GenMove, SanError> {
    let parsed = parse(text)?;
    let legal = generate_legal_moves(p);
    let mut found = legal.into_iter().filter(|m| match &parsed {
        Parsed::Castle(side) => m.kind == MoveKind::Castle(*side),
        Parsed::Normal {
            piece,
            from_file,
            from_rank,
            to,
            promotion,
        } => {
            let kind = p.piece_at(m.from).kind();
            let promo = match m.kind {
                MoveKind::Promotion { piece, .. } => Some(piece),
                _ => None,
            };
            kind == Some(*piece)
                && m.to == *to
                && !matches!(m.kind, MoveKind::Castle(_))
                && promo == *promotion
                && from_file.is_none_or(|f| m.from.file() == f)
                && from_rank.is_none_or(|r| m.from.rank() == r)
        }
    });
    match (found.next(), found.next()) {
        (Some(m), None) => Ok(m),
        (None, _) => Err(SanError::Illegal(text.to_string())),
        (Some(_), Some(_)) => Err(SanError::Ambiguous(text.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::position::parse_fen;

    #[test]
    fn basic_moves() {
        let p = Position::startpos();
        assert_eq!(parse_san(&p, "e4").unwrap().uci(), "e2e4");
        assert_eq!(parse_san(&p, "Nf3").unwrap().uci(), "g1f3");
        assert!(matches!(parse_san(&p, "Ke2"), Err(SanError::Illegal(_))));
        assert!(matches!(parse_san(&p, "Zz9"), Err(SanError::Syntax(_))));
    }

    #[test]
    fn disambiguation_castling_promotion() {
        let p = parse_fen("r3k2r/1P6/8/8/8/8/8/R3K2R w KQkq - 0 1").unwrap();
        assert!(matches!(parse_san(&p, "Rd1"), Ok(m) if m.uci() == "a1d1"));
        assert_eq!(parse_san(&p, "O-O").unwrap().uci(), "e1g1");
        assert_eq!(parse_san(&p, "O-O-O+").unwrap().uci(), "e1c1");
        assert_eq!(parse_san(&p, "bxa8=Q+").unwrap().uci(), "b7a8q");
        assert_eq!(parse_san(&p, "b8=N").unwrap().uci(), "b7b8n");
        let two_knights = parse_fen("4k3/8/8/8/8/8/8/1N2KN2 w - - 0 1").unwrap();
        assert!(matches!(parse_san(&two_knights, "Nd2"), Err(SanError::Ambiguous(_))));
        assert_eq!(parse_san(&two_knights, "Nbd2").unwrap().uci(), "b1d2");
        assert_eq!(parse_san(&two_knights, "Nfd2").unwrap().uci(), "f1d2");
    }
}
