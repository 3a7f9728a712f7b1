//! PGN import (tag pairs plus main-line movetext) and game replay with draw adjudication.

use std::fmt;

use thiserror::Error;

use crate::chainrep::{ChainDetector, MoveList, RepetitionVerdict, DEFAULT_CHAIN_CAPACITY};
use crate::matrix::PositionStack;
use crate::movecode::{code_from_genmove, CodedMove};
use crate::movegen::{generate_legal_moves, in_check, make_move};
use crate::position::Position;
use crate::san::{parse_san, SanError};
use crate::search::fifty_move_draw;
use crate::types::Color;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PgnGame {
    pub tags: Vec<(String, String)>,
    pub moves: Vec<String>,
    pub result: Option<String>,
}

impl PgnGame {
    pub fn tag(&self, name: &str) -> Option<&str> {
        self.tags
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PgnError {
    #[error("line {line}: unterminated {what}")]
    Unterminated { line: usize, what: &'static str },
    #[error("line {line}: malformed tag pair")]
    Tag { line: usize },
}

fn is_result(tok: &str) -> bool {
    matches!(tok, "1-0" | "0-1" | "1/2-1/2" | "*")
}

/// Reads the first game. Comments, NAGs and variations are skipped.
pub fn parse_pgn(text: &str) -> Result<PgnGame, PgnError> {
    let mut game = PgnGame::default();
    let mut movetext = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            let inner = line
                .strip_prefix('[')
                .and_then(|l| l.strip_suffix(']'))
                .ok_or(PgnError::Tag { line: i + 1 })?;
            let (name, value) = inner.split_once(char::is_whitespace).ok_or(PgnError::Tag { line: i + 1 })?;
            let value = value.trim();
            let value = value
                .strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .ok_or(PgnError::Tag { line: i + 1 })?;
            game.tags.push((name.to_string(), value.to_string()));
        } else if !line.starts_with('%') {
            movetext.push_str(line);
            movetext.push('\n');
        }
    }

    let mut depth = 0usize;
    let mut chars = movetext.char_indices().peekable();
    let mut token = String::new();
    let mut line = 1;
    let flush = |token: &mut String, game: &mut PgnGame| {
        if token.is_empty() {
            return;
        }
        let t = std::mem::take(token);
        if is_result(&t) {
            game.result = Some(t);
            return;
        }
        // strip "12." / "12..." prefixes glued to the move
        let t = t.trim_start_matches(|c: char| c.is_ascii_digit());
        let t = t.trim_start_matches('.');
        if t.is_empty() || t.starts_with('$') || t.chars().all(|c| c == '!' || c == '?') {
            return;
        }
        game.moves.push(t.to_string());
    };
    let mut comment_start = 0;
    while let Some((_, c)) = chars.next() {
        if c == '\n' {
            line += 1;
        }
        match c {
            '{' => {
                flush(&mut token, &mut game);
                comment_start = line;
                let mut closed = false;
                for (_, c) in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                    }
                    if c == '}' {
                        closed = true;
                        break;
                    }
                }
                if !closed {
                    return Err(PgnError::Unterminated {
                        line: comment_start,
                        what: "comment",
                    });
                }
            }
            ';' => {
                flush(&mut token, &mut game);
                for (_, c) in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        break;
                    }
                }
            }
            '(' => {
                flush(&mut token, &mut game);
                depth += 1;
                comment_start = line;
            }
            ')' => {
                token.clear();
                depth = depth.saturating_sub(1);
            }
            c if c.is_whitespace() => {
                if depth == 0 {
                    flush(&mut token, &mut game);
                } else {
                    token.clear();
                }
            }
            c => {
                if depth == 0 {
                    token.push(c);
                }
            }
        }
    }
    if depth > 0 {
        return Err(PgnError::Unterminated {
            line: comment_start,
            what: "variation",
        });
    }
    flush(&mut token, &mut game);
    Ok(game)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adjudication {
    Ongoing,
    /// A chain-detector repetition occurred (first recurrence) but no rule ended the game.
    DrawTwofoldEngine,
    DrawThreefoldFide,
    DrawFiftyMove,
    Mate,
    Stalemate,
}

impl fmt::Display for Adjudication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Adjudication::Ongoing => "ongoing",
            Adjudication::DrawTwofoldEngine => "draw (twofold, engine)",
            Adjudication::DrawThreefoldFide => "draw (threefold repetition)",
            Adjudication::DrawFiftyMove => "draw (fifty-move rule)",
            Adjudication::Mate => "checkmate",
            Adjudication::Stalemate => "stalemate",
        };
        f.write_str(s)
    }
}

/// Per-ply record of what the detectors saw.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlyRecord {
    /// 1-based ply number.
    pub ply: usize,
    pub san: String,
    pub coded: CodedMove,
    pub chain: RepetitionVerdict,
    pub occurrences: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub final_position: Position,
    pub adjudication: Adjudication,
    /// Ply at which adjudication triggered, if it did.
    pub adjudication_ply: Option<usize>,
    /// First ply at which the chain detector reported a repetition.
    pub first_detection_ply: Option<usize>,
    pub plies: Vec<PlyRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Pgn(#[from] PgnError),
    #[error("move {number}{} {san}: {source}", if *.side == Color::White { "." } else { "..." })]
    Move {
        number: u32,
        side: Color,
        san: String,
        source: SanError,
    },
}

/// Replays a game from the standard start position (or a `FEN` tag).
///
/// After each ply the chain detector and the occurrence counter run.
/// Checkmate and stalemate take precedence, then repetition, then the
/// fifty-move rule. With `adjudicate` the replay stops at the first rule that
/// ends the game; otherwise all moves are played and the earliest trigger is
/// still reported.
pub fn replay_pgn(pgn: &str, adjudicate: bool) -> Result<ReplayOutcome, ReplayError> {
    let game = parse_pgn(pgn)?;
    let start = match game.tag("FEN") {
        Some(fen) => crate::position::parse_fen(fen).map_err(|e| ReplayError::Move {
            number: 0,
            side: Color::White,
            san: "[FEN]".into(),
            source: SanError::Syntax(e.to_string()),
        })?,
        None => Position::startpos(),
    };
    replay_moves(&start, &game.moves, adjudicate)
}

pub fn replay_moves<S: AsRef<str>>(
    start: &Position,
    sans: &[S],
    adjudicate: bool,
) -> Result<ReplayOutcome, ReplayError> {
    let mut pos = *start;
    let mut list = MoveList::with_capacity(sans.len().max(1));
    let mut detector = ChainDetector::new(DEFAULT_CHAIN_CAPACITY);
    let mut frames = PositionStack::new();
    frames.push_position(&pos, false);

    let mut outcome = ReplayOutcome {
        final_position: pos,
        adjudication: Adjudication::Ongoing,
        adjudication_ply: None,
        first_detection_ply: None,
        plies: Vec::with_capacity(sans.len()),
    };

    for (i, san) in sans.iter().enumerate() {
        let san = san.as_ref();
        let mv = parse_san(&pos, san).map_err(|source| ReplayError::Move {
            number: pos.fullmove_number(),
            side: pos.side_to_move(),
            san: san.to_string(),
            source,
        })?;
        let coded = code_from_genmove(&mv);
        pos = make_move(&pos, mv);
        list.push_move(coded).expect("unbounded list");
        frames.push_position(&pos, mv.is_irreversible());

        let ply = i + 1;
        let chain = detector.detect(list.as_slice());
        let occurrences = frames.count_occurrences();
        if chain.is_repetition() && outcome.first_detection_ply.is_none() {
            outcome.first_detection_ply = Some(ply);
        }
        outcome.plies.push(PlyRecord {
            ply,
            san: san.to_string(),
            coded,
            chain,
            occurrences,
        });

        if outcome.adjudication_ply.is_none() {
            let triggered = if generate_legal_moves(&pos).is_empty() {
                Some(if in_check(&pos) {
                    Adjudication::Mate
                } else {
                    Adjudication::Stalemate
                })
            } else if occurrences >= 3 {
                Some(Adjudication::DrawThreefoldFide)
            } else if fifty_move_draw(&pos) {
                Some(Adjudication::DrawFiftyMove)
            } else {
                None
            };
            if let Some(a) = triggered {
                outcome.adjudication = a;
                outcome.adjudication_ply = Some(ply);
                if adjudicate {
                    outcome.final_position = pos;
                    return Ok(outcome);
                }
            }
        }
    }
    outcome.final_position = pos;
    if outcome.adjudication_ply.is_none() && outcome.first_detection_ply.is_some() {
        outcome.adjudication = Adjudication::DrawTwofoldEngine;
    }
    Ok(outcome)
}
