//! Classical repetition detection over a stack of positional matrices.
//!
//! The scan walks from the newest frame toward the oldest, looks only at
//! frames with the same side to move, stops at the first irreversible move and
//! compares 16-bit checksums before touching the 512-bit matrices.

use thiserror::Error;

use crate::chainrep::{NoRepetition, RepetitionVerdict};
use crate::movecode::CodedMove;
use crate::position::{Matrix64, Position};
use crate::types::{Color, PieceCode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Frame {
    pub matrix: Matrix64,
    pub side_to_move: Color,
    pub checksum: u16,
    /// The move that produced this frame was irreversible.
    pub irreversible_before: bool,
}

/// Comparison work done by the detector.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CompareCounters {
    pub checksum_compares: u64,
    pub matrix_compares: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum HistoryError {
    #[error("history move {index} ({mv}) does not fit the position")]
    Inconsistent { index: usize, mv: String },
}

#[derive(Clone, Debug)]
pub struct PositionStack {
    frames: Vec<Frame>,
    checksum_prefilter: bool,
    counters: CompareCounters,
}

impl Default for PositionStack {
    fn default() -> Self {
        Self::new()
    }
}

impl PositionStack {
    pub fn new() -> Self {
        PositionStack {
            frames: Vec::with_capacity(256),
            checksum_prefilter: true,
            counters: CompareCounters::default(),
        }
    }

    /// Toggles the checksum prefilter; verdicts are unaffected, only counters.
    pub fn with_checksum_prefilter(mut self, enabled: bool) -> Self {
        self.checksum_prefilter = enabled;
        self
    }

    /// Rebuilds the frames reachable from `root` by undoing the reversible tail
    /// of `history`. Irreversible moves cannot be undone from coded form, so
    /// the rebuild stops there; that is exactly as far back as a repetition
    /// scan can look anyway.
    pub fn from_coded_history(root: &Position, history: &[CodedMove]) -> Result<Self, HistoryError> {
        let mut rewound = vec![(*root.matrix(), root.side_to_move())];
        let mut barrier = false;
        for (index, mv) in history.iter().enumerate().rev() {
            if mv.is_irreversible() {
                barrier = true;
                break;
            }
            let (mut m, side) = *rewound.last().expect("non-empty");
            if m[mv.to()].is_empty() || !m[mv.from()].is_empty() {
                return Err(HistoryError::Inconsistent {
                    index,
                    mv: mv.to_string(),
                });
            }
            m[mv.from()] = m[mv.to()];
            m[mv.to()] = PieceCode::EMPTY;
            rewound.push((m, side.flip()));
        }
        let mut stack = PositionStack::new();
        for (i, (matrix, side)) in rewound.into_iter().rev().enumerate() {
            stack.push_frame(matrix, side, i == 0 && barrier);
        }
        Ok(stack)
    }

    pub fn push_position(&mut self, p: &Position, irreversible_before: bool) {
        self.push_frame(*p.matrix(), p.side_to_move(), irreversible_before);
    }

    pub fn push_frame(&mut self, matrix: Matrix64, side_to_move: Color, irreversible_before: bool) {
        self.frames.push(Frame {
            checksum: matrix.checksum16(),
            matrix,
            side_to_move,
            irreversible_before,
        });
    }

    pub fn pop(&mut self) -> Option<Frame> {
        self.frames.pop()
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn counters(&self) -> CompareCounters {
        self.counters
    }

    pub fn reset_counters(&mut self) {
        self.counters = CompareCounters::default();
    }

    pub fn truncate(&mut self, len: usize) {
        self.frames.truncate(len);
    }

    #[inline]
    fn same(&mut self, a: usize, b: usize) -> bool {
        let (fa, fb) = (&self.frames[a], &self.frames[b]);
        if self.checksum_prefilter {
            self.counters.checksum_compares += 1;
            if fa.checksum != fb.checksum {
                return false;
            }
        }
        self.counters.matrix_compares += 1;
        fa.matrix == fb.matrix
    }

    /// Nearest earlier frame with the same side to move and an equal matrix.
    pub fn detect_repetition_matrix(&mut self) -> RepetitionVerdict {
        let n = self.frames.len();
        assert!(n >= 1, "position stack is empty");
        let top = n - 1;
        let mut k = top;
        while k > 0 {
            if self.frames[k].irreversible_before {
                return RepetitionVerdict::NoRepetition(NoRepetition::IrreversibleBarrier);
            }
            k -= 1;
            let distance = top - k;
            if distance.is_multiple_of(2)
                && self.frames[k].side_to_move == self.frames[top].side_to_move
                && self.same(k, top)
            {
                return RepetitionVerdict::Repetition {
                    scanned_plies: distance,
                };
            }
        }
        if self.frames[0].irreversible_before {
            return RepetitionVerdict::NoRepetition(NoRepetition::IrreversibleBarrier);
        }
        RepetitionVerdict::NoRepetition(NoRepetition::ListExhausted)
    }

    /// How many frames since the last irreversible move (the top included)
    /// show the top frame's matrix with the same side to move.
    pub fn count_occurrences(&self) -> usize {
        let n = self.frames.len();
        assert!(n >= 1, "position stack is empty");
        let top = &self.frames[n - 1];
        let mut count = 1;
        let mut k = n - 1;
        while k > 0 && !self.frames[k].irreversible_before {
            k -= 1;
            let f = &self.frames[k];
            if f.side_to_move == top.side_to_move && f.matrix == top.matrix {
                count += 1;
            }
        }
        count
    }

    /// Matrix equality at a given ply distance below the top, ignoring side to move.
    pub fn matrix_equal_at(&self, distance: usize) -> Option<bool> {
        let top = self.frames.len().checked_sub(1)?;
        let k = top.checked_sub(distance)?;
        Some(self.frames[k].matrix == self.frames[top].matrix)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::movecode::code_from_genmove;
    use crate::movegen::{find_uci, make_move};
    use crate::position::parse_fen;

    fn replay(fen: &str, line: &str) -> (PositionStack, Vec<CodedMove>, Position) {
        let mut p = parse_fen(fen).unwrap();
        let mut stack = PositionStack::new();
        stack.push_position(&p, false);
        let mut coded = Vec::new();
        for uci in line.split_whitespace() {
            let m = find_uci(&p, uci).unwrap_or_else(|| panic!("{uci} illegal"));
            coded.push(code_from_genmove(&m));
            p = make_move(&p, m);
            stack.push_position(&p, m.is_irreversible());
        }
        (stack, coded, p)
    }

    const QUEEN_CHECKS: &str = "q4r1k/5p2/8/8/8/8/8/2Q3K1 w - - 0 1";

    #[test]
    fn single_frame() {
        let mut s = PositionStack::new();
        s.push_position(&Position::startpos(), false);
        assert_eq!(s.len(), 1);
        assert_eq!(s.frames()[0].checksum, Position::startpos().matrix().checksum16());
        assert_eq!(s.count_occurrences(), 1);
        assert_eq!(
            s.detect_repetition_matrix(),
            RepetitionVerdict::NoRepetition(NoRepetition::ListExhausted)
        );
    }

    #[test]
    fn queen_check_line_repeats_after_four() {
        let (mut s, _, _) = replay(QUEEN_CHECKS, "c1h6 h8g8 h6g5 g8h8 g5h6");
        assert_eq!(
            s.detect_repetition_matrix(),
            RepetitionVerdict::Repetition { scanned_plies: 4 }
        );
    }

    #[test]
    fn barrier_stops_scan() {
        let (mut s, _, _) = replay(Position::startpos().to_string().as_str(), "g1f3 g8f6 f3g1 f6g8 e2e4");
        assert!(s.frames().last().unwrap().irreversible_before);
        assert_eq!(
            s.detect_repetition_matrix(),
            RepetitionVerdict::NoRepetition(NoRepetition::IrreversibleBarrier)
        );
        assert_eq!(s.count_occurrences(), 1);
    }

    #[test]
    fn sides_alternate() {
        let (s, _, _) = replay(QUEEN_CHECKS, "c1h6 h8g8 h6g5 g8h7 g5h5 h7g7 h5g5 g7h8 g5h6 h8g8");
        assert_eq!(s.len(), 11);
        for w in s.frames().windows(2) {
            assert_ne!(w[0].side_to_move, w[1].side_to_move);
        }
        for f in s.frames() {
            assert_eq!(f.checksum, f.matrix.checksum16());
        }
    }

    #[test]
    fn threefold_count_over_two_cycles() {
        // nine-move line, then four more checking plies repeat it again
        let (s, _, _) = replay(
            QUEEN_CHECKS,
            "c1h6 h8g8 h6g5 g8h7 g5h5 h7g7 h5g5 g7h8 g5h6 h8g8 h6g5 g8h8 g5h6",
        );
        // position after c1h6 occurs after ply 1, 9 and 13
        assert_eq!(s.count_occurrences(), 3);
    }

    #[test]
    fn rook_swap_is_seen_by_matrix() {
        let (mut s, coded, _) = replay(
            "7k/8/8/8/8/8/8/RR4K1 w - - 0 1",
            "a1a2 h8g8 b1a1 g8h8 a2b2 h8g8 b2b1 g8h8",
        );
        assert_eq!(
            s.detect_repetition_matrix(),
            RepetitionVerdict::Repetition { scanned_plies: 8 }
        );
        let list = crate::chainrep::MoveList::seed_history(&coded).unwrap();
        assert!(!crate::chainrep::detect_repetition(&list).is_repetition());
    }

    #[test]
    fn prefilter_changes_only_counters() {
        let line = "c1h6 h8g8 h6g5 g8h7 g5h5 h7g7 h5g5 g7h8 g5h6";
        let (with, _, _) = replay(QUEEN_CHECKS, line);
        let mut with = with;
        let mut without = with.clone().with_checksum_prefilter(false);
        for cut in (1..=with.len()).rev() {
            with.truncate(cut);
            without.truncate(cut);
            assert_eq!(with.detect_repetition_matrix(), without.detect_repetition_matrix());
        }
        assert!(with.counters().checksum_compares > 0);
        assert!(without.counters().matrix_compares >= with.counters().matrix_compares);
    }

    #[test]
    fn rebuild_from_coded_history() {
        let (mut direct, coded, end) = replay(QUEEN_CHECKS, "c1h6 h8g8 h6g5 g8h8 g5h6");
        let mut rebuilt = PositionStack::from_coded_history(&end, &coded).unwrap();
        assert_eq!(rebuilt.len(), direct.len());
        for (a, b) in rebuilt.frames().iter().zip(direct.frames()) {
            assert_eq!(a.matrix, b.matrix);
            assert_eq!(a.side_to_move, b.side_to_move);
        }
        assert_eq!(rebuilt.detect_repetition_matrix(), direct.detect_repetition_matrix());

        let (_, coded, end) = replay(
            &Position::startpos().to_string(),
            "g1f3 g8f6 e2e4 f6g8 f3g1 g8f6",
        );
        let rebuilt = PositionStack::from_coded_history(&end, &coded).unwrap();
        assert_eq!(rebuilt.len(), 4);
        assert!(rebuilt.frames()[0].irreversible_before);
    }
}
