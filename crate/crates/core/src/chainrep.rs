//! Repetition detection by closing variant chains.
//!
//! The move list holds the game history followed by the moves of the current
//! search variant, all in 16-bit coding. Detection scans it backward from the
//! top and maintains a small list of composite moves ("chains"):
//!
//! * a move whose to-square is the from-square of a chain extends that chain
//!   backward (transition); if the extended chain starts where it ends it is
//!   removed (reflexion);
//! * any other move opens a new chain;
//! * an irreversible move ends the scan.
//!
//! When no chain is open every piece that moved in the scanned window is back
//! on its square, so the matrix at the start of the window equals the current
//! one. [`detect_repetition`] additionally requires an even window, i.e. the
//! same side to move. [`detect_repetition_raw`] accepts any closure.

use std::fmt;

use thiserror::Error;

use crate::movecode::{CodedMove, CodingError};
use crate::types::Square;

/// Default number of chain slots.
pub const DEFAULT_CHAIN_CAPACITY: usize = 24;
/// Hard upper bound for a configured chain capacity.
pub const MAX_CHAIN_CAPACITY: usize = 64;
/// Default move-list capacity (`array [0..254] of word`).
pub const DEFAULT_LIST_CAPACITY: usize = 255;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MoveListError {
    #[error("move list overflow: capacity {capacity}")]
    Overflow { capacity: usize },
    #[error("cannot pop game history (history length {history_len})")]
    PopIntoHistory { history_len: usize },
}

/// Game history plus current variant, as a stack of coded moves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveList {
    moves: Vec<CodedMove>,
    history_len: usize,
    capacity: usize,
}

impl MoveList {
    pub fn new() -> Self {
        Self::with_capacity(DEFAULT_LIST_CAPACITY)
    }

    pub fn with_capacity(capacity: usize) -> Self {
        MoveList {
            moves: Vec::with_capacity(capacity),
            history_len: 0,
            capacity,
        }
    }

    /// Resets the list to exactly `history`, which then becomes immutable.
    pub fn seed_history(history: &[CodedMove]) -> Result<Self, MoveListError> {
        Self::seed_history_with_capacity(history, DEFAULT_LIST_CAPACITY)
    }

    pub fn seed_history_with_capacity(
        history: &[CodedMove],
        capacity: usize,
    ) -> Result<Self, MoveListError> {
        if history.len() > capacity {
            return Err(MoveListError::Overflow { capacity });
        }
        let mut list = Self::with_capacity(capacity);
        list.moves.extend_from_slice(history);
        list.history_len = history.len();
        Ok(list)
    }

    pub fn push_move(&mut self, m: CodedMove) -> Result<(), MoveListError> {
        if self.moves.len() >= self.capacity {
            return Err(MoveListError::Overflow {
                capacity: self.capacity,
            });
        }
        self.moves.push(m);
        Ok(())
    }

    pub fn pop_move(&mut self) -> Result<CodedMove, MoveListError> {
        if self.moves.len() <= self.history_len {
            return Err(MoveListError::PopIntoHistory {
                history_len: self.history_len,
            });
        }
        Ok(self.moves.pop().expect("non-empty"))
    }

    /// Index of the last written entry (`move_TOS`), `None` when empty.
    pub fn top_index(&self) -> Option<usize> {
        self.moves.len().checked_sub(1)
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn history_len(&self) -> usize {
        self.history_len
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn as_slice(&self) -> &[CodedMove] {
        &self.moves
    }

    /// Moves pushed since the history, i.e. the current variant.
    pub fn variant(&self) -> &[CodedMove] {
        &self.moves[self.history_len..]
    }
}

impl Default for MoveList {
    fn default() -> Self {
        Self::new()
    }
}

/// A composite move: some piece went from `from` (earlier) to `to` (later).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Chain {
    pub from: Square,
    pub to: Square,
}

/// Fixed-capacity set of open chains.
#[derive(Clone, Debug)]
pub struct ChainList {
    slots: [Option<Chain>; MAX_CHAIN_CAPACITY],
    capacity: usize,
    active: usize,
}

impl ChainList {
    pub fn new(capacity: usize) -> Self {
        assert!(
            (1..=MAX_CHAIN_CAPACITY).contains(&capacity),
            "chain capacity must be in 1..={MAX_CHAIN_CAPACITY}"
        );
        ChainList {
            slots: [None; MAX_CHAIN_CAPACITY],
            capacity,
            active: 0,
        }
    }

    pub fn clear(&mut self) {
        self.slots[..self.capacity].fill(None);
        self.active = 0;
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn active_count(&self) -> usize {
        self.active
    }

    pub fn slots(&self) -> &[Option<Chain>] {
        &self.slots[..self.capacity]
    }

    pub fn open_chains(&self) -> impl Iterator<Item = Chain> + '_ {
        self.slots().iter().flatten().copied()
    }

    /// Folds one earlier move into the set.
    #[inline]
    fn absorb(&mut self, from: Square, to: Square) -> Step {
        let slots = &mut self.slots[..self.capacity];
        // first match in slot order wins
        if let Some(slot) = slots.iter_mut().find(|s| matches!(s, Some(c) if c.from == to)) {
            let chain = slot.as_mut().expect("matched");
            if chain.to == from {
                *slot = None;
                self.active -= 1;
                return Step::Reflexion;
            }
            chain.from = from;
            return Step::Transition;
        }
        match slots.iter_mut().find(|s| s.is_none()) {
            Some(free) => {
                *free = Some(Chain { from, to });
                self.active += 1;
                Step::Opened
            }
            None => Step::Overflow,
        }
    }
}

/// What the scan did with one move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Opened,
    Transition,
    Reflexion,
    Barrier,
    Overflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoRepetition {
    IrreversibleBarrier,
    ListExhausted,
    ChainOverflow,
    /// Chains closed only after an odd number of plies.
    ParityOnly,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RepetitionVerdict {
    /// The position `scanned_plies` plies back has the same matrix.
    Repetition { scanned_plies: usize },
    NoRepetition(NoRepetition),
}

impl RepetitionVerdict {
    pub fn is_repetition(&self) -> bool {
        matches!(self, RepetitionVerdict::Repetition { .. })
    }

    pub fn plies(&self) -> Option<usize> {
        match self {
            RepetitionVerdict::Repetition { scanned_plies } => Some(*scanned_plies),
            RepetitionVerdict::NoRepetition(_) => None,
        }
    }
}

impl fmt::Display for RepetitionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepetitionVerdict::Repetition { scanned_plies } => {
                write!(f, "repetition({scanned_plies})")
            }
            RepetitionVerdict::NoRepetition(reason) => write!(f, "no-repetition({reason:?})"),
        }
    }
}

/// One scanned move, as reported to a trace observer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    /// Position of the move in the list.
    pub index: usize,
    pub mv: CodedMove,
    pub step: Step,
    /// Moves processed so far, this one included.
    pub scanned: usize,
    pub open: Vec<Chain>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Parity {
    Guarded,
    Raw,
}

#[inline]
fn scan<F: FnMut(&ChainList, usize, CodedMove, Step, usize)>(
    moves: &[CodedMove],
    chains: &mut ChainList,
    parity: Parity,
    mut observe: F,
) -> RepetitionVerdict {
    chains.clear();
    let mut odd_closure = false;
    let mut scanned = 0;
    for (index, &mv) in moves.iter().enumerate().rev() {
        if mv.is_irreversible() {
            observe(chains, index, mv, Step::Barrier, scanned);
            return RepetitionVerdict::NoRepetition(if odd_closure {
                NoRepetition::ParityOnly
            } else {
                NoRepetition::IrreversibleBarrier
            });
        }
        let step = chains.absorb(mv.from(), mv.to());
        scanned += 1;
        observe(chains, index, mv, step, scanned);
        match step {
            Step::Overflow => return RepetitionVerdict::NoRepetition(NoRepetition::ChainOverflow),
            Step::Reflexion if chains.active == 0 => {
                if parity == Parity::Raw || scanned % 2 == 0 {
                    return RepetitionVerdict::Repetition {
                        scanned_plies: scanned,
                    };
                }
                odd_closure = true;
            }
            _ => {}
        }
    }
    RepetitionVerdict::NoRepetition(if odd_closure {
        NoRepetition::ParityOnly
    } else {
        NoRepetition::ListExhausted
    })
}

/// Reusable detector that owns its scratch chain list.
#[derive(Clone, Debug)]
pub struct ChainDetector {
    chains: ChainList,
}

impl ChainDetector {
    pub fn new(capacity: usize) -> Self {
        ChainDetector {
            chains: ChainList::new(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.chains.capacity()
    }

    /// Parity-guarded detection: a closure counts only after an even number of plies.
    pub fn detect(&mut self, moves: &[CodedMove]) -> RepetitionVerdict {
        scan(moves, &mut self.chains, Parity::Guarded, |_, _, _, _, _| {})
    }

    /// Unguarded variant: any closure is a repetition, whatever the parity.
    pub fn detect_raw(&mut self, moves: &[CodedMove]) -> RepetitionVerdict {
        scan(moves, &mut self.chains, Parity::Raw, |_, _, _, _, _| {})
    }

    /// Guarded detection that also returns every step of the scan.
    pub fn detect_traced(&mut self, moves: &[CodedMove], raw: bool) -> (RepetitionVerdict, Vec<TraceStep>) {
        let mut trace = Vec::new();
        let parity = if raw { Parity::Raw } else { Parity::Guarded };
        let verdict = scan(moves, &mut self.chains, parity, |chains, index, mv, step, scanned| {
            trace.push(TraceStep {
                index,
                mv,
                step,
                scanned,
                open: chains.open_chains().collect(),
            })
        });
        (verdict, trace)
    }
}

impl Default for ChainDetector {
    fn default() -> Self {
        Self::new(DEFAULT_CHAIN_CAPACITY)
    }
}

pub fn detect_repetition(list: &MoveList) -> RepetitionVerdict {
    ChainDetector::default().detect(list.as_slice())
}

pub fn detect_repetition_raw(list: &MoveList) -> RepetitionVerdict {
    ChainDetector::default().detect_raw(list.as_slice())
}

/// One coded move per line, `*` marking the irreversible flag.
pub fn debug_dump(moves: &[CodedMove]) -> String {
    let mut out = String::with_capacity(moves.len() * 6);
    for m in moves {
        out.push_str(&format!("{m:?}\n"));
    }
    out
}

/// Inverse of [`debug_dump`]; blank lines and `#` comments are skipped.
pub fn parse_dump(text: &str) -> Result<Vec<CodedMove>, CodingError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}
