//! Draw-by-repetition detection for chess search.
//!
//! Two detectors answer the same question ("has the current position, with
//! the same side to move, occurred since the last irreversible move?"):
//!
//! * [`chainrep`] scans the 16-bit coded move list backward and closes
//!   per-piece chains; it never looks at a board.
//! * [`matrix`] keeps a stack of 64-cell matrices and compares them,
//!   checksums first.
//!
//! [`search`] hosts either one inside a plain alpha-beta searcher; [`bench`],
//! [`replay`] and [`fuzz`] drive the comparisons.

pub mod bench;
pub mod chainrep;
pub mod fuzz;
pub mod matrix;
pub mod movecode;
pub mod movegen;
pub mod position;
pub mod replay;
pub mod san;
pub mod search;
pub mod types;

pub use chainrep::{
    detect_repetition, detect_repetition_raw, ChainDetector, MoveList, NoRepetition,
    RepetitionVerdict,
};
pub use matrix::PositionStack;
pub use movecode::{code_from_genmove, decode_move, encode_move, CodedMove};
pub use movegen::{apply_move, generate_legal_moves, perft, GenMove, MoveKind};
pub use position::{checksum16, emit_fen, parse_fen, Matrix64, Position};
pub use search::{search, DetectorMode, EvalMode, SearchConfig, SearchResult, SearchStats};
pub use types::{Color, PieceCode, PieceKind, Square};
