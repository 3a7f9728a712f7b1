//! EPD input and per-depth benchmark reports comparing detector modes.

use std::fmt::Write as _;
use std::time::Duration;

use thiserror::Error;

use crate::movecode::code_from_genmove;
use crate::position::{parse_fen_fields, FenError, Position};
use crate::search::{search, DetectorMode, SearchConfig, SearchError, SearchStats};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpdRecord {
    pub id: String,
    pub position: Position,
    pub best_moves: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {error}")]
pub struct EpdError {
    pub line: usize,
    pub error: FenError,
}

/// Parses one EPD line. Six-field FEN lines are accepted too.
pub fn parse_epd_line(line: &str) -> Result<EpdRecord, FenError> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() < 4 {
        return Err(FenError::FieldCount(fields.len()));
    }
    let numeric = |s: &&str| s.chars().all(|c| c.is_ascii_digit());
    let is_fen = fields.len() == 6 && numeric(&fields[4]) && numeric(&fields[5]);
    let position = if is_fen {
        parse_fen_fields(&fields)?
    } else {
        parse_fen_fields(&fields[..4])?
    };

    let mut record = EpdRecord {
        id: String::new(),
        position,
        best_moves: Vec::new(),
    };
    if !is_fen {
        // skip the four position fields in the raw text, then split opcodes on ';'
        let mut rest = line.trim_start();
        for _ in 0..4 {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            rest = rest[end..].trim_start();
        }
        for op in rest.split(';') {
            let op = op.trim();
            let (name, operand) = op.split_once(char::is_whitespace).unwrap_or((op, ""));
            match name {
                "id" => record.id = operand.trim().trim_matches('"').to_string(),
                "bm" => record.best_moves = operand.split_whitespace().map(String::from).collect(),
                _ => {}
            }
        }
    }
    Ok(record)
}

/// Parses a whole EPD file; blank lines and `#` comments are skipped. Bad
/// lines are reported with their 1-based number and do not stop the parse.
pub fn parse_epd(text: &str) -> (Vec<EpdRecord>, Vec<EpdError>) {
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match parse_epd_line(trimmed) {
            Ok(mut r) => {
                if r.id.is_empty() {
                    r.id = format!("line{}", i + 1);
                }
                records.push(r);
            }
            Err(error) => errors.push(EpdError { line: i + 1, error }),
        }
    }
    (records, errors)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchRow {
    pub position: String,
    pub mode: DetectorMode,
    pub depth: u32,
    /// Best move in positional notation, e.g. `C1H6`.
    pub key_move: String,
    pub score: i32,
    pub terminal_nodes: u64,
    pub generated_positions: u64,
    pub repetition_hits: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Totals {
    pub mode: DetectorMode,
    pub terminal_nodes: u64,
    pub generated_positions: u64,
    pub repetition_hits: u64,
    pub elapsed: Duration,
}

impl Totals {
    fn from_stats(mode: DetectorMode, s: &SearchStats) -> Self {
        Totals {
            mode,
            terminal_nodes: s.terminal_nodes,
            generated_positions: s.generated_positions,
            repetition_hits: s.repetition_hits,
            elapsed: s.elapsed,
        }
    }

    fn add(&mut self, s: &SearchStats) {
        self.terminal_nodes += s.terminal_nodes;
        self.generated_positions += s.generated_positions;
        self.repetition_hits += s.repetition_hits;
        self.elapsed += s.elapsed;
    }
}

/// Mode relative to the baseline (first listed) mode.
#[derive(Clone, Debug, PartialEq)]
pub struct Ratio {
    pub mode: DetectorMode,
    pub baseline: DetectorMode,
    pub terminal_nodes: f64,
    pub generated_positions: f64,
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PositionTotals {
    pub position: String,
    pub totals: Vec<Totals>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub per_position: Vec<PositionTotals>,
    pub totals: Vec<Totals>,
    pub ratios: Vec<Ratio>,
    /// Positions that could not be searched (no legal moves and similar).
    pub skipped: Vec<(String, String)>,
}

impl BenchReport {
    pub fn totals_for(&self, mode: DetectorMode) -> Option<&Totals> {
        self.totals.iter().find(|t| t.mode == mode)
    }

    pub fn position_totals(&self, position: &str, mode: DetectorMode) -> Option<&Totals> {
        self.per_position
            .iter()
            .find(|p| p.position == position)?
            .totals
            .iter()
            .find(|t| t.mode == mode)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("no detector modes given")]
    NoModes,
    #[error(transparent)]
    Search(#[from] SearchError),
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        f64::NAN
    } else {
        a / b
    }
}

/// One iterative-deepening search per (position, mode), sequentially so the
/// wall-clock column is not disturbed by other runs.
pub fn run_bench(
    positions: &[EpdRecord],
    cfg: SearchConfig,
    modes: &[DetectorMode],
) -> Result<BenchReport, BenchError> {
    if modes.is_empty() {
        return Err(BenchError::NoModes);
    }
    let mut report = BenchReport {
        rows: Vec::new(),
        per_position: Vec::new(),
        totals: modes
            .iter()
            .map(|&m| Totals::from_stats(m, &SearchStats::default()))
            .collect(),
        ratios: Vec::new(),
        skipped: Vec::new(),
    };

    for rec in positions {
        let mut per = PositionTotals {
            position: rec.id.clone(),
            totals: Vec::new(),
        };
        for (mi, &mode) in modes.iter().enumerate() {
            let run_cfg = SearchConfig { detector: mode, ..cfg };
            let result = match search(&rec.position, run_cfg, &[]) {
                Ok(r) => r,
                Err(SearchError::NoLegalMoves(t)) => {
                    if mi == 0 {
                        report.skipped.push((rec.id.clone(), format!("{t:?}")));
                    }
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            for it in &result.iterations {
                report.rows.push(BenchRow {
                    position: rec.id.clone(),
                    mode,
                    depth: it.depth,
                    key_move: code_from_genmove(&it.best_move).to_string(),
                    score: it.score,
                    terminal_nodes: it.stats.terminal_nodes,
                    generated_positions: it.stats.generated_positions,
                    repetition_hits: it.stats.repetition_hits,
                    elapsed: it.stats.elapsed,
                });
            }
            report.totals[mi].add(&result.stats);
            per.totals.push(Totals::from_stats(mode, &result.stats));
        }
        if !per.totals.is_empty() {
            report.per_position.push(per);
        }
    }

    let base = report.totals[0].clone();
    for t in report.totals.iter().skip(1) {
        report.ratios.push(Ratio {
            mode: t.mode,
            baseline: base.mode,
            terminal_nodes: ratio(t.terminal_nodes as f64, base.terminal_nodes as f64),
            generated_positions: ratio(t.generated_positions as f64, base.generated_positions as f64),
            time: ratio(t.elapsed.as_secs_f64(), base.elapsed.as_secs_f64()),
        });
    }
    Ok(report)
}

pub const TSV_HEADER: &str = "position\tmode\tdepth\tkey_move\tscore\tterminal_nodes\tgenerated_positions\trepetition_hits\telapsed_us";

/// Tab-separated report. With `with_time = false` the time column is
/// written as `-` so that repeated runs are byte-identical.
pub fn to_tsv(report: &BenchReport, with_time: bool) -> String {
    let time = |d: Duration| {
        if with_time {
            d.as_micros().to_string()
        } else {
            "-".to_string()
        }
    };
    let ratio_fmt = |x: f64| {
        if x.is_nan() {
            "-".to_string()
        } else {
            format!("{x:.4}")
        }
    };
    let mut out = String::new();
    out.push_str(TSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.position,
            r.mode,
            r.depth,
            r.key_move,
            r.score,
            r.terminal_nodes,
            r.generated_positions,
            r.repetition_hits,
            time(r.elapsed)
        );
    }
    for t in &report.totals {
        let _ = writeln!(
            out,
            "total\t{}\t-\t-\t-\t{}\t{}\t{}\t{}",
            t.mode,
            t.terminal_nodes,
            t.generated_positions,
            t.repetition_hits,
            time(t.elapsed)
        );
    }
    for r in &report.ratios {
        let _ = writeln!(
            out,
            "ratio\t{}/{}\t-\t-\t-\t{}\t{}\t-\t{}",
            r.mode,
            r.baseline,
            ratio_fmt(r.terminal_nodes),
            ratio_fmt(r.generated_positions),
            if with_time { ratio_fmt(r.time) } else { "-".to_string() }
        );
    }
    out
}

fn format_score(cp: i32) -> String {
    if crate::search::is_mate_score(cp) {
        let plies = crate::search::MATE - cp.abs();
        let sign = if cp > 0 { "+" } else { "-" };
        format!("{sign}M{}", (plies + 1) / 2)
    } else {
        format!("{:+.2}", cp as f64 / 100.0)
    }
}

/// Human-readable report: one table per position and mode, then totals.
pub fn to_text(report: &BenchReport, with_time: bool) -> String {
    let mut out = String::new();
    let mut last: Option<(&str, DetectorMode)> = None;
    for r in &report.rows {
        if last != Some((r.position.as_str(), r.mode)) {
            let _ = writeln!(out, "\n{} [{}]", r.position, r.mode);
            let _ = writeln!(
                out,
                "{:>5}  {:<8} {:>10} {:>12} {:>12} {:>10}{}",
                "Depth",
                "Key move",
                "Evaluation",
                "Node count",
                "Generated",
                "Rep. hits",
                if with_time { "   Time (ms)" } else { "" }
            );
            last = Some((r.position.as_str(), r.mode));
        }
        let _ = write!(
            out,
            "{:>5}  {:<8} {:>10} {:>12} {:>12} {:>10}",
            r.depth,
            r.key_move,
            format_score(r.score),
            r.terminal_nodes,
            r.generated_positions,
            r.repetition_hits
        );
        if with_time {
            let _ = write!(out, " {:>11.3}", r.elapsed.as_secs_f64() * 1e3);
        }
        out.push('\n');
    }
    for (id, why) in &report.skipped {
        let _ = writeln!(out, "\n{id}: skipped ({why})");
    }
    out.push('\n');
    for t in &report.totals {
        let _ = writeln!(
            out,
            "[{}] The total count was: {} terminal nodes evaluated and {} positions generated. {} cases of position repetitions were noted.",
            t.mode, t.terminal_nodes, t.generated_positions, t.repetition_hits
        );
    }
    for r in &report.ratios {
        let _ = write!(
            out,
            "[{}/{}] terminal nodes {:.4}, positions generated {:.4}",
            r.mode, r.baseline, r.terminal_nodes, r.generated_positions
        );
        if with_time {
            let _ = write!(out, ", time {:.4}", r.time);
        }
        out.push('\n');
    }
    out
}
