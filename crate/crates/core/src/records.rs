//! One-JSON-object-per-line record streams for witnesses, leftovers and
//! unresolved integers. All fields are integers or fixed strings.

use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genchecks::{LeftoverRecord, Witness, WitnessKind};

#[derive(Debug, Error)]
#[error("line {line}: {message}")]
pub struct RecordError {
    /// 1-based line number.
    pub line: usize,
    pub message: String,
}

/// Serialized form of a [`Witness`]: phase-2 fields present only for phase 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessRecord {
    pub n: u64,
    pub kind: String,
    pub r: u64,
    pub p: u64,
    pub a: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_rank: Option<u32>,
}

impl From<&Witness> for WitnessRecord {
    fn from(w: &Witness) -> Self {
        let (c, k, p_rank) = match w.kind {
            WitnessKind::Phase2 { c, k, p_rank } => (Some(c), Some(k), Some(p_rank)),
            _ => (None, None, None),
        };
        WitnessRecord { n: w.n, kind: w.kind.name().to_owned(), r: w.r, p: w.p, a: w.a, c, k, p_rank }
    }
}

impl TryFrom<WitnessRecord> for Witness {
    type Error = String;

    fn try_from(rec: WitnessRecord) -> Result<Self, String> {
        let extra = rec.c.is_some() || rec.k.is_some() || rec.p_rank.is_some();
        let kind = match rec.kind.as_str() {
            "small-case" => WitnessKind::SmallCase,
            "prime-power" => WitnessKind::PrimePower,
            "phase1" => WitnessKind::Phase1,
            "phase2" => match (rec.c, rec.k, rec.p_rank) {
                (Some(c), Some(k), Some(p_rank)) => WitnessKind::Phase2 { c, k, p_rank },
                _ => return Err("phase2 record needs c, k and p_rank".into()),
            },
            other => return Err(format!("unknown kind {other:?}")),
        };
        if extra && !matches!(kind, WitnessKind::Phase2 { .. }) {
            return Err(format!("{} record carries phase2 fields", rec.kind));
        }
        Ok(Witness { n: rec.n, kind, r: rec.r, p: rec.p, a: rec.a })
    }
}

/// An integer no certificate was found for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnresolvedRecord {
    pub n: u64,
}

fn to_line<T: Serialize>(value: &T) -> String {
    let mut line = serde_json::to_string(value).expect("records serialize infallibly");
    line.push('\n');
    line
}

pub fn witness_line(w: &Witness) -> String {
    to_line(&WitnessRecord::from(w))
}

pub fn leftover_line(rec: &LeftoverRecord) -> String {
    to_line(rec)
}

pub fn unresolved_line(n: u64) -> String {
    to_line(&UnresolvedRecord { n })
}

pub fn parse_witness(line: &str) -> Result<Witness, String> {
    let rec: WitnessRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    Witness::try_from(rec)
}

pub fn parse_leftover(line: &str) -> Result<LeftoverRecord, String> {
    serde_json::from_str(line).map_err(|e| e.to_string())
}

pub fn parse_unresolved(line: &str) -> Result<UnresolvedRecord, String> {
    serde_json::from_str(line).map_err(|e| e.to_string())
}

/// The `n` field of any record line, without validating the rest.
pub fn record_n(line: &str) -> Option<u64> {
    #[derive(Deserialize)]
    struct OnlyN {
        n: u64,
    }
    serde_json::from_str::<OnlyN>(line).ok().map(|r| r.n)
}

/// Parses each non-blank line with `parse`, tagging failures with their line number.
pub fn read_records<R, T, F>(reader: R, parse: F) -> impl Iterator<Item = Result<(usize, T), RecordError>>
where
    R: BufRead,
    F: Fn(&str) -> Result<T, String>,
{
    reader.lines().enumerate().filter_map(move |(idx, line)| {
        let line_no = idx + 1;
        match line {
            Err(e) => Some(Err(RecordError { line: line_no, message: e.to_string() })),
            Ok(text) if text.trim().is_empty() => None,
            Ok(text) => Some(
                parse(&text)
                    .map(|v| (line_no, v))
                    .map_err(|message| RecordError { line: line_no, message }),
            ),
        }
    })
}
