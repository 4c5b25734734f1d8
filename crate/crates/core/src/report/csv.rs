//! RFC-4180 CSV emission for leaderboard submissions.
//!
//! The writer is ~30 lines and hand-rolled on purpose: rows embed whole
//! multi-line POSCAR documents, and the exact quoting bytes are part of
//! the artifact contract (the test suite round-trips the output through
//! an independent CSV parser).

use crate::error::Result;
use crate::pairing::{EvalPair, PairStatus};
use crate::poscar::write_poscar;

/// Quote a field per RFC 4180: wrap in double quotes when it contains a
/// comma, quote, CR, or LF; double any embedded quotes.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\r', '\n']) {
        let mut out = String::with_capacity(s.len() + 2);
        out.push('"');
        for ch in s.chars() {
            if ch == '"' {
                out.push('"');
            }
            out.push(ch);
        }
        out.push('"');
        out
    } else {
        s.to_string()
    }
}

/// One CRLF-terminated record.
pub fn csv_row(fields: &[&str]) -> String {
    let mut out = fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",");
    out.push_str("\r\n");
    out
}

/// The leaderboard submission table: `id,target,prediction`, where the
/// payload columns are POSCAR texts of the (reduced) truth and predicted
/// structures. One row per test id whose pair reached `ok` or
/// `species_mismatch`; pairs without a usable prediction are omitted
/// (their absence is itself the signal — the report JSON carries the
/// counts).
pub fn emit_leaderboard_csv(pairs: &[EvalPair], test_ids: &[String]) -> Result<String> {
    let mut out = String::from("id,target,prediction\r\n");
    for id in test_ids {
        let Some(pair) = pairs.iter().find(|p| &p.id == id) else {
            continue;
        };
        if !matches!(pair.status, PairStatus::Ok | PairStatus::SpeciesMismatch) {
            continue;
        }
        let Some(pred) = &pair.pred else { continue };
        let target = write_poscar(&pair.truth);
        let prediction = write_poscar(pred);
        out.push_str(&csv_row(&[id, &target, &prediction]));
    }
    Ok(out)
}
