//! Text encodings shared by the CLI: comma-separated residue vectors and
//! semicolon-separated element lists.

use thiserror::Error;

use crate::field::{FpScalar, Prime};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("invalid integer `{0}`")]
    BadInteger(String),
    #[error("expected {expected} comma-separated residues, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("empty input")]
    Empty,
}

pub fn encode_residues(v: &[FpScalar]) -> String {
    v.iter()
        .map(|c| c.value().to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses exactly `expected` comma-separated integers, reducing each mod p.
pub fn parse_residues(p: Prime, s: &str, expected: usize) -> Result<Vec<FpScalar>, ParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseError::Empty);
    }
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != expected {
        return Err(ParseError::WrongLength {
            expected,
            got: parts.len(),
        });
    }
    parts
        .iter()
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map(|n| p.scalar_i64(n))
                .map_err(|_| ParseError::BadInteger(t.trim().to_string()))
        })
        .collect()
}
