//! Field escaping for the line-oriented file formats.
//!
//! Chunk raws and segments may legally contain tabs, newlines, or
//! backslashes (whitespace runs attach to chunks), so every free-text field
//! in a line format is escaped on write and unescaped on read. The escape
//! set is minimal: `\t`, `\n`, `\r`, `\\`.

use alloc::string::String;
use core::fmt;

/// Escapes a field for embedding in a TAB- or space-delimited line.
pub fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out
}

/// Inverse of [`escape_field`].
pub fn unescape_field(s: &str) -> Result<String, UnescapeError> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => return Err(UnescapeError::UnknownEscape(other)),
            None => return Err(UnescapeError::TruncatedEscape),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnescapeError {
    UnknownEscape(char),
    TruncatedEscape,
}

impl fmt::Display for UnescapeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnescapeError::UnknownEscape(c) => write!(f, "unknown escape sequence \\{c}"),
            UnescapeError::TruncatedEscape => write!(f, "backslash at end of field"),
        }
    }
}

impl core::error::Error for UnescapeError {}

/// Formats an f64 with the shortest representation that parses back to the
/// same bits. Used by every format that persists reals.
pub fn fmt_f64(x: f64) -> String {
    use alloc::format;
    if x == f64::INFINITY {
        return String::from("inf");
    }
    if x == f64::NEG_INFINITY {
        return String::from("-inf");
    }
    format!("{x}")
}

/// Inverse of [`fmt_f64`]; also accepts anything `str::parse::<f64>` does.
pub fn parse_f64(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}
