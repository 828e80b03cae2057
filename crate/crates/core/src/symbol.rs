//! Token-surface conventions shared by the bpe, morphtable, and tokenizer
//! modules: the whitespace marker and the 256 byte-fallback surfaces.
//!
//! Every token is either a byte token (one raw byte; runs of them are
//! reassembled into UTF-8 at decode time) or a text token, in which every
//! [`MARKER`] code point stands for one U+0020 space. Which of the two a
//! token is, is a property of its vocabulary entry, not of its spelling:
//! models decode by token kind via [`SurfaceDecoder::push_byte`] and
//! [`SurfaceDecoder::push_text`], so ordinary text that happens to spell
//! `<0xNN>` stays unambiguous.
//!
//! To keep the marker rule bijective, a literal U+2581 in input text is
//! always byte-fallback-encoded, so the marker never occurs "as itself"
//! inside a text surface.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

/// Whitespace marker: stands for one U+0020 space in any surface.
pub const MARKER: char = '\u{2581}';

/// Renders the byte-fallback surface for one byte, `<0xNN>`.
pub fn byte_surface(b: u8) -> String {
    let mut s = String::with_capacity(6);
    let _ = write!(s, "<0x{b:02X}>");
    s
}

/// Parses a byte-fallback surface. Only exact matches count: `<0x41>` is a
/// byte, `a<0x41>` is ordinary text.
pub fn parse_byte_surface(s: &str) -> Option<u8> {
    let rest = s.strip_prefix("<0x")?.strip_suffix('>')?;
    if rest.len() != 2 || !rest.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_lowercase())
    {
        return None;
    }
    u8::from_str_radix(rest, 16).ok()
}

/// True for code points that are neither alphanumeric nor whitespace; such
/// characters stay attached after the word body as "specials".
pub fn is_special_char(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// One code point of a marked chunk: either a text character (space already
/// rewritten to [`MARKER`]) or one byte of a fallback expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkedCp {
    Text(char),
    Byte(u8),
}

/// Rewrites a chunk raw into marked code points: U+0020 becomes [`MARKER`],
/// a literal U+2581 becomes its three UTF-8 fallback bytes, everything else
/// passes through.
pub fn mark_raw(raw: &str) -> Vec<MarkedCp> {
    let mut out = Vec::with_capacity(raw.chars().count());
    for c in raw.chars() {
        match c {
            ' ' => out.push(MarkedCp::Text(MARKER)),
            MARKER => {
                let mut buf = [0u8; 4];
                for b in c.encode_utf8(&mut buf).bytes() {
                    out.push(MarkedCp::Byte(b));
                }
            }
            _ => out.push(MarkedCp::Text(c)),
        }
    }
    out
}

/// Streaming decoder from token surfaces back to text.
///
/// Byte surfaces accumulate until a text surface (or the end) flushes them;
/// invalid UTF-8 in an adversarial id sequence degrades to U+FFFD rather
/// than failing, since encode never produces such sequences.
#[derive(Debug, Default)]
pub struct SurfaceDecoder {
    out: String,
    pending: Vec<u8>,
}

impl SurfaceDecoder {
    pub fn new() -> Self {
        Self::default()
    }

    /// One byte token.
    pub fn push_byte(&mut self, b: u8) {
        self.pending.push(b);
    }

    /// One text token; markers become spaces.
    pub fn push_text(&mut self, surface: &str) {
        self.flush_bytes();
        for c in surface.chars() {
            self.out.push(if c == MARKER { ' ' } else { c });
        }
    }

    /// Kind-less convenience: sniffs byte tokens by their spelling. Only
    /// for streams whose producer guarantees no text surface spells a byte
    /// fallback; model decoding goes through the kind-aware methods.
    pub fn push_surface(&mut self, surface: &str) {
        match parse_byte_surface(surface) {
            Some(b) => self.push_byte(b),
            None => self.push_text(surface),
        }
    }

    fn flush_bytes(&mut self) {
        if self.pending.is_empty() {
            return;
        }
        let bytes = core::mem::take(&mut self.pending);
        match core::str::from_utf8(&bytes) {
            Ok(s) => self.out.push_str(s),
            Err(_) => {
                // Lossy recovery, reachable only on hand-crafted id input.
                self.out
                    .push_str(&String::from_utf8_lossy(&bytes));
            }
        }
    }

    pub fn finish(mut self) -> String {
        self.flush_bytes();
        self.out
    }
}

/// Decodes a surface sequence in one call.
pub fn decode_surfaces<'a, I: IntoIterator<Item = &'a str>>(surfaces: I) -> String {
    let mut d = SurfaceDecoder::new();
    for s in surfaces {
        d.push_surface(s);
    }
    d.finish()
}
