//! Morphologically informed subword tokenization.
//!
//! The pipeline, bottom to top:
//!
//! - [`corpus`]: splits text into chunks (leading whitespace + word body +
//!   trailing specials), counts chunk frequencies, and parses annotated
//!   morpheme datasets.
//! - [`morfessor`]: a minimum-description-length segmentation model with
//!   unsupervised and semi-supervised training plus Viterbi decoding.
//! - [`bpe`]: a byte-pair-encoding trainer/encoder with byte fallback, used
//!   standalone or as the mixed tokenizer's last resort.
//! - [`morphtable`]: pre-segmented table of the most frequent chunks.
//! - [`tokenizer`]: the cascade tokenizer (morphtable, then Viterbi, then
//!   BPE or character fallback) with id vocabulary and lossless decode.
//! - [`eval`]: segmentation precision/recall/F1/accuracy, bits-per-character
//!   and bits-per-token with an add-k n-gram stand-in model, and the
//!   annotation-ratio sweep harness.
//!
//! The crate is `no_std` (with `alloc`); file IO, the CLI, and on-disk
//! layout live in the companion `morphtok` crate. Everything here is
//! deterministic: equal inputs and seeds give identical outputs, including
//! serialized byte streams.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bpe;
pub mod corpus;
mod escape;
pub mod eval;
pub mod morfessor;
pub mod morphtable;
mod symbol;
pub mod tokenizer;

pub use escape::{escape_field, unescape_field, UnescapeError};
pub use symbol::{byte_surface, decode_surfaces, parse_byte_surface, SurfaceDecoder, MARKER};
