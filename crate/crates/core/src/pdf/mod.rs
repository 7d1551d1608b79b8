//! Deterministic extraction of body text from a documented PDF subset.
//!
//! Supported: classic cross-reference tables, uncompressed or FlateDecode
//! streams, page trees, and `Tj`/`TJ` text-showing operators with string
//! bytes interpreted as WinAnsi/Latin-1. Everything outside that subset —
//! encryption, cross-reference streams, other filters, other text-showing
//! operators, image-only documents — raises [`PdfError::Unsupported`]
//! instead of producing garbled text.
//!
//! [`writer`] is a tiny PDF writer that emits subset-conformant files, so
//! extraction fixtures are generated rather than checked in as blobs.

mod content;
mod object;
mod parser;
pub mod writer;

pub use object::{decode_text_string, Dict, ObjId, Object};
pub use parser::PdfFile;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PdfError {
    /// Structural parse failure: the bytes are not a well-formed PDF of
    /// any kind we recognize.
    #[error("malformed PDF: {0}")]
    Malformed(String),
    /// Well-formed but outside the supported subset.
    #[error("unsupported PDF feature: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Document information entries, when the file carries an Info dictionary.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PdfInfo {
    pub title: Option<String>,
    pub author: Option<String>,
    /// Raw date string as stored in the file (e.g. `D:20240810120000Z`).
    pub creation_date: Option<String>,
}
