//! Loading source files, extracting per-page text and metadata, and
//! normalizing text for chunking.
//!
//! Admitted inputs are `.txt` (UTF-8) and `.pdf` (the documented subset —
//! see [`crate::pdf`]). Every failure path maps to a typed
//! [`IngestError`]; no admitted input crashes the pipeline.

mod clean;

pub use clean::{clean_pages, clean_text, CleanConfig};

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::pdf::{PdfError, PdfFile};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("file not found: {0}")]
    NotFound(PathBuf),
    #[error("unsupported file kind: {0} (only .txt and .pdf are admitted)")]
    UnsupportedKind(PathBuf),
    #[error("plain text file is not valid UTF-8: {0}")]
    EncodingError(PathBuf),
    #[error("unsupported PDF feature: {0}")]
    UnsupportedPdfFeature(String),
    #[error("malformed PDF: {0}")]
    MalformedPdf(String),
    #[error("Directory '{0}' is empty. No admitted files (.txt, .pdf) to ingest.")]
    EmptyDirectory(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<PdfError> for IngestError {
    fn from(err: PdfError) -> Self {
        match err {
            PdfError::Unsupported(msg) => IngestError::UnsupportedPdfFeature(msg),
            PdfError::Malformed(msg) => IngestError::MalformedPdf(msg),
            PdfError::Io(e) => IngestError::Io(e),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    PlainText,
    Pdf,
}

/// A source file read into memory, with its content digest.
#[derive(Debug, Clone)]
pub struct SourceDocument {
    pub path: PathBuf,
    pub kind: SourceKind,
    pub bytes: Vec<u8>,
    /// Lowercase hex SHA-256 of `bytes`; doubles as the document id, so
    /// byte-identical files get the same id regardless of path.
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentMetadata {
    /// File name without directory.
    pub source_file: String,
    pub title: Option<String>,
    pub author: Option<String>,
    /// Timestamp string exactly as stored in the source.
    pub created_at: Option<String>,
    pub page_count: usize,
    pub byte_size: usize,
}

/// A source reduced to per-page text plus normalized full text.
#[derive(Debug, Clone)]
pub struct ExtractedDocument {
    /// SHA-256 of the source bytes.
    pub doc_id: String,
    pub metadata: DocumentMetadata,
    pub pages: Vec<String>,
    pub cleaned_text: String,
}

/// A per-file failure recorded by [`ingest_directory`].
#[derive(Debug)]
pub struct IngestFailure {
    pub file_name: String,
    pub error: IngestError,
}

/// Result of ingesting a directory: extracted documents in lexicographic
/// file-name order plus every per-file failure.
#[derive(Debug)]
pub struct IngestReport {
    pub documents: Vec<ExtractedDocument>,
    pub failures: Vec<IngestFailure>,
}

fn kind_from_extension(path: &Path) -> Option<SourceKind> {
    let ext = path.extension()?.to_str()?.to_ascii_lowercase();
    match ext.as_str() {
        "txt" => Some(SourceKind::PlainText),
        "pdf" => Some(SourceKind::Pdf),
        _ => None,
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Read a source file; kind derives from the extension (case-insensitive).
pub fn load_source(path: &Path) -> Result<SourceDocument, IngestError> {
    if !path.is_file() {
        return Err(IngestError::NotFound(path.to_path_buf()));
    }
    let kind = kind_from_extension(path)
        .ok_or_else(|| IngestError::UnsupportedKind(path.to_path_buf()))?;
    let bytes = fs::read(path)?;
    let sha256 = sha256_hex(&bytes);
    Ok(SourceDocument {
        path: path.to_path_buf(),
        kind,
        bytes,
        sha256,
    })
}

fn file_name_of(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned())
}

/// Extract per-page text and metadata, and populate `cleaned_text` via
/// [`clean_pages`]. Plain text yields a single page equal to the decoded
/// bytes; PDFs go through the subset extractor.
pub fn extract_text(
    doc: &SourceDocument,
    cfg: &CleanConfig,
) -> Result<ExtractedDocument, IngestError> {
    let (pages, metadata) = match doc.kind {
        SourceKind::PlainText => {
            let text = String::from_utf8(doc.bytes.clone())
                .map_err(|_| IngestError::EncodingError(doc.path.clone()))?;
            (
                vec![text],
                DocumentMetadata {
                    source_file: file_name_of(&doc.path),
                    title: None,
                    author: None,
                    created_at: None,
                    page_count: 1,
                    byte_size: doc.bytes.len(),
                },
            )
        }
        SourceKind::Pdf => {
            let file = PdfFile::parse(&doc.bytes)?;
            let pages = file.extract_pages()?;
            let info = file.info();
            let page_count = pages.len();
            (
                pages,
                DocumentMetadata {
                    source_file: file_name_of(&doc.path),
                    title: info.title,
                    author: info.author,
                    created_at: info.creation_date,
                    page_count,
                    byte_size: doc.bytes.len(),
                },
            )
        }
    };
    let cleaned_text = clean_pages(&pages, cfg);
    Ok(ExtractedDocument {
        doc_id: doc.sha256.clone(),
        metadata,
        pages,
        cleaned_text,
    })
}

/// Metadata only, without text extraction. For PDFs the Info dictionary is
/// consulted when present; optional fields stay absent otherwise.
pub fn extract_metadata(doc: &SourceDocument) -> Result<DocumentMetadata, IngestError> {
    match doc.kind {
        SourceKind::PlainText => Ok(DocumentMetadata {
            source_file: file_name_of(&doc.path),
            title: None,
            author: None,
            created_at: None,
            page_count: 1,
            byte_size: doc.bytes.len(),
        }),
        SourceKind::Pdf => {
            let file = PdfFile::parse(&doc.bytes)?;
            let info = file.info();
            Ok(DocumentMetadata {
                source_file: file_name_of(&doc.path),
                title: info.title,
                author: info.author,
                created_at: info.creation_date,
                page_count: file.page_count(),
                byte_size: doc.bytes.len(),
            })
        }
    }
}

/// Ingest every admitted file under `dir` in lexicographic file-name
/// order. Per-file failures are collected in the report, never silently
/// dropped; a directory with no admitted files at all is an error, as is a
/// missing directory.
pub fn ingest_directory(dir: &Path, cfg: &CleanConfig) -> Result<IngestReport, IngestError> {
    if !dir.is_dir() {
        return Err(IngestError::NotFound(dir.to_path_buf()));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok())
        .map(|entry| entry.path())
        .filter(|path| path.is_file() && kind_from_extension(path).is_some())
        .collect();
    if paths.is_empty() {
        return Err(IngestError::EmptyDirectory(dir.to_path_buf()));
    }
    paths.sort_by_key(|p| file_name_of(p));

    let mut documents = Vec::new();
    let mut failures = Vec::new();
    for path in paths {
        let result = load_source(&path).and_then(|doc| extract_text(&doc, cfg));
        match result {
            Ok(doc) => documents.push(doc),
            Err(error) => failures.push(IngestFailure {
                file_name: file_name_of(&path),
                error,
            }),
        }
    }
    Ok(IngestReport {
        documents,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pdf::writer::PdfBuilder;
    use tempfile::TempDir;

    #[test]
    fn load_plain_text_digest() {
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("a.txt");
        fs::write(&path, "hi").unwrap();
        let doc = load_source(&path).unwrap();
        assert_eq!(doc.kind, SourceKind::PlainText);
        // sha256("hi")
        assert_eq!(
            doc.sha256,
            "8f434346648f6b96df89dda901c5176b10a6d83961dd3c1ac88b59b2dc327aa4"
        );
    }

    #[test]
    fn unsupported_extension_rejected() {
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("a.csv");
        fs::write(&path, "x,y").unwrap();
        assert!(matches!(
            load_source(&path),
            Err(IngestError::UnsupportedKind(_))
        ));
    }

    #[test]
    fn extension_matching_is_case_insensitive() {
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("a.TXT");
        fs::write(&path, "x").unwrap();
        assert_eq!(load_source(&path).unwrap().kind, SourceKind::PlainText);
    }

    #[test]
    fn missing_file_not_found() {
        assert!(matches!(
            load_source(Path::new("/nonexistent/a.txt")),
            Err(IngestError::NotFound(_))
        ));
    }

    #[test]
    fn pdf_bytes_length_matches_stat_size() {
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("mini.pdf");
        PdfBuilder::new().page(&["mini"]).write_to(&path).unwrap();
        let doc = load_source(&path).unwrap();
        assert_eq!(doc.kind, SourceKind::Pdf);
        // Independent size check via the filesystem.
        let stat_len = fs::metadata(&path).unwrap().len() as usize;
        assert_eq!(doc.bytes.len(), stat_len);
    }

    #[test]
    fn plain_text_single_page_identity() {
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("a.txt");
        fs::write(&path, "hello world").unwrap();
        let doc = load_source(&path).unwrap();
        let extracted = extract_text(&doc, &CleanConfig::default()).unwrap();
        assert_eq!(extracted.pages, vec!["hello world"]);
        assert_eq!(extracted.metadata.page_count, 1);
        assert_eq!(extracted.cleaned_text, "hello world");
        assert_eq!(extracted.doc_id, doc.sha256);
    }

    #[test]
    fn invalid_utf8_plain_text_is_encoding_error() {
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("bad.txt");
        fs::write(&path, [0xff, 0xfe, 0x00]).unwrap();
        let doc = load_source(&path).unwrap();
        assert!(matches!(
            extract_text(&doc, &CleanConfig::default()),
            Err(IngestError::EncodingError(_))
        ));
    }

    #[test]
    fn two_page_pdf_extraction() {
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("two.pdf");
        PdfBuilder::new()
            .page(&["alpha"])
            .page(&["beta"])
            .write_to(&path)
            .unwrap();
        let doc = load_source(&path).unwrap();
        let extracted = extract_text(&doc, &CleanConfig::default()).unwrap();
        assert_eq!(extracted.pages, vec!["alpha", "beta"]);
        assert_eq!(extracted.metadata.page_count, 2);
        assert_eq!(extracted.pages.len(), extracted.metadata.page_count);
        assert_eq!(extracted.cleaned_text, "alpha beta");
    }

    #[test]
    fn image_only_pdf_is_unsupported() {
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("scan.pdf");
        PdfBuilder::new().image_only_page().write_to(&path).unwrap();
        let doc = load_source(&path).unwrap();
        assert!(matches!(
            extract_text(&doc, &CleanConfig::default()),
            Err(IngestError::UnsupportedPdfFeature(_))
        ));
    }

    #[test]
    fn pdf_metadata_from_info_dictionary() {
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("meta.pdf");
        PdfBuilder::new()
            .page(&["x"])
            .title("Spec")
            .write_to(&path)
            .unwrap();
        let doc = load_source(&path).unwrap();
        let meta = extract_metadata(&doc).unwrap();
        assert_eq!(meta.title.as_deref(), Some("Spec"));
        assert_eq!(meta.author, None);
        assert_eq!(meta.page_count, 1);
    }

    #[test]
    fn plain_text_metadata_rule() {
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("ten.txt");
        fs::write(&path, "0123456789").unwrap();
        let meta = extract_metadata(&load_source(&path).unwrap()).unwrap();
        assert_eq!(meta.page_count, 1);
        assert_eq!(meta.byte_size, 10);
        assert_eq!(meta.title, None);
        assert_eq!(meta.source_file, "ten.txt");
    }

    #[test]
    fn header_stripped_from_three_page_pdf() {
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("conf.pdf");
        PdfBuilder::new()
            .page(&["CONFIDENTIAL", "alpha body"])
            .page(&["CONFIDENTIAL", "beta body"])
            .page(&["CONFIDENTIAL", "gamma body"])
            .write_to(&path)
            .unwrap();
        let doc = load_source(&path).unwrap();
        let extracted = extract_text(&doc, &CleanConfig::default()).unwrap();
        assert!(!extracted.cleaned_text.contains("CONFIDENTIAL"));
        assert_eq!(extracted.cleaned_text, "alpha body beta body gamma body");
        // Pages keep the raw header; only cleaned_text drops it.
        assert!(extracted.pages[0].contains("CONFIDENTIAL"));
    }

    #[test]
    fn cleaning_is_idempotent_on_cleaned_text() {
        let tmp = TempDir::new().unwrap();
        let path = tmp.path().join("a.txt");
        fs::write(&path, "  spaced   out\ttext \n\n").unwrap();
        let doc = load_source(&path).unwrap();
        let cfg = CleanConfig::default();
        let extracted = extract_text(&doc, &cfg).unwrap();
        assert_eq!(
            clean_text(&extracted.cleaned_text, &cfg),
            extracted.cleaned_text
        );
    }

    #[test]
    fn directory_order_is_lexicographic() {
        let tmp = TempDir::new().unwrap();
        fs::write(tmp.path().join("b.txt"), "second").unwrap();
        fs::write(tmp.path().join("a.txt"), "first").unwrap();
        let report = ingest_directory(tmp.path(), &CleanConfig::default()).unwrap();
        let names: Vec<&str> = report
            .documents
            .iter()
            .map(|d| d.metadata.source_file.as_str())
            .collect();
        assert_eq!(names, vec!["a.txt", "b.txt"]);
        assert!(report.failures.is_empty());
    }

    #[test]
    fn directory_with_no_admitted_files_is_empty() {
        let tmp = TempDir::new().unwrap();
        fs::write(tmp.path().join("data.csv"), "x").unwrap();
        match ingest_directory(tmp.path(), &CleanConfig::default()) {
            Err(IngestError::EmptyDirectory(path)) => assert_eq!(path, tmp.path()),
            other => panic!("expected EmptyDirectory, got {other:?}"),
        }
    }

    #[test]
    fn missing_directory_is_not_found() {
        assert!(matches!(
            ingest_directory(Path::new("/nonexistent-dir"), &CleanConfig::default()),
            Err(IngestError::NotFound(_))
        ));
    }

    #[test]
    fn per_file_failures_are_recorded_not_fatal() {
        let tmp = TempDir::new().unwrap();
        fs::write(tmp.path().join("good.txt"), "fine").unwrap();
        fs::write(tmp.path().join("bad.pdf"), "not a pdf at all").unwrap();
        let report = ingest_directory(tmp.path(), &CleanConfig::default()).unwrap();
        assert_eq!(report.documents.len(), 1);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].file_name, "bad.pdf");
        assert!(matches!(
            report.failures[0].error,
            IngestError::MalformedPdf(_)
        ));
    }

    #[test]
    fn identical_bytes_same_doc_id_regardless_of_path() {
        let tmp = TempDir::new().unwrap();
        fs::write(tmp.path().join("x.txt"), "same bytes").unwrap();
        fs::write(tmp.path().join("y.txt"), "same bytes").unwrap();
        let a = load_source(&tmp.path().join("x.txt")).unwrap();
        let b = load_source(&tmp.path().join("y.txt")).unwrap();
        assert_eq!(a.sha256, b.sha256);
    }
}
