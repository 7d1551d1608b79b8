//! Text extraction from decoded content streams.
//!
//! Only `Tj` and `TJ` show text in the supported subset; the `'` and `"`
//! operators are rejected rather than skipped, since skipping them would
//! silently drop body text. Text-positioning operators (`Td`, `TD`, `T*`,
//! `Tm`) and `ET` insert line breaks so headers and footers land on their
//! own lines for the repeated-line cleaner.

use super::object::{winansi_char, Lexer, Object};
use super::PdfError;

#[derive(Debug)]
pub struct Extraction {
    pub text: String,
    /// Number of text-showing operators seen; zero across a whole document
    /// marks it image-only.
    pub text_op_count: usize,
}

pub fn extract_text(content: &[u8]) -> Result<Extraction, PdfError> {
    let mut lexer = Lexer::new(content);
    let mut operands: Vec<Object> = Vec::new();
    let mut text = String::new();
    let mut text_op_count = 0usize;

    loop {
        lexer.skip_ws();
        let Some(b) = lexer.peek() else { break };
        // Operands reuse the object lexer; operators are keyword runs.
        if matches!(
            b,
            b'/' | b'(' | b'<' | b'[' | b'+' | b'-' | b'.' | b'0'..=b'9'
        ) {
            let obj = lexer
                .parse_object()
                .map_err(|e| PdfError::Malformed(format!("content stream operand: {e}")))?;
            operands.push(obj);
            continue;
        }
        let op = lexer.read_keyword();
        if op.is_empty() {
            return Err(PdfError::Malformed(format!(
                "unexpected byte 0x{b:02x} in content stream"
            )));
        }
        match op.as_str() {
            "Tj" => {
                if let Some(Object::String(bytes)) = operands.last() {
                    push_string(&mut text, bytes);
                    text_op_count += 1;
                } else {
                    return Err(PdfError::Malformed("Tj without string operand".into()));
                }
            }
            "TJ" => {
                if let Some(Object::Array(items)) = operands.last() {
                    for item in items {
                        if let Object::String(bytes) = item {
                            push_string(&mut text, bytes);
                        }
                        // Numeric kerning adjustments are ignored.
                    }
                    text_op_count += 1;
                } else {
                    return Err(PdfError::Malformed("TJ without array operand".into()));
                }
            }
            "'" | "\"" => {
                return Err(PdfError::Unsupported(format!("text-showing operator {op}")));
            }
            "Td" | "TD" | "T*" | "Tm" | "ET" => line_break(&mut text),
            "true" | "false" | "null" => {
                // Keyword operands (rare, e.g. in gs dictionaries inline).
                operands.push(match op.as_str() {
                    "true" => Object::Boolean(true),
                    "false" => Object::Boolean(false),
                    _ => Object::Null,
                });
                continue;
            }
            // Everything else — graphics state, paths, colors, XObjects,
            // BT, fonts — does not contribute text.
            _ => {}
        }
        operands.clear();
    }

    Ok(Extraction {
        text: text.trim_end_matches('\n').to_string(),
        text_op_count,
    })
}

fn push_string(out: &mut String, bytes: &[u8]) {
    out.extend(bytes.iter().map(|&b| winansi_char(b)));
}

fn line_break(out: &mut String) {
    if !out.is_empty() && !out.ends_with('\n') {
        out.push('\n');
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tj_extracts_text() {
        let ext = extract_text(b"BT /F1 12 Tf 72 720 Td (hello) Tj ET").unwrap();
        assert_eq!(ext.text, "hello");
        assert_eq!(ext.text_op_count, 1);
    }

    #[test]
    fn td_breaks_lines() {
        let ext = extract_text(b"BT /F1 12 Tf 72 720 Td (one) Tj 0 -14 Td (two) Tj ET").unwrap();
        assert_eq!(ext.text, "one\ntwo");
    }

    #[test]
    fn tj_array_concatenates_strings() {
        let ext = extract_text(b"BT [(Hel) -20 (lo)] TJ ET").unwrap();
        assert_eq!(ext.text, "Hello");
        assert_eq!(ext.text_op_count, 1);
    }

    #[test]
    fn quote_operator_is_unsupported() {
        let err = extract_text(b"BT (x) ' ET").unwrap_err();
        assert!(matches!(err, PdfError::Unsupported(_)));
    }

    #[test]
    fn graphics_only_stream_counts_zero_text_ops() {
        let ext = extract_text(b"q 1 0 0 1 0 0 cm 0 0 50 50 re f Q").unwrap();
        assert_eq!(ext.text, "");
        assert_eq!(ext.text_op_count, 0);
    }

    #[test]
    fn winansi_bytes_decode() {
        let ext = extract_text(b"BT (caf\xe9 \x93quoted\x94) Tj ET").unwrap();
        assert_eq!(ext.text, "café “quoted”");
    }
}
