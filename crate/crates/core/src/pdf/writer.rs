//! Tiny PDF writer for generating subset-conformant files.
//!
//! Extraction fixtures are built with this writer instead of being checked
//! in as binary blobs: a test states the lines it wants on each page,
//! builds the file, runs extraction and compares against its own inputs.
//! The writer emits classic xref tables, Helvetica text drawn with `Td` +
//! `Tj`, and optionally FlateDecode-compressed content streams — exactly
//! the subset the parser accepts.

use std::io::Write as _;
use std::path::Path;

use flate2::write::ZlibEncoder;
use flate2::Compression;

#[derive(Debug, Clone)]
enum Page {
    /// One `Td`/`Tj` pair per line.
    Text(Vec<String>),
    /// Rectangle fill, no text-showing operators.
    ImageOnly,
    /// Verbatim content stream body.
    Raw(String),
}

/// Builder for small test PDFs.
#[derive(Debug, Clone, Default)]
pub struct PdfBuilder {
    pages: Vec<Page>,
    title: Option<String>,
    author: Option<String>,
    creation_date: Option<String>,
    compress: bool,
    mark_encrypted: bool,
}

impl PdfBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add a page drawing each line as its own text-positioning + show pair.
    pub fn page(mut self, lines: &[&str]) -> Self {
        self.pages
            .push(Page::Text(lines.iter().map(|l| l.to_string()).collect()));
        self
    }

    /// Add a page with graphics but no text-showing operators.
    pub fn image_only_page(mut self) -> Self {
        self.pages.push(Page::ImageOnly);
        self
    }

    /// Add a page whose content stream body is given verbatim.
    pub fn raw_content_page(mut self, content: &str) -> Self {
        self.pages.push(Page::Raw(content.to_string()));
        self
    }

    pub fn title(mut self, title: &str) -> Self {
        self.title = Some(title.to_string());
        self
    }

    pub fn author(mut self, author: &str) -> Self {
        self.author = Some(author.to_string());
        self
    }

    /// Raw PDF date string, e.g. `D:20240810120000Z`.
    pub fn creation_date(mut self, date: &str) -> Self {
        self.creation_date = Some(date.to_string());
        self
    }

    /// FlateDecode-compress content streams.
    pub fn compress(mut self, yes: bool) -> Self {
        self.compress = yes;
        self
    }

    /// Emit an /Encrypt entry in the trailer (content is NOT actually
    /// encrypted; this exists to exercise the parser's rejection path).
    pub fn mark_encrypted(mut self) -> Self {
        self.mark_encrypted = true;
        self
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.build())
    }

    pub fn build(&self) -> Vec<u8> {
        let n_pages = self.pages.len() as u32;
        let has_info =
            self.title.is_some() || self.author.is_some() || self.creation_date.is_some();

        // Object numbering: 1 catalog, 2 pages, 3 font, then for page i
        // (0-based): 4+2i page, 5+2i content; info and encrypt follow.
        let page_obj = |i: u32| 4 + 2 * i;
        let content_obj = |i: u32| 5 + 2 * i;
        let mut next = 4 + 2 * n_pages;
        let info_obj = if has_info {
            let n = next;
            next += 1;
            Some(n)
        } else {
            None
        };
        let encrypt_obj = if self.mark_encrypted {
            let n = next;
            next += 1;
            Some(n)
        } else {
            None
        };
        let obj_count = next; // ids 1..next-1, xref size = next

        let mut out: Vec<u8> = Vec::new();
        out.extend_from_slice(b"%PDF-1.4\n");
        // Binary marker comment per convention.
        out.extend_from_slice(b"%\xE2\xE3\xCF\xD3\n");

        fn emit(out: &mut Vec<u8>, offsets: &mut Vec<(u32, usize)>, num: u32, body: &[u8]) {
            offsets.push((num, out.len()));
            out.extend_from_slice(format!("{num} 0 obj\n").as_bytes());
            out.extend_from_slice(body);
            out.extend_from_slice(b"\nendobj\n");
        }
        let mut offsets: Vec<(u32, usize)> = Vec::new();

        emit(
            &mut out,
            &mut offsets,
            1,
            b"<< /Type /Catalog /Pages 2 0 R >>",
        );

        let kids: Vec<String> = (0..n_pages)
            .map(|i| format!("{} 0 R", page_obj(i)))
            .collect();
        emit(
            &mut out,
            &mut offsets,
            2,
            format!(
                "<< /Type /Pages /Kids [{}] /Count {} >>",
                kids.join(" "),
                n_pages
            )
            .as_bytes(),
        );

        emit(
            &mut out,
            &mut offsets,
            3,
            b"<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>",
        );

        for (i, page) in self.pages.iter().enumerate() {
            let i = i as u32;
            emit(
                &mut out,
                &mut offsets,
                page_obj(i),
                format!(
                    "<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] \
                     /Resources << /Font << /F1 3 0 R >> >> /Contents {} 0 R >>",
                    content_obj(i)
                )
                .as_bytes(),
            );

            let body = content_stream_body(page);
            let (data, filter) = if self.compress {
                let mut enc = ZlibEncoder::new(Vec::new(), Compression::default());
                enc.write_all(body.as_bytes()).expect("in-memory write");
                (
                    enc.finish().expect("in-memory finish"),
                    " /Filter /FlateDecode",
                )
            } else {
                (body.into_bytes(), "")
            };

            offsets.push((content_obj(i), out.len()));
            out.extend_from_slice(format!("{} 0 obj\n", content_obj(i)).as_bytes());
            out.extend_from_slice(
                format!("<< /Length {}{} >>\nstream\n", data.len(), filter).as_bytes(),
            );
            out.extend_from_slice(&data);
            out.extend_from_slice(b"\nendstream\nendobj\n");
        }

        if let Some(num) = info_obj {
            let mut entries = String::new();
            if let Some(t) = &self.title {
                entries.push_str(&format!(" /Title ({})", escape_string(t)));
            }
            if let Some(a) = &self.author {
                entries.push_str(&format!(" /Author ({})", escape_string(a)));
            }
            if let Some(d) = &self.creation_date {
                entries.push_str(&format!(" /CreationDate ({})", escape_string(d)));
            }
            emit(
                &mut out,
                &mut offsets,
                num,
                format!("<<{entries} >>").as_bytes(),
            );
        }

        if let Some(num) = encrypt_obj {
            emit(
                &mut out,
                &mut offsets,
                num,
                b"<< /Filter /Standard /V 1 /R 2 /P -44 >>",
            );
        }

        let xref_pos = out.len();
        out.extend_from_slice(format!("xref\n0 {obj_count}\n").as_bytes());
        out.extend_from_slice(b"0000000000 65535 f \n");
        offsets.sort_by_key(|&(num, _)| num);
        for &(_, offset) in &offsets {
            out.extend_from_slice(format!("{offset:010} 00000 n \n").as_bytes());
        }

        let mut trailer = format!("trailer\n<< /Size {obj_count} /Root 1 0 R");
        if let Some(num) = info_obj {
            trailer.push_str(&format!(" /Info {num} 0 R"));
        }
        if let Some(num) = encrypt_obj {
            trailer.push_str(&format!(" /Encrypt {num} 0 R"));
        }
        trailer.push_str(" >>\n");
        out.extend_from_slice(trailer.as_bytes());
        out.extend_from_slice(format!("startxref\n{xref_pos}\n%%EOF\n").as_bytes());
        out
    }
}

fn content_stream_body(page: &Page) -> String {
    match page {
        Page::Text(lines) => {
            let mut body = String::from("BT\n/F1 12 Tf\n72 720 Td\n");
            for (i, line) in lines.iter().enumerate() {
                if i > 0 {
                    body.push_str("0 -14 Td\n");
                }
                body.push_str(&format!("({}) Tj\n", escape_string(line)));
            }
            body.push_str("ET");
            body
        }
        Page::ImageOnly => "q\n1 0 0 1 72 600 cm\n0 0 100 100 re f\nQ".to_string(),
        Page::Raw(content) => content.clone(),
    }
}

/// Escape for a PDF literal string, encoding to WinAnsi bytes rendered as
/// octal escapes when outside ASCII.
fn escape_string(text: &str) -> String {
    let mut out = String::new();
    for c in text.chars() {
        match c {
            '(' => out.push_str("\\("),
            ')' => out.push_str("\\)"),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x80 => out.push(c),
            c => match winansi_byte(c) {
                Some(b) => out.push_str(&format!("\\{b:03o}")),
                None => out.push('?'),
            },
        }
    }
    out
}

/// Inverse of the WinAnsi decoding used by the parser, for round-trips.
fn winansi_byte(c: char) -> Option<u8> {
    let code = c as u32;
    if (0xA0..=0xFF).contains(&code) {
        return Some(code as u8);
    }
    let b = match c {
        '€' => 0x80,
        '‚' => 0x82,
        'ƒ' => 0x83,
        '„' => 0x84,
        '…' => 0x85,
        '†' => 0x86,
        '‡' => 0x87,
        'ˆ' => 0x88,
        '‰' => 0x89,
        'Š' => 0x8A,
        '‹' => 0x8B,
        'Œ' => 0x8C,
        'Ž' => 0x8E,
        '\u{2018}' => 0x91,
        '\u{2019}' => 0x92,
        '“' => 0x93,
        '”' => 0x94,
        '•' => 0x95,
        '–' => 0x96,
        '—' => 0x97,
        '˜' => 0x98,
        '™' => 0x99,
        'š' => 0x9A,
        '›' => 0x9B,
        'œ' => 0x9C,
        'ž' => 0x9E,
        'Ÿ' => 0x9F,
        _ => return None,
    };
    Some(b)
}
