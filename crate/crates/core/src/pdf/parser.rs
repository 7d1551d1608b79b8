//! Document-level parsing: header, cross-reference tables, trailer, object
//! resolution, page tree traversal and stream decoding.

use std::collections::{HashMap, HashSet};
use std::io::Read;

use super::content;
use super::object::{decode_text_string, Dict, Lexer, ObjId, Object};
use super::{PdfError, PdfInfo};

/// How far from EOF we look for the `startxref` keyword.
const STARTXREF_WINDOW: usize = 2048;
/// Page tree depth guard against reference cycles.
const MAX_TREE_DEPTH: usize = 64;

#[derive(Debug)]
pub struct PdfFile<'a> {
    bytes: &'a [u8],
    /// Byte offset of each in-use object, newest xref section winning.
    offsets: HashMap<ObjId, usize>,
    trailer: Dict,
    /// Page object ids in document order.
    pages: Vec<ObjId>,
}

impl<'a> PdfFile<'a> {
    /// Parse document structure: header, xref chain, trailer and page tree.
    /// Rejects encrypted files and cross-reference streams up front.
    pub fn parse(bytes: &'a [u8]) -> Result<Self, PdfError> {
        if !bytes.starts_with(b"%PDF-") {
            return Err(PdfError::Malformed("missing %PDF- header".into()));
        }

        let start = find_startxref(bytes)?;
        let mut offsets = HashMap::new();
        let mut trailer: Option<Dict> = None;
        let mut xref_pos = Some(start);
        let mut seen = HashSet::new();
        while let Some(pos) = xref_pos {
            if !seen.insert(pos) {
                return Err(PdfError::Malformed("cyclic xref chain".into()));
            }
            let section = parse_xref_section(bytes, pos)?;
            for (id, offset) in section.entries {
                // Older sections must not override newer ones.
                offsets.entry(id).or_insert(offset);
            }
            xref_pos = section
                .trailer
                .get("Prev")
                .and_then(Object::as_int)
                .map(|v| v as usize);
            if trailer.is_none() {
                trailer = Some(section.trailer);
            }
        }
        let trailer = trailer.ok_or_else(|| PdfError::Malformed("missing trailer".into()))?;

        if trailer.contains_key("Encrypt") {
            return Err(PdfError::Unsupported("encrypted document".into()));
        }

        let mut file = Self {
            bytes,
            offsets,
            trailer,
            pages: Vec::new(),
        };
        file.pages = file.collect_pages()?;
        Ok(file)
    }

    pub fn page_count(&self) -> usize {
        self.pages.len()
    }

    /// Title/author/creation date from the Info dictionary, when present.
    pub fn info(&self) -> PdfInfo {
        let mut out = PdfInfo::default();
        let Some(info_obj) = self.trailer.get("Info") else {
            return out;
        };
        let Ok(resolved) = self.resolve(info_obj) else {
            return out;
        };
        let Some(dict) = resolved.as_dict() else {
            return out;
        };
        let text = |key: &str| -> Option<String> {
            match self.resolve(dict.get(key)?) {
                Ok(Object::String(bytes)) => Some(decode_text_string(&bytes)),
                _ => None,
            }
        };
        out.title = text("Title");
        out.author = text("Author");
        out.creation_date = text("CreationDate");
        out
    }

    /// Per-page body text, in page order. Fails on any page whose content
    /// stream falls outside the supported subset, and on documents with no
    /// text-showing operators at all (image-only/scanned).
    pub fn extract_pages(&self) -> Result<Vec<String>, PdfError> {
        let mut pages = Vec::with_capacity(self.pages.len());
        let mut text_ops_total = 0usize;
        for &page_id in &self.pages {
            let data = self.page_content(page_id)?;
            let extraction = content::extract_text(&data)?;
            text_ops_total += extraction.text_op_count;
            pages.push(extraction.text);
        }
        if text_ops_total == 0 {
            return Err(PdfError::Unsupported(
                "no text-showing operators (image-only or scanned document)".into(),
            ));
        }
        Ok(pages)
    }

    /// Decoded content bytes of one page (multiple streams concatenated).
    fn page_content(&self, page_id: ObjId) -> Result<Vec<u8>, PdfError> {
        let page = self.resolve_id(page_id)?;
        let dict = page
            .as_dict()
            .ok_or_else(|| PdfError::Malformed("page object is not a dictionary".into()))?;
        let mut data = Vec::new();
        match dict.get("Contents") {
            None => {}
            Some(contents) => {
                let resolved_refs: Vec<ObjId> = match contents {
                    Object::Reference(id) => vec![*id],
                    Object::Array(items) => items
                        .iter()
                        .map(|item| match item {
                            Object::Reference(id) => Ok(*id),
                            _ => Err(PdfError::Malformed(
                                "page Contents array holds a non-reference".into(),
                            )),
                        })
                        .collect::<Result<_, _>>()?,
                    _ => {
                        return Err(PdfError::Malformed(
                            "page Contents is neither reference nor array".into(),
                        ))
                    }
                };
                for id in resolved_refs {
                    let stream = self.parse_stream(id)?;
                    if !data.is_empty() {
                        data.push(b'\n');
                    }
                    data.extend_from_slice(&stream);
                }
            }
        }
        Ok(data)
    }

    fn collect_pages(&self) -> Result<Vec<ObjId>, PdfError> {
        let root = self
            .trailer
            .get("Root")
            .ok_or_else(|| PdfError::Malformed("trailer has no Root".into()))?;
        let catalog = self.resolve(root)?;
        let catalog = catalog
            .as_dict()
            .ok_or_else(|| PdfError::Malformed("catalog is not a dictionary".into()))?;
        let pages_ref = catalog
            .get("Pages")
            .ok_or_else(|| PdfError::Malformed("catalog has no Pages".into()))?;

        let mut pages = Vec::new();
        let mut visited = HashSet::new();
        self.walk_page_tree(pages_ref, 0, &mut visited, &mut pages)?;
        Ok(pages)
    }

    fn walk_page_tree(
        &self,
        node_ref: &Object,
        depth: usize,
        visited: &mut HashSet<ObjId>,
        pages: &mut Vec<ObjId>,
    ) -> Result<(), PdfError> {
        if depth > MAX_TREE_DEPTH {
            return Err(PdfError::Malformed("page tree too deep".into()));
        }
        let id = match node_ref {
            Object::Reference(id) => *id,
            _ => {
                return Err(PdfError::Malformed(
                    "page tree node is not a reference".into(),
                ))
            }
        };
        if !visited.insert(id) {
            return Err(PdfError::Malformed("cycle in page tree".into()));
        }
        let node = self.resolve_id(id)?;
        let dict = node
            .as_dict()
            .ok_or_else(|| PdfError::Malformed("page tree node is not a dictionary".into()))?;
        match dict.get("Type").and_then(Object::as_name) {
            Some("Pages") => {
                let kids = match dict.get("Kids") {
                    Some(Object::Array(kids)) => kids,
                    _ => return Err(PdfError::Malformed("Pages node has no Kids array".into())),
                };
                for kid in kids {
                    self.walk_page_tree(kid, depth + 1, visited, pages)?;
                }
                Ok(())
            }
            Some("Page") => {
                pages.push(id);
                Ok(())
            }
            other => Err(PdfError::Malformed(format!(
                "page tree node has type {other:?}"
            ))),
        }
    }

    /// Follow a reference chain to a direct object (depth-limited).
    fn resolve(&self, obj: &Object) -> Result<Object, PdfError> {
        let mut current = obj.clone();
        for _ in 0..32 {
            match current {
                Object::Reference(id) => current = self.resolve_id(id)?,
                other => return Ok(other),
            }
        }
        Err(PdfError::Malformed("reference chain too long".into()))
    }

    /// Parse the body object at an xref offset (ignoring any stream data).
    fn resolve_id(&self, id: ObjId) -> Result<Object, PdfError> {
        let (obj, _) = self.parse_indirect(id)?;
        Ok(obj)
    }

    fn parse_indirect(&self, id: ObjId) -> Result<(Object, Option<usize>), PdfError> {
        let &offset = self.offsets.get(&id).ok_or_else(|| {
            PdfError::Malformed(format!("object {} {} not in xref", id.num, id.gen))
        })?;
        if offset >= self.bytes.len() {
            return Err(PdfError::Malformed(format!(
                "xref offset {offset} beyond end of file"
            )));
        }
        let mut lexer = Lexer::at(self.bytes, offset);
        lexer.skip_ws();
        let num = lexer.parse_object()?;
        let gen = lexer.parse_object()?;
        match (num.as_int(), gen.as_int()) {
            (Some(n), Some(g)) if n == i64::from(id.num) && g == i64::from(id.gen) => {}
            _ => {
                return Err(PdfError::Malformed(format!(
                    "object at offset {offset} does not match xref entry {} {}",
                    id.num, id.gen
                )))
            }
        }
        lexer.expect_keyword("obj")?;
        let obj = lexer.parse_object()?;
        lexer.skip_ws();

        // A `stream` keyword after the dictionary means stream data follows.
        if lexer.read_keyword() == "stream" {
            // EOL after the keyword: CRLF or LF.
            if lexer.peek() == Some(b'\r') {
                lexer.pos += 1;
            }
            if lexer.peek() == Some(b'\n') {
                lexer.pos += 1;
            }
            return Ok((obj, Some(lexer.pos)));
        }
        Ok((obj, None))
    }

    /// Decoded bytes of the stream object `id`, applying the subset's
    /// filters (none, or FlateDecode without predictors).
    fn parse_stream(&self, id: ObjId) -> Result<Vec<u8>, PdfError> {
        let (obj, data_start) = self.parse_indirect(id)?;
        let dict = obj
            .as_dict()
            .ok_or_else(|| PdfError::Malformed("stream object has no dictionary".into()))?;
        let data_start = data_start
            .ok_or_else(|| PdfError::Malformed("content object is not a stream".into()))?;

        let length = match dict.get("Length") {
            Some(obj) => self.resolve(obj)?.as_int(),
            None => None,
        };
        let raw = match length {
            Some(len) if len >= 0 && data_start + len as usize <= self.bytes.len() => {
                &self.bytes[data_start..data_start + len as usize]
            }
            // Length missing or unusable: scan for the endstream keyword.
            _ => {
                let window = &self.bytes[data_start..];
                let end = find_subslice(window, b"endstream").ok_or_else(|| {
                    PdfError::Malformed("stream without endstream keyword".into())
                })?;
                let mut end = end;
                // Strip the EOL that precedes `endstream`.
                if end > 0 && window[end - 1] == b'\n' {
                    end -= 1;
                }
                if end > 0 && window[end - 1] == b'\r' {
                    end -= 1;
                }
                &window[..end]
            }
        };

        if dict.contains_key("DecodeParms") || dict.contains_key("DP") {
            return Err(PdfError::Unsupported("stream decode parameters".into()));
        }
        match dict.get("Filter") {
            None => Ok(raw.to_vec()),
            Some(filter) => {
                let filter = self.resolve(filter)?;
                let names: Vec<String> = match filter {
                    Object::Name(n) => vec![n],
                    Object::Array(items) => items
                        .into_iter()
                        .filter_map(|o| match o {
                            Object::Name(n) => Some(n),
                            _ => None,
                        })
                        .collect(),
                    _ => return Err(PdfError::Malformed("Filter is not a name or array".into())),
                };
                match names.as_slice() {
                    [single] if single == "FlateDecode" => inflate(raw),
                    _ => Err(PdfError::Unsupported(format!(
                        "stream filter {}",
                        names.join("+")
                    ))),
                }
            }
        }
    }
}

struct XrefSection {
    entries: Vec<(ObjId, usize)>,
    trailer: Dict,
}

fn parse_xref_section(bytes: &[u8], pos: usize) -> Result<XrefSection, PdfError> {
    if pos >= bytes.len() {
        return Err(PdfError::Malformed("startxref points beyond EOF".into()));
    }
    let mut lexer = Lexer::at(bytes, pos);
    lexer.skip_ws();
    let save = lexer.pos;
    let kw = lexer.read_keyword();
    if kw != "xref" {
        // An indirect object here means a PDF 1.5+ cross-reference stream.
        lexer.pos = save;
        if lexer.parse_object().is_ok() {
            return Err(PdfError::Unsupported("cross-reference streams".into()));
        }
        return Err(PdfError::Malformed(format!(
            "expected 'xref' at offset {pos}"
        )));
    }

    let mut entries = Vec::new();
    loop {
        lexer.skip_ws();
        let save = lexer.pos;
        let kw = lexer.read_keyword();
        if kw == "trailer" {
            let trailer = lexer.parse_object()?;
            let trailer = trailer
                .as_dict()
                .cloned()
                .ok_or_else(|| PdfError::Malformed("trailer is not a dictionary".into()))?;
            return Ok(XrefSection { entries, trailer });
        }
        lexer.pos = save;

        let first = lexer
            .parse_object()?
            .as_int()
            .ok_or_else(|| PdfError::Malformed("bad xref subsection header".into()))?;
        let count = lexer
            .parse_object()?
            .as_int()
            .ok_or_else(|| PdfError::Malformed("bad xref subsection count".into()))?;
        if !(0..=1_000_000).contains(&count) || first < 0 {
            return Err(PdfError::Malformed("unreasonable xref subsection".into()));
        }
        for i in 0..count {
            lexer.skip_ws();
            let offset = lexer
                .parse_object()?
                .as_int()
                .ok_or_else(|| PdfError::Malformed("bad xref entry offset".into()))?;
            let gen = lexer
                .parse_object()?
                .as_int()
                .ok_or_else(|| PdfError::Malformed("bad xref entry generation".into()))?;
            lexer.skip_ws();
            let kind = lexer.read_keyword();
            match kind.as_str() {
                "n" => {
                    entries.push((
                        ObjId {
                            num: (first + i) as u32,
                            gen: gen as u16,
                        },
                        offset as usize,
                    ));
                }
                "f" => {}
                other => return Err(PdfError::Malformed(format!("xref entry kind '{other}'"))),
            }
        }
    }
}

fn find_startxref(bytes: &[u8]) -> Result<usize, PdfError> {
    let window_start = bytes.len().saturating_sub(STARTXREF_WINDOW);
    let window = &bytes[window_start..];
    let at = find_last_subslice(window, b"startxref")
        .ok_or_else(|| PdfError::Malformed("missing startxref".into()))?;
    let mut lexer = Lexer::at(bytes, window_start + at + b"startxref".len());
    let offset = lexer
        .parse_object()
        .ok()
        .and_then(|o| o.as_int())
        .ok_or_else(|| PdfError::Malformed("bad startxref offset".into()))?;
    if offset < 0 {
        return Err(PdfError::Malformed("negative startxref offset".into()));
    }
    Ok(offset as usize)
}

fn find_subslice(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack
        .windows(needle.len())
        .position(|window| window == needle)
}

fn find_last_subslice(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack
        .windows(needle.len())
        .rposition(|window| window == needle)
}

fn inflate(data: &[u8]) -> Result<Vec<u8>, PdfError> {
    let mut out = Vec::new();
    flate2::read::ZlibDecoder::new(data)
        .read_to_end(&mut out)
        .map_err(|e| PdfError::Malformed(format!("flate stream: {e}")))?;
    Ok(out)
}
