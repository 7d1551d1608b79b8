//! PDF object model and byte-level lexer.
//!
//! Covers the object syntax needed for body-text extraction: numbers,
//! booleans, null, names, literal and hex strings, arrays, dictionaries,
//! streams and indirect references. The same lexer tokenizes both document
//! objects and content streams.

use std::collections::BTreeMap;

use super::PdfError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjId {
    pub num: u32,
    pub gen: u16,
}

pub type Dict = BTreeMap<String, Object>;

#[derive(Debug, Clone, PartialEq)]
pub enum Object {
    Null,
    Boolean(bool),
    Integer(i64),
    Real(f64),
    /// Name without the leading slash, `#xx` escapes resolved.
    Name(String),
    /// Raw string bytes; text decoding happens at use sites.
    String(Vec<u8>),
    Array(Vec<Object>),
    Dict(Dict),
    Reference(ObjId),
}

impl Object {
    pub fn as_dict(&self) -> Option<&Dict> {
        match self {
            Object::Dict(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Object::Integer(i) => Some(*i),
            Object::Real(r) => Some(*r as i64),
            _ => None,
        }
    }

    pub fn as_name(&self) -> Option<&str> {
        match self {
            Object::Name(n) => Some(n),
            _ => None,
        }
    }
}

fn is_whitespace(b: u8) -> bool {
    matches!(b, b'\0' | b'\t' | b'\n' | b'\x0c' | b'\r' | b' ')
}

fn is_delimiter(b: u8) -> bool {
    matches!(
        b,
        b'(' | b')' | b'<' | b'>' | b'[' | b']' | b'{' | b'}' | b'/' | b'%'
    )
}

pub fn is_regular(b: u8) -> bool {
    !is_whitespace(b) && !is_delimiter(b)
}

/// Cursor over raw PDF bytes.
pub struct Lexer<'a> {
    pub bytes: &'a [u8],
    pub pos: usize,
}

impl<'a> Lexer<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub fn at(bytes: &'a [u8], pos: usize) -> Self {
        Self { bytes, pos }
    }

    pub fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    /// Skip whitespace and `%` comments (comments run to end of line).
    pub fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(b) if is_whitespace(b) => {
                    self.pos += 1;
                }
                Some(b'%') => {
                    while let Some(b) = self.peek() {
                        self.pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                _ => return,
            }
        }
    }

    /// Next run of regular characters (operator or keyword).
    pub fn read_keyword(&mut self) -> String {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if is_regular(b) {
                self.pos += 1;
            } else {
                break;
            }
        }
        String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned()
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), PdfError> {
        self.skip_ws();
        let got = self.read_keyword();
        if got == kw {
            Ok(())
        } else {
            Err(PdfError::Malformed(format!(
                "expected '{kw}' at byte {}, found '{got}'",
                self.pos
            )))
        }
    }

    /// Parse one object. Indirect references (`n g R`) are recognized by
    /// lookahead and returned as [`Object::Reference`].
    pub fn parse_object(&mut self) -> Result<Object, PdfError> {
        self.skip_ws();
        let Some(b) = self.peek() else {
            return Err(PdfError::Malformed("unexpected end of data".into()));
        };
        match b {
            b'<' => {
                if self.bytes.get(self.pos + 1) == Some(&b'<') {
                    self.pos += 2;
                    self.parse_dict_body()
                } else {
                    self.pos += 1;
                    self.parse_hex_string()
                }
            }
            b'(' => {
                self.pos += 1;
                self.parse_literal_string()
            }
            b'/' => {
                self.pos += 1;
                Ok(Object::Name(self.parse_name_body()))
            }
            b'[' => {
                self.pos += 1;
                let mut items = Vec::new();
                loop {
                    self.skip_ws();
                    if self.peek() == Some(b']') {
                        self.pos += 1;
                        return Ok(Object::Array(items));
                    }
                    if self.peek().is_none() {
                        return Err(PdfError::Malformed("unterminated array".into()));
                    }
                    items.push(self.parse_object()?);
                }
            }
            b'+' | b'-' | b'.' | b'0'..=b'9' => self.parse_number_or_reference(),
            _ => {
                let kw = self.read_keyword();
                match kw.as_str() {
                    "true" => Ok(Object::Boolean(true)),
                    "false" => Ok(Object::Boolean(false)),
                    "null" => Ok(Object::Null),
                    "" => Err(PdfError::Malformed(format!(
                        "unexpected byte 0x{b:02x} at offset {}",
                        self.pos
                    ))),
                    other => Err(PdfError::Malformed(format!("unexpected keyword '{other}'"))),
                }
            }
        }
    }

    fn parse_dict_body(&mut self) -> Result<Object, PdfError> {
        let mut dict = Dict::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'>') => {
                    if self.bytes.get(self.pos + 1) == Some(&b'>') {
                        self.pos += 2;
                        return Ok(Object::Dict(dict));
                    }
                    return Err(PdfError::Malformed("lone '>' in dictionary".into()));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let key = self.parse_name_body();
                    let value = self.parse_object()?;
                    dict.insert(key, value);
                }
                Some(b) => {
                    return Err(PdfError::Malformed(format!(
                        "expected name key in dictionary, found 0x{b:02x}"
                    )))
                }
                None => return Err(PdfError::Malformed("unterminated dictionary".into())),
            }
        }
    }

    fn parse_name_body(&mut self) -> String {
        let mut out = Vec::new();
        while let Some(b) = self.peek() {
            if !is_regular(b) {
                break;
            }
            self.pos += 1;
            if b == b'#' {
                let hi = self.peek().and_then(hex_val);
                if let Some(hi) = hi {
                    self.pos += 1;
                    let lo = self.peek().and_then(hex_val);
                    if let Some(lo) = lo {
                        self.pos += 1;
                        out.push(hi * 16 + lo);
                        continue;
                    }
                }
                out.push(b'#');
            } else {
                out.push(b);
            }
        }
        String::from_utf8_lossy(&out).into_owned()
    }

    fn parse_hex_string(&mut self) -> Result<Object, PdfError> {
        let mut nibbles = Vec::new();
        loop {
            match self.bump() {
                Some(b'>') => break,
                Some(b) if is_whitespace(b) => continue,
                Some(b) => match hex_val(b) {
                    Some(v) => nibbles.push(v),
                    None => {
                        return Err(PdfError::Malformed(format!(
                            "invalid hex digit 0x{b:02x} in string"
                        )))
                    }
                },
                None => return Err(PdfError::Malformed("unterminated hex string".into())),
            }
        }
        let mut bytes = Vec::with_capacity(nibbles.len().div_ceil(2));
        for pair in nibbles.chunks(2) {
            let hi = pair[0];
            let lo = pair.get(1).copied().unwrap_or(0);
            bytes.push(hi * 16 + lo);
        }
        Ok(Object::String(bytes))
    }

    fn parse_literal_string(&mut self) -> Result<Object, PdfError> {
        let mut out = Vec::new();
        let mut depth = 1usize;
        loop {
            let Some(b) = self.bump() else {
                return Err(PdfError::Malformed("unterminated literal string".into()));
            };
            match b {
                b'(' => {
                    depth += 1;
                    out.push(b);
                }
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(Object::String(out));
                    }
                    out.push(b);
                }
                b'\\' => {
                    let Some(esc) = self.bump() else {
                        return Err(PdfError::Malformed("dangling escape in string".into()));
                    };
                    match esc {
                        b'n' => out.push(b'\n'),
                        b'r' => out.push(b'\r'),
                        b't' => out.push(b'\t'),
                        b'b' => out.push(0x08),
                        b'f' => out.push(0x0c),
                        b'(' | b')' | b'\\' => out.push(esc),
                        b'\r' => {
                            // Line continuation; swallow an LF after CR.
                            if self.peek() == Some(b'\n') {
                                self.pos += 1;
                            }
                        }
                        b'\n' => {}
                        b'0'..=b'7' => {
                            let mut value = u16::from(esc - b'0');
                            for _ in 0..2 {
                                match self.peek() {
                                    Some(d @ b'0'..=b'7') => {
                                        value = value * 8 + u16::from(d - b'0');
                                        self.pos += 1;
                                    }
                                    _ => break,
                                }
                            }
                            out.push((value & 0xff) as u8);
                        }
                        other => out.push(other),
                    }
                }
                other => out.push(other),
            }
        }
    }

    fn parse_number_or_reference(&mut self) -> Result<Object, PdfError> {
        let first = self.parse_number()?;
        if let Object::Integer(num) = first {
            if num >= 0 {
                // Lookahead for "gen R".
                let save = self.pos;
                self.skip_ws();
                if matches!(self.peek(), Some(b'0'..=b'9')) {
                    if let Ok(Object::Integer(gen)) = self.parse_number() {
                        if (0..=i64::from(u16::MAX)).contains(&gen) {
                            self.skip_ws();
                            if self.peek() == Some(b'R')
                                && !self
                                    .bytes
                                    .get(self.pos + 1)
                                    .copied()
                                    .is_some_and(is_regular)
                            {
                                self.pos += 1;
                                return Ok(Object::Reference(ObjId {
                                    num: num as u32,
                                    gen: gen as u16,
                                }));
                            }
                        }
                    }
                }
                self.pos = save;
            }
        }
        Ok(first)
    }

    fn parse_number(&mut self) -> Result<Object, PdfError> {
        let start = self.pos;
        if matches!(self.peek(), Some(b'+') | Some(b'-')) {
            self.pos += 1;
        }
        let mut is_real = false;
        while let Some(b) = self.peek() {
            match b {
                b'0'..=b'9' => self.pos += 1,
                b'.' => {
                    is_real = true;
                    self.pos += 1;
                }
                _ => break,
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| PdfError::Malformed("non-ASCII number".into()))?;
        if text.is_empty() || text == "+" || text == "-" || text == "." {
            return Err(PdfError::Malformed(format!(
                "invalid number at byte {start}"
            )));
        }
        if is_real {
            text.parse::<f64>()
                .map(Object::Real)
                .map_err(|e| PdfError::Malformed(format!("bad real '{text}': {e}")))
        } else {
            text.parse::<i64>()
                .map(Object::Integer)
                .map_err(|e| PdfError::Malformed(format!("bad integer '{text}': {e}")))
        }
    }
}

fn hex_val(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}

/// Decode a PDF text string: UTF-16BE when it carries the BOM, otherwise
/// WinAnsi/Latin-1 single bytes.
pub fn decode_text_string(bytes: &[u8]) -> String {
    if bytes.len() >= 2 && bytes[0] == 0xFE && bytes[1] == 0xFF {
        let mut out = String::new();
        let mut units: Vec<u16> = Vec::with_capacity(bytes.len() / 2);
        for pair in bytes[2..].chunks(2) {
            if pair.len() == 2 {
                units.push(u16::from(pair[0]) << 8 | u16::from(pair[1]));
            }
        }
        out.extend(char::decode_utf16(units).map(|r| r.unwrap_or(char::REPLACEMENT_CHARACTER)));
        out
    } else {
        bytes.iter().map(|&b| winansi_char(b)).collect()
    }
}

/// WinAnsi (CP1252) byte to char; identical to Latin-1 outside 0x80–0x9F.
pub fn winansi_char(b: u8) -> char {
    match b {
        0x80 => '€',
        0x82 => '‚',
        0x83 => 'ƒ',
        0x84 => '„',
        0x85 => '…',
        0x86 => '†',
        0x87 => '‡',
        0x88 => 'ˆ',
        0x89 => '‰',
        0x8A => 'Š',
        0x8B => '‹',
        0x8C => 'Œ',
        0x8E => 'Ž',
        0x91 => '\u{2018}',
        0x92 => '\u{2019}',
        0x93 => '“',
        0x94 => '”',
        0x95 => '•',
        0x96 => '–',
        0x97 => '—',
        0x98 => '˜',
        0x99 => '™',
        0x9A => 'š',
        0x9B => '›',
        0x9C => 'œ',
        0x9E => 'ž',
        0x9F => 'Ÿ',
        0x81 | 0x8D | 0x8F | 0x90 | 0x9D => char::REPLACEMENT_CHARACTER,
        other => other as char,
    }
}
